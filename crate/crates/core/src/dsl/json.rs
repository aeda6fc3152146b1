//! JSON input and output.
//!
//! Reports are written with a fixed key order and every float rendered with
//! 17 significant digits (C's `%.17g`), so identical runs produce identical
//! bytes and every value round-trips exactly.
//!
//! Report schema:
//!
//! ```text
//! {
//!   "backend": "pure" | "density" | "mixed",
//!   "qubits": int,
//!   "scenario": "none" | "renorm" | "ideal",
//!   "eps": float,                        // renorm / ideal only
//!   "shots": int,
//!   "seed": int,
//!   "efficiency": float,
//!   "outcome": int | null,               // most likely outcome, null = NULL
//!   "output_state": {
//!     "kind": "pure" | "density",
//!     "unnormalized": state,
//!     "renormalized": state | null       // renorm / ideal only
//!   },
//!   "distribution": { "probabilities": [float], "null_probability": float },
//!   "counts": { "<index>": int, ..., "null": int },   // shots > 0 only
//!   "zeno_repeats": int,                 // zeno only
//!   "zeno_boosted_efficiency": float     // zeno only
//! }
//! ```
//!
//! A pure `state` is an array of `[re, im]` pairs; a density `state` is an
//! array of rows of `[re, im]` pairs.

use std::collections::BTreeMap;
use std::io;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::dsl::run::RunReport;
use crate::engine::{PipelineOutput, PipelineResult};
use crate::error::Error;
use crate::lcu::UnitaryCombination;
use crate::linalg::Matrix;
use crate::measurement::{MeasurementScenario, Outcome};
use crate::state::StateVector;
use num_complex::Complex64;

/// Formats like C's `%.17g`, with `-0` written as `0`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return "null".into();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };

    if !(-4..17).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        return format!("{sign}{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let mut s = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let split = exp as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    };
    trim_fraction(&mut s);
    format!("{sign}{s}")
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

struct G17;

impl serde_json::ser::Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes any value with the `%.17g` float formatter.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

type Pair = [f64; 2];

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

#[derive(Serialize)]
#[serde(untagged)]
enum StateJson {
    Amplitudes(Vec<Pair>),
    Rows(Vec<Vec<Pair>>),
}

impl StateJson {
    fn from_result(r: &PipelineResult) -> Self {
        match &r.output {
            PipelineOutput::Pure(s) => Self::Amplitudes(s.amplitudes().iter().map(pair).collect()),
            PipelineOutput::Density(rho) => {
                let m = rho.matrix();
                Self::Rows(
                    (0..m.rows())
                        .map(|i| m.row(i).iter().map(pair).collect())
                        .collect(),
                )
            }
        }
    }
}

#[derive(Serialize)]
struct OutputStateJson {
    kind: &'static str,
    unnormalized: StateJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    renormalized: Option<Option<StateJson>>,
}

#[derive(Serialize)]
struct DistributionJson<'a> {
    probabilities: &'a [f64],
    null_probability: f64,
}

struct CountsJson<'a>(&'a BTreeMap<Outcome, u64>);

impl Serialize for CountsJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(&k.to_string(), v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    backend: &'static str,
    qubits: usize,
    scenario: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    shots: u64,
    seed: u64,
    efficiency: f64,
    outcome: Option<usize>,
    output_state: OutputStateJson,
    distribution: DistributionJson<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<CountsJson<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeno_repeats: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeno_boosted_efficiency: Option<f64>,
}

/// Serializes a run report (see the module docs for the schema).
pub fn emit_json(report: &RunReport) -> String {
    let scenario = report.measure.scenario;
    let kind = match report.output.output {
        PipelineOutput::Pure(_) => "pure",
        PipelineOutput::Density(_) => "density",
    };
    let view = ReportJson {
        backend: report.backend.name(),
        qubits: report.qubits,
        scenario: scenario.keyword(),
        eps: match scenario {
            MeasurementScenario::NoRenorm => None,
            s => s.epsilon(),
        },
        shots: report.measure.shots,
        seed: report.measure.seed,
        efficiency: report.efficiency,
        outcome: match report.outcome {
            Outcome::Basis(k) => Some(k),
            Outcome::Null => None,
        },
        output_state: OutputStateJson {
            kind,
            unnormalized: StateJson::from_result(&report.output),
            renormalized: report
                .renormalized
                .as_ref()
                .map(|r| r.as_ref().map(StateJson::from_result)),
        },
        distribution: DistributionJson {
            probabilities: report.distribution.probabilities(),
            null_probability: report.distribution.null_probability(),
        },
        counts: report.counts.as_ref().map(CountsJson),
        zeno_repeats: report.measure.zeno.map(|z| z.repeats()),
        zeno_boosted_efficiency: report.zeno_boosted_efficiency,
    };
    to_json_string(&view)
}

/// Matrix file format: `{"rows": r, "cols": c, "entries": [[re, im], ...]}`
/// with entries in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Pair>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(pair).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self, Error> {
        Matrix::new(
            j.rows,
            j.cols,
            j.entries
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub fn parse_matrix_json(text: &str) -> Result<Matrix, InputError> {
    let j: MatrixJson = serde_json::from_str(text)?;
    Ok(Matrix::try_from(j)?)
}

/// State file format: a JSON array of `[re, im]` amplitude pairs.
pub fn parse_state_json(text: &str) -> Result<StateVector, InputError> {
    let pairs: Vec<Pair> = serde_json::from_str(text)?;
    Ok(StateVector::new(
        pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect(),
    )?)
}

#[derive(Serialize)]
struct TermJson {
    coefficient: f64,
    unitary: MatrixJson,
}

/// `[{"coefficient": c, "unitary": <matrix>}, ...]`
pub fn emit_combination_json(comb: &UnitaryCombination) -> String {
    let terms: Vec<TermJson> = comb
        .terms()
        .iter()
        .map(|t| TermJson {
            coefficient: t.coefficient,
            unitary: MatrixJson::from(&t.unitary),
        })
        .collect();
    to_json_string(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse;
    use crate::dsl::run::{run, run_search_demo, Backend};
    use proptest::prelude::*;

    #[test]
    fn g17_matches_printf() {
        // Expected strings are C printf("%.17g") output.
        let cases = [
            (0.0625, "0.0625"),
            (0.5, "0.5"),
            (1.0, "1"),
            (1.0 / 3.0, "0.33333333333333331"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e-9, "1.0000000000000001e-09"),
            (123456.0, "123456"),
            (1e17, "1e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (0.00001, "1.0000000000000001e-05"),
            (std::f64::consts::FRAC_1_SQRT_2, "0.70710678118654757"),
            (-0.0, "0"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g17(x), s, "{x:e}");
        }
    }

    proptest! {
        #[test]
        fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let s = format_g17(x);
            let back: f64 = s.parse().unwrap();
            prop_assert!(back == x || (x == 0.0 && back == 0.0));
            let v: serde_json::Value = serde_json::from_str(&s).unwrap();
            prop_assert!(v.is_number());
        }
    }

    #[test]
    fn search_report_shape() {
        let r = run_search_demo(16, 5, MeasurementScenario::threshold(1e-9).unwrap()).unwrap();
        let text = emit_json(&r);
        assert!(text.contains("\"efficiency\":0.0625"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["outcome"], 5);
        assert_eq!(v["output_state"]["kind"], "pure");
        assert!(v.get("counts").is_none());
        let keys: Vec<&str> = text
            .trim_start_matches('{')
            .split(",\"")
            .filter_map(|s| s.trim_start_matches('"').split_once("\":").map(|(k, _)| k))
            .take(7)
            .collect();
        assert_eq!(
            keys,
            ["backend", "qubits", "scenario", "eps", "shots", "seed", "efficiency"]
        );
    }

    #[test]
    fn null_outcome_and_counts() {
        let ast = parse(
            "qubits 1\ndivide 0.5 0.5\npath 0: I\npath 1: NEG\ncombine\nmeasure scenario=renorm shots=10 seed=1",
        )
        .unwrap();
        let r = run(&ast, Backend::Pure, None).unwrap();
        let text = emit_json(&r);
        assert!(text.contains("\"outcome\":null"));
        assert!(text.contains("\"renormalized\":null"));
        assert!(text.contains("\"null_probability\":1"));
        assert!(text.contains("\"counts\":{\"null\":10}"));
        assert_eq!(emit_json(&run(&ast, Backend::Pure, None).unwrap()), text);
    }

    #[test]
    fn matrix_json_round_trip() {
        let text = r#"{"rows":2,"cols":2,"entries":[[0,0],[1,0],[0,0],[0,-1]]}"#;
        let m = parse_matrix_json(text).unwrap();
        assert_eq!(m[(1, 1)], Complex64::new(0.0, -1.0));
        let back = to_json_string(&MatrixJson::from(&m));
        assert_eq!(parse_matrix_json(&back).unwrap(), m);
        assert!(matches!(
            parse_matrix_json(r#"{"rows":2,"cols":2,"entries":[[0,0]]}"#),
            Err(InputError::Invalid(_))
        ));
        assert!(matches!(parse_matrix_json("{"), Err(InputError::Json(_))));
    }

    #[test]
    fn state_json() {
        let s = parse_state_json("[[0.6,0],[0,0.8]]").unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(parse_state_json("[[1,0],[1,0]]").is_err());
        assert!(parse_state_json("[]").is_err());
    }
}
