//! Line-oriented parser for `.dc` circuit files.
//!
//! ```text
//! qubits 1
//! divide 0.5 0.5
//! path 0: I
//! path 1: Z
//! combine
//! measure scenario=renorm eps=1e-9 shots=0
//! ```
//!
//! `#` starts a comment. Statements within a path are separated by `;` and
//! applied left to right. A single-qubit gate written without a target acts
//! on every qubit.

use std::fmt;

use crate::dsl::ast::{CircuitAst, GateKind, GateStatement, MeasurementSpec, TargetArity};
use crate::engine::{BranchDistribution, MAX_BRANCHES, TOL_PROB_SUM};
use crate::measurement::{MeasurementScenario, ZenoSchedule, DEFAULT_EPSILON};

/// Largest register the format accepts (dimension 64).
pub const MAX_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    ProbSum,
    NegWeight,
    UnknownGate,
    BadArity,
    TargetRange,
    PathCount,
    Syntax,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ProbSum => "E_PROB_SUM",
            Self::NegWeight => "E_NEG_WEIGHT",
            Self::UnknownGate => "E_UNKNOWN_GATE",
            Self::BadArity => "E_BAD_ARITY",
            Self::TargetRange => "E_TARGET_RANGE",
            Self::PathCount => "E_PATH_COUNT",
            Self::Syntax => "E_SYNTAX",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        [
            Self::ProbSum,
            Self::NegWeight,
            Self::UnknownGate,
            Self::BadArity,
            Self::TargetRange,
            Self::PathCount,
            Self::Syntax,
        ]
        .into_iter()
        .find(|c| c.as_str() == code)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code} at line {line}: {message}")]
pub struct ParseError {
    pub code: ErrorCode,
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(code: ErrorCode, line: usize, message: impl Into<String>) -> Self {
        Self {
            code,
            line,
            message: message.into(),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::new(ErrorCode::Syntax, line, message)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    Qubits,
    Divide,
    Paths,
    Measure,
    Done,
}

struct PathLine {
    index: usize,
    line: usize,
    stmts: Vec<GateStatement>,
}

pub fn parse(text: &str) -> PResult<CircuitAst> {
    let mut stage = Stage::Qubits;
    let mut qubits = 0usize;
    let mut dist: Option<BranchDistribution> = None;
    let mut paths: Vec<PathLine> = Vec::new();
    let mut measure: Option<MeasurementSpec> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = match content.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (content, ""),
        };
        // "path 0:..." may also be written "path 0 :" or "path0:"; only the
        // keyword prefix matters here.
        let keyword_lower = keyword.to_ascii_lowercase();
        match (stage, keyword_lower.as_str()) {
            (Stage::Qubits, "qubits") => {
                qubits = parse_qubits(rest, line)?;
                stage = Stage::Divide;
            }
            (Stage::Divide, "divide") => {
                dist = Some(parse_divide(rest, line)?);
                stage = Stage::Paths;
            }
            (Stage::Paths, k) if k.starts_with("path") => {
                let body = content["path".len()..].trim();
                paths.push(parse_path(body, line, qubits)?);
            }
            (Stage::Paths, "combine") => {
                if !rest.is_empty() {
                    return Err(syntax(line, "combine takes no arguments"));
                }
                let n = dist.as_ref().map_or(0, BranchDistribution::len);
                check_path_indices(&mut paths, n, line)?;
                stage = Stage::Measure;
            }
            (Stage::Measure, "measure") => {
                measure = Some(parse_measure(rest, line)?);
                stage = Stage::Done;
            }
            (Stage::Done, _) => {
                return Err(syntax(line, "unexpected content after measure"));
            }
            (_, k) => {
                let expected = match stage {
                    Stage::Qubits => "qubits",
                    Stage::Divide => "divide",
                    Stage::Paths => "path or combine",
                    Stage::Measure => "measure",
                    Stage::Done => unreachable!(),
                };
                return Err(syntax(line, format!("expected {expected}, found '{k}'")));
            }
        }
    }

    let eof = last_line + 1;
    if stage != Stage::Done {
        let missing = match stage {
            Stage::Qubits => "qubits",
            Stage::Divide => "divide",
            Stage::Paths => "combine",
            _ => "measure",
        };
        return Err(syntax(eof, format!("missing {missing}")));
    }
    Ok(CircuitAst {
        qubit_count: qubits,
        dist: dist.expect("stage ordering"),
        paths: paths.into_iter().map(|p| p.stmts).collect(),
        measure: measure.expect("stage ordering"),
    })
}

fn parse_qubits(rest: &str, line: usize) -> PResult<usize> {
    let q: usize = rest
        .parse()
        .map_err(|_| syntax(line, format!("qubit count '{rest}' is not an integer")))?;
    if q == 0 || q > MAX_QUBITS {
        return Err(syntax(
            line,
            format!("qubit count {q} outside 1..={MAX_QUBITS}"),
        ));
    }
    Ok(q)
}

fn parse_real(tok: &str, line: usize) -> PResult<f64> {
    match tok.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(syntax(line, format!("'{tok}' is not a finite number"))),
    }
}

fn parse_divide(rest: &str, line: usize) -> PResult<BranchDistribution> {
    let weights = rest
        .split_whitespace()
        .map(|t| parse_real(t, line))
        .collect::<PResult<Vec<f64>>>()?;
    if weights.is_empty() {
        return Err(syntax(line, "divide needs at least one weight"));
    }
    if let Some(w) = weights.iter().find(|w| **w < 0.0) {
        return Err(ParseError::new(
            ErrorCode::NegWeight,
            line,
            format!("weight {w} is negative"),
        ));
    }
    if weights.len() > MAX_BRANCHES {
        return Err(syntax(
            line,
            format!("{} branches exceeds the maximum of {MAX_BRANCHES}", weights.len()),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TOL_PROB_SUM {
        return Err(ParseError::new(
            ErrorCode::ProbSum,
            line,
            format!("weights sum to {total}, expected 1"),
        ));
    }
    BranchDistribution::new(weights).map_err(|e| ParseError::new(ErrorCode::ProbSum, line, e.to_string()))
}

fn parse_path(body: &str, line: usize, qubits: usize) -> PResult<PathLine> {
    let (index, stmts) = body
        .split_once(':')
        .ok_or_else(|| syntax(line, "path needs 'path <index>: <statements>'"))?;
    let index: usize = index
        .trim()
        .parse()
        .map_err(|_| syntax(line, format!("path index '{}' is not an integer", index.trim())))?;
    let stmts = stmts
        .split(';')
        .map(|s| parse_stmt(s.trim(), line, qubits))
        .collect::<PResult<Vec<_>>>()?;
    Ok(PathLine { index, line, stmts })
}

fn parse_stmt(text: &str, line: usize, qubits: usize) -> PResult<GateStatement> {
    let mut tokens = text.split_whitespace();
    let name = tokens
        .next()
        .ok_or_else(|| syntax(line, "empty gate statement"))?;
    let gate = GateKind::from_name(name).ok_or_else(|| {
        ParseError::new(ErrorCode::UnknownGate, line, format!("unknown gate '{name}'"))
    })?;
    let args: Vec<&str> = tokens.collect();
    let k = gate.param_count();
    if args.len() < k {
        return Err(ParseError::new(
            ErrorCode::BadArity,
            line,
            format!("{} takes {k} parameter(s)", gate.name()),
        ));
    }
    let params = args[..k]
        .iter()
        .map(|t| parse_real(t, line))
        .collect::<PResult<Vec<_>>>()?;
    let targets = args[k..]
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| syntax(line, format!("target '{t}' is not a nonnegative integer")))
        })
        .collect::<PResult<Vec<_>>>()?;

    let arity_ok = match gate.target_arity() {
        TargetArity::Exactly(n) => targets.len() == n,
        TargetArity::AtLeastOne => !targets.is_empty(),
        TargetArity::OneOrAll => targets.len() <= 1,
    };
    if !arity_ok {
        let want = match gate.target_arity() {
            TargetArity::Exactly(n) => format!("{n}"),
            TargetArity::AtLeastOne => "at least 1".into(),
            TargetArity::OneOrAll => "0 or 1".into(),
        };
        return Err(ParseError::new(
            ErrorCode::BadArity,
            line,
            format!("{} takes {want} target(s), got {}", gate.name(), targets.len()),
        ));
    }
    let limit = if gate.targets_are_basis_indices() {
        1usize << qubits
    } else {
        qubits
    };
    if let Some(t) = targets.iter().find(|t| **t >= limit) {
        return Err(ParseError::new(
            ErrorCode::TargetRange,
            line,
            format!("target {t} out of range for {} (limit {limit})", gate.name()),
        ));
    }
    if targets.len() == 2 && targets[0] == targets[1] {
        return Err(ParseError::new(
            ErrorCode::BadArity,
            line,
            format!("{} needs two distinct qubits", gate.name()),
        ));
    }
    Ok(GateStatement {
        gate,
        params,
        targets,
    })
}

fn check_path_indices(paths: &mut [PathLine], n: usize, combine_line: usize) -> PResult<()> {
    let mut seen = vec![false; n];
    for p in paths.iter() {
        if p.index >= n {
            return Err(ParseError::new(
                ErrorCode::PathCount,
                p.line,
                format!("path {} but divide has {n} branches", p.index),
            ));
        }
        if std::mem::replace(&mut seen[p.index], true) {
            return Err(ParseError::new(
                ErrorCode::PathCount,
                p.line,
                format!("path {} defined twice", p.index),
            ));
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(ParseError::new(
            ErrorCode::PathCount,
            combine_line,
            format!("path {missing} missing ({} of {n} defined)", paths.len()),
        ));
    }
    paths.sort_by_key(|p| p.index);
    Ok(())
}

fn parse_measure(rest: &str, line: usize) -> PResult<MeasurementSpec> {
    let mut scenario: Option<&str> = None;
    let mut eps: Option<f64> = None;
    let mut shots: Option<u64> = None;
    let mut seed: Option<u64> = None;
    let mut zeno: Option<u32> = None;

    fn set<T>(slot: &mut Option<T>, v: T, key: &str, line: usize) -> PResult<()> {
        if slot.replace(v).is_some() {
            return Err(syntax(line, format!("'{key}' given twice")));
        }
        Ok(())
    }
    fn int<T: std::str::FromStr>(v: &str, key: &str, line: usize) -> PResult<T> {
        v.parse()
            .map_err(|_| syntax(line, format!("{key}='{v}' is not a nonnegative integer")))
    }

    for tok in rest.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected key=value, found '{tok}'")))?;
        match key {
            "scenario" => set(&mut scenario, value, key, line)?,
            "eps" => {
                let e = parse_real(value, line)?;
                if e < 0.0 {
                    return Err(syntax(line, "eps must be nonnegative"));
                }
                set(&mut eps, e, key, line)?
            }
            "shots" => set(&mut shots, int(value, key, line)?, key, line)?,
            "seed" => set(&mut seed, int(value, key, line)?, key, line)?,
            "zeno" => {
                let r: u32 = int(value, key, line)?;
                if r == 0 {
                    return Err(syntax(line, "zeno repeats must be at least 1"));
                }
                set(&mut zeno, r, key, line)?
            }
            _ => return Err(syntax(line, format!("unknown measure key '{key}'"))),
        }
    }

    let scenario = match (scenario, eps) {
        (None, _) => return Err(syntax(line, "measure needs scenario=none|renorm|ideal")),
        (Some("none"), None) => MeasurementScenario::NoRenorm,
        (Some("ideal"), None) => MeasurementScenario::RenormIdeal,
        (Some("renorm"), e) => MeasurementScenario::RenormThreshold {
            epsilon: e.unwrap_or(DEFAULT_EPSILON),
        },
        (Some(s @ ("none" | "ideal")), Some(_)) => {
            return Err(syntax(line, format!("eps is not allowed with scenario={s}")))
        }
        (Some(s), _) => return Err(syntax(line, format!("unknown scenario '{s}'"))),
    };
    Ok(MeasurementSpec {
        scenario,
        shots: shots.unwrap_or(0),
        seed: seed.unwrap_or(0),
        zeno: zeno.map(|r| ZenoSchedule::new(r).expect("checked nonzero")),
    })
}
