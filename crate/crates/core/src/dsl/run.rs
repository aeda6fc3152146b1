//! Executing circuits and the one-query search demo.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::dsl::ast::{CircuitAst, GateKind, GateStatement, MeasurementSpec};
use crate::dsl::lower::lower;
use crate::engine::{
    run_density_pipeline, run_gudder_mixed_pipeline, run_pure_pipeline, BranchDistribution,
    PipelineResult,
};
use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;
use crate::measurement::{
    efficiency, outcome_distribution, renormalize, sample, zeno_detection_probability,
    MeasurementScenario, Outcome, OutcomeDistribution,
};
use crate::state::{DensityMatrix, StateVector};

/// Which density semantics a circuit is evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// `Σ pᵢ Uᵢ ψ`
    Pure,
    /// `A ρ A†` with `A = Σ pᵢ Uᵢ`
    Density,
    /// `Σ pᵢ Uᵢ ρ Uᵢ†`
    Mixed,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pure => "pure",
            Self::Density => "density",
            Self::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pure" => Ok(Self::Pure),
            "density" => Ok(Self::Density),
            "mixed" => Ok(Self::Mixed),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

/// Everything a run produces, ready for JSON emission.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub backend: Backend,
    pub qubits: usize,
    pub measure: MeasurementSpec,
    pub efficiency: f64,
    /// Raw pipeline output (unnormalized).
    pub output: PipelineResult,
    /// `None` under scenario 1; `Some(None)` when renormalization hit NULL.
    pub renormalized: Option<Option<PipelineResult>>,
    pub distribution: OutcomeDistribution,
    /// Most likely outcome; NULL when nothing can be registered.
    pub outcome: Outcome,
    pub counts: Option<BTreeMap<Outcome, u64>>,
    pub zeno_boosted_efficiency: Option<f64>,
}

/// Runs a circuit from `input` (default `|0…0⟩`) under the given backend.
///
/// The Gudder-mixed backend is trace preserving, so only scenario 1 and the
/// thresholded trace renormalization apply to it; `ideal` is rejected.
pub fn run(ast: &CircuitAst, backend: Backend, input: Option<&StateVector>) -> Result<RunReport> {
    let dim = ast.dim();
    let psi = match input {
        Some(s) => {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            s.require_normalized()?;
            s.clone()
        }
        None => StateVector::basis(dim, 0)?,
    };
    let scenario = ast.measure.scenario;
    if backend == Backend::Mixed && scenario == MeasurementScenario::RenormIdeal {
        return Err(Error::BackendScenario {
            backend: backend.name().into(),
            scenario: scenario.keyword().into(),
        });
    }
    let (p, gate) = lower(ast)?;
    let result = match backend {
        Backend::Pure => run_pure_pipeline(&psi, &p, &gate)?,
        Backend::Density => run_density_pipeline(&DensityMatrix::from_pure(&psi), &p, &gate)?,
        Backend::Mixed => PipelineResult::density(run_gudder_mixed_pipeline(
            &DensityMatrix::from_pure(&psi),
            &p,
            &gate,
        )?),
    };
    report(backend, ast.qubit_count, ast.measure, result)
}

fn report(
    backend: Backend,
    qubits: usize,
    measure: MeasurementSpec,
    output: PipelineResult,
) -> Result<RunReport> {
    let eff = efficiency(&output);
    let renormalized = match measure.scenario {
        MeasurementScenario::NoRenorm => None,
        s => Some(renormalize(&output, s)?),
    };
    let distribution = outcome_distribution(&output, measure.scenario)?;
    let outcome = match &renormalized {
        Some(None) => Outcome::Null,
        _ => distribution.most_likely(),
    };
    let counts = match measure.shots {
        0 => None,
        shots => Some(sample(&distribution, shots, measure.seed)?),
    };
    let zeno_boosted_efficiency = measure
        .zeno
        .map(|z| zeno_detection_probability(eff.clamp(0.0, 1.0), z))
        .transpose()?;
    Ok(RunReport {
        backend,
        qubits,
        measure,
        efficiency: eff,
        output,
        renormalized,
        distribution,
        outcome,
        counts,
        zeno_boosted_efficiency,
    })
}

/// Uniform superposition over `n` states, divided evenly into the identity
/// and `−O_t` (global sign flip followed by the phase oracle marking
/// `target`). The combined operator is `(I − O_t)/2 = |t⟩⟨t|`, so the output
/// is `|t⟩/√n`: one oracle call, success probability `1/n` before
/// renormalization and `1` after.
pub fn search_circuit(n: usize, target: usize, measure: MeasurementSpec) -> Result<CircuitAst> {
    if !(2..=MAX_DIM).contains(&n) || !n.is_power_of_two() {
        return Err(Error::InvalidSearch(format!(
            "n = {n} must be a power of two in 2..={MAX_DIM}"
        )));
    }
    if target >= n {
        return Err(Error::InvalidSearch(format!(
            "target {target} out of range for n = {n}"
        )));
    }
    let stmt = |gate, targets: Vec<usize>| GateStatement {
        gate,
        params: Vec::new(),
        targets,
    };
    Ok(CircuitAst {
        qubit_count: n.trailing_zeros() as usize,
        dist: BranchDistribution::new(vec![0.5, 0.5])?,
        paths: vec![
            vec![stmt(GateKind::I, vec![])],
            vec![stmt(GateKind::Neg, vec![]), stmt(GateKind::Oracle, vec![target])],
        ],
        measure,
    })
}

pub fn run_search(n: usize, target: usize, measure: MeasurementSpec) -> Result<RunReport> {
    let ast = search_circuit(n, target, measure)?;
    let input = StateVector::uniform(n)?;
    run(&ast, Backend::Pure, Some(&input))
}

/// Exact-distribution search run under `scenario`.
pub fn run_search_demo(n: usize, target: usize, scenario: MeasurementScenario) -> Result<RunReport> {
    run_search(n, target, MeasurementSpec::exact(scenario))
}
