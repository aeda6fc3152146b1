//! Python bindings. Matrices are lists of rows of Python `complex`, states
//! are lists of `complex`, reports are JSON strings.

use dualsim::dsl::{self, Backend, CircuitAst, MeasurementSpec};
use dualsim::{
    BranchDistribution, Complex64, DensityMatrix, DualityGate, Matrix, MeasurementScenario,
    StateVector, Term, UnitaryCombination, ZenoSchedule,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(dualsim_py, CircuitParseError, PyValueError);

fn value_error(e: dualsim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_error(e: dsl::ParseError) -> PyErr {
    CircuitParseError::new_err((e.to_string(), e.code.as_str(), e.line))
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> dualsim::Result<Matrix> {
    Matrix::from_rows(&rows)
}

fn from_matrix(m: &Matrix) -> Vec<Vec<Complex64>> {
    m.to_rows()
}

fn gate_inputs(
    weights: Vec<f64>,
    unitaries: Vec<Vec<Vec<Complex64>>>,
) -> dualsim::Result<(BranchDistribution, DualityGate)> {
    let p = BranchDistribution::new(weights)?;
    let us = unitaries
        .into_iter()
        .map(to_matrix)
        .collect::<dualsim::Result<Vec<_>>>()?;
    Ok((p, DualityGate::new(us)?))
}

fn scenario(name: &str, eps: f64) -> PyResult<MeasurementScenario> {
    match name {
        "none" => Ok(MeasurementScenario::NoRenorm),
        "renorm" => MeasurementScenario::threshold(eps).map_err(value_error),
        "ideal" => Ok(MeasurementScenario::RenormIdeal),
        other => Err(PyValueError::new_err(format!("unknown scenario '{other}'"))),
    }
}

/// `Σ pᵢ Uᵢ` as a dense matrix.
#[pyfunction]
fn duality_operator(
    weights: Vec<f64>,
    unitaries: Vec<Vec<Vec<Complex64>>>,
) -> PyResult<Vec<Vec<Complex64>>> {
    let (p, g) = gate_inputs(weights, unitaries).map_err(value_error)?;
    let a = dualsim::duality_operator(&p, &g).map_err(value_error)?;
    Ok(from_matrix(&a))
}

/// Divide, gate and combine a normalized state; returns the unnormalized output.
#[pyfunction]
fn run_pure_pipeline(
    psi: Vec<Complex64>,
    weights: Vec<f64>,
    unitaries: Vec<Vec<Vec<Complex64>>>,
) -> PyResult<Vec<Complex64>> {
    let psi = StateVector::normalized(psi).map_err(value_error)?;
    let (p, g) = gate_inputs(weights, unitaries).map_err(value_error)?;
    let out = dualsim::run_pure_pipeline(&psi, &p, &g).map_err(value_error)?;
    Ok(out.as_pure().expect("pure pipeline").amplitudes().to_vec())
}

/// Coherent density evolution `A ρ A†`.
#[pyfunction]
fn run_density_pipeline(
    rho: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    unitaries: Vec<Vec<Vec<Complex64>>>,
) -> PyResult<Vec<Vec<Complex64>>> {
    let rho = to_matrix(rho)
        .and_then(DensityMatrix::proper)
        .map_err(value_error)?;
    let (p, g) = gate_inputs(weights, unitaries).map_err(value_error)?;
    let out = dualsim::run_density_pipeline(&rho, &p, &g).map_err(value_error)?;
    Ok(from_matrix(out.as_density().expect("density pipeline").matrix()))
}

/// Incoherent evolution `Σ pᵢ Uᵢ ρ Uᵢ†`.
#[pyfunction]
fn run_gudder_mixed_pipeline(
    rho: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    unitaries: Vec<Vec<Vec<Complex64>>>,
) -> PyResult<Vec<Vec<Complex64>>> {
    let rho = to_matrix(rho)
        .and_then(DensityMatrix::proper)
        .map_err(value_error)?;
    let (p, g) = gate_inputs(weights, unitaries).map_err(value_error)?;
    let out = dualsim::run_gudder_mixed_pipeline(&rho, &p, &g).map_err(value_error)?;
    Ok(from_matrix(out.matrix()))
}

/// `[(coefficient, unitary), ...]` with at most four terms.
#[pyfunction]
fn decompose(a: Vec<Vec<Complex64>>) -> PyResult<Vec<(f64, Vec<Vec<Complex64>>)>> {
    let a = to_matrix(a).map_err(value_error)?;
    let comb = dualsim::decompose(&a).map_err(value_error)?;
    Ok(comb
        .terms()
        .iter()
        .map(|t| (t.coefficient, from_matrix(&t.unitary)))
        .collect())
}

/// `Σ cᵢ Vᵢ` from the output of `decompose`.
#[pyfunction]
fn reconstruct(terms: Vec<(f64, Vec<Vec<Complex64>>)>) -> PyResult<Vec<Vec<Complex64>>> {
    let terms = terms
        .into_iter()
        .map(|(coefficient, u)| {
            Ok(Term {
                coefficient,
                unitary: to_matrix(u)?,
            })
        })
        .collect::<dualsim::Result<Vec<_>>>()
        .map_err(value_error)?;
    let dim = terms
        .first()
        .map(|t| t.unitary.rows())
        .ok_or_else(|| PyValueError::new_err("empty combination"))?;
    let comb = UnitaryCombination::new(dim, terms).map_err(value_error)?;
    Ok(from_matrix(&dualsim::reconstruct(&comb).map_err(value_error)?))
}

#[pyfunction]
fn zeno_detection_probability(eta: f64, repeats: u32) -> PyResult<f64> {
    let schedule = ZenoSchedule::new(repeats).map_err(value_error)?;
    dualsim::zeno_detection_probability(eta, schedule).map_err(value_error)
}

/// One-query search over `n` items; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (n, target, scenario="renorm", eps=1e-9, shots=0, seed=0))]
fn search_demo(
    n: usize,
    target: usize,
    scenario: &str,
    eps: f64,
    shots: u64,
    seed: u64,
) -> PyResult<String> {
    let measure = MeasurementSpec {
        scenario: self::scenario(scenario, eps)?,
        shots,
        seed,
        zeno: None,
    };
    let report = dsl::run_search(n, target, measure).map_err(value_error)?;
    Ok(dsl::emit_json(&report))
}

/// A parsed `.dc` circuit.
#[pyclass(frozen)]
struct Circuit {
    ast: CircuitAst,
}

#[pymethods]
impl Circuit {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            ast: dsl::parse(text).map_err(parse_error)?,
        })
    }

    #[getter]
    fn qubits(&self) -> usize {
        self.ast.qubit_count
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.ast.dist.weights().to_vec()
    }

    /// Per-path unitaries after lowering.
    fn unitaries(&self) -> PyResult<Vec<Vec<Vec<Complex64>>>> {
        let (_, g) = dsl::lower(&self.ast).map_err(value_error)?;
        Ok(g.unitaries().iter().map(from_matrix).collect())
    }

    /// Runs the circuit and returns the JSON report.
    #[pyo3(signature = (backend="pure", input=None))]
    fn run(&self, backend: &str, input: Option<Vec<Complex64>>) -> PyResult<String> {
        let backend: Backend = backend.parse().map_err(PyValueError::new_err)?;
        let input = input
            .map(StateVector::normalized)
            .transpose()
            .map_err(value_error)?;
        let report = dsl::run(&self.ast, backend, input.as_ref()).map_err(value_error)?;
        Ok(dsl::emit_json(&report))
    }

    fn __str__(&self) -> String {
        self.ast.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(qubits={}, branches={})",
            self.ast.qubit_count,
            self.ast.paths.len()
        )
    }
}

/// Parses and runs circuit text in one call; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (text, backend="pure", input=None))]
fn run_circuit(text: &str, backend: &str, input: Option<Vec<Complex64>>) -> PyResult<String> {
    Circuit::new(text)?.run(backend, input)
}

/// Populates `m`; shared by the extension entry point and the Rust tests.
pub fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CircuitParseError", m.py().get_type::<CircuitParseError>())?;
    m.add_class::<Circuit>()?;
    m.add_function(wrap_pyfunction!(duality_operator, m)?)?;
    m.add_function(wrap_pyfunction!(run_pure_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(run_density_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(run_gudder_mixed_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(zeno_detection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(search_demo, m)?)?;
    m.add_function(wrap_pyfunction!(run_circuit, m)?)?;
    Ok(())
}

#[pymodule]
fn dualsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    init(m)
}
