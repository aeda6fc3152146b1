//! Simulator for duality quantum computing.
//!
//! A duality computer divides a wave into weighted sub-waves, applies a
//! different unitary to each, and recombines them, realizing the generally
//! non-unitary operator `Σ pᵢ Uᵢ`. This crate provides:
//!
//! - [`linalg`]: dense complex matrices, a Jacobi Hermitian eigensolver,
//!   operator norms and PSD square roots;
//! - [`engine`]: divider, combiner and duality-gate pipelines for pure states,
//!   coherent density matrices and the incoherent mixed-state map;
//! - [`measurement`]: detection efficiency, the three renormalization
//!   scenarios, Zeno boosting and seeded shot sampling;
//! - [`lcu`]: decomposition of any square matrix into at most four positively
//!   weighted unitaries;
//! - [`dsl`]: the `.dc` circuit format, its runner and JSON reports.

pub mod dsl;
pub mod engine;
pub mod error;
pub mod lcu;
pub mod linalg;
pub mod measurement;
pub mod state;

pub use engine::{
    apply_gate_density, apply_gate_pure, combine_density, combine_pure, convex_average_check,
    divide_density, divide_pure, duality_operator, run_density_pipeline, run_gudder_mixed_pipeline,
    run_pure_pipeline, BranchDistribution, DividedDensityState, DividedPureState, DualityGate,
    PipelineOutput, PipelineResult,
};
pub use error::{Error, Result};
pub use lcu::{
    decompose, hermitian_split, hermitian_to_unitaries, is_in_contraction_set,
    midpoint_unitarity_check, reconstruct, ContractionWitness, Term, UnitaryCombination,
};
pub use linalg::{
    dagger, frobenius_distance, hermitian_eig, is_unitary, matmul, operator_norm, psd_sqrt,
    tensor_product, EigenDecomposition, Matrix, TOL_RECON, TOL_STRICT,
};
pub use measurement::{
    efficiency, measure_scenario1, outcome_distribution, renormalize, sample,
    zeno_detection_probability, MeasurementScenario, Outcome, OutcomeDistribution, ZenoSchedule,
};
pub use num_complex::Complex64;
pub use state::{DensityMatrix, StateVector};
