//! Divider, combiner and duality-gate pipelines.
//!
//! Three semantics are provided side by side:
//!
//! * pure states: `ψ ↦ Σ pᵢ Uᵢ ψ` through an explicit divide, gate, combine;
//! * coherent density matrices: `ρ ↦ A ρ A†` with `A = Σ pᵢ Uᵢ`, where the
//!   divided state keeps every cross block `Mᵢⱼ = pᵢ pⱼ ρ / ‖p‖²`;
//! * the incoherent ("Gudder-mixed") map `ρ ↦ Σ pᵢ Uᵢ ρ Uᵢ†`, which is trace
//!   preserving and disagrees with the pure-state picture.
//!
//! The divider `D_p ψ = ⊕ pᵢ ψ / ‖p‖` is an isometry. The combiner is the
//! linear map `⊕ φᵢ ↦ ‖p‖ Σ φᵢ`; it inverts the divider on its image but is
//! not its adjoint off that subspace.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, frobenius_distance, is_unitary, matmul, Matrix, MAX_DIM};
use crate::state::{validate_ensemble, DensityMatrix, StateVector};

/// Maximum number of branches a divider may produce.
pub const MAX_BRANCHES: usize = 16;
/// Tolerance on `Σ pᵢ = 1`.
pub const TOL_PROB_SUM: f64 = 1e-9;
/// Unitarity tolerance for per-path operators.
pub const TOL_UNITARY: f64 = 1e-9;

/// Probability vector `p = (p₁, …, pₙ)` with its Euclidean norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDistribution {
    weights: Vec<f64>,
    norm: f64,
}

impl BranchDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no branches".into()));
        }
        if weights.len() > MAX_BRANCHES {
            return Err(Error::InvalidDistribution(format!(
                "{} branches exceeds the maximum of {MAX_BRANCHES}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weight {w} is negative")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TOL_PROB_SUM {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        Ok(Self { weights, norm })
    }

    /// `n` equal weights.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `‖p‖ = sqrt(Σ pᵢ²)`
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// The per-path unitaries `(U₁, …, Uₙ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityGate {
    unitaries: Vec<Matrix>,
}

impl DualityGate {
    pub fn new(unitaries: Vec<Matrix>) -> Result<Self> {
        let Some(first) = unitaries.first() else {
            return Err(Error::InvalidDistribution("gate has no paths".into()));
        };
        if unitaries.len() > MAX_BRANCHES {
            return Err(Error::BranchCount {
                gate: unitaries.len(),
                dist: MAX_BRANCHES,
            });
        }
        let dim = first.rows();
        if dim > MAX_DIM {
            return Err(Error::TooLarge(dim));
        }
        for (index, u) in unitaries.iter().enumerate() {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::ShapeMismatch {
                    left: (dim, dim),
                    right: (u.rows(), u.cols()),
                });
            }
            if !is_unitary(u, TOL_UNITARY) {
                return Err(Error::NotUnitary { index });
            }
        }
        Ok(Self { unitaries })
    }

    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].rows()
    }

    fn check(&self, p: &BranchDistribution, dim: usize) -> Result<()> {
        if self.len() != p.len() {
            return Err(Error::BranchCount {
                gate: self.len(),
                dist: p.len(),
            });
        }
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Output of the divider on a pure state: one (sub-normalized) wave per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedPureState {
    branches: Vec<StateVector>,
    dist: BranchDistribution,
}

impl DividedPureState {
    pub fn branches(&self) -> &[StateVector] {
        &self.branches
    }

    pub fn distribution(&self) -> &BranchDistribution {
        &self.dist
    }

    pub fn dim(&self) -> usize {
        self.branches[0].dim()
    }

    /// `Σᵢ ‖branchᵢ‖²`
    pub fn total_norm_sqr(&self) -> f64 {
        self.branches.iter().map(StateVector::norm_sqr).sum()
    }

    /// Concatenation `⊕ branchᵢ` as a single vector of length `n·dim`.
    pub fn direct_sum(&self) -> Vec<Complex64> {
        self.branches
            .iter()
            .flat_map(|b| b.amplitudes().iter().copied())
            .collect()
    }
}

/// Output of the divider on a density matrix: the full `n×n` grid of
/// `dim×dim` blocks of `D_p ρ D_p†`.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDensityState {
    blocks: Vec<Matrix>,
    dist: BranchDistribution,
    dim: usize,
}

impl DividedDensityState {
    pub fn block(&self, i: usize, j: usize) -> &Matrix {
        &self.blocks[i * self.dist.len() + j]
    }

    pub fn distribution(&self) -> &BranchDistribution {
        &self.dist
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branch_count(&self) -> usize {
        self.dist.len()
    }

    /// Assembled `n·dim × n·dim` block matrix.
    pub fn full_matrix(&self) -> Matrix {
        let n = self.branch_count();
        let d = self.dim;
        let mut out = Matrix::zeros(n * d, n * d);
        for bi in 0..n {
            for bj in 0..n {
                let m = self.block(bi, bj);
                for r in 0..d {
                    for c in 0..d {
                        out[(bi * d + r, bj * d + c)] = m[(r, c)];
                    }
                }
            }
        }
        out
    }
}

/// Result of a full divide, gate, combine run.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineOutput {
    Pure(StateVector),
    Density(DensityMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub output: PipelineOutput,
    /// Squared norm (pure) or trace (density) of the unnormalized output.
    pub efficiency: f64,
}

impl PipelineResult {
    pub fn pure(state: StateVector) -> Self {
        let efficiency = state.norm_sqr();
        Self {
            output: PipelineOutput::Pure(state),
            efficiency,
        }
    }

    pub fn density(rho: DensityMatrix) -> Self {
        let efficiency = rho.trace();
        Self {
            output: PipelineOutput::Density(rho),
            efficiency,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.output {
            PipelineOutput::Pure(s) => s.dim(),
            PipelineOutput::Density(r) => r.dim(),
        }
    }

    pub fn as_pure(&self) -> Option<&StateVector> {
        match &self.output {
            PipelineOutput::Pure(s) => Some(s),
            PipelineOutput::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&DensityMatrix> {
        match &self.output {
            PipelineOutput::Density(r) => Some(r),
            PipelineOutput::Pure(_) => None,
        }
    }
}

/// `D_p ψ`: branch `i` carries `(pᵢ / ‖p‖) ψ`.
pub fn divide_pure(psi: &StateVector, p: &BranchDistribution) -> Result<DividedPureState> {
    psi.require_normalized()?;
    let branches = p
        .weights()
        .iter()
        .map(|w| psi.scale(w / p.norm()))
        .collect();
    Ok(DividedPureState {
        branches,
        dist: p.clone(),
    })
}

/// `C_p(⊕ φᵢ) = ‖p‖ Σ φᵢ`
pub fn combine_pure(dps: &DividedPureState) -> StateVector {
    let dim = dps.dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    for branch in &dps.branches {
        for (a, b) in acc.iter_mut().zip(branch.amplitudes()) {
            *a += b;
        }
    }
    let norm = dps.dist.norm();
    for a in &mut acc {
        *a *= norm;
    }
    StateVector::from_raw(acc).expect("combined branches are finite")
}

/// Applies `Uᵢ` to branch `i`.
pub fn apply_gate_pure(dps: &DividedPureState, g: &DualityGate) -> Result<DividedPureState> {
    g.check(&dps.dist, dps.dim())?;
    let branches = dps
        .branches
        .iter()
        .zip(g.unitaries())
        .map(|(b, u)| StateVector::from_raw(u.apply(b.amplitudes())?))
        .collect::<Result<_>>()?;
    Ok(DividedPureState {
        branches,
        dist: dps.dist.clone(),
    })
}

/// Divide, gate and combine a pure state. The output is `Σ pᵢ Uᵢ ψ`, left
/// unnormalized.
pub fn run_pure_pipeline(
    psi: &StateVector,
    p: &BranchDistribution,
    g: &DualityGate,
) -> Result<PipelineResult> {
    g.check(p, psi.dim())?;
    let divided = divide_pure(psi, p)?;
    let gated = apply_gate_pure(&divided, g)?;
    Ok(PipelineResult::pure(combine_pure(&gated)))
}

/// The effective operator `A = Σ pᵢ Uᵢ`.
pub fn duality_operator(p: &BranchDistribution, g: &DualityGate) -> Result<Matrix> {
    g.check(p, g.dim())?;
    let dim = g.dim();
    let mut acc = Matrix::zeros(dim, dim);
    for (w, u) in p.weights().iter().zip(g.unitaries()) {
        acc = &acc + &u.scale_real(*w);
    }
    Ok(acc)
}

/// `D_p ρ D_p†`, stored blockwise: `Mᵢⱼ = pᵢ pⱼ ρ / ‖p‖²`.
pub fn divide_density(rho: &DensityMatrix, p: &BranchDistribution) -> Result<DividedDensityState> {
    rho.require_proper()?;
    let n = p.len();
    let norm_sqr = p.norm() * p.norm();
    let w = p.weights();
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            blocks.push(rho.matrix().scale_real(w[i] * w[j] / norm_sqr));
        }
    }
    Ok(DividedDensityState {
        blocks,
        dist: p.clone(),
        dim: rho.dim(),
    })
}

/// `Mᵢⱼ ← Uᵢ Mᵢⱼ Uⱼ†`
pub fn apply_gate_density(
    dds: &DividedDensityState,
    g: &DualityGate,
) -> Result<DividedDensityState> {
    g.check(&dds.dist, dds.dim)?;
    let n = dds.branch_count();
    let daggers: Vec<Matrix> = g.unitaries().iter().map(dagger).collect();
    let mut blocks = Vec::with_capacity(n * n);
    for (i, u) in g.unitaries().iter().enumerate() {
        for (j, ud) in daggers.iter().enumerate() {
            blocks.push(matmul(&matmul(u, dds.block(i, j))?, ud)?);
        }
    }
    Ok(DividedDensityState {
        blocks,
        dist: dds.dist.clone(),
        dim: dds.dim,
    })
}

/// `‖p‖² Σᵢⱼ Mᵢⱼ` (unnormalized).
pub fn combine_density(dds: &DividedDensityState) -> DensityMatrix {
    let mut acc = Matrix::zeros(dds.dim, dds.dim);
    for b in &dds.blocks {
        acc = &acc + b;
    }
    let norm = dds.dist.norm();
    DensityMatrix::from_trusted(acc.scale_real(norm * norm))
}

/// Coherent density evolution `A ρ A†` with `A = Σ pᵢ Uᵢ`.
pub fn run_density_pipeline(
    rho: &DensityMatrix,
    p: &BranchDistribution,
    g: &DualityGate,
) -> Result<PipelineResult> {
    rho.require_proper()?;
    g.check(p, rho.dim())?;
    let a = duality_operator(p, g)?;
    let out = matmul(&matmul(&a, rho.matrix())?, &dagger(&a))?;
    Ok(PipelineResult::density(DensityMatrix::from_trusted(out)))
}

/// Incoherent combination `Σ pᵢ Uᵢ ρ Uᵢ†`.
pub fn run_gudder_mixed_pipeline(
    rho: &DensityMatrix,
    p: &BranchDistribution,
    g: &DualityGate,
) -> Result<DensityMatrix> {
    rho.require_proper()?;
    g.check(p, rho.dim())?;
    let dim = rho.dim();
    let mut acc = Matrix::zeros(dim, dim);
    for (w, u) in p.weights().iter().zip(g.unitaries()) {
        let term = matmul(&matmul(u, rho.matrix())?, &dagger(u))?;
        acc = &acc + &term.scale_real(*w);
    }
    Ok(DensityMatrix::from_trusted(acc))
}

/// Frobenius distance between the ensemble average of per-member pipeline
/// outputs, `Σⱼ qⱼ A|φⱼ⟩⟨φⱼ|A†`, and the pipeline applied to the averaged
/// state `Σⱼ qⱼ |φⱼ⟩⟨φⱼ|`. Linearity makes this zero up to rounding.
pub fn convex_average_check(
    ensemble: &[(f64, StateVector)],
    p: &BranchDistribution,
    g: &DualityGate,
) -> Result<f64> {
    validate_ensemble(ensemble)?;
    let dim = ensemble[0].1.dim();
    let mut averaged = Matrix::zeros(dim, dim);
    for (q, phi) in ensemble {
        let out = run_pure_pipeline(phi, p, g)?;
        let psi = out.as_pure().expect("pure pipeline");
        averaged = &averaged + &psi.projector().scale_real(*q);
    }
    let mixed = DensityMatrix::mixture(ensemble)?;
    let direct = run_density_pipeline(&mixed, p, g)?;
    frobenius_distance(&averaged, direct.as_density().expect("density").matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::*;
    use crate::linalg::{hermitian_eig, operator_norm, TOL_STRICT};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket0() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    fn ket1() -> StateVector {
        StateVector::basis(2, 1).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::uniform(2).unwrap()
    }

    fn sv(v: &[f64]) -> StateVector {
        StateVector::from_raw(v.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn half() -> BranchDistribution {
        BranchDistribution::new(vec![0.5, 0.5]).unwrap()
    }

    fn gate(us: &[Matrix]) -> DualityGate {
        DualityGate::new(us.to_vec()).unwrap()
    }

    fn mclose(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        frobenius_distance(a, b).unwrap() <= tol
    }

    pub(crate) fn random_state(rng: &mut impl Rng, dim: usize) -> StateVector {
        let v = (0..dim)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::normalize(v).unwrap()
    }

    fn random_dist(rng: &mut impl Rng, n: usize) -> BranchDistribution {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        BranchDistribution::new(raw.iter().map(|x| x / total).collect()).unwrap()
    }

    fn random_unitary(rng: &mut impl Rng, dim: usize) -> Matrix {
        hermitian_eig(&random_hermitian(rng, dim))
            .unwrap()
            .eigenvectors
    }

    #[test]
    fn distribution_validation() {
        assert!(BranchDistribution::new(vec![]).is_err());
        assert!(BranchDistribution::new(vec![0.6, 0.6]).is_err());
        assert!(BranchDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(BranchDistribution::new(vec![1.0 / 17.0; 17]).is_err());
        let p = BranchDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(p.norm(), 1.0);
        assert!((half().norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gate_validation() {
        assert!(DualityGate::new(vec![]).is_err());
        assert!(matches!(
            DualityGate::new(vec![Matrix::identity(2), Matrix::identity(2).scale_real(0.5)]),
            Err(Error::NotUnitary { index: 1 })
        ));
        assert!(DualityGate::new(vec![Matrix::identity(2), Matrix::identity(4)]).is_err());
    }

    #[test]
    fn divide_pure_examples() {
        let p = BranchDistribution::new(vec![1.0, 0.0]).unwrap();
        let d = divide_pure(&ket0(), &p).unwrap();
        assert_eq!(d.branches()[0], ket0());
        assert_eq!(d.branches()[1].norm(), 0.0);

        let d = divide_pure(&ket0(), &half()).unwrap();
        for b in d.branches() {
            assert!(b.distance(&sv(&[FRAC_1_SQRT_2, 0.0])) < 1e-15);
        }

        let psi = random_state(&mut ChaCha8Rng::seed_from_u64(3), 4);
        let third = BranchDistribution::uniform(3).unwrap();
        let d = divide_pure(&psi, &third).unwrap();
        for b in d.branches() {
            assert!(b.distance(&psi.scale(1.0 / 3f64.sqrt())) < 1e-15);
        }
        assert!(divide_pure(&sv(&[0.5, 0.0]), &half()).is_err());
    }

    #[test]
    fn combine_pure_examples() {
        let h = FRAC_1_SQRT_2;
        let dps = DividedPureState {
            branches: vec![sv(&[h, 0.0]), sv(&[h, 0.0])],
            dist: half(),
        };
        assert!(combine_pure(&dps).distance(&ket0()) < 1e-15);
        let dps = DividedPureState {
            branches: vec![sv(&[h, 0.0]), sv(&[-h, 0.0])],
            dist: half(),
        };
        assert_eq!(combine_pure(&dps).norm(), 0.0);
    }

    #[test]
    fn apply_gate_pure_examples() {
        let d = divide_pure(&ket0(), &half()).unwrap();
        let same = apply_gate_pure(&d, &gate(&[Matrix::identity(2), Matrix::identity(2)])).unwrap();
        assert_eq!(same, d);

        let g = apply_gate_pure(&d, &gate(&[Matrix::identity(2), pauli_x()])).unwrap();
        assert!(g.branches()[0].distance(&ket0().scale(FRAC_1_SQRT_2)) < 1e-15);
        assert!(g.branches()[1].distance(&ket1().scale(FRAC_1_SQRT_2)) < 1e-15);

        let d = divide_pure(&plus(), &half()).unwrap();
        let g = apply_gate_pure(&d, &gate(&[Matrix::identity(2), pauli_z()])).unwrap();
        let minus = sv(&[0.5, -0.5]);
        assert!(g.branches()[1].distance(&minus) < 1e-15);

        let three = gate(&vec![Matrix::identity(2); 3]);
        assert!(matches!(
            apply_gate_pure(&d, &three),
            Err(Error::BranchCount { .. })
        ));
    }

    #[test]
    fn run_pure_examples() {
        let r = run_pure_pipeline(&plus(), &half(), &gate(&[Matrix::identity(2), pauli_z()])).unwrap();
        assert!(r.as_pure().unwrap().distance(&ket0().scale(FRAC_1_SQRT_2)) < 1e-15);
        assert!((r.efficiency - 0.5).abs() < 1e-15);

        let neg = Matrix::identity(2).scale_real(-1.0);
        let psi = random_state(&mut ChaCha8Rng::seed_from_u64(9), 2);
        let r = run_pure_pipeline(&psi, &half(), &gate(&[Matrix::identity(2), neg])).unwrap();
        assert!(r.efficiency < 1e-30);

        let single = BranchDistribution::new(vec![1.0]).unwrap();
        let r = run_pure_pipeline(&psi, &single, &gate(&[hadamard()])).unwrap();
        let expected = StateVector::from_raw(hadamard().apply(psi.amplitudes()).unwrap()).unwrap();
        assert!(r.as_pure().unwrap().distance(&expected) < 1e-15);
        assert!((r.efficiency - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duality_operator_examples() {
        let a = duality_operator(&half(), &gate(&[Matrix::identity(2), pauli_z()])).unwrap();
        assert!(mclose(&a, &Matrix::diag_real(&[1.0, 0.0]), 0.0));
        let p = BranchDistribution::new(vec![1.0, 0.0]).unwrap();
        let a = duality_operator(&p, &gate(&[hadamard(), pauli_x()])).unwrap();
        assert_eq!(a, hadamard());
        let a = duality_operator(&half(), &gate(&[Matrix::identity(2), pauli_x()])).unwrap();
        assert!(mclose(&a, &Matrix::from_real(2, 2, &[0.5; 4]).unwrap(), 0.0));
    }

    #[test]
    fn divide_density_examples() {
        let rho = DensityMatrix::proper(Matrix::identity(3).scale_real(1.0 / 3.0)).unwrap();
        let single = BranchDistribution::new(vec![1.0]).unwrap();
        let d = divide_density(&rho, &single).unwrap();
        assert_eq!(d.block(0, 0), rho.matrix());

        let rho0 = DensityMatrix::from_pure(&ket0());
        let d = divide_density(&rho0, &half()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(mclose(d.block(i, j), &Matrix::diag_real(&[0.5, 0.0]), 1e-15));
            }
        }
        let diag_trace: f64 = (0..2).map(|i| d.block(i, i).trace().re).sum();
        assert!((diag_trace - 1.0).abs() < 1e-15);
        assert!(d.full_matrix().is_hermitian(TOL_STRICT));
    }

    #[test]
    fn apply_gate_density_examples() {
        let rho0 = DensityMatrix::from_pure(&ket0());
        let d = divide_density(&rho0, &half()).unwrap();
        let id = gate(&[Matrix::identity(2), Matrix::identity(2)]);
        assert_eq!(apply_gate_density(&d, &id).unwrap(), d);

        let g = apply_gate_density(&d, &gate(&[Matrix::identity(2), pauli_x()])).unwrap();
        let half_outer = |a: &StateVector, b: &StateVector| {
            Matrix::outer(a.amplitudes(), b.amplitudes()).scale_real(0.5)
        };
        assert!(mclose(g.block(0, 0), &half_outer(&ket0(), &ket0()), 1e-15));
        assert!(mclose(g.block(1, 1), &half_outer(&ket1(), &ket1()), 1e-15));
        assert!(mclose(g.block(0, 1), &half_outer(&ket0(), &ket1()), 1e-15));
        assert!(g.full_matrix().is_hermitian(TOL_STRICT));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 2);
        let v = random_unitary(&mut rng, 2);
        let g = apply_gate_density(&d, &gate(&[u, v])).unwrap();
        for i in 0..2 {
            assert!((g.block(i, i).trace() - d.block(i, i).trace()).norm() < 1e-14);
        }
    }

    #[test]
    fn combine_density_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = DensityMatrix::mixture(&[
            (0.3, random_state(&mut rng, 3)),
            (0.7, random_state(&mut rng, 3)),
        ])
        .unwrap();
        let p = random_dist(&mut rng, 4);
        let back = combine_density(&divide_density(&rho, &p).unwrap());
        assert!(mclose(back.matrix(), rho.matrix(), 1e-12));

        let rho0 = DensityMatrix::from_pure(&ket0());
        let g = gate(&[Matrix::identity(2), pauli_x()]);
        let gated = apply_gate_density(&divide_density(&rho0, &half()).unwrap(), &g).unwrap();
        let out = combine_density(&gated);
        let plus_proj = plus().projector().scale_real(0.5);
        assert!(mclose(out.matrix(), &plus_proj, 1e-15));
        let direct = run_density_pipeline(&rho0, &half(), &g).unwrap();
        assert!(mclose(out.matrix(), direct.as_density().unwrap().matrix(), 1e-15));

        let zero = DividedDensityState {
            blocks: vec![Matrix::zeros(2, 2); 4],
            dist: half(),
            dim: 2,
        };
        assert_eq!(combine_density(&zero).matrix(), &Matrix::zeros(2, 2));
    }

    #[test]
    fn run_density_examples() {
        let iz = gate(&[Matrix::identity(2), pauli_z()]);
        let proj0_half = Matrix::diag_real(&[0.5, 0.0]);
        let r = run_density_pipeline(&DensityMatrix::from_pure(&plus()), &half(), &iz).unwrap();
        assert!(mclose(r.as_density().unwrap().matrix(), &proj0_half, 1e-15));
        assert!((r.efficiency - 0.5).abs() < 1e-15);

        let mixed = DensityMatrix::proper(Matrix::identity(2).scale_real(0.5)).unwrap();
        let r = run_density_pipeline(&mixed, &half(), &iz).unwrap();
        assert!(mclose(r.as_density().unwrap().matrix(), &proj0_half, 1e-15));
        assert!((r.efficiency - 0.5).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = random_state(&mut rng, 4);
        let p = random_dist(&mut rng, 3);
        let g = gate(&[
            random_unitary(&mut rng, 4),
            random_unitary(&mut rng, 4),
            random_unitary(&mut rng, 4),
        ]);
        let pure = run_pure_pipeline(&psi, &p, &g).unwrap();
        let dens = run_density_pipeline(&DensityMatrix::from_pure(&psi), &p, &g).unwrap();
        let outer = pure.as_pure().unwrap().projector();
        assert!(mclose(&outer, dens.as_density().unwrap().matrix(), 1e-10));
    }

    #[test]
    fn gudder_mixed_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unitary(&mut rng, 2);
        let rho = DensityMatrix::from_pure(&random_state(&mut rng, 2));
        let p = random_dist(&mut rng, 3);
        let out = run_gudder_mixed_pipeline(&rho, &p, &gate(&[u.clone(), u.clone(), u.clone()])).unwrap();
        let expected = &(&u * rho.matrix()) * &dagger(&u);
        assert!(mclose(out.matrix(), &expected, 1e-14));

        let iz = gate(&[Matrix::identity(2), pauli_z()]);
        let rho_plus = DensityMatrix::from_pure(&plus());
        let mixed = run_gudder_mixed_pipeline(&rho_plus, &half(), &iz).unwrap();
        let half_id = Matrix::identity(2).scale_real(0.5);
        assert!(mclose(mixed.matrix(), &half_id, 1e-15));

        let long = run_density_pipeline(&rho_plus, &half(), &iz).unwrap();
        let normalized = long.as_density().unwrap().scale(1.0 / long.efficiency);
        let gap = frobenius_distance(mixed.matrix(), normalized.matrix()).unwrap();
        assert!((gap - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(gap > 0.1);
    }

    #[test]
    fn convex_average_examples() {
        let iz = gate(&[Matrix::identity(2), pauli_z()]);
        let single = convex_average_check(&[(1.0, plus())], &half(), &iz).unwrap();
        assert!(single <= 1e-12);
        let d = convex_average_check(&[(0.5, ket0()), (0.5, ket1())], &half(), &iz).unwrap();
        assert!(d <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = gate(&[random_unitary(&mut rng, 2), random_unitary(&mut rng, 2)]);
        let d = convex_average_check(&[(1.0 / 3.0, ket0()), (2.0 / 3.0, plus())], &half(), &g).unwrap();
        assert!(d <= 1e-10);
        assert!(matches!(
            convex_average_check(&[(0.5, ket0()), (0.6, ket1())], &half(), &iz),
            Err(Error::InvalidEnsemble(_))
        ));
    }

    #[test]
    fn combiner_is_adjoint_of_divider_on_divided_subspace() {
        // ⟨D_p ψ, D_p φ⟩ = ⟨ψ, φ⟩ and C_p agrees with D_p† on the image of D_p.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let psi = random_state(&mut rng, 4);
        let p = random_dist(&mut rng, 5);
        let divided = divide_pure(&psi, &p).unwrap();
        // D_p† (⊕ φᵢ) = Σ (pᵢ/‖p‖) φᵢ
        let mut adj = vec![c(0.0, 0.0); 4];
        for (w, b) in p.weights().iter().zip(divided.branches()) {
            for (a, x) in adj.iter_mut().zip(b.amplitudes()) {
                *a += x * (w / p.norm());
            }
        }
        let adj = StateVector::from_raw(adj).unwrap();
        assert!(combine_pure(&divided).distance(&adj) < 1e-12);

        // Off the divided subspace the two maps differ whenever p is not uniform.
        let p = BranchDistribution::new(vec![0.9, 0.1]).unwrap();
        let off = DividedPureState {
            branches: vec![ket0().scale(FRAC_1_SQRT_2), ket1().scale(FRAC_1_SQRT_2)],
            dist: p.clone(),
        };
        let mut adj = vec![c(0.0, 0.0); 2];
        for (w, b) in p.weights().iter().zip(off.branches()) {
            for (a, x) in adj.iter_mut().zip(b.amplitudes()) {
                *a += x * (w / p.norm());
            }
        }
        let adj = StateVector::from_raw(adj).unwrap();
        assert!(combine_pure(&off).distance(&adj) > 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn divider_is_isometry(seed in any::<u64>(), n in 1usize..=8, dim in 1usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(&mut rng, dim);
            let p = random_dist(&mut rng, n);
            let d = divide_pure(&psi, &p).unwrap();
            prop_assert!((d.total_norm_sqr() - 1.0).abs() <= 1e-10);
            prop_assert!(combine_pure(&d).distance(&psi) <= 1e-10);
        }

        #[test]
        fn density_pipeline_factorizes(seed in any::<u64>(), n in 1usize..=4, dim in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = DensityMatrix::mixture(&[
                (0.25, random_state(&mut rng, dim)),
                (0.75, random_state(&mut rng, dim)),
            ]).unwrap();
            let p = random_dist(&mut rng, n);
            let g = DualityGate::new((0..n).map(|_| random_unitary(&mut rng, dim)).collect()).unwrap();
            let divided = divide_density(&rho, &p).unwrap();
            prop_assert!(divided.full_matrix().is_hermitian(1e-10));
            let gated = apply_gate_density(&divided, &g).unwrap();
            let full = gated.full_matrix();
            prop_assert!(full.is_hermitian(1e-10));
            let smallest = *hermitian_eig(&full).unwrap().eigenvalues.last().unwrap();
            prop_assert!(smallest >= -1e-9);
            let stepwise = combine_density(&gated);
            let direct = run_density_pipeline(&rho, &p, &g).unwrap();
            prop_assert!(mclose(stepwise.matrix(), direct.as_density().unwrap().matrix(), 1e-10));
        }

        #[test]
        fn duality_operator_is_contraction(seed in any::<u64>(), n in 1usize..=6, dim in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_dist(&mut rng, n);
            let g = DualityGate::new((0..n).map(|_| random_unitary(&mut rng, dim)).collect()).unwrap();
            let a = duality_operator(&p, &g).unwrap();
            prop_assert!(operator_norm(&a).unwrap() <= 1.0 + 1e-9);
        }

        #[test]
        fn gudder_mixed_preserves_trace(seed in any::<u64>(), n in 1usize..=6, dim in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = DensityMatrix::from_pure(&random_state(&mut rng, dim));
            let p = random_dist(&mut rng, n);
            let g = DualityGate::new((0..n).map(|_| random_unitary(&mut rng, dim)).collect()).unwrap();
            let out = run_gudder_mixed_pipeline(&rho, &p, &g).unwrap();
            prop_assert!((out.trace() - 1.0).abs() <= 1e-10);
        }
    }
}
