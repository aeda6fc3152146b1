//! Pure and mixed quantum states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, Matrix, MAX_DIM, ONE, TOL_STRICT, ZERO};

/// Amplitude vector. May be subnormalized (pipeline outputs, divided branches).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Accepts any finite vector with `1 <= dim <= 64` and norm at most `1 + 1e-10`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_raw(amplitudes)?;
        let norm = s.norm();
        if norm > 1.0 + TOL_STRICT {
            return Err(Error::NotNormalized { norm });
        }
        Ok(s)
    }

    /// Like [`StateVector::new`] but additionally requires unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_raw(amplitudes)?;
        s.require_normalized()?;
        Ok(s)
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn normalize(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_raw(amplitudes)?;
        let norm = s.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(s.scale(1.0 / norm))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::from_raw(amps)
    }

    /// Equal superposition over all `dim` basis states.
    pub fn uniform(dim: usize) -> Result<Self> {
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::from_raw(vec![a; dim])
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyShape);
        }
        if amplitudes.len() > MAX_DIM {
            return Err(Error::TooLarge(amplitudes.len()));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL_STRICT
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|ψ⟩⟨ψ|` without normalization checks.
    pub fn projector(&self) -> Matrix {
        Matrix::outer(&self.amplitudes, &self.amplitudes)
    }

    /// Probabilities `|a_k|²` in basis order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }
}

/// Hermitian positive semidefinite operator with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and positivity (within `1e-10`) and `trace <= 1 + 1e-10`.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if matrix.rows() > MAX_DIM {
            return Err(Error::TooLarge(matrix.rows()));
        }
        let defect = matrix.hermitian_defect();
        if defect > TOL_STRICT {
            return Err(Error::NotHermitian { defect });
        }
        let eig = hermitian_eig(&matrix)?;
        let smallest = *eig.eigenvalues.last().expect("dim >= 1");
        if smallest < -TOL_STRICT {
            return Err(Error::NegativeEigenvalue { value: smallest });
        }
        let tr = matrix.trace().re;
        if tr > 1.0 + TOL_STRICT {
            return Err(Error::InvalidDensity(format!("trace {tr} exceeds 1")));
        }
        Ok(Self { matrix })
    }

    /// Validates as [`DensityMatrix::new`] and additionally requires unit trace.
    pub fn proper(matrix: Matrix) -> Result<Self> {
        let rho = Self::new(matrix)?;
        rho.require_proper()?;
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self {
            matrix: psi.projector(),
        }
    }

    /// Proper mixture `Σ q_j |φ_j⟩⟨φ_j|`. Weights must be nonnegative and sum to one.
    pub fn mixture(ensemble: &[(f64, StateVector)]) -> Result<Self> {
        validate_ensemble(ensemble)?;
        let dim = ensemble[0].1.dim();
        let mut acc = Matrix::zeros(dim, dim);
        for (q, phi) in ensemble {
            acc = &acc + &phi.projector().scale_real(*q);
        }
        Ok(Self { matrix: acc })
    }

    /// For operator outputs already known to be Hermitian PSD by construction.
    pub(crate) fn from_trusted(matrix: Matrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_proper(&self) -> bool {
        (self.trace() - 1.0).abs() <= TOL_STRICT
    }

    pub(crate) fn require_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::InvalidDensity(format!(
                "trace {} is not 1",
                self.trace()
            )))
        }
    }

    /// Diagonal entries, i.e. computational-basis populations.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
        }
    }
}

pub(crate) fn validate_ensemble(ensemble: &[(f64, StateVector)]) -> Result<()> {
    let Some((_, first)) = ensemble.first() else {
        return Err(Error::InvalidEnsemble("empty ensemble".into()));
    };
    let dim = first.dim();
    let mut total = 0.0;
    for (q, phi) in ensemble {
        if !q.is_finite() || *q < 0.0 {
            return Err(Error::InvalidEnsemble(format!("weight {q} is negative")));
        }
        if phi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: phi.dim(),
            });
        }
        phi.require_normalized()?;
        total += q;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
    }
    Ok(())
}
