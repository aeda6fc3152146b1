//! Decomposition of bounded operators into positive combinations of unitaries.
//!
//! Any square `A` splits as `A = B + iC` with `B`, `C` Hermitian. A Hermitian
//! `H` with operator norm `s > 0` equals `(s/2)(U + U†)` where
//! `U = H/s + i·sqrt(I − (H/s)²)` is unitary, so every operator is a sum of
//! at most four unitaries with positive weights.
//!
//! The contraction set is the operator-norm unit ball; its extreme points are
//! the unitaries, which [`midpoint_unitarity_check`] probes operationally.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    dagger, frobenius_distance, hermitian_eig, is_unitary, operator_norm, Matrix, I, TOL_RECON,
};

/// Unitarity tolerance for decomposition factors and midpoint inputs.
pub const TOL_FACTOR: f64 = 1e-9;
/// Slack on the unit-ball boundary.
pub const TOL_CONTRACTION: f64 = 1e-9;

/// One weighted unitary in a [`UnitaryCombination`].
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub unitary: Matrix,
}

/// `Σ cᵢ Vᵢ` with every `cᵢ > 0` and every `Vᵢ` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryCombination {
    dim: usize,
    terms: Vec<Term>,
}

impl UnitaryCombination {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        for (index, t) in terms.iter().enumerate() {
            if !t.coefficient.is_finite() || t.coefficient <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "coefficient {} must be positive",
                    t.coefficient
                )));
            }
            if t.unitary.rows() != dim || t.unitary.cols() != dim {
                return Err(Error::ShapeMismatch {
                    left: (dim, dim),
                    right: (t.unitary.rows(), t.unitary.cols()),
                });
            }
            if !is_unitary(&t.unitary, TOL_FACTOR) {
                return Err(Error::NotUnitary { index });
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    fn phased(self, phase: Complex64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .into_iter()
                .map(|t| Term {
                    coefficient: t.coefficient,
                    unitary: t.unitary.scale(phase),
                })
                .collect(),
        }
    }
}

/// An operator together with its operator norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionWitness {
    pub operator: Matrix,
    pub norm: f64,
}

impl ContractionWitness {
    pub fn new(operator: Matrix) -> Result<Self> {
        let norm = operator_norm(&operator)?;
        Ok(Self { operator, norm })
    }

    pub fn is_contraction(&self) -> bool {
        self.norm <= 1.0 + TOL_CONTRACTION
    }
}

/// Cartesian split `a = b + i·c` with `b = (a + a†)/2`, `c = (a − a†)/(2i)`.
pub fn hermitian_split(a: &Matrix) -> Result<(Matrix, Matrix)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let ad = dagger(a);
    let b = (a + &ad).scale_real(0.5);
    let c = (a - &ad).scale(Complex64::new(0.0, -0.5));
    Ok((b, c))
}

/// Writes a Hermitian `h` as `(s/2) U + (s/2) U†` with `s = ‖h‖`.
///
/// `U` is assembled eigenvalue by eigenvalue as `λ/s + i·sqrt(1 − (λ/s)²)`
/// on the eigenbasis of `h`, which equals `h/s + i·sqrt(I − (h/s)²)` and
/// stays unitary to working precision even when `±s` are both eigenvalues.
pub fn hermitian_to_unitaries(h: &Matrix) -> Result<UnitaryCombination> {
    let eig = hermitian_eig(h)?;
    let dim = h.rows();
    let s = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()));
    if s == 0.0 {
        return Ok(UnitaryCombination::empty(dim));
    }
    let u = eig.map_spectrum(|lambda| {
        let x = (lambda / s).clamp(-1.0, 1.0);
        Complex64::new(x, (1.0 - x * x).max(0.0).sqrt())
    });
    let ud = dagger(&u);
    UnitaryCombination::new(
        dim,
        vec![
            Term {
                coefficient: s / 2.0,
                unitary: u,
            },
            Term {
                coefficient: s / 2.0,
                unitary: ud,
            },
        ],
    )
}

/// Decomposes a square matrix into at most four positively weighted unitaries.
///
/// The Hermitian part contributes `(‖B‖/2)(U + U†)`; the anti-Hermitian part
/// contributes the same construction for `C`, with each factor multiplied by
/// the imaginary unit. The zero matrix yields the empty combination.
pub fn decompose(a: &Matrix) -> Result<UnitaryCombination> {
    let (b, c) = hermitian_split(a)?;
    let mut out = hermitian_to_unitaries(&b)?;
    let imag = hermitian_to_unitaries(&c)?.phased(I);
    out.terms.extend(imag.terms);
    Ok(out)
}

/// `Σ cᵢ Vᵢ`
pub fn reconstruct(comb: &UnitaryCombination) -> Result<Matrix> {
    let mut acc = Matrix::zeros(comb.dim, comb.dim);
    for t in &comb.terms {
        acc = acc.try_add(&t.unitary.scale_real(t.coefficient))?;
    }
    Ok(acc)
}

/// Reconstruction error `‖reconstruct(decompose(a)) − a‖_F`.
pub fn reconstruction_error(a: &Matrix, comb: &UnitaryCombination) -> Result<f64> {
    frobenius_distance(&reconstruct(comb)?, a)
}

/// Whether `t` lies in the operator-norm unit ball.
pub fn is_in_contraction_set(t: &Matrix) -> Result<bool> {
    Ok(ContractionWitness::new(t.clone())?.is_contraction())
}

/// Whether the midpoint `(v + w)/2` of two unitaries is itself unitary.
///
/// This holds exactly when `v = w`: a unitary is never the midpoint of two
/// distinct contractions.
pub fn midpoint_unitarity_check(v: &Matrix, w: &Matrix) -> Result<bool> {
    if !is_unitary(v, TOL_FACTOR) {
        return Err(Error::NotUnitary { index: 0 });
    }
    if !is_unitary(w, TOL_FACTOR) {
        return Err(Error::NotUnitary { index: 1 });
    }
    let mid = v.try_add(w)?.scale_real(0.5);
    Ok(is_unitary(&mid, TOL_RECON))
}
