//! Random instances and independent reference computations for integration
//! tests. Nothing here goes through the library's own numerics beyond
//! constructing its types.

#![allow(dead_code)]

use dualsim::{BranchDistribution, Complex64, DualityGate, Matrix, StateVector};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| c(gaussian(rng), gaussian(rng))).collect()
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> StateVector {
    let v = random_vector(rng, dim);
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::normalized(v.into_iter().map(|z| z / n).collect()).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    Matrix::new(dim, dim, random_vector(rng, dim * dim)).unwrap()
}

/// Haar-ish unitary from modified Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|_| random_vector(rng, dim)).collect();
    for k in 0..dim {
        for j in 0..k {
            let proj: Complex64 = (0..dim).map(|i| cols[j][i].conj() * cols[k][i]).sum();
            for i in 0..dim {
                let sub = proj * cols[j][i];
                cols[k][i] -= sub;
            }
        }
        let n = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[k] {
            *z /= n;
        }
    }
    let mut entries = vec![c(0.0, 0.0); dim * dim];
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            entries[i * dim + j] = *z;
        }
    }
    Matrix::new(dim, dim, entries).unwrap()
}

/// Probability vector of length `n` with strictly positive entries.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> BranchDistribution {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    BranchDistribution::new(raw.iter().map(|w| w / total).collect()).unwrap()
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize, dim: usize) -> DualityGate {
    DualityGate::new((0..n).map(|_| random_unitary(rng, dim)).collect()).unwrap()
}

pub fn get(m: &Matrix, i: usize, j: usize) -> Complex64 {
    m.entries()[i * m.cols() + j]
}

pub fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.rows(), a.cols(), b.cols());
    let mut out = vec![c(0.0, 0.0); n * m];
    for i in 0..n {
        for j in 0..m {
            out[i * m + j] = (0..k).map(|l| get(a, i, l) * get(b, l, j)).sum();
        }
    }
    Matrix::new(n, m, out).unwrap()
}

pub fn naive_dagger(a: &Matrix) -> Matrix {
    let (r, cl) = (a.rows(), a.cols());
    let mut out = vec![c(0.0, 0.0); r * cl];
    for i in 0..r {
        for j in 0..cl {
            out[j * r + i] = get(a, i, j).conj();
        }
    }
    Matrix::new(cl, r, out).unwrap()
}

pub fn naive_outer(u: &[Complex64]) -> Matrix {
    let n = u.len();
    let mut out = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = u[i] * u[j].conj();
        }
    }
    Matrix::new(n, n, out).unwrap()
}

pub fn frob_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `Σ pᵢ Uᵢ ψ` by direct summation.
pub fn naive_duality(p: &BranchDistribution, g: &DualityGate, psi: &[Complex64]) -> Vec<Complex64> {
    let dim = psi.len();
    let mut out = vec![c(0.0, 0.0); dim];
    for (w, u) in p.weights().iter().zip(g.unitaries()) {
        for i in 0..dim {
            for j in 0..dim {
                out[i] += get(u, i, j) * psi[j] * *w;
            }
        }
    }
    out
}

/// Number of eigenvalues of the Hermitian `h` below `x`, from the signs of
/// the LDL† pivots of `h − xI` (Sylvester's law of inertia).
fn eigenvalues_below(h: &Matrix, x: f64) -> usize {
    let n = h.rows();
    let mut l = vec![c(0.0, 0.0); n * n];
    let mut d = vec![0.0f64; n];
    for j in 0..n {
        let mut djj = get(h, j, j).re - x;
        for k in 0..j {
            djj -= l[j * n + k].norm_sqr() * d[k];
        }
        if djj == 0.0 {
            djj = -f64::MIN_POSITIVE;
        }
        d[j] = djj;
        for i in j + 1..n {
            let mut v = get(h, i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k].conj() * d[k];
            }
            l[i * n + j] = v / djj;
        }
    }
    d.iter().filter(|&&v| v < 0.0).count()
}

/// Spectral norm of a Hermitian matrix, `max |λ|`, by bisection on the
/// eigenvalue count.
pub fn hermitian_norm(h: &Matrix) -> f64 {
    let n = h.rows();
    let bound = h.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() + 1.0;
    let bisect = |below: usize| {
        // smallest x with more than `below` eigenvalues under it
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eigenvalues_below(h, mid) > below {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let smallest = bisect(0);
    let largest = bisect(n - 1);
    smallest.abs().max(largest.abs())
}

/// `max |U†U − I|` entrywise.
pub fn unitarity_defect(u: &Matrix) -> f64 {
    let prod = naive_matmul(&naive_dagger(u), u);
    let n = u.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (get(&prod, i, j) - if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm())
        .fold(0.0, f64::max)
}
