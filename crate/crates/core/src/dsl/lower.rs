//! Lowering of gate statements to dense unitaries.
//!
//! Qubit 0 is the most significant bit of the basis index, i.e. the leftmost
//! tensor factor: `X 0` on two qubits is `X ⊗ I`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::dsl::ast::{CircuitAst, GateKind, GateStatement};
use crate::engine::{BranchDistribution, DualityGate};
use crate::error::Result;
use crate::linalg::{matmul, tensor_product, Matrix, I, ONE, ZERO};

fn single_qubit(gate: GateKind, params: &[f64]) -> Matrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let m = |e: [Complex64; 4]| Matrix::new(2, 2, e.to_vec()).expect("2x2");
    match gate {
        GateKind::X => m([ZERO, ONE, ONE, ZERO]),
        GateKind::Y => m([ZERO, -I, I, ZERO]),
        GateKind::Z => m([ONE, ZERO, ZERO, -ONE]),
        GateKind::H => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            m([h, h, h, -h])
        }
        GateKind::S => m([ONE, ZERO, ZERO, I]),
        GateKind::T => m([
            ONE,
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]),
        GateKind::Rx => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            m([c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
        }
        GateKind::Ry => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            m([c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
        }
        GateKind::Rz => {
            let half = params[0] / 2.0;
            m([
                Complex64::from_polar(1.0, -half),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, half),
            ])
        }
        other => unreachable!("{} is not a single-qubit gate", other.name()),
    }
}

/// `I^{⊗target} ⊗ g ⊗ I^{⊗(qubits−target−1)}`
fn embed(g: &Matrix, target: usize, qubits: usize) -> Matrix {
    let left = Matrix::identity(1 << target);
    let right = Matrix::identity(1 << (qubits - target - 1));
    tensor_product(&tensor_product(&left, g), &right)
}

fn bit(index: usize, qubit: usize, qubits: usize) -> usize {
    (index >> (qubits - 1 - qubit)) & 1
}

/// Matrix of one statement on a `qubits`-qubit register.
pub fn statement_matrix(stmt: &GateStatement, qubits: usize) -> Matrix {
    let dim = 1usize << qubits;
    match stmt.gate {
        GateKind::I => Matrix::identity(dim),
        GateKind::Neg => Matrix::identity(dim).scale_real(-1.0),
        GateKind::Phase => Matrix::identity(dim).scale(Complex64::from_polar(1.0, stmt.params[0])),
        GateKind::Oracle => {
            let mut diag = vec![ONE; dim];
            for &k in &stmt.targets {
                diag[k] = -ONE;
            }
            Matrix::diag(&diag)
        }
        GateKind::Cnot => {
            let (control, target) = (stmt.targets[0], stmt.targets[1]);
            let mut m = Matrix::zeros(dim, dim);
            for col in 0..dim {
                let row = if bit(col, control, qubits) == 1 {
                    col ^ (1 << (qubits - 1 - target))
                } else {
                    col
                };
                m[(row, col)] = ONE;
            }
            m
        }
        GateKind::Cz => {
            let (a, b) = (stmt.targets[0], stmt.targets[1]);
            let diag: Vec<Complex64> = (0..dim)
                .map(|k| {
                    if bit(k, a, qubits) == 1 && bit(k, b, qubits) == 1 {
                        -ONE
                    } else {
                        ONE
                    }
                })
                .collect();
            Matrix::diag(&diag)
        }
        gate => {
            let g = single_qubit(gate, &stmt.params);
            match stmt.targets.first() {
                Some(&t) => embed(&g, t, qubits),
                None => (1..qubits).fold(g.clone(), |acc, _| tensor_product(&acc, &g)),
            }
        }
    }
}

/// Composes a path left to right: the first statement acts first.
pub fn path_unitary(stmts: &[GateStatement], qubits: usize) -> Matrix {
    stmts.iter().fold(Matrix::identity(1 << qubits), |acc, s| {
        matmul(&statement_matrix(s, qubits), &acc).expect("matching dims")
    })
}

/// Branch distribution and per-path unitaries of a circuit.
pub fn lower(ast: &CircuitAst) -> Result<(BranchDistribution, DualityGate)> {
    let unitaries = ast
        .paths
        .iter()
        .map(|p| path_unitary(p, ast.qubit_count))
        .collect();
    Ok((ast.dist.clone(), DualityGate::new(unitaries)?))
}
