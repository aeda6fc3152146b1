use std::fmt;

use crate::engine::BranchDistribution;
use crate::measurement::{MeasurementScenario, ZenoSchedule};

/// Gates understood by the circuit format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Cz,
    Rx,
    Ry,
    Rz,
    Phase,
    Neg,
    Oracle,
}

/// How many targets a gate takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetArity {
    Exactly(usize),
    AtLeastOne,
    /// One qubit, or none meaning every qubit of the register.
    OneOrAll,
}

impl GateKind {
    pub const ALL: [GateKind; 15] = [
        Self::I,
        Self::X,
        Self::Y,
        Self::Z,
        Self::H,
        Self::S,
        Self::T,
        Self::Cnot,
        Self::Cz,
        Self::Rx,
        Self::Ry,
        Self::Rz,
        Self::Phase,
        Self::Neg,
        Self::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::X => "X",
            Self::Y => "Y",
            Self::Z => "Z",
            Self::H => "H",
            Self::S => "S",
            Self::T => "T",
            Self::Cnot => "CNOT",
            Self::Cz => "CZ",
            Self::Rx => "RX",
            Self::Ry => "RY",
            Self::Rz => "RZ",
            Self::Phase => "PHASE",
            Self::Neg => "NEG",
            Self::Oracle => "ORACLE",
        }
    }

    /// Case-insensitive lookup.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(name))
    }

    pub fn param_count(self) -> usize {
        match self {
            Self::Rx | Self::Ry | Self::Rz | Self::Phase => 1,
            _ => 0,
        }
    }

    pub fn target_arity(self) -> TargetArity {
        match self {
            Self::I | Self::Phase | Self::Neg => TargetArity::Exactly(0),
            Self::Cnot | Self::Cz => TargetArity::Exactly(2),
            Self::Oracle => TargetArity::AtLeastOne,
            _ => TargetArity::OneOrAll,
        }
    }

    /// ORACLE targets are basis-state indices rather than qubits.
    pub fn targets_are_basis_indices(self) -> bool {
        self == Self::Oracle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateStatement {
    pub gate: GateKind,
    pub params: Vec<f64>,
    pub targets: Vec<usize>,
}

impl fmt::Display for GateStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.gate.name())?;
        for p in &self.params {
            write!(f, " {p:?}")?;
        }
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

/// The `measure` line: scenario, shot count, seed and optional Zeno repeats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    pub scenario: MeasurementScenario,
    /// Zero means exact distribution only.
    pub shots: u64,
    pub seed: u64,
    pub zeno: Option<ZenoSchedule>,
}

impl MeasurementSpec {
    pub fn exact(scenario: MeasurementScenario) -> Self {
        Self {
            scenario,
            shots: 0,
            seed: 0,
            zeno: None,
        }
    }
}

impl fmt::Display for MeasurementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "measure scenario={}", self.scenario.keyword())?;
        if let MeasurementScenario::RenormThreshold { epsilon } = self.scenario {
            write!(f, " eps={epsilon:?}")?;
        }
        write!(f, " shots={} seed={}", self.shots, self.seed)?;
        if let Some(z) = self.zeno {
            write!(f, " zeno={}", z.repeats())?;
        }
        Ok(())
    }
}

/// A parsed and validated duality circuit: one divide, one gate sequence per
/// branch, one combine, one measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitAst {
    pub qubit_count: usize,
    pub dist: BranchDistribution,
    pub paths: Vec<Vec<GateStatement>>,
    pub measure: MeasurementSpec,
}

impl CircuitAst {
    pub fn dim(&self) -> usize {
        1 << self.qubit_count
    }
}

/// Canonical text form; parsing it yields the same AST.
impl fmt::Display for CircuitAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.qubit_count)?;
        f.write_str("divide")?;
        for w in self.dist.weights() {
            write!(f, " {w:?}")?;
        }
        writeln!(f)?;
        for (i, path) in self.paths.iter().enumerate() {
            write!(f, "path {i}:")?;
            for (k, stmt) in path.iter().enumerate() {
                let sep = if k == 0 { " " } else { "; " };
                write!(f, "{sep}{stmt}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "combine")?;
        writeln!(f, "{}", self.measure)
    }
}
