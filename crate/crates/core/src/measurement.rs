//! Measurement of sub-normalized pipeline outputs.
//!
//! A duality pipeline generally produces an output wave with norm below one.
//! How the missing weight is treated depends on the detector:
//!
//! * [`MeasurementScenario::NoRenorm`]: the detector sees the partial wave as
//!   is. Basis probabilities are `|a_k|²` and the remaining `1 − efficiency`
//!   is a NULL outcome (nothing registered).
//! * [`MeasurementScenario::RenormThreshold`]: the output is renormalized
//!   before measurement provided it exceeds a device threshold `ε`; below it
//!   the result is NULL. For pure outputs `ε` bounds the amplitude norm, for
//!   density outputs it bounds the trace.
//! * [`MeasurementScenario::RenormIdeal`]: the `ε = 0` case.
//!
//! Repeated measurement of the same partial wave (Zeno boosting) is modeled
//! as `r` independent detection attempts, each succeeding with probability
//! `η`. This is a modeling choice; no degradation of the wave between
//! attempts is modeled.

use std::collections::BTreeMap;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{PipelineOutput, PipelineResult};
use crate::error::{Error, Result};
use crate::linalg::TOL_STRICT;

/// Default device threshold when a renormalizing scenario gives none.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Probabilities this far below zero are rounding noise and clamp to zero.
const NEGATIVE_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementScenario {
    /// Scenario 1: partial wave measured without renormalization.
    NoRenorm,
    /// Scenario 2: renormalize when the output exceeds `epsilon`.
    RenormThreshold { epsilon: f64 },
    /// Scenario 3: ideal device, `epsilon = 0`.
    RenormIdeal,
}

impl MeasurementScenario {
    pub fn threshold(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidProbability(epsilon));
        }
        Ok(Self::RenormThreshold { epsilon })
    }

    /// Renormalization threshold, `None` for scenario 1.
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Self::NoRenorm => None,
            Self::RenormThreshold { epsilon } => Some(*epsilon),
            Self::RenormIdeal => Some(0.0),
        }
    }

    /// Keyword used by the circuit format and CLI.
    pub fn keyword(&self) -> &'static str {
        match self {
            Self::NoRenorm => "none",
            Self::RenormThreshold { .. } => "renorm",
            Self::RenormIdeal => "ideal",
        }
    }
}

impl fmt::Display for MeasurementScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A single measurement result: a basis index, or nothing registered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Basis(usize),
    Null,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Basis(k) => write!(f, "{k}"),
            Self::Null => f.write_str("null"),
        }
    }
}

/// Computational-basis probabilities plus the NULL probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probabilities: Vec<f64>,
    null_probability: f64,
}

impl OutcomeDistribution {
    pub fn new(probabilities: Vec<f64>, null_probability: f64) -> Result<Self> {
        let clamp = |p: f64| -> Result<f64> {
            if !p.is_finite() || p < -NEGATIVE_NOISE {
                return Err(Error::InvalidOutcomeDistribution(format!(
                    "probability {p} is negative"
                )));
            }
            Ok(p.max(0.0))
        };
        let probabilities = probabilities
            .into_iter()
            .map(clamp)
            .collect::<Result<Vec<_>>>()?;
        let null_probability = clamp(null_probability)?;
        let total: f64 = probabilities.iter().sum::<f64>() + null_probability;
        if (total - 1.0).abs() > TOL_STRICT {
            return Err(Error::InvalidOutcomeDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            probabilities,
            null_probability,
        })
    }

    /// Everything on NULL.
    pub fn null(dim: usize) -> Self {
        Self {
            probabilities: vec![0.0; dim],
            null_probability: 1.0,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities.get(index).copied().unwrap_or(0.0)
    }

    pub fn null_probability(&self) -> f64 {
        self.null_probability
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum::<f64>() + self.null_probability
    }

    /// The single most likely outcome; ties resolve to the lowest basis
    /// index, and NULL wins only when strictly more likely than every index.
    pub fn most_likely(&self) -> Outcome {
        let mut best = (Outcome::Null, self.null_probability);
        for (k, &p) in self.probabilities.iter().enumerate().rev() {
            if p >= best.1 {
                best = (Outcome::Basis(k), p);
            }
        }
        best.0
    }
}

/// `ZenoSchedule { repeats: r }`: number of measurement attempts on one wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZenoSchedule {
    repeats: u32,
}

impl ZenoSchedule {
    pub fn new(repeats: u32) -> Result<Self> {
        if repeats == 0 {
            return Err(Error::ZeroRepeats);
        }
        Ok(Self { repeats })
    }

    pub fn repeats(&self) -> u32 {
        self.repeats
    }
}

/// Detection probability with a perfect detector: `‖ψ_out‖²` or `tr ρ_out`.
pub fn efficiency(result: &PipelineResult) -> f64 {
    match &result.output {
        PipelineOutput::Pure(s) => s.norm_sqr(),
        PipelineOutput::Density(r) => r.trace(),
    }
}

/// Scenario 1: measure the partial wave without renormalization.
pub fn measure_scenario1(result: &PipelineResult) -> Result<OutcomeDistribution> {
    let (probs, eff) = match &result.output {
        PipelineOutput::Pure(s) => (s.probabilities(), s.norm_sqr()),
        PipelineOutput::Density(r) => (r.populations(), r.trace()),
    };
    OutcomeDistribution::new(probs, 1.0 - eff)
}

/// Renormalizes the output if it clears the scenario's threshold.
///
/// Returns `Ok(None)` for the NULL outcome (output at or below `ε`). A pure
/// output is divided by its norm, a density output by its trace. Scenario 1
/// has no renormalization and is rejected.
pub fn renormalize(
    result: &PipelineResult,
    scenario: MeasurementScenario,
) -> Result<Option<PipelineResult>> {
    let Some(epsilon) = scenario.epsilon() else {
        return Err(Error::NotRenormalizing(scenario.keyword()));
    };
    Ok(match &result.output {
        PipelineOutput::Pure(s) => {
            let norm = s.norm();
            (norm > epsilon).then(|| PipelineResult::pure(s.scale(1.0 / norm)))
        }
        PipelineOutput::Density(r) => {
            let tr = r.trace();
            (tr > epsilon).then(|| PipelineResult::density(r.scale(1.0 / tr)))
        }
    })
}

/// Outcome distribution under any scenario.
pub fn outcome_distribution(
    result: &PipelineResult,
    scenario: MeasurementScenario,
) -> Result<OutcomeDistribution> {
    match scenario {
        MeasurementScenario::NoRenorm => measure_scenario1(result),
        _ => match renormalize(result, scenario)? {
            Some(r) => measure_scenario1(&r),
            None => Ok(OutcomeDistribution::null(result.dim())),
        },
    }
}

/// Probability that at least one of `r` independent attempts with
/// per-attempt efficiency `eta` registers: `1 − (1 − η)^r`.
pub fn zeno_detection_probability(eta: f64, schedule: ZenoSchedule) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidProbability(eta));
    }
    if schedule.repeats == 1 {
        return Ok(eta);
    }
    let miss = (-eta).ln_1p() * f64::from(schedule.repeats);
    Ok(-miss.exp_m1())
}

/// Draws `shots` outcomes from `dist` with a ChaCha8 generator seeded by `seed`.
///
/// Only outcomes that occurred appear in the map.
pub fn sample(
    dist: &OutcomeDistribution,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<Outcome, u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let outcomes: Vec<(Outcome, f64)> = dist
        .probabilities
        .iter()
        .enumerate()
        .map(|(k, &p)| (Outcome::Basis(k), p))
        .chain(std::iter::once((Outcome::Null, dist.null_probability)))
        .filter(|(_, p)| *p > 0.0)
        .collect();
    let index = WeightedIndex::new(outcomes.iter().map(|(_, p)| *p))
        .map_err(|e| Error::InvalidOutcomeDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let outcome = outcomes[index.sample(&mut rng)].0;
        *counts.entry(outcome).or_insert(0) += 1;
    }
    Ok(counts)
}
