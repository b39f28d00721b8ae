use super::state::StateVector;
use crate::error::{Error, Result};
use crate::model::{circular_distance, phase_of_outcome, Phase, RegisterLayout};

/// Exact outcome probabilities `p_k = |amplitude_k|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementDistribution {
    layout: RegisterLayout,
    probs: Vec<f64>,
}

impl MeasurementDistribution {
    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of each control value, summed over the target register.
    pub fn control_marginal(&self) -> Vec<f64> {
        self.probs
            .chunks_exact(self.layout.target_dim())
            .map(|block| block.iter().sum())
            .collect()
    }

    /// Total probability of outcomes whose estimate lies strictly within
    /// `eps` of `phase`.
    pub fn success_probability(&self, phase: Phase, eps: f64) -> Result<f64> {
        check_epsilon(eps)?;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .filter(|&(k, _)| {
                let estimate = phase_of_outcome(k, &self.layout).expect("label in range");
                circular_distance(phase, estimate) < eps
            })
            .map(|(_, p)| p)
            .sum())
    }
}

pub fn measurement_distribution(state: &StateVector) -> MeasurementDistribution {
    MeasurementDistribution {
        layout: *state.layout(),
        probs: state.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
    }
}

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidEpsilon { eps });
    }
    Ok(())
}
