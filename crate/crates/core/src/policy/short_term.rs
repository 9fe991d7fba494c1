//! Policy for a sequence of short-term views, one per sub-interval, after
//! the predictable part of the view noise has been removed.

use nalgebra::DVector;

use super::{IntervalPolicy, PolicyWeights};
use crate::error::Result;
use crate::market::{MarketModel, ShortTermSchedule};

/// Interval `j` covers `[T_j, T_{j+1})` and acts on the refined view `ȳ^j`.
#[derive(Debug, Clone)]
pub struct ShortTermPolicy {
    schedule: ShortTermSchedule,
    intervals: Vec<IntervalPolicy>,
}

pub fn short_term_policy(schedule: &ShortTermSchedule, market: &MarketModel, gamma: f64) -> Result<ShortTermPolicy> {
    let times = schedule.times();
    let intervals = (0..schedule.n_intervals())
        .map(|j| {
            IntervalPolicy::new(market, schedule.pick(), &schedule.idio_covs()[j], times[j], times[j + 1], times[j + 1], gamma)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShortTermPolicy { schedule: schedule.clone(), intervals })
}

impl ShortTermPolicy {
    pub fn schedule(&self) -> &ShortTermSchedule {
        &self.schedule
    }
    pub fn interval(&self, j: usize) -> &IntervalPolicy {
        &self.intervals[j]
    }
    pub fn intervals(&self) -> &[IntervalPolicy] {
        &self.intervals
    }

    /// Weights on interval `j` given `x̄ = X(t) − X(T_j)` and the refined view.
    pub fn weights(&self, j: usize, t: f64, x_bar: &DVector<f64>, y_refined: &DVector<f64>) -> Result<PolicyWeights> {
        self.intervals[j].weights(t, x_bar, y_refined)
    }
}
