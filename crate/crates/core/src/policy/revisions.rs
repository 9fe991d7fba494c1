//! Policy for a view that is revised at fixed dates over the remaining horizon.

use nalgebra::{DMatrix, DVector};

use super::{IntervalPolicy, PolicyWeights};
use crate::error::Result;
use crate::gaussian::symmetrize;
use crate::market::{MarketModel, RevisionSchedule};

/// One [`IntervalPolicy`] per view; interval `j` runs from `t_j` to `t_{j+1}`
/// and its view covers `X(T) − X(t_j)`.
#[derive(Debug, Clone)]
pub struct RevisionPolicy {
    schedule: RevisionSchedule,
    intervals: Vec<IntervalPolicy>,
}

pub fn revisions_policy(schedule: &RevisionSchedule, market: &MarketModel, gamma: f64) -> Result<RevisionPolicy> {
    let horizon = schedule.horizon();
    let intervals = (0..schedule.n_views())
        .map(|j| {
            IntervalPolicy::new(
                market,
                schedule.pick(),
                &schedule.omegas()[j],
                schedule.times()[j],
                schedule.interval_end(j),
                horizon,
                gamma,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RevisionPolicy { schedule: schedule.clone(), intervals })
}

impl RevisionPolicy {
    pub fn schedule(&self) -> &RevisionSchedule {
        &self.schedule
    }
    pub fn interval(&self, j: usize) -> &IntervalPolicy {
        &self.intervals[j]
    }
    pub fn intervals(&self) -> &[IntervalPolicy] {
        &self.intervals
    }

    /// Weights on interval `j` given `x̄ = X(t) − X(t_j)` and the view `y^j`.
    pub fn weights(&self, j: usize, t: f64, x_bar: &DVector<f64>, y: &DVector<f64>) -> Result<PolicyWeights> {
        self.intervals[j].weights(t, x_bar, y)
    }

    /// `(C^j(t_{j+1}), ĉ^j(t_{j+1}))` obtained by integrating the next
    /// interval's quadratic value term against the law of the revised view.
    pub fn continuation_terminal(&self, j: usize) -> (DMatrix<f64>, DVector<f64>) {
        let next = &self.intervals[j + 1];
        let t = next.start();
        let pick = self.schedule.pick();
        let market = next.market();
        let rest = pick * market.sigma() * pick.transpose() * (self.schedule.horizon() - t);
        let om_j = &self.schedule.omegas()[j];
        let om_next = &self.schedule.omegas()[j + 1];
        let innov = om_j - om_next;
        let gram_j_inv = symmetrize(&(&rest + om_j)).try_inverse().expect("view Gram is invertible");
        let k = pick.nrows();
        let id = DMatrix::identity(k, k);
        let beta0 = &id - &innov * &gram_j_inv;
        let alpha0 = &innov * &gram_j_inv * (pick * market.log_drift()) * (self.schedule.horizon() - t);
        let cond_cov = &innov * &gram_j_inv * (&rest + om_next);
        let c_next = next.c(t);
        let chat_next = next.chat(t);
        // (C⁻¹ + V)⁻¹ = C (I + V C)⁻¹ and (C⁻¹ + V)⁻¹ C⁻¹ = (I + C V)⁻¹.
        let weight = &c_next * (&id + &cond_cov * &c_next).try_inverse().expect("I + V C is invertible");
        let c = beta0.transpose() * &weight * &beta0;
        let lhs = (&id + &c_next * &cond_cov).try_inverse().expect("I + C V is invertible") * chat_next;
        let chat = beta0.transpose() * (lhs - weight * alpha0);
        (c, chat)
    }
}
