//! Portfolio policies: classical single-period Black-Litterman, the aged-view
//! rebalancing investor, the dynamic policy with hedging demand, and the
//! per-interval policies for revised, short-term and multi-horizon views.

use nalgebra::{DMatrix, DVector};

use crate::error::{DblError, Result};

pub mod classical;
pub mod dynamic;
pub mod interval;
pub mod multi_horizon;
pub mod revisions;
pub mod short_term;

pub use classical::{aged_view_portfolio, aged_view_precision, classical_bl, classical_bl_portfolio, ClassicalBLPosterior};
pub use dynamic::{solve_dynamic_policy, solve_dynamic_policy_with_steps, PolicySolution};
pub use interval::IntervalPolicy;
pub use multi_horizon::{solve_multi_horizon_policy, MultiHorizonPolicy};
pub use revisions::{revisions_policy, RevisionPolicy};
pub use short_term::{short_term_policy, ShortTermPolicy};

pub(crate) const MODULE: &str = "policy_engine";

/// Risky-asset weights split into the myopic mean-variance part and the
/// intertemporal hedging demand.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyWeights {
    pub mean_variance: DVector<f64>,
    pub hedging: DVector<f64>,
}

impl PolicyWeights {
    pub fn total(&self) -> DVector<f64> {
        &self.mean_variance + &self.hedging
    }
}

/// Weights frozen at one time as an affine map of the state and the view:
/// `π = constant + state · x + view · y`.
#[derive(Debug, Clone)]
pub struct AffineWeights {
    pub constant: DVector<f64>,
    pub state: DMatrix<f64>,
    pub view: DMatrix<f64>,
}

impl AffineWeights {
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.constant + &self.state * x + &self.view * y
    }

    /// Writes `π` into `out` without allocating.
    pub fn apply_into(&self, x: &DVector<f64>, y: &DVector<f64>, out: &mut DVector<f64>) {
        out.copy_from(&self.constant);
        out.gemv(1.0, &self.state, x, 1.0);
        out.gemv(1.0, &self.view, y, 1.0);
    }
}

/// Accepts `γ ≥ 1`; `γ = 1` is log utility and carries no hedging demand.
pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 1.0 {
        Ok(())
    } else {
        Err(DblError::GammaOutOfRange { gamma })
    }
}

/// `M = (γ−1) Q (γΣ⁻¹ + Q)⁻¹` for a remaining view precision `Q`.
pub(crate) fn hedge_matrix(sigma_inv: &DMatrix<f64>, q: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let n = q.nrows();
    if gamma == 1.0 {
        return DMatrix::zeros(n, n);
    }
    let inner = sigma_inv * gamma + q;
    // Q (γΣ⁻¹+Q)⁻¹ = ((γΣ⁻¹+Q)⁻¹ Q)ᵀ since both factors are symmetric.
    let solved = inner.lu().solve(q).expect("gamma Sigma^-1 + Q is positive definite");
    solved.transpose() * (gamma - 1.0)
}

/// `Σ_DBL = S + (Σ − S)/γ` with `S = (Σ⁻¹ + Q)⁻¹`.
pub(crate) fn sigma_dbl(sigma: &DMatrix<f64>, sigma_inv: &DMatrix<f64>, q: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let s = crate::gaussian::spd_inverse(&(sigma_inv + q), MODULE).expect("posterior precision is positive definite");
    let out = &s + (sigma - &s) / gamma;
    crate::gaussian::symmetrize(&out)
}
