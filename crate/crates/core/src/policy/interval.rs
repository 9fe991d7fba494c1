//! Closed-form policy on one interval during which a single view of the
//! return from the interval start to `view_end` is in force.

use nalgebra::{DMatrix, DVector};

use super::{check_gamma, hedge_matrix, sigma_dbl, AffineWeights, PolicyWeights, MODULE};
use crate::conditional::ConditionalCoefficients;
use crate::error::{DblError, Result};
use crate::gaussian::{cholesky_in, symmetrize};
use crate::market::MarketModel;

/// Policy on `[start, end)` for a view `y = P(X(view_end) − X(start)) + ε`,
/// `ε ~ N(0, Ω)` with `Ω` the absolute noise covariance. The state is the
/// log-return `x̄ = X(t) − X(start)` accumulated since the interval began.
#[derive(Debug, Clone)]
pub struct IntervalPolicy {
    market: MarketModel,
    pick: DMatrix<f64>,
    omega: DMatrix<f64>,
    start: f64,
    end: f64,
    view_end: f64,
    gamma: f64,
    psp: DMatrix<f64>,
    sigma_pt: DMatrix<f64>,
    omega_inv: DMatrix<f64>,
    view_info: DMatrix<f64>,
    p_mux: DVector<f64>,
}

/// y-independent matrices of the policy at a fixed time.
#[derive(Debug, Clone)]
pub struct EpochOperator {
    /// `ΣPᵀ((V−t)PΣPᵀ + Ω)⁻¹`, so `μ̃ = μ + gain (y − Px̄ − (V−t)Pμˣ)`.
    pub gain: DMatrix<f64>,
    /// `(V−t)Pμˣ`.
    pub shift: DVector<f64>,
    /// `Σ⁻¹ + (V−t)PᵀΩ⁻¹P`, the aged-view precision.
    pub aged_precision: DMatrix<f64>,
    /// `Σ_DBL(t)⁻¹`.
    pub dbl_precision: DMatrix<f64>,
}

impl IntervalPolicy {
    pub fn new(
        market: &MarketModel,
        pick: &DMatrix<f64>,
        omega: &DMatrix<f64>,
        start: f64,
        end: f64,
        view_end: f64,
        gamma: f64,
    ) -> Result<Self> {
        check_gamma(gamma)?;
        let (n, k) = (market.n_assets(), pick.nrows());
        if pick.ncols() != n || omega.shape() != (k, k) {
            return Err(DblError::ShapeMismatch {
                module: MODULE,
                detail: format!("pick {}x{}, omega {}x{}", k, pick.ncols(), omega.nrows(), omega.ncols()),
            });
        }
        if !(start < end && end <= view_end) {
            return Err(DblError::InvalidInput {
                module: MODULE,
                detail: format!("need start < end <= view_end, got {start}, {end}, {view_end}"),
            });
        }
        let omega = symmetrize(omega);
        let omega_inv = cholesky_in(&omega, MODULE).map_err(|_| DblError::SingularOmega)?.inverse();
        let sigma_pt = market.sigma() * pick.transpose();
        let psp = symmetrize(&(pick * &sigma_pt));
        let view_info = symmetrize(&(pick.transpose() * &omega_inv * pick));
        let p_mux = pick * market.log_drift();
        Ok(Self {
            market: market.clone(),
            pick: pick.clone(),
            omega,
            start,
            end,
            view_end,
            gamma,
            psp,
            sigma_pt,
            omega_inv,
            view_info,
            p_mux,
        })
    }

    pub fn market(&self) -> &MarketModel {
        &self.market
    }
    pub fn pick(&self) -> &DMatrix<f64> {
        &self.pick
    }
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }
    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn end(&self) -> f64 {
        self.end
    }
    pub fn view_end(&self) -> f64 {
        self.view_end
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Accepts `t ∈ [start, end)`, and `t = end` when the interval closes the view.
    pub fn check_time(&self, t: f64) -> Result<()> {
        let closes = self.end == self.view_end && t == self.end;
        if (t >= self.start && t < self.end) || closes {
            Ok(())
        } else {
            Err(DblError::IntervalMismatch { t, start: self.start, end: self.end })
        }
    }

    /// `(V−t) PᵀΩ⁻¹P`, the view precision left at `t`.
    pub fn remaining_precision(&self, t: f64) -> DMatrix<f64> {
        &self.view_info * (self.view_end - t)
    }

    fn residual_gram_inv(&self, t: f64) -> DMatrix<f64> {
        let g = &self.psp * (self.view_end - t) + &self.omega;
        cholesky_in(&symmetrize(&g), MODULE).expect("residual view Gram is positive definite").inverse()
    }

    /// `M(t) = (γ−1) Q (γΣ⁻¹ + Q)⁻¹` with `Q = (V−t)PᵀΩ⁻¹P`.
    pub fn m(&self, t: f64) -> DMatrix<f64> {
        hedge_matrix(self.market.sigma_inv(), &self.remaining_precision(t), self.gamma)
    }

    /// `M̄(t) = −(γ−1)(V−t) Ω⁻¹P (γΣ⁻¹ + Q)⁻¹`, so that `M = −PᵀM̄`.
    pub fn m_bar(&self, t: f64) -> DMatrix<f64> {
        let k = self.pick.nrows();
        let n = self.market.n_assets();
        if self.gamma == 1.0 {
            return DMatrix::zeros(k, n);
        }
        let inner = self.market.sigma_inv() * self.gamma + self.remaining_precision(t);
        let inner_inv = cholesky_in(&symmetrize(&inner), MODULE).expect("gamma Sigma^-1 + Q is positive definite").inverse();
        &self.omega_inv * &self.pick * inner_inv * (-(self.gamma - 1.0) * (self.view_end - t))
    }

    /// `η̄_t = −((V−t)PΣPᵀ + Ω)⁻¹`.
    pub fn eta_bar(&self, t: f64) -> DMatrix<f64> {
        -self.residual_gram_inv(t)
    }

    /// `C(t) = M̄(t) Pᵀ η̄_t`.
    pub fn c(&self, t: f64) -> DMatrix<f64> {
        self.m_bar(t) * self.pick.transpose() * self.eta_bar(t)
    }

    /// `ĉ(t) = M̄(t)(Σ⁻¹(μ − r_f 1) + (V−t) Pᵀ η̄_t P μˣ)`.
    pub fn chat(&self, t: f64) -> DVector<f64> {
        let ex = self.market.mu().add_scalar(-self.market.r_f());
        let tail = self.pick.transpose() * (self.eta_bar(t) * &self.p_mux) * (self.view_end - t);
        self.m_bar(t) * (self.market.sigma_inv() * ex + tail)
    }

    pub fn sigma_dbl(&self, t: f64) -> DMatrix<f64> {
        sigma_dbl(self.market.sigma(), self.market.sigma_inv(), &self.remaining_precision(t), self.gamma)
    }

    /// `μ̃(t,x̄,y) = μ + ΣPᵀ((V−t)PΣPᵀ + Ω)⁻¹(y − Px̄ − (V−t)Pμˣ)`.
    pub fn drift(&self, t: f64, x_bar: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let innov = y - &self.pick * x_bar - &self.p_mux * (self.view_end - t);
        self.market.mu() + &self.sigma_pt * (self.residual_gram_inv(t) * innov)
    }

    /// Mean-variance holding plus hedging `(1/γ)Pᵀ(C(t)(y − Px̄) − ĉ(t))`.
    pub fn weights(&self, t: f64, x_bar: &DVector<f64>, y: &DVector<f64>) -> Result<PolicyWeights> {
        self.check_time(t)?;
        self.check_view(y)?;
        let ex = self.drift(t, x_bar, y).add_scalar(-self.market.r_f());
        let mean_variance = self.market.sigma_inv() * ex / self.gamma;
        let hedging = self.pick.transpose() * (self.c(t) * (y - &self.pick * x_bar) - self.chat(t)) / self.gamma;
        Ok(PolicyWeights { mean_variance, hedging })
    }

    /// `(1/γ) M(t) Σ⁻¹ (μ̃ − r_f 1)`.
    pub fn hedging_from_m(&self, t: f64, x_bar: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let ex = self.drift(t, x_bar, y).add_scalar(-self.market.r_f());
        self.m(t) * (self.market.sigma_inv() * ex) / self.gamma
    }

    /// Weights of the rebalancing single-period investor holding the same view.
    pub fn aged_view_weights(&self, t: f64, x_bar: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_time(t)?;
        self.check_view(y)?;
        let op = self.epoch_operator(t);
        let log_drift = self.drift(t, x_bar, y) - self.market.sigma().diagonal() * 0.5;
        Ok(op.aged_precision * log_drift.add_scalar(-self.market.r_f()) / self.gamma)
    }

    fn check_view(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.pick.nrows() {
            return Err(DblError::ShapeMismatch {
                module: MODULE,
                detail: format!("view has length {}, expected {}", y.len(), self.pick.nrows()),
            });
        }
        Ok(())
    }

    pub fn epoch_operator(&self, t: f64) -> EpochOperator {
        let q = self.remaining_precision(t);
        let aged_precision = symmetrize(&(self.market.sigma_inv() + &q));
        let m = hedge_matrix(self.market.sigma_inv(), &q, self.gamma);
        let dbl_precision = (DMatrix::identity(q.nrows(), q.nrows()) + m) * self.market.sigma_inv();
        EpochOperator {
            gain: &self.sigma_pt * self.residual_gram_inv(t),
            shift: &self.p_mux * (self.view_end - t),
            aged_precision,
            dbl_precision: symmetrize(&dbl_precision),
        }
    }

    /// Dynamic policy at `t` as an affine map of `(x̄, y)`.
    pub fn affine_dbl(&self, t: f64) -> AffineWeights {
        let op = self.epoch_operator(t);
        self.affine_from(&op, &(op.dbl_precision.clone() / self.gamma), false)
    }

    /// Aged-view single-period policy at `t` as an affine map of `(x̄, y)`.
    pub fn affine_aged(&self, t: f64) -> AffineWeights {
        let op = self.epoch_operator(t);
        self.affine_from(&op, &(op.aged_precision.clone() / self.gamma), true)
    }

    fn affine_from(&self, op: &EpochOperator, scale: &DMatrix<f64>, log_drift: bool) -> AffineWeights {
        let mut base = self.market.mu().add_scalar(-self.market.r_f()) - &op.gain * &op.shift;
        if log_drift {
            base -= self.market.sigma().diagonal() * 0.5;
        }
        let view = scale * &op.gain;
        AffineWeights { constant: scale * base, state: -(&view * &self.pick), view }
    }

    /// The same problem as a single-view solve on `[0, V − start]` with noise
    /// `Ω/(V − start)` per unit time; evaluate it at `t − start`.
    pub fn base_coefficients(&self, y: &DVector<f64>) -> Result<ConditionalCoefficients> {
        let len = self.view_end - self.start;
        ConditionalCoefficients::from_parts(&self.market, &self.pick, &(&self.omega / len), len, y)
    }
}
