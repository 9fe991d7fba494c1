//! Single-period Black-Litterman posterior and the investor who re-solves it
//! at every rebalancing date with an aged view.

use nalgebra::{DMatrix, DVector};

use super::MODULE;
use crate::conditional::ConditionalCoefficients;
use crate::error::{DblError, Result};
use crate::gaussian::{cholesky_in, spd_inverse, symmetrize};
use crate::market::MarketModel;

#[derive(Debug, Clone)]
pub struct ClassicalBLPosterior {
    pub mu_bl: DVector<f64>,
    pub sigma_bl: DMatrix<f64>,
}

/// Posterior of the one-period return `r ~ N(μ, Σ)` given `y = P r + ε`,
/// `ε ~ N(0, Ω)`:
/// `μ_BL = (Σ⁻¹ + PᵀΩ⁻¹P)⁻¹(Σ⁻¹μ + PᵀΩ⁻¹y)`, `Σ_BL⁻¹ = Σ⁻¹ + PᵀΩ⁻¹P`.
pub fn classical_bl(market: &MarketModel, pick: &DMatrix<f64>, omega: &DMatrix<f64>, y: &DVector<f64>) -> Result<ClassicalBLPosterior> {
    let n = market.n_assets();
    let k = pick.nrows();
    if pick.ncols() != n || omega.shape() != (k, k) || y.len() != k {
        return Err(DblError::ShapeMismatch {
            module: MODULE,
            detail: format!("pick {}x{}, omega {}x{}, y {}", k, pick.ncols(), omega.nrows(), omega.ncols(), y.len()),
        });
    }
    let omega_inv = cholesky_in(&symmetrize(omega), MODULE).map_err(|_| DblError::SingularOmega)?.inverse();
    let pt_oinv = pick.transpose() * &omega_inv;
    let precision = symmetrize(&(market.sigma_inv() + &pt_oinv * pick));
    let sigma_bl = spd_inverse(&precision, MODULE)?;
    let mu_bl = &sigma_bl * (market.sigma_inv() * market.mu() + &pt_oinv * y);
    Ok(ClassicalBLPosterior { mu_bl, sigma_bl })
}

/// `π = (1/γ) Σ_BL⁻¹ (μ_BL − r_f 1)`; the remainder `1 − πᵀ1` sits in cash.
pub fn classical_bl_portfolio(post: &ClassicalBLPosterior, r_f: f64, gamma: f64) -> DVector<f64> {
    let excess = post.mu_bl.add_scalar(-r_f);
    let chol = cholesky_in(&post.sigma_bl, MODULE).expect("posterior covariance is positive definite");
    chol.solve_vec(&excess) / gamma
}

/// `Σ_BL|t⁻¹ = Σ⁻¹ + (1 − t/T) PᵀΩ⁻¹P`, the precision of a view that has aged to `t`.
pub fn aged_view_precision(coeffs: &ConditionalCoefficients, t: f64) -> DMatrix<f64> {
    symmetrize(&(coeffs.market().sigma_inv() + coeffs.view_precision(t)))
}

/// Weights of the rebalanced single-period investor:
/// `π = (1/γ) Σ_BL|t⁻¹ (μ̃(t,x) − ½diag Σ − r_f 1)`.
pub fn aged_view_portfolio(coeffs: &ConditionalCoefficients, gamma: f64, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    if !(gamma > 0.0) {
        return Err(DblError::InvalidInput { module: MODULE, detail: format!("gamma must be positive, got {gamma}") });
    }
    if !(0.0..coeffs.horizon()).contains(&t) {
        return Err(DblError::GridOutOfRange { module: MODULE, detail: format!("t = {t} outside [0, {})", coeffs.horizon()) });
    }
    let sigma = coeffs.market().sigma();
    let excess = coeffs.drift(t, x) - sigma.diagonal() * 0.5;
    Ok(aged_view_precision(coeffs, t) * excess.add_scalar(-coeffs.market().r_f()) / gamma)
}
