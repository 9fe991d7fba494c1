//! Law of the log-return process conditioned on a view: coefficients of the
//! mean-reverting dynamics, a Kalman-smoother oracle, and exact path sampling.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{DblError, Result};
use crate::gaussian::{cholesky_in, psd_sqrt, symmetrize, CholeskyFactor, GaussianConditioner, GaussianVector};
use crate::market::{MarketModel, ViewSet};
use crate::rng::path_rng;

const MODULE: &str = "conditional_dynamics";

/// Coefficients of `dX = (μ̃(t,X) − ½diag Σ)dt + dWʸ` given the view `y`
/// of `P X(T) + √T ε`, `ε ~ N(0, Ω)`.
#[derive(Debug, Clone)]
pub struct ConditionalCoefficients {
    market: MarketModel,
    pick: DMatrix<f64>,
    omega: DMatrix<f64>,
    horizon: f64,
    y: DVector<f64>,
    psp: DMatrix<f64>,
    sigma_pt: DMatrix<f64>,
    gram_chol: CholeskyFactor,
    omega_inv: DMatrix<f64>,
    beta1: DVector<f64>,
    beta1_mat: DMatrix<f64>,
    /// `μˣ + β₁(y − TPμˣ)`, the slope of the conditional mean path.
    mean_slope: DVector<f64>,
}

impl ConditionalCoefficients {
    /// Uses the horizon of `views`, which must be given at time 0.
    pub fn new(market: &MarketModel, views: &ViewSet, y: &DVector<f64>) -> Result<Self> {
        if views.given_at() != 0.0 {
            return Err(DblError::InvalidInput { module: MODULE, detail: "view must be given at time 0".into() });
        }
        Self::from_parts(market, views.pick(), views.omega(), views.horizon(), y)
    }

    /// Builds the coefficients from raw parts; `omega` is the noise covariance
    /// per unit time, so the view noise has covariance `horizon · omega`.
    pub fn from_parts(
        market: &MarketModel,
        pick: &DMatrix<f64>,
        omega: &DMatrix<f64>,
        horizon: f64,
        y: &DVector<f64>,
    ) -> Result<Self> {
        let n = market.n_assets();
        let k = pick.nrows();
        if pick.ncols() != n || omega.nrows() != k || omega.ncols() != k || y.len() != k {
            return Err(DblError::ShapeMismatch {
                module: MODULE,
                detail: format!("pick {}x{}, omega {}x{}, y {}", pick.nrows(), pick.ncols(), omega.nrows(), omega.ncols(), y.len()),
            });
        }
        if !(horizon > 0.0) {
            return Err(DblError::InvalidInput { module: MODULE, detail: format!("horizon must be positive, got {horizon}") });
        }
        let sigma = market.sigma();
        let sigma_pt = sigma * pick.transpose();
        let psp = symmetrize(&(pick * &sigma_pt));
        let gram = symmetrize(&(&psp + omega));
        let gram_chol = cholesky_in(&gram, MODULE).map_err(|_| DblError::SingularViewGram { module: MODULE })?;
        let omega_inv = cholesky_in(omega, MODULE)?.inverse();
        let beta1_mat = gram_chol.solve(&sigma_pt.transpose()).transpose() / horizon;
        let innovation = y - pick * market.log_drift() * horizon;
        let beta1 = &beta1_mat * &innovation;
        let mean_slope = market.log_drift() + &beta1;
        Ok(Self {
            market: market.clone(),
            pick: pick.clone(),
            omega: symmetrize(omega),
            horizon,
            y: y.clone(),
            psp,
            sigma_pt,
            gram_chol,
            omega_inv,
            beta1,
            beta1_mat,
            mean_slope,
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
    pub fn omega_inv(&self) -> &DMatrix<f64> {
        &self.omega_inv
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }
    pub fn n_assets(&self) -> usize {
        self.market.n_assets()
    }

    /// `β₁ = (1/T) Σ Pᵀ (PΣPᵀ + Ω)⁻¹`.
    pub fn beta1(&self) -> &DMatrix<f64> {
        &self.beta1_mat
    }

    /// `β₁(y − TPμˣ)`.
    pub fn view_tilt(&self) -> &DVector<f64> {
        &self.beta1
    }

    /// `((T−t)PΣPᵀ + TΩ)⁻¹`.
    pub fn residual_gram_inv(&self, t: f64) -> DMatrix<f64> {
        let m = &self.psp * (self.horizon - t) + &self.omega * self.horizon;
        cholesky_in(&symmetrize(&m), MODULE).expect("residual view Gram stays positive definite").inverse()
    }

    /// `β₂(t) = ΣPᵀ((T−t)PΣPᵀ + TΩ)⁻¹ P`.
    pub fn beta2(&self, t: f64) -> DMatrix<f64> {
        &self.sigma_pt * self.residual_gram_inv(t) * &self.pick
    }

    /// `η_t = −Pᵀ((T−t)PΣPᵀ + TΩ)⁻¹ P`, so that `β₂ = −Σ η_t`.
    pub fn eta(&self, t: f64) -> DMatrix<f64> {
        -(self.pick.transpose() * self.residual_gram_inv(t) * &self.pick)
    }

    /// `E[Xʸ(t)] = t (μˣ + β₁(y − TPμˣ))`.
    pub fn cond_mean(&self, t: f64) -> DVector<f64> {
        &self.mean_slope * t
    }

    /// `Cov(Xʸ(s), Xʸ(t)) = min(s,t)Σ − (st/T) ΣPᵀ(PΣPᵀ+Ω)⁻¹PΣ`.
    pub fn cond_cov(&self, s: f64, t: f64) -> DMatrix<f64> {
        let shrink = &self.sigma_pt * self.gram_chol.solve(&self.sigma_pt.transpose());
        symmetrize(&(self.market.sigma() * s.min(t) - shrink * (s * t / self.horizon)))
    }

    /// Arithmetic drift `μ̃(t,x) = μ + β₁(y − TPμˣ) + β₂(t)(E[Xʸ(t)] − x)`.
    pub fn drift(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        self.market.mu() + &self.beta1 + self.beta2(t) * (self.cond_mean(t) - x)
    }

    /// `α_t = μ + β₁(y − TPμˣ) − Σ η_t E[Xʸ(t)]`, the intercept of `μ̃(t, ·)`.
    pub fn alpha(&self, t: f64) -> DVector<f64> {
        self.market.mu() + &self.beta1 + self.beta2(t) * self.cond_mean(t)
    }

    /// `(1 − t/T) PᵀΩ⁻¹P`, the view precision left at time `t`.
    pub fn view_precision(&self, t: f64) -> DMatrix<f64> {
        symmetrize(&(self.pick.transpose() * &self.omega_inv * &self.pick * (1.0 - t / self.horizon)))
    }

    /// Same market and view with a different observation.
    pub fn with_view(&self, y: &DVector<f64>) -> Result<Self> {
        Self::from_parts(&self.market, &self.pick, &self.omega, self.horizon, y)
    }

    /// Prior joint law of `(X(t_1), …, X(t_m), Y)` stacked in that order.
    pub fn prior_joint(&self, times: &[f64]) -> GaussianVector {
        let n = self.n_assets();
        let k = self.pick.nrows();
        let m = times.len();
        let d = m * n + k;
        let mut mean = DVector::zeros(d);
        let mut cov = DMatrix::zeros(d, d);
        let sigma = self.market.sigma();
        for (a, &ta) in times.iter().enumerate() {
            mean.rows_mut(a * n, n).copy_from(&(self.market.log_drift() * ta));
            for (b, &tb) in times.iter().enumerate() {
                cov.view_mut((a * n, b * n), (n, n)).copy_from(&(sigma * ta.min(tb)));
            }
            let cross = &self.sigma_pt * ta.min(self.horizon);
            cov.view_mut((a * n, m * n), (n, k)).copy_from(&cross);
            cov.view_mut((m * n, a * n), (k, n)).copy_from(&cross.transpose());
        }
        mean.rows_mut(m * n, k).copy_from(&(&self.pick * self.market.log_drift() * self.horizon));
        cov.view_mut((m * n, m * n), (k, k)).copy_from(&((&self.psp + &self.omega) * self.horizon));
        GaussianVector { mean, cov: symmetrize(&cov) }
    }
}

/// Smoothed mean and covariance of the discretised state at one grid time.
#[derive(Debug, Clone)]
pub struct SmoothedState {
    pub t: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Kalman filter plus Rauch-Tung-Striebel smoother for
/// `X_{k+1} = X_k + μˣΔ + w_k`, `w_k ~ N(0, ΔΣ)`, with the single observation
/// `y = P X_n + √T ε` at the last step.
pub fn kalman_smoother_oracle(coeffs: &ConditionalCoefficients, n_steps: usize) -> Result<Vec<SmoothedState>> {
    if n_steps < 2 {
        return Err(DblError::InvalidInput { module: MODULE, detail: "kalman smoother needs n_steps >= 2".into() });
    }
    let market = coeffs.market();
    let n = market.n_assets();
    let t_end = coeffs.horizon();
    let dt = t_end / n_steps as f64;
    let q = market.sigma() * dt;
    let drift = market.log_drift() * dt;

    let mut pred_mean = vec![DVector::zeros(n); n_steps + 1];
    let mut pred_cov = vec![DMatrix::zeros(n, n); n_steps + 1];
    let mut filt_mean = vec![DVector::zeros(n); n_steps + 1];
    let mut filt_cov = vec![DMatrix::zeros(n, n); n_steps + 1];
    for k in 1..=n_steps {
        pred_mean[k] = &filt_mean[k - 1] + &drift;
        pred_cov[k] = symmetrize(&(&filt_cov[k - 1] + &q));
        filt_mean[k] = pred_mean[k].clone();
        filt_cov[k] = pred_cov[k].clone();
    }
    // Measurement update at the final step.
    let p = coeffs.pick();
    let r = coeffs.omega() * t_end;
    let pc = &pred_cov[n_steps];
    let s = symmetrize(&(p * pc * p.transpose() + r));
    let s_chol = cholesky_in(&s, MODULE)?;
    let gain = s_chol.solve(&(p * pc)).transpose();
    let innov = coeffs.y() - p * &pred_mean[n_steps];
    filt_mean[n_steps] = &pred_mean[n_steps] + &gain * innov;
    filt_cov[n_steps] = symmetrize(&(pc - &gain * p * pc));

    let mut out = vec![
        SmoothedState { t: t_end, mean: filt_mean[n_steps].clone(), cov: filt_cov[n_steps].clone() };
        n_steps + 1
    ];
    for k in (0..n_steps).rev() {
        let next = &out[k + 1];
        // G = P_k|k (P_{k+1|k})⁻¹ with identity transition.
        let g = cholesky_in(&pred_cov[k + 1], MODULE)?.solve(&filt_cov[k]).transpose();
        let mean = &filt_mean[k] + &g * (&next.mean - &pred_mean[k + 1]);
        let cov = symmetrize(&(&filt_cov[k] + &g * (&next.cov - &pred_cov[k + 1]) * g.transpose()));
        out[k] = SmoothedState { t: k as f64 * dt, mean, cov };
    }
    Ok(out)
}

/// Simulated conditional log-return paths on a common grid.
#[derive(Debug, Clone)]
pub struct ConditionalPaths {
    pub grid: Vec<f64>,
    /// One `|grid| × N` matrix per path.
    pub log_returns: Vec<DMatrix<f64>>,
}

impl ConditionalPaths {
    /// `S_i(t) = S_i(0) exp(X_i(t))` with unit initial prices.
    pub fn prices(&self, path: usize) -> DMatrix<f64> {
        self.log_returns[path].map(f64::exp)
    }

    /// Writes `path_id,t,asset_index,log_return,price` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "path_id,t,asset_index,log_return,price")?;
        for (p, x) in self.log_returns.iter().enumerate() {
            for (k, t) in self.grid.iter().enumerate() {
                for i in 0..x.ncols() {
                    let v = x[(k, i)];
                    writeln!(w, "{p},{t},{i},{v},{}", v.exp())?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn validate_grid(grid: &[f64], horizon: f64, module: &'static str) -> Result<()> {
    let bad = |detail: String| Err(DblError::GridOutOfRange { module, detail });
    if grid.is_empty() {
        return bad("grid is empty".into());
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > horizon * (1.0 + 1e-14) {
        return bad(format!("grid must lie in [0, {horizon}]"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return bad("grid must be strictly increasing".into());
    }
    Ok(())
}

fn noise_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    match cholesky_in(cov, MODULE) {
        Ok(c) => c.lower().clone(),
        Err(_) => psd_sqrt(cov),
    }
}

struct Transition {
    conditioner: GaussianConditioner,
    noise: DMatrix<f64>,
    uses_state: bool,
}

/// Exact sampler of `Xʸ` on a fixed grid: each step draws `X(t_{k+1})` from
/// its law given `(X(t_k), Y = y)`.
pub struct ConditionalSampler {
    coeffs: ConditionalCoefficients,
    grid: Vec<f64>,
    transitions: Vec<Transition>,
}

impl ConditionalSampler {
    pub fn new(coeffs: &ConditionalCoefficients, grid: &[f64]) -> Result<Self> {
        validate_grid(grid, coeffs.horizon(), MODULE)?;
        let n = coeffs.n_assets();
        let k = coeffs.pick().nrows();
        let mut transitions = Vec::with_capacity(grid.len());
        let mut prev = 0.0;
        for &t in grid {
            // Joint order: X(t), X(prev), Y.
            let uses_state = prev > 0.0;
            let (joint, observed): (GaussianVector, Vec<usize>) = if uses_state {
                (coeffs.prior_joint(&[t, prev]), (n..(2 * n + k)).collect())
            } else {
                (coeffs.prior_joint(&[t]), (n..(n + k)).collect())
            };
            let conditioner = GaussianConditioner::new(&joint, &observed)?;
            let noise = noise_factor(conditioner.cov());
            transitions.push(Transition { conditioner, noise, uses_state });
            prev = t;
        }
        Ok(Self { coeffs: coeffs.clone(), grid: grid.to_vec(), transitions })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// One path, using normals from `rng`.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        let n = self.coeffs.n_assets();
        let k = self.coeffs.pick().nrows();
        let y = self.coeffs.y();
        let mut out = DMatrix::zeros(self.grid.len(), n);
        let mut prev = DVector::zeros(n);
        for (row, tr) in self.transitions.iter().enumerate() {
            let obs = if tr.uses_state {
                let mut o = DVector::zeros(n + k);
                o.rows_mut(0, n).copy_from(&prev);
                o.rows_mut(n, k).copy_from(y);
                o
            } else {
                y.clone()
            };
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
            let x = tr.conditioner.mean_given(&obs).expect("observation length fixed at construction") + &tr.noise * z;
            out.set_row(row, &x.transpose());
            prev = x;
        }
        out
    }
}

/// Exact conditional paths; path `p` uses stream `p` of `seed`.
pub fn simulate_conditional_paths(
    coeffs: &ConditionalCoefficients,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<ConditionalPaths> {
    let sampler = ConditionalSampler::new(coeffs, grid)?;
    let log_returns = (0..n_paths)
        .into_par_iter()
        .map(|p| sampler.sample(&mut path_rng(seed, p as u64)))
        .collect();
    Ok(ConditionalPaths { grid: grid.to_vec(), log_returns })
}

/// Euler-Maruyama discretisation of the conditional SDE with step at most
/// `dt`, recorded on `grid`. Kept for cross-validating the exact sampler.
pub fn simulate_conditional_paths_euler(
    coeffs: &ConditionalCoefficients,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    dt: f64,
) -> Result<ConditionalPaths> {
    validate_grid(grid, coeffs.horizon(), MODULE)?;
    if !(dt > 0.0) {
        return Err(DblError::InvalidInput { module: MODULE, detail: "Euler step must be positive".into() });
    }
    let n = coeffs.n_assets();
    let l = coeffs.market().chol().lower().clone();
    let half_var = coeffs.market().sigma().diagonal() * 0.5;
    let log_returns = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p as u64);
            let mut out = DMatrix::zeros(grid.len(), n);
            let mut x = DVector::zeros(n);
            let mut t = 0.0;
            for (row, &target) in grid.iter().enumerate() {
                let steps = ((target - t) / dt).ceil().max(0.0) as usize;
                if steps > 0 {
                    let h = (target - t) / steps as f64;
                    for _ in 0..steps {
                        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                        let drift = coeffs.drift(t, &x) - &half_var;
                        x += drift * h + &l * z * h.sqrt();
                        t += h;
                    }
                }
                t = target;
                out.set_row(row, &x.transpose());
            }
            out
        })
        .collect();
    Ok(ConditionalPaths { grid: grid.to_vec(), log_returns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{bridge_law, BridgeSpec};
    use crate::gaussian::condition;
    use crate::market::make_omega_alpha;
    use crate::testutil::{five_asset_market, five_asset_pick};

    fn five_asset_coeffs(alpha: f64) -> ConditionalCoefficients {
        let m = five_asset_market();
        let p = five_asset_pick();
        let om = make_omega_alpha(&m, &p, alpha).unwrap();
        let y = DVector::from_vec(vec![0.02, -0.05, 0.04]);
        ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &y).unwrap()
    }

    #[test]
    fn single_asset_beta1_is_inverse_hitting_time() {
        let (s2, w2, t) = (0.09, 0.04, 2.0);
        let m = crate::market::MarketModel::new(DVector::from_vec(vec![0.07]), DMatrix::from_element(1, 1, s2), 0.01, t).unwrap();
        let c = ConditionalCoefficients::from_parts(
            &m,
            &DMatrix::from_element(1, 1, 1.0),
            &DMatrix::from_element(1, 1, w2),
            t,
            &DVector::from_vec(vec![0.1]),
        )
        .unwrap();
        let tilde = t * (1.0 + w2 / s2);
        assert!((c.beta1()[(0, 0)] - 1.0 / tilde).abs() < 1e-15);
    }

    #[test]
    fn mean_path_has_no_reversion() {
        let c = five_asset_coeffs(0.4);
        for t in [0.0, 0.3, 0.9] {
            let d = c.drift(t, &c.cond_mean(t));
            assert!((d - (c.market().mu() + c.view_tilt())).amax() < 1e-15);
        }
    }

    #[test]
    fn drift_is_affine() {
        let c = five_asset_coeffs(0.4);
        let x = DVector::from_vec(vec![0.1, -0.3, 0.2, 0.0, 0.05]);
        let t = 0.37;
        let lhs = c.drift(t, &x) - c.drift(t, &DVector::zeros(5));
        assert!((lhs + c.beta2(t) * &x).amax() < 1e-15);
    }

    #[test]
    fn uninformative_view_recovers_prior() {
        let m = five_asset_market();
        let p = five_asset_pick();
        let om = make_omega_alpha(&m, &p, 0.4).unwrap() * 1e9;
        let c = ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &DVector::from_vec(vec![0.3, 0.3, 0.3])).unwrap();
        assert!(c.beta1().amax() < 1e-8);
        assert!((c.drift(0.5, &DVector::zeros(5)) - m.mu()).amax() < 1e-8);
    }

    #[test]
    fn terminal_mean_matches_conditioning() {
        let c = five_asset_coeffs(0.4);
        let joint = c.prior_joint(&[1.0]);
        let post = condition(&joint, &[5, 6, 7], c.y()).unwrap();
        assert!((post.mean - c.cond_mean(1.0)).amax() < 1e-10);
        assert!((post.cov - c.cond_cov(1.0, 1.0)).amax() < 1e-10);
    }

    #[test]
    fn prior_expected_view_leaves_prior_mean() {
        let m = five_asset_market();
        let p = five_asset_pick();
        let om = make_omega_alpha(&m, &p, 0.4).unwrap();
        let y = &p * m.log_drift();
        let c = ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &y).unwrap();
        let post = condition(&c.prior_joint(&[1.0]), &[5, 6, 7], &y).unwrap();
        assert!((post.mean - m.log_drift()).amax() < 1e-12);
    }

    #[test]
    fn woodbury_form_of_gain() {
        let c = five_asset_coeffs(0.8);
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let lhs = c.market().sigma() * c.pick().transpose() * c.residual_gram_inv(t);
            let rhs = (DMatrix::identity(5, 5) + c.beta2(t) * t) * c.beta1();
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    #[test]
    fn kalman_two_steps_matches_posterior() {
        let c = five_asset_coeffs(0.4);
        let sm = kalman_smoother_oracle(&c, 2).unwrap();
        assert!((&sm[2].mean - c.cond_mean(1.0)).amax() < 1e-12);
        assert!(kalman_smoother_oracle(&c, 1).is_err());
    }

    #[test]
    fn kalman_matches_closed_forms() {
        let c = five_asset_coeffs(0.4);
        for st in kalman_smoother_oracle(&c, 64).unwrap() {
            assert!((&st.mean - c.cond_mean(st.t)).amax() < 1e-8);
            assert!((&st.cov - c.cond_cov(st.t, st.t)).amax() < 1e-8);
        }
    }

    #[test]
    fn decomposition_matches_bridge_law() {
        let c = five_asset_coeffs(0.6);
        let m = c.market();
        let spec = BridgeSpec {
            a: DVector::zeros(5),
            sigma: m.sigma().clone(),
            pick: c.pick().clone(),
            omega: c.omega().clone(),
            horizon: 1.0,
            y: c.y() - c.pick() * m.log_drift(),
        };
        let law = bridge_law(&spec).unwrap();
        let grid: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        for &t in &grid {
            let bm = m.log_drift() * t + law.mean(t);
            assert!((bm - c.cond_mean(t)).amax() < 1e-12);
            for &s in &grid {
                assert!((law.cov(s, t) - c.cond_cov(s, t)).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn simulated_moments_match_closed_form() {
        let c = five_asset_coeffs(0.4);
        let grid = [0.25, 0.5, 1.0];
        let n = 100_000;
        let paths = simulate_conditional_paths(&c, &grid, n, 11).unwrap();
        let mean_t = c.cond_mean(1.0);
        let cov_h = c.cond_cov(0.5, 0.5);
        let mean_h = c.cond_mean(0.5);
        for i in 0..5 {
            let xs: Vec<f64> = paths.log_returns.iter().map(|x| x[(2, i)]).collect();
            let mu = xs.iter().sum::<f64>() / n as f64;
            let sd = (xs.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            assert!((mu - mean_t[i]).abs() < 3.0 * sd / (n as f64).sqrt(), "asset {i}");
            for j in 0..5 {
                let prod: Vec<f64> = paths
                    .log_returns
                    .iter()
                    .map(|x| (x[(1, i)] - mean_h[i]) * (x[(1, j)] - mean_h[j]))
                    .collect();
                let m = prod.iter().sum::<f64>() / n as f64;
                let s = (prod.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
                assert!((m - cov_h[(i, j)]).abs() < 3.0 * s / (n as f64).sqrt(), "cov ({i},{j})");
            }
        }
    }

    #[test]
    fn sampling_is_reproducible_and_prices_consistent() {
        let c = five_asset_coeffs(0.4);
        let a = simulate_conditional_paths(&c, &[0.5, 1.0], 4, 5).unwrap();
        let b = simulate_conditional_paths(&c, &[0.5, 1.0], 4, 5).unwrap();
        assert_eq!(a.log_returns, b.log_returns);
        assert_eq!(a.prices(1)[(0, 2)], a.log_returns[1][(0, 2)].exp());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path_id,t,asset_index,log_return,price\n"));
        assert_eq!(text.lines().count(), 1 + 4 * 2 * 5);
    }

    #[test]
    fn grid_validation() {
        let c = five_asset_coeffs(0.4);
        assert!(matches!(simulate_conditional_paths(&c, &[0.5, 0.2], 1, 0), Err(DblError::GridOutOfRange { .. })));
        assert!(matches!(simulate_conditional_paths(&c, &[1.5], 1, 0), Err(DblError::GridOutOfRange { .. })));
    }

    #[test]
    fn euler_agrees_with_exact_in_mean() {
        let c = five_asset_coeffs(0.4);
        let n = 20_000;
        let exact = simulate_conditional_paths(&c, &[1.0], n, 3).unwrap();
        let euler = simulate_conditional_paths_euler(&c, &[1.0], n, 4, 1e-2).unwrap();
        for i in 0..5 {
            let m = |p: &ConditionalPaths| p.log_returns.iter().map(|x| x[(0, i)]).sum::<f64>() / n as f64;
            let sd = c.cond_cov(1.0, 1.0)[(i, i)].sqrt();
            assert!((m(&exact) - m(&euler)).abs() < 3.0 * sd * (2.0 / n as f64).sqrt());
        }
    }
}
