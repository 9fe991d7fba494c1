//! Dynamic Black-Litterman policy for a single view: closed-form Riccati
//! solution, hedging demand and a numerically integrated value constant.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::{check_gamma, hedge_matrix, sigma_dbl, PolicyWeights};
use crate::conditional::ConditionalCoefficients;
use crate::error::{DblError, Result};
use crate::ode::{integrate_backward, HermiteTable, DEFAULT_STEPS_PER_YEAR};

/// Optimal policy and value function of a CRRA investor holding one view.
///
/// The value function is `V(t,z,x) = z^{1−γ}/(1−γ) · exp(½xᵀA(t)x + b(t)ᵀx + c(t))`.
#[derive(Debug)]
pub struct PolicySolution {
    coeffs: ConditionalCoefficients,
    gamma: f64,
    steps_per_year: usize,
    c_table: OnceLock<HermiteTable>,
}

impl Clone for PolicySolution {
    fn clone(&self) -> Self {
        let c_table = OnceLock::new();
        if let Some(t) = self.c_table.get() {
            let _ = c_table.set(t.clone());
        }
        Self { coeffs: self.coeffs.clone(), gamma: self.gamma, steps_per_year: self.steps_per_year, c_table }
    }
}

pub fn solve_dynamic_policy(coeffs: &ConditionalCoefficients, gamma: f64) -> Result<PolicySolution> {
    solve_dynamic_policy_with_steps(coeffs, gamma, DEFAULT_STEPS_PER_YEAR)
}

/// As [`solve_dynamic_policy`], with the RK4 step count per unit time used for `c(t)`.
pub fn solve_dynamic_policy_with_steps(coeffs: &ConditionalCoefficients, gamma: f64, steps_per_year: usize) -> Result<PolicySolution> {
    check_gamma(gamma)?;
    if steps_per_year == 0 {
        return Err(DblError::InvalidInput { module: super::MODULE, detail: "steps_per_year must be positive".into() });
    }
    Ok(PolicySolution { coeffs: coeffs.clone(), gamma, steps_per_year, c_table: OnceLock::new() })
}

impl PolicySolution {
    pub fn coeffs(&self) -> &ConditionalCoefficients {
        &self.coeffs
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn horizon(&self) -> f64 {
        self.coeffs.horizon()
    }

    pub fn eta(&self, t: f64) -> DMatrix<f64> {
        self.coeffs.eta(t)
    }
    pub fn alpha(&self, t: f64) -> DVector<f64> {
        self.coeffs.alpha(t)
    }

    /// `M(t) = (γ−1)(1−t/T)PᵀΩ⁻¹P(γΣ⁻¹ + (1−t/T)PᵀΩ⁻¹P)⁻¹`.
    pub fn m(&self, t: f64) -> DMatrix<f64> {
        hedge_matrix(self.coeffs.market().sigma_inv(), &self.coeffs.view_precision(t), self.gamma)
    }

    /// `A(t) = M(t) η_t`.
    pub fn a(&self, t: f64) -> DMatrix<f64> {
        self.m(t) * self.eta(t)
    }

    /// `A(t) = ½(M η + ηᵀMᵀ)`, the symmetrised form.
    pub fn a_sym(&self, t: f64) -> DMatrix<f64> {
        let a = self.a(t);
        (&a + a.transpose()) * 0.5
    }

    /// `b(t) = M(t) Σ⁻¹ (α_t − r_f 1)`.
    pub fn b(&self, t: f64) -> DVector<f64> {
        let market = self.coeffs.market();
        self.m(t) * (market.sigma_inv() * self.alpha(t).add_scalar(-market.r_f()))
    }

    /// `c(t)`, integrated backward from `c(T) = 0` on first use.
    pub fn c(&self, t: f64) -> f64 {
        self.c_table().eval(t)[0]
    }

    fn c_table(&self) -> &HermiteTable {
        self.c_table.get_or_init(|| {
            let horizon = self.horizon();
            let steps = ((self.steps_per_year as f64 * horizon).ceil() as usize).max(16);
            integrate_backward(0.0, horizon, steps, vec![0.0], |t, _| vec![-self.c_forcing(t)])
        })
    }

    /// Everything in the `c` equation except `c'`.
    fn c_forcing(&self, t: f64) -> f64 {
        let market = self.coeffs.market();
        let (g, r_f, sigma) = (self.gamma, market.r_f(), market.sigma());
        let a = self.a_sym(t);
        let b = self.b(t);
        let alpha = self.alpha(t);
        let ex = alpha.add_scalar(-r_f);
        let log_alpha = &alpha - sigma.diagonal() * 0.5;
        (1.0 - g) * r_f
            + 0.5 * (a * sigma).trace()
            + (1.0 - g) / (2.0 * g) * ex.dot(&(market.sigma_inv() * &ex))
            + log_alpha.dot(&b)
            + (1.0 - g) / g * ex.dot(&b)
            + b.dot(&(sigma * &b)) / (2.0 * g)
    }

    /// `g(t,x) = ½xᵀA(t)x + b(t)ᵀx + c(t)`.
    pub fn g(&self, t: f64, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(self.a_sym(t) * x)) + self.b(t).dot(x) + self.c(t)
    }

    /// `V(t,z,x)`; defined for `γ > 1`.
    pub fn value(&self, t: f64, z: f64, x: &DVector<f64>) -> Result<f64> {
        if self.gamma == 1.0 {
            return Err(DblError::GammaOutOfRange { gamma: self.gamma });
        }
        let u = z.powf(1.0 - self.gamma) / (1.0 - self.gamma);
        Ok(u * self.g(t, x).exp())
    }

    /// `Σ_DBL(t) = S + (Σ − S)/γ`, `S = (Σ⁻¹ + (1−t/T)PᵀΩ⁻¹P)⁻¹`.
    pub fn sigma_dbl(&self, t: f64) -> DMatrix<f64> {
        let market = self.coeffs.market();
        sigma_dbl(market.sigma(), market.sigma_inv(), &self.coeffs.view_precision(t), self.gamma)
    }

    /// Mean-variance holding plus hedging demand `(1/γ)(A(t)x + b(t))`.
    pub fn weights(&self, t: f64, x: &DVector<f64>) -> PolicyWeights {
        let market = self.coeffs.market();
        let ex = self.coeffs.drift(t, x).add_scalar(-market.r_f());
        let mean_variance = market.sigma_inv() * ex / self.gamma;
        let hedging = (self.a_sym(t) * x + self.b(t)) / self.gamma;
        PolicyWeights { mean_variance, hedging }
    }

    /// `(1/γ) M(t) Σ⁻¹ (μ̃(t,x) − r_f 1)`.
    pub fn hedging_from_m(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        let market = self.coeffs.market();
        let ex = self.coeffs.drift(t, x).add_scalar(-market.r_f());
        self.m(t) * (market.sigma_inv() * ex) / self.gamma
    }

    /// `(1/γ) Σ_DBL(t)⁻¹ (μ̃(t,x) − r_f 1)`.
    pub fn weights_sigma_dbl(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        let market = self.coeffs.market();
        let ex = self.coeffs.drift(t, x).add_scalar(-market.r_f());
        let chol = crate::gaussian::cholesky_in(&self.sigma_dbl(t), super::MODULE).expect("Sigma_DBL is positive definite");
        chol.solve_vec(&ex) / self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{min_eigenvalue, psd_sqrt, spd_inverse};
    use crate::market::make_omega_alpha;
    use crate::testutil::{five_asset_market, five_asset_pick};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coeffs(alpha: f64) -> ConditionalCoefficients {
        let m = five_asset_market();
        let p = five_asset_pick();
        let om = make_omega_alpha(&m, &p, alpha).unwrap();
        let y = DVector::from_vec(vec![0.02, -0.05, 0.04]);
        ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &y).unwrap()
    }

    fn riccati_residual(sol: &PolicySolution, t: f64) -> f64 {
        let h = 1e-6;
        let (g, sigma) = (sol.gamma(), sol.coeffs().market().sigma());
        let da = (sol.a_sym(t + h) - sol.a_sym(t - h)) / (2.0 * h);
        let a = sol.a_sym(t);
        let eta = sol.eta(t);
        let r = da + &eta * sigma * &eta * ((1.0 - g) / g) + (&a * sigma * &eta + &eta * sigma * &a) / g + &a * sigma * &a / g;
        r.norm()
    }

    fn b_residual(sol: &PolicySolution, t: f64) -> f64 {
        let h = 1e-6;
        let market = sol.coeffs().market();
        let (g, sigma, r_f) = (sol.gamma(), market.sigma(), market.r_f());
        let db = (sol.b(t + h) - sol.b(t - h)) / (2.0 * h);
        let a = sol.a_sym(t);
        let eta = sol.eta(t);
        let b = sol.b(t);
        let alpha = sol.alpha(t);
        let r = db + (&eta + &a) * sigma * &b / g
            + (&eta + &a) * alpha.add_scalar(-r_f) * ((1.0 - g) / g)
            + &a * (&alpha - sigma.diagonal() * 0.5);
        r.norm()
    }

    #[test]
    fn riccati_and_b_residuals() {
        for alpha in [0.4, 0.8] {
            for gamma in [2.0, 5.0] {
                let sol = solve_dynamic_policy(&coeffs(alpha), gamma).unwrap();
                for i in 0..50 {
                    let t = 0.01 + 0.98 * i as f64 / 49.0;
                    assert!(riccati_residual(&sol, t) < 1e-4, "A residual at t={t}");
                    assert!(b_residual(&sol, t) < 1e-4, "b residual at t={t}");
                }
            }
        }
    }

    #[test]
    fn terminal_conditions() {
        let sol = solve_dynamic_policy(&coeffs(0.4), 5.0).unwrap();
        assert_eq!(sol.m(1.0).amax(), 0.0);
        assert_eq!(sol.a_sym(1.0).amax(), 0.0);
        assert_eq!(sol.b(1.0).amax(), 0.0);
        assert_eq!(sol.c(1.0), 0.0);
        let x = DVector::from_element(5, 0.03);
        assert_eq!(sol.weights(1.0, &x).hedging.amax(), 0.0);
    }

    #[test]
    fn gamma_validation_and_log_limit() {
        assert_eq!(solve_dynamic_policy(&coeffs(0.4), 0.5).unwrap_err(), DblError::GammaOutOfRange { gamma: 0.5 });
        let log = solve_dynamic_policy(&coeffs(0.4), 1.0).unwrap();
        assert_eq!(log.m(0.3).amax(), 0.0);
        let near = solve_dynamic_policy(&coeffs(0.4), 1.0 + 1e-8).unwrap();
        let x = DVector::from_element(5, 0.01);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!(near.m(t).norm() < 1e-6);
            assert!(near.weights(t, &x).hedging.norm() < 1e-6);
        }
    }

    #[test]
    fn a_forms_agree_and_are_negative_definite() {
        let sol = solve_dynamic_policy(&coeffs(0.4), 5.0).unwrap();
        let p = sol.coeffs().pick().clone();
        // Orthonormal basis of the row space of P, where A acts.
        let basis = p.transpose().qr().q();
        for i in 0..=99 {
            let t = 0.99 * i as f64 / 99.0;
            let a = sol.a(t);
            assert!((&a - sol.a_sym(t)).amax() < 1e-10);
            let mut eigs: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            // Three views on five assets: rank three, two null directions.
            assert!(eigs[3].abs() < 1e-12 && eigs[4].abs() < 1e-12, "{eigs:?}");
            let restricted = basis.transpose() * &a * &basis;
            assert!(min_eigenvalue(&-restricted) > 1e-12, "A not negative definite on the view space at t={t}");
        }
    }

    #[test]
    fn a_negative_definite_with_full_rank_views() {
        let m = five_asset_market();
        let p = DMatrix::identity(5, 5);
        let om = make_omega_alpha(&m, &p, 0.4).unwrap();
        let y = DVector::from_vec(vec![0.02, 0.03, 0.01, 0.05, 0.04]);
        let sol = solve_dynamic_policy(&ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &y).unwrap(), 5.0).unwrap();
        for i in 0..=99 {
            let t = 0.99 * i as f64 / 99.0;
            assert!(sol.a_sym(t).symmetric_eigenvalues().max() < -1e-12, "t={t}");
        }
    }

    #[test]
    fn policy_forms_agree() {
        let sol = solve_dynamic_policy(&coeffs(0.4), 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t: f64 = rng.random_range(0.0..1.0);
            let x = sol.coeffs().cond_mean(t) + DVector::from_fn(5, |_, _| rng.random_range(-0.3..0.3));
            let w = sol.weights(t, &x);
            assert!((&w.hedging - sol.hedging_from_m(t, &x)).amax() < 1e-10);
            assert!((w.total() - sol.weights_sigma_dbl(t, &x)).amax() < 1e-10);
        }
    }

    #[test]
    fn sigma_dbl_properties() {
        let sol = solve_dynamic_policy(&coeffs(0.4), 5.0).unwrap();
        let sigma = sol.coeffs().market().sigma().clone();
        for t in [0.0, 0.3, 0.7, 0.999] {
            assert!(min_eigenvalue(&sol.sigma_dbl(t)) > 0.0);
        }
        assert!(min_eigenvalue(&(&sigma - sol.sigma_dbl(0.0))) > -1e-14);
        assert!((sol.sigma_dbl(1.0) - &sigma).amax() < 1e-15);
        let inv = spd_inverse(&sol.sigma_dbl(0.4), "test").unwrap();
        let expect = (DMatrix::identity(5, 5) + sol.m(0.4)) * sol.coeffs().market().sigma_inv();
        assert!((inv - expect).amax() < 1e-9);
    }

    fn sorted_m_eigs(sol: &PolicySolution, t: f64) -> Vec<f64> {
        // M is similar to (γ−1) R Q R with R = (γΣ⁻¹ + Q)^{-1/2}.
        let market = sol.coeffs().market();
        let q = sol.coeffs().view_precision(t);
        let inner = market.sigma_inv() * sol.gamma() + &q;
        let r = psd_sqrt(&spd_inverse(&inner, "test").unwrap());
        let sym = &r * q * &r * (sol.gamma() - 1.0);
        let mut e: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut direct: Vec<f64> = sol.m(t).complex_eigenvalues().iter().map(|c| c.re).collect();
        direct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in e.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10);
        }
        e
    }

    #[test]
    fn m_is_monotone_in_view_precision() {
        let loose = solve_dynamic_policy(&coeffs(0.8), 5.0).unwrap();
        for kappa in [0.9, 0.5, 0.1] {
            let tight = solve_dynamic_policy(&coeffs(0.8 * kappa), 5.0).unwrap();
            for t in [0.0, 0.25, 0.5] {
                let (a, b) = (sorted_m_eigs(&loose, t), sorted_m_eigs(&tight, t));
                for (lo, hi) in a.iter().zip(&b) {
                    assert!(hi >= &(lo - 1e-12), "kappa={kappa} t={t}: {hi} < {lo}");
                }
            }
        }
    }

    #[test]
    fn hedging_grows_with_precision() {
        let t = 0.25;
        let tight = solve_dynamic_policy(&coeffs(0.4), 5.0).unwrap();
        let loose = solve_dynamic_policy(&coeffs(0.8), 5.0).unwrap();
        let x = DVector::zeros(5);
        let h_tight = tight.weights(t, &(tight.coeffs().cond_mean(t) + &x)).hedging.norm();
        let h_loose = loose.weights(t, &(loose.coeffs().cond_mean(t) + &x)).hedging.norm();
        assert!(h_tight >= h_loose, "{h_tight} < {h_loose}");
    }

    #[test]
    fn uninformative_view_gives_merton() {
        let c = coeffs(0.4);
        let om = c.omega() * 1e9;
        let c = ConditionalCoefficients::from_parts(c.market(), c.pick(), &om, 1.0, c.y()).unwrap();
        let sol = solve_dynamic_policy(&c, 5.0).unwrap();
        let merton = c.market().merton_weights(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t: f64 = rng.random_range(0.0..1.0);
            let x = DVector::from_fn(5, |_, _| rng.random_range(-0.5..0.5));
            assert!((sol.weights(t, &x).total() - &merton).norm() < 1e-3);
        }
    }

    #[test]
    fn value_function_solves_hjb() {
        let sol = solve_dynamic_policy_with_steps(&coeffs(0.4), 5.0, 4000).unwrap();
        let market = sol.coeffs().market().clone();
        let (g, sigma, r_f) = (sol.gamma(), market.sigma(), market.r_f());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t: f64 = rng.random_range(0.05..0.95);
            let x = sol.coeffs().cond_mean(t) + DVector::from_fn(5, |_, _| rng.random_range(-0.2..0.2));
            let h = 1e-4;
            let g_t = (sol.g(t + h, &x) - sol.g(t - h, &x)) / (2.0 * h);
            let a = sol.a_sym(t);
            let gx = &a * &x + sol.b(t);
            let mu_t = sol.coeffs().drift(t, &x);
            let ex = mu_t.add_scalar(-r_f);
            let pi = sol.weights(t, &x).total();
            let res = g_t + (1.0 - g) * (r_f + pi.dot(&ex)) - 0.5 * g * (1.0 - g) * pi.dot(&(sigma * &pi))
                + gx.dot(&(&mu_t - sigma.diagonal() * 0.5))
                + 0.5 * ((&a + &gx * gx.transpose()) * sigma).trace()
                + (1.0 - g) * pi.dot(&(sigma * &gx));
            assert!(res.abs() < 1e-6, "HJB residual {res} at t={t}");
        }
        let v = sol.value(0.0, 1.0, &DVector::zeros(5)).unwrap();
        assert!(v < 0.0 && v.is_finite());
    }
}
