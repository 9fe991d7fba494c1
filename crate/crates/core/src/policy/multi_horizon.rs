//! Policy for views with different horizons given at time 0. Between
//! consecutive horizons the open views are collapsed into one view of the
//! next horizon; `A` and `b` are integrated backward and stitched by continuity.

use nalgebra::{DMatrix, DVector};

use super::{check_gamma, AffineWeights, PolicyWeights, MODULE};
use crate::conditional::ConditionalCoefficients;
use crate::error::{DblError, Result};
use crate::market::{collapse_multi_horizon, CollapsedViews, MarketModel, MultiHorizonViews};
use crate::ode::{integrate_backward, HermiteTable, DEFAULT_STEPS_PER_YEAR};

#[derive(Debug, Clone)]
struct Interval {
    start: f64,
    end: f64,
    collapsed: CollapsedViews,
    /// Coefficients with the collapsed view evaluated at `y = 0`.
    coeffs0: ConditionalCoefficients,
    /// Rows of the full view vector feeding this interval.
    select: DMatrix<f64>,
    /// State `[vec A | b₀ | B]` with `b(t) = b₀(t) + B(t) y`.
    table: HermiteTable,
}

/// Stitched solution on `[0, T_K]`, with `b` affine in the full view vector.
#[derive(Debug, Clone)]
pub struct MultiHorizonPolicy {
    views: MultiHorizonViews,
    market: MarketModel,
    gamma: f64,
    intervals: Vec<Interval>,
}

struct Frozen {
    eta: DMatrix<f64>,
    alpha0: DVector<f64>,
    /// `∂α/∂y` for the full view vector.
    alpha_y: DMatrix<f64>,
}

fn freeze(iv_coeffs: &ConditionalCoefficients, select: &DMatrix<f64>, t: f64) -> Frozen {
    let n = iv_coeffs.n_assets();
    let beta2 = iv_coeffs.beta2(t);
    let lift = DMatrix::identity(n, n) + &beta2 * t;
    Frozen { eta: iv_coeffs.eta(t), alpha0: iv_coeffs.alpha(t), alpha_y: lift * iv_coeffs.beta1() * select }
}

pub fn solve_multi_horizon_policy(views: &MultiHorizonViews, market: &MarketModel, gamma: f64) -> Result<MultiHorizonPolicy> {
    solve_multi_horizon_policy_with_steps(views, market, gamma, DEFAULT_STEPS_PER_YEAR)
}

pub fn solve_multi_horizon_policy_with_steps(
    views: &MultiHorizonViews,
    market: &MarketModel,
    gamma: f64,
    steps_per_year: usize,
) -> Result<MultiHorizonPolicy> {
    check_gamma(gamma)?;
    if steps_per_year == 0 {
        return Err(DblError::InvalidInput { module: MODULE, detail: "steps_per_year must be positive".into() });
    }
    let n = market.n_assets();
    let k = views.k();
    let width = n * n + n * (k + 1);
    let sigma = market.sigma().clone();
    let half_diag = sigma.diagonal() * 0.5;
    let r_f = market.r_f();
    let g = gamma;

    let mut intervals: Vec<Interval> = Vec::with_capacity(k);
    let mut terminal = vec![0.0; width];
    for j in (0..k).rev() {
        let collapsed = collapse_multi_horizon(views, market, j)?;
        let zero = DVector::zeros(k);
        let coeffs0 = ConditionalCoefficients::from_parts(market, &collapsed.pick, &collapsed.omega_bar, collapsed.horizon, &collapsed.adjust(&zero))?;
        let rows = collapsed.pick.nrows();
        let select = DMatrix::from_fn(rows, k, |r, c| if c == j + r { 1.0 } else { 0.0 });
        let (start, end) = (views.interval_start(j), views.horizons()[j]);
        let steps = ((steps_per_year as f64 * (end - start)).ceil() as usize).max(16);
        let rhs = |t: f64, state: &[f64]| -> Vec<f64> {
            let f = freeze(&coeffs0, &select, t);
            let a = DMatrix::from_column_slice(n, n, &state[..n * n]);
            let b = DMatrix::from_column_slice(n, k + 1, &state[n * n..]);
            let eta_a = &f.eta + &a;
            let da = -(&f.eta * &sigma * &f.eta * ((1.0 - g) / g) + (&a * &sigma * &f.eta + &f.eta * &sigma * &a) / g + &a * &sigma * &a / g);
            let mut forcing = DMatrix::zeros(n, k + 1);
            forcing.column_mut(0).copy_from(&(&eta_a * f.alpha0.add_scalar(-r_f) * ((1.0 - g) / g) + &a * (&f.alpha0 - &half_diag)));
            forcing.columns_mut(1, k).copy_from(&(&eta_a * &f.alpha_y * ((1.0 - g) / g) + &a * &f.alpha_y));
            let db = -(&eta_a * &sigma * &b / g + forcing);
            let mut out = Vec::with_capacity(width);
            out.extend_from_slice(da.as_slice());
            out.extend_from_slice(db.as_slice());
            out
        };
        let table = integrate_backward(start, end, steps, terminal.clone(), rhs);
        terminal = table.value_at_start().to_vec();
        intervals.push(Interval { start, end, collapsed, coeffs0, select, table });
    }
    intervals.reverse();
    Ok(MultiHorizonPolicy { views: views.clone(), market: market.clone(), gamma, intervals })
}

impl MultiHorizonPolicy {
    pub fn views(&self) -> &MultiHorizonViews {
        &self.views
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn horizon(&self) -> f64 {
        self.views.horizons()[self.views.k() - 1]
    }
    pub fn n_intervals(&self) -> usize {
        self.intervals.len()
    }
    pub fn collapsed(&self, j: usize) -> &CollapsedViews {
        &self.intervals[j].collapsed
    }

    /// Interval holding `t`; the final horizon belongs to the last interval.
    pub fn interval_at(&self, t: f64) -> usize {
        let last = self.intervals.len() - 1;
        self.intervals.iter().position(|iv| t >= iv.start && t < iv.end).unwrap_or(last)
    }

    fn check(&self, j: usize, t: f64) -> Result<&Interval> {
        let iv = self.intervals.get(j).ok_or_else(|| DblError::InvalidInput {
            module: MODULE,
            detail: format!("interval {j} out of range"),
        })?;
        let closes = j + 1 == self.intervals.len() && t == iv.end;
        if (t >= iv.start && t < iv.end) || closes {
            Ok(iv)
        } else {
            Err(DblError::IntervalMismatch { t, start: iv.start, end: iv.end })
        }
    }

    /// `A^j(t)`.
    pub fn a(&self, j: usize, t: f64) -> DMatrix<f64> {
        let n = self.market.n_assets();
        let s = self.intervals[j].table.eval(t);
        let a = DMatrix::from_column_slice(n, n, &s[..n * n]);
        (&a + a.transpose()) * 0.5
    }

    /// `(b₀^j(t), B^j(t))` with `b^j(t) = b₀ + B y`.
    pub fn b_parts(&self, j: usize, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.market.n_assets();
        let k = self.views.k();
        let s = self.intervals[j].table.eval(t);
        let b = DMatrix::from_column_slice(n, k + 1, &s[n * n..]);
        (b.column(0).into_owned(), b.columns(1, k).into_owned())
    }

    pub fn b(&self, j: usize, t: f64, y: &DVector<f64>) -> DVector<f64> {
        let (b0, by) = self.b_parts(j, t);
        b0 + by * y
    }

    /// `η^j_t` of the collapsed view.
    pub fn eta(&self, j: usize, t: f64) -> DMatrix<f64> {
        self.intervals[j].coeffs0.eta(t)
    }

    /// `α^j_t` for the full view vector `y`.
    pub fn alpha(&self, j: usize, t: f64, y: &DVector<f64>) -> DVector<f64> {
        let f = freeze(&self.intervals[j].coeffs0, &self.intervals[j].select, t);
        f.alpha0 + f.alpha_y * y
    }

    /// Coefficients of the collapsed view on interval `j` for the full view vector.
    pub fn coefficients(&self, j: usize, y: &DVector<f64>) -> Result<ConditionalCoefficients> {
        let iv = &self.intervals[j];
        iv.coeffs0.with_view(&iv.collapsed.adjust(y))
    }

    /// Weights at `t ∈ [T_{j−1}, T_j)` given the log-return `x = X(t)` and all views.
    pub fn weights(&self, j: usize, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> Result<PolicyWeights> {
        self.check(j, t)?;
        if y.len() != self.views.k() || x.len() != self.market.n_assets() {
            return Err(DblError::ShapeMismatch { module: MODULE, detail: "state or view length".into() });
        }
        let coeffs = self.coefficients(j, y)?;
        let ex = coeffs.drift(t, x).add_scalar(-self.market.r_f());
        let mean_variance = self.market.sigma_inv() * ex / self.gamma;
        let hedging = (self.a(j, t) * x + self.b(j, t, y)) / self.gamma;
        Ok(PolicyWeights { mean_variance, hedging })
    }

    /// Dynamic weights at `t` as an affine map of `(x, y)`.
    pub fn affine_dbl(&self, j: usize, t: f64) -> AffineWeights {
        let iv = &self.intervals[j];
        let f = freeze(&iv.coeffs0, &iv.select, t);
        let (b0, by) = self.b_parts(j, t);
        let si = self.market.sigma_inv();
        let g = self.gamma;
        AffineWeights {
            constant: (si * f.alpha0.add_scalar(-self.market.r_f()) + b0) / g,
            state: (f.eta + self.a(j, t)) / g,
            view: (si * &f.alpha_y + by) / g,
        }
    }

    /// Aged-view single-period weights on the collapsed view at `t`.
    pub fn affine_aged(&self, j: usize, t: f64) -> AffineWeights {
        let iv = &self.intervals[j];
        let f = freeze(&iv.coeffs0, &iv.select, t);
        let scale = (self.market.sigma_inv() + iv.coeffs0.view_precision(t)) / self.gamma;
        let sigma = self.market.sigma();
        let base = f.alpha0 - sigma.diagonal() * 0.5;
        AffineWeights {
            constant: &scale * base.add_scalar(-self.market.r_f()),
            state: &scale * sigma * f.eta,
            view: scale * f.alpha_y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::min_eigenvalue;
    use crate::policy::{aged_view_portfolio, solve_dynamic_policy};
    use crate::testutil::{five_asset_market, five_asset_pick};

    fn three_horizons() -> (MarketModel, MultiHorizonViews) {
        let m = five_asset_market();
        let p = five_asset_pick();
        let psp = &p * m.sigma() * p.transpose();
        let omega = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.5 * psp[(i, i)] } else { 0.0 });
        (m, MultiHorizonViews::new(vec![0.25, 0.5, 1.0], p, omega).unwrap())
    }

    fn residual(pol: &MultiHorizonPolicy, j: usize, t: f64) -> f64 {
        let h = 1e-6;
        let g = pol.gamma();
        let sigma = pol.market.sigma();
        let da = (pol.a(j, t + h) - pol.a(j, t - h)) / (2.0 * h);
        let a = pol.a(j, t);
        let eta = pol.eta(j, t);
        (da + &eta * sigma * &eta * ((1.0 - g) / g) + (&a * sigma * &eta + &eta * sigma * &a) / g + &a * sigma * &a / g).norm()
    }

    #[test]
    fn single_horizon_is_the_base_policy() {
        let m = five_asset_market();
        let p = five_asset_pick();
        let om = crate::market::make_omega_alpha(&m, &p, 0.4).unwrap();
        let views = MultiHorizonViews::new(vec![1.0; 3], p.clone(), om.clone()).unwrap();
        let pol = solve_multi_horizon_policy(&views, &m, 5.0).unwrap();
        let y = DVector::from_vec(vec![0.02, -0.05, 0.04]);
        let base = solve_dynamic_policy(&ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &y).unwrap(), 5.0).unwrap();
        // Equal horizons leave only the first interval with positive length.
        let j = 0;
        for i in 0..20 {
            let t = i as f64 / 20.0;
            let x = base.coeffs().cond_mean(t).add_scalar(0.02);
            assert_eq!(pol.interval_at(t), j);
            let (w, wb) = (pol.weights(j, t, &x, &y).unwrap(), base.weights(t, &x));
            assert!((&w.hedging - &wb.hedging).amax() < 1e-8, "t={t}");
            assert!((&w.mean_variance - &wb.mean_variance).amax() < 1e-12);
        }
    }

    #[test]
    fn last_interval_matches_remaining_single_view() {
        let (m, views) = three_horizons();
        let pol = solve_multi_horizon_policy(&views, &m, 5.0).unwrap();
        let y = DVector::from_vec(vec![0.01, -0.02, 0.03]);
        let p_last = views.picks().rows(2, 1).into_owned();
        let om_last = DMatrix::from_element(1, 1, views.omega()[(2, 2)]);
        let y_last = DVector::from_element(1, y[2]);
        let base = solve_dynamic_policy(&ConditionalCoefficients::from_parts(&m, &p_last, &om_last, 1.0, &y_last).unwrap(), 5.0).unwrap();
        for i in 0..10 {
            let t = 0.5 + 0.05 * i as f64;
            let x = DVector::from_fn(5, |r, _| 0.01 * r as f64);
            assert!((pol.a(2, t) - base.a_sym(t)).amax() < 1e-9);
            assert!((pol.b(2, t, &y) - base.b(t)).amax() < 1e-9);
            let (w, wb) = (pol.weights(2, t, &x, &y).unwrap(), base.weights(t, &x));
            assert!((w.total() - wb.total()).amax() < 1e-9);
        }
    }

    #[test]
    fn riccati_residual_on_every_interval() {
        let (m, views) = three_horizons();
        for gamma in [2.0, 5.0] {
            // |A'| reaches several hundred near the first horizon; the absolute
            // residual is controlled by the grid, here 8000 steps per year.
            let pol = solve_multi_horizon_policy_with_steps(&views, &m, gamma, 8000).unwrap();
            for j in 0..3 {
                let (s, e) = (views.interval_start(j), views.horizons()[j]);
                for i in 0..25 {
                    let t = s + (e - s) * (i as f64 + 0.37) / 25.0;
                    assert!(residual(&pol, j, t) < 1e-6, "j={j} t={t}: {}", residual(&pol, j, t));
                    assert!(min_eigenvalue(&-pol.a(j, t)) > -1e-12);
                }
            }
        }
    }

    #[test]
    fn stitched_at_boundaries() {
        let (m, views) = three_horizons();
        let pol = solve_multi_horizon_policy(&views, &m, 5.0).unwrap();
        let y = DVector::from_vec(vec![0.01, -0.02, 0.03]);
        for j in 0..2 {
            let t = views.horizons()[j];
            assert!((pol.a(j, t) - pol.a(j + 1, t)).amax() < 1e-14);
            assert!((pol.b(j, t, &y) - pol.b(j + 1, t, &y)).amax() < 1e-14);
        }
        assert!(pol.a(2, 1.0).amax() == 0.0);
    }

    #[test]
    fn affine_forms_match_direct_evaluation() {
        let (m, views) = three_horizons();
        let pol = solve_multi_horizon_policy(&views, &m, 3.0).unwrap();
        let y = DVector::from_vec(vec![0.04, -0.01, 0.02]);
        for t in [0.0, 0.1, 0.3, 0.6, 0.95] {
            let j = pol.interval_at(t);
            let x = DVector::from_fn(5, |r, _| 0.01 * (r as f64 - 1.0));
            let w = pol.weights(j, t, &x, &y).unwrap();
            assert!((w.total() - pol.affine_dbl(j, t).apply(&x, &y)).amax() < 1e-12);
            let coeffs = pol.coefficients(j, &y).unwrap();
            let aged = aged_view_portfolio(&coeffs, 3.0, t, &x).unwrap();
            assert!((aged - pol.affine_aged(j, t).apply(&x, &y)).amax() < 1e-12);
        }
        assert!(matches!(pol.weights(0, 0.3, &DVector::zeros(5), &y), Err(DblError::IntervalMismatch { .. })));
    }
}
