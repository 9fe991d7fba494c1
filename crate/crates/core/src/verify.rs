//! Invariant and oracle checks behind `dbl verify` and the acceptance tests.
//!
//! Every check carries its own tolerance and reports a one-line verdict.
//! `quick` covers the closed-form identities; `full` adds the sampling and
//! Monte-Carlo ordering checks.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bridge::{bridge_law, hitting_time_monotonicity_check, sample_bridge_paths, sample_bridge_paths_euler, BridgeSpec};
use crate::conditional::{kalman_smoother_oracle, ConditionalCoefficients};
use crate::error::Result;
use crate::gaussian::{condition, symmetrize};
use crate::market::{make_omega_alpha, MarketModel, RevisionSchedule, ShortTermSchedule};
use crate::mc::{run_comparison, run_revision_study, spearman, ComparisonSpec, Estimate, PolicyKind, RebalancePlan, RevisionStudySpec, ViewStructure};
use crate::policy::{revisions_policy, short_term_policy, solve_dynamic_policy, PolicySolution};
use crate::presets::{five_asset_market, five_asset_pick};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    /// `[PASS] 3 riccati residual (0.12 s): ...`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Five-asset coefficients with `Ω = αPΣPᵀ` and a fixed view.
fn reference_coeffs(alpha: f64) -> Result<ConditionalCoefficients> {
    let m = five_asset_market();
    let p = five_asset_pick();
    let om = make_omega_alpha(&m, &p, alpha)?;
    ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &DVector::from_vec(vec![0.02, -0.05, 0.04]))
}

fn random_spd(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    symmetrize(&((&a * a.transpose() / n as f64 + DMatrix::identity(n, n) * 0.1) * scale))
}

/// Closed-form conditional moments against conditioning the explicit joint law.
pub fn gaussian_oracle() -> CheckResult {
    timed(1, "conditioning oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let n = rng.random_range(2..=8);
            let k = rng.random_range(1..=4usize.min(n));
            let horizon = rng.random_range(0.5..3.0);
            let mu = DVector::from_fn(n, |_, _| rng.random_range(0.0..0.12));
            let market = MarketModel::new(mu, random_spd(n, 0.1, &mut rng), 0.02, horizon)?;
            let pick = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
            let omega = random_spd(k, 0.05, &mut rng);
            let y = DVector::from_fn(k, |_, _| rng.random_range(-0.3..0.3));
            let c = ConditionalCoefficients::from_parts(&market, &pick, &omega, horizon, &y)?;
            let t = rng.random_range(0.0..horizon);
            let post = condition(&c.prior_joint(&[t]), &(n..n + k).collect::<Vec<_>>(), &y)?;
            worst = worst.max((post.mean - c.cond_mean(t)).amax()).max((post.cov - c.cond_cov(t, t)).amax());
        }
        Ok((worst < 1e-10, format!("max error {worst:.2e} over 20 instances (tol 1e-10)")))
    })
}

/// Kalman/RTS smoother on a 64-step grid against the closed-form moments.
pub fn kalman_oracle() -> CheckResult {
    timed(2, "kalman smoother equivalence", || {
        let c = reference_coeffs(0.4)?;
        let mut worst: f64 = 0.0;
        for st in kalman_smoother_oracle(&c, 64)? {
            worst = worst.max((&st.mean - c.cond_mean(st.t)).amax()).max((&st.cov - c.cond_cov(st.t, st.t)).amax());
        }
        Ok((worst < 1e-8, format!("max error {worst:.2e} on 65 grid points (tol 1e-8)")))
    })
}

/// Frobenius residual of the `A` Riccati equation with a central difference.
pub fn riccati_residual(sol: &PolicySolution, t: f64) -> f64 {
    let h = 1e-6;
    let (g, sigma) = (sol.gamma(), sol.coeffs().market().sigma());
    let da = (sol.a_sym(t + h) - sol.a_sym(t - h)) / (2.0 * h);
    let a = sol.a_sym(t);
    let eta = sol.eta(t);
    let r = da + &eta * sigma * &eta * ((1.0 - g) / g) + (&a * sigma * &eta + &eta * sigma * &a) / g + &a * sigma * &a / g;
    r.norm()
}

/// Residual of the linear equation for `b`.
pub fn b_residual(sol: &PolicySolution, t: f64) -> f64 {
    let h = 1e-6;
    let market = sol.coeffs().market();
    let (g, sigma, r_f) = (sol.gamma(), market.sigma(), market.r_f());
    let db = (sol.b(t + h) - sol.b(t - h)) / (2.0 * h);
    let a = sol.a_sym(t);
    let eta = sol.eta(t);
    let alpha = sol.alpha(t);
    let r = db + (&eta + &a) * sigma * sol.b(t) / g + (&eta + &a) * alpha.add_scalar(-r_f) * ((1.0 - g) / g) + &a * (&alpha - sigma.diagonal() * 0.5);
    r.norm()
}

pub fn riccati_check() -> CheckResult {
    timed(3, "riccati residual", || {
        let (mut wa, mut wb): (f64, f64) = (0.0, 0.0);
        for alpha in [0.4, 0.8] {
            for gamma in [2.0, 5.0] {
                let sol = solve_dynamic_policy(&reference_coeffs(alpha)?, gamma)?;
                for i in 0..50 {
                    let t = 0.01 + 0.98 * i as f64 / 49.0;
                    wa = wa.max(riccati_residual(&sol, t));
                    wb = wb.max(b_residual(&sol, t));
                }
            }
        }
        Ok((wa < 1e-4 && wb < 1e-4, format!("max |A residual| {wa:.2e}, max |b residual| {wb:.2e} (tol 1e-4)")))
    })
}

pub fn policy_forms_check() -> CheckResult {
    timed(4, "policy form agreement", || {
        let sol = solve_dynamic_policy(&reference_coeffs(0.4)?, 5.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let t = rng.random_range(0.0..1.0);
            let x = sol.coeffs().cond_mean(t) + DVector::from_fn(5, |_, _| rng.random_range(-0.3..0.3));
            worst = worst.max((sol.weights(t, &x).total() - sol.weights_sigma_dbl(t, &x)).amax());
        }
        Ok((worst < 1e-10, format!("max difference {worst:.2e} at 100 (t, x) (tol 1e-10)")))
    })
}

pub fn hitting_times_check() -> CheckResult {
    timed(5, "hitting times", || {
        let mut notes = Vec::new();
        let mut ok = true;
        // One asset: T̃ = T(1 + ω²/σ²).
        let (t, w2, s2) = (3.0, 0.5, 0.09);
        let one = BridgeSpec {
            a: DVector::zeros(1),
            sigma: DMatrix::from_element(1, 1, s2),
            pick: DMatrix::identity(1, 1),
            omega: DMatrix::from_element(1, 1, w2),
            horizon: t,
            y: DVector::from_element(1, 0.2),
        };
        let law = bridge_law(&one)?;
        let expect = t * (1.0 + w2 / s2);
        let err1 = (law.hitting_times()[0] - expect).abs().max((law.marginal_hitting_times()[0] - expect).abs());
        ok &= err1 <= 1e-12 * expect;
        notes.push(format!("1D error {err1:.1e}"));
        // Two assets, unit variances with correlation ρ, view on asset 2 only.
        let (rho, tt, om) = (0.6, 10.0, 4.0);
        let two = BridgeSpec {
            a: DVector::zeros(2),
            sigma: DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]),
            pick: DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            omega: DMatrix::from_element(1, 1, om / tt),
            horizon: tt,
            y: DVector::from_element(1, 1.0),
        };
        let law = bridge_law(&two)?;
        let h = law.marginal_hitting_times();
        let e2 = (h[1] - 14.0).abs();
        let e1 = (h[0] - (tt + om) / (rho * rho)).abs();
        ok &= e2 <= 1e-12 && e1 <= 1e-10;
        notes.push(format!("T2 = {:.12} (expect 14), T1 error {e1:.1e}", h[1]));
        // Doubling Ω strictly raises every hitting time.
        let mut strict = true;
        for spec in [two.clone(), {
            let m = five_asset_market();
            let p = five_asset_pick();
            BridgeSpec { a: DVector::zeros(5), sigma: m.sigma().clone(), omega: make_omega_alpha(&m, &p, 0.4)?, pick: p, horizon: 1.0, y: DVector::from_vec(vec![0.02, -0.05, 0.04]) }
        }] {
            let base = bridge_law(&spec)?;
            let doubled = bridge_law(&BridgeSpec { omega: &spec.omega * 2.0, ..spec.clone() })?;
            for i in 0..spec.a.len() {
                for (lo, hi) in [(base.hitting_times()[i], doubled.hitting_times()[i]), (base.marginal_hitting_times()[i], doubled.marginal_hitting_times()[i])] {
                    strict &= hi > lo || (lo.is_infinite() && hi.is_infinite());
                }
            }
            strict &= hitting_time_monotonicity_check(&spec, &(&spec.omega * 2.0))?;
        }
        ok &= strict;
        notes.push(format!("strict monotonicity under doubled noise: {strict}"));
        Ok((ok, notes.join("; ")))
    })
}

/// Sample covariance of `a` and `b` with its standard error.
fn sample_cov(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let m = prods.iter().sum::<f64>() / n;
    let var = prods.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / (n - 1.0);
    Estimate { value: m * n / (n - 1.0), se: (var / n).sqrt() }
}

pub fn bridge_sampling_check() -> CheckResult {
    timed(6, "bridge sampling moments", || {
        let m = five_asset_market();
        let p = five_asset_pick();
        let spec = BridgeSpec {
            a: DVector::zeros(5),
            sigma: m.sigma().clone(),
            omega: make_omega_alpha(&m, &p, 0.4)?,
            pick: p,
            horizon: 1.0,
            y: DVector::from_vec(vec![0.02, -0.05, 0.04]),
        };
        let law = bridge_law(&spec)?;
        let (s, t) = (1.0 / 3.0, 2.0 / 3.0);
        let grid = [s, t];
        let n = 100_000;
        let exact = sample_bridge_paths(&law, &grid, n, 6)?;
        let euler = sample_bridge_paths_euler(&law, &grid, n, 66, 1e-3)?;
        let col = |paths: &[DMatrix<f64>], r: usize, i: usize| paths.iter().map(|x| x[(r, i)]).collect::<Vec<f64>>();
        let (mut worst_exact, mut worst_euler): (f64, f64) = (0.0, 0.0);
        for i in 0..5 {
            for (r1, r2, target) in [(0, 0, law.cov(s, s)[(i, i)]), (1, 1, law.cov(t, t)[(i, i)]), (0, 1, law.cov(s, t)[(i, i)])] {
                let ex = sample_cov(&col(&exact, r1, i), &col(&exact, r2, i));
                let eu = sample_cov(&col(&euler, r1, i), &col(&euler, r2, i));
                worst_exact = worst_exact.max((ex.value - target).abs() / ex.se);
                worst_euler = worst_euler.max((eu.value - ex.value).abs() / (eu.se * eu.se + ex.se * ex.se).sqrt());
            }
        }
        Ok((
            worst_exact < 3.0 && worst_euler < 3.0,
            format!("exact vs closed form max {worst_exact:.2} SE, Euler vs exact max {worst_euler:.2} SE (tol 3 SE, 15 moments each)"),
        ))
    })
}

pub fn semigroup_check() -> CheckResult {
    timed(7, "semigroup identity", || {
        let c = reference_coeffs(0.4)?;
        let id = DMatrix::<f64>::identity(5, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut worst, mut worst_swapped): (f64, f64) = (0.0, 0.0);
        for _ in 0..100 {
            let s = rng.random_range(0.0..1.0);
            let u = rng.random_range(s..1.0);
            let (bs, bu) = (c.beta2(s), c.beta2(u));
            worst = worst.max((&bu * (&id - &bs * (u - s)) - &bs).amax());
            worst_swapped = worst_swapped.max((&bs * (&id + &bu * (u - s)) - &bu).amax());
        }
        Ok((
            worst < 1e-9 && worst_swapped < 1e-9,
            format!("β₂(u)(I−(u−s)β₂(s)) = β₂(s) max error {worst:.1e}; β₂(s)(I+(u−s)β₂(u)) = β₂(u) max error {worst_swapped:.1e} (tol 1e-9)"),
        ))
    })
}

pub fn structural_equality_check() -> CheckResult {
    timed(8, "extension policies reduce to base solves", || {
        let m = five_asset_market();
        let p = five_asset_pick();
        let gamma = 5.0;
        let y = DVector::from_vec(vec![0.01, 0.03, -0.02]);
        // Revisions: on [t₀, t₁) the policy equals the unrevised one with Ω⁰.
        let sched = RevisionSchedule::proportional(&m, p.clone(), vec![0.0, 0.25, 0.5, 0.75], 0.6)?;
        let pol = revisions_policy(&sched, &m, gamma)?;
        let base = solve_dynamic_policy(&ConditionalCoefficients::from_parts(&m, &p, &(&sched.omegas()[0] / m.horizon()), m.horizon(), &y)?, gamma)?;
        let mut rev: f64 = 0.0;
        for i in 0..25 {
            let t = 0.01 * i as f64;
            let x = DVector::from_fn(5, |r, _| 0.02 * (r as f64 - 2.0) * (1.0 + t));
            let a = pol.weights(0, t, &x, &y)?;
            let b = base.weights(t, &x);
            rev = rev.max((&a.mean_variance - &b.mean_variance).amax()).max((&a.hedging - &b.hedging).amax());
        }
        // Short-term: each interval equals a base solve over that interval.
        let om = make_omega_alpha(&m, &p, 0.4)? * 0.25;
        let st = ShortTermSchedule::new(vec![0.0, 0.25, 0.5, 0.75, 1.0], p.clone(), vec![DMatrix::identity(3, 3) * 0.5], vec![om.clone(); 4])?;
        let sp = short_term_policy(&st, &m, gamma)?;
        let mut short: f64 = 0.0;
        for j in 0..4 {
            let ip = sp.interval(j);
            let sol = solve_dynamic_policy(&ip.base_coefficients(&y)?, gamma)?;
            for i in 0..10 {
                let t = ip.start() + 0.024 * i as f64;
                let x = DVector::from_fn(5, |r, _| 0.01 * r as f64 * (t - ip.start()));
                let a = sp.weights(j, t, &x, &y)?;
                let b = sol.weights(t - ip.start(), &x);
                short = short.max((&a.mean_variance - &b.mean_variance).amax()).max((&a.hedging - &b.hedging).amax());
            }
        }
        Ok((rev < 1e-12 && short < 1e-12, format!("revisions max diff {rev:.1e}, short-term max diff {short:.1e} (tol 1e-12)")))
    })
}

pub fn limits_check() -> CheckResult {
    timed(11, "uninformative-view and log-utility limits", || {
        let c = reference_coeffs(0.4)?;
        let loose = ConditionalCoefficients::from_parts(c.market(), c.pick(), &(c.omega() * 1e9), 1.0, c.y())?;
        let sol = solve_dynamic_policy(&loose, 5.0)?;
        let merton = c.market().merton_weights(5.0);
        let near_log = solve_dynamic_policy(&c, 1.0 + 1e-8)?;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut dm, mut dh): (f64, f64) = (0.0, 0.0);
        for _ in 0..20 {
            let t = rng.random_range(0.0..1.0);
            let x = DVector::from_fn(5, |_, _| rng.random_range(-0.5..0.5));
            dm = dm.max((sol.weights(t, &x).total() - &merton).norm());
            dh = dh.max(near_log.weights(t, &x).hedging.norm());
        }
        Ok((dm < 1e-3 && dh < 1e-6, format!("max ‖π − Merton‖ {dm:.1e} (tol 1e-3), max ‖hedging‖ at γ=1+1e-8 {dh:.1e} (tol 1e-6)")))
    })
}

fn fmt_cer(e: Option<Estimate>) -> String {
    e.map(|c| format!("{:.4}±{:.4}", c.value, c.se)).unwrap_or_else(|| "undefined".into())
}

/// DBL against RCBL on common random numbers.
pub fn comparison_check(n_paths: usize, seed: u64) -> CheckResult {
    timed(9, "DBL vs RCBL orderings", || {
        let m = five_asset_market();
        let s = ViewStructure::single(&m, five_asset_pick());
        let plans = vec![RebalancePlan::daily(), RebalancePlan::weekly(), RebalancePlan::monthly()];
        let spec = ComparisonSpec::new(m, s, vec![0.4, 0.8], vec![2.0, 5.0], plans, n_paths, seed);
        let r = run_comparison(&spec)?;
        let mut ok = true;
        let mut notes = Vec::new();
        for alpha in [0.4, 0.8] {
            for gamma in [2.0, 5.0] {
                let d = &r.row(PolicyKind::Dbl, alpha, gamma, "weekly").expect("configured").summary;
                let c = &r.row(PolicyKind::Rcbl, alpha, gamma, "weekly").expect("configured").summary;
                let pass = match (d.cer, c.cer) {
                    (Some(a), Some(b)) => a.separated_above(&b, 2.0),
                    _ => false,
                };
                ok &= pass;
                notes.push(format!(
                    "CER α={alpha} γ={gamma}: DBL {} ({} bankrupt) vs RCBL {} ({} bankrupt) {}",
                    fmt_cer(d.cer),
                    d.bankrupt,
                    fmt_cer(c.cer),
                    c.bankrupt,
                    if pass { "ok" } else { "FAIL" }
                ));
            }
        }
        let d = &r.row(PolicyKind::Dbl, 0.4, 5.0, "weekly").expect("configured").summary.turnover;
        let c = &r.row(PolicyKind::Rcbl, 0.4, 5.0, "weekly").expect("configured").summary.turnover;
        let pass = c.separated_above(d, 3.0);
        ok &= pass;
        notes.push(format!("turnover α=0.4 γ=5: DBL {:.3}±{:.3} vs RCBL {:.3}±{:.3} {}", d.value, d.se, c.value, c.se, if pass { "ok" } else { "FAIL" }));
        let spread = |policy| -> Option<f64> {
            let cers: Option<Vec<f64>> = ["daily", "weekly", "monthly"]
                .iter()
                .map(|p| r.row(policy, 0.4, 5.0, p).expect("configured").summary.cer.map(|c| c.value))
                .collect();
            cers.map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min))
        };
        let (sd, sc) = (spread(PolicyKind::Dbl), spread(PolicyKind::Rcbl));
        let pass = matches!((sd, sc), (Some(a), Some(b)) if a < b);
        ok &= pass;
        let show = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "undefined".into());
        notes.push(format!("CER spread daily/weekly/monthly α=0.4 γ=5: DBL {} vs RCBL {} {}", show(sd), show(sc), if pass { "ok" } else { "FAIL" }));
        Ok((ok, format!("{n_paths} paths, seed {seed}; {}", notes.join("; "))))
    })
}

/// Value of anticipated view revisions for a dynamic investor.
pub fn revisions_check(n_paths: usize, seed: u64) -> CheckResult {
    timed(10, "revision-value ordering", || {
        let m = five_asset_market();
        let alphas = vec![0.4, 0.6, 0.8, 1.2, 1.6, 2.0];
        let spec = RevisionStudySpec {
            schedules: RevisionStudySpec::standard_schedules(m.horizon()),
            market: m,
            pick: five_asset_pick(),
            alphas: alphas.clone(),
            gammas: vec![5.0],
            plan: RebalancePlan::daily(),
            n_paths,
            seed,
            z0: 1.0,
        };
        let r = run_revision_study(&spec)?;
        let cer = |name: &str, a: f64| r.schedule_row(name, a, 5.0).expect("configured").summary.cer;
        let mut ok = true;
        let mut notes = Vec::new();
        let (q, h, n) = (cer("quarterly", 0.6), cer("half", 0.6), cer("none", 0.6));
        let pass = match (q, h, n) {
            (Some(q), Some(h), Some(n)) => q.separated_above(&h, 2.0) && h.separated_above(&n, 2.0),
            _ => false,
        };
        ok &= pass;
        notes.push(format!("α=0.6: quarterly {} ≥ half {} ≥ none {} {}", fmt_cer(q), fmt_cer(h), fmt_cer(n), if pass { "ok" } else { "FAIL" }));
        let trend: Vec<f64> = vec![0.4, 0.8, 1.2, 1.6, 2.0];
        for name in ["quarterly", "half"] {
            let gaps: Option<Vec<f64>> = trend.iter().map(|&a| Some(cer(name, a)?.value - cer("none", a)?.value)).collect();
            let pass = match &gaps {
                Some(g) => spearman(&trend, g) <= -0.9,
                None => false,
            };
            ok &= pass;
            let shown = gaps
                .map(|g| format!("{:?} ρ = {:.2}", g.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(), spearman(&trend, &g)))
                .unwrap_or_else(|| "undefined (bankrupt paths)".into());
            notes.push(format!("{name}−none gaps over α: {shown} {}", if pass { "ok" } else { "FAIL" }));
        }
        Ok((ok, format!("{n_paths} paths, seed {seed}, daily plan; {}", notes.join("; "))))
    })
}

/// Default Monte-Carlo size and seed of the full checks.
pub const DEFAULT_PATHS: usize = 20_000;
pub const DEFAULT_SEED: u64 = 2024;

/// Runs the checks of `level`, in criterion order.
pub fn run_checks(level: Level, n_paths: usize) -> Vec<CheckResult> {
    let mut out = vec![gaussian_oracle(), kalman_oracle(), riccati_check(), policy_forms_check(), hitting_times_check()];
    if level == Level::Full {
        out.push(bridge_sampling_check());
    }
    out.push(semigroup_check());
    out.push(structural_equality_check());
    if level == Level::Full {
        out.push(comparison_check(n_paths, DEFAULT_SEED));
        out.push(revisions_check(n_paths, DEFAULT_SEED));
    }
    out.push(limits_check());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_checks_pass() {
        for c in run_checks(Level::Quick, 0) {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn sample_cov_of_identical_columns_is_variance() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let e = sample_cov(&a, &a);
        let mean = 3.5;
        let var = a.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0;
        assert!((e.value - var).abs() < 1e-12);
    }
}
