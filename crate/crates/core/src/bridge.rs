//! Correlated Brownian motion conditioned on a noisy linear observation of its
//! terminal value: moments, hitting times and path sampling.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::conditional::validate_grid;
use crate::error::{DblError, Result};
use crate::gaussian::{cholesky_in, ensure_symmetric, is_psd, psd_sqrt, symmetrize, CholeskyFactor, GaussianConditioner, GaussianVector};
use crate::rng::path_rng;

const MODULE: &str = "bridge";

/// `B(t) = a + L W(t)` observed through `y = P B(T) + √T ε`, `ε ~ N(0, Ω)`.
#[derive(Debug, Clone)]
pub struct BridgeSpec {
    pub a: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub pick: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub horizon: f64,
    pub y: DVector<f64>,
}

/// Gaussian law of the conditioned process on `[0, T]`.
#[derive(Debug, Clone)]
pub struct BridgeLaw {
    spec: BridgeSpec,
    chol: CholeskyFactor,
    psp: DMatrix<f64>,
    pl: DMatrix<f64>,
    beta1: DMatrix<f64>,
    h: DMatrix<f64>,
    hitting_times: Vec<f64>,
    marginal_hitting_times: Vec<f64>,
}

/// Builds the law, its drift matrices and hitting times.
pub fn bridge_law(spec: &BridgeSpec) -> Result<BridgeLaw> {
    let n = spec.a.len();
    let k = spec.pick.nrows();
    if spec.sigma.nrows() != n || spec.pick.ncols() != n || spec.omega.nrows() != k || spec.y.len() != k {
        return Err(DblError::ShapeMismatch {
            module: MODULE,
            detail: format!("a {n}, sigma {}x{}, pick {}x{}, omega {}x{}, y {}", spec.sigma.nrows(), spec.sigma.ncols(), k, spec.pick.ncols(), spec.omega.nrows(), spec.omega.ncols(), spec.y.len()),
        });
    }
    if !(spec.horizon > 0.0) {
        return Err(DblError::InvalidInput { module: MODULE, detail: "horizon must be positive".into() });
    }
    ensure_symmetric(&spec.omega, MODULE, "omega")?;
    cholesky_in(&spec.omega, MODULE)?;
    let chol = cholesky_in(&spec.sigma, MODULE)?;
    let t = spec.horizon;
    let psp = symmetrize(&(&spec.pick * &spec.sigma * spec.pick.transpose()));
    let gram = symmetrize(&(&psp + &spec.omega));
    let gram_chol = cholesky_in(&gram, MODULE).map_err(|_| DblError::SingularViewGram { module: MODULE })?;
    let sigma_pt = &spec.sigma * spec.pick.transpose();
    let beta1 = gram_chol.solve(&sigma_pt.transpose()).transpose() / t;
    let pl = &spec.pick * chol.lower();
    let h = symmetrize(&(pl.transpose() * gram_chol.solve(&pl) / t));

    let pl_scale = 1e-12 * spec.pick.norm() * chol.lower().norm();
    let hitting_times = (0..n)
        .map(|i| if pl.column(i).norm() < pl_scale { f64::INFINITY } else { 1.0 / h[(i, i)] })
        .collect();
    let ps_scale = 1e-12 * spec.pick.norm() * spec.sigma.norm();
    let explained = &sigma_pt * gram_chol.solve(&sigma_pt.transpose());
    let marginal_hitting_times = (0..n)
        .map(|i| {
            if sigma_pt.row(i).norm() < ps_scale {
                f64::INFINITY
            } else {
                t * spec.sigma[(i, i)] / explained[(i, i)]
            }
        })
        .collect();
    Ok(BridgeLaw { spec: spec.clone(), chol, psp, pl, beta1, h, hitting_times, marginal_hitting_times })
}

impl BridgeLaw {
    pub fn spec(&self) -> &BridgeSpec {
        &self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.a.len()
    }
    /// Cholesky factor `L` of Σ.
    pub fn lower(&self) -> &DMatrix<f64> {
        self.chol.lower()
    }
    /// `β₁ = (1/T) Σ Pᵀ (PΣPᵀ + Ω)⁻¹`.
    pub fn beta1(&self) -> &DMatrix<f64> {
        &self.beta1
    }
    /// `H = (1/T)(PL)ᵀ(PΣPᵀ + Ω)⁻¹ PL`.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// `T̃_i = 1/H_ii` for the standardized components `B̄ = L⁻¹(B − E B)`,
    /// `+∞` where the view carries no information on component `i`. These
    /// depend on the asset ordering through `L`.
    pub fn hitting_times(&self) -> &[f64] {
        &self.hitting_times
    }

    /// Hitting times of the components of `B` itself:
    /// `Var B_i(t) = Σ_ii (t − t²/T̃_i)`.
    pub fn marginal_hitting_times(&self) -> &[f64] {
        &self.marginal_hitting_times
    }

    /// `E[B(t)] = a + t β₁ (y − P a)`.
    pub fn mean(&self, t: f64) -> DVector<f64> {
        &self.spec.a + &self.beta1 * (&self.spec.y - &self.spec.pick * &self.spec.a) * t
    }

    /// `Cov(B̄(s), B̄(t)) = min(s,t) I − st H`.
    pub fn cov_bar(&self, s: f64, t: f64) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::identity(n, n) * s.min(t) - &self.h * (s * t)
    }

    /// `Cov(B(s), B(t)) = L (min(s,t) I − st H) Lᵀ`.
    pub fn cov(&self, s: f64, t: f64) -> DMatrix<f64> {
        symmetrize(&(self.lower() * self.cov_bar(s, t) * self.lower().transpose()))
    }

    /// `β̄₂(t) = (1/T)(PL)ᵀ((1 − t/T)PΣPᵀ + Ω)⁻¹ PL`, the mean-reversion
    /// matrix of `B̄`.
    pub fn beta_bar2(&self, t: f64) -> DMatrix<f64> {
        let tt = self.spec.horizon;
        let m = symmetrize(&(&self.psp * (1.0 - t / tt) + &self.spec.omega));
        let inv = cholesky_in(&m, MODULE).expect("residual Gram stays positive definite").inverse();
        self.pl.transpose() * inv * &self.pl / tt
    }

    /// `β₂(t) = Σ Pᵀ((T − t)PΣPᵀ + TΩ)⁻¹ P`.
    pub fn beta2(&self, t: f64) -> DMatrix<f64> {
        let tt = self.spec.horizon;
        let m = symmetrize(&(&self.psp * (tt - t) + &self.spec.omega * tt));
        let inv = cholesky_in(&m, MODULE).expect("residual Gram stays positive definite").inverse();
        &self.spec.sigma * self.spec.pick.transpose() * inv * &self.spec.pick
    }
}

/// True iff every hitting time under `omega_larger` is at least the one under
/// the spec's Ω. Errors when `omega_larger − Ω` is indefinite.
pub fn hitting_time_monotonicity_check(spec: &BridgeSpec, omega_larger: &DMatrix<f64>) -> Result<bool> {
    if omega_larger.shape() != spec.omega.shape() {
        return Err(DblError::ShapeMismatch { module: MODULE, detail: "omega shapes differ".into() });
    }
    if !is_psd(&(omega_larger - &spec.omega)) {
        return Err(DblError::NotComparable);
    }
    let base = bridge_law(spec)?;
    let larger = bridge_law(&BridgeSpec { omega: omega_larger.clone(), ..spec.clone() })?;
    Ok(base.hitting_times().iter().zip(larger.hitting_times()).all(|(a, b)| b >= a))
}

struct Step {
    conditioner: Option<GaussianConditioner>,
    mean0: DVector<f64>,
    noise: DMatrix<f64>,
}

/// Exact sampler on a fixed grid: each point is drawn from its law given the
/// previous one.
pub struct BridgeSampler {
    grid: Vec<f64>,
    steps: Vec<Step>,
}

fn noise_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    match cholesky_in(cov, MODULE) {
        Ok(c) => c.lower().clone(),
        Err(_) => psd_sqrt(cov),
    }
}

impl BridgeSampler {
    pub fn new(law: &BridgeLaw, grid: &[f64]) -> Result<Self> {
        validate_grid(grid, law.spec.horizon, MODULE)?;
        let n = law.dim();
        let mut steps = Vec::with_capacity(grid.len());
        let mut prev = 0.0;
        for &t in grid {
            if prev == 0.0 {
                let cov = law.cov(t, t);
                steps.push(Step { conditioner: None, mean0: law.mean(t), noise: noise_factor(&cov) });
            } else {
                let mut mean = DVector::zeros(2 * n);
                mean.rows_mut(0, n).copy_from(&law.mean(t));
                mean.rows_mut(n, n).copy_from(&law.mean(prev));
                let mut cov = DMatrix::zeros(2 * n, 2 * n);
                cov.view_mut((0, 0), (n, n)).copy_from(&law.cov(t, t));
                cov.view_mut((0, n), (n, n)).copy_from(&law.cov(t, prev));
                cov.view_mut((n, 0), (n, n)).copy_from(&law.cov(prev, t));
                cov.view_mut((n, n), (n, n)).copy_from(&law.cov(prev, prev));
                let joint = GaussianVector { mean, cov: symmetrize(&cov) };
                let conditioner = GaussianConditioner::new(&joint, &(n..2 * n).collect::<Vec<_>>())?;
                let noise = noise_factor(conditioner.cov());
                steps.push(Step { conditioner: Some(conditioner), mean0: DVector::zeros(n), noise });
            }
            prev = t;
        }
        Ok(Self { grid: grid.to_vec(), steps })
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        let n = self.steps.first().map(|s| s.noise.nrows()).unwrap_or(0);
        let mut out = DMatrix::zeros(self.grid.len(), n);
        let mut prev = DVector::zeros(n);
        for (row, st) in self.steps.iter().enumerate() {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
            let mean = match &st.conditioner {
                Some(c) => c.mean_given(&prev).expect("state length fixed at construction"),
                None => st.mean0.clone(),
            };
            let x = mean + &st.noise * z;
            out.set_row(row, &x.transpose());
            prev = x;
        }
        out
    }
}

/// One exactly sampled path on `grid` (`|grid| × N`).
pub fn sample_bridge_path(law: &BridgeLaw, grid: &[f64], seed: u64) -> Result<DMatrix<f64>> {
    Ok(BridgeSampler::new(law, grid)?.sample(&mut path_rng(seed, 0)))
}

/// `n_paths` exact paths; path `p` uses stream `p` of `seed`.
pub fn sample_bridge_paths(law: &BridgeLaw, grid: &[f64], n_paths: usize, seed: u64) -> Result<Vec<DMatrix<f64>>> {
    let sampler = BridgeSampler::new(law, grid)?;
    Ok((0..n_paths).into_par_iter().map(|p| sampler.sample(&mut path_rng(seed, p as u64))).collect())
}

/// Euler-Maruyama paths of `dB̄ = −β̄₂(t) B̄ dt + dV` mapped back through
/// `B = E[B] + L B̄`, with step at most `dt`. Used to cross-check the SDE.
pub fn sample_bridge_paths_euler(law: &BridgeLaw, grid: &[f64], n_paths: usize, seed: u64, dt: f64) -> Result<Vec<DMatrix<f64>>> {
    validate_grid(grid, law.spec.horizon, MODULE)?;
    if !(dt > 0.0) {
        return Err(DblError::InvalidInput { module: MODULE, detail: "Euler step must be positive".into() });
    }
    let n = law.dim();
    // Shared time discretisation with drift matrices evaluated once.
    let mut schedule: Vec<(f64, f64, DMatrix<f64>)> = Vec::new();
    let mut marks = Vec::with_capacity(grid.len());
    let mut t = 0.0;
    for &target in grid {
        let steps = ((target - t) / dt).ceil().max(0.0) as usize;
        if steps > 0 {
            let h = (target - t) / steps as f64;
            for s in 0..steps {
                let ts = t + s as f64 * h;
                schedule.push((ts, h, law.beta_bar2(ts)));
            }
        }
        t = target;
        marks.push(schedule.len());
    }
    let means: Vec<DVector<f64>> = grid.iter().map(|&g| law.mean(g)).collect();
    let l = law.lower().clone();
    Ok((0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p as u64);
            let mut out = DMatrix::zeros(grid.len(), n);
            let mut b = DVector::zeros(n);
            let mut done = 0;
            for (row, &mark) in marks.iter().enumerate() {
                for (_, h, beta) in &schedule[done..mark] {
                    let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                    b = &b - beta * &b * *h + z * h.sqrt();
                }
                done = mark;
                out.set_row(row, &(&means[row] + &l * &b).transpose());
            }
            out
        })
        .collect())
}
