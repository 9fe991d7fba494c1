//! Prior market model and the four view structures, with the reductions that
//! bring each structure back to a single-horizon view.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{DblError, Result};
use crate::gaussian::{cholesky_in, ensure_symmetric, is_psd, min_eigenvalue, symmetrize, CholeskyFactor};

const MODULE: &str = "market_views";

fn shape(detail: String) -> DblError {
    DblError::ShapeMismatch { module: MODULE, detail }
}

fn invalid(detail: impl Into<String>) -> DblError {
    DblError::InvalidInput { module: MODULE, detail: detail.into() }
}

/// Geometric Brownian motion prior: `dS_i/S_i = μ_i dt + (L dW)_i`.
#[derive(Debug, Clone)]
pub struct MarketModel {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    r_f: f64,
    horizon: f64,
    chol: CholeskyFactor,
    sigma_inv: DMatrix<f64>,
    log_drift: DVector<f64>,
}

impl MarketModel {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>, r_f: f64, horizon: f64) -> Result<Self> {
        ensure_symmetric(&sigma, MODULE, "sigma")?;
        if mu.len() != sigma.nrows() {
            return Err(shape(format!("mu has length {}, sigma is {}x{}", mu.len(), sigma.nrows(), sigma.ncols())));
        }
        if mu.is_empty() {
            return Err(invalid("market needs at least one asset"));
        }
        if mu.iter().any(|v| !v.is_finite()) || !r_f.is_finite() {
            return Err(invalid("mu and r_f must be finite"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let sigma = symmetrize(&sigma);
        let chol = cholesky_in(&sigma, MODULE)?;
        let sigma_inv = chol.inverse();
        let log_drift = &mu - sigma.diagonal() * 0.5;
        Ok(Self { mu, sigma, r_f, horizon, chol, sigma_inv, log_drift })
    }

    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }
    pub fn sigma_inv(&self) -> &DMatrix<f64> {
        &self.sigma_inv
    }
    pub fn r_f(&self) -> f64 {
        self.r_f
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn chol(&self) -> &CholeskyFactor {
        &self.chol
    }
    /// Log-return drift `μˣ = μ − diag(Σ)/2`.
    pub fn log_drift(&self) -> &DVector<f64> {
        &self.log_drift
    }

    /// Same market with a different investment horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.mu.clone(), self.sigma.clone(), self.r_f, horizon)
    }

    /// Unconstrained mean-variance (Merton) weights `(1/γ)Σ⁻¹(μ − r_f 1)`.
    pub fn merton_weights(&self, gamma: f64) -> DVector<f64> {
        &self.sigma_inv * self.mu.add_scalar(-self.r_f) / gamma
    }
}

/// A view `Y = P(X(t₂) − X(t₁)) + √(t₂ − t₁) ε` with `ε ~ N(0, Ω)`.
#[derive(Debug, Clone)]
pub struct ViewSet {
    pick: DMatrix<f64>,
    omega: DMatrix<f64>,
    given_at: f64,
    horizon: f64,
    y: Option<DVector<f64>>,
}

fn validate_pick(pick: &DMatrix<f64>, n: usize) -> Result<()> {
    if pick.ncols() != n || pick.nrows() == 0 {
        return Err(shape(format!("pick matrix is {}x{}, expected Kx{n} with K >= 1", pick.nrows(), pick.ncols())));
    }
    if pick.iter().any(|v| !v.is_finite()) {
        return Err(invalid("pick matrix contains non-finite entries"));
    }
    for (i, row) in pick.row_iter().enumerate() {
        if row.iter().all(|v| *v == 0.0) {
            return Err(invalid(format!("row {i} of the pick matrix is zero")));
        }
    }
    Ok(())
}

impl ViewSet {
    pub fn new(pick: DMatrix<f64>, omega: DMatrix<f64>, given_at: f64, horizon: f64) -> Result<Self> {
        validate_pick(&pick, pick.ncols())?;
        ensure_symmetric(&omega, MODULE, "omega")?;
        if omega.nrows() != pick.nrows() {
            return Err(shape(format!("omega is {}x{}, pick has {} rows", omega.nrows(), omega.ncols(), pick.nrows())));
        }
        cholesky_in(&omega, MODULE)?;
        if !(given_at >= 0.0 && given_at < horizon && horizon.is_finite()) {
            return Err(invalid(format!("view window [{given_at}, {horizon}] must satisfy 0 <= t1 < t2")));
        }
        Ok(Self { pick, omega: symmetrize(&omega), given_at, horizon, y: None })
    }

    /// View given at time zero over the market horizon.
    pub fn canonical(market: &MarketModel, pick: DMatrix<f64>, omega: DMatrix<f64>) -> Result<Self> {
        validate_pick(&pick, market.n_assets())?;
        Self::new(pick, omega, 0.0, market.horizon())
    }

    pub fn with_observation(mut self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.k() {
            return Err(shape(format!("view vector has length {}, expected {}", y.len(), self.k())));
        }
        self.y = Some(y);
        Ok(self)
    }

    pub fn pick(&self) -> &DMatrix<f64> {
        &self.pick
    }
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }
    pub fn given_at(&self) -> f64 {
        self.given_at
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn y(&self) -> Option<&DVector<f64>> {
        self.y.as_ref()
    }
    pub fn k(&self) -> usize {
        self.pick.nrows()
    }
    pub fn window(&self) -> f64 {
        self.horizon - self.given_at
    }
}

/// `Ω = α P Σ Pᵀ`.
pub fn make_omega_alpha(market: &MarketModel, pick: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    validate_pick(pick, market.n_assets())?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let gram = symmetrize(&(pick * market.sigma() * pick.transpose()));
    if cholesky_in(&gram, MODULE).is_err() || min_eigenvalue(&gram) <= 1e-14 * gram.trace() {
        return Err(DblError::DegeneratePick);
    }
    Ok(gram * alpha)
}

/// Draws `y = P x + √(t₂−t₁) z`, `z ~ N(0, Ω)`, where `x` is the realized
/// log-return over the view window.
pub fn sample_view(market: &MarketModel, views: &ViewSet, x_window: &DVector<f64>, seed: u64) -> Result<DVector<f64>> {
    if x_window.len() != market.n_assets() || views.pick().ncols() != market.n_assets() {
        return Err(shape(format!("realized return has length {}, market has {} assets", x_window.len(), market.n_assets())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::from_fn(views.k(), |_, _| StandardNormal.sample(&mut rng));
    let chol = cholesky_in(views.omega(), MODULE)?;
    Ok(views.pick() * x_window + chol.lower() * z * views.window().sqrt())
}

/// Converts an arithmetic return target over a view window into the
/// log-return target used internally.
pub fn log_view_target(arithmetic: f64) -> Result<f64> {
    if !(arithmetic > -1.0) {
        return Err(invalid(format!("arithmetic return {arithmetic} must exceed -1")));
    }
    Ok(arithmetic.ln_1p())
}

/// Views revised at `times[j]` over the remaining horizon, with absolute noise
/// covariances `Ω^j` that shrink as the horizon approaches.
#[derive(Debug, Clone)]
pub struct RevisionSchedule {
    pick: DMatrix<f64>,
    times: Vec<f64>,
    omegas: Vec<DMatrix<f64>>,
    innovation_covs: Vec<DMatrix<f64>>,
    horizon: f64,
}

impl RevisionSchedule {
    /// `times` starts at zero and stays strictly below `horizon`. The innovation
    /// `Ω^j − Ω^{j+1}` of every revision must be positive definite; a zero
    /// innovation would make the revised view a copy of the old one.
    pub fn new(pick: DMatrix<f64>, times: Vec<f64>, omegas: Vec<DMatrix<f64>>, horizon: f64) -> Result<Self> {
        if times.is_empty() || times.len() != omegas.len() {
            return Err(shape(format!("{} revision times but {} covariances", times.len(), omegas.len())));
        }
        if times[0] != 0.0 {
            return Err(invalid("first view must be given at time 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || !(times[times.len() - 1] < horizon) {
            return Err(invalid("revision times must be strictly increasing and below the horizon"));
        }
        let k = pick.nrows();
        validate_pick(&pick, pick.ncols())?;
        for om in &omegas {
            ensure_symmetric(om, MODULE, "revision omega")?;
            if om.nrows() != k {
                return Err(shape(format!("revision omega is {}x{}, expected {k}x{k}", om.nrows(), om.ncols())));
            }
            cholesky_in(om, MODULE)?;
        }
        let mut innovation_covs = Vec::with_capacity(omegas.len());
        for j in 0..omegas.len() {
            let inn = if j + 1 < omegas.len() { symmetrize(&(&omegas[j] - &omegas[j + 1])) } else { symmetrize(&omegas[j]) };
            if !is_psd(&inn) {
                return Err(DblError::NotPositiveDefinite { module: MODULE, pivot: j });
            }
            cholesky_in(&inn, MODULE).map_err(|_| DblError::NotPositiveDefinite { module: MODULE, pivot: j })?;
            innovation_covs.push(inn);
        }
        Ok(Self { pick, times, omegas: omegas.into_iter().map(|m| symmetrize(&m)).collect(), innovation_covs, horizon })
    }

    /// Noise shrinking linearly with the remaining horizon:
    /// `Ω^j = (T − t_j) · α P Σ Pᵀ`.
    pub fn proportional(market: &MarketModel, pick: DMatrix<f64>, times: Vec<f64>, alpha: f64) -> Result<Self> {
        let base = make_omega_alpha(market, &pick, alpha)?;
        let t = market.horizon();
        let omegas = times.iter().map(|tj| &base * (t - tj)).collect();
        Self::new(pick, times, omegas, t)
    }

    pub fn pick(&self) -> &DMatrix<f64> {
        &self.pick
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn omegas(&self) -> &[DMatrix<f64>] {
        &self.omegas
    }
    /// `Ω^j − Ω^{j+1}`; the last entry is `Ω^M` itself.
    pub fn innovation_covs(&self) -> &[DMatrix<f64>] {
        &self.innovation_covs
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn n_views(&self) -> usize {
        self.times.len()
    }
    /// End of the interval on which view `j` is the most recent one.
    pub fn interval_end(&self, j: usize) -> f64 {
        self.times.get(j + 1).copied().unwrap_or(self.horizon)
    }
    /// Index of the view in force at time `t`.
    pub fn interval_at(&self, t: f64) -> usize {
        self.times.iter().rposition(|&s| s <= t).unwrap_or(0)
    }
}

/// Views on consecutive sub-intervals `[T_j, T_{j+1})` whose noise follows a
/// VAR(p) process.
#[derive(Debug, Clone)]
pub struct ShortTermSchedule {
    times: Vec<f64>,
    pick: DMatrix<f64>,
    phi: Vec<DMatrix<f64>>,
    idio_covs: Vec<DMatrix<f64>>,
}

impl ShortTermSchedule {
    /// `times` = `[0, T₁, …, T]`; `idio_covs[j]` is the covariance of the
    /// unpredictable noise of view `j` (for `j = 0` the whole noise).
    pub fn new(times: Vec<f64>, pick: DMatrix<f64>, phi: Vec<DMatrix<f64>>, idio_covs: Vec<DMatrix<f64>>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("short-term times must start at 0 and increase strictly"));
        }
        if idio_covs.len() != times.len() - 1 {
            return Err(shape(format!("{} intervals but {} noise covariances", times.len() - 1, idio_covs.len())));
        }
        validate_pick(&pick, pick.ncols())?;
        let k = pick.nrows();
        for ph in &phi {
            if ph.nrows() != k || ph.ncols() != k || ph.iter().any(|v| !v.is_finite()) {
                return Err(shape(format!("autoregression matrix must be {k}x{k}")));
            }
        }
        for om in &idio_covs {
            ensure_symmetric(om, MODULE, "idiosyncratic covariance")?;
            if om.nrows() != k {
                return Err(shape(format!("noise covariance must be {k}x{k}")));
            }
            cholesky_in(om, MODULE)?;
        }
        Ok(Self { times, pick, phi, idio_covs: idio_covs.iter().map(symmetrize).collect() })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn pick(&self) -> &DMatrix<f64> {
        &self.pick
    }
    pub fn phi(&self) -> &[DMatrix<f64>] {
        &self.phi
    }
    pub fn idio_covs(&self) -> &[DMatrix<f64>] {
        &self.idio_covs
    }
    pub fn order(&self) -> usize {
        self.phi.len()
    }
    pub fn n_intervals(&self) -> usize {
        self.times.len() - 1
    }
    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
    pub fn interval_at(&self, t: f64) -> usize {
        let last = self.n_intervals() - 1;
        self.times[..=last].iter().rposition(|&s| s <= t).unwrap_or(0)
    }
}

/// Removes the predictable part of the noise from the raw view `y^j`.
///
/// `raw_views[i]` is `y^i` and `realized_returns[i]` is `X(T_{i+1}) − X(T_i)`;
/// entries `0..j` are needed for the history.
pub fn refine_short_term_view(
    schedule: &ShortTermSchedule,
    raw_views: &[DVector<f64>],
    realized_returns: &[DVector<f64>],
    j: usize,
) -> Result<DVector<f64>> {
    if j >= schedule.n_intervals() {
        return Err(invalid(format!("interval {j} out of range")));
    }
    let p_bar = schedule.order().min(j);
    if raw_views.len() <= j {
        return Err(DblError::MissingHistory { interval: j });
    }
    if realized_returns.len() < j && p_bar > 0 {
        return Err(DblError::MissingHistory { interval: realized_returns.len() });
    }
    let k = schedule.pick().nrows();
    let mut out = raw_views[j].clone();
    if out.len() != k {
        return Err(shape(format!("view {j} has length {}, expected {k}", out.len())));
    }
    for i in 1..=p_bar {
        let past = j - i;
        let eps = &raw_views[past] - schedule.pick() * &realized_returns[past];
        out -= &schedule.phi()[i - 1] * eps;
    }
    Ok(out)
}

/// Views `Y_j = p_jᵀX(T_j) + √T_j ε_j` with horizons `T₁ ≤ … ≤ T_K` given at time 0.
#[derive(Debug, Clone)]
pub struct MultiHorizonViews {
    horizons: Vec<f64>,
    picks: DMatrix<f64>,
    omega: DMatrix<f64>,
}

impl MultiHorizonViews {
    /// `picks` holds one view per row.
    pub fn new(horizons: Vec<f64>, picks: DMatrix<f64>, omega: DMatrix<f64>) -> Result<Self> {
        if horizons.len() != picks.nrows() || omega.nrows() != picks.nrows() {
            return Err(shape(format!(
                "{} horizons, {} pick rows, omega {}x{}",
                horizons.len(),
                picks.nrows(),
                omega.nrows(),
                omega.ncols()
            )));
        }
        validate_pick(&picks, picks.ncols())?;
        if horizons.iter().any(|h| !(*h > 0.0)) {
            return Err(invalid("view horizons must be positive"));
        }
        if horizons.windows(2).any(|w| w[1] < w[0]) {
            return Err(DblError::UnsortedHorizons);
        }
        ensure_symmetric(&omega, MODULE, "omega")?;
        cholesky_in(&omega, MODULE)?;
        Ok(Self { horizons, picks, omega: symmetrize(&omega) })
    }

    pub fn horizons(&self) -> &[f64] {
        &self.horizons
    }
    pub fn picks(&self) -> &DMatrix<f64> {
        &self.picks
    }
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }
    pub fn k(&self) -> usize {
        self.horizons.len()
    }
    /// Start of interval `j`, i.e. the horizon of the previous view (0 for `j = 0`).
    pub fn interval_start(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.horizons[j - 1]
        }
    }
}

/// The views still open on interval `j`, rewritten as one view of `X(T_j)`.
#[derive(Debug, Clone)]
pub struct CollapsedViews {
    /// Rows `j..K` of the pick matrix.
    pub pick: DMatrix<f64>,
    /// Noise covariance per unit time of the collapsed view, horizon `T_j`.
    pub omega_bar: DMatrix<f64>,
    /// `μ̄_i = (T_i − T_j) p_iᵀ μˣ`, subtracted from the raw views.
    pub bias: DVector<f64>,
    pub horizon: f64,
    pub first_view: usize,
}

impl CollapsedViews {
    /// Collapsed observation `ȳ = y_{j:K} − μ̄`.
    pub fn adjust(&self, y_full: &DVector<f64>) -> DVector<f64> {
        let k = self.pick.nrows();
        DVector::from_fn(k, |i, _| y_full[self.first_view + i] - self.bias[i])
    }

    pub fn view_set(&self) -> Result<ViewSet> {
        ViewSet::new(self.pick.clone(), self.omega_bar.clone(), 0.0, self.horizon)
    }
}

/// Rewrites views `j..K` (0-based interval `j` covers `[T_{j−1}, T_j)`) as a
/// view of `X(T_j)`. The noise absorbs the return after `T_j`:
/// `T_j Ω̄_{ik} = min(T_i − T_j, T_k − T_j) p_iᵀΣp_k + √(T_i T_k) Ω_{ik}`.
pub fn collapse_multi_horizon(views: &MultiHorizonViews, market: &MarketModel, j: usize) -> Result<CollapsedViews> {
    if views.horizons.windows(2).any(|w| w[1] < w[0]) {
        return Err(DblError::UnsortedHorizons);
    }
    if j >= views.k() {
        return Err(invalid(format!("interval {j} out of range for {} views", views.k())));
    }
    if views.picks.ncols() != market.n_assets() {
        return Err(shape(format!("views cover {} assets, market has {}", views.picks.ncols(), market.n_assets())));
    }
    let tj = views.horizons[j];
    let rows: Vec<usize> = (j..views.k()).collect();
    let m = rows.len();
    let pick = DMatrix::from_fn(m, market.n_assets(), |r, c| views.picks[(rows[r], c)]);
    let psp = &pick * market.sigma() * pick.transpose();
    let omega_bar = DMatrix::from_fn(m, m, |a, b| {
        let (ti, tk) = (views.horizons[rows[a]], views.horizons[rows[b]]);
        ((ti - tj).min(tk - tj) * psp[(a, b)] + (ti * tk).sqrt() * views.omega[(rows[a], rows[b])]) / tj
    });
    let drift = &pick * market.log_drift();
    let bias = DVector::from_fn(m, |a, _| (views.horizons[rows[a]] - tj) * drift[a]);
    Ok(CollapsedViews { pick, omega_bar: symmetrize(&omega_bar), bias, horizon: tj, first_view: j })
}
