//! View structures as seen by the Monte-Carlo lab: how views are drawn along
//! a simulated price path and which interval policy applies at each time.

use nalgebra::{DMatrix, DVector};

use super::plan::{grid_index, MODULE};
use crate::error::{DblError, Result};
use crate::gaussian::{cholesky_in, symmetrize};
use crate::market::{refine_short_term_view, MarketModel, MultiHorizonViews, RevisionSchedule, ShortTermSchedule};
use crate::policy::{
    revisions_policy, short_term_policy, solve_multi_horizon_policy, AffineWeights, IntervalPolicy, MultiHorizonPolicy,
};

/// Investor type compared in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Dynamic policy with hedging demand.
    Dbl,
    /// Single-period investor re-solving with the aged view at each epoch.
    Rcbl,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Dbl => "DBL",
            PolicyKind::Rcbl => "RCBL",
        }
    }
}

/// View arrival structure with noise scaled by the experiment's `α`.
#[derive(Debug, Clone)]
pub enum ViewStructure {
    /// One view of `X(T)`; noise covariance `α · omega_base` per unit time.
    Single { pick: DMatrix<f64>, omega_base: DMatrix<f64> },
    /// Views of `X(T) − X(t_j)` at `times`; `Ω^j = (T − t_j) α omega_base`.
    Revisions { pick: DMatrix<f64>, times: Vec<f64>, omega_base: DMatrix<f64> },
    /// Views of `X(T_{j+1}) − X(T_j)` with VAR noise; unpredictable part
    /// `α (T_{j+1} − T_j) omega_base`.
    ShortTerm { pick: DMatrix<f64>, times: Vec<f64>, phi: Vec<DMatrix<f64>>, omega_base: DMatrix<f64> },
    /// Views of `p_iᵀX(T_i)`; noise `α · omega_base` per unit time.
    MultiHorizon { picks: DMatrix<f64>, horizons: Vec<f64>, omega_base: DMatrix<f64> },
}

fn psp(market: &MarketModel, pick: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(pick * market.sigma() * pick.transpose()))
}

impl ViewStructure {
    /// Single view with `Ω = α PΣPᵀ`.
    pub fn single(market: &MarketModel, pick: DMatrix<f64>) -> Self {
        let omega_base = psp(market, &pick);
        ViewStructure::Single { pick, omega_base }
    }
    pub fn revisions(market: &MarketModel, pick: DMatrix<f64>, times: Vec<f64>) -> Self {
        let omega_base = psp(market, &pick);
        ViewStructure::Revisions { pick, times, omega_base }
    }
    pub fn short_term(market: &MarketModel, pick: DMatrix<f64>, times: Vec<f64>, phi: Vec<DMatrix<f64>>) -> Self {
        let omega_base = psp(market, &pick);
        ViewStructure::ShortTerm { pick, times, phi, omega_base }
    }
    /// Independent view noises with variances `α p_iᵀΣp_i`.
    pub fn multi_horizon(market: &MarketModel, picks: DMatrix<f64>, horizons: Vec<f64>) -> Self {
        let full = psp(market, &picks);
        let omega_base = DMatrix::from_diagonal(&full.diagonal());
        ViewStructure::MultiHorizon { picks, horizons, omega_base }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ViewStructure::Single { .. } => "single",
            ViewStructure::Revisions { .. } => "revisions",
            ViewStructure::ShortTerm { .. } => "short_term",
            ViewStructure::MultiHorizon { .. } => "multi_horizon",
        }
    }

    fn n_views(&self) -> usize {
        match self {
            ViewStructure::Single { pick, .. } | ViewStructure::Revisions { pick, .. } | ViewStructure::ShortTerm { pick, .. } => {
                pick.nrows()
            }
            ViewStructure::MultiHorizon { picks, .. } => picks.nrows(),
        }
    }

    /// Times at which the simulation grid must have a node.
    pub fn event_times(&self) -> Vec<f64> {
        match self {
            ViewStructure::Single { .. } => vec![],
            ViewStructure::Revisions { times, .. } | ViewStructure::ShortTerm { times, .. } => times.clone(),
            ViewStructure::MultiHorizon { horizons, .. } => horizons.clone(),
        }
    }

    /// Checks shapes and that the structure spans exactly the market horizon.
    pub fn validate(&self, market: &MarketModel) -> Result<()> {
        let t = market.horizon();
        let invalid = |d: String| Err(DblError::InvalidInput { module: MODULE, detail: d });
        let (pick, base) = match self {
            ViewStructure::Single { pick, omega_base } | ViewStructure::Revisions { pick, omega_base, .. } => (pick, omega_base),
            ViewStructure::ShortTerm { pick, omega_base, .. } => (pick, omega_base),
            ViewStructure::MultiHorizon { picks, omega_base, .. } => (picks, omega_base),
        };
        if pick.ncols() != market.n_assets() || base.shape() != (pick.nrows(), pick.nrows()) {
            return Err(DblError::ShapeMismatch {
                module: MODULE,
                detail: format!("pick {}x{}, omega {}x{}, {} assets", pick.nrows(), pick.ncols(), base.nrows(), base.ncols(), market.n_assets()),
            });
        }
        cholesky_in(base, MODULE)?;
        match self {
            ViewStructure::ShortTerm { times, .. } if (times.last().copied().unwrap_or(0.0) - t).abs() > 1e-12 => {
                invalid(format!("short-term views must end at the horizon {t}"))
            }
            ViewStructure::MultiHorizon { horizons, .. } if (horizons.last().copied().unwrap_or(0.0) - t).abs() > 1e-12 => {
                invalid(format!("the longest view horizon must equal the horizon {t}"))
            }
            ViewStructure::Revisions { times, .. } if times.iter().any(|s| *s >= t) => {
                invalid(format!("revision times must lie before the horizon {t}"))
            }
            _ => Ok(()),
        }
    }
}

/// Policies of one structure at one `(α, γ)`.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub(crate) enum Solved {
    Intervals(Vec<IntervalPolicy>),
    Multi(MultiHorizonPolicy),
}

impl Solved {
    pub(crate) fn build(structure: &ViewStructure, market: &MarketModel, alpha: f64, gamma: f64) -> Result<Self> {
        let t = market.horizon();
        Ok(match structure {
            ViewStructure::Single { pick, omega_base } => {
                Solved::Intervals(vec![IntervalPolicy::new(market, pick, &(omega_base * (alpha * t)), 0.0, t, t, gamma)?])
            }
            ViewStructure::Revisions { pick, times, omega_base } => {
                let omegas = times.iter().map(|s| omega_base * ((t - s) * alpha)).collect();
                let sched = RevisionSchedule::new(pick.clone(), times.clone(), omegas, t)?;
                Solved::Intervals(revisions_policy(&sched, market, gamma)?.intervals().to_vec())
            }
            ViewStructure::ShortTerm { pick, times, phi, omega_base } => {
                let sched = short_term_schedule(pick, times, phi, omega_base, alpha)?;
                Solved::Intervals(short_term_policy(&sched, market, gamma)?.intervals().to_vec())
            }
            ViewStructure::MultiHorizon { picks, horizons, omega_base } => {
                let views = MultiHorizonViews::new(horizons.clone(), picks.clone(), omega_base * alpha)?;
                Solved::Multi(solve_multi_horizon_policy(&views, market, gamma)?)
            }
        })
    }

    pub(crate) fn interval_at(&self, t: f64) -> usize {
        match self {
            Solved::Intervals(iv) => iv.iter().rposition(|p| p.start() <= t + 1e-12).unwrap_or(0),
            Solved::Multi(m) => m.interval_at(t),
        }
    }

    /// Start of the window over which the state accumulates on interval `j`.
    pub(crate) fn state_origin(&self, j: usize) -> f64 {
        match self {
            Solved::Intervals(iv) => iv[j].start(),
            Solved::Multi(_) => 0.0,
        }
    }

    pub(crate) fn affine(&self, kind: PolicyKind, j: usize, t: f64) -> AffineWeights {
        match (self, kind) {
            (Solved::Intervals(iv), PolicyKind::Dbl) => iv[j].affine_dbl(t),
            (Solved::Intervals(iv), PolicyKind::Rcbl) => iv[j].affine_aged(t),
            (Solved::Multi(m), PolicyKind::Dbl) => m.affine_dbl(j, t),
            (Solved::Multi(m), PolicyKind::Rcbl) => m.affine_aged(j, t),
        }
    }
}

fn short_term_schedule(pick: &DMatrix<f64>, times: &[f64], phi: &[DMatrix<f64>], base: &DMatrix<f64>, alpha: f64) -> Result<ShortTermSchedule> {
    let covs = times.windows(2).map(|w| base * (alpha * (w[1] - w[0]))).collect();
    ShortTermSchedule::new(times.to_vec(), pick.clone(), phi.to_vec(), covs)
}

/// Standard-normal blocks a structure consumes per path.
pub(crate) fn noise_blocks(structure: &ViewStructure, revision_partition: &[f64]) -> usize {
    match structure {
        ViewStructure::Single { .. } | ViewStructure::MultiHorizon { .. } => 1,
        ViewStructure::Revisions { .. } => revision_partition.len(),
        ViewStructure::ShortTerm { times, .. } => times.len() - 1,
    }
}

/// Draws the views of one path. `x` holds `X` on `grid` row-wise (`|grid| × N`),
/// `z` the standard-normal blocks. Returns one view vector per interval
/// (a single shared vector for multi-horizon views).
///
/// Revision noise is built on `revision_partition` (a superset of every
/// compared schedule): the noise of the view at `t_j` sums the independent
/// blocks after `t_j`, so schedules sharing the partition share noise.
pub(crate) fn draw_views(
    structure: &ViewStructure,
    market: &MarketModel,
    alpha: f64,
    grid: &[f64],
    x: &DMatrix<f64>,
    z: &[DVector<f64>],
    revision_partition: &[f64],
) -> Result<Vec<DVector<f64>>> {
    let t = market.horizon();
    let at = |s: f64| x.row(grid_index(grid, s)).transpose();
    let x_t = at(t);
    Ok(match structure {
        ViewStructure::Single { pick, omega_base } => {
            let l = cholesky_in(&(omega_base * (alpha * t)), MODULE)?.lower().clone();
            vec![pick * &x_t + l * &z[0]]
        }
        ViewStructure::Revisions { pick, times, omega_base } => {
            let l = cholesky_in(omega_base, MODULE)?.lower().clone();
            let m = revision_partition.len();
            let blocks: Vec<DVector<f64>> = (0..m)
                .map(|k| {
                    let next = revision_partition.get(k + 1).copied().unwrap_or(t);
                    &l * &z[k] * (alpha * (next - revision_partition[k])).sqrt()
                })
                .collect();
            times
                .iter()
                .map(|&tj| {
                    let mut eps = DVector::zeros(pick.nrows());
                    for (k, b) in blocks.iter().enumerate() {
                        if revision_partition[k] >= tj - 1e-12 {
                            eps += b;
                        }
                    }
                    pick * (&x_t - at(tj)) + eps
                })
                .collect()
        }
        ViewStructure::ShortTerm { pick, times, phi, omega_base } => {
            let sched = short_term_schedule(pick, times, phi, omega_base, alpha)?;
            let n_iv = times.len() - 1;
            let returns: Vec<DVector<f64>> = (0..n_iv).map(|j| at(times[j + 1]) - at(times[j])).collect();
            let mut eps: Vec<DVector<f64>> = Vec::with_capacity(n_iv);
            for j in 0..n_iv {
                let l = cholesky_in(&sched.idio_covs()[j], MODULE)?.lower().clone();
                let mut e = l * &z[j];
                for i in 1..=phi.len().min(j) {
                    e += &phi[i - 1] * &eps[j - i];
                }
                eps.push(e);
            }
            let raw: Vec<DVector<f64>> = (0..n_iv).map(|j| pick * &returns[j] + &eps[j]).collect();
            (0..n_iv).map(|j| refine_short_term_view(&sched, &raw, &returns, j)).collect::<Result<Vec<_>>>()?
        }
        ViewStructure::MultiHorizon { picks, horizons, omega_base } => {
            let l = cholesky_in(&(omega_base * alpha), MODULE)?.lower().clone();
            let noise = l * &z[0];
            vec![DVector::from_fn(picks.nrows(), |i, _| (picks.row(i) * at(horizons[i]))[0] + horizons[i].sqrt() * noise[i])]
        }
    })
}

pub(crate) fn view_len(structure: &ViewStructure) -> usize {
    structure.n_views()
}
