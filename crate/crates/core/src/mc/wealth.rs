//! Buy-and-hold wealth bookkeeping between rebalancing epochs.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::plan::{grid_index, union_grid, RebalancePlan, MODULE};
use super::stats::{certainty_equivalent, mean_estimate, mean_std_se, Estimate};
use crate::conditional::{ConditionalCoefficients, ConditionalSampler};
use crate::error::{DblError, Result};
use crate::rng::path_rng;

/// Result of one wealth path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    /// `Z(T)`, or the last non-positive wealth seen if the path went bankrupt.
    pub terminal: f64,
    /// Sum of absolute share changes over rebalancing epochs after the first.
    pub turnover: f64,
    /// Time at which wealth first fell to zero or below.
    pub bankrupt_at: Option<f64>,
}

/// Wealth revaluation on one grid node, recorded for bookkeeping checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    /// `Σᵢ nᵢSᵢ(t) + n_B e^{r_f t}` from the frozen holdings.
    pub from_shares: f64,
    /// `Z(t_k)` times the realized growth of the epoch portfolio.
    pub compounded: f64,
}

/// Runs one path. `prices` holds `S(t)` on `grid` row-wise, `epochs` the grid
/// nodes where the investor rebalances (first must be node 0) and
/// `weights(k, node)` the target weights at the `k`-th epoch.
pub(crate) fn wealth_path<F>(
    prices: &DMatrix<f64>,
    grid: &[f64],
    epochs: &[usize],
    r_f: f64,
    z0: f64,
    mut weights: F,
    mut trace: Option<&mut Vec<TracePoint>>,
) -> PathOutcome
where
    F: FnMut(usize, usize) -> DVector<f64>,
{
    let n = prices.ncols();
    let last = grid.len() - 1;
    let mut shares = DVector::zeros(n);
    // Cash is held as units of the money-market account B(t) = e^{r_f t}.
    let bond = |node: usize| (r_f * grid[node]).exp();
    let mut bond_units = 0.0;
    let mut wealth = z0;
    let mut turnover = 0.0;
    let mut held_since = 0usize;
    let mut w_held = DVector::zeros(n);
    let value = |shares: &DVector<f64>, bond_units: f64, node: usize| {
        let mut z = bond_units * bond(node);
        for i in 0..n {
            z += shares[i] * prices[(node, i)];
        }
        z
    };
    for (k, &node) in epochs.iter().enumerate() {
        if k > 0 {
            if let Some(tr) = trace.as_deref_mut() {
                for m in (held_since + 1)..=node {
                    let from_shares = value(&shares, bond_units, m);
                    let growth = (0..n).map(|i| w_held[i] * prices[(m, i)] / prices[(held_since, i)]).sum::<f64>()
                        + (1.0 - w_held.sum()) * (r_f * (grid[m] - grid[held_since])).exp();
                    tr.push(TracePoint { t: grid[m], from_shares, compounded: wealth * growth });
                }
            }
            wealth = value(&shares, bond_units, node);
            if !(wealth > 0.0) {
                return PathOutcome { terminal: wealth, turnover, bankrupt_at: Some(grid[node]) };
            }
        }
        let w = weights(k, node);
        let mut invested = 0.0;
        for i in 0..n {
            let new = w[i] * wealth / prices[(node, i)];
            if k > 0 {
                turnover += (new - shares[i]).abs();
            }
            shares[i] = new;
            invested += w[i] * wealth;
        }
        bond_units = (wealth - invested) / bond(node);
        held_since = node;
        w_held = w;
    }
    if let Some(tr) = trace {
        for m in (held_since + 1)..=last {
            let from_shares = value(&shares, bond_units, m);
            let growth = (0..n).map(|i| w_held[i] * prices[(m, i)] / prices[(held_since, i)]).sum::<f64>()
                + (1.0 - w_held.sum()) * (r_f * (grid[m] - grid[held_since])).exp();
            tr.push(TracePoint { t: grid[m], from_shares, compounded: wealth * growth });
        }
    }
    let terminal = value(&shares, bond_units, last);
    let bankrupt_at = if terminal > 0.0 { None } else { Some(grid[last]) };
    PathOutcome { terminal, turnover, bankrupt_at }
}

/// Aggregates over the paths of one investor.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthSummary {
    pub n_paths: usize,
    /// Mean, sample std and SE of the return `Z(T)/z0 − 1`.
    pub mean: f64,
    pub std: f64,
    pub se_mean: f64,
    /// `None` when any path went bankrupt.
    pub cer: Option<Estimate>,
    pub turnover: Estimate,
    pub bankrupt: usize,
    /// First bankrupt path and the time it failed.
    pub first_bankrupt: Option<(usize, f64)>,
}

impl WealthSummary {
    pub(crate) fn from_outcomes(outcomes: &[PathOutcome], gamma: f64, z0: f64, horizon: f64) -> Result<Self> {
        let returns: Vec<f64> = outcomes.iter().map(|o| o.terminal / z0 - 1.0).collect();
        let (mean, std, se_mean) = mean_std_se(&returns);
        let turnover: Vec<f64> = outcomes.iter().map(|o| o.turnover).collect();
        let first_bankrupt = outcomes.iter().enumerate().find_map(|(p, o)| o.bankrupt_at.map(|t| (p, t)));
        let bankrupt = outcomes.iter().filter(|o| o.bankrupt_at.is_some()).count();
        let cer = if bankrupt == 0 {
            let terminal: Vec<f64> = outcomes.iter().map(|o| o.terminal).collect();
            Some(certainty_equivalent(&terminal, gamma, z0, horizon)?)
        } else {
            None
        };
        Ok(Self { n_paths: outcomes.len(), mean, std, se_mean, cer, turnover: mean_estimate(&turnover), bankrupt, first_bankrupt })
    }

    /// Fails with `BankruptcyUnderflow` if any path went bankrupt.
    pub fn check_solvency(&self) -> Result<()> {
        match self.first_bankrupt {
            Some((first_path, t)) => Err(DblError::BankruptcyUnderflow { count: self.bankrupt, first_path, t }),
            None => Ok(()),
        }
    }

    /// The certainty equivalent, or the bankruptcy error.
    pub fn cer(&self) -> Result<Estimate> {
        self.check_solvency()?;
        self.cer.ok_or(DblError::NonPositiveWealth)
    }
}

/// Raw per-path results of [`simulate_wealth`].
#[derive(Debug, Clone)]
pub struct WealthSimulation {
    pub grid: Vec<f64>,
    pub epochs: Vec<f64>,
    pub outcomes: Vec<PathOutcome>,
    pub seed: u64,
    pub z0: f64,
}

impl WealthSimulation {
    pub fn terminal_wealth(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.terminal).collect()
    }
    pub fn n_paths(&self) -> usize {
        self.outcomes.len()
    }
    pub fn summary(&self, gamma: f64) -> Result<WealthSummary> {
        WealthSummary::from_outcomes(&self.outcomes, gamma, self.z0, *self.grid.last().expect("grid ends at the horizon"))
    }
}

/// Simulates wealth under `policy(t, X(t)) → weights` on exact conditional
/// paths of `coeffs`, rebalancing at the epochs of `plan`. Path `p` uses
/// stream `p` of `seed`, so results do not depend on the thread count.
pub fn simulate_wealth<F>(
    coeffs: &ConditionalCoefficients,
    policy: F,
    plan: &RebalancePlan,
    z0: f64,
    n_paths: usize,
    seed: u64,
) -> Result<WealthSimulation>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64> + Sync,
{
    plan.validate()?;
    if !(z0 > 0.0) || !z0.is_finite() {
        return Err(DblError::InvalidInput { module: MODULE, detail: format!("initial wealth must be positive, got {z0}") });
    }
    let horizon = coeffs.horizon();
    let epochs = plan.epochs(horizon);
    let grid = union_grid(std::slice::from_ref(&epochs), horizon);
    let sampler = ConditionalSampler::new(coeffs, &grid[1..])?;
    let nodes: Vec<usize> = epochs.iter().map(|t| grid_index(&grid, *t)).collect();
    let n = coeffs.n_assets();
    let r_f = coeffs.market().r_f();
    let outcomes = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p as u64);
            let tail = sampler.sample(&mut rng);
            let mut x = DMatrix::zeros(grid.len(), n);
            x.rows_mut(1, grid.len() - 1).copy_from(&tail);
            let prices = x.map(f64::exp);
            wealth_path(&prices, &grid, &nodes, r_f, z0, |_, node| policy(grid[node], &x.row(node).transpose()), None)
        })
        .collect();
    Ok(WealthSimulation { grid, epochs, outcomes, seed, z0 })
}

/// Turnover of a sequence of share holdings: `Σ_k Σᵢ |n_{k+1,i} − n_{k,i}|`.
pub fn turnover(holdings: &[DVector<f64>]) -> f64 {
    holdings.windows(2).map(|w| (&w[1] - &w[0]).abs().sum()).sum()
}
