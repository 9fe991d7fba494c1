//! Policy comparisons on common random numbers.
//!
//! Each path draws one prior price path on the union of every grid in the run
//! and one set of standard-normal view noise blocks. Every investor, view
//! structure and noise level `α` sees the same draws, so differences between
//! investors are not blurred by sampling noise in the scenarios.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::model::{draw_views, noise_blocks, view_len, PolicyKind, Solved, ViewStructure};
use super::plan::{grid_index, union_grid, RebalancePlan, MODULE};
use super::wealth::{wealth_path, PathOutcome, WealthSummary};
use crate::error::{DblError, Result};
use crate::market::MarketModel;
use crate::policy::{check_gamma, AffineWeights};
use crate::rng::path_rng;

/// Comparison of investors under one view structure.
#[derive(Debug, Clone)]
pub struct ComparisonSpec {
    pub market: MarketModel,
    pub structure: ViewStructure,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub plans: Vec<RebalancePlan>,
    pub policies: Vec<PolicyKind>,
    pub n_paths: usize,
    pub seed: u64,
    pub z0: f64,
    /// Number of leading paths whose log-returns are kept for dumping.
    pub keep_paths: usize,
    /// Hash the simulated price paths.
    pub digest: bool,
}

impl ComparisonSpec {
    /// DBL and RCBL investors with `z0 = 1`, no dump and no digest.
    pub fn new(
        market: MarketModel,
        structure: ViewStructure,
        alphas: Vec<f64>,
        gammas: Vec<f64>,
        plans: Vec<RebalancePlan>,
        n_paths: usize,
        seed: u64,
    ) -> Self {
        Self {
            market,
            structure,
            alphas,
            gammas,
            plans,
            policies: vec![PolicyKind::Dbl, PolicyKind::Rcbl],
            n_paths,
            seed,
            z0: 1.0,
            keep_paths: 0,
            digest: false,
        }
    }
}

/// One investor configuration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRow {
    /// View structure label; for revision studies the schedule name.
    pub structure: String,
    pub policy: PolicyKind,
    pub alpha: f64,
    pub gamma: f64,
    pub plan: String,
    /// Rebalancing epochs per path.
    pub n_epochs: usize,
    pub summary: WealthSummary,
}

/// Result of [`run_comparison`] or [`run_revision_study`].
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ConfigRow>,
    /// Simulation grid shared by all investors.
    pub grid: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub z0: f64,
    /// Fine-grid steps per year of each plan, in plan order.
    pub plans: Vec<(String, usize)>,
    /// Hex SHA-256 of the price-path tensor, when requested.
    pub path_digest: Option<String>,
    /// `X` on `grid` for the first `keep_paths` paths.
    pub kept_paths: Vec<DMatrix<f64>>,
    /// `Z(T)` per configuration (same order as `rows`) and path.
    pub terminal_wealth: Vec<Vec<f64>>,
}

impl ComparisonReport {
    pub fn row(&self, policy: PolicyKind, alpha: f64, gamma: f64, plan: &str) -> Option<&ConfigRow> {
        self.rows.iter().find(|r| r.policy == policy && r.alpha == alpha && r.gamma == gamma && r.plan == plan)
    }

    pub fn schedule_row(&self, structure: &str, alpha: f64, gamma: f64) -> Option<&ConfigRow> {
        self.rows.iter().find(|r| r.structure == structure && r.alpha == alpha && r.gamma == gamma)
    }

    /// Fails with `BankruptcyUnderflow` on the first configuration with a bankrupt path.
    pub fn check_solvency(&self) -> Result<()> {
        self.rows.iter().try_for_each(|r| r.summary.check_solvency())
    }
}

struct Investor {
    structure: usize,
    alpha: usize,
    gamma: f64,
    plan: usize,
    policy: PolicyKind,
    label: String,
    epochs: Vec<Epoch>,
}

struct Epoch {
    node: usize,
    origin: usize,
    view: usize,
    weights: AffineWeights,
}

/// Per-path digest, optionally kept price path, and one outcome per investor.
type PathResult = (Option<[u8; 32]>, Option<DMatrix<f64>>, Vec<PathOutcome>);

struct Engine {
    market: MarketModel,
    structures: Vec<ViewStructure>,
    partition: Vec<f64>,
    alphas: Vec<f64>,
    grid: Vec<f64>,
    investors: Vec<Investor>,
    n_blocks: usize,
    block_len: usize,
}

fn invalid(detail: String) -> DblError {
    DblError::InvalidInput { module: MODULE, detail }
}

impl Engine {
    #[allow(clippy::too_many_arguments)]
    fn new(
        market: &MarketModel,
        structures: Vec<(String, ViewStructure)>,
        alphas: &[f64],
        gammas: &[f64],
        plans: &[RebalancePlan],
        policies: &[PolicyKind],
    ) -> Result<Self> {
        if alphas.is_empty() || gammas.is_empty() || plans.is_empty() || policies.is_empty() {
            return Err(invalid("alphas, gammas, plans and policies must be non-empty".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(invalid(format!("view noise scale alpha must be positive, got {a}")));
        }
        for g in gammas {
            check_gamma(*g)?;
        }
        for p in plans {
            p.validate()?;
        }
        let horizon = market.horizon();
        for (_, s) in &structures {
            s.validate(market)?;
        }
        let partition: Vec<f64> = {
            let times: Vec<Vec<f64>> = structures
                .iter()
                .filter(|(_, s)| matches!(s, ViewStructure::Revisions { .. }))
                .map(|(_, s)| s.event_times())
                .collect();
            let mut g = union_grid(&times, horizon);
            g.pop();
            g
        };
        let plan_epochs: Vec<Vec<Vec<f64>>> = plans
            .iter()
            .map(|p| {
                structures
                    .iter()
                    .map(|(_, s)| {
                        let mut e = union_grid(&[p.epochs(horizon), s.event_times()], horizon);
                        e.pop();
                        e
                    })
                    .collect()
            })
            .collect();
        let mut all: Vec<Vec<f64>> = plan_epochs.iter().flatten().cloned().collect();
        all.extend(structures.iter().map(|(_, s)| s.event_times()));
        let grid = union_grid(&all, horizon);

        let mut investors = Vec::new();
        for (ai, &alpha) in alphas.iter().enumerate() {
            for &gamma in gammas {
                for (si, (label, s)) in structures.iter().enumerate() {
                    let solved = Solved::build(s, market, alpha, gamma)?;
                    for (pi, _) in plans.iter().enumerate() {
                        for &policy in policies {
                            let epochs = plan_epochs[pi][si]
                                .iter()
                                .map(|&t| {
                                    let j = solved.interval_at(t);
                                    Epoch {
                                        node: grid_index(&grid, t),
                                        origin: grid_index(&grid, solved.state_origin(j)),
                                        view: match solved {
                                            Solved::Intervals(_) => j,
                                            Solved::Multi(_) => 0,
                                        },
                                        weights: solved.affine(policy, j, t),
                                    }
                                })
                                .collect();
                            investors.push(Investor { structure: si, alpha: ai, gamma, plan: pi, policy, label: label.clone(), epochs });
                        }
                    }
                }
            }
        }
        let n_blocks = structures.iter().map(|(_, s)| noise_blocks(s, &partition)).max().unwrap_or(1);
        let block_len = structures.iter().map(|(_, s)| view_len(s)).max().unwrap_or(0);
        Ok(Self {
            market: market.clone(),
            structures: structures.into_iter().map(|(_, s)| s).collect(),
            partition,
            alphas: alphas.to_vec(),
            grid,
            investors,
            n_blocks,
            block_len,
        })
    }

    /// Prior log-return path on the grid and the view noise blocks of path `p`.
    fn draw(&self, seed: u64, p: usize) -> (DMatrix<f64>, Vec<DVector<f64>>) {
        let mut rng = path_rng(seed, p as u64);
        let n = self.market.n_assets();
        let l = self.market.chol().lower();
        let drift = self.market.log_drift();
        let mut x = DMatrix::zeros(self.grid.len(), n);
        let mut cur = DVector::zeros(n);
        for k in 1..self.grid.len() {
            let dt = self.grid[k] - self.grid[k - 1];
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            cur += drift * dt + l * z * dt.sqrt();
            x.set_row(k, &cur.transpose());
        }
        let blocks = (0..self.n_blocks).map(|_| DVector::from_fn(self.block_len, |_, _| StandardNormal.sample(&mut rng))).collect();
        (x, blocks)
    }

    fn run_path(&self, seed: u64, p: usize, z0: f64) -> Result<(DMatrix<f64>, Vec<PathOutcome>)> {
        let (x, z) = self.draw(seed, p);
        let prices = x.map(f64::exp);
        let mut views: Vec<Vec<Vec<DVector<f64>>>> = Vec::with_capacity(self.structures.len());
        for s in &self.structures {
            let k = view_len(s);
            let zs: Vec<DVector<f64>> = z.iter().map(|b| b.rows(0, k).into_owned()).collect();
            views.push(
                self.alphas
                    .iter()
                    .map(|&a| draw_views(s, &self.market, a, &self.grid, &x, &zs, &self.partition))
                    .collect::<Result<_>>()?,
            );
        }
        let r_f = self.market.r_f();
        let n = self.market.n_assets();
        let mut x_bar = DVector::zeros(n);
        let mut w = DVector::zeros(n);
        let outcomes = self
            .investors
            .iter()
            .map(|inv| {
                let nodes: Vec<usize> = inv.epochs.iter().map(|e| e.node).collect();
                let vs = &views[inv.structure][inv.alpha];
                wealth_path(
                    &prices,
                    &self.grid,
                    &nodes,
                    r_f,
                    z0,
                    |k, node| {
                        let e = &inv.epochs[k];
                        for i in 0..n {
                            x_bar[i] = x[(node, i)] - x[(e.origin, i)];
                        }
                        e.weights.apply_into(&x_bar, &vs[e.view], &mut w);
                        w.clone()
                    },
                    None,
                )
            })
            .collect();
        Ok((x, outcomes))
    }

    fn run(&self, plans: &[RebalancePlan], n_paths: usize, seed: u64, z0: f64, keep: usize, digest: bool) -> Result<ComparisonReport> {
        if n_paths < 2 {
            return Err(invalid(format!("need at least 2 paths, got {n_paths}")));
        }
        if !(z0 > 0.0) || !z0.is_finite() {
            return Err(invalid(format!("initial wealth must be positive, got {z0}")));
        }
        let per_path: Vec<PathResult> = (0..n_paths)
            .into_par_iter()
            .map(|p| {
                let (x, out) = self.run_path(seed, p, z0)?;
                let h = digest.then(|| {
                    let mut hasher = Sha256::new();
                    for v in x.iter() {
                        hasher.update(v.to_le_bytes());
                    }
                    let mut h = [0u8; 32];
                    h.copy_from_slice(&hasher.finalize());
                    h
                });
                Ok((h, (p < keep).then_some(x), out))
            })
            .collect::<Result<_>>()?;
        let path_digest = digest.then(|| {
            let mut hasher = Sha256::new();
            for (h, _, _) in &per_path {
                hasher.update(h.expect("digest requested"));
            }
            hasher.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>()
        });
        let horizon = self.market.horizon();
        let mut rows = Vec::with_capacity(self.investors.len());
        let mut terminal_wealth = Vec::with_capacity(self.investors.len());
        for (c, inv) in self.investors.iter().enumerate() {
            let outcomes: Vec<PathOutcome> = per_path.iter().map(|(_, _, o)| o[c]).collect();
            let summary = WealthSummary::from_outcomes(&outcomes, inv.gamma, z0, horizon)?;
            terminal_wealth.push(outcomes.iter().map(|o| o.terminal).collect());
            rows.push(ConfigRow {
                structure: inv.label.clone(),
                policy: inv.policy,
                alpha: self.alphas[inv.alpha],
                gamma: inv.gamma,
                plan: plans[inv.plan].name(),
                n_epochs: inv.epochs.len(),
                summary,
            });
        }
        Ok(ComparisonReport {
            rows,
            grid: self.grid.clone(),
            n_paths,
            seed,
            z0,
            plans: plans.iter().map(|p| (p.name(), p.fine_grid_steps)).collect(),
            path_digest,
            kept_paths: per_path.into_iter().filter_map(|(_, x, _)| x).collect(),
            terminal_wealth,
        })
    }
}

/// Runs every policy at every `(α, γ, plan)` on common random numbers.
/// Rows are ordered by `α`, then `γ`, then plan, then policy.
pub fn run_comparison(spec: &ComparisonSpec) -> Result<ComparisonReport> {
    let engine = Engine::new(
        &spec.market,
        vec![(spec.structure.label().to_string(), spec.structure.clone())],
        &spec.alphas,
        &spec.gammas,
        &spec.plans,
        &spec.policies,
    )?;
    engine.run(&spec.plans, spec.n_paths, spec.seed, spec.z0, spec.keep_paths, spec.digest)
}

/// Value of view revisions: dynamic investors with different revision
/// schedules, all sharing the view noise of the finest schedule.
#[derive(Debug, Clone)]
pub struct RevisionStudySpec {
    pub market: MarketModel,
    pub pick: DMatrix<f64>,
    /// Named schedules; each lists its view times, starting at 0.
    pub schedules: Vec<(String, Vec<f64>)>,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub plan: RebalancePlan,
    pub n_paths: usize,
    pub seed: u64,
    pub z0: f64,
}

impl RevisionStudySpec {
    /// No revision, one at mid-horizon, and quarterly revisions.
    pub fn standard_schedules(horizon: f64) -> Vec<(String, Vec<f64>)> {
        vec![
            ("none".into(), vec![0.0]),
            ("half".into(), vec![0.0, 0.5 * horizon]),
            ("quarterly".into(), vec![0.0, 0.25 * horizon, 0.5 * horizon, 0.75 * horizon]),
        ]
    }
}

/// Rows are ordered by `α`, then `γ`, then schedule.
pub fn run_revision_study(spec: &RevisionStudySpec) -> Result<ComparisonReport> {
    if spec.schedules.is_empty() {
        return Err(invalid("revision study needs at least one schedule".into()));
    }
    let structures = spec
        .schedules
        .iter()
        .map(|(name, times)| (name.clone(), ViewStructure::revisions(&spec.market, spec.pick.clone(), times.clone())))
        .collect();
    let plans = [spec.plan.clone()];
    let engine = Engine::new(&spec.market, structures, &spec.alphas, &spec.gammas, &plans, &[PolicyKind::Dbl])?;
    engine.run(&plans, spec.n_paths, spec.seed, spec.z0, 0, false)
}
