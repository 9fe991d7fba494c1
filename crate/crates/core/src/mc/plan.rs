//! Rebalancing plans and the simulation grid shared by all plans of a run.

use std::fmt;
use std::str::FromStr;

use crate::error::{DblError, Result};

pub const MODULE: &str = "mc_lab";

/// Fine grid used to approximate continuous trading: 252 · 8 steps per year.
pub const DEFAULT_FINE_GRID_STEPS: usize = 252 * 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanMode {
    /// Rebalance at every node of the fine grid.
    Continuous,
    /// Rebalance every `period` years.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RebalancePlan {
    pub mode: PlanMode,
    pub period: f64,
    pub fine_grid_steps: usize,
}

impl RebalancePlan {
    pub fn continuous() -> Self {
        Self::continuous_with(DEFAULT_FINE_GRID_STEPS)
    }
    pub fn continuous_with(fine_grid_steps: usize) -> Self {
        Self { mode: PlanMode::Continuous, period: 1.0 / fine_grid_steps as f64, fine_grid_steps }
    }
    pub fn periodic(period: f64) -> Result<Self> {
        let plan = Self { mode: PlanMode::Periodic, period, fine_grid_steps: DEFAULT_FINE_GRID_STEPS };
        plan.validate()?;
        Ok(plan)
    }
    pub fn daily() -> Self {
        Self { mode: PlanMode::Periodic, period: 1.0 / 252.0, fine_grid_steps: DEFAULT_FINE_GRID_STEPS }
    }
    pub fn weekly() -> Self {
        Self { mode: PlanMode::Periodic, period: 1.0 / 52.0, fine_grid_steps: DEFAULT_FINE_GRID_STEPS }
    }
    pub fn monthly() -> Self {
        Self { mode: PlanMode::Periodic, period: 1.0 / 12.0, fine_grid_steps: DEFAULT_FINE_GRID_STEPS }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(DblError::InvalidInput { module: MODULE, detail: format!("rebalancing period must be positive, got {}", self.period) });
        }
        if self.fine_grid_steps < 252 {
            return Err(DblError::InvalidInput {
                module: MODULE,
                detail: format!("fine grid needs at least 252 steps per year, got {}", self.fine_grid_steps),
            });
        }
        Ok(())
    }

    /// Rebalancing times in `[0, horizon)`.
    pub fn epochs(&self, horizon: f64) -> Vec<f64> {
        match self.mode {
            PlanMode::Continuous => {
                let n = ((self.fine_grid_steps as f64 * horizon).round() as usize).max(1);
                (0..n).map(|k| horizon * k as f64 / n as f64).collect()
            }
            PlanMode::Periodic => {
                let mut out = Vec::new();
                let mut k = 0usize;
                loop {
                    let t = k as f64 * self.period;
                    if t >= horizon - 1e-12 {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
                out
            }
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RebalancePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            PlanMode::Continuous if self.fine_grid_steps == DEFAULT_FINE_GRID_STEPS => write!(f, "continuous"),
            PlanMode::Continuous => write!(f, "continuous{}", self.fine_grid_steps),
            PlanMode::Periodic => {
                let per_year = 1.0 / self.period;
                match per_year.round() as i64 {
                    252 if (per_year - 252.0).abs() < 1e-9 => write!(f, "daily"),
                    52 if (per_year - 52.0).abs() < 1e-9 => write!(f, "weekly"),
                    12 if (per_year - 12.0).abs() < 1e-9 => write!(f, "monthly"),
                    _ => write!(f, "every{}", self.period),
                }
            }
        }
    }
}

impl FromStr for RebalancePlan {
    type Err = DblError;

    /// `continuous`, `continuousN`, `daily`, `weekly`, `monthly` or `everyP` with `P` in years.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || DblError::InvalidInput { module: MODULE, detail: format!("unknown rebalancing plan '{s}'") };
        match s {
            "continuous" => Ok(Self::continuous()),
            "daily" => Ok(Self::daily()),
            "weekly" => Ok(Self::weekly()),
            "monthly" => Ok(Self::monthly()),
            _ => {
                if let Some(n) = s.strip_prefix("continuous") {
                    let plan = Self::continuous_with(n.parse().map_err(|_| bad())?);
                    plan.validate()?;
                    Ok(plan)
                } else if let Some(p) = s.strip_prefix("every") {
                    Self::periodic(p.parse().map_err(|_| bad())?)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Sorted union of time sets, merging points closer than `1e-12`, with `horizon` appended.
pub fn union_grid(sets: &[Vec<f64>], horizon: f64) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flatten().copied().filter(|t| *t < horizon - 1e-12).collect();
    all.push(0.0);
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let mut out: Vec<f64> = Vec::with_capacity(all.len() + 1);
    for t in all {
        if out.last().is_none_or(|last| t - last > 1e-12) {
            out.push(t);
        }
    }
    out.push(horizon);
    out
}

/// Index of the grid node closest to `t`.
pub fn grid_index(grid: &[f64], t: f64) -> usize {
    let pos = grid.partition_point(|g| *g < t);
    if pos == 0 {
        0
    } else if pos == grid.len() || (t - grid[pos - 1]) <= (grid[pos] - t) {
        pos - 1
    } else {
        pos
    }
}
