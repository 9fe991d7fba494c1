//! Monte-Carlo lab: wealth simulation under rebalancing plans, certainty
//! equivalents, turnover and investor comparisons on common random numbers.

pub mod experiment;
pub mod model;
pub mod output;
pub mod plan;
pub mod stats;
pub mod wealth;

pub use experiment::{run_comparison, run_revision_study, ComparisonReport, ComparisonSpec, ConfigRow, RevisionStudySpec};
pub use model::{PolicyKind, ViewStructure};
pub use plan::{union_grid, PlanMode, RebalancePlan, DEFAULT_FINE_GRID_STEPS};
pub use stats::{certainty_equivalent, mean_std_se, spearman, Estimate};
pub use wealth::{simulate_wealth, turnover, PathOutcome, TracePoint, WealthSimulation, WealthSummary};
