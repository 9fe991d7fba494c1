//! CSV tables and run metadata.

use std::io::Write;

use serde::Serialize;

use super::experiment::ComparisonReport;

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `policy,alpha,gamma,plan,mean,std,se_mean`: mean and std of `Z(T)/z0 − 1`.
pub fn write_frontier<W: Write>(report: &ComparisonReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["policy", "alpha", "gamma", "plan", "mean", "std", "se_mean"])?;
    for r in &report.rows {
        let s = &r.summary;
        out.write_record([
            r.policy.as_str().to_string(),
            r.alpha.to_string(),
            r.gamma.to_string(),
            r.plan.clone(),
            s.mean.to_string(),
            s.std.to_string(),
            s.se_mean.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `policy,alpha,gamma,plan,cer,se,bankrupt`; CER is empty when a path went bankrupt.
pub fn write_cer<W: Write>(report: &ComparisonReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["policy", "alpha", "gamma", "plan", "cer", "se", "bankrupt"])?;
    for r in &report.rows {
        let s = &r.summary;
        out.write_record([
            r.policy.as_str().to_string(),
            r.alpha.to_string(),
            r.gamma.to_string(),
            r.plan.clone(),
            opt(s.cer.map(|c| c.value)),
            opt(s.cer.map(|c| c.se)),
            s.bankrupt.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `policy,alpha,gamma,plan,turnover,se,n_epochs,fine_grid_steps`.
pub fn write_turnover<W: Write>(report: &ComparisonReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["policy", "alpha", "gamma", "plan", "turnover", "se", "n_epochs", "fine_grid_steps"])?;
    for r in &report.rows {
        let steps = report.plans.iter().find(|(n, _)| *n == r.plan).map(|(_, s)| *s).unwrap_or_default();
        out.write_record([
            r.policy.as_str().to_string(),
            r.alpha.to_string(),
            r.gamma.to_string(),
            r.plan.clone(),
            r.summary.turnover.value.to_string(),
            r.summary.turnover.se.to_string(),
            r.n_epochs.to_string(),
            steps.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `schedule,alpha,gamma,plan,cer,se,bankrupt` for a revision study.
pub fn write_revisions_cer<W: Write>(report: &ComparisonReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["schedule", "alpha", "gamma", "plan", "cer", "se", "bankrupt"])?;
    for r in &report.rows {
        let s = &r.summary;
        out.write_record([
            r.structure.clone(),
            r.alpha.to_string(),
            r.gamma.to_string(),
            r.plan.clone(),
            opt(s.cer.map(|c| c.value)),
            opt(s.cer.map(|c| c.se)),
            s.bankrupt.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `path_id,t,asset_index,log_return,price` for the kept paths (`S(0) = 1`).
pub fn write_paths<W: Write>(report: &ComparisonReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["path_id", "t", "asset_index", "log_return", "price"])?;
    for (p, x) in report.kept_paths.iter().enumerate() {
        for (k, t) in report.grid.iter().enumerate() {
            for i in 0..x.ncols() {
                let v = x[(k, i)];
                out.write_record([p.to_string(), t.to_string(), i.to_string(), v.to_string(), v.exp().to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reproducibility record written next to the tables.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub library_version: String,
    pub scenario_version: u32,
    pub seed: u64,
    pub n_paths: usize,
    pub z0: f64,
    pub grid_nodes: usize,
    pub plans: Vec<PlanMetadata>,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub path_digest: Option<String>,
    pub revision_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanMetadata {
    pub name: String,
    pub fine_grid_steps: usize,
}

impl RunMetadata {
    pub fn from_report(report: &ComparisonReport, scenario_version: u32, alphas: Vec<f64>, gammas: Vec<f64>) -> Self {
        Self {
            library_version: crate::VERSION.to_string(),
            scenario_version,
            seed: report.seed,
            n_paths: report.n_paths,
            z0: report.z0,
            grid_nodes: report.grid.len(),
            plans: report.plans.iter().map(|(name, s)| PlanMetadata { name: name.clone(), fine_grid_steps: *s }).collect(),
            alphas,
            gammas,
            path_digest: report.path_digest.clone(),
            revision_seed: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{run_comparison, ComparisonSpec, RebalancePlan, ViewStructure};
    use crate::presets::{five_asset_market, five_asset_pick};

    #[test]
    fn tables_have_headers_and_one_row_per_config() {
        let m = five_asset_market();
        let s = ViewStructure::single(&m, five_asset_pick());
        let mut spec = ComparisonSpec::new(m, s, vec![0.4], vec![2.0, 5.0], vec![RebalancePlan::monthly()], 16, 3);
        spec.keep_paths = 2;
        let r = run_comparison(&spec).unwrap();
        let mut buf = Vec::new();
        write_frontier(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "policy,alpha,gamma,plan,mean,std,se_mean");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("DBL,0.4,2,monthly,"));
        let mut buf = Vec::new();
        write_paths(&r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * r.grid.len() * 5);
    }
}
