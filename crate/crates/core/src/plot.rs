//! Gnuplot scripts for the tables written by a run.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Distinct values of column `col` in a CSV file, in first-seen order.
fn column_values(path: &Path, col: &str) -> io::Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).map_err(io::Error::other)?;
    let idx = rdr
        .headers()
        .map_err(io::Error::other)?
        .iter()
        .position(|h| h == col)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("{}: no column '{col}'", path.display())))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let v = rec.map_err(io::Error::other)?[idx].to_string();
        if seen.insert(v.clone()) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Rows of `file` where every `(column number, value)` pair matches, as a
/// gnuplot data source.
fn filtered(file: &str, conds: &[(usize, &str)]) -> String {
    let test = conds.iter().map(|(c, v)| format!("${c}==\\\"{v}\\\"")).collect::<Vec<_>>().join(" && ");
    format!("\"< awk -F, 'NR>1 && {test}' {file}\"")
}

fn header(out: &str) -> String {
    format!("set datafile separator ','\nset terminal pngcairo size 900,600\nset output '{out}'\nset key outside right\nset grid\n")
}

/// Writes `frontier.gp`, `cer.gp` and, when present, `revisions.gp` into `dir`
/// for the tables there, and returns their paths. Scripts are meant to be run
/// from inside `dir`.
pub fn write_gnuplot_scripts(dir: &Path, plan: &str) -> io::Result<Vec<PathBuf>> {
    let frontier = dir.join("frontier.csv");
    let policies = column_values(&frontier, "policy")?;
    let alphas = column_values(&frontier, "alpha")?;
    let mut written = Vec::new();

    let mut s = header("frontier.png");
    s.push_str(&format!("set title 'Mean-std frontier, {plan} rebalancing'\nset xlabel 'std of return'\nset ylabel 'mean return'\nplot \\\n"));
    let mut curves = Vec::new();
    for p in &policies {
        for a in &alphas {
            curves.push(format!("  {} using 6:5 with linespoints title '{p} alpha={a}'", filtered("frontier.csv", &[(1, p), (2, a), (4, plan)])));
        }
    }
    s.push_str(&curves.join(", \\\n"));
    s.push('\n');
    written.push(dir.join("frontier.gp"));
    fs::write(written.last().expect("just pushed"), s)?;

    let mut s = header("cer.png");
    s.push_str(&format!("set title 'Certainty-equivalent return, {plan} rebalancing'\nset xlabel 'gamma'\nset ylabel 'CER'\nplot \\\n"));
    let mut curves = Vec::new();
    for p in &policies {
        for a in &alphas {
            curves.push(format!("  {} using 3:5:6 with yerrorlines title '{p} alpha={a}'", filtered("cer.csv", &[(1, p), (2, a), (4, plan)])));
        }
    }
    s.push_str(&curves.join(", \\\n"));
    s.push('\n');
    written.push(dir.join("cer.gp"));
    fs::write(written.last().expect("just pushed"), s)?;

    let revisions = dir.join("revisions_cer.csv");
    if revisions.exists() {
        let schedules = column_values(&revisions, "schedule")?;
        let mut s = header("revisions.png");
        s.push_str("set title 'CER by revision schedule'\nset xlabel 'alpha'\nset ylabel 'CER'\nplot \\\n");
        let curves: Vec<String> = schedules
            .iter()
            .map(|sc| format!("  {} using 2:5:6 with yerrorlines title '{sc}'", filtered("revisions_cer.csv", &[(1, sc)])))
            .collect();
        s.push_str(&curves.join(", \\\n"));
        s.push('\n');
        written.push(dir.join("revisions.gp"));
        fs::write(written.last().expect("just pushed"), s)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_name_every_curve() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("frontier.csv"),
            "policy,alpha,gamma,plan,mean,std,se_mean\nDBL,0.4,2,weekly,0.1,0.2,0.01\nRCBL,0.4,2,weekly,0.1,0.3,0.01\nDBL,0.8,2,weekly,0.1,0.2,0.01\n",
        )
        .unwrap();
        let files = write_gnuplot_scripts(dir.path(), "weekly").unwrap();
        assert_eq!(files.len(), 2);
        let f = fs::read_to_string(&files[0]).unwrap();
        for t in ["DBL alpha=0.4", "DBL alpha=0.8", "RCBL alpha=0.4", "RCBL alpha=0.8"] {
            assert!(f.contains(t), "{f}");
        }
        assert!(f.contains(r#"$1==\"DBL\" && $2==\"0.4\" && $4==\"weekly\""#));
    }

    #[test]
    fn missing_table_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_gnuplot_scripts(dir.path(), "weekly").is_err());
    }
}
