use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_dbl");

fn small_scenario(dir: &Path) -> std::path::PathBuf {
    let out = Command::new(BIN).arg("example").output().unwrap();
    assert!(out.status.success());
    let path = dir.join("scenario.json");
    fs::write(&path, out.stdout).unwrap();
    path
}

fn dbl(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("DBL_OUT_DIR");
    if let Some(d) = env_out {
        cmd.env("DBL_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

const FAST: [&str; 6] = [
    "--set",
    "experiment.n_paths=300",
    "--set",
    "revision_study.n_paths=200",
    "--set",
    "experiment.plans=[\"weekly\",\"monthly\"]",
];

#[test]
fn bundled_run_writes_all_tables() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let out = dir.path().join("out");
    let mut args = vec!["run", s.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(FAST);
    let r = dbl(&args, None);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["frontier.csv", "cer.csv", "turnover.csv", "revisions_cer.csv", "metadata.json", "summary.txt"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let header = fs::read_to_string(out.join("frontier.csv")).unwrap();
    assert!(header.starts_with("policy,alpha,gamma,plan,mean,std,se_mean\n"));
    assert!(!out.join("paths.csv").exists());
}

#[test]
fn same_seed_gives_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let mut outs = Vec::new();
    for (k, threads) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("out{k}"));
        let mut args = vec!["run", s.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads, "--set", "experiment.seed=42"];
        args.extend(FAST);
        assert_eq!(dbl(&args, None).status.code(), Some(0));
        outs.push(out);
    }
    for f in ["frontier.csv", "cer.csv", "turnover.csv", "revisions_cer.csv", "metadata.json"] {
        assert_eq!(fs::read(outs[0].join(f)).unwrap(), fs::read(outs[1].join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn env_var_sets_output_dir_and_paths_are_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let out = dir.path().join("env_out");
    let mut args = vec!["run", s.to_str().unwrap(), "--set", "experiment.dump_paths=2", "--set", "revision_study=null"];
    args.extend(&FAST[..2]);
    let r = dbl(&args, Some(&out));
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let paths = fs::read_to_string(out.join("paths.csv")).unwrap();
    assert!(paths.starts_with("path_id,t,asset_index,log_return,price\n"));
    assert!(!out.join("revisions_cer.csv").exists());
}

#[test]
fn invalid_gamma_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let r = dbl(&["run", s.to_str().unwrap(), "--set", "experiment.gammas=[0.5]", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("gamma"));
}

#[test]
fn unknown_field_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let r = dbl(&["run", s.to_str().unwrap(), "--set", "experiment.colour=1"], None);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("colour"));
    let r = dbl(&["run", dir.path().join("nope.json").to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn strict_run_with_bankrupt_paths_exits_3_and_names_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let out = dir.path().join("out");
    let args = [
        "run",
        s.to_str().unwrap(),
        "--strict",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "experiment.gammas=[1.2]",
        "--set",
        "experiment.plans=[\"monthly\"]",
        "--set",
        "experiment.n_paths=2000",
        "--set",
        "revision_study=null",
    ];
    let r = dbl(&args, None);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("BankruptcyUnderflow"));
    let lenient = dbl(&args.iter().copied().filter(|a| *a != "--strict").collect::<Vec<_>>(), None);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning"));
}

#[test]
fn quick_verify_passes() {
    let r = dbl(&["verify", "--level", "quick"], None);
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert_eq!(r.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 8);
}

#[test]
fn gnuplot_scripts_follow_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let out = dir.path().join("out");
    let mut args = vec!["run", s.to_str().unwrap()];
    args.extend(FAST);
    assert_eq!(dbl(&args, Some(&out)).status.code(), Some(0));
    let r = dbl(&["gnuplot", out.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0));
    for f in ["frontier.gp", "cer.gp", "revisions.gp"] {
        assert!(out.join(f).exists());
    }
    assert_eq!(dbl(&["gnuplot", dir.path().join("empty").to_str().unwrap()], None).status.code(), Some(1));
}
