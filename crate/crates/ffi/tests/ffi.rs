use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use dbl_core::conditional::ConditionalCoefficients;
use dbl_core::market::make_omega_alpha;
use dbl_core::policy::solve_dynamic_policy;
use dbl_core::presets::{five_asset_market, five_asset_pick};
use dbl_ffi::*;
use nalgebra::DVector;

fn row_major(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        dbl_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn policy_matches_the_library() {
    let m = five_asset_market();
    let p = five_asset_pick();
    let om = make_omega_alpha(&m, &p, 0.4).unwrap();
    let y = [0.02, -0.05, 0.04];
    let mut market = ptr::null_mut();
    let mut policy = ptr::null_mut();
    unsafe {
        let st = dbl_market_new(5, m.mu().as_ptr(), row_major(m.sigma()).as_ptr(), m.r_f(), m.horizon(), &mut market);
        assert_eq!(st, DblStatus::Ok);
        assert_eq!(dbl_market_n_assets(market), 5);
        let st = dbl_policy_new(market, 3, row_major(&p).as_ptr(), row_major(&om).as_ptr(), y.as_ptr(), 5.0, &mut policy);
        assert_eq!(st, DblStatus::Ok, "{}", last_error());
    }
    let sol = solve_dynamic_policy(&ConditionalCoefficients::from_parts(&m, &p, &om, 1.0, &DVector::from_column_slice(&y)).unwrap(), 5.0).unwrap();
    let x = [0.01, -0.02, 0.0, 0.03, 0.01];
    let (mut total, mut hedging, mut merton) = ([0.0; 5], [0.0; 5], [0.0; 5]);
    unsafe {
        assert_eq!(dbl_policy_weights(policy, 0.3, x.as_ptr(), total.as_mut_ptr(), hedging.as_mut_ptr()), DblStatus::Ok);
        assert_eq!(dbl_market_merton_weights(market, 5.0, merton.as_mut_ptr()), DblStatus::Ok);
    }
    let w = sol.weights(0.3, &DVector::from_column_slice(&x));
    assert!((DVector::from_column_slice(&total) - w.total()).amax() < 1e-14);
    assert!((DVector::from_column_slice(&hedging) - &w.hedging).amax() < 1e-14);
    assert!((DVector::from_column_slice(&merton) - m.merton_weights(5.0)).amax() < 1e-14);
    let mut rebal = [0.0; 5];
    unsafe {
        assert_eq!(dbl_policy_rebalancing_weights(policy, 0.3, x.as_ptr(), rebal.as_mut_ptr()), DblStatus::Ok);
        assert_eq!(dbl_policy_weights(policy, 1.5, x.as_ptr(), total.as_mut_ptr(), ptr::null_mut()), DblStatus::InvalidInput);
        dbl_policy_free(policy);
        dbl_market_free(market);
    }
    assert!(rebal.iter().all(|v| v.is_finite()));
}

#[test]
fn errors_map_to_status_codes() {
    let mu = [0.08, 0.05];
    let bad = [0.04, 0.05, 0.05, 0.02];
    let good = [0.04, 0.01, 0.01, 0.02];
    let mut market = ptr::null_mut();
    unsafe {
        assert_eq!(dbl_market_new(2, mu.as_ptr(), bad.as_ptr(), 0.02, 1.0, &mut market), DblStatus::NotPositiveDefinite);
        assert!(market.is_null());
        assert!(last_error().contains("positive definite"));
        assert_eq!(dbl_market_new(2, ptr::null(), good.as_ptr(), 0.02, 1.0, &mut market), DblStatus::NullPointer);
        assert_eq!(dbl_market_new(2, mu.as_ptr(), good.as_ptr(), 0.02, 1.0, &mut market), DblStatus::Ok);
        let mut policy = ptr::null_mut();
        let (pick, om, y) = ([1.0, -1.0], [0.02], [0.05]);
        assert_eq!(dbl_policy_new(market, 1, pick.as_ptr(), om.as_ptr(), y.as_ptr(), 0.9, &mut policy), DblStatus::GammaOutOfRange);
        let zero = [0.0];
        assert_eq!(dbl_policy_new(market, 1, pick.as_ptr(), zero.as_ptr(), y.as_ptr(), 3.0, &mut policy), DblStatus::NotPositiveDefinite);
        let nan = [f64::NAN];
        assert_eq!(dbl_policy_new(market, 1, pick.as_ptr(), om.as_ptr(), nan.as_ptr(), 3.0, &mut policy), DblStatus::InvalidInput);
        assert!(policy.is_null());
        dbl_market_free(market);
        dbl_market_free(ptr::null_mut());
        dbl_policy_free(ptr::null_mut());
        assert_eq!(dbl_last_error_message(ptr::null_mut(), 0), last_error().len());
        assert_eq!(CStr::from_ptr(dbl_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libdbl_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("dbl_smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("dbl "));
}
