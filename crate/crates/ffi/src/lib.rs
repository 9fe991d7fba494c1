//! C interface to the dynamic policy solver.
//!
//! Markets and policies are opaque heap handles created by `dbl_*_new` and
//! released by the matching `dbl_*_free`. Every fallible call returns a
//! [`DblStatus`]; the message of the last failure on the calling thread is
//! available from [`dbl_last_error_message`]. Matrices are dense row-major
//! `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dbl_core::conditional::ConditionalCoefficients;
use dbl_core::market::MarketModel;
use dbl_core::policy::{aged_view_portfolio, solve_dynamic_policy, PolicySolution};
use dbl_core::DblError;
use nalgebra::{DMatrix, DVector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DblStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NotPositiveDefinite = 3,
    Singular = 4,
    GammaOutOfRange = 5,
    Panic = 99,
}

/// Opaque market: drifts, covariance, risk-free rate and horizon.
pub struct DblMarket {
    inner: MarketModel,
}

/// Opaque dynamic policy for one view and one risk aversion.
pub struct DblPolicy {
    inner: PolicySolution,
    gamma: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &DblError) -> DblStatus {
    match e {
        DblError::NotPositiveDefinite { .. } => DblStatus::NotPositiveDefinite,
        DblError::SingularObservationCov
        | DblError::SingularInnerBlock
        | DblError::DegeneratePick
        | DblError::SingularViewGram { .. }
        | DblError::SingularOmega => DblStatus::Singular,
        DblError::GammaOutOfRange { .. } => DblStatus::GammaOutOfRange,
        _ => DblStatus::InvalidInput,
    }
}

struct Failure(DblStatus, String);

impl From<DblError> for Failure {
    fn from(e: DblError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DblStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records its failure message and converts panics to `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DblStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DblStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DblStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or point to `len` writable doubles.
unsafe fn write_out(p: *mut f64, v: &DVector<f64>, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts_mut(p, v.len()).copy_from_slice(v.as_slice());
    Ok(())
}

fn finite(v: &[f64], what: &str) -> Result<(), Failure> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Failure(DblStatus::InvalidInput, format!("{what} contains a non-finite value")))
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dbl_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// NUL-terminated when `len > 0`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dbl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a market with `n` assets. `mu` has `n` entries and `sigma` holds
/// the `n × n` covariance.
///
/// # Safety
/// Pointers must be valid for the stated sizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dbl_market_new(
    n: usize,
    mu: *const f64,
    sigma: *const f64,
    r_f: f64,
    horizon: f64,
    out: *mut *mut DblMarket,
) -> DblStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err(Failure(DblStatus::InvalidInput, "n must be positive".into()));
        }
        let mu = slice(mu, n, "mu")?;
        let sigma = slice(sigma, n * n, "sigma")?;
        finite(mu, "mu")?;
        finite(sigma, "sigma")?;
        let inner = MarketModel::new(DVector::from_column_slice(mu), DMatrix::from_row_slice(n, n, sigma), r_f, horizon)?;
        *out = Box::into_raw(Box::new(DblMarket { inner }));
        Ok(())
    })
}

/// Releases a market; null is ignored.
///
/// # Safety
/// `market` must come from [`dbl_market_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dbl_market_free(market: *mut DblMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Number of assets of a market, 0 for null.
///
/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dbl_market_n_assets(market: *const DblMarket) -> usize {
    market.as_ref().map(|m| m.inner.n_assets()).unwrap_or(0)
}

/// Writes the view-free constant-coefficient portfolio `Σ⁻¹(μ − r_f)/γ`.
///
/// # Safety
/// `market` must be live and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dbl_market_merton_weights(market: *const DblMarket, gamma: f64, out: *mut f64) -> DblStatus {
    guard(|| {
        let m = market.as_ref().ok_or_else(|| null("market"))?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(DblError::GammaOutOfRange { gamma }.into());
        }
        write_out(out, &m.inner.merton_weights(gamma), "out")
    })
}

/// Solves the dynamic policy for `k` views `y = P X(T) + ε`, `ε ~ N(0, T Ω)`.
/// `pick` is `k × n`, `omega` is the `k × k` noise covariance per unit time
/// and `gamma ≥ 1` (1 is log utility).
///
/// # Safety
/// Pointers must be valid for the stated sizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dbl_policy_new(
    market: *const DblMarket,
    k: usize,
    pick: *const f64,
    omega: *const f64,
    y: *const f64,
    gamma: f64,
    out: *mut *mut DblPolicy,
) -> DblStatus {
    guard(|| {
        let m = market.as_ref().ok_or_else(|| null("market"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if k == 0 {
            return Err(Failure(DblStatus::InvalidInput, "k must be positive".into()));
        }
        let n = m.inner.n_assets();
        let pick = slice(pick, k * n, "pick")?;
        let omega = slice(omega, k * k, "omega")?;
        let y = slice(y, k, "y")?;
        for (v, what) in [(pick, "pick"), (omega, "omega"), (y, "y")] {
            finite(v, what)?;
        }
        let coeffs = ConditionalCoefficients::from_parts(
            &m.inner,
            &DMatrix::from_row_slice(k, n, pick),
            &DMatrix::from_row_slice(k, k, omega),
            m.inner.horizon(),
            &DVector::from_column_slice(y),
        )?;
        let inner = solve_dynamic_policy(&coeffs, gamma)?;
        *out = Box::into_raw(Box::new(DblPolicy { inner, gamma }));
        Ok(())
    })
}

/// Releases a policy; null is ignored.
///
/// # Safety
/// `policy` must come from [`dbl_policy_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dbl_policy_free(policy: *mut DblPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

fn state<'a>(p: &'a DblPolicy, t: f64, x: &[f64]) -> Result<(DVector<f64>, &'a DblPolicy), Failure> {
    let horizon = p.inner.coeffs().market().horizon();
    if !(0.0..=horizon).contains(&t) {
        return Err(Failure(DblStatus::InvalidInput, format!("t = {t} lies outside [0, {horizon}]")));
    }
    finite(x, "x")?;
    Ok((DVector::from_column_slice(x), p))
}

/// Risky weights at time `t` and cumulative log-return `x` (`n` entries).
/// `out_total` receives mean-variance plus hedging demand; `out_hedging`
/// may be null and otherwise receives the hedging part alone.
///
/// # Safety
/// `policy` must be live; `x` and the outputs must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dbl_policy_weights(
    policy: *const DblPolicy,
    t: f64,
    x: *const f64,
    out_total: *mut f64,
    out_hedging: *mut f64,
) -> DblStatus {
    guard(|| {
        let p = policy.as_ref().ok_or_else(|| null("policy"))?;
        let n = p.inner.coeffs().market().n_assets();
        let (x, p) = state(p, t, slice(x, n, "x")?)?;
        let w = p.inner.weights(t, &x);
        write_out(out_total, &w.total(), "out_total")?;
        if !out_hedging.is_null() {
            write_out(out_hedging, &w.hedging, "out_hedging")?;
        }
        Ok(())
    })
}

/// Weights of the investor who re-solves the single-period problem at `t`
/// with the same view treated as fresh, for comparison.
///
/// # Safety
/// `policy` must be live; `x` and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dbl_policy_rebalancing_weights(policy: *const DblPolicy, t: f64, x: *const f64, out: *mut f64) -> DblStatus {
    guard(|| {
        let p = policy.as_ref().ok_or_else(|| null("policy"))?;
        let n = p.inner.coeffs().market().n_assets();
        let (x, p) = state(p, t, slice(x, n, "x")?)?;
        let w = aged_view_portfolio(p.inner.coeffs(), p.gamma, t, &x)?;
        write_out(out, &w, "out")
    })
}
