//! Aggregates with standard errors.

use crate::error::{DblError, Result};

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.se
    }
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.se
    }
    /// True when the `k`-SE bands of `self` and `other` do not overlap and `self` is above.
    pub fn separated_above(&self, other: &Estimate, k: f64) -> bool {
        self.lower(k) > other.upper(k)
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Sample mean, sample standard deviation and standard error of the mean.
pub fn mean_std_se(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let std = (pairwise_sum(&dev) / (n - 1) as f64).sqrt();
    (mean, std, std / (n as f64).sqrt())
}

pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let (value, _, se) = mean_std_se(xs);
    Estimate { value, se }
}

/// Certainty-equivalent rate `r_c` solving `U(z₀e^{r_c T}) = E[U(Z(T))]`
/// for CRRA utility, with a delta-method standard error.
///
/// Computed in log space: `r_c = ln(mean(exp((1−γ)ℓ)))/((1−γ)T)` with
/// `ℓ = ln(Z/z₀)`. `γ = 1` uses log utility, `r_c = mean(ℓ)/T`.
pub fn certainty_equivalent(terminal_wealth: &[f64], gamma: f64, z0: f64, horizon: f64) -> Result<Estimate> {
    if terminal_wealth.is_empty() || terminal_wealth.iter().any(|z| !(*z > 0.0)) || !(z0 > 0.0) {
        return Err(DblError::NonPositiveWealth);
    }
    let logs: Vec<f64> = terminal_wealth.iter().map(|z| (z / z0).ln()).collect();
    if gamma == 1.0 {
        let e = mean_estimate(&logs);
        return Ok(Estimate { value: e.value / horizon, se: e.se / horizon });
    }
    let k = 1.0 - gamma;
    let scaled: Vec<f64> = logs.iter().map(|l| k * l).collect();
    let shift = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = scaled.iter().map(|s| (s - shift).exp()).collect();
    let (m, _, se_m) = mean_std_se(&w);
    let value = (m.ln() + shift) / (k * horizon);
    let se = se_m / (m * k.abs() * horizon);
    Ok(Estimate { value, se })
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite values"));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
