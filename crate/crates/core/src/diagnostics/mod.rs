//! Convergence diagnostics for parallel chains.
//!
//! The Geweke statistic here compares the early window of a chain with its
//! late window using the plain sample variances of the two windows, not
//! spectral-density estimates of the variance of their means. Gelman-Rubin
//! is the potential scale reduction factor without the degrees-of-freedom
//! correction.

mod burn_in;
mod metrics;

pub use burn_in::{detect_burn_in, BurnIn, DiagnosticsReport, MetricDiagnostics, Thresholds};
pub use metrics::{metric_series, MetricKind, MetricSeries};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("sequence of length {len} is too short (need {min})")]
    TooShort { len: usize, min: usize },
    #[error("window fractions must satisfy 0 < a, 0 < b, a + b <= 1 (got {0}, {1})")]
    BadFractions(f64, f64),
    #[error("statistic undefined: zero variance")]
    ZeroVariance,
    #[error("need at least {min} chains, got {got}")]
    TooFewChains { got: usize, min: usize },
    #[error("chains have different lengths")]
    UnequalLengths,
    #[error("checkpoints must be at least 1")]
    NoCheckpoints,
    #[error("no metric given")]
    NoMetrics,
}

pub const GEWEKE_FRAC_A: f64 = 0.1;
pub const GEWEKE_FRAC_B: f64 = 0.5;
pub const GEWEKE_MIN_LEN: usize = 20;
pub const GELMAN_RUBIN_MIN_LEN: usize = 10;

pub(crate) fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// `(mean(X_a) - mean(X_b)) / sqrt(var(X_a) + var(X_b))` where `X_a` is the
/// first `frac_a` and `X_b` the last `frac_b` of `x`.
pub fn geweke_z(x: &[f64], frac_a: f64, frac_b: f64) -> Result<f64, DiagnosticsError> {
    let (ma, mb, denom) = geweke_parts(x, frac_a, frac_b)?;
    if denom == 0.0 {
        return Err(DiagnosticsError::ZeroVariance);
    }
    Ok((ma - mb) / denom)
}

/// Means of both windows and the denominator, which may be zero.
pub(crate) fn geweke_parts(x: &[f64], frac_a: f64, frac_b: f64) -> Result<(f64, f64, f64), DiagnosticsError> {
    if !(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0) {
        return Err(DiagnosticsError::BadFractions(frac_a, frac_b));
    }
    let n = x.len();
    let na = (frac_a * n as f64).floor() as usize;
    let nb = (frac_b * n as f64).floor() as usize;
    if n < GEWEKE_MIN_LEN || na < 2 || nb < 2 {
        return Err(DiagnosticsError::TooShort { len: n, min: GEWEKE_MIN_LEN });
    }
    let (ma, va) = mean_var(&x[..na]);
    let (mb, vb) = mean_var(&x[n - nb..]);
    Ok((ma, mb, (va + vb).sqrt()))
}

/// Evenly spaced checkpoints `j * n / count` for `j = 1..=count`, deduplicated.
pub fn checkpoints(n: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=count).map(|j| j * n / count).filter(|&t| t > 0).collect();
    out.dedup();
    out
}

/// Geweke z on growing prefixes ending at evenly spaced checkpoints.
pub fn geweke_series(x: &[f64], count: usize) -> Result<Vec<(usize, f64)>, DiagnosticsError> {
    if count == 0 {
        return Err(DiagnosticsError::NoCheckpoints);
    }
    checkpoints(x.len(), count)
        .into_iter()
        .map(|t| geweke_z(&x[..t], GEWEKE_FRAC_A, GEWEKE_FRAC_B).map(|z| (t, z)))
        .collect()
}

/// Potential scale reduction `sqrt(((n-1)/n W + B/n) / W)` with `W` the mean
/// within-chain variance and `B = n * var(chain means)`.
pub fn gelman_rubin_r<S: AsRef<[f64]>>(chains: &[S]) -> Result<f64, DiagnosticsError> {
    if chains.len() < 2 {
        return Err(DiagnosticsError::TooFewChains { got: chains.len(), min: 2 });
    }
    let n = chains[0].as_ref().len();
    if chains.iter().any(|c| c.as_ref().len() != n) {
        return Err(DiagnosticsError::UnequalLengths);
    }
    if n < GELMAN_RUBIN_MIN_LEN {
        return Err(DiagnosticsError::TooShort { len: n, min: GELMAN_RUBIN_MIN_LEN });
    }
    let stats: Vec<(f64, f64)> = chains.iter().map(|c| mean_var(c.as_ref())).collect();
    let m = chains.len() as f64;
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    if w <= 0.0 {
        return Err(DiagnosticsError::ZeroVariance);
    }
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let var_means = stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let nf = n as f64;
    let b = nf * var_means;
    Ok((((nf - 1.0) / nf * w + b / nf) / w).sqrt())
}

/// Every `r`-th element starting at index 0.
pub fn thin(x: &[f64], r: usize) -> Vec<f64> {
    assert!(r >= 1, "thinning interval must be at least 1");
    x.iter().step_by(r).copied().collect()
}
