//! Small statistics kit: two-sample Kolmogorov–Smirnov, batch means,
//! autocorrelation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Significance level used for pass/fail decisions.
pub const KS_LEVEL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Whether equality is rejected at [`KS_LEVEL`].
    pub reject: bool,
}

/// Asymptotic Kolmogorov tail `Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS statistic with the asymptotic p-value (with the usual
/// small-sample correction of the effective size).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Statistics("two-sample test needs nonempty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let p = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    Ok(KsResult { statistic: d, p_value: p, reject: p < KS_LEVEL })
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Mean and standard error of independent values.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let m = mean(x);
    if n < 2 {
        return (m, f64::INFINITY);
    }
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_means(series: &[f64], n_batches: usize) -> Result<(f64, f64)> {
    if n_batches < 2 || series.len() < n_batches {
        return Err(Error::Statistics(format!(
            "{} values cannot form {n_batches} batches",
            series.len()
        )));
    }
    let per = series.len() / n_batches;
    let means: Vec<f64> = (0..n_batches).map(|b| mean(&series[b * per..(b + 1) * per])).collect();
    let (_, se) = mean_se(&means);
    Ok((mean(&series[..per * n_batches]), se))
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(x: &[f64]) -> f64 {
    let m = mean(x);
    let var: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / var
}
