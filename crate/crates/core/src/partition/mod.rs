//! Pure and total partition functions: closed forms, the deterministic
//! inequality suite, the `C_j` decomposition, and Monte Carlo estimation
//! of `f_alpha` at `kappa = 8/3`, where the interaction term reduces to the
//! indicator that independent chords are pairwise disjoint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_patterns, LinkPattern};
use crate::error::{Error, Result};
use crate::geometry::polylines_touch;
use crate::loewner::sample_chord;
use crate::rng::rng_for;

/// Largest `N` for the sums over all link patterns.
pub const MAX_SUM_LINKS: usize = 8;

/// Relative resolution of the chords sampled for `f_alpha`.
pub const DEFAULT_CHORD_RESOLUTION: f64 = 0.03;

/// Segments closer than this multiple of the shorter segment length count
/// as touching when deciding disjointness.
pub const DISJOINTNESS_TUBE: f64 = 0.5;

const CHUNK: usize = 128;

/// Strictly increasing boundary points `x_1 < ... < x_{2N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    points: Vec<f64>,
}

impl BoundaryConfig {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() % 2 != 0 {
            return Err(Error::invalid(format!("need an even, positive number of points, got {}", points.len())));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("boundary points must be finite"));
        }
        if points.windows(2).any(|w| !(w[1] - w[0] > 1e-12)) {
            return Err(Error::invalid("boundary points must increase with gaps above 1e-12"));
        }
        Ok(BoundaryConfig { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_links(&self) -> usize {
        self.points.len() / 2
    }

    /// 1-based access.
    pub fn x(&self, i: usize) -> f64 {
        self.points[i - 1]
    }
}

/// `sum_{i<j} 2h (-1)^{j-i} log(x_j - x_i)`.
pub fn log_alternating_product(x: &BoundaryConfig, h: f64) -> f64 {
    let p = x.points();
    let mut s = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * (p[j] - p[i]).ln();
        }
    }
    2.0 * h * s
}

/// `prod_{i<j} (x_j - x_i)^{2h (-1)^{j-i}}`.
pub fn alternating_product(x: &BoundaryConfig, h: f64) -> f64 {
    log_alternating_product(x, h).exp()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|a| (a - m).exp()).sum::<f64>().ln()
}

/// `log prod_{(a,b) in alpha} |x_b - x_a|^{-2h}`.
pub fn log_link_product(x: &BoundaryConfig, alpha: &LinkPattern, h: f64) -> f64 {
    alpha.links().iter().map(|&(a, b)| -2.0 * h * (x.x(b) - x.x(a)).abs().ln()).sum()
}

/// `sum_{alpha in LP_N} prod_{(a,b) in alpha} |x_b - x_a|^{-2h}`.
pub fn nearest_pair_sum(x: &BoundaryConfig, h: f64) -> Result<f64> {
    let n = x.n_links();
    if n > MAX_SUM_LINKS {
        return Err(Error::bounds("N", n as f64, "1..=8"));
    }
    let logs: Vec<f64> = enumerate_patterns(n)?.iter().map(|a| log_link_product(x, a, h)).collect();
    Ok(log_sum_exp(&logs).exp())
}

/// `(2n - 1)!!`, exact for `n <= 10`.
pub fn odd_double_factorial(n: usize) -> Result<u64> {
    if n > 10 {
        return Err(Error::bounds("N", n as f64, "0..=10"));
    }
    Ok((1..=n as u64).map(|k| 2 * k - 1).product())
}

/// Both sides of the total bound for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n_links: usize,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `nearest_pair_sum <= (2N-1)!! * alternating_product` with
/// relative slack `1e-9`.
pub fn check_total_bound(x: &BoundaryConfig, h: f64) -> Result<BoundReport> {
    if !(h >= 0.0) {
        return Err(Error::bounds("h", h, "[0, inf)"));
    }
    let n = x.n_links();
    let lhs = nearest_pair_sum(x, h)?;
    let rhs = odd_double_factorial(n)? as f64 * alternating_product(x, h);
    Ok(BoundReport { n_links: n, h, lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-9) })
}

/// `(x4 - x1)(x3 - x2) / ((x3 - x1)(x4 - x2))`, in `(0, 1]` for ordered input.
pub fn cross_ratio(x1: f64, x2: f64, x3: f64, x4: f64) -> Result<f64> {
    if !(x1 < x2 && x2 < x3 && x3 < x4) {
        return Err(Error::invalid(format!("cross ratio needs x1 < x2 < x3 < x4, got {x1}, {x2}, {x3}, {x4}")));
    }
    Ok((x4 - x1) * (x3 - x2) / ((x3 - x1) * (x4 - x2)))
}

/// `prod_{i != k, k+1} |(x_i - x_k) / (x_i - x_{k+1})|^{2h (-1)^{i+k+1}}`
/// for 1-based `k` in `1..=2N-1`.
pub fn collapse_products(x: &BoundaryConfig, h: f64, k: usize) -> Result<f64> {
    let m = x.points().len();
    if k == 0 || k >= m {
        return Err(Error::bounds("k", k as f64, "1..=2N-1"));
    }
    let (xk, xk1) = (x.x(k), x.x(k + 1));
    let mut s = 0.0;
    for i in (1..=m).filter(|&i| i != k && i != k + 1) {
        let sign = if (i + k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let xi = x.x(i);
        s += sign * ((xi - xk) / (xi - xk1)).abs().ln();
    }
    Ok((2.0 * h * s).exp())
}

/// `Z = (x_2 - x_1)^{-2h}` for a single curve.
pub fn z_alpha_closed_n1(x: &BoundaryConfig, h: f64) -> Result<f64> {
    if x.n_links() != 1 {
        return Err(Error::invalid(format!("closed form needs N = 1, got N = {}", x.n_links())));
    }
    Ok((x.x(2) - x.x(1)).powf(-2.0 * h))
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_counts(hits: usize, samples: usize) -> McEstimate {
        let p = hits as f64 / samples as f64;
        McEstimate { mean: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples }
    }
}

/// Estimate of `f_alpha` at `kappa = 8/3`: the probability that independent
/// chordal SLE_{8/3} curves between the linked points are pairwise
/// disjoint, at the default chord resolution.
pub fn f_alpha_mc_83(x: &BoundaryConfig, alpha: &LinkPattern, samples: usize, seed: u64) -> Result<McEstimate> {
    f_alpha_mc_83_with(x, alpha, samples, seed, DEFAULT_CHORD_RESOLUTION)
}

pub fn f_alpha_mc_83_with(
    x: &BoundaryConfig,
    alpha: &LinkPattern,
    samples: usize,
    seed: u64,
    resolution: f64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::bounds("samples", 0.0, ">= 1"));
    }
    if alpha.n_links() != x.n_links() {
        return Err(Error::invalid("pattern and configuration sizes differ"));
    }
    if alpha.n_links() > 4 {
        return Err(Error::bounds("N", alpha.n_links() as f64, "1..=4"));
    }
    if alpha.n_links() == 1 {
        return Ok(McEstimate { mean: 1.0, stderr: 0.0, samples });
    }
    let chunks = samples.div_ceil(CHUNK);
    let hits: Vec<Result<usize>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0;
            for _ in 0..count {
                let chords = alpha
                    .links()
                    .iter()
                    .map(|&(a, b)| sample_chord(8.0 / 3.0, x.x(a), x.x(b), resolution, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let disjoint = (0..chords.len())
                    .all(|i| (i + 1..chords.len()).all(|j| !polylines_touch(&chords[i], &chords[j], DISJOINTNESS_TUBE)));
                hits += usize::from(disjoint);
            }
            Ok(hits)
        })
        .collect();
    let mut total = 0;
    for h in hits {
        total += h?;
    }
    Ok(McEstimate::from_counts(total, samples))
}

/// Evaluator of pure partition functions `Z_alpha(x)`.
pub trait PartitionProvider: Sync {
    fn label(&self) -> &str;

    fn evaluate(&self, x: &BoundaryConfig, alpha: &LinkPattern) -> Result<f64>;

    /// [`evaluate`](Self::evaluate), rejecting non-positive values.
    fn evaluate_checked(&self, x: &BoundaryConfig, alpha: &LinkPattern) -> Result<f64> {
        let v = self.evaluate(x, alpha)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Provider(format!("{} returned {v} at {alpha}", self.label())));
        }
        Ok(v)
    }
}

/// `Z = (x_2 - x_1)^{-2h}`; only defined for one curve.
pub struct ClosedFormN1 {
    pub h: f64,
}

impl PartitionProvider for ClosedFormN1 {
    fn label(&self) -> &str {
        "closed-form-N1"
    }

    fn evaluate(&self, x: &BoundaryConfig, _alpha: &LinkPattern) -> Result<f64> {
        z_alpha_closed_n1(x, self.h).map_err(|e| Error::Provider(e.to_string()))
    }
}

/// The upper bound `prod_links H^h`, i.e. `f_alpha = 1`.
pub struct ProductBound {
    pub h: f64,
}

impl PartitionProvider for ProductBound {
    fn label(&self) -> &str {
        "product-bound"
    }

    fn evaluate(&self, x: &BoundaryConfig, alpha: &LinkPattern) -> Result<f64> {
        Ok(log_link_product(x, alpha, self.h).exp())
    }
}

/// `Z_alpha = f_alpha * prod_links H^h` at `kappa = 8/3`, with `f_alpha`
/// estimated by Monte Carlo. Every evaluation reuses `seed`, so nearby
/// configurations see common random numbers.
pub struct MonteCarloChords {
    pub samples: usize,
    pub seed: u64,
    pub resolution: f64,
}

impl MonteCarloChords {
    pub fn new(samples: usize, seed: u64) -> Self {
        MonteCarloChords { samples, seed, resolution: DEFAULT_CHORD_RESOLUTION }
    }
}

impl PartitionProvider for MonteCarloChords {
    fn label(&self) -> &str {
        "monte-carlo-8/3"
    }

    fn evaluate(&self, x: &BoundaryConfig, alpha: &LinkPattern) -> Result<f64> {
        let f = f_alpha_mc_83_with(x, alpha, self.samples, self.seed, self.resolution)?;
        Ok(f.mean * log_link_product(x, alpha, 5.0 / 8.0).exp())
    }
}

/// A provider backed by a closure.
pub struct FnProvider<F> {
    pub label: String,
    pub f: F,
}

impl<F> PartitionProvider for FnProvider<F>
where
    F: Fn(&BoundaryConfig, &LinkPattern) -> Result<f64> + Sync,
{
    fn label(&self) -> &str {
        &self.label
    }

    fn evaluate(&self, x: &BoundaryConfig, alpha: &LinkPattern) -> Result<f64> {
        (self.f)(x, alpha)
    }
}

/// `Z^{(N)} = sum_alpha Z_alpha`.
pub fn total_partition(provider: &dyn PartitionProvider, x: &BoundaryConfig) -> Result<f64> {
    enumerate_patterns(x.n_links())?
        .iter()
        .map(|a| provider.evaluate_checked(x, a))
        .sum()
}

/// `C_j = sum over alpha containing {2j+1, 2N} of Z_alpha`, `0 <= j < N`.
pub fn c_j_decomposition(provider: &dyn PartitionProvider, x: &BoundaryConfig, j: usize) -> Result<f64> {
    let n = x.n_links();
    if j >= n {
        return Err(Error::bounds("j", j as f64, "0..=N-1"));
    }
    enumerate_patterns(n)?
        .iter()
        .filter(|a| a.contains((2 * j + 1, 2 * n)))
        .map(|a| provider.evaluate_checked(x, a))
        .sum()
}

/// One row of the asymptotic probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub eps: f64,
    pub ratio: f64,
    pub target: f64,
}

/// Ratios `Z^{(N)}(xi + eps u, x_tail) / Z^{(k)}(xi + eps u)` as the first
/// `2k = u.len()` points collapse onto `xi`, with the limit target
/// `Z^{(N-k)}(x_tail)` (1 when the tail is empty). Diagnostic only.
pub fn asymptotic_ratio_probe(
    provider: &dyn PartitionProvider,
    xi: f64,
    u: &[f64],
    x_tail: &[f64],
    eps: &[f64],
) -> Result<Vec<ProbeRow>> {
    if u.is_empty() {
        return Err(Error::bounds("k", 0.0, ">= 1"));
    }
    if u.len() % 2 != 0 || x_tail.len() % 2 != 0 {
        return Err(Error::invalid("collapsing and tail point counts must be even"));
    }
    let target = if x_tail.is_empty() {
        1.0
    } else {
        total_partition(provider, &BoundaryConfig::new(x_tail.to_vec())?)?
    };
    eps.iter()
        .map(|&e| {
            let head: Vec<f64> = u.iter().map(|v| xi + e * v).collect();
            let mut all = head.clone();
            all.extend_from_slice(x_tail);
            let num = total_partition(provider, &BoundaryConfig::new(all)?)?;
            let den = total_partition(provider, &BoundaryConfig::new(head)?)?;
            Ok(ProbeRow { eps: e, ratio: num / den, target })
        })
        .collect()
}
