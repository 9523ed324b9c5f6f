//! Experiments: connectivity tables, driver quadratic variation, the
//! partition inequality suite, and lattice-to-half-plane curve transport.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::stats::mean_se;
use super::table::ResultTable;
use crate::combinatorics::{enumerate_patterns, LinkPattern};
use crate::conformal::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::ising::{classify_pattern, sample_critical_ising_with, trace_interfaces, LatticePath};
use crate::lattice::{build_rectangle, DiscretePolygon};
use crate::loewner::{extract_driver, Curve};
use crate::partition::{check_total_bound, collapse_products, cross_ratio, BoundaryConfig};
use crate::randomcluster::{sample_critical_fk_with, trace_fk_interfaces, Wiring};
use crate::rng::{derive_seed, rng_for};

/// Connectivity of one lattice sample, or `None` if it could not be traced.
pub fn sample_connectivity(cfg: &ExperimentConfig, polygon: &DiscretePolygon, replica: u64) -> Result<Option<LinkPattern>> {
    let seed = derive_seed(cfg.seed, replica);
    let paths = lattice_interfaces(cfg.kind, polygon, cfg.q, cfg.sweeps, seed, cfg.cluster_moves)?;
    Ok(paths.and_then(|p| classify_pattern(&p).ok()))
}

/// Interfaces of one critical sample of the model behind `kind`; `None`
/// when tracing fails its invariants.
pub fn lattice_interfaces(
    kind: ExperimentKind,
    polygon: &DiscretePolygon,
    q: f64,
    sweeps: usize,
    seed: u64,
    cluster_moves: bool,
) -> Result<Option<Vec<LatticePath>>> {
    match kind {
        ExperimentKind::IsingConnectivity => {
            let spins = sample_critical_ising_with(polygon, sweeps, seed, cluster_moves)?;
            Ok(trace_interfaces(&spins).ok())
        }
        ExperimentKind::FkConnectivity => {
            let bonds = sample_critical_fk_with(polygon, q, sweeps, seed, Wiring::Alternating, cluster_moves && q == 2.0)?;
            Ok(trace_fk_interfaces(&bonds).ok().map(|d| d.interfaces))
        }
        _ => Err(Error::Precondition(format!("{kind} is not a lattice model"))),
    }
}

/// Empirical `P[A = alpha]` over all link patterns, with binomial errors.
///
/// Replica `r` uses seed `derive_seed(seed, r)`; results are reduced in
/// replica order, so the table does not depend on scheduling.
pub fn estimate_connectivity(cfg: &ExperimentConfig) -> Result<ResultTable> {
    if !matches!(cfg.kind, ExperimentKind::IsingConnectivity | ExperimentKind::FkConnectivity) {
        return Err(Error::Precondition(format!("{} is not a connectivity experiment", cfg.kind)));
    }
    let polygon = build_rectangle(cfg.ell, cfg.delta, &cfg.marks)?;
    let outcomes: Vec<Option<LinkPattern>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| sample_connectivity(cfg, &polygon, r))
        .collect::<Result<_>>()?;
    connectivity_table(cfg, &outcomes, polygon.n_marks() / 2)
}

/// Tabulates classified samples; `None` entries are rejected samples.
pub fn connectivity_table(cfg: &ExperimentConfig, outcomes: &[Option<LinkPattern>], n: usize) -> Result<ResultTable> {
    let accepted: Vec<&LinkPattern> = outcomes.iter().flatten().collect();
    if accepted.is_empty() {
        return Err(Error::Statistics("no accepted samples".into()));
    }
    let total = accepted.len();
    let mut table = ResultTable::new();
    for alpha in enumerate_patterns(n)? {
        let hits = accepted.iter().filter(|a| ***a == alpha).count();
        let p = hits as f64 / total as f64;
        let se = (p * (1.0 - p) / total as f64).sqrt();
        let params = format!("kind={};ell={};delta={};q={};pattern={alpha}", cfg.kind, cfg.ell, cfg.delta, cfg.q);
        table.push(&cfg.kind.to_string(), params, p, se, total)?;
    }
    Ok(table)
}

/// Tunables of the quadratic-variation estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QvOptions {
    /// Zipper steps used to extract each driver.
    pub zipper_steps: usize,
    /// Coarse time intervals on which increments are squared.
    pub intervals: usize,
}

impl Default for QvOptions {
    fn default() -> Self {
        QvOptions { zipper_steps: 1000, intervals: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QvEstimate {
    pub slope: f64,
    pub std_error: f64,
    /// Curves that contributed.
    pub used: usize,
    pub failed: usize,
}

/// Slope of the cumulative quadratic variation of one curve's driver,
/// by least squares through the origin on a coarse grid.
///
/// The zipper driver is accurate at coarse scales only; squaring its
/// step-level increments would pick up discretization noise.
pub fn curve_qv_slope(curve: &Curve, opts: &QvOptions) -> Result<f64> {
    let driver = extract_driver(curve, opts.zipper_steps)?;
    let t_total = driver.total_time();
    let m = opts.intervals.max(1);
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(Error::DataQuality("driver has no duration".into()));
    }
    let (mut q, mut prev) = (0.0, driver.value_at(0.0));
    let (mut stq, mut stt) = (0.0, 0.0);
    for i in 1..=m {
        let t = t_total * i as f64 / m as f64;
        let w = driver.value_at(t);
        q += (w - prev) * (w - prev);
        prev = w;
        stq += t * q;
        stt += t * t;
    }
    Ok(stq / stt)
}

/// Mean per-curve QV slope with its standard error; at least 10 curves,
/// and no more than 10% of them may fail extraction.
pub fn driver_qv_slope(curves: &[Curve]) -> Result<QvEstimate> {
    driver_qv_slope_with(curves, &QvOptions::default())
}

pub fn driver_qv_slope_with(curves: &[Curve], opts: &QvOptions) -> Result<QvEstimate> {
    if curves.len() < 10 {
        return Err(Error::Statistics(format!("{} curves; need at least 10", curves.len())));
    }
    let slopes: Vec<Option<f64>> = curves.par_iter().map(|c| curve_qv_slope(c, opts).ok()).collect();
    let ok: Vec<f64> = slopes.iter().flatten().copied().collect();
    let failed = curves.len() - ok.len();
    if failed * 10 > curves.len() {
        return Err(Error::DataQuality(format!("driver extraction failed on {failed} of {} curves", curves.len())));
    }
    let (slope, std_error) = mean_se(&ok);
    Ok(QvEstimate { slope, std_error, used: ok.len(), failed })
}

/// Maps a lattice interface into `H`, start mark to 0 and end mark to
/// infinity, keeping the part before it first leaves the disc of radius
/// `radius * |end - start|` around the start.
pub fn lattice_curve_to_halfplane(polygon: &DiscretePolygon, path: &LatticePath, radius: f64) -> Result<Curve> {
    let marks = polygon.mark_points();
    let (a, b) = (marks[path.start], marks[path.end]);
    let width = polygon.width as f64 * polygon.delta;
    let height = polygon.height as f64 * polygon.delta;
    let domain = DomainSpec::new(DomainKind::Rectangle { width, height }, vec![a, b])?;
    let big_a = domain.to_halfplane(a)?.re;
    let big_b = domain.to_halfplane(b)?.re;
    let at_infinity = |v: f64| !v.is_finite() || v.abs() > 1e15;
    // Real Möbius maps preserving H with A -> 0 and B -> infinity.
    let normalize = |w: Complex64| -> Complex64 {
        if at_infinity(big_b) {
            w - big_a
        } else if at_infinity(big_a) {
            -1.0 / (w - big_b)
        } else if big_b > big_a {
            (w - big_a) / (big_b - w)
        } else {
            (w - big_a) / (w - big_b)
        }
    };
    let r = radius * (b - a).norm();
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for &z in path.points.iter().skip(1) {
        if (z - a).norm() > r {
            break;
        }
        let w = normalize(domain.to_halfplane(z)?);
        pts.push(Complex64::new(w.re, w.im.max(0.0)));
    }
    if pts.len() < 3 {
        return Err(Error::DataQuality("interface leaves the disc immediately".into()));
    }
    Curve::dedup(pts)
}

/// One row of the partition inequality suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub check: String,
    pub n: usize,
    pub kappa: f64,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed `lhs / rhs` (bounds) or value (products, ratios).
    pub worst: f64,
    pub pass: bool,
}

/// Random configuration of `2n` increasing points with unit-scale gaps.
pub fn random_config<R: Rng>(n: usize, rng: &mut R) -> Result<BoundaryConfig> {
    let mut x = Vec::with_capacity(2 * n);
    let mut acc = rng.random::<f64>() * 10.0 - 5.0;
    for _ in 0..2 * n {
        x.push(acc);
        acc += 1e-3 + -rng.random::<f64>().ln();
    }
    BoundaryConfig::new(x)
}

/// Runs the total bound, the collapse products and the cross-ratio range on
/// `trials` random configurations.
pub fn verify_partition(n: usize, kappa: f64, trials: usize, seed: u64) -> Result<Vec<SuiteRow>> {
    let params = crate::conformal::make_parameters(kappa)?;
    if trials == 0 {
        return Err(Error::bounds("trials", 0.0, ">= 1"));
    }
    let h = params.h;
    let mut rng = rng_for(seed, n as u64);
    let (mut bound_fail, mut bound_worst) = (0, 0.0f64);
    let (mut prod_fail, mut prod_worst) = (0, 0.0f64);
    let (mut cr_fail, mut cr_worst) = (0, 0.0f64);
    for _ in 0..trials {
        let x = random_config(n, &mut rng)?;
        let r = check_total_bound(&x, h)?;
        bound_fail += usize::from(!r.pass);
        bound_worst = bound_worst.max(r.lhs / r.rhs);
        for k in 1..2 * n {
            let v = collapse_products(&x, h, k)?;
            prod_fail += usize::from(!(v > 0.0 && v <= 1.0 + 1e-12));
            prod_worst = prod_worst.max(v);
        }
        if n >= 2 {
            let v = cross_ratio(x.x(1), x.x(2), x.x(3), x.x(4))?;
            cr_fail += usize::from(!(v > 0.0 && v <= 1.0));
            cr_worst = cr_worst.max(v);
        }
    }
    let row = |check: &str, failures: usize, worst: f64| SuiteRow {
        check: check.into(),
        n,
        kappa,
        trials,
        failures,
        worst,
        pass: failures == 0,
    };
    let mut rows = vec![row("total-bound", bound_fail, bound_worst), row("collapse-products", prod_fail, prod_worst)];
    if n >= 2 {
        rows.push(row("cross-ratio", cr_fail, cr_worst));
    }
    Ok(rows)
}
