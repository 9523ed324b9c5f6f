//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when
//! an earlier one fails. Pass criterion numbers to run a subset:
//! `cargo test --test acceptance -- 4 7`.

mod common;

use std::time::{Duration, Instant};

use common::{dynamic_edges, fk_marginals, ising_marginals, worst_z, BatchStats};
use msle::combinatorics::{catalan, enumerate_patterns, LinkPattern};
use msle::conformal::{make_parameters, poisson_kernel_halfplane, DomainSpec, Mobius};
use msle::harness::experiments::{
    driver_qv_slope, driver_qv_slope_with, lattice_curve_to_halfplane, verify_partition, QvOptions,
};
use msle::harness::stats::ks_two_sample;
use msle::ising::{beta_c, classify_pattern, sample_critical_ising_with, trace_interfaces, IsingSampler, SpinConfig};
use msle::lattice::{build_rectangle, DiscretePolygon};
use msle::loewner::{
    extract_driver, hull_derivative, sample_chordal_sle, sample_chordal_sle_with_driver, solve_forward,
    sampler::sample_driver, Curve, DrivingFunction,
};
use msle::multisle::{densify, n_kappa, resample_step, run_chain_with, ChainOptions, MultiCurveState};
use msle::partition::{check_total_bound, f_alpha_mc_83, BoundaryConfig};
use msle::randomcluster::{sample_critical_fk_with, trace_fk_interfaces, BondConfig, FkSampler, Wiring};
use msle::rng::{derive_seed, rng_for};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

type Outcome = msle::Result<Verdict>;

struct Verdict {
    pass: bool,
    /// A soft target reports its result without failing the suite.
    soft: bool,
    detail: String,
}

impl Verdict {
    fn hard(pass: bool, detail: String) -> Outcome {
        Ok(Verdict { pass, soft: false, detail })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn catalan_sizes() -> Outcome {
    let t = Instant::now();
    let sizes = (1..=5).map(|n| enumerate_patterns(n).map(|v| v.len() as u64)).collect::<msle::Result<Vec<_>>>()?;
    let elapsed = t.elapsed();
    let expect: Vec<u64> = (1..=5).map(catalan).collect();
    Verdict::hard(
        sizes == [1, 2, 5, 14, 42] && expect == sizes && elapsed < Duration::from_secs(1),
        format!("sizes {sizes:?} in {elapsed:?}"),
    )
}

fn partition_inequalities() -> Outcome {
    let t = Instant::now();
    let mut failed = Vec::new();
    let mut rows = 0;
    for n in 2..=4 {
        for kappa in [2.0, 3.0, 4.0] {
            for row in verify_partition(n, kappa, 1000, 20 + n as u64)? {
                rows += 1;
                if !row.pass {
                    failed.push(format!("{}(N={n},kappa={kappa})", row.check));
                }
            }
        }
    }
    let r = check_total_bound(&BoundaryConfig::new(vec![0.0, 1.0, 2.0, 3.0])?, 1.0)?;
    let instance = (r.lhs - 10.0 / 9.0).abs() < 1e-12 && (r.rhs - 16.0 / 3.0).abs() < 1e-12;
    let elapsed = t.elapsed();
    Verdict::hard(
        failed.is_empty() && instance && elapsed < Duration::from_secs(10),
        format!("{rows} rows, failing {failed:?}; instance lhs {:.6} rhs {:.6}; {elapsed:.1?}", r.lhs, r.rhs),
    )
}

fn upper_sqrt(w: Complex64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

fn loewner_round_trip() -> Outcome {
    let t = Instant::now();
    // constant driver
    let d = DrivingFunction::constant(0.0, 1.0, 100)?;
    let mut closed = 0.0f64;
    for i in 0..40 {
        for j in 1..=10 {
            let z = c(-2.0 + 0.1 * i as f64 + 0.05, 0.3 * j as f64);
            let g = solve_forward(&d, z).mapped().ok_or_else(|| msle::Error::Numeric(format!("{z} swallowed")))?;
            closed = closed.max((g - upper_sqrt(z * z + 4.0)).norm());
        }
    }
    // sample then unzip, one zipper step per sampled point
    let big_t = 1.0;
    let p = make_parameters(3.0)?;
    let (curve, driver) = sample_chordal_sle_with_driver(&p, big_t, 1e-4, 31)?;
    let got = extract_driver(&curve, curve.len())?;
    let round_trip = got
        .times
        .iter()
        .zip(&got.values)
        .map(|(&s, &w)| (w - driver.value_at(s)).abs())
        .fold(0.0, f64::max);
    // hull derivative
    let mut rng = rng_for(32, 0);
    let times: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    let (mut probes, mut bad, mut attempts) = (0, 0, 0);
    while probes < 1000 && attempts < 20_000 {
        attempts += 1;
        let kappa = rng.random_range(0.5..8.0);
        let w = sample_driver(kappa, &times, &mut rng)?;
        let x = rng.random_range(-6.0..6.0);
        if let Ok(v) = hull_derivative(&w, x) {
            probes += 1;
            bad += usize::from(!(v > 0.0 && v <= 1.0));
        }
    }
    let slit = hull_derivative(&d, 2.0)?;
    let slit_err = (slit - 0.5f64.sqrt()).abs();
    let elapsed = t.elapsed();
    Verdict::hard(
        closed < 1e-6
            && round_trip < 0.05 * big_t.sqrt()
            && probes == 1000
            && bad == 0
            && slit_err < 1e-9
            && elapsed < Duration::from_secs(60),
        format!(
            "closed-form err {closed:.1e}; round-trip sup err {round_trip:.1e}; {probes} probes, {bad} outside (0,1]; slit err {slit_err:.1e}; {elapsed:.1?}"
        ),
    )
}

fn sle_identification() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, kappa) in [2.0, 8.0 / 3.0, 3.0, 4.0].into_iter().enumerate() {
        let p = make_parameters(kappa)?;
        let curves: Vec<Curve> = (0..100u64)
            .into_par_iter()
            .map(|i| sample_chordal_sle(&p, 1.0, 1e-3, derive_seed(40 + k as u64, i)))
            .collect::<msle::Result<_>>()?;
        let est = driver_qv_slope(&curves)?;
        let rel = (est.slope - kappa).abs() / kappa;
        pass &= rel < 0.05;
        parts.push(format!("kappa {kappa:.3}: {:.3} ± {:.3} ({:.1}%)", est.slope, est.std_error, 100.0 * rel));
    }
    Verdict::hard(pass, parts.join("; "))
}

fn conformal_layer() -> Outcome {
    let mut rng = rng_for(50, 0);
    let (mut worst, mut maps) = (0.0f64, 0);
    while maps < 100 {
        let (a, b, cc) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let Ok(m) = Mobius::new(a, b, cc, (1.0 + b * cc) / a) else { continue };
        maps += 1;
        for _ in 0..10 {
            let (x, y): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let (mx, my) = (m.apply_real(x), m.apply_real(y));
            if !(mx.is_finite() && my.is_finite()) || (x - y).abs() < 1e-3 {
                continue;
            }
            let h = poisson_kernel_halfplane(x, y)?;
            let lhs = m.derivative_real(x) * m.derivative_real(y) * poisson_kernel_halfplane(mx, my)?;
            worst = worst.max((lhs - h).abs() / h);
        }
    }
    let mut violations = 0;
    for _ in 0..100 {
        let (w, hgt) = (rng.random_range(1.0..3.0), rng.random_range(0.5..2.0));
        let (ws, hs) = (w * rng.random_range(0.5..1.0), hgt * rng.random_range(0.3..1.0));
        let x = rng.random_range(0.01..ws * 0.5);
        let y = rng.random_range(ws * 0.5..ws * 0.99);
        let outer = DomainSpec::rectangle(w, hgt, vec![])?.poisson_kernel(c(x, 0.0), c(y, 0.0))?;
        let inner = DomainSpec::rectangle(ws, hs, vec![])?.poisson_kernel(c(x, 0.0), c(y, 0.0))?;
        violations += usize::from(outer < inner * (1.0 - 1e-10));
    }
    Verdict::hard(
        worst < 1e-10 && violations == 0,
        format!("covariance rel err {worst:.1e} over {maps} maps; {violations}/100 nested pairs violate monotonicity"),
    )
}

/// A 64x64 interface cut at half the mark distance has about 100 lattice
/// steps. The quadratic variation is measured on intervals of about 20
/// steps: at the scale of a few steps a lattice path is not SLE-like and
/// its driver's variation is suppressed.
const LATTICE_QV: QvOptions = QvOptions { zipper_steps: 1000, intervals: 5 };

/// Driver QV slope of the first interface of each replica; failures of
/// tracing or transport are counted.
fn lattice_qv(fk: bool) -> msle::Result<(f64, f64, usize, usize)> {
    let poly = build_rectangle(1.0, 1.0 / 64.0, &[0.125, 0.625])?;
    let replicas = 200u64;
    let curves: Vec<Option<Curve>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> msle::Result<Option<Curve>> {
            let seed = derive_seed(if fk { 61 } else { 60 }, r);
            let path = if fk {
                let bonds = sample_critical_fk_with(&poly, 2.0, 300, seed, Wiring::Alternating, true)?;
                trace_fk_interfaces(&bonds).ok().and_then(|d| d.interfaces.into_iter().next())
            } else {
                let spins = sample_critical_ising_with(&poly, 300, seed, true)?;
                trace_interfaces(&spins).ok().and_then(|p| p.into_iter().next())
            };
            Ok(path.and_then(|p| lattice_curve_to_halfplane(&poly, &p, 0.5).ok()))
        })
        .collect::<msle::Result<_>>()?;
    let ok: Vec<Curve> = curves.into_iter().flatten().collect();
    let lost = replicas as usize - ok.len();
    let est = driver_qv_slope_with(&ok, &LATTICE_QV)?;
    Ok((est.slope, est.std_error, est.used, lost + est.failed))
}

fn lattice_to_continuum() -> Outcome {
    let (si, ei, ni, li) = lattice_qv(false)?;
    let (sf, ef, nf, lf) = lattice_qv(true)?;
    let target_f = 16.0 / 3.0;
    let (ri, rf) = ((si - 3.0).abs() / 3.0, (sf - target_f).abs() / target_f);
    Ok(Verdict {
        pass: ri < 0.2 && rf < 0.2,
        soft: true,
        detail: format!(
            "64x64: Ising {si:.3} ± {ei:.3} vs 3 ({:.1}%, {ni} curves, {li} lost); FK q=2 {sf:.3} ± {ef:.3} vs 5.333 ({:.1}%, {nf} curves, {lf} lost); tolerance 20% at mesh 1/64, {} QV intervals",
            100.0 * ri,
            100.0 * rf,
            LATTICE_QV.intervals
        ),
    })
}

/// Signed areas of both curves, recorded every `stride` steps after
/// `burn_in` steps, over `chains` chains from `initial`.
fn chain_samples(initial: &MultiCurveState, chains: u64, master: u64) -> msle::Result<[Vec<f64>; 2]> {
    const BURN_IN: usize = 200;
    const STRIDE: usize = 5;
    const PER_CHAIN: usize = 50;
    let opts = ChainOptions { burn_in: BURN_IN, stride: STRIDE, ..ChainOptions::new(BURN_IN + STRIDE * (PER_CHAIN - 1)) };
    let per: Vec<Vec<(f64, f64)>> = (0..chains)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(PER_CHAIN);
            run_chain_with(initial, &opts, derive_seed(master, i), |_, s| out.push((s.signed_area(0), s.signed_area(1))))?;
            Ok(out)
        })
        .collect::<msle::Result<_>>()?;
    let all: Vec<(f64, f64)> = per.into_iter().flatten().collect();
    Ok([all.iter().map(|x| x.0).collect(), all.iter().map(|x| x.1).collect()])
}

fn chain_uniqueness() -> Outcome {
    let p = make_parameters(3.0)?;
    let marks = vec![c(0.5, 0.0), c(1.5, 0.0), c(1.5, 1.0), c(0.5, 1.0)];
    let domain = DomainSpec::rectangle(2.0, 1.0, marks)?;
    let pattern: LinkPattern = "2;1-4,2-3".parse()?;
    // The first curve either wraps around the second or hugs the left side.
    // Nested curves are kept 0.15 apart: the strip left to the inner curve
    // must not be so thin that its uniformizing map underflows.
    let around = MultiCurveState::hugging(p, pattern.clone(), domain.clone(), 0.15, 0.02)?;
    let apart = MultiCurveState::hugging_sides(p, pattern, domain, 0.15, 0.02, &[true, false])?;
    let start = (around.signed_area(0), apart.signed_area(0));
    let a = chain_samples(&around, 40, 71)?;
    let b = chain_samples(&apart, 40, 72)?;
    let k0 = ks_two_sample(&a[0], &b[0])?;
    let k1 = ks_two_sample(&a[1], &b[1])?;
    Verdict::hard(
        k0.statistic < 0.05 && k1.statistic < 0.05 && a[0].len() >= 500,
        format!(
            "start areas {:.3} / {:.3}; KS curve 1: {:.4}, curve 2: {:.4} with {} samples per side",
            start.0,
            start.1,
            k0.statistic,
            k1.statistic,
            a[0].len()
        ),
    )
}

/// Ising interfaces on the 2x1 rectangle, conditioned on `{1-4, 2-3}`,
/// as a curve state whose marks are the boundary medial vertices.
///
/// The paths are densified: unzipping a neighbouring interface with one
/// zipper step per lattice turn can pinch off its narrow fjords.
fn conditioned_ising(poly: &DiscretePolygon, target: &LinkPattern, seed: u64) -> msle::Result<Option<MultiCurveState>> {
    let spins = sample_critical_ising_with(poly, 200, seed, true)?;
    let Ok(paths) = trace_interfaces(&spins) else { return Ok(None) };
    if classify_pattern(&paths).ok().as_ref() != Some(target) {
        return Ok(None);
    }
    let marks: Vec<Complex64> = (0..poly.n_marks()).map(|m| poly.edge_midpoint(poly.mark_edge(m))).collect();
    let (w, h) = (poly.width as f64 * poly.delta, poly.height as f64 * poly.delta);
    let domain = DomainSpec::rectangle(w, h, marks)?;
    let mut curves = Vec::with_capacity(target.n_links());
    for &(a, b) in target.links() {
        let path = paths.iter().find(|p| (p.start.min(p.end), p.start.max(p.end)) == (a - 1, b - 1)).expect("pattern matches");
        let mut pts = path.points.clone();
        if path.start > path.end {
            pts.reverse();
        }
        curves.push(Curve::dedup(densify(&pts, poly.delta / 8.0))?);
    }
    Ok(MultiCurveState::new(make_parameters(3.0)?, target.clone(), domain, curves).ok())
}

fn definition_consistency() -> Outcome {
    let poly = build_rectangle(2.0, 1.0 / 16.0, &[1.0 / 12.0, 0.25, 7.0 / 12.0, 0.75])?;
    let target: LinkPattern = "2;1-4,2-3".parse()?;
    let states: Vec<Option<MultiCurveState>> = (0..1600u64)
        .into_par_iter()
        .map(|r| conditioned_ising(&poly, &target, derive_seed(80, r)))
        .collect::<msle::Result<_>>()?;
    let states: Vec<MultiCurveState> = states.into_iter().flatten().collect();
    let half = states.len() / 2;
    let before: Vec<f64> = states[..half].iter().map(|s| s.signed_area(0)).collect();
    let after: Vec<f64> = states[half..2 * half]
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let j = rng_for(81, i as u64).random_range(0..2);
            Ok(resample_step(s, j, derive_seed(82, i as u64))?.signed_area(0))
        })
        .collect::<msle::Result<_>>()?;
    let ks = ks_two_sample(&before, &after)?;
    Verdict::hard(
        !ks.reject && half >= 100,
        format!("{} conditioned samples; KS {:.4}, p = {:.3}", states.len(), ks.statistic, ks.p_value),
    )
}

/// Both samplers run with their cluster moves, as in the lattice experiments.
fn sampler_oracles() -> Outcome {
    const BATCHES: usize = 100;
    const PER: usize = 1000;
    let cfg = SpinConfig::alternating(DiscretePolygon::with_marks(4, 4, 0.25, vec![2, 10])?)?;
    let exact = ising_marginals(&cfg, beta_c());
    let free = cfg.free_vertices();
    let mut s = IsingSampler::new(cfg, beta_c(), rng_for(90, 0));
    s.cluster_moves = true;
    s.run(100);
    let mut stats = BatchStats::new(free.len(), BATCHES, PER);
    for b in 0..BATCHES {
        for _ in 0..PER {
            s.sweep();
            stats.add(b, free.iter().map(|&v| f64::from(s.cfg.spins[v])));
        }
    }
    let zi = worst_z(&stats.summary(), &exact);

    let bonds = BondConfig::critical(DiscretePolygon::with_marks(2, 3, 0.5, vec![1, 6])?, 2.0, Wiring::Alternating)?;
    let exact = fk_marginals(&bonds);
    let dynamic = dynamic_edges(&bonds);
    let mut f = FkSampler::new(bonds, rng_for(91, 0));
    f.cluster_moves = true;
    f.run(100)?;
    let mut stats = BatchStats::new(dynamic.len(), BATCHES, PER);
    for b in 0..BATCHES {
        for _ in 0..PER {
            f.sweep()?;
            stats.add(b, dynamic.iter().map(|&e| f64::from(u8::from(f.cfg.omega[e]))));
        }
    }
    let zf = worst_z(&stats.summary(), &exact);
    Verdict::hard(
        zi < 3.0 && zf < 3.0,
        format!(
            "1e5 sweeps: Ising 3x3 worst {zi:.2} sigma over {} spins; FK 2x3 worst {zf:.2} sigma over {} edges",
            free.len(),
            dynamic.len()
        ),
    )
}

/// `Z_alpha` in a rectangle with marks on its bottom edge, and its
/// standard error from the Monte Carlo estimate of `f_alpha`.
fn rectangle_z(width: f64, height: f64, xs: &[f64], alpha: &LinkPattern, seed: u64) -> msle::Result<(f64, f64, f64)> {
    let h = make_parameters(8.0 / 3.0)?.h;
    let marks: Vec<Complex64> = xs.iter().map(|&x| c(x, 0.0)).collect();
    let domain = DomainSpec::rectangle(width, height, marks.clone())?;
    let images = marks.iter().map(|&z| domain.to_halfplane(z).map(|w| w.re)).collect::<msle::Result<Vec<_>>>()?;
    let f = f_alpha_mc_83(&BoundaryConfig::new(images)?, alpha, 4000, seed)?;
    let mut prod = 1.0;
    for &(a, b) in alpha.links() {
        prod *= domain.poisson_kernel(marks[a - 1], marks[b - 1])?.powf(h);
    }
    Ok((prod * f.mean, prod * f.stderr, f.mean))
}

fn f_alpha_checks() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    // random configurations in H
    let h = make_parameters(8.0 / 3.0)?.h;
    for n in 2..=3 {
        let mut rng = rng_for(100, n as u64);
        let mut x = vec![0.0];
        for _ in 1..2 * n {
            x.push(x.last().unwrap() + rng.random_range(0.3..2.0));
        }
        let x = BoundaryConfig::new(x)?;
        for (k, alpha) in enumerate_patterns(n)?.iter().enumerate() {
            let f = f_alpha_mc_83(&x, alpha, 2000, derive_seed(101, k as u64))?;
            let in_range = f.mean > 0.0 && f.mean <= 1.0;
            // Z_alpha = prod |x_b - x_a|^{-2h} f_alpha against prod H^h
            let bound = alpha.links().iter().map(|&(a, b)| poisson_kernel_halfplane(x.x(a), x.x(b)).unwrap().powf(h)).product::<f64>();
            let z = bound * f.mean;
            let below = z <= bound * (1.0 + 3.0 * f.stderr);
            pass &= in_range && below;
            if !(in_range && below) {
                parts.push(format!("N={n} {alpha}: f {:.4} ± {:.4}", f.mean, f.stderr));
            }
        }
    }
    // nested rectangles sharing the bottom edge piece carrying the marks
    let xs = [0.2, 0.4, 0.6, 0.8];
    for (k, alpha) in enumerate_patterns(2)?.iter().enumerate() {
        let (zi, ei, fi) = rectangle_z(1.0, 0.5, &xs, alpha, derive_seed(102, k as u64))?;
        let (zo, eo, fo) = rectangle_z(2.0, 1.0, &xs, alpha, derive_seed(103, k as u64))?;
        let ok = zi <= zo + 3.0 * (ei * ei + eo * eo).sqrt() && fi > 0.0 && fi <= 1.0 && fo > 0.0 && fo <= 1.0;
        pass &= ok;
        parts.push(format!("{alpha}: Z inner {zi:.4} ± {ei:.4} <= outer {zo:.4} ± {eo:.4}"));
    }
    Verdict::hard(pass, parts.join("; "))
}

fn n_kappa_values() -> Outcome {
    let got = [16.0 / 3.0, 5.0, 6.0].map(|k| n_kappa(k));
    let got: Vec<usize> = got.into_iter().collect::<msle::Result<_>>()?;
    Verdict::hard(got == [3, 3, 4], format!("{got:?}"))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 11] = [
        (1, catalan_sizes),
        (2, partition_inequalities),
        (3, loewner_round_trip),
        (4, sle_identification),
        (5, conformal_layer),
        (6, lattice_to_continuum),
        (7, chain_uniqueness),
        (8, definition_consistency),
        (9, sampler_oracles),
        (10, f_alpha_checks),
        (11, n_kappa_values),
    ];
    let picked: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut hard_failures = 0;
    for (n, run) in criteria {
        if !picked.is_empty() && !picked.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (status, detail) = match run() {
            Ok(v) if v.pass => ("PASS", v.detail),
            Ok(v) if v.soft => ("FAIL (soft target)", v.detail),
            Ok(v) => {
                hard_failures += 1;
                ("FAIL", v.detail)
            }
            Err(e) => {
                hard_failures += 1;
                ("FAIL", format!("error: {e}"))
            }
        };
        println!("criterion {n:>2} {status}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
    }
    if hard_failures > 0 {
        println!("{hard_failures} criteria failed");
        std::process::exit(1);
    }
}
