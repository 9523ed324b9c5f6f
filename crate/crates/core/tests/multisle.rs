//! Statistical behaviour of the resampling chain and the drifted Loewner
//! chain.

use msle::combinatorics::LinkPattern;
use msle::conformal::{make_parameters, DomainSpec};
use msle::harness::experiments::{driver_qv_slope_with, QvOptions};
use msle::harness::stats::{ks_two_sample, lag1_autocorrelation};
use msle::loewner::{sample_chord, sample_chordal_sle_with_driver, Curve, DrivingFunction};
use msle::multisle::{cascade_check, resample_step, resample_step_with, run_chain_with, ResampleOptions, sample_drifted_run, ChainOptions, MultiCurveState};
use msle::partition::{BoundaryConfig, ClosedFormN1, DEFAULT_CHORD_RESOLUTION};
use msle::rng::{derive_seed, rng_for};
use num_complex::Complex64;
use rayon::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A chord from 0 to 1 seen from `w -> w / (1 - w)` (0 to infinity),
/// cut where it first leaves the disc of radius `r`.
fn chord_to_infinity(points: &[Complex64], r: f64) -> Curve {
    let mut out = vec![c(0.0, 0.0)];
    for &z in &points[1..points.len() - 1] {
        let w = z / (1.0 - z);
        if w.norm() > r {
            break;
        }
        out.push(c(w.re, w.im.max(0.0)));
    }
    Curve::dedup(out).unwrap()
}

/// Chords are sampled on a capacity grid that coarsens away from their
/// start, so only the part near the start carries the full variation.
fn qv_opts() -> QvOptions {
    QvOptions { zipper_steps: 1000, intervals: 20 }
}

const NEAR: f64 = 1.0;
const FINE: f64 = 0.01;

#[test]
fn single_curve_resample_is_plain_chordal() {
    let p = make_parameters(3.0).unwrap();
    let domain = DomainSpec::half_plane(&[0.0, 1.0]).unwrap();
    let pattern = LinkPattern::from_pairs(&[(1, 2)]).unwrap();
    let s = MultiCurveState::hugging(p, pattern, domain, 0.1, 0.02).unwrap();
    let resampled: Vec<f64> =
        (0..300u64).into_par_iter().map(|i| resample_step(&s, 0, derive_seed(1, i)).unwrap().signed_area(0)).collect();
    let direct: Vec<f64> = (0..300u64)
        .into_par_iter()
        .map(|i| {
            let pts = sample_chord(3.0, 0.0, 1.0, DEFAULT_CHORD_RESOLUTION, &mut rng_for(2, i)).unwrap();
            msle::geometry::signed_area(&pts)
        })
        .collect();
    let ks = ks_two_sample(&resampled, &direct).unwrap();
    assert!(!ks.reject, "{ks:?}");
}

#[test]
fn distant_curve_barely_conditions() {
    let kappa = 3.0;
    let p = make_parameters(kappa).unwrap();
    let domain = DomainSpec::half_plane(&[0.0, 1.0, 100.0, 101.0]).unwrap();
    let pattern = LinkPattern::from_pairs(&[(1, 2), (3, 4)]).unwrap();
    let s = MultiCurveState::hugging(p, pattern, domain, 0.1, 0.02).unwrap();
    let n = 300u64;
    let conditioned: Vec<Curve> = (0..n)
        .into_par_iter()
        .map(|i| {
            let opts = ResampleOptions { resolution: FINE, ..ResampleOptions::default() };
            chord_to_infinity(&resample_step_with(&s, 0, derive_seed(3, i), &opts).unwrap().curves[0].points, NEAR)
        })
        .collect();
    let free: Vec<Curve> = (0..n)
        .into_par_iter()
        .map(|i| {
            // common random numbers: the draw the resampler starts from
            let pts = sample_chord(kappa, 0.0, 1.0, FINE, &mut rng_for(derive_seed(3, i), 0)).unwrap();
            chord_to_infinity(&pts, NEAR)
        })
        .collect();
    let qc = driver_qv_slope_with(&conditioned, &qv_opts()).unwrap();
    let qf = driver_qv_slope_with(&free, &qv_opts()).unwrap();
    assert!((qc.slope - qf.slope).abs() < 0.05 * kappa, "conditioned {qc:?} free {qf:?}");
    assert!((qc.slope - kappa).abs() < 0.05 * kappa, "conditioned {qc:?}");
}

#[test]
fn single_curve_chain_forgets_immediately() {
    let p = make_parameters(2.0).unwrap();
    let domain = DomainSpec::rectangle(1.0, 1.0, vec![c(0.2, 0.0), c(0.8, 0.0)]).unwrap();
    let pattern = LinkPattern::from_pairs(&[(1, 2)]).unwrap();
    let s = MultiCurveState::hugging(p, pattern, domain, 0.05, 0.02).unwrap();
    let mut areas = Vec::new();
    let mut opts = ChainOptions::new(400);
    opts.burn_in = 1;
    run_chain_with(&s, &opts, 5, |_, st| areas.push(st.signed_area(0))).unwrap();
    assert_eq!(areas.len(), 400);
    let r = lag1_autocorrelation(&areas);
    assert!(r.abs() < 3.0 / (areas.len() as f64).sqrt(), "lag-1 autocorrelation {r}");
}

/// Realized quadratic variation per unit time over `[0, t_end]`.
fn realized_qv(d: &DrivingFunction, t_end: f64) -> (f64, f64) {
    let (mut q, mut t) = (0.0, 0.0);
    for k in 1..d.times.len() {
        if d.times[k] > t_end {
            break;
        }
        q += (d.values[k] - d.values[k - 1]).powi(2);
        t = d.times[k];
    }
    (q, t)
}

#[test]
fn drifted_and_plain_drivers_share_quadratic_variation() {
    let kappa = 3.0;
    let p = make_parameters(kappa).unwrap();
    let x = BoundaryConfig::new(vec![0.0, 1.0]).unwrap();
    let alpha = LinkPattern::from_pairs(&[(1, 2)]).unwrap();
    let provider = ClosedFormN1 { h: p.h };
    let drifted: Vec<(f64, f64)> = (0..40u64)
        .into_par_iter()
        .map(|i| {
            let run = sample_drifted_run(&p, &x, &alpha, 1, &provider, 1e-3, derive_seed(6, i)).unwrap();
            let t_half = 0.5 * run.driver.total_time();
            realized_qv(&run.driver, t_half)
        })
        .collect();
    let plain: Vec<(f64, f64)> = (0..40u64)
        .into_par_iter()
        .map(|i| {
            let (_, d) = sample_chordal_sle_with_driver(&p, 0.1, 1e-4, derive_seed(7, i)).unwrap();
            realized_qv(&d, 0.1)
        })
        .collect();
    let slope = |v: &[(f64, f64)]| v.iter().map(|r| r.0).sum::<f64>() / v.iter().map(|r| r.1).sum::<f64>();
    let (sd, sp) = (slope(&drifted), slope(&plain));
    assert!((sd - sp).abs() < 0.05 * sp, "drifted {sd} plain {sp}");
}

#[test]
fn cascade_for_two_curves() {
    let p = make_parameters(3.0).unwrap();
    let marks = vec![c(0.4, 0.0), c(1.6, 0.0), c(1.6, 1.0), c(0.4, 1.0)];
    let domain = DomainSpec::rectangle(2.0, 1.0, marks).unwrap();
    let pattern = LinkPattern::from_pairs(&[(1, 4), (2, 3)]).unwrap();
    let s = MultiCurveState::hugging(p, pattern, domain, 0.05, 0.02).unwrap();
    // global chain samples, thinned
    let mut opts = ChainOptions::new(400);
    opts.burn_in = 40;
    opts.stride = 6;
    let mut samples = Vec::new();
    run_chain_with(&s, &opts, 8, |_, st| samples.push(st.clone())).unwrap();
    let report = cascade_check(&samples, (2, 3), 1, 9).unwrap();
    assert!(!report.vacuous);
    assert!(report.pass, "{report:?}");
}
