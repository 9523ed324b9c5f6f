//! Chordal SLE sampling by backward composition of vertical slit maps.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{sqrt_upper, Curve, DrivingFunction};
use crate::conformal::Parameters;
use crate::error::{Error, Result};

/// The curve generated by a driver: tip `k` is
/// `f_1 ∘ ... ∘ f_{k-1}(W_k + 2i sqrt(dt_k))`, starting from `W_0` on `R`.
///
/// Quadratic in the number of steps.
pub fn trace_of_driver(driver: &DrivingFunction) -> Result<Curve> {
    Curve::dedup(trace_points(driver))
}

/// [`trace_of_driver`] evaluated at about `max_points` evenly spaced step
/// indices (always including the last), for long drivers.
pub fn trace_of_driver_sampled(driver: &DrivingFunction, max_points: usize) -> Result<Curve> {
    let n = driver.n_steps();
    if max_points == 0 {
        return Err(Error::bounds("max_points", 0.0, ">= 1"));
    }
    let stride = n.div_ceil(max_points).max(1);
    let mut ks: Vec<usize> = (stride - 1..n).step_by(stride).collect();
    if n > 0 && ks.last() != Some(&(n - 1)) {
        ks.push(n - 1);
    }
    Curve::dedup(trace_points_at(driver, &ks))
}

pub(crate) fn trace_points(driver: &DrivingFunction) -> Vec<Complex64> {
    let all: Vec<usize> = (0..driver.n_steps()).collect();
    trace_points_at(driver, &all)
}

/// The start point followed by the tips after steps `ks` (0-based).
fn trace_points_at(driver: &DrivingFunction, ks: &[usize]) -> Vec<Complex64> {
    let us: Vec<f64> = driver.values[1..].to_vec();
    let four_dt: Vec<f64> = driver.times.windows(2).map(|w| 4.0 * (w[1] - w[0])).collect();
    let mut points = Vec::with_capacity(ks.len() + 1);
    points.push(Complex64::new(driver.values[0], 0.0));
    for &k in ks {
        let mut w = Complex64::new(us[k], four_dt[k].sqrt());
        for j in (0..k).rev() {
            let mut d = w - us[j];
            if !(d.im > 0.0) {
                d.im = 0.0;
            }
            w = us[j] + sqrt_upper(d * d - four_dt[j], d.re);
        }
        points.push(w);
    }
    points
}

/// Brownian driver `sqrt(kappa) B` sampled on `times`.
pub fn sample_driver<R: Rng>(kappa: f64, times: &[f64], rng: &mut R) -> Result<DrivingFunction> {
    let mut values = Vec::with_capacity(times.len());
    let mut w = 0.0;
    values.push(w);
    for t in times.windows(2) {
        let z: f64 = rng.sample(StandardNormal);
        w += (kappa * (t[1] - t[0])).sqrt() * z;
        if !w.is_finite() {
            return Err(Error::Numeric("non-finite driver increment".into()));
        }
        values.push(w);
    }
    DrivingFunction::new(times.to_vec(), values)
}

fn check_sle_args(t_total: f64, dt: f64) -> Result<usize> {
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(Error::bounds("T", t_total, "(0, inf)"));
    }
    if !(dt > 0.0 && dt <= t_total) {
        return Err(Error::bounds("dt", dt, "(0, T]"));
    }
    Ok(((t_total / dt).round() as usize).max(1))
}

/// Chordal SLE from 0 in `H` up to capacity `t_total` on a uniform grid
/// of step `dt`, with its driver.
pub fn sample_chordal_sle_with_driver(
    params: &Parameters,
    t_total: f64,
    dt: f64,
    seed: u64,
) -> Result<(Curve, DrivingFunction)> {
    let n = check_sle_args(t_total, dt)?;
    let times: Vec<f64> = (0..=n).map(|k| t_total * k as f64 / n as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let driver = sample_driver(params.kappa, &times, &mut rng)?;
    let curve = trace_of_driver(&driver)?;
    Ok((curve, driver))
}

pub fn sample_chordal_sle(params: &Parameters, t_total: f64, dt: f64, seed: u64) -> Result<Curve> {
    Ok(sample_chordal_sle_with_driver(params, t_total, dt, seed)?.0)
}

/// Capacity grid for a chord sampled in the frame where it runs from 0 to
/// infinity. Steps are sized so that, after the Möbius map to a chord
/// `a -> b`, segments come out roughly `h |b - a|` long.
pub fn chord_time_grid(h: f64) -> Vec<f64> {
    let h2 = h * h;
    let t_max = 1.0 / h2;
    let mut times = vec![0.0];
    let mut t = 0.0;
    while t < t_max {
        let dt = if t < h2 { h2 } else { (h2 * (1.0 + 4.0 * t).powi(2)).min(t) };
        t += dt;
        times.push(t);
    }
    times
}

/// Chordal SLE from `a` to `b` on the real line, as a polyline from `a`
/// to `b` at relative resolution `h`.
///
/// Sampled from 0 to infinity and moved by `w -> (b w + a s) / (w + s)`,
/// `s = sign(b - a)`; the far tip is joined to `b` by a straight segment.
pub fn sample_chord<R: Rng>(kappa: f64, a: f64, b: f64, h: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::bounds("resolution", h, "(0, 0.5)"));
    }
    if !(a != b && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("chord endpoints {a}, {b} must be distinct and finite")));
    }
    let times = chord_time_grid(h);
    let driver = sample_driver(kappa, &times, rng)?;
    let s = if b > a { 1.0 } else { -1.0 };
    let mut pts: Vec<Complex64> = trace_points(&driver)
        .into_iter()
        .map(|w| (w * b + a * s) / (w + s))
        .collect();
    pts[0] = Complex64::new(a, 0.0);
    pts.push(Complex64::new(b, 0.0));
    pts.dedup();
    Ok(pts)
}
