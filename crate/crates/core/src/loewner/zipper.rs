//! Driver extraction by unzipping a polyline with vertical slit maps.
//!
//! Point `k` is pushed through the maps built so far; its image `w`
//! determines the next step exactly: driver `Re w` and duration
//! `(Im w)^2 / 4`, so that the step sends `w` to the real line. For curves
//! traced from a driver this inverts the tracing exactly.

use num_complex::Complex64;

use super::{sqrt_upper, Curve, DrivingFunction, SlitStep};
use crate::error::{Error, Result};

/// Result of unzipping a polyline.
#[derive(Clone, Debug)]
pub struct Unzipped {
    /// Forward steps in application order.
    pub steps: Vec<SlitStep>,
    /// Driver of the vertical steps.
    pub driver: DrivingFunction,
    /// Indices of points skipped because their image was already real.
    pub skipped: Vec<usize>,
}

/// Unzips `points`, which must start on the real line and stay in the
/// closed upper half-plane. With `close_on_real`, the last point is taken
/// to be on the real line as well and the final gap is removed by a
/// half-disc step, so that the whole chord and everything beneath it is
/// mapped away.
pub fn unzip(points: &[Complex64], close_on_real: bool) -> Result<Unzipped> {
    if points.is_empty() {
        return Err(Error::invalid("cannot unzip an empty polyline"));
    }
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    if points[0].im.abs() > tol {
        return Err(Error::Domain(format!("curve starts at {} off the real line", points[0])));
    }
    if let Some(p) = points.iter().find(|p| p.im < -tol || !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::Domain(format!("curve point {p} leaves the upper half-plane")));
    }
    let n = points.len();
    let mut us: Vec<f64> = Vec::with_capacity(n);
    let mut four_dt: Vec<f64> = Vec::with_capacity(n);
    let mut times = vec![0.0];
    let mut values = vec![points[0].re];
    let mut skipped = Vec::new();
    let mut arc = None;
    let mut last_u = points[0].re;
    for (k, &p) in points.iter().enumerate().skip(1) {
        let mut w = Complex64::new(p.re, p.im.max(0.0));
        for j in 0..us.len() {
            let d = w - us[j];
            w = us[j] + sqrt_upper(d * d + four_dt[j], d.re);
        }
        if close_on_real && k == n - 1 {
            let (lo, hi) = (last_u.min(w.re), last_u.max(w.re));
            if hi > lo {
                arc = Some(SlitStep::Arc { center: 0.5 * (lo + hi), radius: 0.5 * (hi - lo) });
            }
            break;
        }
        let dt = 0.25 * w.im * w.im;
        let t_prev = *times.last().unwrap();
        if !(w.im > 1e-14 * w.norm().max(1.0)) || !(t_prev + dt > t_prev) {
            skipped.push(k);
            continue;
        }
        us.push(w.re);
        four_dt.push(4.0 * dt);
        times.push(t_prev + dt);
        values.push(w.re);
        last_u = w.re;
    }
    let mut steps: Vec<SlitStep> = us
        .iter()
        .zip(&four_dt)
        .map(|(&u, &f)| SlitStep::Vertical { u, dt: 0.25 * f })
        .collect();
    steps.extend(arc);
    Ok(Unzipped { steps, driver: DrivingFunction::new(times, values)?, skipped })
}

/// Driver of a curve using at most `n_steps` zipper steps; longer curves
/// are subsampled by index, keeping both ends.
pub fn extract_driver(curve: &Curve, n_steps: usize) -> Result<DrivingFunction> {
    if n_steps == 0 {
        return Err(Error::bounds("n_steps", 0.0, ">= 1"));
    }
    let pts = &curve.points;
    let sub: Vec<Complex64> = if pts.len() <= n_steps + 1 {
        pts.clone()
    } else {
        let m = pts.len() - 1;
        (0..=n_steps).map(|i| pts[(i * m + n_steps / 2) / n_steps]).collect::<Vec<_>>()
    };
    let unzipped = unzip(&sub, false)?;
    if unzipped.driver.n_steps() == 0 && sub.len() > 1 {
        return Err(Error::DegenerateSegment(1));
    }
    Ok(unzipped.driver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::Parameters;
    use crate::loewner::{apply_forward, apply_inverse, sample_chordal_sle_with_driver, solve_forward, trace_of_driver, ForwardOutcome};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vertical_segment_has_zero_driver() {
        let pts: Vec<_> = (0..=100).map(|k| c(0.0, 2.0 * k as f64 / 100.0)).collect();
        let d = extract_driver(&Curve::new(pts).unwrap(), 100).unwrap();
        assert!((d.total_time() - 1.0).abs() < 1e-12);
        assert!(d.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn round_trip_with_sampler() {
        let p = Parameters::new(3.0).unwrap();
        let (curve, driver) = sample_chordal_sle_with_driver(&p, 1.0, 1e-3, 17).unwrap();
        let got = extract_driver(&curve, curve.len()).unwrap();
        assert_eq!(got.n_steps(), driver.n_steps());
        let sup = got.values.iter().zip(&driver.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-8, "sup error {sup}");
        let back = trace_of_driver(&got).unwrap();
        assert!(crate::loewner::curve_distance(&back, &curve) < 1e-8);
        // the tip reaches the final driver value (the square root at the
        // tip amplifies rounding, so compare at 1e-6)
        let tip = match solve_forward(&got, curve.end()) {
            ForwardOutcome::Mapped(w) => w,
            ForwardOutcome::Swallowed { .. } => Complex64::new(*got.values.last().unwrap(), 0.0),
        };
        assert!((tip - *got.values.last().unwrap()).norm() < 1e-6);
    }

    #[test]
    fn scaling_relation() {
        let p = Parameters::new(2.0).unwrap();
        let (curve, _) = sample_chordal_sle_with_driver(&p, 1.0, 1e-2, 3).unwrap();
        let d1 = extract_driver(&curve, 1000).unwrap();
        let d2 = extract_driver(&curve.scaled(2.0), 1000).unwrap();
        for (k, &t) in d1.times.iter().enumerate() {
            assert!((d2.value_at(4.0 * t) - 2.0 * d1.values[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn closing_arc_removes_chord() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let chord = crate::loewner::sample_chord(2.0, -1.0, 1.0, 0.05, &mut rng).unwrap();
        let u = unzip(&chord, true).unwrap();
        assert!(matches!(u.steps.last(), Some(SlitStep::Arc { .. })));
        // points far above stay in H and invert back
        for &z in &[c(0.0, 5.0), c(-4.0, 1.0), c(3.0, 0.5)] {
            let w = apply_forward(&u.steps, z);
            assert!(w.im > 0.0);
            assert!((apply_inverse(&u.steps, w) - z).norm() < 1e-9);
        }
        // real points outside the chord stay real and keep their order
        let l = apply_forward(&u.steps, c(-2.0, 0.0));
        let r = apply_forward(&u.steps, c(2.0, 0.0));
        assert!(l.im.abs() < 1e-12 && r.im.abs() < 1e-12 && l.re < r.re);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(matches!(unzip(&[c(0.0, 1.0), c(0.0, 2.0)], false), Err(Error::Domain(_))));
        assert!(matches!(unzip(&[c(0.0, 0.0), c(0.0, -1.0)], false), Err(Error::Domain(_))));
        let flat = Curve::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(extract_driver(&flat, 5), Err(Error::DegenerateSegment(_))));
    }
}
