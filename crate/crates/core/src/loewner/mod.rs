//! Numerical Loewner evolution in the upper half-plane.
//!
//! Everything is built from elementary steps whose maps are explicit: a
//! vertical slit of Loewner duration `dt` at a constant driver `u`, and a
//! half-disc removal used to close chords that end on the real line.
//! A driving function is a sequence of vertical steps, step `k` using the
//! driver value at the right end of its time interval.

pub mod io;
pub mod metric;
pub mod sampler;
pub mod zipper;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use metric::curve_distance;
pub use sampler::{sample_chord, sample_chordal_sle, sample_chordal_sle_with_driver, trace_of_driver, trace_of_driver_sampled};
pub use zipper::{extract_driver, unzip, Unzipped};

/// `|g(z) - W|` below this declares `z` swallowed.
pub const SWALLOW_TOL: f64 = 1e-9;

/// Square root on the branch with `Im >= 0`; on the real axis, the sign
/// follows `hint` (non-negative hint picks the non-negative root).
#[inline]
pub(crate) fn sqrt_upper(z: Complex64, hint: f64) -> Complex64 {
    // Algebraic principal root: no trig, and exact zeros stay zeros.
    let m = z.norm();
    let t = ((m + z.re.abs()) * 0.5).sqrt();
    let r = if t == 0.0 {
        Complex64::new(0.0, 0.0)
    } else if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    };
    if r.im < 0.0 || (r.im == 0.0 && r.re * hint < 0.0) {
        -r
    } else {
        r
    }
}

#[inline]
fn clamp_upper(mut w: Complex64) -> Complex64 {
    if !(w.im > 0.0) {
        w.im = 0.0;
    }
    w
}

/// One elementary conformal step `H \ K -> H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SlitStep {
    /// `g(z) = u + sqrt((z - u)^2 + 4 dt)`, removing `[u, u + 2i sqrt(dt)]`.
    Vertical { u: f64, dt: f64 },
    /// `g(z) = z + r^2 / (z - center)`, removing the half-disc of radius `r`.
    Arc { center: f64, radius: f64 },
}

impl SlitStep {
    /// The normalized map `g`.
    #[inline]
    pub fn forward(&self, z: Complex64) -> Complex64 {
        match *self {
            SlitStep::Vertical { u, dt } => {
                let d = z - u;
                u + sqrt_upper(d * d + 4.0 * dt, d.re)
            }
            SlitStep::Arc { center, radius } => z + radius * radius / (z - center),
        }
    }

    /// The inverse map `g^{-1}: H -> H \ K`. Real inputs under the removed
    /// set land on its boundary.
    #[inline]
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        match *self {
            SlitStep::Vertical { u, dt } => {
                let d = clamp_upper(w - u);
                u + sqrt_upper(d * d - 4.0 * dt, d.re)
            }
            SlitStep::Arc { center, radius } => {
                let v = clamp_upper(w - center);
                let s = sqrt_upper(v * v - 4.0 * radius * radius, v.re);
                center + (v + s) * 0.5
            }
        }
    }

    /// `g'(x)` at a real point outside the removed set.
    pub fn derivative_real(&self, x: f64) -> f64 {
        match *self {
            SlitStep::Vertical { u, dt } => {
                let d = x - u;
                d.abs() / (d * d + 4.0 * dt).sqrt()
            }
            SlitStep::Arc { center, radius } => {
                let d = x - center;
                1.0 - radius * radius / (d * d)
            }
        }
    }

    /// Loewner duration (half of the half-plane capacity).
    pub fn duration(&self) -> f64 {
        match *self {
            SlitStep::Vertical { dt, .. } => dt,
            SlitStep::Arc { radius, .. } => 0.5 * radius * radius,
        }
    }

    /// Image of the base point of the removed set.
    pub fn base(&self) -> f64 {
        match *self {
            SlitStep::Vertical { u, .. } => u,
            SlitStep::Arc { center, .. } => center,
        }
    }
}

/// A sampled real driving function: `times[0] = 0`, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingFunction {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DrivingFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::invalid("driver needs equally many (>= 1) times and values"));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("driver times must start at 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("driver times must be strictly increasing"));
        }
        if values.iter().chain(times.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite driver entry".into()));
        }
        Ok(DrivingFunction { times, values })
    }

    /// Constant driver on a uniform grid of `n` steps over `[0, t]`.
    pub fn constant(value: f64, t: f64, n: usize) -> Result<Self> {
        if !(t > 0.0) || n == 0 {
            return DrivingFunction::new(vec![0.0], vec![value]);
        }
        let times = (0..=n).map(|k| t * k as f64 / n as f64).collect();
        DrivingFunction::new(times, vec![value; n + 1])
    }

    pub fn total_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// The vertical steps realizing this driver.
    pub fn steps(&self) -> impl Iterator<Item = SlitStep> + '_ {
        (1..self.times.len()).map(move |k| SlitStep::Vertical {
            u: self.values[k],
            dt: self.times[k] - self.times[k - 1],
        })
    }

    /// Runs `other` after `self`, shifting its times; the first value of
    /// `other` is dropped in favour of the continuation.
    pub fn concat(&self, other: &DrivingFunction) -> DrivingFunction {
        let t0 = self.total_time();
        let mut times = self.times.clone();
        let mut values = self.values.clone();
        times.extend(other.times[1..].iter().map(|t| t + t0));
        values.extend_from_slice(&other.values[1..]);
        DrivingFunction { times, values }
    }

    /// Linear interpolation of `W` at time `t` (clamped to the range).
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= 0.0 || n == 1 {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (w0, w1) = (self.values[k - 1], self.values[k]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// A polyline in the closed upper half-plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<Complex64>,
}

impl Curve {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empty curve"));
        }
        if let Some(p) = points.iter().find(|p| !(p.im >= -1e-12) || !p.re.is_finite()) {
            return Err(Error::Domain(format!("curve point {p} is not in the closed upper half-plane")));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::DegenerateSegment(i));
        }
        Ok(Curve { points })
    }

    /// Builds a curve after dropping consecutive repeated points.
    pub fn dedup(mut points: Vec<Complex64>) -> Result<Self> {
        points.dedup();
        Curve::new(points)
    }

    pub fn start(&self) -> Complex64 {
        self.points[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.points.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scaled(&self, r: f64) -> Curve {
        Curve { points: self.points.iter().map(|p| p * r).collect() }
    }

    pub fn translated(&self, dx: f64) -> Curve {
        Curve { points: self.points.iter().map(|p| p + dx).collect() }
    }
}

/// Outcome of flowing a point under a Loewner chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForwardOutcome {
    Mapped(Complex64),
    Swallowed { step: usize, time: f64 },
}

impl ForwardOutcome {
    pub fn mapped(self) -> Option<Complex64> {
        match self {
            ForwardOutcome::Mapped(w) => Some(w),
            ForwardOutcome::Swallowed { .. } => None,
        }
    }
}

/// `g_T(z)` for the chain driven by `driver`.
pub fn solve_forward(driver: &DrivingFunction, z: Complex64) -> ForwardOutcome {
    let mut g = z;
    let mut prev_u = driver.values[0];
    for (k, step) in driver.steps().enumerate() {
        let u = step.base();
        let d = g - u;
        let crossed = g.im == 0.0 && (g.re - prev_u) * d.re < 0.0;
        if d.norm() < SWALLOW_TOL || crossed {
            return ForwardOutcome::Swallowed { step: k + 1, time: driver.times[k] };
        }
        g = step.forward(g);
        if (g - u).norm() < SWALLOW_TOL {
            return ForwardOutcome::Swallowed { step: k + 1, time: driver.times[k + 1] };
        }
        prev_u = u;
    }
    ForwardOutcome::Mapped(g)
}

/// Applies `steps` in order (each a forward map).
pub fn apply_forward(steps: &[SlitStep], z: Complex64) -> Complex64 {
    steps.iter().fold(z, |g, s| s.forward(g))
}

/// Inverse of [`apply_forward`].
pub fn apply_inverse(steps: &[SlitStep], w: Complex64) -> Complex64 {
    steps.iter().rev().fold(w, |z, s| s.inverse(z))
}

/// `g_T'(x)` at a real point outside the hull; lies in `(0, 1]`.
pub fn hull_derivative(driver: &DrivingFunction, x: f64) -> Result<f64> {
    let mut g = x;
    let mut prev_u = driver.values[0];
    let mut deriv = 1.0;
    for (k, step) in driver.steps().enumerate() {
        let u = step.base();
        if (g - u).abs() < SWALLOW_TOL || (g - prev_u) * (g - u) < 0.0 {
            return Err(Error::Swallowed { step: k + 1, time: driver.times[k] });
        }
        deriv *= step.derivative_real(g);
        g = step.forward(Complex64::new(g, 0.0)).re;
        prev_u = u;
    }
    Ok(deriv)
}
