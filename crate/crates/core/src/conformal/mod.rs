//! Boundary Poisson kernels, conformal covariance and the closed-form maps
//! from the half-plane, the unit disc and rectangles onto the upper
//! half-plane `H`.

pub mod elliptic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use elliptic::{carlson_rf, complete_k_from_complement, modulus_for_period_ratio, sncndn_complex};

/// Distance under which a point is considered to sit on a boundary piece.
const BOUNDARY_TOL: f64 = 1e-12;

/// The `(kappa, h, c)` triple of an SLE family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub kappa: f64,
    pub h: f64,
    pub c: f64,
}

impl Parameters {
    /// `h = (6 - kappa) / (2 kappa)`, `c = (3 kappa - 8)(6 - kappa) / (2 kappa)`.
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 8.0) {
            return Err(Error::bounds("kappa", kappa, "(0, 8)"));
        }
        Ok(Parameters {
            kappa,
            h: (6.0 - kappa) / (2.0 * kappa),
            c: (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa),
        })
    }
}

pub fn make_parameters(kappa: f64) -> Result<Parameters> {
    Parameters::new(kappa)
}

/// `H_H(x, y) = |y - x|^{-2}`, without the `1/pi` normalization.
pub fn poisson_kernel_halfplane(x: f64, y: f64) -> Result<f64> {
    if x == y {
        return Err(Error::Singularity(format!("Poisson kernel at coincident points x = y = {x}")));
    }
    let d = y - x;
    Ok(1.0 / (d * d))
}

/// A Möbius map `z -> (a z + b) / (c z + d)` with real coefficients and
/// `ad - bc > 0`, i.e. an automorphism of `H`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::invalid(format!("Möbius determinant {det} must be positive")));
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    pub fn apply_real(&self, x: f64) -> f64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = z * self.c + self.d;
        Complex64::new(self.det(), 0.0) / (den * den)
    }

    pub fn derivative_real(&self, x: f64) -> f64 {
        let den = self.c * x + self.d;
        self.det() / (den * den)
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }
}

/// Cayley map from the unit disc onto `H` sending the boundary point `pole`
/// to infinity: `z -> i (pole + z) / (pole - z)`.
#[derive(Clone, Copy, Debug)]
pub struct Cayley {
    pub pole: Complex64,
}

impl Cayley {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::i() * (self.pole + z) / (self.pole - z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = self.pole - z;
        Complex64::i() * 2.0 * self.pole / (d * d)
    }

    pub fn inverse(&self, w: Complex64) -> Complex64 {
        // w (p - z) = i (p + z)  =>  z = p (w - i) / (w + i)
        self.pole * (w - Complex64::i()) / (w + Complex64::i())
    }
}

/// Conformal map from `[0, ell] x [0, 1]` onto `H` via `sn`.
///
/// The bottom edge goes to `[-1, 1]`, the corners to `-1, 1, 1/k, -1/k`
/// (counterclockwise from the origin) and the midpoint of the top edge to
/// infinity. Points in the upper half of the rectangle are evaluated in the
/// inverted chart `-1/phi`, which stays bounded there.
#[derive(Clone, Copy, Debug)]
pub struct RectangleMap {
    pub ell: f64,
    pub k: f64,
    pub kp: f64,
    pub big_k: f64,
    pub big_kp: f64,
}

/// Which of the two bounded charts an image is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// `w = phi(z)`.
    Direct,
    /// `w = -1 / phi(z)`.
    Inverted,
}

impl RectangleMap {
    pub fn new(ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::bounds("ell", ell, "(0, inf)"));
        }
        let (k, kp) = modulus_for_period_ratio(2.0 / ell);
        Ok(RectangleMap {
            ell,
            k,
            kp,
            big_k: complete_k_from_complement(kp),
            big_kp: complete_k_from_complement(k),
        })
    }

    fn scale(&self) -> f64 {
        2.0 * self.big_k / self.ell
    }

    fn check_inside(&self, z: Complex64) -> Result<()> {
        let tol = BOUNDARY_TOL * self.ell.max(1.0);
        if !(z.re >= -tol && z.re <= self.ell + tol && z.im >= -tol && z.im <= 1.0 + tol) {
            return Err(Error::Domain(format!("{z} is outside [0, {}] x [0, 1]", self.ell)));
        }
        Ok(())
    }

    /// Whether `z` lies on the boundary, and if so whether at a corner.
    fn boundary_kind(&self, z: Complex64) -> (bool, bool) {
        let tol = BOUNDARY_TOL * self.ell.max(1.0);
        let on_v = z.re.abs() <= tol || (z.re - self.ell).abs() <= tol;
        let on_h = z.im.abs() <= tol || (z.im - 1.0).abs() <= tol;
        (on_v || on_h, on_v && on_h)
    }

    /// Image of `z` together with the derivative, in the chart that keeps
    /// both bounded near `z`.
    pub fn chart(&self, z: Complex64) -> Result<(Chart, Complex64, Complex64)> {
        self.check_inside(z)?;
        let (on_boundary, _) = self.boundary_kind(z);
        let s = self.scale();
        let u = (z - self.ell / 2.0) * s;
        let (chart, mut w, dw) = if z.im <= 0.5 {
            let (sn, cn, dn) = sncndn_complex(u, self.k, self.kp);
            (Chart::Direct, sn, cn * dn * s)
        } else {
            // sn(v + iK') = 1 / (k sn v), so -1/phi = -k sn(v).
            let v = u - Complex64::new(0.0, self.big_kp);
            let (sn, cn, dn) = sncndn_complex(v, self.k, self.kp);
            (Chart::Inverted, -sn * self.k, -cn * dn * (self.k * s))
        };
        if on_boundary {
            w.im = 0.0;
        } else if w.im <= 0.0 {
            w.im = f64::MIN_POSITIVE;
        }
        Ok((chart, w, dw))
    }

    pub fn to_halfplane(&self, z: Complex64) -> Result<Complex64> {
        let (chart, w, _) = self.chart(z)?;
        Ok(match chart {
            Chart::Direct => w,
            // The top midpoint is the preimage of infinity.
            Chart::Inverted if w.norm() == 0.0 => Complex64::new(f64::INFINITY, 0.0),
            Chart::Inverted => -1.0 / w,
        })
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let (chart, w, dw) = self.chart(z)?;
        Ok(match chart {
            Chart::Direct => dw,
            Chart::Inverted => dw / (w * w),
        })
    }

    /// Inverse map from the closed half-plane back to the rectangle.
    pub fn from_halfplane(&self, w: Complex64) -> Result<Complex64> {
        if !(w.im >= -BOUNDARY_TOL * w.norm().max(1.0)) || !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::Domain(format!("{w} is not in the closed upper half-plane")));
        }
        let one = Complex64::new(1.0, 0.0);
        let k2 = self.k * self.k;
        let nudge = 1e-14 * w.norm().max(1.0);
        let s = self.scale();
        let u = if w.norm() * self.k.sqrt() <= 1.0 {
            let w = Complex64::new(w.re, w.im.max(nudge));
            let u0 = w * carlson_rf(one - w * w, one - w * w * k2, one);
            self.newton(u0, w)
        } else {
            // sn(v) = 1/(k w) with v = u - iK' in the lower half strip.
            let t = one / (w * self.k);
            let t = Complex64::new(t.re, t.im.min(-1e-14 * t.norm().max(1e-300)));
            let v0 = t * carlson_rf(one - t * t, one - t * t * k2, one);
            self.newton(v0, t) + Complex64::new(0.0, self.big_kp)
        };
        let z = u / s + self.ell / 2.0;
        Ok(Complex64::new(z.re.clamp(0.0, self.ell), z.im.clamp(0.0, 1.0)))
    }

    fn newton(&self, mut u: Complex64, target: Complex64) -> Complex64 {
        let mut best = (sncndn_complex(u, self.k, self.kp).0 - target).norm();
        for _ in 0..3 {
            let (sn, cn, dn) = sncndn_complex(u, self.k, self.kp);
            let d = cn * dn;
            if d.norm() < 1e-8 {
                break;
            }
            let cand = u - (sn - target) / d;
            let r = (sncndn_complex(cand, self.k, self.kp).0 - target).norm();
            if !(r < best) {
                break;
            }
            best = r;
            u = cand;
        }
        u
    }

    /// Images of the corners `0, ell, ell + i, i`.
    pub fn corner_images(&self) -> [f64; 4] {
        [-1.0, 1.0, 1.0 / self.k, -1.0 / self.k]
    }
}

/// `sn`-based map of `[0, ell] x [0, 1]` onto `H`.
pub fn map_rect_to_halfplane(ell: f64, z: Complex64) -> Result<Complex64> {
    RectangleMap::new(ell)?.to_halfplane(z)
}

/// The supported domain shapes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    HalfPlane,
    UnitDisc,
    /// `[0, width] x [0, height]`.
    Rectangle { width: f64, height: f64 },
}

/// A domain with counterclockwise-ordered marked boundary points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub marked_points: Vec<Complex64>,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, marked_points: Vec<Complex64>) -> Result<Self> {
        if let DomainKind::Rectangle { width, height } = kind {
            if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
                return Err(Error::invalid(format!("rectangle {width} x {height} is degenerate")));
            }
        }
        let spec = DomainSpec { kind, marked_points };
        let mut params = Vec::with_capacity(spec.marked_points.len());
        for &z in &spec.marked_points {
            params.push(spec.boundary_parameter(z)?);
        }
        let descents = (0..params.len())
            .filter(|&i| {
                let next = params[(i + 1) % params.len()];
                next <= params[i]
            })
            .count();
        let strictly_ordered = match spec.kind {
            // The real line is not closed up: no wrap-around allowed.
            DomainKind::HalfPlane => params.windows(2).all(|w| w[0] < w[1]),
            _ => params.len() < 2 || descents == 1,
        };
        let distinct = {
            let mut p = params.clone();
            p.sort_by(f64::total_cmp);
            p.windows(2).all(|w| w[0] < w[1])
        };
        if !strictly_ordered || !distinct {
            return Err(Error::invalid("marked points are not strictly counterclockwise"));
        }
        Ok(spec)
    }

    pub fn half_plane(points: &[f64]) -> Result<Self> {
        DomainSpec::new(DomainKind::HalfPlane, points.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn rectangle(width: f64, height: f64, marked_points: Vec<Complex64>) -> Result<Self> {
        DomainSpec::new(DomainKind::Rectangle { width, height }, marked_points)
    }

    /// Position of a boundary point along the boundary, counterclockwise:
    /// the real coordinate for `H`, the argument in `[0, 2pi)` for the disc,
    /// and the arclength from the origin for rectangles.
    pub fn boundary_parameter(&self, z: Complex64) -> Result<f64> {
        match self.kind {
            DomainKind::HalfPlane => {
                if z.im.abs() > BOUNDARY_TOL || !z.re.is_finite() {
                    return Err(Error::Domain(format!("{z} is not on the real line")));
                }
                Ok(z.re)
            }
            DomainKind::UnitDisc => {
                if (z.norm() - 1.0).abs() > BOUNDARY_TOL {
                    return Err(Error::Domain(format!("{z} is not on the unit circle")));
                }
                Ok(z.arg().rem_euclid(std::f64::consts::TAU))
            }
            DomainKind::Rectangle { width, height } => {
                let tol = BOUNDARY_TOL * width.max(height).max(1.0);
                let (x, y) = (z.re, z.im);
                if x < -tol || x > width + tol || y < -tol || y > height + tol {
                    return Err(Error::Domain(format!("{z} is outside the rectangle")));
                }
                if y.abs() <= tol && x < width - tol {
                    Ok(x.max(0.0))
                } else if (x - width).abs() <= tol && y < height - tol {
                    Ok(width + y.max(0.0))
                } else if (y - height).abs() <= tol && x > tol {
                    Ok(width + height + (width - x))
                } else if x.abs() <= tol && y > tol {
                    Ok(2.0 * width + height + (height - y))
                } else {
                    Err(Error::Domain(format!("{z} is not on the rectangle boundary")))
                }
            }
        }
    }

    fn is_corner(&self, z: Complex64) -> bool {
        if let DomainKind::Rectangle { width, height } = self.kind {
            let tol = BOUNDARY_TOL * width.max(height).max(1.0);
            let on_v = z.re.abs() <= tol || (z.re - width).abs() <= tol;
            let on_h = z.im.abs() <= tol || (z.im - height).abs() <= tol;
            on_v && on_h
        } else {
            false
        }
    }

    /// Canonical conformal map onto `H`: identity for `H`, the Cayley map
    /// with pole `-1` for the disc, and the `sn` map for rectangles.
    pub fn to_halfplane(&self, z: Complex64) -> Result<Complex64> {
        match self.kind {
            DomainKind::HalfPlane => Ok(z),
            DomainKind::UnitDisc => {
                if z.norm() > 1.0 + BOUNDARY_TOL {
                    return Err(Error::Domain(format!("{z} is outside the unit disc")));
                }
                Ok(Cayley { pole: Complex64::new(-1.0, 0.0) }.apply(z))
            }
            DomainKind::Rectangle { width, height } => {
                RectangleMap::new(width / height)?.to_halfplane(z / height)
            }
        }
    }

    pub fn from_halfplane(&self, w: Complex64) -> Result<Complex64> {
        match self.kind {
            DomainKind::HalfPlane => Ok(w),
            DomainKind::UnitDisc => Ok(Cayley { pole: Complex64::new(-1.0, 0.0) }.inverse(w)),
            DomainKind::Rectangle { width, height } => {
                Ok(RectangleMap::new(width / height)?.from_halfplane(w)? * height)
            }
        }
    }

    /// Boundary Poisson kernel `H(x, y)`, defined from the half-plane by
    /// conformal covariance.
    pub fn poisson_kernel(&self, x: Complex64, y: Complex64) -> Result<f64> {
        self.boundary_parameter(x)?;
        self.boundary_parameter(y)?;
        if x == y {
            return Err(Error::Singularity(format!("Poisson kernel at coincident points {x}")));
        }
        for p in [x, y] {
            if self.is_corner(p) {
                return Err(Error::NonSmoothBoundary(p.to_string()));
            }
        }
        match self.kind {
            DomainKind::HalfPlane => poisson_kernel_halfplane(x.re, y.re),
            DomainKind::UnitDisc => {
                // Pole opposite the pair keeps both images finite.
                let mid = x + y;
                let pole = if mid.norm() > 1e-8 { -mid / mid.norm() } else { x * Complex64::i() };
                let m = Cayley { pole };
                let (wx, wy) = (m.apply(x), m.apply(y));
                let dx = m.derivative(x).norm();
                let dy = m.derivative(y).norm();
                Ok(dx * dy * poisson_kernel_halfplane(wx.re, wy.re)?)
            }
            DomainKind::Rectangle { width, height } => {
                let map = RectangleMap::new(width / height)?;
                let (cx, wx, dx) = map.chart(x / height)?;
                let (cy, wy, dy) = map.chart(y / height)?;
                // Same chart: |a'||b'| / |a - b|^2. Mixed charts, with
                // phi(y) = -1/b: |a'||b'| / |a b + 1|^2.
                let den = if cx == cy { (wx - wy).norm_sqr() } else { (wx * wy + 1.0).norm_sqr() };
                if den == 0.0 {
                    return Err(Error::Singularity(format!("Poisson kernel at coincident images of {x}, {y}")));
                }
                Ok(dx.norm() * dy.norm() / den / (height * height))
            }
        }
    }
}

/// Boundary Poisson kernel of `domain` between `x` and `y`.
pub fn poisson_kernel(domain: &DomainSpec, x: Complex64, y: Complex64) -> Result<f64> {
    domain.poisson_kernel(x, y)
}
