//! Complete elliptic integrals, Jacobi elliptic functions and Carlson's
//! symmetric integral, enough to realize the rectangle/half-plane map.

use num_complex::Complex64;
use std::f64::consts::PI;

const AGM_TOL: f64 = 1e-16;

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let a1 = 0.5 * (a + b);
        let b1 = (a * b).sqrt();
        if (a1 - b1).abs() <= AGM_TOL * a1 {
            return a1;
        }
        a = a1;
        b = b1;
    }
    a
}

/// Complete elliptic integral of the first kind `K`, given the modulus
/// through its complement `kp = sqrt(1 - k^2)`.
pub fn complete_k_from_complement(kp: f64) -> f64 {
    PI / (2.0 * agm(1.0, kp))
}

fn theta2(q: f64) -> f64 {
    let mut s = 0.0;
    for n in 0..64 {
        let t = q.powi(n * (n + 1));
        s += t;
        if t < 1e-18 {
            break;
        }
    }
    2.0 * q.powf(0.25) * s
}

fn theta3(q: f64) -> f64 {
    let mut s = 1.0;
    for n in 1..64 {
        let t = q.powi(n * n);
        s += 2.0 * t;
        if t < 1e-18 {
            break;
        }
    }
    s
}

fn theta4(q: f64) -> f64 {
    let mut s = 1.0;
    for n in 1..64 {
        let t = q.powi(n * n);
        s += if n % 2 == 0 { 2.0 * t } else { -2.0 * t };
        if t < 1e-18 {
            break;
        }
    }
    s
}

/// Modulus pair `(k, k')` whose period ratio satisfies `K'/K = ratio`.
///
/// Uses the nome `q = exp(-pi K'/K)` and theta-function quotients; when
/// `q` is large the complementary nome is used instead so that both series
/// converge fast and both moduli keep full relative precision.
pub fn modulus_for_period_ratio(ratio: f64) -> (f64, f64) {
    if ratio >= 1.0 {
        let q = (-PI * ratio).exp();
        let t3 = theta3(q);
        let k = (theta2(q) / t3).powi(2);
        let kp = (theta4(q) / t3).powi(2);
        (k, kp)
    } else {
        let q = (-PI / ratio).exp();
        let t3 = theta3(q);
        let kp = (theta2(q) / t3).powi(2);
        let k = (theta4(q) / t3).powi(2);
        (k, kp)
    }
}

/// Real Jacobi functions `(sn, cn, dn)` of `u` with modulus `k`
/// (complement `kp`), by descending Landen transformation (AGM scheme).
pub fn sncndn(u: f64, k: f64, kp: f64) -> (f64, f64, f64) {
    if k < 1e-300 {
        return (u.sin(), u.cos(), 1.0);
    }
    if kp < 1e-300 {
        let ch = u.cosh();
        return (u.tanh(), 1.0 / ch, 1.0 / ch);
    }
    let mut a = [0.0f64; 40];
    let mut c = [0.0f64; 40];
    a[0] = 1.0;
    c[0] = k;
    let mut b = kp;
    let mut n = 0;
    while n < 39 {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
        if c[n].abs() <= 1e-17 * a[n] {
            break;
        }
    }
    let mut phi = (2f64).powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn^2 = k'^2 + k^2 cn^2 has no cancellation anywhere on the real line.
    let dn = (kp * kp + k * k * cn * cn).sqrt();
    (sn, cn, dn)
}

/// Complex Jacobi functions via the addition formulas, splitting
/// `u = x + iy` into a real part with modulus `k` and an imaginary part
/// with the complementary modulus.
pub fn sncndn_complex(u: Complex64, k: f64, kp: f64) -> (Complex64, Complex64, Complex64) {
    let (s, c, d) = sncndn(u.re, k, kp);
    if u.im == 0.0 {
        return (Complex64::new(s, 0.0), Complex64::new(c, 0.0), Complex64::new(d, 0.0));
    }
    let (s1, c1, d1) = sncndn(u.im, kp, k);
    let k2 = k * k;
    let delta = c1 * c1 + k2 * s * s * s1 * s1;
    let sn = Complex64::new(s * d1, c * d * s1 * c1) / delta;
    let cn = Complex64::new(c * c1, -s * d * s1 * d1) / delta;
    let dn = Complex64::new(d * c1 * d1, -k2 * s * c * s1) / delta;
    (sn, cn, dn)
}

/// Carlson's symmetric integral `R_F(x, y, z)` for complex arguments off
/// the negative real axis, by the duplication algorithm.
pub fn carlson_rf(mut x: Complex64, mut y: Complex64, mut z: Complex64) -> Complex64 {
    for _ in 0..200 {
        let mu = (x + y + z) / 3.0;
        let dx = (mu - x) / mu;
        let dy = (mu - y) / mu;
        let dz = (mu - z) / mu;
        let err = dx.norm().max(dy.norm()).max(dz.norm());
        if err < 1e-3 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let series = Complex64::new(1.0, 0.0) - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0
                - e2 * e3 * (3.0 / 44.0);
            return series / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = (x + lambda) * 0.25;
        y = (y + lambda) * 0.25;
        z = (z + lambda) * 0.25;
    }
    let mu = (x + y + z) / 3.0;
    Complex64::new(1.0, 0.0) / mu.sqrt()
}
