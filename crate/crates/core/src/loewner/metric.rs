//! Discrete Fréchet distance between polylines.

use super::Curve;

/// Discrete Fréchet distance between the vertex sequences, used as a
/// computable stand-in for the reparameterization-invariant sup metric.
pub fn curve_distance(a: &Curve, b: &Curve) -> f64 {
    frechet(&a.points, &b.points)
}

pub fn frechet(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let m = b.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, &p) in a.iter().enumerate() {
        for j in 0..m {
            let d = (p - b[j]).norm();
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}
