//! Polyline geometry: segment tests, intersection queries and areas.

use num_complex::Complex64;

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Whether the closed segments `[p1, p2]` and `[q1, q2]` meet.
pub fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

pub fn segment_distance(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

/// Bucket grid over the segments of a polyline, for proximity queries.
pub struct SegmentGrid<'a> {
    points: &'a [Complex64],
    origin: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> SegmentGrid<'a> {
    pub fn new(points: &'a [Complex64]) -> Self {
        let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let extent = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300);
        let nseg = points.len().saturating_sub(1).max(1);
        let side = ((nseg as f64).sqrt().ceil() as usize).clamp(1, 512);
        let cell = extent / side as f64 * (1.0 + 1e-9);
        let nx = ((hi.re - lo.re) / cell) as usize + 1;
        let ny = ((hi.im - lo.im) / cell) as usize + 1;
        let mut grid = SegmentGrid { points, origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for i in 0..points.len().saturating_sub(1) {
            let (x0, x1, y0, y1) = grid.cell_range(points[i], points[i + 1], 0.0);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    grid.buckets[iy * nx + ix].push(i as u32);
                }
            }
        }
        grid
    }

    fn cell_range(&self, a: Complex64, b: Complex64, pad: f64) -> (usize, usize, usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (
            f(a.re.min(b.re) - pad, self.origin.re, self.nx),
            f(a.re.max(b.re) + pad, self.origin.re, self.nx),
            f(a.im.min(b.im) - pad, self.origin.im, self.ny),
            f(a.im.max(b.im) + pad, self.origin.im, self.ny),
        )
    }

    /// Index of some segment within `guard(len_query, len_other)` of
    /// `[a, b]`, if any. `skip` filters out segments by index.
    pub fn find_close(
        &self,
        a: Complex64,
        b: Complex64,
        guard: impl Fn(f64, f64) -> f64,
        max_guard: f64,
        skip: impl Fn(usize) -> bool,
    ) -> Option<usize> {
        let pad = max_guard.max(0.0);
        // Early out: query box disjoint from the grid.
        let far = a.re.max(b.re) + pad < self.origin.re
            || a.im.max(b.im) + pad < self.origin.im
            || a.re.min(b.re) - pad > self.origin.re + self.cell * self.nx as f64
            || a.im.min(b.im) - pad > self.origin.im + self.cell * self.ny as f64;
        if far {
            return None;
        }
        let (x0, x1, y0, y1) = self.cell_range(a, b, pad);
        let la = (b - a).norm();
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                for &s in &self.buckets[iy * self.nx + ix] {
                    let s = s as usize;
                    if skip(s) {
                        continue;
                    }
                    let (p, q) = (self.points[s], self.points[s + 1]);
                    let g = guard(la, (q - p).norm());
                    if g <= 0.0 {
                        if segments_intersect(a, b, p, q) {
                            return Some(s);
                        }
                    } else if segment_distance(a, b, p, q) <= g {
                        return Some(s);
                    }
                }
            }
        }
        None
    }
}

/// Whether two polylines intersect.
pub fn polylines_intersect(a: &[Complex64], b: &[Complex64]) -> bool {
    polylines_touch(a, b, 0.0)
}

/// Whether two polylines come within the resolution tube: segments closer
/// than `tube` times the shorter of the two segment lengths count as
/// touching (`tube = 0` tests plain intersection).
pub fn polylines_touch(a: &[Complex64], b: &[Complex64], tube: f64) -> bool {
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let grid = SegmentGrid::new(big);
    let max_big = big.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    small.windows(2).any(|w| {
        let la = (w[1] - w[0]).norm();
        grid.find_close(w[0], w[1], |x, y| tube * x.min(y), tube * la.min(max_big), |_| false)
            .is_some()
    })
}

/// Whether non-adjacent segments of a polyline meet.
pub fn self_intersects(points: &[Complex64]) -> bool {
    if points.len() < 4 {
        return false;
    }
    let grid = SegmentGrid::new(points);
    (0..points.len() - 1).any(|i| {
        grid.find_close(points[i], points[i + 1], |_, _| 0.0, 0.0, |s| s + 1 >= i && s <= i + 1)
            .is_some()
    })
}

/// Signed area enclosed by the polyline closed up by its chord (shoelace).
pub fn signed_area(points: &[Complex64]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += cross(points[i], points[(i + 1) % n]);
    }
    0.5 * s
}

/// Total length of a polyline.
pub fn polyline_length(points: &[Complex64]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}
