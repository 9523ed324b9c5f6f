//! Continuum multiple SLE: the resampling Markov chain, the drifted
//! Loewner chain, cascade checks and `n_kappa`.
//!
//! Resampling curve `j` works in the half-plane. The domain is mapped to
//! `H`; a Möbius map sends a boundary point just counterclockwise of the
//! curve's first mark to infinity, so that every other curve bounds a
//! region away from the target. The outermost of those curves are unzipped
//! (each closed by a half-disc step), which maps the target component onto
//! `H`; a chord is sampled there between the images of the marks and
//! pulled back through the same maps.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::LinkPattern;
use crate::conformal::{DomainKind, DomainSpec, Parameters};
use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, polylines_touch, signed_area};
use crate::harness::stats::{ks_two_sample, KsResult};
use crate::loewner::io::{write_curve, Header};
use crate::loewner::{apply_forward, apply_inverse, sample_chord, unzip, Curve, DrivingFunction, SlitStep};
use crate::partition::{BoundaryConfig, PartitionProvider, DEFAULT_CHORD_RESOLUTION, DISJOINTNESS_TUBE};
use crate::rng::{derive_seed, rng_for};

/// `N` curves in a domain, curve `j` joining the marks of link `j` of the
/// pattern (from the smaller to the larger index).
#[derive(Clone, Debug, PartialEq)]
pub struct MultiCurveState {
    pub params: Parameters,
    pub pattern: LinkPattern,
    pub domain: DomainSpec,
    pub curves: Vec<Curve>,
}

impl MultiCurveState {
    pub fn new(params: Parameters, pattern: LinkPattern, domain: DomainSpec, curves: Vec<Curve>) -> Result<Self> {
        if matches!(domain.kind, DomainKind::UnitDisc) {
            return Err(Error::invalid("curve states live in the half-plane or a rectangle"));
        }
        let n = pattern.n_links();
        if domain.marked_points.len() != 2 * n || curves.len() != n {
            return Err(Error::invalid(format!(
                "{} marks and {} curves do not fit a pattern with {n} links",
                domain.marked_points.len(),
                curves.len()
            )));
        }
        let state = MultiCurveState { params, pattern, domain, curves };
        for j in 0..n {
            let (a, b) = state.endpoints(j);
            let c = &state.curves[j];
            let tol = 1e-9 * (1.0 + a.norm().max(b.norm()));
            if (c.start() - a).norm() > tol || (c.end() - b).norm() > tol {
                return Err(Error::invalid(format!("curve {j} does not join its marks")));
            }
        }
        if params.kappa <= 4.0 {
            state.check_disjoint(DISJOINTNESS_TUBE)?;
        }
        Ok(state)
    }

    pub fn n_curves(&self) -> usize {
        self.curves.len()
    }

    /// Marked points joined by curve `j`.
    pub fn endpoints(&self, j: usize) -> (Complex64, Complex64) {
        let (a, b) = self.pattern.links()[j];
        (self.domain.marked_points[a - 1], self.domain.marked_points[b - 1])
    }

    /// Signed area between curve `j` and its chord.
    pub fn signed_area(&self, j: usize) -> f64 {
        signed_area(&self.curves[j].points)
    }

    fn check_disjoint(&self, tube: f64) -> Result<()> {
        for i in 0..self.curves.len() {
            for k in i + 1..self.curves.len() {
                if polylines_touch(&self.curves[i].points, &self.curves[k].points, tube) {
                    return Err(Error::Geometry(format!("curves {i} and {k} meet")));
                }
            }
        }
        Ok(())
    }

    /// Curves following the boundary arc between their marks, pushed inward
    /// by `offset` times one plus the number of links nested inside.
    pub fn hugging(params: Parameters, pattern: LinkPattern, domain: DomainSpec, offset: f64, spacing: f64) -> Result<Self> {
        let outside = vec![false; pattern.n_links()];
        Self::hugging_sides(params, pattern, domain, offset, spacing, &outside)
    }

    /// Like [`hugging`](Self::hugging), but link `j` follows the arc from
    /// its second mark back to its first when `outside[j]` is set (the
    /// counterclockwise arc from `a` to `b` otherwise).
    pub fn hugging_sides(
        params: Parameters,
        pattern: LinkPattern,
        domain: DomainSpec,
        offset: f64,
        spacing: f64,
        outside: &[bool],
    ) -> Result<Self> {
        if !(offset > 0.0 && spacing > 0.0) {
            return Err(Error::invalid("offset and spacing must be positive"));
        }
        if outside.len() != pattern.n_links() {
            return Err(Error::invalid("one side flag per link"));
        }
        if domain.kind == DomainKind::HalfPlane && outside.iter().any(|&o| o) {
            return Err(Error::invalid("the outer arc of a half-plane link runs through infinity"));
        }
        let n2 = 2 * pattern.n_links();
        // Marks strictly inside the counterclockwise arc from `from` to `to`.
        let inside = |from: usize, to: usize, m: usize| (m + n2 - from) % n2 < (to + n2 - from) % n2 && m != from;
        let mut curves = Vec::with_capacity(pattern.n_links());
        for (j, &(a, b)) in pattern.links().iter().enumerate() {
            let (from, to) = if outside[j] { (b, a) } else { (a, b) };
            let depth = 1 + pattern
                .links()
                .iter()
                .filter(|&&(c, d)| (c, d) != (a, b) && inside(from, to, c) && inside(from, to, d))
                .count();
            let eps = offset * depth as f64;
            let mut pts = boundary_inset(&domain, domain.marked_points[from - 1], domain.marked_points[to - 1], eps)?;
            if outside[j] {
                pts.reverse();
            }
            let pts = densify(&pts, spacing);
            curves.push(Curve::dedup(pts).map_err(|_| Error::Geometry(format!("curve {j} is degenerate")))?);
        }
        MultiCurveState::new(params, pattern, domain, curves)
    }
}

/// Corner points of the polyline from `za` to `zb` that follows the
/// counterclockwise boundary arc between them at distance `eps`.
fn boundary_inset(domain: &DomainSpec, za: Complex64, zb: Complex64, eps: f64) -> Result<Vec<Complex64>> {
    let mut corners = vec![za];
    match domain.kind {
        DomainKind::HalfPlane => {
            corners.push(za + Complex64::new(0.0, eps));
            corners.push(zb + Complex64::new(0.0, eps));
        }
        DomainKind::Rectangle { width, height } => {
            if 2.0 * eps >= width.min(height) {
                return Err(Error::Geometry("offset too large for the rectangle".into()));
            }
            let inset = |z: Complex64| Complex64::new(z.re.clamp(eps, width - eps), z.im.clamp(eps, height - eps));
            let s0 = domain.boundary_parameter(za)?;
            let s1 = domain.boundary_parameter(zb)?;
            let per = 2.0 * (width + height);
            let s1 = if s1 > s0 { s1 } else { s1 + per };
            let rect_corners = [
                (width, Complex64::new(width, 0.0)),
                (width + height, Complex64::new(width, height)),
                (2.0 * width + height, Complex64::new(0.0, height)),
                (per, Complex64::new(0.0, 0.0)),
            ];
            corners.push(inset(za));
            for lap in [0.0, per] {
                for &(s, p) in &rect_corners {
                    if s + lap > s0 && s + lap < s1 {
                        corners.push(inset(p));
                    }
                }
            }
            corners.push(inset(zb));
        }
        DomainKind::UnitDisc => return Err(Error::invalid("the unit disc is not supported here")),
    }
    corners.push(zb);
    Ok(corners)
}

/// Inserts points so that no segment is longer than `spacing`.
pub fn densify(points: &[Complex64], spacing: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let n = ((w[1] - w[0]).norm() / spacing).ceil().max(1.0) as usize;
        for k in 0..n {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
        }
    }
    out.extend(points.last());
    out
}

/// Tunables of a resampling step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResampleOptions {
    /// Relative resolution of the sampled chord.
    pub resolution: f64,
    /// Attempts before giving up on disjointness.
    pub max_retries: usize,
    /// Disjointness tube (see [`polylines_touch`]).
    pub tube: f64,
}

impl Default for ResampleOptions {
    fn default() -> Self {
        ResampleOptions { resolution: DEFAULT_CHORD_RESOLUTION, max_retries: 50, tube: DISJOINTNESS_TUBE }
    }
}

/// Maps of a target component onto `H`.
struct Uniformizer {
    zeta: f64,
    steps: Vec<SlitStep>,
}

impl Uniformizer {
    /// `None` stands for the point at infinity.
    fn forward_h(&self, w: Option<Complex64>) -> Complex64 {
        apply_forward(&self.steps, moebius_away(w, self.zeta))
    }

    fn inverse_h(&self, v: Complex64) -> Complex64 {
        let u = apply_inverse(&self.steps, v);
        self.zeta - 1.0 / u
    }
}

/// `w -> -1/(w - zeta)`, sending infinity to 0.
fn moebius_away(w: Option<Complex64>, zeta: f64) -> Complex64 {
    match w {
        Some(w) => -1.0 / (w - zeta),
        None => Complex64::new(0.0, 0.0),
    }
}

/// Image in `H`, or `None` for the boundary point sent to infinity (the
/// top midpoint of a rectangle).
fn to_h(domain: &DomainSpec, z: Complex64) -> Result<Option<Complex64>> {
    let w = domain.to_halfplane(z)?;
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Ok(None);
    }
    Ok(Some(Complex64::new(w.re, w.im.max(0.0))))
}

/// Builds the uniformizing maps of the component of curve `j`, or of the
/// component left by removing the curves in `remove` only.
fn uniformize(state: &MultiCurveState, j: usize, remove: &[usize]) -> Result<Uniformizer> {
    let marks = &state.domain.marked_points;
    let n2 = marks.len();
    let (a, _) = state.pattern.links()[j];
    let img: Vec<Option<f64>> =
        marks.iter().map(|&z| to_h(&state.domain, z).map(|w| w.map(|w| w.re))).collect::<Result<_>>()?;
    // A boundary point on the arc from mark a to mark a + 1.
    let zeta = match (img[a - 1], img[a % n2]) {
        (Some(ia), Some(inext)) if inext > ia => 0.5 * (ia + inext),
        (Some(ia), _) => ia + 1.0 + ia.abs(),
        (None, Some(inext)) => inext - 1.0 - inext.abs(),
        (None, None) => return Err(Error::Geometry("two marks map to infinity".into())),
    };
    let m0 = |w: Option<Complex64>| moebius_away(w, zeta);
    let (xa, xb) = state.endpoints(j);
    let mut chords: Vec<(f64, f64, Vec<Complex64>)> = Vec::new();
    for &k in remove {
        let c = &state.curves[k];
        for p in [xa, xb] {
            let near = c.points.windows(2).any(|s| point_segment_distance(p, s[0], s[1]) < 1e-12);
            if near {
                return Err(Error::Geometry(format!("curve {k} touches an endpoint of curve {j}")));
            }
        }
        let mut pts: Vec<Complex64> =
            c.points.iter().map(|&z| to_h(&state.domain, z).map(m0)).collect::<Result<_>>()?;
        let last = pts.len() - 1;
        pts[0].im = 0.0;
        pts[last].im = 0.0;
        let (lo, hi) = (pts[0].re.min(pts[last].re), pts[0].re.max(pts[last].re));
        chords.push((lo, hi, pts));
    }
    let real = |x: Option<f64>| x.map(|x| Complex64::new(x, 0.0));
    let (ta, tb) = (m0(real(img[a - 1])).re, m0(real(img[state.pattern.links()[j].1 - 1])).re);
    let (tlo, thi) = (ta.min(tb), ta.max(tb));
    if chords.iter().any(|c| c.0 < tlo && thi < c.1) {
        return Err(Error::Geometry(format!("curve {j} is enclosed by another curve after normalization")));
    }
    let outer: Vec<&(f64, f64, Vec<Complex64>)> = chords
        .iter()
        .filter(|c| !chords.iter().any(|d| d.0 < c.0 && c.1 < d.1))
        .collect();
    let mut steps: Vec<SlitStep> = Vec::new();
    for (_, _, pts) in outer {
        let mut moved: Vec<Complex64> = pts.iter().map(|&z| apply_forward(&steps, z)).collect();
        let last = moved.len() - 1;
        moved[0].im = 0.0;
        moved[last].im = 0.0;
        for z in moved.iter_mut() {
            z.im = z.im.max(0.0);
        }
        steps.extend(unzip(&moved, true)?.steps);
    }
    Ok(Uniformizer { zeta, steps })
}

/// Replaces curve `j` by a chordal SLE sample in its component.
pub fn resample_step(state: &MultiCurveState, j: usize, seed: u64) -> Result<MultiCurveState> {
    resample_step_with(state, j, seed, &ResampleOptions::default())
}

pub fn resample_step_with(
    state: &MultiCurveState,
    j: usize,
    seed: u64,
    opts: &ResampleOptions,
) -> Result<MultiCurveState> {
    if state.params.kappa > 4.0 {
        return Err(Error::bounds("kappa", state.params.kappa, "(0, 4] for resampling"));
    }
    if j >= state.n_curves() {
        return Err(Error::invalid(format!("curve index {j} out of range")));
    }
    let others: Vec<usize> = (0..state.n_curves()).filter(|&k| k != j).collect();
    let u = uniformize(state, j, &others)?;
    let (xa, xb) = state.endpoints(j);
    let ha = u.forward_h(to_h(&state.domain, xa)?).re;
    let hb = u.forward_h(to_h(&state.domain, xb)?).re;
    let mut rng = rng_for(seed, 0);
    for _ in 0..opts.max_retries.max(1) {
        let Some(curve) = pull_back_chord(state, &u, ha, hb, xa, xb, opts, &mut rng)? else {
            continue;
        };
        if others.iter().all(|&k| !polylines_touch(&curve.points, &state.curves[k].points, opts.tube)) {
            let mut next = state.clone();
            next.curves[j] = curve;
            return Ok(next);
        }
    }
    Err(Error::Geometry(format!("no disjoint resample of curve {j} in {} attempts", opts.max_retries)))
}

#[allow(clippy::too_many_arguments)]
/// Bisection depth cap when refining a pulled-back chord.
const MAX_REFINE_DEPTH: u32 = 12;

fn pull_back_chord(
    state: &MultiCurveState,
    u: &Uniformizer,
    ha: f64,
    hb: f64,
    xa: Complex64,
    xb: Complex64,
    opts: &ResampleOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Curve>> {
    let mut chord = sample_chord(state.params.kappa, ha, hb, opts.resolution, rng)?;
    // the chord's far tip is joined to hb by a straight segment; put it in H
    // so refinement below fills it in
    let last = chord.len() - 1;
    chord[last] = Complex64::new(hb, 0.0);
    let pull = |w: Complex64| -> Result<Option<Complex64>> {
        let v = u.inverse_h(w);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Ok(None);
        }
        let z = state.domain.from_halfplane(v)?;
        Ok((z.re.is_finite() && z.im.is_finite()).then(|| Complex64::new(z.re, z.im.max(0.0))))
    };
    // Long physical segments are refined by bisecting in H: straight lines
    // there pull back into the right component, straight lines here need not.
    let cap = 2.0 * opts.resolution * (xb - xa).norm();
    let mut pts = vec![xa];
    let mut prev_w = chord[0];
    for (i, &w) in chord.iter().enumerate().skip(1) {
        let z = if i == last { xb } else {
            match pull(w)? {
                Some(z) => z,
                None => return Ok(None),
            }
        };
        let mut stack = vec![(w, z, 0u32)];
        let (mut lo_w, mut lo_z) = (prev_w, *pts.last().unwrap());
        while let Some(&(hi_w, hi_z, depth)) = stack.last() {
            if (hi_z - lo_z).norm() <= cap || depth >= MAX_REFINE_DEPTH {
                pts.push(hi_z);
                (lo_w, lo_z) = (hi_w, hi_z);
                stack.pop();
                continue;
            }
            let mid = (lo_w + hi_w) * 0.5;
            let mid = Complex64::new(mid.re, mid.im.max(f64::MIN_POSITIVE));
            match pull(mid)? {
                Some(mz) => stack.push((mid, mz, depth + 1)),
                None => return Ok(None),
            }
        }
        prev_w = w;
    }
    Ok(Curve::dedup(pts).ok())
}

/// Tunables of a resampling chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainOptions {
    pub steps: usize,
    /// Steps discarded before recording.
    pub burn_in: usize,
    /// Record every `stride`-th state after burn-in.
    pub stride: usize,
    pub resample: ResampleOptions,
    /// Curves allowed to move (all when `None`).
    pub movable: Option<Vec<usize>>,
}

impl ChainOptions {
    pub fn new(steps: usize) -> Self {
        ChainOptions { steps, burn_in: 0, stride: 1, resample: ResampleOptions::default(), movable: None }
    }
}

/// Runs the chain, calling `record(step, state)` on the initial state (when
/// `burn_in == 0`) and on every recorded state; returns the final state.
pub fn run_chain_with(
    initial: &MultiCurveState,
    opts: &ChainOptions,
    seed: u64,
    mut record: impl FnMut(usize, &MultiCurveState),
) -> Result<MultiCurveState> {
    if initial.params.kappa > 4.0 {
        return Err(Error::bounds("kappa", initial.params.kappa, "(0, 4] for resampling"));
    }
    let movable: Vec<usize> = opts.movable.clone().unwrap_or_else(|| (0..initial.n_curves()).collect());
    if movable.is_empty() || movable.iter().any(|&k| k >= initial.n_curves()) {
        return Err(Error::invalid("no valid curve to resample"));
    }
    let stride = opts.stride.max(1);
    let mut state = initial.clone();
    if opts.burn_in == 0 {
        record(0, &state);
    }
    for s in 1..=opts.steps {
        let mut pick = rng_for(seed, 2 * s as u64);
        let j = movable[pick.random_range(0..movable.len())];
        state = resample_step_with(&state, j, derive_seed(seed, 2 * s as u64 + 1), &opts.resample)?;
        if s >= opts.burn_in && (s - opts.burn_in) % stride == 0 {
            record(s, &state);
        }
    }
    Ok(state)
}

/// Resampling chain trajectory: the initial state and every state
/// thereafter (`steps = 0` returns just the initial state).
pub fn run_resampling_chain(initial: &MultiCurveState, steps: usize, seed: u64) -> Result<Vec<MultiCurveState>> {
    let mut out = Vec::with_capacity(steps + 1);
    run_chain_with(initial, &ChainOptions::new(steps), seed, |_, s| out.push(s.clone()))?;
    Ok(out)
}

#[derive(Serialize)]
struct Manifest<'a> {
    seed: u64,
    kappa: f64,
    pattern: String,
    stride: usize,
    steps: &'a [usize],
}

/// Writes one curve file per recorded `(step, j)` and `manifest.json`.
pub fn write_trajectory(dir: &Path, states: &[(usize, MultiCurveState)], seed: u64, stride: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let Some((_, first)) = states.first() else {
        return Err(Error::invalid("empty trajectory"));
    };
    let header = Header { capacity: 0.0, kappa: first.params.kappa, seed };
    for (step, s) in states {
        for (j, c) in s.curves.iter().enumerate() {
            write_curve(&dir.join(format!("step{step:06}_curve{j}.txt")), c, &header)?;
        }
    }
    let steps: Vec<usize> = states.iter().map(|s| s.0).collect();
    let m = Manifest { seed, kappa: first.params.kappa, pattern: first.pattern.to_string(), stride, steps: &steps };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
    Ok(())
}

/// `kappa * d/dx_j log Z_alpha` by central differences with step
/// `max(1e-4 * min gap, 1e-10)`.
pub fn drift(
    params: &Parameters,
    provider: &dyn PartitionProvider,
    x: &BoundaryConfig,
    alpha: &LinkPattern,
    j: usize,
) -> Result<f64> {
    let pts = x.points();
    let gap = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let h = (1e-4 * gap).max(1e-10);
    let shifted = |d: f64| -> Result<f64> {
        let mut p = pts.to_vec();
        p[j - 1] += d;
        Ok(provider.evaluate_checked(&BoundaryConfig::new(p)?, alpha)?.ln())
    };
    Ok(params.kappa * (shifted(h)? - shifted(-h)?) / (2.0 * h))
}

/// Curve points traced from a drifted run.
pub const TRACE_POINTS: usize = 2000;

/// Relative gap at which a drifted run rescales its coordinates.
pub const EPOCH_GAP: f64 = 1e-2;

/// Relative distance of the tip from the target at which a run stops.
pub const TIP_TOL: f64 = 0.01;

const MAX_EPOCHS: usize = 60;
const MAX_STEPS: usize = 2_000_000;

/// Drifted Loewner chain growing from `x_j` towards its partner under `alpha`.
#[derive(Clone, Debug)]
pub struct DriftedRun {
    pub curve: Curve,
    /// Driver of the first epoch, in the original coordinates.
    pub driver: DrivingFunction,
    /// Drift used at each step (in the coordinates of its epoch).
    pub drifts: Vec<f64>,
    /// Gap `V^k - W` at the start of each step (same coordinates).
    pub gaps: Vec<f64>,
    /// Number of coordinate rescalings.
    pub epochs: usize,
}

/// Slit steps in coordinates `z` related to the previous epoch's final
/// coordinates by `origin + scale * z`.
struct Epoch {
    origin: f64,
    scale: f64,
    steps: Vec<SlitStep>,
}

/// Tip after the first `m` steps of epoch `e`, in original coordinates.
fn epoch_tip(epochs: &[Epoch], e: usize, m: usize) -> Complex64 {
    let steps = &epochs[e].steps[..m];
    let mut z = apply_inverse(steps, Complex64::new(steps[m - 1].base(), 0.0));
    for k in (1..=e).rev() {
        z = epochs[k].origin + epochs[k].scale * z;
        z = apply_inverse(&epochs[k - 1].steps, z);
    }
    z
}

/// Curve of the drifted chain; see [`sample_drifted_run`].
pub fn sample_drifted_chain(
    params: &Parameters,
    x: &BoundaryConfig,
    alpha: &LinkPattern,
    j: usize,
    provider: &dyn PartitionProvider,
    dt: f64,
    seed: u64,
) -> Result<Curve> {
    Ok(sample_drifted_run(params, x, alpha, j, provider, dt, seed)?.curve)
}

/// Euler–Maruyama evolution of `W` (driver) and the other points `V^i`
/// until `x_k` is swallowed.
///
/// The step is `dt (d / span)^2`, with `d` the distance from `W` to the
/// nearest other point, so drift and noise stay small relative to the gaps
/// at every scale. A small gap alone does not put the tip near `x_k`: the
/// target may sit deep in a fjord of the hull, where the gap must shrink by
/// many orders of magnitude before the tip arrives. To keep precision, each
/// time the gap falls below `EPOCH_GAP` the coordinates are moved to
/// `(z - W) / |V^k - W|` (pure partition functions are covariant, so the
/// drift transforms consistently) and the tip is located; the run stops
/// when the tip is within `TIP_TOL span` of `x_k`, or when the gap changes
/// sign.
pub fn sample_drifted_run(
    params: &Parameters,
    x: &BoundaryConfig,
    alpha: &LinkPattern,
    j: usize,
    provider: &dyn PartitionProvider,
    dt: f64,
    seed: u64,
) -> Result<DriftedRun> {
    let n2 = x.points().len();
    if alpha.n_links() != x.n_links() {
        return Err(Error::invalid("pattern and configuration sizes differ"));
    }
    if !(1..=n2).contains(&j) {
        return Err(Error::invalid(format!("index {j} outside 1..={n2}")));
    }
    let k = alpha.partner(j).ok_or_else(|| Error::Precondition(format!("no link at {j}")))?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::bounds("dt", dt, "(0, inf)"));
    }
    let kappa = params.kappa;
    let (lo, hi) = (j.min(k), j.max(k));
    let inside = |i: usize| i > lo && i < hi;
    let span = (x.x(k) - x.x(j)).abs();
    let target = Complex64::new(x.x(k), 0.0);
    let mut unit = span;
    let mut pts = x.points().to_vec();
    let mut rng = rng_for(seed, 0);
    let mut epochs = vec![Epoch { origin: 0.0, scale: 1.0, steps: Vec::new() }];
    let (mut times, mut values) = (vec![0.0], vec![pts[j - 1]]);
    let (mut drifts, mut gaps) = (Vec::new(), Vec::new());
    let mut total = 0;
    loop {
        let w = pts[j - 1];
        let gap = pts[k - 1] - w;
        if gap.abs() < EPOCH_GAP * unit {
            let e = epochs.len() - 1;
            let m = epochs[e].steps.len();

            if (epoch_tip(&epochs, e, m) - target).norm() < TIP_TOL * span {
                break;
            }
            if epochs.len() == MAX_EPOCHS {
                return Err(Error::NumericalBlowup(format!("tip did not reach x_{k} after {MAX_EPOCHS} rescalings")));
            }
            let s = gap.abs();
            for p in pts.iter_mut() {
                *p = (*p - w) / s;
            }
            epochs.push(Epoch { origin: w, scale: s, steps: Vec::new() });
            unit = 1.0;
            continue;
        }
        let cfg = BoundaryConfig::new(pts.clone())?;
        let b = drift(params, provider, &cfg, alpha, j)?;
        let near = (0..n2).filter(|&i| i != j - 1).map(|i| (pts[i] - w).abs()).fold(f64::INFINITY, f64::min);
        let h = dt * (near / unit).powi(2);
        let dbm: f64 = rng.sample(StandardNormal);
        let w_new = w + (kappa * h).sqrt() * dbm + b * h;
        let mut swallowed = false;
        for i in 1..=n2 {
            if i == j {
                continue;
            }
            let v = pts[i - 1];
            // exact image under the slit step based at the new driver value,
            // consistent with the traced curve
            let d = v - w_new;
            let v_new = w_new + d.signum() * (d * d + 4.0 * h).sqrt();
            let crossed = d.signum() != (v - w).signum();
            if i == k || inside(i) {
                swallowed |= crossed;
            } else if crossed || !v_new.is_finite() {
                return Err(Error::NumericalBlowup(format!("point {i} hit the driver before x_{k}; reduce dt")));
            }
            pts[i - 1] = v_new;
        }
        pts[j - 1] = w_new;
        epochs.last_mut().unwrap().steps.push(SlitStep::Vertical { u: w_new, dt: h });
        if epochs.len() == 1 {
            times.push(times.last().unwrap() + h);
            values.push(w_new);
        }
        drifts.push(b);
        gaps.push(gap);
        total += 1;
        if swallowed {
            break;
        }
        if total > MAX_STEPS {
            return Err(Error::NumericalBlowup(format!("x_{k} not swallowed after {MAX_STEPS} steps")));
        }
    }
    let stride = total.div_ceil(TRACE_POINTS).max(1);
    let mut points = vec![Complex64::new(x.x(j), 0.0)];
    let mut count = 0;
    for (e, ep) in epochs.iter().enumerate() {
        for m in 1..=ep.steps.len() {
            count += 1;
            if count % stride == 0 || count == total {
                points.push(epoch_tip(&epochs, e, m));
            }
        }
    }
    let curve = Curve::dedup(points)?;
    let driver = DrivingFunction::new(times, values)?;
    Ok(DriftedRun { curve, driver, drifts, gaps, epochs: epochs.len() - 1 })
}

/// Outcome of a cascade comparison.
#[derive(Clone, Debug, Serialize)]
pub struct CascadeReport {
    pub samples: usize,
    /// No remaining curves to compare.
    pub vacuous: bool,
    pub ks: Option<KsResult>,
    pub pass: bool,
}

/// Given samples of the global chain, compares the remaining curves
/// (conditionally on the curve of the nearest-neighbour `link`) with a
/// chain of `steps` resamplings run only on those curves, via the signed
/// area of the first remaining curve.
pub fn cascade_check(samples: &[MultiCurveState], link: (usize, usize), steps: usize, seed: u64) -> Result<CascadeReport> {
    let first = samples.first().ok_or_else(|| Error::Statistics("no samples".into()))?;
    let n = first.n_curves();
    let n2 = 2 * n;
    let (a, b) = (link.0.min(link.1), link.0.max(link.1));
    let nearest = b == a + 1 || (a == 1 && b == n2);
    let fixed = first.pattern.index_of((a, b));
    let (true, Some(fixed)) = (nearest, fixed) else {
        return Err(Error::Precondition(format!("pattern {} has no nearest-neighbour link {a}-{b}", first.pattern)));
    };
    if n == 1 {
        return Ok(CascadeReport { samples: samples.len(), vacuous: true, ks: None, pass: true });
    }
    if samples.len() < 20 {
        return Err(Error::Statistics(format!("{} samples are too few for a cascade check", samples.len())));
    }
    let movable: Vec<usize> = (0..n).filter(|&k| k != fixed).collect();
    let watched = movable[0];
    let conditional: Vec<f64> = samples.iter().map(|s| s.signed_area(watched)).collect();
    let mut opts = ChainOptions::new(steps.max(1));
    opts.burn_in = opts.steps;
    opts.movable = Some(movable);
    let direct: Vec<f64> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| Ok(run_chain_with(s, &opts, derive_seed(seed, i as u64), |_, _| {})?.signed_area(watched)))
        .collect::<Result<_>>()?;
    let ks = ks_two_sample(&conditional, &direct)?;
    Ok(CascadeReport { samples: samples.len(), vacuous: false, ks: Some(ks), pass: !ks.reject })
}

/// `n_kappa = ceil(kappa / (8 - kappa)) + 1` for `kappa` in `(4, 8)`.
pub fn n_kappa(kappa: f64) -> Result<usize> {
    if !(kappa > 4.0 && kappa < 8.0) {
        return Err(Error::bounds("kappa", kappa, "(4, 8)"));
    }
    let r = kappa / (8.0 - kappa);
    // exact integer ratios must not be bumped up by rounding
    let c = if (r - r.round()).abs() < 1e-9 { r.round() } else { r.ceil() };
    Ok(c as usize + 1)
}
