//! Critical Ising model on a discrete polygon with frozen boundary spins,
//! and the interfaces separating `+` from `-` clusters.
//!
//! Interfaces are traced across primal edges: the state is the crossed
//! edge `(L, R)` with `L = +` on the left and `R = -` on the right. In the
//! cell ahead, with `A` ahead of `L` and `B` ahead of `R`:
//!
//! * `A = -`: exit through `(L, A)` (left turn; ambiguous when `B = +`);
//! * `A = +`, `B = -`: exit through `(A, B)`;
//! * `A = +`, `B = +`: exit through `(B, R)`.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{pattern_of_matching, LinkPattern};
use crate::error::{Error, Result};
use crate::lattice::DiscretePolygon;
use crate::rng::rng_for;

/// `beta_c = log(1 + sqrt 2) / 2`.
pub fn beta_c() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

/// Spins on the vertices of a polygon; frozen vertices are never updated.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinConfig {
    pub polygon: DiscretePolygon,
    pub spins: Vec<i8>,
    pub frozen: Vec<bool>,
}

impl SpinConfig {
    /// Alternating boundary conditions: `+` on arcs `(x_{2j-1}, x_{2j})`,
    /// `-` elsewhere; interior starts at `+`.
    pub fn alternating(polygon: DiscretePolygon) -> Result<Self> {
        if polygon.n_marks() < 2 {
            return Err(Error::invalid("alternating boundary needs at least two marks"));
        }
        let p = polygon.clone();
        Ok(Self::with_boundary(polygon, |v| {
            if DiscretePolygon::is_plus_arc(p.arc_of_vertex(v).unwrap()) {
                1
            } else {
                -1
            }
        }))
    }

    /// Boundary spins from `f`, interior `+`.
    pub fn with_boundary(polygon: DiscretePolygon, f: impl Fn(usize) -> i8) -> Self {
        let n = polygon.n_vertices();
        let mut spins = vec![1i8; n];
        let mut frozen = vec![false; n];
        for &v in polygon.boundary() {
            spins[v] = if f(v) >= 0 { 1 } else { -1 };
            frozen[v] = true;
        }
        SpinConfig { polygon, spins, frozen }
    }

    pub fn spin(&self, v: usize) -> i8 {
        self.spins[v]
    }

    /// Fixes vertex `v` to `s`.
    pub fn freeze(&mut self, v: usize, s: i8) {
        self.spins[v] = s.signum();
        self.frozen[v] = true;
    }

    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.spins.len()).filter(|&v| !self.frozen[v]).collect()
    }

    /// Mean spin over the free vertices.
    pub fn magnetization(&self) -> f64 {
        let free = self.free_vertices();
        if free.is_empty() {
            return 0.0;
        }
        free.iter().map(|&v| self.spins[v] as f64).sum::<f64>() / free.len() as f64
    }

    /// Plain PBM (`P1`) bitmap, top row first, `1` for `+`, with the
    /// polygon spec in a comment line.
    pub fn to_pbm(&self) -> String {
        let p = &self.polygon;
        let spec = serde_json::to_string(&p.spec()).unwrap_or_default();
        let mut s = format!("P1\n# polygon {spec}\n{} {}\n", p.width + 1, p.height + 1);
        for j in (0..=p.height).rev() {
            let row: Vec<&str> =
                (0..=p.width).map(|i| if self.spins[p.vertex(i, j)] > 0 { "1" } else { "0" }).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Reads spins written by [`SpinConfig::to_pbm`] onto `polygon`.
    pub fn from_pbm(polygon: DiscretePolygon, text: &str) -> Result<Self> {
        let mut tokens = text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| l.split_whitespace());
        if tokens.next() != Some("P1") {
            return Err(Error::invalid("not a plain PBM"));
        }
        let mut num = || -> Result<usize> {
            tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| Error::invalid("truncated PBM"))
        };
        let (w, h) = (num()?, num()?);
        if w != polygon.width + 1 || h != polygon.height + 1 {
            return Err(Error::invalid("PBM size does not match the polygon"));
        }
        let mut cfg = Self::with_boundary(polygon, |_| 1);
        for j in (0..h).rev() {
            for i in 0..w {
                let v = cfg.polygon.vertex(i, j);
                cfg.spins[v] = match num()? {
                    1 => 1,
                    0 => -1,
                    b => return Err(Error::invalid(format!("bad PBM pixel {b}"))),
                };
            }
        }
        Ok(cfg)
    }
}

/// Heat-bath sampler at `beta`, optionally interleaved with Swendsen–Wang
/// moves that only flip clusters free of frozen vertices.
pub struct IsingSampler {
    pub cfg: SpinConfig,
    rng: ChaCha8Rng,
    /// `P(+ | neighbour sum s)` at index `s + 4`.
    table: [f64; 9],
    bond_p: f64,
    sites: Vec<(usize, [usize; 4], usize)>,
    edges: Vec<(usize, usize)>,
    parent: Vec<usize>,
    pub cluster_moves: bool,
}

impl IsingSampler {
    pub fn new(cfg: SpinConfig, beta: f64, rng: ChaCha8Rng) -> Self {
        let mut table = [0.0; 9];
        for (k, t) in table.iter_mut().enumerate() {
            let s = k as f64 - 4.0;
            *t = 1.0 / (1.0 + (-2.0 * beta * s).exp());
        }
        let p = &cfg.polygon;
        let sites = cfg
            .free_vertices()
            .into_iter()
            .map(|v| {
                let mut nb = [0; 4];
                let mut d = 0;
                for (w, _) in p.neighbors(v) {
                    nb[d] = w;
                    d += 1;
                }
                (v, nb, d)
            })
            .collect();
        let edges = (0..p.n_edges()).map(|e| p.edge_endpoints(e)).collect();
        let parent = vec![0; p.n_vertices()];
        IsingSampler {
            cfg,
            rng,
            table,
            bond_p: 1.0 - (-2.0 * beta).exp(),
            sites,
            edges,
            parent,
            cluster_moves: false,
        }
    }

    /// One systematic heat-bath sweep over the free vertices.
    pub fn heat_bath_sweep(&mut self) {
        let spins = &mut self.cfg.spins;
        for &(v, nb, d) in &self.sites {
            let s: i32 = nb[..d].iter().map(|&w| spins[w] as i32).sum();
            let u: f64 = self.rng.random();
            spins[v] = if u < self.table[(s + 4) as usize] { 1 } else { -1 };
        }
    }

    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }

    /// One Swendsen–Wang move; clusters containing a frozen vertex keep
    /// their spins.
    pub fn cluster_move(&mut self) {
        let n = self.parent.len();
        for (v, p) in self.parent.iter_mut().enumerate() {
            *p = v;
        }
        for &(a, b) in &self.edges {
            if self.cfg.spins[a] == self.cfg.spins[b] && self.rng.random::<f64>() < self.bond_p {
                let (ra, rb) = (Self::find(&mut self.parent, a), Self::find(&mut self.parent, b));
                if ra != rb {
                    self.parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        // 0 = undecided, 1 = keep, 2 = flip
        let mut action = vec![0u8; n];
        for v in 0..n {
            if self.cfg.frozen[v] {
                let r = Self::find(&mut self.parent, v);
                action[r] = 1;
            }
        }
        for v in 0..n {
            let r = Self::find(&mut self.parent, v);
            if action[r] == 0 {
                action[r] = if self.rng.random::<bool>() { 2 } else { 1 };
            }
            if action[r] == 2 {
                self.cfg.spins[v] = -self.cfg.spins[v];
            }
        }
    }

    /// One sweep: heat bath, then a cluster move when enabled.
    pub fn sweep(&mut self) {
        self.heat_bath_sweep();
        if self.cluster_moves {
            self.cluster_move();
        }
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }
}

/// Final configuration after `sweeps` heat-bath sweeps at `beta_c` with
/// alternating boundary conditions.
pub fn sample_critical_ising(p: &DiscretePolygon, sweeps: usize, seed: u64) -> Result<SpinConfig> {
    sample_critical_ising_with(p, sweeps, seed, false)
}

/// As [`sample_critical_ising`], optionally adding a cluster move per sweep.
pub fn sample_critical_ising_with(
    p: &DiscretePolygon,
    sweeps: usize,
    seed: u64,
    cluster_moves: bool,
) -> Result<SpinConfig> {
    if sweeps == 0 {
        return Err(Error::bounds("sweeps", 0.0, ">= 1"));
    }
    let mut s = IsingSampler::new(SpinConfig::alternating(p.clone())?, beta_c(), rng_for(seed, 0));
    s.cluster_moves = cluster_moves;
    s.run(sweeps);
    Ok(s.cfg)
}

/// A path on the medial lattice between two marked medial vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePath {
    /// 0-based mark indices of the endpoints.
    pub start: usize,
    pub end: usize,
    /// Primal edges crossed (their midpoints are the medial vertices).
    pub edges: Vec<usize>,
    pub points: Vec<Complex64>,
    /// Ambiguous cells resolved by turning left.
    pub ambiguous: usize,
}

type Pt = (i64, i64);

/// Traces the `N` interfaces from the marks `x_{2j}` (1-based).
pub fn trace_interfaces(cfg: &SpinConfig) -> Result<Vec<LatticePath>> {
    let p = &cfg.polygon;
    let n_marks = p.n_marks();
    if n_marks < 2 || n_marks % 2 == 1 {
        return Err(Error::invalid("interfaces need an even, positive number of marks"));
    }
    let spin = |q: Pt| -> Option<i8> { p.vertex_at(q.0, q.1).map(|v| cfg.spins[v]) };
    let coords = |v: usize| -> Pt {
        let (i, j) = p.vertex_coords(v);
        (i as i64, j as i64)
    };
    let mut used = vec![false; p.n_edges()];
    let mut paths = Vec::with_capacity(n_marks / 2);
    for start in (1..n_marks).step_by(2) {
        let e0 = p.mark_edge(start);
        let (u, v) = p.edge_endpoints(e0);
        let x = p.mark_vertex(start);
        let other = if u == x { v } else { u };
        let (mut l, mut r) = (coords(x), coords(other));
        let mut path = LatticePath { start, end: usize::MAX, edges: vec![], points: vec![], ambiguous: 0 };
        loop {
            let e = p
                .edge_between(p.vertex_at(l.0, l.1).unwrap(), p.vertex_at(r.0, r.1).unwrap())
                .unwrap();
            if used[e] {
                return Err(Error::TracingInvariant(format!("edge {e} crossed twice")));
            }
            if spin(l) != Some(1) || spin(r) != Some(-1) {
                return Err(Error::TracingInvariant(format!("edge {e} does not separate + from -")));
            }
            used[e] = true;
            path.edges.push(e);
            path.points.push(p.edge_midpoint(e));
            let d = (-(r.1 - l.1), r.0 - l.0);
            let a = (l.0 + d.0, l.1 + d.1);
            let b = (r.0 + d.0, r.1 + d.1);
            let (sa, sb) = match (spin(a), spin(b)) {
                (Some(sa), Some(sb)) => (sa, sb),
                _ => {
                    if path.edges.len() == 1 {
                        return Err(Error::TracingInvariant("interface starts outward".into()));
                    }
                    match p.mark_of_edge(e) {
                        Some(m) if m % 2 == 0 => path.end = m,
                        _ => {
                            return Err(Error::TracingInvariant(format!(
                                "interface leaves the domain through unmarked edge {e}"
                            )))
                        }
                    }
                    break;
                }
            };
            if sa < 0 {
                if sb > 0 {
                    path.ambiguous += 1;
                }
                r = a;
            } else if sb < 0 {
                (l, r) = (a, b);
            } else {
                l = b;
            }
        }
        paths.push(path);
    }
    Ok(paths)
}

/// Link pattern `A^delta` from traced paths (marks 1-based).
pub fn classify_pattern(paths: &[LatticePath]) -> Result<LinkPattern> {
    let pairs: Vec<(usize, usize)> = paths.iter().map(|q| (q.start + 1, q.end + 1)).collect();
    pattern_of_matching(&pairs).map_err(|e| Error::TracingInvariant(format!("bad endpoint matching: {e}")))
}

/// Negates every spin and moves the marks to the new `+`/`-` transitions;
/// mark `k` of the result sits next to mark `k + 1` of the input and keeps
/// its medial vertex.
pub fn flip_spins_and_arcs(cfg: &SpinConfig) -> Result<SpinConfig> {
    let p = &cfg.polygon;
    let n = p.n_marks();
    let pos = p.mark_positions();
    let new_marks: Vec<usize> = (0..n)
        .map(|k| {
            let old = (k + 1) % n;
            if old % 2 == 1 {
                p.next_pos(pos[old])
            } else {
                p.pred_pos(pos[old])
            }
        })
        .collect();
    let polygon = DiscretePolygon::with_marks(p.width, p.height, p.delta, new_marks)?;
    Ok(SpinConfig { polygon, spins: cfg.spins.iter().map(|s| -s).collect(), frozen: cfg.frozen.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_rectangle;

    fn square(n: usize, marks: Vec<usize>) -> DiscretePolygon {
        DiscretePolygon::with_marks(n, n, 1.0 / n as f64, marks).unwrap()
    }

    #[test]
    fn beta_value() {
        assert!((beta_c() - 0.440_686_793_509_771_5).abs() < 1e-15);
    }

    #[test]
    fn dobrushin_single_cell() {
        // + column on the left, - column on the right
        let p = square(1, vec![3, 0]);
        let cfg = SpinConfig::alternating(p).unwrap();
        assert_eq!(cfg.spins, vec![1, -1, 1, -1]);
        let paths = trace_interfaces(&cfg).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].points, vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 1.0)]);
        assert_eq!(classify_pattern(&paths).unwrap(), LinkPattern::from_pairs(&[(1, 2)]).unwrap());
    }

    #[test]
    fn ambiguity_turns_left() {
        // 2x2 cells, + arcs {0,1} and {3,4,5}; the centre is -, making the
        // cell at (1,0) a checkerboard.
        let p = square(2, vec![0, 1, 3, 5]);
        let mut cfg = SpinConfig::alternating(p).unwrap();
        let c = cfg.polygon.vertex(1, 1);
        cfg.spins[c] = -1;
        let paths = trace_interfaces(&cfg).unwrap();
        assert_eq!(paths.iter().map(|q| q.ambiguous).collect::<Vec<_>>(), vec![1, 1]);
        let p = &cfg.polygon;
        assert_eq!(paths[0].edges[1], p.vertical_edge(1, 0));
        assert_eq!(classify_pattern(&paths).unwrap(), LinkPattern::from_pairs(&[(1, 2), (3, 4)]).unwrap());
        // with a + centre the band joins the other pair of marks
        cfg.spins[c] = 1;
        let paths = trace_interfaces(&cfg).unwrap();
        assert_eq!(classify_pattern(&paths).unwrap(), LinkPattern::from_pairs(&[(1, 4), (2, 3)]).unwrap());
    }

    #[test]
    fn sampler_keeps_boundary_and_is_deterministic() {
        let p = build_rectangle(1.0, 1.0 / 12.0, &[0.0, 0.2, 0.5, 0.7]).unwrap();
        let a = sample_critical_ising_with(&p, 50, 4, true).unwrap();
        let b = sample_critical_ising_with(&p, 50, 4, true).unwrap();
        assert_eq!(a, b);
        let fresh = SpinConfig::alternating(p.clone()).unwrap();
        for &v in p.boundary() {
            assert_eq!(a.spins[v], fresh.spins[v]);
        }
        assert!(sample_critical_ising(&p, 0, 1).is_err());
    }

    #[test]
    fn interfaces_are_planar_and_exhaust_marks() {
        let p = build_rectangle(1.5, 1.0 / 10.0, &[0.0, 0.1, 0.3, 0.45, 0.6, 0.8]).unwrap();
        for seed in 0..200 {
            let cfg = sample_critical_ising_with(&p, 20, seed, true).unwrap();
            let paths = trace_interfaces(&cfg).unwrap();
            let mut ends: Vec<usize> = paths.iter().flat_map(|q| [q.start, q.end]).collect();
            ends.sort_unstable();
            assert_eq!(ends, (0..6).collect::<Vec<_>>());
            classify_pattern(&paths).unwrap();
        }
    }

    #[test]
    fn all_plus_boundary_magnetizes() {
        let p = build_rectangle(1.0, 1.0 / 10.0, &[]).unwrap();
        let mut s = IsingSampler::new(SpinConfig::with_boundary(p, |_| 1), beta_c(), rng_for(3, 0));
        s.run(100);
        let mut m = 0.0;
        for _ in 0..400 {
            s.sweep();
            m += s.cfg.magnetization();
        }
        assert!(m / 400.0 > 0.2);
    }

    #[test]
    fn flipped_pipeline_mirrors_pattern_without_ambiguities() {
        let p = build_rectangle(1.0, 1.0 / 8.0, &[0.05, 0.2, 0.45, 0.65]).unwrap();
        let mut checked = 0;
        for seed in 0..100 {
            let cfg = sample_critical_ising_with(&p, 10, seed, true).unwrap();
            let paths = trace_interfaces(&cfg).unwrap();
            let flipped = flip_spins_and_arcs(&cfg).unwrap();
            let fpaths = trace_interfaces(&flipped).unwrap();
            if paths.iter().chain(&fpaths).all(|q| q.ambiguous == 0) {
                let a = classify_pattern(&paths).unwrap();
                assert_eq!(classify_pattern(&fpaths).unwrap(), a.rotate(3));
                checked += 1;
            }
        }
        assert!(checked > 10, "only {checked} unambiguous samples");
    }

    #[test]
    fn pbm_round_trip() {
        let p = build_rectangle(2.0, 0.25, &[0.0, 0.5]).unwrap();
        let cfg = sample_critical_ising(&p, 3, 1).unwrap();
        let text = cfg.to_pbm();
        assert!(text.starts_with("P1\n# polygon {"));
        let back = SpinConfig::from_pbm(p, &text).unwrap();
        assert_eq!(back.spins, cfg.spins);
    }

    /// Exact single-site marginals by enumerating the free spins.
    fn exact_marginals(cfg: &SpinConfig, beta: f64) -> Vec<f64> {
        let free = cfg.free_vertices();
        let p = &cfg.polygon;
        let mut s = cfg.spins.clone();
        let (mut z, mut m) = (0.0, vec![0.0; free.len()]);
        for mask in 0u32..(1 << free.len()) {
            for (k, &v) in free.iter().enumerate() {
                s[v] = if mask >> k & 1 == 1 { 1 } else { -1 };
            }
            let energy: i32 = (0..p.n_edges())
                .map(|e| {
                    let (a, b) = p.edge_endpoints(e);
                    s[a] as i32 * s[b] as i32
                })
                .sum();
            let w = (beta * energy as f64).exp();
            z += w;
            for (k, &v) in free.iter().enumerate() {
                m[k] += w * s[v] as f64;
            }
        }
        m.iter().map(|x| x / z).collect()
    }

    #[test]
    fn small_grid_matches_enumeration() {
        let p = square(4, vec![0, 5, 8, 13]);
        let cfg = SpinConfig::alternating(p).unwrap();
        let exact = exact_marginals(&cfg, beta_c());
        let free = cfg.free_vertices();
        let mut s = IsingSampler::new(cfg, beta_c(), rng_for(11, 0));
        let (batches, per) = (50, 400);
        let mut means = vec![vec![0.0; batches]; free.len()];
        for b in 0..batches {
            for _ in 0..per {
                s.heat_bath_sweep();
                for (k, &v) in free.iter().enumerate() {
                    means[k][b] += s.cfg.spins[v] as f64 / per as f64;
                }
            }
        }
        for (k, bm) in means.iter().enumerate() {
            let mean = bm.iter().sum::<f64>() / batches as f64;
            let var = bm.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
            let se = (var / batches as f64).sqrt();
            assert!((mean - exact[k]).abs() < 4.0 * se + 1e-3, "site {k}: {mean} vs {}", exact[k]);
        }
    }
}
