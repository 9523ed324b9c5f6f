//! Critical random-cluster (FK) model with alternating wired/free arcs,
//! its loop representation on the medial lattice, and duality.
//!
//! Wiring is realized by the boundary edges themselves: edges of the `+`
//! arcs are permanently open (so each such arc is one cluster) and edges
//! touching a free arc are permanently closed (so the outer dual vertex is
//! wired along the free arcs). All other edges are dynamic.
//!
//! Medial edges are cell corners (`4 c + k`, corners counterclockwise from
//! the lower left) and exterior corners at free-arc boundary vertices
//! (`4 n_cells + boundary position`). An edge has four slots
//! `(side, end)`: `side` 0/1 for the face below/above (left/right) and
//! `end` 0/1 for its lower-left/upper-right endpoint. A strand entering an
//! open edge keeps its side; one entering a closed edge keeps its end.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::LatticePath;
use crate::lattice::{DiscretePolygon, Face};
use crate::rng::rng_for;

/// `p_c(q) = sqrt q / (1 + sqrt q)`.
pub fn p_c(q: f64) -> f64 {
    let s = q.sqrt();
    s / (1.0 + s)
}

/// `kappa(q) = 4 pi / arccos(-sqrt q / 2)`.
pub fn kappa_of_q(q: f64) -> f64 {
    4.0 * std::f64::consts::PI / (-(q.sqrt()) / 2.0).acos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wiring {
    /// Wired on arcs `(x_{2j-1}, x_{2j})`, free elsewhere.
    Alternating,
    /// Every boundary edge open.
    Wired,
    /// No constraint.
    Free,
}

/// Bond occupations with boundary wiring.
#[derive(Clone, Debug, PartialEq)]
pub struct BondConfig {
    pub polygon: DiscretePolygon,
    pub omega: Vec<bool>,
    pub wiring: Wiring,
    pub q: f64,
    pub p: f64,
    /// Whether this is the dual of a primal configuration (`omega` then
    /// holds the dual occupations, indexed by the primal edges they cross).
    pub dual: bool,
}

impl BondConfig {
    pub fn new(polygon: DiscretePolygon, q: f64, p: f64, wiring: Wiring) -> Result<Self> {
        if !(1.0..4.0).contains(&q) {
            return Err(Error::bounds("q", q, "[1, 4)"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::bounds("p", p, "[0, 1]"));
        }
        if wiring == Wiring::Alternating && polygon.n_marks() < 2 {
            return Err(Error::invalid("alternating wiring needs at least two marks"));
        }
        let mut cfg = BondConfig { omega: vec![false; polygon.n_edges()], polygon, wiring, q, p, dual: false };
        for e in 0..cfg.omega.len() {
            if let Some(f) = cfg.forced(e) {
                cfg.omega[e] = f;
            }
        }
        Ok(cfg)
    }

    /// Critical constructor, `p = p_c(q)`.
    pub fn critical(polygon: DiscretePolygon, q: f64, wiring: Wiring) -> Result<Self> {
        Self::new(polygon, q, p_c(q), wiring)
    }

    /// Fixed state of a boundary edge, if any.
    pub fn forced(&self, e: usize) -> Option<bool> {
        let poly = &self.polygon;
        if !poly.is_boundary_edge(e) {
            return None;
        }
        let f = match self.wiring {
            Wiring::Free => return None,
            Wiring::Wired => true,
            Wiring::Alternating => DiscretePolygon::is_plus_arc(poly.arc_of_boundary_edge(e)?),
        };
        Some(f != self.dual)
    }

    pub fn n_open(&self) -> usize {
        self.omega.iter().filter(|&&b| b).count()
    }

    /// Number of clusters (isolated vertices included).
    pub fn n_clusters(&self) -> usize {
        let mut uf = UnionFind::new(self.polygon.n_vertices());
        for (e, &o) in self.omega.iter().enumerate() {
            if o {
                let (a, b) = self.polygon.edge_endpoints(e);
                uf.union(a, b);
            }
        }
        uf.count()
    }

    /// Edge-indexed bitmap with the wiring and polygon in a header.
    pub fn to_dump(&self) -> String {
        let spec = serde_json::to_string(&self.polygon.spec()).unwrap_or_default();
        let bits: String = self.omega.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!(
            "# fk q={} p={} wiring={:?} dual={}\n# polygon {spec}\n{bits}\n",
            self.q, self.p, self.wiring, self.dual
        )
    }

    /// Reads the bitmap line of [`BondConfig::to_dump`] into a copy of `self`.
    pub fn with_dump(&self, text: &str) -> Result<Self> {
        let bits = text
            .lines()
            .find(|l| !l.starts_with('#') && !l.trim().is_empty())
            .ok_or_else(|| Error::invalid("dump has no bitmap"))?
            .trim();
        if bits.len() != self.omega.len() {
            return Err(Error::invalid("bitmap length does not match the polygon"));
        }
        let mut out = self.clone();
        for (o, c) in out.omega.iter_mut().zip(bits.chars()) {
            *o = match c {
                '1' => true,
                '0' => false,
                _ => return Err(Error::invalid(format!("bad bitmap character '{c}'"))),
            };
        }
        Ok(out)
    }
}

/// `omega*(e*) = 1 - omega(e)`, with wired and free arcs exchanged.
pub fn dual_config(cfg: &BondConfig) -> BondConfig {
    let p = cfg.p;
    let q = cfg.q;
    BondConfig {
        polygon: cfg.polygon.clone(),
        omega: cfg.omega.iter().map(|b| !b).collect(),
        wiring: match cfg.wiring {
            Wiring::Wired => Wiring::Free,
            Wiring::Free => Wiring::Wired,
            Wiring::Alternating => Wiring::Alternating,
        },
        q,
        // p* with p p* / ((1 - p)(1 - p*)) = q
        p: q * (1.0 - p) / (p + q * (1.0 - p)),
        dual: !cfg.dual,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&v| self.find(v) == v).count()
    }
}

/// Single-edge heat-bath sampler, with optional Edwards–Sokal moves at `q = 2`.
pub struct FkSampler {
    pub cfg: BondConfig,
    rng: ChaCha8Rng,
    adj: Vec<Vec<(usize, usize)>>,
    dynamic: Vec<usize>,
    stamp: Vec<u32>,
    side: Vec<u8>,
    gen: u32,
    queues: [VecDeque<usize>; 2],
    pub heat_bath: bool,
    pub cluster_moves: bool,
}

impl FkSampler {
    pub fn new(cfg: BondConfig, rng: ChaCha8Rng) -> Self {
        let p = &cfg.polygon;
        let adj = (0..p.n_vertices()).map(|v| p.neighbors(v).collect()).collect();
        let dynamic = (0..p.n_edges()).filter(|&e| cfg.forced(e).is_none()).collect();
        let n = p.n_vertices();
        FkSampler {
            cfg,
            rng,
            adj,
            dynamic,
            stamp: vec![0; n],
            side: vec![0; n],
            gen: 0,
            queues: [VecDeque::new(), VecDeque::new()],
            heat_bath: true,
            cluster_moves: false,
        }
    }

    /// Whether `a` and `b` are joined by open edges other than `skip`.
    /// Two breadth-first searches grow alternately, so the cost is bounded
    /// by the smaller cluster when they are not connected.
    fn connected_without(&mut self, a: usize, b: usize, skip: usize) -> bool {
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.gen = 1;
        }
        let g = self.gen;
        for (k, &s) in [a, b].iter().enumerate() {
            self.queues[k].clear();
            self.queues[k].push_back(s);
            self.stamp[s] = g;
            self.side[s] = k as u8;
        }
        loop {
            for k in 0..2 {
                let Some(v) = self.queues[k].pop_front() else {
                    return false;
                };
                for &(w, e) in &self.adj[v] {
                    if e == skip || !self.cfg.omega[e] {
                        continue;
                    }
                    if self.stamp[w] == g {
                        if self.side[w] != k as u8 {
                            return true;
                        }
                        continue;
                    }
                    self.stamp[w] = g;
                    self.side[w] = k as u8;
                    self.queues[k].push_back(w);
                }
            }
        }
    }

    /// One heat-bath sweep over the dynamic edges.
    pub fn heat_bath_sweep(&mut self) {
        let (p, q) = (self.cfg.p, self.cfg.q);
        let p_isolated = p / (p + q * (1.0 - p));
        for k in 0..self.dynamic.len() {
            let e = self.dynamic[k];
            let (a, b) = self.cfg.polygon.edge_endpoints(e);
            let prob = if self.connected_without(a, b, e) { p } else { p_isolated };
            self.cfg.omega[e] = self.rng.random::<f64>() < prob;
        }
    }

    /// Edwards–Sokal move (`q = 2` only): uniform spins per cluster, then
    /// each dynamic edge between equal spins opens with probability `p`.
    pub fn edwards_sokal_move(&mut self) -> Result<()> {
        if self.cfg.q != 2.0 {
            return Err(Error::Precondition("Edwards-Sokal moves need q = 2".into()));
        }
        let poly = &self.cfg.polygon;
        let mut uf = UnionFind::new(poly.n_vertices());
        for (e, &o) in self.cfg.omega.iter().enumerate() {
            if o {
                let (a, b) = poly.edge_endpoints(e);
                uf.union(a, b);
            }
        }
        let mut spin = vec![0i8; poly.n_vertices()];
        for v in 0..spin.len() {
            let r = uf.find(v);
            if spin[r] == 0 {
                spin[r] = if self.rng.random::<bool>() { 1 } else { -1 };
            }
            spin[v] = spin[r];
        }
        for &e in &self.dynamic {
            let (a, b) = poly.edge_endpoints(e);
            self.cfg.omega[e] = spin[a] == spin[b] && self.rng.random::<f64>() < self.cfg.p;
        }
        Ok(())
    }

    pub fn sweep(&mut self) -> Result<()> {
        if self.heat_bath {
            self.heat_bath_sweep();
        }
        if self.cluster_moves {
            self.edwards_sokal_move()?;
        }
        Ok(())
    }

    pub fn run(&mut self, sweeps: usize) -> Result<()> {
        for _ in 0..sweeps {
            self.sweep()?;
        }
        Ok(())
    }
}

/// Heat-bath sample at `p_c(q)` with alternating wiring.
pub fn sample_critical_fk(p: &DiscretePolygon, q: f64, sweeps: usize, seed: u64) -> Result<BondConfig> {
    sample_critical_fk_with(p, q, sweeps, seed, Wiring::Alternating, false)
}

/// As [`sample_critical_fk`] with a chosen wiring; `cluster_moves` adds an
/// Edwards–Sokal move per sweep (requires `q = 2`).
pub fn sample_critical_fk_with(
    p: &DiscretePolygon,
    q: f64,
    sweeps: usize,
    seed: u64,
    wiring: Wiring,
    cluster_moves: bool,
) -> Result<BondConfig> {
    if sweeps == 0 {
        return Err(Error::bounds("sweeps", 0.0, ">= 1"));
    }
    let cfg = BondConfig::critical(p.clone(), q, wiring)?;
    let mut s = FkSampler::new(cfg, rng_for(seed, 0));
    s.cluster_moves = cluster_moves;
    if cluster_moves && q != 2.0 {
        return Err(Error::Precondition("Edwards-Sokal moves need q = 2".into()));
    }
    s.run(sweeps)?;
    Ok(s.cfg)
}

/// Loops and interfaces of the loop representation.
#[derive(Clone, Debug)]
pub struct LoopDecomposition {
    /// Closed loops as lists of medial edge ids.
    pub loops: Vec<Vec<usize>>,
    pub interfaces: Vec<LatticePath>,
    /// Medial edge ids of each interface.
    pub interface_edges: Vec<Vec<usize>>,
    /// Number of medial edges in the domain.
    pub n_medial_edges: usize,
}

type Slot = (usize, usize, usize);

struct Medial<'a> {
    cfg: &'a BondConfig,
    n_cells: usize,
}

impl Medial<'_> {
    fn poly(&self) -> &DiscretePolygon {
        &self.cfg.polygon
    }

    fn exterior_corner(&self, v: usize) -> bool {
        let p = self.poly();
        p.arc_of_vertex(v).is_some_and(|a| !DiscretePolygon::is_plus_arc(a))
    }

    fn endpoint(&self, e: usize, t: usize) -> usize {
        let (u, v) = self.poly().edge_endpoints(e);
        if t == 0 {
            u
        } else {
            v
        }
    }

    /// Medial edge attached to slot `(e, side, end)`.
    fn edge_at(&self, (e, s, t): Slot) -> Option<usize> {
        let p = self.poly();
        let (f0, f1) = p.edge_faces(e);
        let w = self.endpoint(e, t);
        match if s == 0 { f0 } else { f1 } {
            Face::Cell(c) => {
                let (ci, cj) = (c % p.width, c / p.width);
                let (wi, wj) = p.vertex_coords(w);
                let k = match (wi - ci, wj - cj) {
                    (0, 0) => 0,
                    (1, 0) => 1,
                    (1, 1) => 2,
                    _ => 3,
                };
                Some(4 * c + k)
            }
            Face::Outer => self
                .exterior_corner(w)
                .then(|| 4 * self.n_cells + p.boundary_position(w).unwrap()),
        }
    }

    /// The two slots joined by medial edge `id`.
    fn ends(&self, id: usize) -> [Slot; 2] {
        let p = self.poly();
        let (face, w, e1, e2) = if id < 4 * self.n_cells {
            let (c, k) = (id / 4, id % 4);
            let (i, j) = (c % p.width, c / p.width);
            let (b, t) = (p.horizontal_edge(i, j), p.horizontal_edge(i, j + 1));
            let (l, r) = (p.vertical_edge(i, j), p.vertical_edge(i + 1, j));
            let (w, e1, e2) = match k {
                0 => (p.vertex(i, j), b, l),
                1 => (p.vertex(i + 1, j), b, r),
                2 => (p.vertex(i + 1, j + 1), t, r),
                _ => (p.vertex(i, j + 1), t, l),
            };
            (Face::Cell(c), w, e1, e2)
        } else {
            let pos = id - 4 * self.n_cells;
            let w = p.boundary()[pos];
            let prev = p.boundary()[p.pred_pos(pos)];
            let next = p.boundary()[p.next_pos(pos)];
            (Face::Outer, w, p.edge_between(prev, w).unwrap(), p.edge_between(w, next).unwrap())
        };
        [e1, e2].map(|e| {
            let (f0, _) = p.edge_faces(e);
            let s = if f0 == face { 0 } else { 1 };
            let t = if self.endpoint(e, 0) == w { 0 } else { 1 };
            (e, s, t)
        })
    }

    fn route(&self, (e, s, t): Slot) -> Slot {
        if self.cfg.omega[e] {
            (e, s, 1 - t)
        } else {
            (e, 1 - s, t)
        }
    }

    fn midpoint(&self, id: usize) -> Complex64 {
        let [a, b] = self.ends(id);
        (self.poly().edge_midpoint(a.0) + self.poly().edge_midpoint(b.0)) * 0.5
    }

    fn exists(&self, id: usize) -> bool {
        if id < 4 * self.n_cells {
            true
        } else {
            self.exterior_corner(self.poly().boundary()[id - 4 * self.n_cells])
        }
    }
}

/// Decomposes the medial edges of an alternating configuration into
/// closed loops and the `N` interfaces starting at the marks `x_{2j}`.
pub fn trace_fk_interfaces(cfg: &BondConfig) -> Result<LoopDecomposition> {
    if cfg.wiring != Wiring::Alternating || cfg.dual {
        return Err(Error::Precondition("loop tracing needs a primal alternating configuration".into()));
    }
    let poly = &cfg.polygon;
    for e in 0..poly.n_edges() {
        if let Some(f) = cfg.forced(e) {
            if cfg.omega[e] != f {
                return Err(Error::Representation(format!("boundary edge {e} violates the wiring")));
            }
        }
    }
    let m = Medial { cfg, n_cells: poly.n_cells() };
    let total = 4 * m.n_cells + poly.boundary().len();
    let mut used = vec![false; total];
    let mut interfaces = Vec::new();
    let mut interface_edges = Vec::new();
    let n_marks = poly.n_marks();
    let mut ends_seen = vec![false; n_marks];
    for start in (1..n_marks).step_by(2) {
        let e0 = poly.mark_edge(start);
        let (f0, _) = poly.edge_faces(e0);
        let s_out = if f0 == Face::Outer { 0 } else { 1 };
        let t0 = if m.endpoint(e0, 0) == poly.mark_vertex(start) { 0 } else { 1 };
        let mut slot = m.route((e0, s_out, t0));
        let mut ids = Vec::new();
        let mut pts = vec![poly.edge_midpoint(e0)];
        let mut crossed = vec![e0];
        let end = loop {
            let Some(id) = m.edge_at(slot) else {
                let (e, s, t) = slot;
                let mk = poly.mark_of_edge(e);
                let outward = poly.edge_faces(e).0 == Face::Outer && s == 0
                    || poly.edge_faces(e).1 == Face::Outer && s == 1;
                match mk {
                    Some(k) if outward && m.endpoint(e, t) == poly.mark_vertex(k) => break k,
                    _ => return Err(Error::Representation(format!("strand dangles at edge {e}"))),
                }
            };
            if used[id] {
                return Err(Error::Representation(format!("medial edge {id} used twice")));
            }
            used[id] = true;
            ids.push(id);
            if id < 4 * m.n_cells {
                pts.push(m.midpoint(id));
            }
            let [a, b] = m.ends(id);
            let next = if (a.0, a.1, a.2) == slot { b } else { a };
            crossed.push(next.0);
            slot = m.route(next);
            if ids.len() > total {
                return Err(Error::Representation("interface does not terminate".into()));
            }
        };
        for k in [start, end] {
            if ends_seen[k] {
                return Err(Error::Representation(format!("mark {k} reached twice")));
            }
            ends_seen[k] = true;
        }
        pts.push(poly.edge_midpoint(poly.mark_edge(end)));
        crossed.dedup();
        interfaces.push(LatticePath { start, end, edges: crossed, points: pts, ambiguous: 0 });
        interface_edges.push(ids);
    }
    let mut loops = Vec::new();
    for id0 in 0..total {
        if used[id0] || !m.exists(id0) {
            continue;
        }
        let mut ids = vec![id0];
        used[id0] = true;
        let [first, _] = m.ends(id0);
        let mut slot = m.route(first);
        loop {
            let id = m.edge_at(slot).ok_or_else(|| Error::Representation("loop reaches a dangling slot".into()))?;
            if id == id0 {
                break;
            }
            if used[id] {
                return Err(Error::Representation(format!("medial edge {id} used twice")));
            }
            used[id] = true;
            ids.push(id);
            let [a, b] = m.ends(id);
            let next = if a == slot { b } else { a };
            slot = m.route(next);
        }
        loops.push(ids);
    }
    let n_medial_edges = (0..total).filter(|&id| m.exists(id)).count();
    Ok(LoopDecomposition { loops, interfaces, interface_edges, n_medial_edges })
}

/// Open horizontal crossing of the vertex box `[i0, i1] x [j0, j1]` using
/// edges inside the box.
pub fn horizontal_crossing(p: &DiscretePolygon, open: &[bool], (i0, j0, i1, j1): (usize, usize, usize, usize)) -> bool {
    let inside = |v: usize| {
        let (i, j) = p.vertex_coords(v);
        (i0..=i1).contains(&i) && (j0..=j1).contains(&j)
    };
    let mut seen = vec![false; p.n_vertices()];
    let mut queue: VecDeque<usize> = (j0..=j1).map(|j| p.vertex(i0, j)).collect();
    for &v in &queue {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if p.vertex_coords(v).0 == i1 {
            return true;
        }
        for (w, e) in p.neighbors(v) {
            if open[e] && inside(w) && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

/// Top-to-bottom crossing of the whole polygon by dual-open edges
/// (`open[e] = false`), not crossing the left and right sides.
pub fn dual_vertical_crossing(p: &DiscretePolygon, open: &[bool]) -> bool {
    let nc = p.n_cells();
    let (top, bottom) = (nc, nc + 1);
    let mut adj = vec![Vec::new(); nc + 2];
    for e in 0..p.n_edges() {
        if open[e] {
            continue;
        }
        let (u, _) = p.edge_endpoints(e);
        let (i, j) = p.vertex_coords(u);
        if !p.is_horizontal(e) && (i == 0 || i == p.width) {
            continue;
        }
        let node = |f: Face| match f {
            Face::Cell(c) => c,
            Face::Outer => {
                if j == 0 {
                    bottom
                } else {
                    top
                }
            }
        };
        let (f, g) = p.edge_faces(e);
        let (a, b) = (node(f), node(g));
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; nc + 2];
    let mut queue = VecDeque::from([top]);
    seen[top] = true;
    while let Some(v) = queue.pop_front() {
        if v == bottom {
            return true;
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::classify_pattern;
    use crate::lattice::build_rectangle;

    fn poly(w: usize, h: usize, marks: Vec<usize>) -> DiscretePolygon {
        DiscretePolygon::with_marks(w, h, 1.0 / h as f64, marks).unwrap()
    }

    #[test]
    fn critical_point_and_kappa() {
        assert!((p_c(2.0) - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(p_c(1.0), 0.5);
        assert!((kappa_of_q(2.0) - 16.0 / 3.0).abs() < 1e-12);
        assert!((kappa_of_q(1.0) - 6.0).abs() < 1e-12);
        assert!(BondConfig::critical(poly(2, 2, vec![0, 2]), 4.0, Wiring::Free).is_err());
        assert!(BondConfig::critical(poly(2, 2, vec![0, 2]), 0.5, Wiring::Free).is_err());
    }

    #[test]
    fn duality_is_an_involution() {
        let p = build_rectangle(1.0, 0.2, &[0.0, 0.3, 0.5, 0.8]).unwrap();
        let cfg = sample_critical_fk(&p, 2.0, 5, 1).unwrap();
        let d = dual_config(&cfg);
        assert_eq!(d.n_open(), cfg.omega.len() - cfg.n_open());
        for e in 0..p.n_edges() {
            if let Some(f) = cfg.forced(e) {
                assert_eq!(d.forced(e), Some(!f));
            }
        }
        let dd = dual_config(&d);
        assert_eq!(dd.omega, cfg.omega);
        assert_eq!((dd.wiring, dd.dual), (cfg.wiring, cfg.dual));
        assert!((dd.p - cfg.p).abs() < 1e-15);
        // p_c is self-dual
        assert!((d.p - cfg.p).abs() < 1e-15);
    }

    #[test]
    fn crossing_duality_on_two_by_two() {
        let p = poly(2, 2, vec![]);
        let n = p.n_edges();
        assert_eq!(n, 12);
        for mask in 0u32..(1 << n) {
            let open: Vec<bool> = (0..n).map(|e| mask >> e & 1 == 1).collect();
            let primal = horizontal_crossing(&p, &open, (0, 0, 2, 2));
            assert_ne!(primal, dual_vertical_crossing(&p, &open), "mask {mask:b}");
        }
    }

    #[test]
    fn wired_arcs_stay_connected() {
        let p = build_rectangle(1.0, 0.125, &[0.0, 0.2, 0.5, 0.7]).unwrap();
        let cfg = sample_critical_fk(&p, 1.5, 20, 3).unwrap();
        let mut uf = UnionFind::new(p.n_vertices());
        for (e, &o) in cfg.omega.iter().enumerate() {
            if o {
                let (a, b) = p.edge_endpoints(e);
                uf.union(a, b);
            }
        }
        for a in [0, 2] {
            let on_arc: Vec<usize> =
                p.boundary().iter().copied().filter(|&v| p.arc_of_vertex(v) == Some(a)).collect();
            let r = uf.find(on_arc[0]);
            assert!(on_arc.iter().all(|&v| uf.find(v) == r));
        }
    }

    #[test]
    fn empty_configuration_loops() {
        let p = poly(2, 2, vec![6, 1]);
        let cfg = BondConfig::critical(p.clone(), 2.0, Wiring::Alternating).unwrap();
        let d = trace_fk_interfaces(&cfg).unwrap();
        assert_eq!(d.interfaces.len(), 1);
        let path = &d.interfaces[0];
        assert_eq!((path.start, path.end), (1, 0));
        // the interface stays next to the wired arc {6, 7, 0, 1}
        let wired: Vec<Complex64> = [6, 7, 0, 1].iter().map(|&k| p.vertex_point(p.boundary()[k])).collect();
        for z in &path.points {
            let dist = wired.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(dist < 0.5 * p.delta * 1.2, "{z} far from the wired arc");
        }
        // one loop per isolated vertex off the wired arc
        assert_eq!(d.loops.len(), p.n_vertices() - 4);
        let used: usize = d.loops.iter().map(Vec::len).sum::<usize>() + d.interface_edges[0].len();
        assert_eq!(used, d.n_medial_edges);
    }

    #[test]
    fn single_open_edge_is_encircled() {
        let p = poly(3, 2, vec![0, 3]);
        let mut cfg = BondConfig::critical(p.clone(), 2.0, Wiring::Alternating).unwrap();
        let before = trace_fk_interfaces(&cfg).unwrap().loops.len();
        let e = p.horizontal_edge(1, 1);
        cfg.omega[e] = true;
        let d = trace_fk_interfaces(&cfg).unwrap();
        assert_eq!(d.loops.len(), before - 1);
        let c = p.edge_midpoint(e);
        let around = d
            .loops
            .iter()
            .filter(|l| {
                let m = Medial { cfg: &cfg, n_cells: p.n_cells() };
                l.iter().all(|&id| (m.midpoint(id) - c).norm() < 0.9 * p.delta)
            })
            .count();
        assert_eq!(around, 1);
    }

    #[test]
    fn loop_representation_on_samples() {
        let p = build_rectangle(1.5, 0.1, &[0.0, 0.15, 0.3, 0.5, 0.65, 0.85]).unwrap();
        for seed in 0..30 {
            let cfg = sample_critical_fk_with(&p, 2.0, 10, seed, Wiring::Alternating, true).unwrap();
            let d = trace_fk_interfaces(&cfg).unwrap();
            assert_eq!(d.interfaces.len(), 3);
            let used: usize =
                d.loops.iter().map(Vec::len).sum::<usize>() + d.interface_edges.iter().map(Vec::len).sum::<usize>();
            assert_eq!(used, d.n_medial_edges);
            classify_pattern(&d.interfaces).unwrap();
        }
    }

    #[test]
    fn percolation_marginal_is_half() {
        let p = build_rectangle(1.0, 0.1, &[]).unwrap();
        let mut s = FkSampler::new(BondConfig::critical(p, 1.0, Wiring::Free).unwrap(), rng_for(5, 0));
        let (mut open, mut total) = (0usize, 0usize);
        for _ in 0..200 {
            s.sweep().unwrap();
            open += s.cfg.n_open();
            total += s.cfg.omega.len();
        }
        let f = open as f64 / total as f64;
        let sigma = (0.25 / total as f64).sqrt();
        assert!((f - 0.5).abs() < 3.0 * sigma, "{f}");
        let d = dual_config(&s.cfg);
        assert!(((d.n_open() as f64 / d.omega.len() as f64) - 0.5).abs() < 0.05);
    }

    #[test]
    fn dump_round_trip() {
        let p = build_rectangle(1.0, 0.25, &[0.0, 0.5]).unwrap();
        let cfg = sample_critical_fk(&p, 2.0, 2, 9).unwrap();
        let back = cfg.with_dump(&cfg.to_dump()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn es_requires_q2() {
        let p = build_rectangle(1.0, 0.25, &[0.0, 0.5]).unwrap();
        assert!(sample_critical_fk_with(&p, 1.5, 2, 1, Wiring::Alternating, true).is_err());
    }
}
