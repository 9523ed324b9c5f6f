//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use msle::ising::SpinConfig;
use msle::randomcluster::BondConfig;

/// Exact `E[sigma_v]` for every free vertex, by summing over all free spins.
pub fn ising_marginals(cfg: &SpinConfig, beta: f64) -> Vec<f64> {
    let free = cfg.free_vertices();
    assert!(free.len() <= 20, "too many free spins to enumerate");
    let p = &cfg.polygon;
    let edges: Vec<(usize, usize)> = (0..p.n_edges()).map(|e| p.edge_endpoints(e)).collect();
    let mut s = cfg.spins.clone();
    let (mut z, mut m) = (0.0, vec![0.0; free.len()]);
    for mask in 0u64..(1 << free.len()) {
        for (k, &v) in free.iter().enumerate() {
            s[v] = if mask >> k & 1 == 1 { 1 } else { -1 };
        }
        let energy: i32 = edges.iter().map(|&(a, b)| s[a] as i32 * s[b] as i32).sum();
        let w = (beta * energy as f64).exp();
        z += w;
        for (k, &v) in free.iter().enumerate() {
            m[k] += w * s[v] as f64;
        }
    }
    m.iter().map(|x| x / z).collect()
}

/// Edges whose state the boundary condition leaves free.
pub fn dynamic_edges(cfg: &BondConfig) -> Vec<usize> {
    (0..cfg.omega.len()).filter(|&e| cfg.forced(e).is_none()).collect()
}

/// Exact `P[edge open]` for every dynamic edge under the weight
/// `p^open (1-p)^closed q^clusters`.
pub fn fk_marginals(cfg: &BondConfig) -> Vec<f64> {
    let dynamic = dynamic_edges(cfg);
    assert!(dynamic.len() <= 20, "too many edges to enumerate");
    let mut c = cfg.clone();
    let (mut z, mut m) = (0.0, vec![0.0; dynamic.len()]);
    for mask in 0u64..(1 << dynamic.len()) {
        let mut open = 0;
        for (k, &e) in dynamic.iter().enumerate() {
            c.omega[e] = mask >> k & 1 == 1;
            open += usize::from(c.omega[e]);
        }
        let closed = dynamic.len() - open;
        let w = cfg.p.powi(open as i32) * (1.0 - cfg.p).powi(closed as i32) * cfg.q.powi(c.n_clusters() as i32);
        z += w;
        for (k, &e) in dynamic.iter().enumerate() {
            if c.omega[e] {
                m[k] += w;
            }
        }
    }
    m.iter().map(|x| x / z).collect()
}

/// Batch means of each coordinate of a vector-valued series:
/// `(mean, standard error)` per coordinate.
pub struct BatchStats {
    sums: Vec<Vec<f64>>,
    per: usize,
}

impl BatchStats {
    pub fn new(dim: usize, batches: usize, per: usize) -> Self {
        BatchStats { sums: vec![vec![0.0; batches]; dim], per }
    }

    pub fn add(&mut self, batch: usize, values: impl Iterator<Item = f64>) {
        for (k, v) in values.enumerate() {
            self.sums[k][batch] += v / self.per as f64;
        }
    }

    pub fn summary(&self) -> Vec<(f64, f64)> {
        self.sums.iter().map(|b| msle::harness::stats::mean_se(b)).collect()
    }
}

/// Largest `|estimate - exact| / se` over coordinates.
pub fn worst_z(stats: &[(f64, f64)], exact: &[f64]) -> f64 {
    stats
        .iter()
        .zip(exact)
        .map(|(&(m, se), &x)| (m - x).abs() / se.max(1e-12))
        .fold(0.0, f64::max)
}
