//! Random graph families and the edge-drop perturbation.

use nalgebra::DMatrix;
use rand::Rng;

use super::RESAMPLE_CAP;
use crate::error::{Error, Result};
use crate::graph::Graph;

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {p} not in [0, 1]"
        )));
    }
    Ok(())
}

/// Ring-lattice degree for edge density `p`: `round(p (n-1))`, made even
/// and at least 2. `None` means the lattice is already complete.
pub fn lattice_degree(n: usize, p: f64) -> Option<usize> {
    let k = (p * (n - 1) as f64).round() as usize;
    if k >= n - 1 {
        return None;
    }
    Some((k - k % 2).max(2))
}

/// Watts–Strogatz small world: ring lattice of degree
/// [`lattice_degree`], each lattice edge rewired with probability `q`.
/// Resampled until connected.
pub fn gen_small_world<R: Rng + ?Sized>(n: usize, p: f64, q: f64, rng: &mut R) -> Result<Graph> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} not in (0, 1]")));
    }
    check_prob("q", q)?;
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "small world needs n >= 3, got {n}"
        )));
    }
    let Some(k) = lattice_degree(n, p) else {
        let w = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        return Graph::from_weights(w);
    };
    for _ in 0..RESAMPLE_CAP {
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for s in 1..=k / 2 {
                let j = (i + s) % n;
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
        for s in 1..=k / 2 {
            for u in 0..n {
                let v = (u + s) % n;
                if !adj[u][v] || !rng.random_bool(q) {
                    continue;
                }
                let free: Vec<usize> = (0..n).filter(|&w| w != u && !adj[u][w]).collect();
                if free.is_empty() {
                    continue;
                }
                let w = free[rng.random_range(0..free.len())];
                adj[u][v] = false;
                adj[v][u] = false;
                adj[u][w] = true;
                adj[w][u] = true;
            }
        }
        let w = DMatrix::from_fn(n, n, |i, j| if adj[i][j] { 1.0 } else { 0.0 });
        if let Ok(g) = Graph::from_weights(w) {
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(Error::GenerationFailed {
        what: "connected small-world graph",
        attempts: RESAMPLE_CAP,
    })
}

/// A stochastic block model sample and its community labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmGraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
}

/// Block labels for `n` nodes in `c` contiguous blocks; the remainder goes to
/// the first blocks.
pub fn block_labels(n: usize, c: usize) -> Vec<usize> {
    let base = n / c;
    let extra = n % c;
    let mut labels = Vec::with_capacity(n);
    for b in 0..c {
        let size = base + usize::from(b < extra);
        labels.extend(std::iter::repeat(b).take(size));
    }
    labels
}

/// Unit-weight SBM with `c` blocks, resampled until connected.
///
/// `p_in == p_out` is accepted (the complete-graph case needs it).
pub fn gen_sbm<R: Rng + ?Sized>(
    n: usize,
    communities: usize,
    p_in: f64,
    p_out: f64,
    rng: &mut R,
) -> Result<SbmGraph> {
    check_prob("p_in", p_in)?;
    check_prob("p_out", p_out)?;
    if p_in < p_out {
        return Err(Error::InvalidParameter(format!(
            "p_in = {p_in} must be at least p_out = {p_out}"
        )));
    }
    if communities == 0 || communities > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= communities <= n, got {communities} for n = {n}"
        )));
    }
    let labels = block_labels(n, communities);
    for _ in 0..RESAMPLE_CAP {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if labels[i] == labels[j] { p_in } else { p_out };
                if rng.random_bool(p) {
                    w[(i, j)] = 1.0;
                    w[(j, i)] = 1.0;
                }
            }
        }
        if let Ok(graph) = Graph::from_weights(w) {
            if graph.is_connected() {
                return Ok(SbmGraph { graph, labels });
            }
        }
    }
    Err(Error::GenerationFailed {
        what: "connected SBM graph",
        attempts: RESAMPLE_CAP,
    })
}

/// Removes each off-diagonal edge independently with probability `p`,
/// resampling until no node is isolated.
pub fn perturb_edge_drop<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "drop probability {p} not in [0, 1)"
        )));
    }
    if p == 0.0 {
        return Ok(g.clone());
    }
    let n = g.n();
    let edges = g.edges();
    for _ in 0..RESAMPLE_CAP {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, wt) in &edges {
            if i == j || !rng.random_bool(p) {
                w[(i, j)] = wt;
                w[(j, i)] = wt;
            }
        }
        if let Ok(out) = Graph::from_weights(w) {
            return Ok(out);
        }
    }
    Err(Error::GenerationFailed {
        what: "edge-dropped graph without isolated nodes",
        attempts: RESAMPLE_CAP,
    })
}
