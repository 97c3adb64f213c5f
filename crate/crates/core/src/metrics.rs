//! Distances between graphs and the closed-form stability bounds.
//!
//! The graph distance compares diffusion powers up to relabelling:
//! `d^s(G, G') = min_Π ‖T_G^{2s} - Πᵀ T_{G'}^{2s} Π‖`. With
//! [`DistanceMode::Exact`] every permutation is visited (capped at
//! [`EXACT_CAP`] nodes); the other modes return upper bounds.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{sym_norm_unchecked, symmetrize, DiffusionOperator, Graph, Permutation};

/// Largest graph size accepted by exhaustive permutation search.
pub const EXACT_CAP: usize = 8;

/// How the node correspondence is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceMode {
    /// Minimum over all `n!` permutations.
    Exact,
    /// `Π = I`.
    Identity,
    /// Degree-sorted seed refined by pairwise swaps.
    Heuristic,
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMode::Exact => "exact",
            DistanceMode::Identity => "identity",
            DistanceMode::Heuristic => "heuristic",
        })
    }
}

impl FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "identity" => Ok(Self::Identity),
            "heuristic" => Ok(Self::Heuristic),
            other => Err(Error::InvalidParameter(format!(
                "unknown distance mode '{other}'"
            ))),
        }
    }
}

/// Value of a graph distance together with the correspondence that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    /// Node `i` of the first graph is matched to node `permutation(i)` of the second.
    pub permutation: Permutation,
    pub mode: DistanceMode,
    pub s: f64,
}

impl DistanceResult {
    pub const CSV_HEADER: &'static str = "value,mode,s,permutation";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            crate::io::fmt_f64(self.value),
            self.mode,
            self.s,
            self.permutation
        )
    }
}

/// Exponent `2s`, which must be a positive integer.
pub fn diffusion_exponent(s: f64) -> Result<u32> {
    let t = 2.0 * s;
    if !(t.is_finite() && t >= 1.0) || (t - t.round()).abs() > 1e-9 || t > u32::MAX as f64 {
        return Err(Error::NonIntegerPower(s));
    }
    Ok(t.round() as u32)
}

/// `m^r` by binary exponentiation; `m` is assumed symmetric and the result
/// is re-symmetrized after every product.
pub fn matrix_power(m: &DMatrix<f64>, r: u32) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    let mut e = r;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
            symmetrize(&mut result);
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
            symmetrize(&mut base);
        }
    }
    result
}

fn aligned_difference(m1: &DMatrix<f64>, m2: &DMatrix<f64>, p: &[usize], buf: &mut DMatrix<f64>) {
    let n = m1.nrows();
    for j in 0..n {
        for i in 0..n {
            buf[(i, j)] = m1[(i, j)] - m2[(p[i], p[j])];
        }
    }
}

fn aligned_norm(m1: &DMatrix<f64>, m2: &DMatrix<f64>, p: &[usize]) -> f64 {
    let mut buf = DMatrix::zeros(m1.nrows(), m1.ncols());
    aligned_difference(m1, m2, p, &mut buf);
    sym_norm_unchecked(&buf)
}

/// Rearranges `perm` into its lexicographic successor; false at the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Minimizes `cost` over all permutations of `0..n`.
///
/// Work is split into `n` blocks by the image of node 0 and searched in
/// parallel; within a block permutations are visited lexicographically and
/// only strict improvements are kept, so the returned minimizer is the
/// lexicographically first one regardless of scheduling.
pub fn exhaustive_min<F>(n: usize, cost: F) -> (f64, Vec<usize>)
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if n == 0 {
        return (cost(&[]), Vec::new());
    }
    let blocks: Vec<(f64, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut perm: Vec<usize> = std::iter::once(first)
                .chain((0..n).filter(|&k| k != first))
                .collect();
            let mut best = (cost(&perm), perm.clone());
            while next_permutation(&mut perm[1..]) {
                let c = cost(&perm);
                if c < best.0 {
                    best = (c, perm.clone());
                }
            }
            best
        })
        .collect();
    blocks
        .into_iter()
        .reduce(|acc, b| if b.0 < acc.0 { b } else { acc })
        .expect("n >= 1")
}

fn degree_order(g: &Graph) -> Vec<usize> {
    let d = g.degrees();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order
}

fn heuristic_search(
    g1: &Graph,
    g2: &Graph,
    m1: &DMatrix<f64>,
    m2: &DMatrix<f64>,
) -> (f64, Vec<usize>) {
    let n = g1.n();
    let mut seed = vec![0; n];
    for (a, b) in degree_order(g1).into_iter().zip(degree_order(g2)) {
        seed[a] = b;
    }
    let identity: Vec<usize> = (0..n).collect();
    let seed_val = aligned_norm(m1, m2, &seed);
    let id_val = aligned_norm(m1, m2, &identity);
    // never start worse than the identity so that heuristic <= identity
    let (mut best, mut perm) = if id_val < seed_val {
        (id_val, identity)
    } else {
        (seed_val, seed)
    };
    let cap = 10 * n * n;
    let mut accepted = 0;
    let mut buf = DMatrix::zeros(n, n);
    'outer: loop {
        let mut improved = false;
        for a in 0..n {
            for b in (a + 1)..n {
                perm.swap(a, b);
                aligned_difference(m1, m2, &perm, &mut buf);
                let val = sym_norm_unchecked(&buf);
                if val < best {
                    best = val;
                    improved = true;
                    accepted += 1;
                    if accepted >= cap {
                        break 'outer;
                    }
                } else {
                    perm.swap(a, b);
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, perm)
}

/// Diffusion distance between two same-size graphs at time `s`.
pub fn diffusion_distance(
    g1: &Graph,
    g2: &Graph,
    s: f64,
    mode: DistanceMode,
) -> Result<DistanceResult> {
    let op1 = DiffusionOperator::new(g1)?;
    let op2 = DiffusionOperator::new(g2)?;
    diffusion_distance_ops(g1, g2, &op1, &op2, s, mode)
}

/// [`diffusion_distance`] reusing precomputed operators.
pub fn diffusion_distance_ops(
    g1: &Graph,
    g2: &Graph,
    op1: &DiffusionOperator,
    op2: &DiffusionOperator,
    s: f64,
    mode: DistanceMode,
) -> Result<DistanceResult> {
    let n = g1.n();
    if g2.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: g2.n(),
        });
    }
    let r = diffusion_exponent(s)?;
    if mode == DistanceMode::Exact && n > EXACT_CAP {
        return Err(Error::TooLargeForExact { n, cap: EXACT_CAP });
    }
    let m1 = matrix_power(op1.matrix(), r);
    let m2 = matrix_power(op2.matrix(), r);
    let (value, mapping) = match mode {
        DistanceMode::Identity => {
            let id: Vec<usize> = (0..n).collect();
            (aligned_norm(&m1, &m2, &id), id)
        }
        DistanceMode::Exact => exhaustive_min(n, |p| aligned_norm(&m1, &m2, p)),
        DistanceMode::Heuristic => heuristic_search(g1, g2, &m1, &m2),
    };
    Ok(DistanceResult {
        value,
        permutation: Permutation::new(mapping)?,
        mode,
        s,
    })
}

fn node_metric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (m[(i, i)] + m[(j, j)] - 2.0 * m[(i, j)]).max(0.0).sqrt()
        }
    })
}

/// Gromov–Hausdorff-type distance between the node diffusion metrics
/// `d^s(x, x') = ‖T^s(δ_x - δ_x')‖`, minimized over permutations.
pub fn gromov_hausdorff(g1: &Graph, g2: &Graph, s: f64) -> Result<f64> {
    let n = g1.n();
    if g2.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: g2.n(),
        });
    }
    if n > EXACT_CAP {
        return Err(Error::TooLargeForExact { n, cap: EXACT_CAP });
    }
    let r = diffusion_exponent(s)?;
    let d1 = node_metric(&matrix_power(DiffusionOperator::new(g1)?.matrix(), r));
    let d2 = node_metric(&matrix_power(DiffusionOperator::new(g2)?.matrix(), r));
    let (value, _) = exhaustive_min(n, |p| {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((d1[(i, j)] - d2[(p[i], p[j])]).abs());
            }
        }
        worst
    });
    Ok(value)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    Ok(())
}

fn wavelet_constant(beta: f64) -> f64 {
    let b2 = beta * beta;
    (b2 * (1.0 + b2) / (1.0 - b2).powi(3)).sqrt()
}

/// `ε_Ψ = 2d √(β²(1+β²)/(1-β²)³)`, the wavelet-bank stability bound.
pub fn bound_wavelet(d: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(2.0 * d * wavelet_constant(beta))
}

/// `ε_U = 2d / (1 - β_-)`, bounding `min_Π ‖v - Πv'‖²`.
pub fn bound_lowpass(d: f64, beta_min: f64) -> Result<f64> {
    check_beta(beta_min)?;
    Ok(2.0 * d / (1.0 - beta_min))
}

fn check_pair(beta_min: f64, beta_max: f64) -> Result<()> {
    check_beta(beta_min)?;
    check_beta(beta_max)?;
    if beta_min > beta_max {
        return Err(Error::InvalidParameter(format!(
            "beta_min {beta_min} exceeds beta_max {beta_max}"
        )));
    }
    Ok(())
}

/// Per-order bound `(2d/(1-β_-))^{1/2} + k √(β_+²(1+β_+²)/(1-β_+²)³) d`.
pub fn bound_scattering_order(k: usize, d: f64, beta_min: f64, beta_max: f64) -> Result<f64> {
    check_pair(beta_min, beta_max)?;
    Ok((2.0 * d / (1.0 - beta_min)).sqrt() + k as f64 * wavelet_constant(beta_max) * d)
}

/// `‖x‖ √(Σ_{k<m} bound_scattering_order(k)²)`.
pub fn bound_scattering_total(
    layers: usize,
    d: f64,
    beta_min: f64,
    beta_max: f64,
    x_norm: f64,
) -> Result<f64> {
    if layers == 0 {
        return Err(Error::InvalidParameter("need m >= 1".into()));
    }
    let mut sum = 0.0;
    for k in 0..layers {
        sum += bound_scattering_order(k, d, beta_min, beta_max)?.powi(2);
    }
    Ok(sum.sqrt() * x_norm)
}

/// Small-distance asymptote `m^{1/2} d^{1/2} ‖x‖ (2/(1-β_-))^{1/2}` of
/// [`bound_scattering_total`].
pub fn scattering_asymptote(layers: usize, d: f64, beta_min: f64, x_norm: f64) -> Result<f64> {
    check_beta(beta_min)?;
    Ok((layers as f64).sqrt() * d.sqrt() * x_norm * (2.0 / (1.0 - beta_min)).sqrt())
}

/// `d ‖x‖ / (1-β) · [Π_j (1 + ‖θ1^{(j)}‖ + ‖θ2^{(j)}‖)]²`.
pub fn bound_gnn(d: f64, beta: f64, theta_norms: &[(f64, f64)], x_norm: f64) -> Result<f64> {
    check_beta(beta)?;
    let prod: f64 = theta_norms.iter().map(|(a, b)| 1.0 + a + b).product();
    Ok(d * x_norm / (1.0 - beta) * prod * prod)
}

/// `(‖aʳ - bʳ‖, r βʳ⁻¹ ‖a - b‖)` with `β = max(‖a‖, ‖b‖)`.
pub fn power_difference_check(a: &DMatrix<f64>, b: &DMatrix<f64>, r: u32) -> Result<(f64, f64)> {
    if a.shape() != b.shape() {
        return Err(Error::SizeMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if r == 0 {
        return Err(Error::InvalidParameter("power must be >= 1".into()));
    }
    let na = crate::graph::operator_norm_sym(a)?;
    let nb = crate::graph::operator_norm_sym(b)?;
    let beta = na.max(nb);
    if beta >= 1.0 {
        return Err(Error::NormTooLarge(beta));
    }
    let lhs = sym_norm_unchecked(&(matrix_power(a, r) - matrix_power(b, r)));
    let rhs = r as f64 * beta.powi(r as i32 - 1) * sym_norm_unchecked(&(a - b));
    Ok((lhs, rhs))
}
