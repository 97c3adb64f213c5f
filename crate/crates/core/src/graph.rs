//! Weighted undirected graphs, the normalized adjacency, the lazy diffusion
//! operator and node permutations.
//!
//! Everything here is dense: a [`Graph`] owns an `n × n` weight matrix and a
//! [`DiffusionOperator`] owns `T = (I + A)/2` together with its full
//! symmetric eigendecomposition, sorted by descending eigenvalue.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance on `λ_1(T)` below which the graph is considered connected.
pub const DISCONNECTED_TOL: f64 = 1e-8;

/// Absolute asymmetry tolerated by [`operator_norm_sym`], scaled by the
/// largest entry when that exceeds one.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A weighted, undirected graph with strictly positive degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
}

impl Graph {
    /// Builds a graph from an undirected edge list without self-loops.
    ///
    /// An edge may be listed once in either orientation. Listing both
    /// `(i, j, w)` and `(j, i, w)` is tolerated only when the weights agree
    /// bit for bit, anything else is rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_edges_with(n, edges, false)
    }

    /// Same as [`Graph::from_edges`], optionally accepting `(i, i, w)` entries
    /// as nonnegative diagonal weights.
    pub fn from_edges_with(
        n: usize,
        edges: &[(usize, usize, f64)],
        allow_self_loops: bool,
    ) -> Result<Self> {
        let mut weights = DMatrix::<f64>::zeros(n, n);
        let mut seen = DMatrix::<u8>::zeros(n, n);
        for &(i, j, w) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NegativeWeight { i, j, w });
            }
            if i == j && !allow_self_loops {
                return Err(Error::SelfLoop(i));
            }
            // bit 1: seen as (i, j); bit 2: seen as (j, i)
            let (a, b, bit) = if i <= j { (i, j, 1u8) } else { (j, i, 2u8) };
            let prev = seen[(a, b)];
            if prev & bit != 0 || (i == j && prev != 0) {
                return Err(Error::DuplicateEdge { i, j });
            }
            if prev != 0 {
                if weights[(a, b)] != w {
                    return Err(Error::AsymmetricInput { i, j });
                }
                seen[(a, b)] |= bit;
                continue;
            }
            seen[(a, b)] = bit;
            weights[(a, b)] = w;
            weights[(b, a)] = w;
        }
        Self::validated(weights)
    }

    /// Wraps an explicit weight matrix after checking every invariant.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        if weights.nrows() != weights.ncols() {
            return Err(Error::SizeMismatch {
                expected: weights.nrows(),
                found: weights.ncols(),
            });
        }
        let n = weights.nrows();
        for i in 0..n {
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::NegativeWeight { i, j, w });
                }
                if w != weights[(j, i)] {
                    return Err(Error::AsymmetricInput { i, j });
                }
            }
        }
        Self::validated(weights)
    }

    fn validated(weights: DMatrix<f64>) -> Result<Self> {
        for (i, row) in weights.row_iter().enumerate() {
            if row.sum() <= 0.0 {
                return Err(Error::IsolatedNode(i));
            }
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Degree vector `d = W 1`.
    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.weights.row_iter().map(|r| r.sum()))
    }

    /// Edges with `i <= j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().iter().filter(|e| e.0 != e.1).count()
    }

    /// Connectivity by breadth-first search over positive weights.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !visited[v] && self.weights[(u, v)] > 0.0 {
                    visited[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }
}

/// `A = D^{-1/2} W D^{-1/2}`.
pub fn normalized_adjacency(g: &Graph) -> DMatrix<f64> {
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
    let n = g.n();
    DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * g.weights[(i, j)] * inv_sqrt[j])
}

/// Lazy diffusion `T = (I + A)/2` with its cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    matrix: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    beta: f64,
    beta_adjacency: f64,
    sqrt_degree: DVector<f64>,
}

impl DiffusionOperator {
    /// Builds `T` for `g`. Fails only if the eigensolver does not converge.
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.n();
        let a = normalized_adjacency(g);
        let mut matrix = (DMatrix::identity(n, n) + &a) * 0.5;
        symmetrize(&mut matrix);
        let (eigenvalues, eigenvectors) = sorted_eigen(&matrix)?;
        let beta = eigenvalues
            .iter()
            .skip(1)
            .fold(0.0f64, |acc, l| acc.max(l.abs()));
        // A = 2T - I shares eigenvectors with T
        let beta_adjacency = eigenvalues
            .iter()
            .skip(1)
            .fold(0.0f64, |acc, l| acc.max((2.0 * l - 1.0).abs()));
        let mut sqrt_degree = g.degrees().map(f64::sqrt);
        let norm = sqrt_degree.norm();
        sqrt_degree /= norm;
        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
            beta,
            beta_adjacency,
            sqrt_degree,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigenvalues of `T`, descending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `β_T = max_{i≥1} |λ_i(T)|`, without the connectivity check.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `β_A = max_{i≥1} |λ_i(A)|`. Equals one on bipartite graphs even though
    /// `β_T < 1` there.
    pub fn beta_adjacency(&self) -> f64 {
        self.beta_adjacency
    }

    /// Unit vector `v = d^{1/2} / ‖d^{1/2}‖`, the top eigenvector of `T`.
    pub fn sqrt_degree(&self) -> &DVector<f64> {
        &self.sqrt_degree
    }

    /// Spectral gap parameter `β_T`; errors when eigenvalue one is repeated.
    pub fn spectral_gap(&self) -> Result<f64> {
        if self.n() > 1 {
            let lambda1 = self.eigenvalues[1];
            if lambda1 >= 1.0 - DISCONNECTED_TOL {
                return Err(Error::DisconnectedGraph { lambda1 });
            }
        }
        Ok(self.beta)
    }

    /// `1 - β_T`.
    pub fn gap(&self) -> Result<f64> {
        self.spectral_gap().map(|b| 1.0 - b)
    }
}

/// Free-function form of [`DiffusionOperator::new`].
pub fn lazy_diffusion(g: &Graph) -> Result<DiffusionOperator> {
    DiffusionOperator::new(g)
}

/// Free-function form of [`DiffusionOperator::spectral_gap`].
pub fn spectral_gap(op: &DiffusionOperator) -> Result<f64> {
    op.spectral_gap()
}

/// A bijection on `{0, …, n-1}`; node `i` is sent to `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut hit = vec![false; n];
        for &m in &mapping {
            if m >= n {
                return Err(Error::IndexOutOfRange { index: m, len: n });
            }
            if hit[m] {
                return Err(Error::InvalidParameter(format!(
                    "permutation maps two nodes to {m}"
                )));
            }
            hit[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    /// `Π x`: entry `i` of `x` moves to position `p(i)`.
    pub fn permute_vector(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        let mut y = DVector::zeros(x.len());
        for (i, &m) in self.mapping.iter().enumerate() {
            y[m] = x[i];
        }
        Ok(y)
    }

    /// Relabels rows and columns: `out[p(i)][p(j)] = m[i][j]`.
    pub fn permute_matrix(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(m.nrows())?;
        self.check_len(m.ncols())?;
        let inv = self.inverse();
        Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            m[(inv.mapping[i], inv.mapping[j])]
        }))
    }

    /// Pulls a matrix back along the permutation: `out[i][j] = m[p(i)][p(j)]`.
    /// Inverse of [`Self::permute_matrix`].
    pub fn align_matrix(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(m.nrows())?;
        self.check_len(m.ncols())?;
        Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            m[(self.mapping[i], self.mapping[j])]
        }))
    }

    /// `out[i] = x[p(i)]`.
    pub fn align_vector(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        Ok(DVector::from_iterator(
            x.len(),
            self.mapping.iter().map(|&m| x[m]),
        ))
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: n,
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, m) in self.mapping.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Relabels `g` so that `weights'[p(i)][p(j)] = weights[i][j]`.
pub fn permute_graph(g: &Graph, p: &Permutation) -> Result<Graph> {
    Ok(Graph {
        weights: p.permute_matrix(&g.weights)?,
    })
}

/// ℓ₂ operator norm of a symmetric matrix, i.e. its largest |eigenvalue|.
pub fn operator_norm_sym(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::SizeMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let asym = max_asymmetry(m);
    let scale = m.amax().max(1.0);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(sym_norm_unchecked(m))
}

/// Spectral norm of a matrix assumed symmetric; skips validation.
pub(crate) fn sym_norm_unchecked(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let mut s = m.clone();
    symmetrize(&mut s);
    s.symmetric_eigenvalues().amax()
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Replaces `m` by `(m + mᵀ)/2` in place.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub(crate) fn sorted_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the solver's order among ties
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}
