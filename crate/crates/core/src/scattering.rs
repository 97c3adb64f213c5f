//! Diffusion scattering coefficients `U ρψ_{j_k} … ρψ_{j_1} x` and the
//! diffusion GNN forward pass built from the same dyadic powers.
//!
//! Coefficients are flattened breadth-first by order `k`, then
//! lexicographically in `(j_1, …, j_k)`. With `J` scales and `m` orders the
//! feature vector has `Σ_{k<m} J^k` entries.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::DiffusionOperator;
use crate::wavelets::{DyadicPowers, WaveletBank};

/// Number of coefficient orders `m` (including the order-zero average) and
/// number of wavelet scales `J`. The nonlinearity is always `|·|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScatteringConfig {
    layers: usize,
    scales: usize,
}

impl ScatteringConfig {
    pub fn new(layers: usize, scales: usize) -> Result<Self> {
        if layers == 0 || scales == 0 {
            return Err(Error::InvalidParameter(format!(
                "scattering needs m >= 1 and J >= 1, got m = {layers}, J = {scales}"
            )));
        }
        Ok(Self { layers, scales })
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn scales(&self) -> usize {
        self.scales
    }

    /// `Σ_{k<m} J^k`.
    pub fn feature_len(&self) -> usize {
        (0..self.layers).map(|k| self.scales.pow(k as u32)).sum()
    }

    /// Offset of order `k` inside the flattened vector.
    pub fn order_offset(&self, k: usize) -> usize {
        (0..k).map(|i| self.scales.pow(i as u32)).sum()
    }

    /// Labels `k:j1.j2...` in flattened order; order zero is `0:`.
    pub fn path_labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.feature_len());
        for k in 0..self.layers {
            let count = self.scales.pow(k as u32);
            for idx in 0..count {
                let path = decode_path(idx, k, self.scales);
                let joined: Vec<String> = path.iter().map(|j| j.to_string()).collect();
                out.push(format!("{k}:{}", joined.join(".")));
            }
        }
        out
    }
}

fn decode_path(mut idx: usize, k: usize, scales: usize) -> Vec<usize> {
    let mut path = vec![0; k];
    for slot in path.iter_mut().rev() {
        *slot = idx % scales;
        idx /= scales;
    }
    path
}

/// Scattering coefficients of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCoefficients {
    config: ScatteringConfig,
    flattened: Vec<f64>,
}

impl ScatteringCoefficients {
    pub fn config(&self) -> ScatteringConfig {
        self.config
    }

    pub fn flattened(&self) -> &[f64] {
        &self.flattened
    }

    pub fn len(&self) -> usize {
        self.flattened.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flattened.is_empty()
    }

    /// Coefficient at scale path `(j_1, …, j_k)`; the empty path is `U x`.
    pub fn get(&self, path: &[usize]) -> Option<f64> {
        let cfg = self.config;
        if path.len() >= cfg.layers || path.iter().any(|&j| j >= cfg.scales) {
            return None;
        }
        let idx = path.iter().fold(0, |acc, &j| acc * cfg.scales + j);
        Some(self.flattened[cfg.order_offset(path.len()) + idx])
    }

    /// Coefficients of order `k` in lexicographic path order.
    pub fn order(&self, k: usize) -> &[f64] {
        let start = self.config.order_offset(k);
        &self.flattened[start..start + self.config.scales.pow(k as u32)]
    }

    /// Iterates `(path, coefficient)` in flattened order.
    pub fn paths(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let cfg = self.config;
        (0..cfg.layers).flat_map(move |k| {
            let offset = cfg.order_offset(k);
            (0..cfg.scales.pow(k as u32)).map(move |idx| {
                (
                    decode_path(idx, k, cfg.scales),
                    self.flattened[offset + idx],
                )
            })
        })
    }

    /// Keeps only the first `layers` orders.
    pub fn truncated(&self, layers: usize) -> Result<Self> {
        let config = ScatteringConfig::new(layers.min(self.config.layers), self.config.scales)?;
        Ok(Self {
            config,
            flattened: self.flattened[..config.feature_len()].to_vec(),
        })
    }
}

/// `U x = ⟨v, x⟩`.
pub fn low_pass(op: &DiffusionOperator, x: &DVector<f64>) -> Result<f64> {
    if x.len() != op.n() {
        return Err(Error::SizeMismatch {
            expected: op.n(),
            found: x.len(),
        });
    }
    Ok(op.sqrt_degree().dot(x))
}

/// Scattering transform of a single signal.
pub fn scatter(
    op: &DiffusionOperator,
    bank: &WaveletBank,
    x: &DVector<f64>,
    cfg: ScatteringConfig,
) -> Result<ScatteringCoefficients> {
    if x.len() != op.n() {
        return Err(Error::SizeMismatch {
            expected: op.n(),
            found: x.len(),
        });
    }
    let signals = DMatrix::from_column_slice(x.len(), 1, x.as_slice());
    Ok(scatter_many(op, bank, &signals, cfg)?
        .pop()
        .expect("one column"))
}

/// Scattering transform of every column of `signals` (`n × S`).
///
/// The whole batch moves through the cascade together: the frontier at
/// order `k` is an `n × S·J^k` matrix whose column `s·J^k + path` holds the
/// intermediate signal of path `path` for input `s`.
pub fn scatter_many(
    op: &DiffusionOperator,
    bank: &WaveletBank,
    signals: &DMatrix<f64>,
    cfg: ScatteringConfig,
) -> Result<Vec<ScatteringCoefficients>> {
    let n = op.n();
    if signals.nrows() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: signals.nrows(),
        });
    }
    if bank.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: bank.n(),
        });
    }
    if bank.scales() != cfg.scales {
        return Err(Error::SizeMismatch {
            expected: cfg.scales,
            found: bank.scales(),
        });
    }
    let s = signals.ncols();
    let scales = cfg.scales;
    let v = op.sqrt_degree().transpose();
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.feature_len()); s];

    let zeroth = &v * signals;
    for (col, row) in out.iter_mut().enumerate() {
        row.push(zeroth[col]);
    }

    let mut frontier = signals.clone();
    for k in 1..cfg.layers {
        let width = frontier.ncols();
        let per_signal = width / s;
        let last = k + 1 == cfg.layers;
        let mut next = if last {
            DMatrix::zeros(0, 0)
        } else {
            DMatrix::zeros(n, width * scales)
        };
        let mut coeffs = vec![0.0; width * scales];
        for (j, psi) in bank.matrices().iter().enumerate() {
            let mut y = psi * &frontier;
            y.apply(|e| *e = e.abs());
            let u = &v * &y;
            for c in 0..width {
                coeffs[c * scales + j] = u[c];
                if !last {
                    next.set_column(c * scales + j, &y.column(c));
                }
            }
        }
        let block = per_signal * scales;
        for (sig, row) in out.iter_mut().enumerate() {
            row.extend_from_slice(&coeffs[sig * block..(sig + 1) * block]);
        }
        frontier = next;
    }

    Ok(out
        .into_iter()
        .map(|flattened| ScatteringCoefficients {
            config: cfg,
            flattened,
        })
        .collect())
}

/// `‖Φ(x)‖`: Euclidean norm over all paths.
pub fn scattering_norm(c: &ScatteringCoefficients) -> f64 {
    c.flattened.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `‖Φ(x) - Φ'(x)‖` over matching paths.
pub fn representation_distance(
    a: &ScatteringCoefficients,
    b: &ScatteringCoefficients,
) -> Result<f64> {
    Ok(per_order_distance(a, b)?
        .iter()
        .map(|d| d * d)
        .sum::<f64>()
        .sqrt())
}

/// `‖U(ρΨ)^k x - U'(ρΨ')^k x‖` for each order `k`.
pub fn per_order_distance(
    a: &ScatteringCoefficients,
    b: &ScatteringCoefficients,
) -> Result<Vec<f64>> {
    if a.config != b.config {
        return Err(Error::ShapeMismatch {
            m1: a.config.layers,
            j1: a.config.scales,
            m2: b.config.layers,
            j2: b.config.scales,
        });
    }
    Ok((0..a.config.layers)
        .map(|k| {
            a.order(k)
                .iter()
                .zip(b.order(k))
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// One diffusion GNN layer: `x ↦ ρ(x θ1 + T_{j-1} x θ2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnLayer {
    pub theta1: DMatrix<f64>,
    pub theta2: DMatrix<f64>,
}

/// Weights of a `J`-layer diffusion GNN with chained feature dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    layers: Vec<GnnLayer>,
}

impl GnnParams {
    pub fn new(layers: Vec<GnnLayer>) -> Result<Self> {
        for (idx, layer) in layers.iter().enumerate() {
            if layer.theta1.shape() != layer.theta2.shape() {
                return Err(Error::DimensionMismatch {
                    context: "theta1 vs theta2",
                    expected: layer.theta1.nrows() * layer.theta1.ncols(),
                    found: layer.theta2.nrows() * layer.theta2.ncols(),
                });
            }
            if let Some(next) = layers.get(idx + 1) {
                if layer.theta1.ncols() != next.theta1.nrows() {
                    return Err(Error::DimensionMismatch {
                        context: "consecutive GNN layers",
                        expected: layer.theta1.ncols(),
                        found: next.theta1.nrows(),
                    });
                }
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[GnnLayer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `(‖θ1^{(j)}‖, ‖θ2^{(j)}‖)` as spectral norms.
    pub fn theta_norms(&self) -> Vec<(f64, f64)> {
        self.layers
            .iter()
            .map(|l| (spectral_norm(&l.theta1), spectral_norm(&l.theta2)))
            .collect()
    }

    /// Every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| GnnLayer {
                    theta1: &l.theta1 * c,
                    theta2: &l.theta2 * c,
                })
                .collect(),
        }
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Runs the diffusion GNN; layer `j` (from zero) diffuses with `T^{2^j}`.
pub fn gnn_forward(
    op: &DiffusionOperator,
    x: &DMatrix<f64>,
    params: &GnnParams,
) -> Result<DMatrix<f64>> {
    if x.nrows() != op.n() {
        return Err(Error::DimensionMismatch {
            context: "signal rows vs graph size",
            expected: op.n(),
            found: x.nrows(),
        });
    }
    if let Some(first) = params.layers.first() {
        if x.ncols() != first.theta1.nrows() {
            return Err(Error::DimensionMismatch {
                context: "input features vs first layer",
                expected: first.theta1.nrows(),
                found: x.ncols(),
            });
        }
    }
    let depth = params.depth();
    let powers = DyadicPowers::new(op, depth.saturating_sub(1));
    let mut h = x.clone();
    for (j, layer) in params.layers.iter().enumerate() {
        let diffused = powers.get(j) * &h;
        let mut next = &h * &layer.theta1 + diffused * &layer.theta2;
        next.apply(|e| *e = e.abs());
        h = next;
    }
    Ok(h)
}
