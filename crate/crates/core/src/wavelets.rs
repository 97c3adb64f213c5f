//! Dyadic diffusion wavelets `ψ_0 = I - T`, `ψ_j = T^{2^{j-1}} - T^{2^j}`.
//!
//! Powers `T^{2^j}` are obtained by repeated squaring and shared between
//! neighbouring scales. The spectral route (`p_j` applied to the eigenvalues)
//! is kept for frame certification and as a cross-check in tests.
//!
//! Only dyadic ladders are built. A ladder `⌈γ^j⌉` for `γ > 1` would slot in
//! by replacing [`DyadicPowers`] with a general power cache.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{symmetrize, DiffusionOperator};

/// Cache of `T^{2^0}, T^{2^1}, …` computed by successive squaring.
#[derive(Debug, Clone)]
pub struct DyadicPowers {
    powers: Vec<DMatrix<f64>>,
}

impl DyadicPowers {
    /// Powers `T^{2^j}` for `j = 0..=max_j`.
    pub fn new(op: &DiffusionOperator, max_j: usize) -> Self {
        let mut powers = Vec::with_capacity(max_j + 1);
        powers.push(op.matrix().clone());
        for j in 1..=max_j {
            let prev = &powers[j - 1];
            let mut next = prev * prev;
            symmetrize(&mut next);
            powers.push(next);
        }
        Self { powers }
    }

    /// `T^{2^j}`.
    pub fn get(&self, j: usize) -> &DMatrix<f64> {
        &self.powers[j]
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// `T^{2^j}` via `j` squarings.
pub fn dyadic_power(op: &DiffusionOperator, j: usize) -> DMatrix<f64> {
    DyadicPowers::new(op, j)
        .powers
        .pop()
        .expect("at least T itself")
}

/// Largest useful scale count `J = 1 + ⌈log₂(-1 / log₂ β)⌉`, clamped to at
/// least one.
pub fn max_scale(beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    let r_star = -1.0 / beta.log2();
    let raw = 1.0 + r_star.log2().ceil();
    Ok(if raw < 1.0 { 1 } else { raw as usize })
}

/// Scalar response `p_j(x)` of wavelet `j` at eigenvalue `x`.
pub fn wavelet_response(j: usize, x: f64) -> f64 {
    if j == 0 {
        1.0 - x
    } else {
        let mut a = x;
        for _ in 1..j {
            a *= a;
        }
        a - a * a
    }
}

/// `Q_J(x) = Σ_{j<J} p_j(x)²`.
pub fn frame_polynomial(x: f64, scales: usize) -> f64 {
    (0..scales).map(|j| wavelet_response(j, x).powi(2)).sum()
}

/// The wavelet matrices `ψ_0 … ψ_{J-1}` of one graph.
#[derive(Debug, Clone)]
pub struct WaveletBank {
    matrices: Vec<DMatrix<f64>>,
    source_beta: f64,
}

impl WaveletBank {
    pub fn new(op: &DiffusionOperator, scales: usize) -> Result<Self> {
        if scales == 0 {
            return Err(Error::InvalidParameter("wavelet bank needs J >= 1".into()));
        }
        let n = op.n();
        // ψ_{J-1} needs T^{2^{J-1}}
        let powers = DyadicPowers::new(op, scales - 1);
        let mut matrices = Vec::with_capacity(scales);
        matrices.push(DMatrix::identity(n, n) - op.matrix());
        for j in 1..scales {
            matrices.push(powers.get(j - 1) - powers.get(j));
        }
        Ok(Self {
            matrices,
            source_beta: op.beta(),
        })
    }

    pub fn scales(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, j: usize) -> &DMatrix<f64> {
        &self.matrices[j]
    }

    pub fn source_beta(&self) -> f64 {
        self.source_beta
    }

    /// `(ψ_j x)_{j<J}`.
    pub fn apply(&self, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        if x.len() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(self.matrices.iter().map(|psi| psi * x).collect())
    }

    /// Operator norm of the stacked map `x ↦ (ψ_j x)_j`, i.e.
    /// `sqrt(λ_max(Σ_j ψ_jᵀ ψ_j))`.
    pub fn stacked_norm(&self) -> f64 {
        stacked_norm(self.matrices.iter().cloned())
    }

    /// `‖Ψ_self - Ψ_other‖` for two banks on identically labelled nodes.
    pub fn distance(&self, other: &WaveletBank) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        if self.scales() != other.scales() {
            return Err(Error::SizeMismatch {
                expected: self.scales(),
                found: other.scales(),
            });
        }
        Ok(stacked_norm(
            self.matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a - b),
        ))
    }
}

fn stacked_norm(blocks: impl Iterator<Item = DMatrix<f64>>) -> f64 {
    let mut gram: Option<DMatrix<f64>> = None;
    for b in blocks {
        let g = b.transpose() * &b;
        gram = Some(match gram {
            Some(acc) => acc + g,
            None => g,
        });
    }
    match gram {
        Some(mut g) => {
            symmetrize(&mut g);
            g.symmetric_eigenvalues().max().max(0.0).sqrt()
        }
        None => 0.0,
    }
}

/// Free-function form of [`WaveletBank::new`].
pub fn build_bank(op: &DiffusionOperator, scales: usize) -> Result<WaveletBank> {
    WaveletBank::new(op, scales)
}

/// Free-function form of [`WaveletBank::apply`].
pub fn apply_bank(bank: &WaveletBank, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    bank.apply(x)
}

/// Empirical and analytic frame constants of a wavelet bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameReport {
    /// `min_{i≥1} Q_J(λ_i)`.
    pub lower_empirical: f64,
    /// `max_{i≥1} Q_J(λ_i)`.
    pub upper_empirical: f64,
    /// `(1 - β)²`.
    pub lower_analytic: f64,
    pub beta: f64,
    pub scales: usize,
}

impl FrameReport {
    pub const CSV_HEADER: &'static str = "c1,c2,analytic_floor,beta,J";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            crate::io::fmt_f64(self.lower_empirical),
            crate::io::fmt_f64(self.upper_empirical),
            crate::io::fmt_f64(self.lower_analytic),
            crate::io::fmt_f64(self.beta),
            self.scales
        )
    }
}

/// Frame constants of the `J`-scale bank on the nontrivial spectrum of `T`.
pub fn frame_bounds(op: &DiffusionOperator, scales: usize) -> Result<FrameReport> {
    let beta = op.spectral_gap()?;
    if scales == 0 {
        return Err(Error::InvalidParameter("frame bounds need J >= 1".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &lambda in op.eigenvalues().iter().skip(1) {
        // clamp solver noise into the lazy-diffusion spectrum [0, 1]
        let q = frame_polynomial(lambda.clamp(0.0, 1.0), scales);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if op.n() < 2 {
        lo = 1.0;
        hi = 1.0;
    }
    Ok(FrameReport {
        lower_empirical: lo,
        upper_empirical: hi,
        lower_analytic: (1.0 - beta).powi(2),
        beta,
        scales,
    })
}
