//! Signal synthesis and the graph Fourier transform baseline.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{sorted_eigen, DiffusionOperator, Graph};

/// `n × count` matrix of standard Gaussian columns scaled to unit norm.
pub fn gaussian_unit_signals<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::from_fn(n, count, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    x
}

/// Diffusion of impulses with the spectrally normalized weight matrix
/// `W / λ_max(W)`.
#[derive(Debug, Clone)]
pub struct DiffusionSource {
    operator: DMatrix<f64>,
}

impl DiffusionSource {
    pub fn new(g: &Graph) -> Result<Self> {
        let (vals, _) = sorted_eigen(g.weights())?;
        let lambda_max = vals[0];
        if lambda_max <= 0.0 {
            return Err(Error::InvalidParameter(
                "weight matrix has no positive eigenvalue".into(),
            ));
        }
        Ok(Self {
            operator: g.weights() / lambda_max,
        })
    }

    pub fn n(&self) -> usize {
        self.operator.nrows()
    }

    /// `(W/λ_max)^t δ_source`.
    pub fn signal(&self, source: usize, t: usize) -> Result<DVector<f64>> {
        let n = self.n();
        if source >= n {
            return Err(Error::IndexOutOfRange {
                index: source,
                len: n,
            });
        }
        if t == 0 {
            return Err(Error::InvalidParameter(
                "diffusion time must be >= 1".into(),
            ));
        }
        let mut x = DVector::zeros(n);
        x[source] = 1.0;
        for _ in 0..t {
            x = &self.operator * x;
        }
        Ok(x)
    }

    /// Signals for `(source, t)` pairs as matrix columns.
    pub fn signals(&self, samples: &[(usize, usize)]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.n(), samples.len());
        for (c, &(i, t)) in samples.iter().enumerate() {
            out.set_column(c, &self.signal(i, t)?);
        }
        Ok(out)
    }
}

/// `(W/λ_max(W))^t δ_i`.
pub fn source_signal(g: &Graph, source: usize, t: usize) -> Result<DVector<f64>> {
    DiffusionSource::new(g)?.signal(source, t)
}

/// Coefficients `⟨u_i, x⟩` on the eigenbasis of `T`, by descending
/// eigenvalue.
pub fn gft(op: &DiffusionOperator, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != op.n() {
        return Err(Error::SizeMismatch {
            expected: op.n(),
            found: x.len(),
        });
    }
    Ok(op.eigenvectors().tr_mul(x))
}

/// [`gft`] applied to every column.
pub fn gft_many(op: &DiffusionOperator, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.nrows() != op.n() {
        return Err(Error::SizeMismatch {
            expected: op.n(),
            found: x.nrows(),
        });
    }
    Ok(op.eigenvectors().tr_mul(x))
}
