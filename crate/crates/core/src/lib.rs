//! Diffusion scattering on graphs.
//!
//! Lazy diffusion operators, dyadic diffusion wavelets, scattering
//! coefficients, diffusion distances between graphs, the closed-form
//! stability bounds that relate them, and the experiment harness used to
//! check those bounds and the stability trends on synthetic graphs.
//!
//! ```
//! use diffscat::{lazy_diffusion, max_scale, scatter, Graph, ScatteringConfig, WaveletBank};
//! use nalgebra::DVector;
//!
//! let g = Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 1.0)])?;
//! let op = lazy_diffusion(&g)?;
//! let scales = max_scale(op.spectral_gap()?).unwrap_or(1);
//! let bank = WaveletBank::new(&op, scales)?;
//! let x = DVector::from_vec(vec![1.0, 0.0, -1.0, 0.0]);
//! let coeffs = scatter(&op, &bank, &x, ScatteringConfig::new(3, scales)?)?;
//! assert_eq!(coeffs.len(), 1 + scales + scales * scales);
//! # Ok::<(), diffscat::Error>(())
//! ```

pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod scattering;
pub mod verify;
pub mod wavelets;

pub use error::{Error, Result};
pub use experiments::{ExperimentSpec, TrialResult};
pub use graph::{
    lazy_diffusion, normalized_adjacency, operator_norm_sym, permute_graph, spectral_gap,
    DiffusionOperator, Graph, Permutation,
};
pub use metrics::{
    bound_gnn, bound_lowpass, bound_scattering_order, bound_scattering_total, bound_wavelet,
    diffusion_distance, gromov_hausdorff, power_difference_check, scattering_asymptote,
    DistanceMode, DistanceResult,
};
pub use scattering::{
    gnn_forward, low_pass, representation_distance, scatter, scatter_many, scattering_norm,
    GnnLayer, GnnParams, ScatteringCoefficients, ScatteringConfig,
};
pub use verify::{verify_bounds, BoundReport, BoundRow, VerifyConfig};
pub use wavelets::{
    apply_bank, build_bank, dyadic_power, frame_bounds, frame_polynomial, max_scale, FrameReport,
    WaveletBank,
};

pub use nalgebra;
