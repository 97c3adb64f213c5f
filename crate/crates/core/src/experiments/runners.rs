//! Desk-scale runners: scattering stability versus spectral gap on small
//! worlds, and community source localization on an SBM.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::classifier::{chance_accuracy, train_linear};
use super::generators::{gen_sbm, gen_small_world, perturb_edge_drop};
use super::signals::{gaussian_unit_signals, gft_many, DiffusionSource};
use super::{
    mean, sample_variance, trial_rng, ExperimentSpec, GeneratorSpec, PerturbationSpec,
    Representation, SignalSpec, TrialResult,
};
use crate::error::{Error, Result};
use crate::graph::{DiffusionOperator, Graph};
use crate::io::fmt_f64;
use crate::scattering::{
    representation_distance, scatter_many, ScatteringCoefficients, ScatteringConfig,
};
use crate::verify::scales_for;
use crate::wavelets::WaveletBank;

/// One point of the stability curve: base graph at `p_sw`, depth `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityPoint {
    pub p_sw: f64,
    pub layers: usize,
    pub scales: usize,
    pub n_graphs: usize,
    pub n_signals: usize,
    pub result: TrialResult,
}

impl StabilityPoint {
    pub const CSV_HEADER: &'static str = "p_sw,beta,m,mean_dist,var_dist,n_graphs,n_signals";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(self.p_sw),
            fmt_f64(self.result.beta),
            self.layers,
            fmt_f64(self.result.rep_distance_mean),
            fmt_f64(self.result.rep_distance_var),
            self.n_graphs,
            self.n_signals
        )
    }
}

fn scattering_of(
    g: &Graph,
    signals: &DMatrix<f64>,
    cfg: ScatteringConfig,
) -> Result<Vec<ScatteringCoefficients>> {
    let op = DiffusionOperator::new(g)?;
    let bank = WaveletBank::new(&op, cfg.scales())?;
    scatter_many(&op, &bank, signals, cfg)
}

/// Compares the scattering of `signals` on `base` against each graph in
/// `others`.
///
/// Per compared graph the distance is averaged over signals; the reported
/// mean and sample variance are taken across compared graphs. `J` is
/// `scales`, or `max_scale(β)` of `base`, and is shared by every graph.
pub fn stability_point(
    p_sw: f64,
    base: &Graph,
    others: &[Graph],
    signals: &DMatrix<f64>,
    layers: &[usize],
    scales: Option<usize>,
) -> Result<Vec<StabilityPoint>> {
    let op = DiffusionOperator::new(base)?;
    let beta = op.spectral_gap()?;
    let scales = match scales {
        Some(j) => j,
        None => scales_for(beta)?,
    };
    let m_max = layers.iter().copied().max().ok_or_else(|| {
        Error::InvalidParameter("at least one scattering depth is required".into())
    })?;
    let cfg = ScatteringConfig::new(m_max, scales)?;
    let bank = WaveletBank::new(&op, scales)?;
    let reference = scatter_many(&op, &bank, signals, cfg)?;

    // per_graph[g][layer index] = mean distance over signals
    let per_graph: Vec<Vec<f64>> = others
        .par_iter()
        .map(|other| {
            let coeffs = scattering_of(other, signals, cfg)?;
            layers
                .iter()
                .map(|&m| {
                    let mut dists = Vec::with_capacity(coeffs.len());
                    for (a, b) in reference.iter().zip(&coeffs) {
                        dists.push(representation_distance(&a.truncated(m)?, &b.truncated(m)?)?);
                    }
                    Ok(mean(&dists))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    Ok(layers
        .iter()
        .enumerate()
        .map(|(li, &m)| {
            let samples: Vec<f64> = per_graph.iter().map(|row| row[li]).collect();
            StabilityPoint {
                p_sw,
                layers: m,
                scales,
                n_graphs: others.len(),
                n_signals: signals.ncols(),
                result: TrialResult {
                    beta,
                    rep_distance_mean: mean(&samples),
                    rep_distance_var: sample_variance(&samples),
                    accuracy: None,
                },
            }
        })
        .collect())
}

/// Small-world stability sweep over `spec.p_grid`, one row per `(p, m)`.
pub fn run_stability_curve(spec: &ExperimentSpec) -> Result<Vec<StabilityPoint>> {
    spec.validate()?;
    let GeneratorSpec::SmallWorld { n, q, .. } = spec.generator else {
        return Err(Error::InvalidParameter(
            "stability curve needs the small_world generator".into(),
        ));
    };
    if spec.signal != SignalSpec::Gaussian {
        return Err(Error::InvalidParameter(
            "stability curve uses gaussian signals".into(),
        ));
    }
    if spec.signals == 0 || spec.layers.is_empty() {
        return Err(Error::InvalidParameter(
            "need signals >= 1 and at least one depth".into(),
        ));
    }
    let rows: Vec<Vec<StabilityPoint>> = spec
        .p_grid
        .par_iter()
        .enumerate()
        .map(|(pi, &p)| {
            let pi = pi as u64;
            let base = gen_small_world(n, p, q, &mut trial_rng(spec.seed, &[0, pi]))?;
            let signals =
                gaussian_unit_signals(n, spec.signals, &mut trial_rng(spec.seed, &[1, pi]));
            let others = (0..spec.graphs as u64)
                .into_par_iter()
                .map(|g| {
                    let mut rng = trial_rng(spec.seed, &[2, pi, g]);
                    match spec.perturbation {
                        PerturbationSpec::Regenerate => gen_small_world(n, p, q, &mut rng),
                        PerturbationSpec::EdgeDrop(drop) => {
                            perturb_edge_drop(&base, drop, &mut rng)
                        }
                    }
                })
                .collect::<Result<Vec<Graph>>>()?;
            stability_point(p, &base, &others, &signals, &spec.layers, spec.scales)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Test accuracy of one representation at one edge-drop level, averaged
/// over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationPoint {
    /// `raw`, `gft`, `scattering` or `chance`.
    pub representation: String,
    /// Scattering depth; `None` for the other representations.
    pub layers: Option<usize>,
    pub perturb_p: f64,
    pub accuracy: f64,
    /// Sample standard deviation across realizations.
    pub accuracy_std: f64,
    /// Mean `β` of the training graphs.
    pub beta: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub realizations: usize,
}

impl LocalizationPoint {
    pub const CSV_HEADER: &'static str = "representation,m,perturb_p,accuracy,n_train,n_test";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.representation,
            self.layers.map(|m| m.to_string()).unwrap_or_default(),
            fmt_f64(self.perturb_p),
            fmt_f64(self.accuracy),
            self.n_train,
            self.n_test
        )
    }
}

struct FeatureMaps {
    op: DiffusionOperator,
    bank: Option<WaveletBank>,
}

impl FeatureMaps {
    fn new(g: &Graph, scales: usize, needs_bank: bool) -> Result<Self> {
        let op = DiffusionOperator::new(g)?;
        let bank = if needs_bank {
            Some(WaveletBank::new(&op, scales)?)
        } else {
            None
        };
        Ok(Self { op, bank })
    }

    /// Feature matrices (one example per row) for every representation.
    fn features(
        &self,
        reps: &[Representation],
        signals: &DMatrix<f64>,
    ) -> Result<Vec<DMatrix<f64>>> {
        let m_max = reps
            .iter()
            .filter_map(|r| match r {
                Representation::Scattering { layers } => Some(*layers),
                _ => None,
            })
            .max();
        let scat = match (m_max, &self.bank) {
            (Some(m), Some(bank)) => Some(scatter_many(
                &self.op,
                bank,
                signals,
                ScatteringConfig::new(m, bank.scales())?,
            )?),
            _ => None,
        };
        reps.iter()
            .map(|rep| match rep {
                Representation::Raw => Ok(signals.transpose()),
                Representation::Gft => Ok(gft_many(&self.op, signals)?.transpose()),
                Representation::Scattering { layers } => {
                    let coeffs = scat.as_ref().expect("scattering computed");
                    let width =
                        ScatteringConfig::new(*layers, self.bank.as_ref().unwrap().scales())?
                            .feature_len();
                    Ok(DMatrix::from_fn(coeffs.len(), width, |r, c| {
                        coeffs[r].flattened()[c]
                    }))
                }
            })
            .collect()
    }
}

fn draw_samples<R: Rng + ?Sized>(
    count: usize,
    n: usize,
    t_max: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    (0..count)
        .map(|_| (rng.random_range(0..n), rng.random_range(1..=t_max)))
        .collect()
}

struct Realization {
    beta: f64,
    /// accuracy[rep][perturbation level]
    accuracy: Vec<Vec<f64>>,
    chance: f64,
}

fn localization_realization(spec: &ExperimentSpec, r: u64) -> Result<Realization> {
    let GeneratorSpec::Sbm {
        n,
        communities,
        p_in,
        p_out,
    } = spec.generator
    else {
        unreachable!("checked by caller")
    };
    let SignalSpec::DiffusionSource { t_max } = spec.signal else {
        unreachable!("checked by caller")
    };
    let sbm = gen_sbm(
        n,
        communities,
        p_in,
        p_out,
        &mut trial_rng(spec.seed, &[10, r]),
    )?;
    let base_op = DiffusionOperator::new(&sbm.graph)?;
    let beta = base_op.spectral_gap()?;
    // frozen for perturbed graphs so feature dimensions match
    let scales = match spec.scales {
        Some(j) => j,
        None => scales_for(beta)?,
    };
    let reps = &spec.representations;
    let needs_bank = reps
        .iter()
        .any(|r| matches!(r, Representation::Scattering { .. }));

    let mut rng = trial_rng(spec.seed, &[11, r]);
    let train = draw_samples(spec.n_train, n, t_max, &mut rng);
    let test = draw_samples(spec.n_test, n, t_max, &mut rng);
    let train_labels: Vec<usize> = train.iter().map(|&(i, _)| sbm.labels[i]).collect();
    let test_labels: Vec<usize> = test.iter().map(|&(i, _)| sbm.labels[i]).collect();

    let maps = FeatureMaps::new(&sbm.graph, scales, needs_bank)?;
    let source = DiffusionSource::new(&sbm.graph)?;
    let train_features = maps.features(reps, &source.signals(&train)?)?;
    let models = train_features
        .iter()
        .enumerate()
        .map(|(ri, x)| {
            train_linear(
                x,
                &train_labels,
                spec.reg,
                spec.epochs,
                &mut trial_rng(spec.seed, &[12, r, ri as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut accuracy = vec![Vec::with_capacity(spec.perturb_grid.len()); reps.len()];
    for (pi, &p) in spec.perturb_grid.iter().enumerate() {
        let (graph, owned_maps);
        let (g, m) = if p == 0.0 {
            (&sbm.graph, &maps)
        } else {
            graph = perturb_edge_drop(
                &sbm.graph,
                p,
                &mut trial_rng(spec.seed, &[13, r, pi as u64]),
            )?;
            owned_maps = FeatureMaps::new(&graph, scales, needs_bank)?;
            (&graph, &owned_maps)
        };
        let signals = DiffusionSource::new(g)?.signals(&test)?;
        let feats = m.features(reps, &signals)?;
        for (ri, (model, x)) in models.iter().zip(&feats).enumerate() {
            accuracy[ri].push(model.accuracy(x, &test_labels)?);
        }
    }
    Ok(Realization {
        beta,
        accuracy,
        chance: chance_accuracy(&test_labels),
    })
}

/// Trains one linear model per representation on a clean SBM and tests it on
/// signals diffused over edge-dropped copies, for each level in
/// `spec.perturb_grid`. Test signals reuse the same `(source, t)` draws at
/// every level. Rows are ordered by representation, then level; a final
/// `chance` row per level holds the majority-class rate.
pub fn run_source_localization(spec: &ExperimentSpec) -> Result<Vec<LocalizationPoint>> {
    spec.validate()?;
    if !matches!(spec.generator, GeneratorSpec::Sbm { .. }) {
        return Err(Error::InvalidParameter(
            "source localization needs the sbm generator".into(),
        ));
    }
    if !matches!(spec.signal, SignalSpec::DiffusionSource { .. }) {
        return Err(Error::InvalidParameter(
            "source localization needs diffusion_source signals".into(),
        ));
    }
    if spec.n_train == 0 || spec.n_test == 0 || spec.representations.is_empty() {
        return Err(Error::InvalidParameter(
            "need n_train >= 1, n_test >= 1 and at least one representation".into(),
        ));
    }
    for &p in &spec.perturb_grid {
        if p >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "perturbation level {p} must be < 1"
            )));
        }
    }
    let runs = (0..spec.graphs as u64)
        .into_par_iter()
        .map(|r| localization_realization(spec, r))
        .collect::<Result<Vec<_>>>()?;
    let beta = mean(&runs.iter().map(|r| r.beta).collect::<Vec<_>>());
    let point = |representation: &str, layers, perturb_p, samples: Vec<f64>| LocalizationPoint {
        representation: representation.to_string(),
        layers,
        perturb_p,
        accuracy: mean(&samples),
        accuracy_std: sample_variance(&samples).sqrt(),
        beta,
        n_train: spec.n_train,
        n_test: spec.n_test,
        realizations: runs.len(),
    };
    let mut out = Vec::new();
    for (ri, rep) in spec.representations.iter().enumerate() {
        let layers = match rep {
            Representation::Scattering { layers } => Some(*layers),
            _ => None,
        };
        for (pi, &p) in spec.perturb_grid.iter().enumerate() {
            let samples = runs.iter().map(|run| run.accuracy[ri][pi]).collect();
            out.push(point(rep.name(), layers, p, samples));
        }
    }
    for &p in &spec.perturb_grid {
        out.push(point(
            "chance",
            None,
            p,
            runs.iter().map(|run| run.chance).collect(),
        ));
    }
    Ok(out)
}
