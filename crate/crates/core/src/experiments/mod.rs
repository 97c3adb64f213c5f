//! Synthetic-graph experiments: generators, perturbations, signals,
//! baselines, a linear classifier and the two desk-scale runners.
//!
//! Every random draw comes from a ChaCha stream keyed by the master seed and
//! a small tuple identifying the trial, so results do not depend on how rayon
//! schedules the work.

pub mod classifier;
pub mod generators;
pub mod runners;
pub mod signals;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use classifier::{chance_accuracy, train_linear, LinearModel, Standardizer};
pub use generators::{gen_sbm, gen_small_world, perturb_edge_drop, SbmGraph};
pub use runners::{
    run_source_localization, run_stability_curve, stability_point, LocalizationPoint,
    StabilityPoint,
};
pub use signals::{gaussian_unit_signals, gft, source_signal, DiffusionSource};

/// Attempts allowed to the rejection samplers before giving up.
pub const RESAMPLE_CAP: usize = 100;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for the trial identified by `path` under `seed`.
pub fn trial_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let stream = path.iter().fold(0x5EED_u64, |acc, &p| splitmix(acc ^ p));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random graph family.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    SmallWorld {
        n: usize,
        p: f64,
        q: f64,
    },
    Sbm {
        n: usize,
        communities: usize,
        p_in: f64,
        p_out: f64,
    },
}

/// How the compared graph `G'` is obtained from `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationSpec {
    /// Drop each edge of `G` with this probability.
    EdgeDrop(f64),
    /// Draw a fresh graph from the same generator.
    Regenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalSpec {
    /// Standard Gaussian, normalized to unit norm.
    Gaussian,
    /// `(W/λ_max)^t δ_i` with `t` uniform in `1..=t_max`.
    DiffusionSource { t_max: usize },
}

/// Feature map fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Raw,
    Gft,
    Scattering { layers: usize },
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::Raw => "raw",
            Representation::Gft => "gft",
            Representation::Scattering { .. } => "scattering",
        }
    }
}

/// Declarative description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub generator: GeneratorSpec,
    pub perturbation: PerturbationSpec,
    pub signal: SignalSpec,
    pub representations: Vec<Representation>,
    /// Small-world `p` values swept by the stability curve.
    pub p_grid: Vec<f64>,
    /// Scattering depths `m`.
    pub layers: Vec<usize>,
    /// Fixed `J`, or `None` to use `max_scale(β)` of the base graph.
    pub scales: Option<usize>,
    /// Compared graphs per grid point, or independent realizations for
    /// source localization.
    pub graphs: usize,
    pub signals: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Edge-drop probabilities at which the trained classifiers are tested.
    pub perturb_grid: Vec<f64>,
    pub reg: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Desk-scale small-world stability sweep.
    pub fn stability_default() -> Self {
        Self {
            generator: GeneratorSpec::SmallWorld {
                n: 100,
                p: 0.1,
                q: 0.1,
            },
            perturbation: PerturbationSpec::Regenerate,
            signal: SignalSpec::Gaussian,
            representations: vec![Representation::Scattering { layers: 4 }],
            p_grid: (1..=9).map(|k| k as f64 / 10.0).collect(),
            layers: vec![2, 3, 4],
            scales: None,
            graphs: 10,
            signals: 50,
            n_train: 0,
            n_test: 0,
            perturb_grid: Vec::new(),
            reg: 1e-4,
            epochs: 100,
            seed: 0,
        }
    }

    /// Desk-scale source localization on a four-block SBM.
    pub fn localization_default() -> Self {
        Self {
            generator: GeneratorSpec::Sbm {
                n: 120,
                communities: 4,
                p_in: 0.6,
                p_out: 0.05,
            },
            perturbation: PerturbationSpec::EdgeDrop(0.1),
            signal: SignalSpec::DiffusionSource { t_max: 20 },
            representations: vec![
                Representation::Raw,
                Representation::Gft,
                Representation::Scattering { layers: 2 },
                Representation::Scattering { layers: 3 },
                Representation::Scattering { layers: 4 },
            ],
            p_grid: Vec::new(),
            layers: vec![2, 3, 4],
            scales: None,
            graphs: 10,
            signals: 0,
            n_train: 400,
            n_test: 100,
            perturb_grid: vec![0.0, 0.05, 0.1, 0.2],
            reg: 1e-4,
            epochs: 100,
            seed: 0,
        }
    }

    /// Applies `key=value` overrides on top of `self`.
    ///
    /// Keys: `generator`, `n`, `p_sw` (list), `q_sw`, `communities`, `p_in`,
    /// `p_out`, `perturbation`, `edge_drop_p`, `signal`, `t_max`,
    /// `representations` (list of raw/gft/scattering), `layers` (list),
    /// `scales` (`auto` or count), `graphs`, `signals`, `n_train`, `n_test`,
    /// `perturb_grid` (list), `reg`, `epochs`, `seed`.
    pub fn with_overrides(mut self, kv: &BTreeMap<String, String>) -> Result<Self> {
        // generator shape first so parameter keys land on the right variant
        if let Some(g) = kv.get("generator") {
            self.generator = match (g.as_str(), &self.generator) {
                ("small_world", GeneratorSpec::SmallWorld { .. })
                | ("sbm", GeneratorSpec::Sbm { .. }) => self.generator.clone(),
                ("small_world", GeneratorSpec::Sbm { n, .. }) => GeneratorSpec::SmallWorld {
                    n: *n,
                    p: 0.1,
                    q: 0.1,
                },
                ("sbm", GeneratorSpec::SmallWorld { n, .. }) => GeneratorSpec::Sbm {
                    n: *n,
                    communities: 4,
                    p_in: 0.6,
                    p_out: 0.05,
                },
                (other, _) => return Err(bad_value("generator", other)),
            };
        }
        for (key, value) in kv {
            let v = value.as_str();
            match key.as_str() {
                "generator" => {}
                "n" => match &mut self.generator {
                    GeneratorSpec::SmallWorld { n, .. } | GeneratorSpec::Sbm { n, .. } => {
                        *n = parse_num(key, v)?
                    }
                },
                "p_sw" => {
                    self.p_grid = parse_list(key, v)?;
                    if let (GeneratorSpec::SmallWorld { p, .. }, Some(first)) =
                        (&mut self.generator, self.p_grid.first())
                    {
                        *p = *first;
                    }
                }
                "q_sw" => match &mut self.generator {
                    GeneratorSpec::SmallWorld { q, .. } => *q = parse_num(key, v)?,
                    _ => return Err(mismatch(key)),
                },
                "communities" | "p_in" | "p_out" => match &mut self.generator {
                    GeneratorSpec::Sbm {
                        communities,
                        p_in,
                        p_out,
                        ..
                    } => match key.as_str() {
                        "communities" => *communities = parse_num(key, v)?,
                        "p_in" => *p_in = parse_num(key, v)?,
                        _ => *p_out = parse_num(key, v)?,
                    },
                    _ => return Err(mismatch(key)),
                },
                "perturbation" => {
                    self.perturbation = match v {
                        "regenerate" => PerturbationSpec::Regenerate,
                        "edge_drop" => match self.perturbation {
                            PerturbationSpec::EdgeDrop(p) => PerturbationSpec::EdgeDrop(p),
                            PerturbationSpec::Regenerate => PerturbationSpec::EdgeDrop(0.1),
                        },
                        other => return Err(bad_value(key, other)),
                    }
                }
                "edge_drop_p" => {}
                "signal" => {
                    self.signal = match v {
                        "gaussian" => SignalSpec::Gaussian,
                        "diffusion_source" => match self.signal {
                            SignalSpec::DiffusionSource { t_max } => {
                                SignalSpec::DiffusionSource { t_max }
                            }
                            SignalSpec::Gaussian => SignalSpec::DiffusionSource { t_max: 20 },
                        },
                        other => return Err(bad_value(key, other)),
                    }
                }
                "t_max" => {}
                "representations" | "layers" => {}
                "scales" => {
                    self.scales = if v == "auto" {
                        None
                    } else {
                        Some(parse_num(key, v)?)
                    }
                }
                "graphs" => self.graphs = parse_num(key, v)?,
                "signals" => self.signals = parse_num(key, v)?,
                "n_train" => self.n_train = parse_num(key, v)?,
                "n_test" => self.n_test = parse_num(key, v)?,
                "perturb_grid" => self.perturb_grid = parse_list(key, v)?,
                "reg" => self.reg = parse_num(key, v)?,
                "epochs" => self.epochs = parse_num(key, v)?,
                "seed" => self.seed = parse_num(key, v)?,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown config key '{other}'"
                    )))
                }
            }
        }
        // keys that refine variants chosen above
        if let Some(v) = kv.get("edge_drop_p") {
            match &mut self.perturbation {
                PerturbationSpec::EdgeDrop(p) => *p = parse_num("edge_drop_p", v)?,
                PerturbationSpec::Regenerate => return Err(mismatch("edge_drop_p")),
            }
        }
        if let Some(v) = kv.get("t_max") {
            match &mut self.signal {
                SignalSpec::DiffusionSource { t_max } => *t_max = parse_num("t_max", v)?,
                SignalSpec::Gaussian => return Err(mismatch("t_max")),
            }
        }
        if let Some(v) = kv.get("layers") {
            self.layers = parse_list("layers", v)?;
        }
        if kv.contains_key("layers") || kv.contains_key("representations") {
            let names: Vec<String> = match kv.get("representations") {
                Some(v) => v.split(',').map(|s| s.trim().to_string()).collect(),
                None => {
                    let mut names: Vec<String> = Vec::new();
                    for r in &self.representations {
                        let name = r.name().to_string();
                        if !names.contains(&name) {
                            names.push(name);
                        }
                    }
                    names
                }
            };
            let mut reps = Vec::new();
            for name in names {
                match name.as_str() {
                    "raw" => reps.push(Representation::Raw),
                    "gft" => reps.push(Representation::Gft),
                    "scattering" => reps.extend(
                        self.layers
                            .iter()
                            .map(|&layers| Representation::Scattering { layers }),
                    ),
                    other => return Err(bad_value("representations", other)),
                }
            }
            self.representations = reps;
        }
        self.validate()?;
        Ok(self)
    }

    /// Checks probabilities and counts.
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} = {p} not in [0, 1]"
                )))
            }
        };
        match &self.generator {
            GeneratorSpec::SmallWorld { n, p, q } => {
                prob("p_sw", *p)?;
                prob("q_sw", *q)?;
                positive("n", *n)?;
            }
            GeneratorSpec::Sbm {
                n,
                communities,
                p_in,
                p_out,
            } => {
                prob("p_in", *p_in)?;
                prob("p_out", *p_out)?;
                positive("n", *n)?;
                positive("communities", *communities)?;
            }
        }
        for &p in &self.p_grid {
            prob("p_sw", p)?;
        }
        for &p in &self.perturb_grid {
            prob("perturb_grid", p)?;
        }
        if let PerturbationSpec::EdgeDrop(p) = self.perturbation {
            prob("edge_drop_p", p)?;
        }
        if let SignalSpec::DiffusionSource { t_max } = self.signal {
            positive("t_max", t_max)?;
        }
        for &m in &self.layers {
            positive("layers", m)?;
        }
        if let Some(j) = self.scales {
            positive("scales", j)?;
        }
        positive("graphs", self.graphs)?;
        if !(self.reg > 0.0 && self.reg.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reg = {} must be positive",
                self.reg
            )));
        }
        Ok(())
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be >= 1")));
    }
    Ok(())
}

fn bad_value(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("invalid value '{value}' for '{key}'"))
}

fn mismatch(key: &str) -> Error {
    Error::InvalidParameter(format!(
        "key '{key}' does not apply to the selected variant"
    ))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| bad_value(key, v))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse_num(key, s)).collect()
}

/// Summary statistics of one experiment cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    /// `β` of the base graph.
    pub beta: f64,
    pub rep_distance_mean: f64,
    pub rep_distance_var: f64,
    pub accuracy: Option<f64>,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two samples.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // ties share the average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mx) * (b - my);
        dx += (a - mx).powi(2);
        dy += (b - my).powi(2);
    }
    num / (dx * dy).sqrt()
}
