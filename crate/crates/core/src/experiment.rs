//! Experiment configs and the commands behind the `agboost` binary.
//!
//! Every command is a pure function of its config and seed: reports carry
//! no timestamps, and folds and grid cells are merged in index order
//! whatever the worker count.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::booster::{boost, theory_params, weighted_accuracy, BoostConfig, RunReport, TheoryInputs, Variant};
use crate::data::{
    drop_labels, inject_noise, kfold_splits, synth_covariate_shift, synth_halfspace_hypercube, synth_threshold_1d,
    BinarizeRule, CsvSchema, LabeledDataset, Manifest, ManifestEntry,
};
use crate::error::{Error, Result};
use crate::hypothesis::Ensemble;
use crate::potential::{potential_curve, write_curve_file};
use crate::relabel::RelabelMode;
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::sample::WeightedLabeledSet;
use crate::weak_learners::WeakLearnerSpec;

pub const REPORT_VERSION: u32 = 1;

/// Synthetic generators reachable from configs and `agboost synth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthSpec {
    Halfspace {
        n: usize,
        count: usize,
        #[serde(default)]
        label_noise: f64,
        #[serde(default)]
        exhaustive: bool,
    },
    #[serde(rename = "threshold_1d")]
    Threshold1d {
        count: usize,
        #[serde(default = "half")]
        threshold: f64,
        #[serde(default)]
        label_noise: f64,
    },
    /// Labeled rows from `D`; the `Q` pool is added to the unlabeled data.
    CovariateShift {
        n: usize,
        count_d: usize,
        count_q: usize,
        ratio_bound: f64,
    },
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetRef {
    Manifest {
        manifest: PathBuf,
        name: String,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        schema: CsvSchema,
        #[serde(default)]
        binarize: BinarizeRule,
        #[serde(default)]
        sha256: Option<String>,
    },
    Synthetic {
        #[serde(flatten)]
        spec: SynthSpec,
        /// Defaults to the experiment seed.
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// A loaded dataset plus any unlabeled pool that came with it.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub dataset: LabeledDataset,
    pub extra_unlabeled: Vec<Vec<f64>>,
}

impl DatasetRef {
    pub fn load(&self, experiment_seed: u64) -> Result<LoadedData> {
        match self {
            DatasetRef::Manifest { manifest, name } => {
                let m = Manifest::load(manifest)?;
                Ok(LoadedData {
                    dataset: m.entry(name)?.load(name)?,
                    extra_unlabeled: Vec::new(),
                })
            }
            DatasetRef::Csv {
                path,
                schema,
                binarize,
                sha256,
            } => {
                let entry = ManifestEntry {
                    path: path.clone(),
                    schema: schema.clone(),
                    binarize: binarize.clone(),
                    sha256: sha256.clone(),
                };
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(LoadedData {
                    dataset: entry.load(&name)?,
                    extra_unlabeled: Vec::new(),
                })
            }
            DatasetRef::Synthetic { spec, seed } => generate(spec, seed.unwrap_or(experiment_seed)),
        }
    }
}

pub fn generate(spec: &SynthSpec, seed: u64) -> Result<LoadedData> {
    Ok(match *spec {
        SynthSpec::Halfspace {
            n,
            count,
            label_noise,
            exhaustive,
        } => LoadedData {
            dataset: synth_halfspace_hypercube(n, count, label_noise, seed, exhaustive)?.0,
            extra_unlabeled: Vec::new(),
        },
        SynthSpec::Threshold1d {
            count,
            threshold,
            label_noise,
        } => LoadedData {
            dataset: synth_threshold_1d(count, threshold, label_noise, seed)?,
            extra_unlabeled: Vec::new(),
        },
        SynthSpec::CovariateShift {
            n,
            count_d,
            count_q,
            ratio_bound,
        } => {
            let (dataset, pool, _) = synth_covariate_shift(n, count_d, count_q, ratio_bound, seed)?;
            LoadedData {
                dataset,
                extra_unlabeled: pool,
            }
        }
    })
}

fn default_k() -> usize {
    50
}

fn default_holdout_fraction() -> f64 {
    0.2
}

fn default_test_fraction() -> f64 {
    0.25
}

fn default_inner_k() -> usize {
    3
}

/// How training data is carved out of a dataset. Noise is injected into
/// training labels only; test labels stay clean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub drop_fraction: f64,
    #[serde(default)]
    pub noise_rate: f64,
    /// Share of the labeled training rows set aside for post-selection.
    /// Zero reuses the labeled training rows as the holdout.
    #[serde(default = "default_holdout_fraction")]
    pub holdout_fraction: f64,
    /// Test share for `run` (cross-validation uses the folds instead).
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Inner fold count for grid selection.
    #[serde(default = "default_inner_k")]
    pub inner_k: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            k: default_k(),
            drop_fraction: 0.0,
            noise_rate: 0.0,
            holdout_fraction: default_holdout_fraction(),
            test_fraction: default_test_fraction(),
            inner_k: default_inner_k(),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config("split.k", format!("must be >= 2, got {}", self.k)));
        }
        if self.inner_k < 2 {
            return Err(Error::config(
                "split.inner_k",
                format!("must be >= 2, got {}", self.inner_k),
            ));
        }
        if !(0.0..1.0).contains(&self.drop_fraction) {
            return Err(Error::config("split.drop_fraction", "must be in [0, 1)"));
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return Err(Error::config("split.noise_rate", "must be in [0, 0.5)"));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::config("split.holdout_fraction", "must be in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::config("split.test_fraction", "must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySection {
    pub variant: Variant,
    #[serde(flatten)]
    pub inputs: TheoryInputs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub rounds: Vec<usize>,
    pub m: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetRef,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub boost: Option<BoostConfig>,
    #[serde(default)]
    pub theory: Option<TheorySection>,
    #[serde(default = "WeakLearnerSpec::stumps")]
    pub learner: WeakLearnerSpec,
    #[serde(default)]
    pub grids: Option<Grids>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The boost config to run, from `boost` or expanded from `theory`.
    pub fn resolve_boost(&self) -> Result<BoostConfig> {
        let cfg = match (&self.boost, &self.theory) {
            (Some(b), None) => b.clone(),
            (None, Some(t)) => theory_params(&t.inputs, t.variant)?,
            (Some(_), Some(_)) => {
                return Err(Error::config("boost", "give either `boost` or `theory`, not both"));
            }
            (None, None) => return Err(Error::config("boost", "one of `boost` or `theory` is required")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<BoostConfig> {
        self.split.validate()?;
        self.learner.validate()?;
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be >= 1"));
        }
        self.resolve_boost()
    }
}

/// One training split ready for [`boost`].
#[derive(Clone, Debug)]
pub struct TrainingData {
    pub labeled: WeightedLabeledSet,
    pub unlabeled: Vec<Vec<f64>>,
    pub holdout: WeightedLabeledSet,
}

/// Noise, then label dropping, then a shuffled holdout split of the
/// remaining labeled rows. `extra_unlabeled` is appended to the pool.
pub fn prepare_training(
    train: &LabeledDataset,
    extra_unlabeled: &[Vec<f64>],
    split: &SplitSpec,
    seed: u64,
) -> Result<TrainingData> {
    let noisy = inject_noise(train, split.noise_rate, seed)?;
    let (labeled, mut unlabeled) = drop_labels(&noisy, split.drop_fraction, seed)?;
    unlabeled.extend_from_slice(extra_unlabeled);
    if labeled.is_empty() {
        return Err(Error::Empty("labeled training rows"));
    }
    let mut order: Vec<usize> = (0..labeled.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut stream_rng(seed, Stream::Split, 2));
    let shuffled = labeled.subset(&order);
    let (labeled, holdout) = if split.holdout_fraction == 0.0 {
        let all = shuffled.to_weighted()?;
        (all.clone(), all)
    } else {
        let n_hold = ((split.holdout_fraction * shuffled.len() as f64).ceil() as usize).max(1);
        if n_hold >= shuffled.len() {
            return Err(Error::config(
                "split.holdout_fraction",
                format!("leaves no labeled training rows out of {}", shuffled.len()),
            ));
        }
        let idx: Vec<usize> = (0..shuffled.len()).collect();
        (
            shuffled.subset(&idx[n_hold..]).to_weighted()?,
            shuffled.subset(&idx[..n_hold]).to_weighted()?,
        )
    };
    Ok(TrainingData {
        labeled,
        unlabeled,
        holdout,
    })
}

/// Seed of fold `fold` (also used by `run` as fold 0).
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, Stream::Trial, fold as u64)
}

/// Trains on `train` and scores the selected prefix on clean `test` labels.
pub fn train_and_test(
    cfg: &BoostConfig,
    learner: &WeakLearnerSpec,
    train: &LabeledDataset,
    extra_unlabeled: &[Vec<f64>],
    test: Option<&LabeledDataset>,
    split: &SplitSpec,
    seed: u64,
) -> Result<(Ensemble, RunReport, Option<f64>)> {
    let data = prepare_training(train, extra_unlabeled, split, seed)?;
    let mut cfg = cfg.clone();
    cfg.master_seed = seed;
    let (ensemble, report) = boost(&cfg, &data.labeled, &data.unlabeled, &data.holdout, learner)?;
    let selected = ensemble.truncated(report.selected_round - 1);
    let test_accuracy = match test {
        Some(t) if !t.is_empty() => Some(weighted_accuracy(&selected, &t.to_weighted()?)?),
        _ => None,
    };
    Ok((ensemble, report, test_accuracy))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub dim: usize,
    pub rows_rejected: usize,
    pub positive_class: Option<String>,
    pub extra_unlabeled: usize,
}

impl DatasetInfo {
    fn of(d: &LoadedData) -> Self {
        DatasetInfo {
            name: d.dataset.name.clone(),
            rows: d.dataset.len(),
            dim: d.dataset.dim(),
            rows_rejected: d.dataset.rows_rejected,
            positive_class: d.dataset.positive_class.clone(),
            extra_unlabeled: d.extra_unlabeled.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub version: u32,
    pub experiment: ExperimentConfig,
    pub resolved: BoostConfig,
    pub dataset: DatasetInfo,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_accuracy: Option<f64>,
    pub report: RunReport,
}

/// Single train/test run. Returns the report and the full ensemble.
pub fn cmd_run(config: &ExperimentConfig) -> Result<(RunOutput, Ensemble)> {
    let resolved = config.validate()?;
    let data = config.dataset.load(config.seed)?;
    let n = data.dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut stream_rng(config.seed, Stream::Split, 1));
    let n_test = (config.split.test_fraction * n as f64).floor() as usize;
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    let train = data.dataset.subset(&train_idx);
    let test = data.dataset.subset(&test_idx);
    let (ensemble, report, test_accuracy) = train_and_test(
        &resolved,
        &config.learner,
        &train,
        &data.extra_unlabeled,
        Some(&test),
        &config.split,
        fold_seed(config.seed, 0),
    )?;
    let out = RunOutput {
        version: REPORT_VERSION,
        experiment: config.clone(),
        resolved,
        dataset: DatasetInfo::of(&data),
        train_rows: train.len(),
        test_rows: test.len(),
        test_accuracy,
        report,
    };
    Ok((out, ensemble))
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `mean ± sd` with two decimals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let (mean, sd) = mean_sd(values);
        MeanSd { mean, sd }
    }
}

impl fmt::Display for MeanSd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.sd)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_accuracy: f64,
    pub selected_round: usize,
    pub rounds_run: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOutput {
    pub version: u32,
    pub experiment: ExperimentConfig,
    pub resolved: BoostConfig,
    pub dataset: DatasetInfo,
    pub folds: Vec<FoldResult>,
    pub accuracy: MeanSd,
    pub summary: String,
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::config("workers", e.to_string()))
}

fn outer_cv(
    cfg: &BoostConfig,
    config: &ExperimentConfig,
    data: &LoadedData,
    pool: &rayon::ThreadPool,
) -> Result<Vec<FoldResult>> {
    let folds = kfold_splits(data.dataset.len(), config.split.k, config.seed)?;
    pool.install(|| {
        folds
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let train = data.dataset.subset(&f.train);
                let test = data.dataset.subset(&f.test);
                let (_, report, acc) = train_and_test(
                    cfg,
                    &config.learner,
                    &train,
                    &data.extra_unlabeled,
                    Some(&test),
                    &config.split,
                    fold_seed(config.seed, i),
                )?;
                Ok(FoldResult {
                    fold: i,
                    test_accuracy: acc.expect("nonempty test fold"),
                    selected_round: report.selected_round,
                    rounds_run: report.records.len(),
                    truncated: report.truncated,
                })
            })
            .collect()
    })
}

pub fn cmd_cv(config: &ExperimentConfig) -> Result<CvOutput> {
    let resolved = config.validate()?;
    let data = config.dataset.load(config.seed)?;
    let pool = thread_pool(config.workers)?;
    let folds = outer_cv(&resolved, config, &data, &pool)?;
    let accs: Vec<f64> = folds.iter().map(|f| f.test_accuracy).collect();
    let accuracy = MeanSd::of(&accs);
    Ok(CvOutput {
        version: REPORT_VERSION,
        experiment: config.clone(),
        resolved,
        dataset: DatasetInfo::of(&data),
        folds,
        accuracy,
        summary: accuracy.to_string(),
    })
}

/// Applies a grid cell: `rounds` is T; `m` is the PAB fresh batch size and,
/// in Monte Carlo mode, the weak learner's sample count.
pub fn grid_cell(base: &BoostConfig, rounds: usize, m: usize) -> BoostConfig {
    let mut cfg = base.clone();
    cfg.rounds = rounds;
    if cfg.variant == Variant::Pab {
        cfg.pab_batch = m;
        cfg.truncate_on_exhaustion = true;
    }
    if let RelabelMode::MonteCarlo { .. } = cfg.mode {
        cfg.mode = RelabelMode::MonteCarlo { m };
    }
    cfg
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub rounds: usize,
    pub m: usize,
    /// Inner-CV accuracy per outer fold.
    pub fold_scores: Vec<f64>,
    pub score: f64,
    /// Inner runs that stopped early for lack of fresh labels.
    pub truncated_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOutput {
    pub version: u32,
    pub experiment: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub cells: Vec<GridCell>,
    pub best: BoostConfig,
    pub best_cell: (usize, usize),
    pub folds: Vec<FoldResult>,
    pub accuracy: MeanSd,
    pub summary: String,
}

/// Grid search with one level of inner CV on each outer training fold.
/// The best cell (ties to smaller T, then smaller m) is then evaluated on
/// the outer folds exactly as `cv` would.
pub fn cmd_grid(config: &ExperimentConfig) -> Result<GridOutput> {
    let base = config.validate()?;
    let grids = config
        .grids
        .as_ref()
        .ok_or_else(|| Error::config("grids", "the grid command needs `grids`"))?;
    if grids.rounds.is_empty() || grids.m.is_empty() {
        return Err(Error::config("grids", "rounds and m grids must be nonempty"));
    }
    if grids.rounds.contains(&0) || grids.m.contains(&0) {
        return Err(Error::config("grids", "grid values must be >= 1"));
    }
    let data = config.dataset.load(config.seed)?;
    let pool = thread_pool(config.workers)?;
    let outer = kfold_splits(data.dataset.len(), config.split.k, config.seed)?;

    let mut cells_spec = Vec::new();
    for &t in &grids.rounds {
        for &m in &grids.m {
            cells_spec.push((t, m));
        }
    }
    // Every (cell, outer fold) pair is an independent job.
    let jobs: Vec<(usize, usize)> = (0..cells_spec.len())
        .flat_map(|c| (0..outer.len()).map(move |f| (c, f)))
        .collect();
    let results: Vec<(f64, usize)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, f)| {
                let (t, m) = cells_spec[c];
                let cfg = grid_cell(&base, t, m);
                let train = data.dataset.subset(&outer[f].train);
                let seed = fold_seed(config.seed, f);
                let inner = kfold_splits(train.len(), config.split.inner_k, derive_seed(seed, Stream::Split, 3))?;
                let mut accs = Vec::with_capacity(inner.len());
                let mut truncated = 0;
                for (j, g) in inner.iter().enumerate() {
                    let (_, report, acc) = train_and_test(
                        &cfg,
                        &config.learner,
                        &train.subset(&g.train),
                        &data.extra_unlabeled,
                        Some(&train.subset(&g.test)),
                        &config.split,
                        derive_seed(seed, Stream::Trial, 1 + j as u64),
                    )?;
                    truncated += usize::from(report.truncated);
                    accs.push(acc.expect("nonempty inner fold"));
                }
                Ok((mean_sd(&accs).0, truncated))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let cells: Vec<GridCell> = cells_spec
        .iter()
        .enumerate()
        .map(|(c, &(rounds, m))| {
            let per_fold = &results[c * outer.len()..(c + 1) * outer.len()];
            let fold_scores: Vec<f64> = per_fold.iter().map(|r| r.0).collect();
            GridCell {
                rounds,
                m,
                score: mean_sd(&fold_scores).0,
                truncated_runs: per_fold.iter().map(|r| r.1).sum(),
                fold_scores,
            }
        })
        .collect();
    let best = cells
        .iter()
        .max_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then_with(|| b.rounds.cmp(&a.rounds))
                .then_with(|| b.m.cmp(&a.m))
        })
        .expect("nonempty grid");
    let best_cfg = grid_cell(&base, best.rounds, best.m);
    let folds = outer_cv(&best_cfg, config, &data, &pool)?;
    let accs: Vec<f64> = folds.iter().map(|f| f.test_accuracy).collect();
    let accuracy = MeanSd::of(&accs);
    Ok(GridOutput {
        version: REPORT_VERSION,
        experiment: config.clone(),
        dataset: DatasetInfo::of(&data),
        best_cell: (best.rounds, best.m),
        best: best_cfg,
        cells,
        folds,
        accuracy,
        summary: accuracy.to_string(),
    })
}

/// The resolved schedule as `key=value` lines.
pub fn cmd_params(inputs: &TheoryInputs, variant: Variant) -> Result<String> {
    let cfg = theory_params(inputs, variant)?;
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
    let m = match cfg.mode {
        RelabelMode::MonteCarlo { m } => m.to_string(),
        RelabelMode::Fractional => "-".into(),
    };
    let mut s = String::new();
    s.push_str(&format!(
        "variant={}\n",
        serde_json::to_value(variant)?.as_str().unwrap_or("")
    ));
    s.push_str(&format!("T={}\n", cfg.rounds));
    s.push_str(&format!("eta={}\n", cfg.eta));
    s.push_str(&format!("tau={}\n", cfg.tau));
    s.push_str(&format!("S={}\n", opt(cfg.labeled_budget)));
    s.push_str(&format!("U={}\n", opt(cfg.unlabeled_batch)));
    s.push_str(&format!("S0={}\n", opt(cfg.holdout_budget)));
    s.push_str(&format!("m={m}\n"));
    s.push_str(&format!("gamma={}\n", cfg.gamma));
    s.push_str(&format!("C_X={}\n", cfg.c_x));
    if variant == Variant::Reuse {
        s.push_str(&format!("sigma={}\n", cfg.sigma()));
        s.push_str(&format!("labeled_mix_weight={}\n", cfg.labeled_mix_weight()));
    }
    Ok(s)
}

/// Writes the potential-curve CSV and returns the row count.
pub fn cmd_potentials(z_min: f64, z_max: f64, step: f64, out: &Path) -> Result<usize> {
    let rows = potential_curve(z_min, z_max, step)?;
    write_curve_file(&rows, out)?;
    Ok(rows.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    #[serde(flatten)]
    pub spec: SynthSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Writes a synthetic dataset as CSV (label last) plus a manifest with its
/// checksum next to it. A covariate-shift pool goes to `<stem>_pool.csv`.
/// Returns the manifest path.
pub fn cmd_synth(cfg: &SynthConfig, out: &Path) -> Result<PathBuf> {
    let data = generate(&cfg.spec, cfg.seed)?;
    crate::data::write_csv_file(&data.dataset, out)?;
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synth".into());
    let dir = out.parent().unwrap_or(Path::new("."));
    let entry = |path: &Path| -> Result<ManifestEntry> {
        Ok(ManifestEntry {
            path: PathBuf::from(path.file_name().expect("file path")),
            schema: CsvSchema::default(),
            binarize: BinarizeRule::MostFrequent,
            sha256: Some(crate::data::sha256_file(path)?),
        })
    };
    let mut datasets = std::collections::BTreeMap::new();
    datasets.insert(stem.clone(), entry(out)?);
    if !data.extra_unlabeled.is_empty() {
        // Pool rows carry a placeholder label column so the file loads with
        // the same schema.
        let pool = LabeledDataset::new(
            format!("{stem}_pool"),
            data.extra_unlabeled.clone(),
            vec![crate::sign::Sign::Pos; data.extra_unlabeled.len()],
        )?;
        let pool_path = dir.join(format!("{stem}_pool.csv"));
        crate::data::write_csv_file(&pool, &pool_path)?;
        datasets.insert(format!("{stem}_pool"), entry(&pool_path)?);
    }
    let manifest = Manifest {
        version: crate::data::MANIFEST_VERSION,
        datasets,
    };
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "dataset": {"source": "synthetic", "kind": "threshold_1d", "count": 200},
                "split": {"k": 2, "drop_fraction": 0.5},
                "boost": {"variant": "plain", "eta": 0.1, "rounds": 5},
                "seed": 3
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn run_on_separable_data_is_perfect_and_repeatable() {
        let cfg = separable();
        let (a, ea) = cmd_run(&cfg).unwrap();
        assert_eq!(a.test_accuracy, Some(1.0));
        let (b, eb) = cmd_run(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(ea.to_json().unwrap(), eb.to_json().unwrap());
    }

    #[test]
    fn cv_on_separable_data() {
        let mut cfg = separable();
        cfg.dataset = DatasetRef::Synthetic {
            spec: SynthSpec::Halfspace {
                n: 1,
                count: 100,
                label_noise: 0.0,
                exhaustive: false,
            },
            seed: None,
        };
        let out = cmd_cv(&cfg).unwrap();
        assert_eq!(out.folds.len(), 2);
        assert_eq!(out.summary, "1.00 ± 0.00");
    }

    #[test]
    fn table_format() {
        assert_eq!(MeanSd { mean: 0.912, sd: 0.041 }.to_string(), "0.91 ± 0.04");
    }

    #[test]
    fn invalid_variant_names_field() {
        let err = ExperimentConfig::from_json(
            r#"{"dataset": {"source": "synthetic", "kind": "threshold_1d", "count": 10},
                "boost": {"variant": "bogus", "eta": 0.1, "rounds": 1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("variant"), "{err}");
    }

    #[test]
    fn boost_and_theory_are_exclusive() {
        let mut cfg = separable();
        cfg.theory = Some(TheorySection {
            variant: Variant::Plain,
            inputs: TheoryInputs {
                epsilon: 0.2,
                delta: 0.1,
                gamma: 1.0,
                complexity: 1.0,
                c_x: 1.0,
                constants: Default::default(),
                reuse_preset: Default::default(),
                master_seed: 0,
            },
        });
        assert!(cfg.validate().is_err());
        cfg.boost = None;
        assert_eq!(cfg.validate().unwrap().rounds, 50);
    }

    #[test]
    fn grid_cells_and_singleton_matches_cv() {
        let mut cfg = separable();
        cfg.grids = Some(Grids {
            rounds: vec![5],
            m: vec![10],
        });
        let g = cmd_grid(&cfg).unwrap();
        let cv = cmd_cv(&cfg).unwrap();
        assert_eq!(g.folds, cv.folds);
        cfg.grids = Some(Grids {
            rounds: vec![1, 2, 3],
            m: vec![5, 10, 20, 40],
        });
        assert_eq!(cmd_grid(&cfg).unwrap().cells.len(), 12);
        cfg.grids = Some(Grids {
            rounds: vec![],
            m: vec![1],
        });
        assert!(cmd_grid(&cfg).is_err());
    }

    #[test]
    fn pab_grid_cell_truncates_instead_of_failing() {
        let mut cfg = separable();
        cfg.boost = Some(BoostConfig::new(Variant::Pab, 0.1, 5));
        cfg.grids = Some(Grids {
            rounds: vec![100],
            m: vec![20],
        });
        let g = cmd_grid(&cfg).unwrap();
        assert!(g.cells[0].truncated_runs > 0);
        assert!(g.folds.iter().all(|f| f.truncated && f.rounds_run < 100));
    }

    #[test]
    fn params_lines() {
        let inp = TheoryInputs {
            epsilon: 0.1,
            delta: 0.1,
            gamma: 1.0,
            complexity: 2.0,
            c_x: 1.0,
            constants: Default::default(),
            reuse_preset: Default::default(),
            master_seed: 0,
        };
        let s = cmd_params(&inp, Variant::Plain).unwrap();
        assert!(s.contains("T=200\n"));
        let r = cmd_params(&inp, Variant::Reuse).unwrap();
        assert!(r.contains("sigma="));
        let mut bad = inp;
        bad.epsilon = 0.0;
        assert!(cmd_params(&bad, Variant::Plain).is_err());
    }
}
