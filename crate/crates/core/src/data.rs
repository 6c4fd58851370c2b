//! Dataset ingestion, label handling, fold splitting and synthetic data.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::sample::WeightedLabeledSet;
use crate::sign::Sign;

/// Feature matrix with ±1 labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Sign>,
    /// Rows dropped at load time because a feature did not parse.
    #[serde(default)]
    pub rows_rejected: usize,
    /// Raw label mapped to +1 by binarization, when one was chosen.
    #[serde(default)]
    pub positive_class: Option<String>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, features: Vec<Vec<f64>>, labels: Vec<Sign>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if let Some(first) = features.first() {
            let d = first.len();
            if let Some(bad) = features.iter().find(|x| x.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.len(),
                });
            }
        }
        Ok(LabeledDataset {
            name: name.into(),
            features,
            labels,
            rows_rejected: 0,
            positive_class: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            rows_rejected: self.rows_rejected,
            positive_class: self.positive_class.clone(),
        }
    }

    /// Unit weight per row.
    pub fn to_weighted(&self) -> Result<WeightedLabeledSet> {
        let mut set = WeightedLabeledSet::uniform(&self.features, &self.labels)?;
        if set.is_empty() {
            set = WeightedLabeledSet::new(self.dim());
        }
        Ok(set)
    }
}

/// Features with labels as they appear in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub raw_labels: Vec<String>,
    pub rows_rejected: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BadValue {
    /// Skip the row and count it.
    #[default]
    Reject,
    /// Fail with the row and column of the first bad value.
    Fail,
}

fn default_label_column() -> i64 {
    -1
}

fn default_delimiter() -> char {
    ','
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    /// Zero-based; negative values count from the end (-1 is the last column).
    #[serde(default = "default_label_column")]
    pub label_column: i64,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub on_bad_value: BadValue,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: -1,
            delimiter: ',',
            header: false,
            on_bad_value: BadValue::Reject,
        }
    }
}

impl CsvSchema {
    pub fn with_label_column(label_column: i64) -> Self {
        CsvSchema {
            label_column,
            ..Self::default()
        }
    }

    fn resolve_label(&self, width: usize) -> Result<usize> {
        let idx = if self.label_column < 0 {
            width as i64 + self.label_column
        } else {
            self.label_column
        };
        if idx < 0 || idx as usize >= width {
            return Err(Error::MissingColumn {
                column: self.label_column,
                width,
            });
        }
        Ok(idx as usize)
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<RawDataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut raw = read_csv(File::open(path)?, schema)?;
    raw.name = name;
    Ok(raw)
}

pub fn read_csv<R: Read>(input: R, schema: &CsvSchema) -> Result<RawDataset> {
    if !schema.delimiter.is_ascii() {
        return Err(Error::config("schema.delimiter", "must be a single ASCII character"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(schema.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    let mut rows_rejected = 0;
    let mut width = None;
    let mut label_idx = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = match width {
            Some(w) => w,
            None => {
                label_idx = schema.resolve_label(record.len())?;
                width = Some(record.len());
                record.len()
            }
        };
        if record.len() != w {
            return Err(Error::Parse {
                row,
                column: record.len().min(w),
                reason: format!("expected {w} fields, found {}", record.len()),
            });
        }
        let mut x = Vec::with_capacity(w - 1);
        let mut bad = None;
        for (c, field) in record.iter().enumerate() {
            if c == label_idx {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => x.push(v),
                _ => {
                    bad = Some((c, field.to_string()));
                    break;
                }
            }
        }
        match (bad, schema.on_bad_value) {
            (None, _) => {
                features.push(x);
                raw_labels.push(record[label_idx].to_string());
            }
            (Some(_), BadValue::Reject) => rows_rejected += 1,
            (Some((column, value)), BadValue::Fail) => {
                return Err(Error::Parse {
                    row,
                    column,
                    reason: format!("not a finite number: {value:?}"),
                })
            }
        }
    }
    if width.is_none() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            reason: "empty file".into(),
        });
    }
    if features.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            reason: format!("no usable rows ({rows_rejected} rejected)"),
        });
    }
    if rows_rejected > 0 {
        log::warn!("rejected {rows_rejected} rows with unparseable values");
    }
    Ok(RawDataset {
        name: String::new(),
        features,
        raw_labels,
        rows_rejected,
    })
}

/// Writes features followed by the ±1 label as the last column. Values are
/// printed in shortest round-trip form, so reading back is bit-exact.
pub fn write_csv<W: Write>(ds: &LabeledDataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for (x, y) in ds.features.iter().zip(&ds.labels) {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        row.push(format!("{}", y.value() as i8));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(ds: &LabeledDataset, path: &Path) -> Result<()> {
    write_csv(ds, File::create(path)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BinarizeRule {
    /// Most frequent raw label against the rest; ties go to the
    /// lexicographically larger label.
    #[default]
    MostFrequent,
    /// The named raw label against the rest.
    Positive { label: String },
}

fn as_unit_label(s: &str) -> Option<Sign> {
    s.parse::<f64>().ok().and_then(Sign::from_unit)
}

pub fn binarize_labels(raw: RawDataset, rule: &BinarizeRule) -> Result<LabeledDataset> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in &raw.raw_labels {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::SingleClass(counts.len()));
    }
    let unit: Option<Vec<Sign>> = raw.raw_labels.iter().map(|l| as_unit_label(l)).collect();
    let (labels, positive) = match (unit, rule) {
        (Some(labels), BinarizeRule::MostFrequent) => (labels, None),
        (_, rule) => {
            let positive = match rule {
                BinarizeRule::Positive { label } => {
                    if !counts.contains_key(label.as_str()) {
                        return Err(Error::config("binarize.label", format!("{label:?} does not occur")));
                    }
                    label.clone()
                }
                BinarizeRule::MostFrequent => counts
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
                    .map(|(l, _)| l.to_string())
                    .expect("at least two classes"),
            };
            let labels = raw
                .raw_labels
                .iter()
                .map(|l| if *l == positive { Sign::Pos } else { Sign::Neg })
                .collect();
            (labels, Some(positive))
        }
    };
    let mut ds = LabeledDataset::new(raw.name, raw.features, labels)?;
    ds.rows_rejected = raw.rows_rejected;
    ds.positive_class = positive;
    Ok(ds)
}

/// Hides the labels of a uniformly random `floor(fraction n)` rows.
/// Returns the still-labeled rows (in original order) and the features of
/// the others.
pub fn drop_labels(ds: &LabeledDataset, fraction: f64, seed: u64) -> Result<(LabeledDataset, Vec<Vec<f64>>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::config(
            "split.drop_fraction",
            format!("must be in [0, 1), got {fraction}"),
        ));
    }
    let n = ds.len();
    let n_drop = (fraction * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Drop, 0));
    let mut dropped = vec![false; n];
    for &i in &order[..n_drop] {
        dropped[i] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !dropped[i]).collect();
    let unlabeled = (0..n).filter(|&i| dropped[i]).map(|i| ds.features[i].clone()).collect();
    Ok((ds.subset(&keep), unlabeled))
}

/// Flips each label independently with probability `rate`.
pub fn inject_noise(ds: &LabeledDataset, rate: f64, seed: u64) -> Result<LabeledDataset> {
    if !(0.0..0.5).contains(&rate) {
        return Err(Error::config(
            "split.noise_rate",
            format!("must be in [0, 0.5), got {rate}"),
        ));
    }
    let mut rng = stream_rng(seed, Stream::Noise, 0);
    let mut out = ds.clone();
    for y in &mut out.labels {
        if rng.random::<f64>() < rate {
            *y = -*y;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `k` folds over a seeded permutation of `0..n`; the first `n % k` folds
/// get one extra test index. Index lists are sorted.
pub fn kfold_splits(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::config("split.k", format!("must be >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::config(
            "split.k",
            format!("{k} folds need at least {k} rows, got {n}"),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Split, 0));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        train.sort_unstable();
        folds.push(Fold { train, test });
        start += size;
    }
    Ok(folds)
}

/// `sign(w.x - theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub w: Vec<f64>,
    pub theta: f64,
}

impl Halfspace {
    pub fn predict(&self, x: &[f64]) -> Sign {
        Sign::of(self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.theta)
    }

    /// Gaussian weights and a threshold uniform in `[-|w|_1/2, |w|_1/2]`.
    pub fn random(n: usize, rng: &mut crate::rng::Rng) -> Self {
        let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let l1: f64 = w.iter().map(|v: &f64| v.abs()).sum();
        let theta = (rng.random::<f64>() - 0.5) * l1;
        Halfspace { w, theta }
    }
}

/// Every point of `{±1}^n`, ordered as binary numbers with bit `i` of the
/// index giving coordinate `i` (`0 -> -1`, `1 -> +1`).
pub fn hypercube(n: usize) -> Result<Vec<Vec<f64>>> {
    if n > 24 {
        return Err(Error::config(
            "n",
            format!("hypercube enumeration limited to n <= 24, got {n}"),
        ));
    }
    Ok((0..1usize << n)
        .map(|b| (0..n).map(|i| if b >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect())
}

fn random_cube_point(n: usize, bias: &[f64], rng: &mut crate::rng::Rng) -> Vec<f64> {
    (0..n)
        .map(|i| if rng.random::<f64>() < bias[i] { 1.0 } else { -1.0 })
        .collect()
}

/// Uniform points on `{±1}^n` labeled by a seeded random halfspace, each
/// label flipped with probability `label_noise`. With `exhaustive` every
/// cube point appears once and `count` is ignored.
pub fn synth_halfspace_hypercube(
    n: usize,
    count: usize,
    label_noise: f64,
    seed: u64,
    exhaustive: bool,
) -> Result<(LabeledDataset, Halfspace)> {
    if n == 0 {
        return Err(Error::config("n", "must be >= 1"));
    }
    if !(0.0..0.5).contains(&label_noise) {
        return Err(Error::config(
            "label_noise",
            format!("must be in [0, 0.5), got {label_noise}"),
        ));
    }
    let halfspace = Halfspace::random(n, &mut stream_rng(seed, Stream::Synth, 0));
    let features = if exhaustive {
        hypercube(n)?
    } else {
        let mut rng = stream_rng(seed, Stream::Synth, 1);
        let uniform = vec![0.5; n];
        (0..count).map(|_| random_cube_point(n, &uniform, &mut rng)).collect()
    };
    let mut rng = stream_rng(seed, Stream::Noise, 1);
    let labels = features
        .iter()
        .map(|x| {
            let y = halfspace.predict(x);
            if rng.random::<f64>() < label_noise {
                -y
            } else {
                y
            }
        })
        .collect();
    let ds = LabeledDataset::new(format!("halfspace_n{n}"), features, labels)?;
    Ok((ds, halfspace))
}

/// `x ~ U[0, 1]` with label `sign(x - threshold)`, flipped with probability
/// `label_noise`.
pub fn synth_threshold_1d(count: usize, threshold: f64, label_noise: f64, seed: u64) -> Result<LabeledDataset> {
    if !(0.0..0.5).contains(&label_noise) {
        return Err(Error::config(
            "label_noise",
            format!("must be in [0, 0.5), got {label_noise}"),
        ));
    }
    let mut rng = stream_rng(seed, Stream::Synth, 4);
    let features: Vec<Vec<f64>> = (0..count).map(|_| vec![rng.random::<f64>()]).collect();
    let mut noise = stream_rng(seed, Stream::Noise, 2);
    let labels = features
        .iter()
        .map(|x| {
            let y = Sign::of(x[0] - threshold);
            if noise.random::<f64>() < label_noise {
                -y
            } else {
                y
            }
        })
        .collect();
    LabeledDataset::new("threshold_1d", features, labels)
}

/// `max_x P_D(x) / P_Q(x)` for product measures on `{±1}^n` with
/// `P(x_i = +1)` given by the biases.
pub fn max_density_ratio(bias_d: &[f64], bias_q: &[f64]) -> Result<f64> {
    if bias_d.len() != bias_q.len() {
        return Err(Error::DimensionMismatch {
            expected: bias_d.len(),
            got: bias_q.len(),
        });
    }
    let mut r = 1.0;
    for (&d, &q) in bias_d.iter().zip(bias_q) {
        if !(0.0..=1.0).contains(&d) || !(0.0..=1.0).contains(&q) {
            return Err(Error::config("bias", "must lie in [0, 1]"));
        }
        let up = if d > 0.0 { d / q } else { 0.0 };
        let down = if d < 1.0 { (1.0 - d) / (1.0 - q) } else { 0.0 };
        r *= up.max(down);
    }
    Ok(r)
}

/// Pointwise density ratio `P_D(x) / P_Q(x)`.
pub fn density_ratio_at(x: &[f64], bias_d: &[f64], bias_q: &[f64]) -> f64 {
    x.iter()
        .zip(bias_d.iter().zip(bias_q))
        .map(|(&v, (&d, &q))| if v > 0.0 { d / q } else { (1.0 - d) / (1.0 - q) })
        .product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateShift {
    pub bias_d: Vec<f64>,
    pub bias_q: Vec<f64>,
    pub halfspace: Halfspace,
    pub max_ratio: f64,
}

/// Default bias construction: `Q` uniform, `D` tilted on every coordinate
/// by a factor `r = ratio_bound^(1/n)`, alternating towards `+1` and `-1`.
/// The pointwise ratio is then at most `r^n <= ratio_bound`.
pub fn shift_biases(n: usize, ratio_bound: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(ratio_bound >= 1.0) || !ratio_bound.is_finite() {
        return Err(Error::config("ratio_bound", format!("must be >= 1, got {ratio_bound}")));
    }
    if n == 0 {
        return Err(Error::config("n", "must be >= 1"));
    }
    // Shrink by a few ulps so rounding can never push the product past the bound.
    let r = if ratio_bound == 1.0 {
        1.0
    } else {
        ratio_bound.powf(1.0 / n as f64) * (1.0 - 1e-12)
    };
    if r > 2.0 {
        return Err(Error::InfeasibleBound {
            requested: ratio_bound,
            realized: 2f64.powi(n as i32),
        });
    }
    let bias_d = (0..n)
        .map(|i| if i % 2 == 0 { 0.5 * r } else { 1.0 - 0.5 * r })
        .collect();
    Ok((bias_d, vec![0.5; n]))
}

/// Labeled sample from `D` and unlabeled pool from `Q`, both product
/// measures on `{±1}^n`, labels from one seeded halfspace.
pub fn synth_covariate_shift(
    n: usize,
    count_d: usize,
    count_q: usize,
    ratio_bound: f64,
    seed: u64,
) -> Result<(LabeledDataset, Vec<Vec<f64>>, CovariateShift)> {
    let (bias_d, bias_q) = shift_biases(n, ratio_bound)?;
    synth_covariate_shift_with_biases(&bias_d, &bias_q, count_d, count_q, ratio_bound, seed)
}

/// As [`synth_covariate_shift`] with explicit biases, checked against the bound.
pub fn synth_covariate_shift_with_biases(
    bias_d: &[f64],
    bias_q: &[f64],
    count_d: usize,
    count_q: usize,
    ratio_bound: f64,
    seed: u64,
) -> Result<(LabeledDataset, Vec<Vec<f64>>, CovariateShift)> {
    let max_ratio = max_density_ratio(bias_d, bias_q)?;
    if max_ratio > ratio_bound {
        return Err(Error::InfeasibleBound {
            requested: ratio_bound,
            realized: max_ratio,
        });
    }
    let n = bias_d.len();
    let halfspace = Halfspace::random(n, &mut stream_rng(seed, Stream::Synth, 0));
    let mut rng_d = stream_rng(seed, Stream::Synth, 2);
    let features: Vec<Vec<f64>> = (0..count_d).map(|_| random_cube_point(n, bias_d, &mut rng_d)).collect();
    let labels = features.iter().map(|x| halfspace.predict(x)).collect();
    let mut rng_q = stream_rng(seed, Stream::Synth, 3);
    let pool = (0..count_q).map(|_| random_cube_point(n, bias_q, &mut rng_q)).collect();
    let ds = LabeledDataset::new(format!("shift_n{n}"), features, labels)?;
    Ok((
        ds,
        pool,
        CovariateShift {
            bias_d: bias_d.to_vec(),
            bias_q: bias_q.to_vec(),
            halfspace,
            max_ratio,
        },
    ))
}

/// Labeled points from `D` only, matching [`synth_covariate_shift`]'s
/// halfspace; used as test data or as a same-distribution pool.
pub fn synth_from_biases(bias: &[f64], halfspace: &Halfspace, count: usize, seed: u64, index: u64) -> LabeledDataset {
    let mut rng = stream_rng(seed, Stream::Synth, 10 + index);
    let n = bias.len();
    let features: Vec<Vec<f64>> = (0..count).map(|_| random_cube_point(n, bias, &mut rng)).collect();
    let labels = features.iter().map(|x| halfspace.predict(x)).collect();
    LabeledDataset {
        name: format!("biased_n{n}"),
        features,
        labels,
        rows_rejected: 0,
        positive_class: None,
    }
}

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Relative paths resolve against the manifest's directory.
    pub path: PathBuf,
    #[serde(default)]
    pub schema: CsvSchema,
    #[serde(default)]
    pub binarize: BinarizeRule,
    /// Lowercase hex SHA-256 of the file; checked when present.
    #[serde(default)]
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub datasets: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut m: Manifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::config(
                "manifest.version",
                format!("expected {MANIFEST_VERSION}, got {}", m.version),
            ));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        for e in m.datasets.values_mut() {
            if e.path.is_relative() {
                e.path = base.join(&e.path);
            }
        }
        Ok(m)
    }

    pub fn entry(&self, name: &str) -> Result<&ManifestEntry> {
        self.datasets
            .get(name)
            .ok_or_else(|| Error::config("dataset.name", format!("{name:?} is not in the manifest")))
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl ManifestEntry {
    pub fn verify(&self) -> Result<()> {
        if let Some(expected) = &self.sha256 {
            let actual = sha256_file(&self.path)?;
            if !actual.eq_ignore_ascii_case(expected) {
                return Err(Error::Checksum {
                    path: self.path.display().to_string(),
                    expected: expected.clone(),
                    actual,
                });
            }
        }
        Ok(())
    }

    /// Verifies the checksum, parses the file and binarizes labels.
    pub fn load(&self, name: &str) -> Result<LabeledDataset> {
        self.verify()?;
        let mut raw = load_csv(&self.path, &self.schema)?;
        raw.name = name.to_string();
        binarize_labels(raw, &self.binarize)
    }
}
