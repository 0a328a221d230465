//! Datasets: CSV input and output, standardization, stratified splits and a
//! synthetic low-rank generator.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mlr::argmax_rows;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    /// One-hot, `n × c`.
    pub y: Matrix,
    pub class_names: Option<Vec<String>>,
    /// Per-sample tensor shape; its product is the feature count.
    pub tensor_shape: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        let d = Self {
            x,
            y,
            class_names: None,
            tensor_shape: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_labels(x: Matrix, labels: &[usize], classes: usize) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} samples",
                labels.len(),
                x.rows()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidInput(format!("label {bad} out of range for {classes} classes")));
        }
        Self::new(x, one_hot(labels, classes))
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.rows() != self.y.rows() {
            return Err(Error::InvalidInput(format!(
                "x has {} rows, y has {}",
                self.x.rows(),
                self.y.rows()
            )));
        }
        for i in 0..self.y.rows() {
            let row = self.y.row(i);
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            if ones != 1 || row.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidInput(format!("label row {i} is not one-hot")));
            }
        }
        if let Some(names) = &self.class_names {
            if names.len() != self.y.cols() {
                return Err(Error::InvalidInput("class name count differs from label width".into()));
            }
        }
        if let Some(shape) = &self.tensor_shape {
            if shape.iter().product::<usize>() != self.x.cols() {
                return Err(Error::InvalidInput(format!(
                    "tensor shape {shape:?} does not match {} features",
                    self.x.cols()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn features(&self) -> usize {
        self.x.cols()
    }

    pub fn classes(&self) -> usize {
        self.y.cols()
    }

    pub fn labels(&self) -> Vec<usize> {
        argmax_rows(&self.y)
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: self.y.select_rows(idx),
            class_names: self.class_names.clone(),
            tensor_shape: self.tensor_shape.clone(),
        }
    }
}

pub fn one_hot(labels: &[usize], classes: usize) -> Matrix {
    Matrix::from_fn(labels.len(), classes, |i, j| if labels[i] == j { 1.0 } else { 0.0 })
}

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
    /// Known classes in index order. Labels outside this list are errors;
    /// when absent, classes are numbered in order of first appearance.
    pub class_names: Option<Vec<String>>,
}

impl CsvOptions {
    pub fn new(label_column: LabelColumn, has_header: bool) -> Self {
        Self {
            label_column,
            has_header,
            class_names: None,
        }
    }
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut records = reader.records().enumerate();
    let mut label_idx = match &opts.label_column {
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(_) => None,
    };
    if opts.has_header {
        if let Some((_, rec)) = records.next() {
            let rec = rec.map_err(|e| parse_err(1, e.to_string()))?;
            if let LabelColumn::Name(name) = &opts.label_column {
                label_idx = rec.iter().position(|h| h == name);
                if label_idx.is_none() {
                    return Err(parse_err(1, format!("no column named `{name}`")));
                }
            }
        }
    }
    let label_idx = label_idx.ok_or_else(|| {
        Error::InvalidInput("a label column given by name needs a header row".into())
    })?;

    let fixed = opts.class_names.is_some();
    let mut names: Vec<String> = opts.class_names.clone().unwrap_or_default();
    let mut lookup: HashMap<String, usize> = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    let mut width = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();

    for (k, rec) in records {
        let line = k + 1;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        match width {
            None => {
                if label_idx >= rec.len() {
                    return Err(parse_err(line, format!("label column {label_idx} out of range")));
                }
                width = Some(rec.len());
            }
            Some(w) if w != rec.len() => {
                return Err(parse_err(line, format!("expected {w} fields, found {}", rec.len())));
            }
            _ => {}
        }
        for (j, field) in rec.iter().enumerate() {
            if j == label_idx {
                let id = match lookup.get(field) {
                    Some(&id) => id,
                    None if fixed => return Err(parse_err(line, format!("unseen label `{field}`"))),
                    None => {
                        names.push(field.to_string());
                        lookup.insert(field.to_string(), names.len() - 1);
                        names.len() - 1
                    }
                };
                labels.push(id);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(line, format!("non-numeric feature `{field}` in column {j}")))?;
                if !v.is_finite() {
                    return Err(parse_err(line, format!("non-finite feature in column {j}")));
                }
                data.push(v);
            }
        }
    }
    let m = width.map_or(0, |w| w - 1);
    let x = Matrix::from_vec(labels.len(), m, data)?;
    let classes = names.len();
    Ok(Dataset {
        x,
        y: one_hot(&labels, classes),
        class_names: Some(names),
        tensor_shape: None,
    })
}

/// Shortest decimal that parses back to the same `f64`.
fn fmt_exact(v: f64) -> String {
    format!("{v:?}")
}

/// Writes features `f0 … f{m−1}` and a trailing `label` column with a header.
/// Labels are class names when present, else indices.
pub fn write_csv(d: &Dataset, path: &Path) -> Result<()> {
    let names = d.class_names.clone();
    write_table(path, &d.x, &d.labels(), |l| match &names {
        Some(n) => n[l].clone(),
        None => l.to_string(),
    }, fmt_exact)
}

/// Features with 17 significant digits plus an integer label column.
pub fn export_features(f: &Matrix, labels: &[usize], path: &Path) -> Result<()> {
    if labels.len() != f.rows() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} feature rows",
            labels.len(),
            f.rows()
        )));
    }
    write_table(path, f, labels, |l| l.to_string(), |v| format!("{v:.16e}"))
}

fn write_table(
    path: &Path,
    x: &Matrix,
    labels: &[usize],
    label: impl Fn(usize) -> String,
    num: impl Fn(f64) -> String,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let mut header: Vec<String> = (0..x.cols()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for i in 0..x.rows() {
        let mut fields: Vec<String> = x.row(i).iter().map(|&v| num(v)).collect();
        fields.push(label(labels[i]));
        writeln!(w, "{}", fields.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Per-feature affine map `(x − mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Population statistics of `x`; zero-variance columns get scale 1.
    pub fn fit(x: &Matrix) -> Self {
        let (n, m) = x.shape();
        let mut mean = vec![0.0; m];
        for i in 0..n {
            for (s, v) in mean.iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        mean.iter_mut().for_each(|s| *s /= n.max(1) as f64);
        let mut var = vec![0.0; m];
        for i in 0..n {
            for ((s, v), mu) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - mu) * (v - mu);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n.max(1) as f64).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::shape(
                "Standardizer::apply",
                format!("{} features", self.mean.len()),
                format!("{}", x.cols()),
            ));
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j]))
    }

    pub fn apply_dataset(&self, d: &Dataset) -> Result<Dataset> {
        Ok(Dataset {
            x: self.apply(&d.x)?,
            ..d.clone()
        })
    }
}

pub fn standardize(d: &Dataset) -> Result<(Dataset, Standardizer)> {
    if d.len() < 2 {
        return Err(Error::InvalidInput("standardize needs at least 2 samples".into()));
    }
    let s = Standardizer::fit(&d.x);
    Ok((s.apply_dataset(d)?, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSpec {
    /// Stratified: each class contributes `round(fraction · count)` samples
    /// to the training side.
    Fraction { train_fraction: f64, seed: u64 },
    Indices { train: Vec<usize>, test: Vec<usize> },
}

pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d, spec)?;
    Ok((d.subset(&train), d.subset(&test)))
}

pub fn split_indices(d: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    match spec {
        SplitSpec::Indices { train, test } => {
            let mut seen = vec![false; d.len()];
            for &i in train.iter().chain(test) {
                if i >= d.len() {
                    return Err(Error::InvalidInput(format!("split index {i} out of range")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidInput(format!("split index {i} used twice")));
                }
            }
            Ok((train.clone(), test.clone()))
        }
        SplitSpec::Fraction { train_fraction, seed } => {
            if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "train fraction must lie in (0, 1), got {train_fraction}"
                )));
            }
            let labels = d.labels();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (mut train, mut test) = (Vec::new(), Vec::new());
            for c in 0..d.classes() {
                let mut idx: Vec<usize> = (0..d.len()).filter(|&i| labels[i] == c).collect();
                if idx.is_empty() {
                    continue;
                }
                if idx.len() < 2 {
                    return Err(Error::InvalidInput(format!(
                        "class {c} has fewer than 2 samples, cannot stratify"
                    )));
                }
                idx.shuffle(&mut rng);
                let k = (train_fraction * idx.len() as f64).round() as usize;
                train.extend_from_slice(&idx[..k]);
                test.extend_from_slice(&idx[k..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Ok((train, test))
        }
    }
}

/// Synthetic classes drawn from a mixture near a rank-`R` subspace.
///
/// Class means are `MEAN_SCALE · N(0, I_R)`; a sample of class `k` has latent
/// `u = mean_k + LATENT_SPREAD · N(0, I_R)` and features
/// `x = uᵀ B + noise · N(0, I_m)` with a seeded `R × m` mixing matrix
/// `B = MIXING_SCALE · N(0, 1)`. With `noise = 0`, `rank(X) = R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_class: usize,
    pub classes: usize,
    pub features: usize,
    pub rank: usize,
    pub noise: f64,
    pub seed: u64,
    pub mean_scale: f64,
    pub mixing_scale: f64,
}

pub const LATENT_SPREAD: f64 = 0.3;
pub const MEAN_SCALE: f64 = 0.3;
pub const MIXING_SCALE: f64 = 0.05;

impl SyntheticSpec {
    pub fn new(n_per_class: usize, classes: usize, features: usize, rank: usize, noise: f64, seed: u64) -> Self {
        Self {
            n_per_class,
            classes,
            features,
            rank,
            noise,
            seed,
            mean_scale: MEAN_SCALE,
            mixing_scale: MIXING_SCALE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.n_per_class == 0 || self.rank == 0 {
            return Err(Error::InvalidInput(
                "synthetic data needs >= 2 classes, >= 1 sample per class and rank >= 1".into(),
            ));
        }
        if self.rank >= self.features.min(self.classes * self.n_per_class) {
            return Err(Error::InvalidInput(format!(
                "rank {} must be below min(features, samples) = {}",
                self.rank,
                self.features.min(self.classes * self.n_per_class)
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidInput(format!("noise must be >= 0, got {}", self.noise)));
        }
        if !(self.mean_scale >= 0.0 && self.mixing_scale > 0.0) {
            return Err(Error::InvalidInput("scales must be positive".into()));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Dataset> {
        Ok(self.generate_split(0)?.0)
    }

    /// Training set of `n_per_class` and test set of `test_per_class`
    /// samples per class from the same means and mixing matrix.
    pub fn generate_split(&self, test_per_class: usize) -> Result<(Dataset, Dataset)> {
        self.validate()?;
        let (c, r, m) = (self.classes, self.rank, self.features);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let means = Matrix::from_fn(c, r, |_, _| self.mean_scale * normal());
        let b = Matrix::from_fn(r, m, |_, _| self.mixing_scale * normal());
        let mut draw = |per_class: usize| -> Result<Dataset> {
            let n = per_class * c;
            let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
            let u = Matrix::from_fn(n, r, |i, k| means[(labels[i], k)] + LATENT_SPREAD * normal());
            let mut x = u.matmul(&b)?;
            if self.noise > 0.0 {
                for v in x.as_mut_slice() {
                    *v += self.noise * normal();
                }
            }
            let mut d = Dataset::from_labels(x, &labels, c)?;
            d.class_names = Some((0..c).map(|k| k.to_string()).collect());
            Ok(d)
        };
        let train = draw(self.n_per_class)?;
        let test = draw(test_per_class)?;
        Ok((train, test))
    }
}

pub fn gen_synthetic_lowrank(
    n_per_class: usize,
    classes: usize,
    features: usize,
    rank: usize,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    SyntheticSpec::new(n_per_class, classes, features, rank, noise, seed).generate()
}
