//! Binary-labelled datasets: loading, normalization, covariance and folds.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MetricMatrix;

/// Amplitude of the deterministic jitter added before z-scoring.
pub const NOISE_AMPLITUDE: f64 = 1e-12;

/// `N x K` features with labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    features: Vec<Vec<f64>>,
    labels: Vec<i8>,
    normalized: bool,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        let k = features[0].len();
        if let Some(row) = features.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: row.len(),
            });
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "features".into(),
            });
        }
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::UnsupportedLabelSet(
                labels.iter().map(|y| y.to_string()).collect(),
            ));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rows at `indices`, in that order. The normalized flag carries over.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            normalized: self.normalized,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Maps a two-valued raw label set onto `{-1, +1}`.
///
/// Accepted sets, tried in order: `{-1, +1}`, `{0, 1}`, `{1, 2}`. A dataset
/// containing a single class maps through the first set that contains it.
fn canonical_labels(raw: &[String]) -> Result<Vec<i8>> {
    let parsed: Vec<f64> = raw
        .iter()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::UnsupportedLabelSet(distinct(raw)))?;
    for (neg, pos) in [(-1.0, 1.0), (0.0, 1.0), (1.0, 2.0)] {
        if parsed.iter().all(|&v| v == neg || v == pos) {
            return Ok(parsed.iter().map(|&v| if v == pos { 1 } else { -1 }).collect());
        }
    }
    Err(Error::UnsupportedLabelSet(distinct(raw)))
}

fn distinct(raw: &[String]) -> Vec<String> {
    let mut v = raw.to_vec();
    v.sort();
    v.dedup();
    v
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads `label idx:val idx:val ...` lines with 1-based indices. The feature
/// count is the largest index seen; missing entries are zero.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    parse_libsvm(&read(path)?, path)
}

pub fn parse_libsvm(text: &str, path: &Path) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut raw_labels = Vec::new();
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut k = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(lineno + 1, format!("expected idx:val, found {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(lineno + 1, format!("bad feature index {idx:?}")))?;
            if idx == 0 {
                return Err(err(lineno + 1, "feature indices are 1-based".into()));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(lineno + 1, format!("bad feature value {val:?}")))?;
            k = k.max(idx);
            row.push((idx - 1, val));
        }
        raw_labels.push(label.to_string());
        sparse.push(row);
    }
    if sparse.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = canonical_labels(&raw_labels)?;
    let features = sparse
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; k];
            for (j, v) in row {
                dense[j] = v;
            }
            dense
        })
        .collect();
    Dataset::new(dataset_name(path), features, labels)
}

/// Reads a dense CSV with header `label,f1,...,fK`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    parse_csv(&read(path)?, path)
}

pub fn parse_csv(text: &str, path: &Path) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::EmptyDataset);
    };
    let k = header.split(',').count().saturating_sub(1);
    let mut raw_labels = Vec::new();
    let mut features = Vec::new();
    for (lineno, line) in lines {
        let mut cells = line.split(',').map(str::trim);
        raw_labels.push(cells.next().unwrap_or_default().to_string());
        let row: Vec<f64> = cells
            .map(|c| c.parse::<f64>().map_err(|_| err(lineno + 1, format!("bad value {c:?}"))))
            .collect::<Result<_>>()?;
        if row.len() != k {
            return Err(err(lineno + 1, format!("expected {k} features, found {}", row.len())));
        }
        features.push(row);
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(dataset_name(path), features, canonical_labels(&raw_labels)?)
}

/// LibSVM text with shortest round-trip float formatting; zeros are omitted.
pub fn to_libsvm_string(data: &Dataset) -> String {
    let mut out = String::new();
    for (row, &y) in data.features.iter().zip(&data.labels) {
        out.push_str(if y > 0 { "+1" } else { "-1" });
        for (j, v) in row.iter().enumerate() {
            if *v != 0.0 {
                let _ = write!(out, " {}:{}", j + 1, v);
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_libsvm(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_libsvm_string(data)).map_err(|e| Error::io(path, e))
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("label");
    for j in 0..data.dim() {
        let _ = write!(out, ",f{}", j + 1);
    }
    out.push('\n');
    for (row, &y) in data.features.iter().zip(&data.labels) {
        let _ = write!(out, "{y}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Deterministic value in `[0, 1)` for cell `(i, j)`.
fn cell_hash(i: usize, j: usize) -> f64 {
    let mut z = (i as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((j as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Column statistics fitted on one dataset and applicable to another, so a
/// test split can be scaled with its training split's moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Normalizer {
    pub fn fit(data: &Dataset) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, have: n });
        }
        let k = data.dim();
        let noisy = jittered(data);
        let mut means = vec![0.0; k];
        for row in &noisy {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut stds = vec![0.0; k];
        for row in &noisy {
            for j in 0..k {
                stds[j] += (row[j] - means[j]).powi(2);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / (n - 1) as f64).sqrt());
        // a column that is constant before jitter stays at zero
        for (j, s) in stds.iter_mut().enumerate() {
            let first = data.features[0][j];
            if data.features.iter().all(|r| r[j] == first) {
                *s = 0.0;
            }
        }
        Ok(Normalizer { means, stds })
    }

    /// Jitter, z-score with the fitted moments, then scale rows to unit norm.
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.dim() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: data.dim(),
            });
        }
        let features = jittered(data)
            .into_iter()
            .map(|row| {
                let mut z: Vec<f64> = row
                    .iter()
                    .zip(self.means.iter().zip(&self.stds))
                    .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
                    .collect();
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    z.iter_mut().for_each(|v| *v /= norm);
                }
                z
            })
            .collect();
        Ok(Dataset {
            name: data.name.clone(),
            features,
            labels: data.labels.clone(),
            normalized: true,
        })
    }
}

fn jittered(data: &Dataset) -> Vec<Vec<f64>> {
    data.features
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| v + NOISE_AMPLITUDE * cell_hash(i, j))
                .collect()
        })
        .collect()
}

/// Column z-scoring followed by unit row length. Already-normalized input is
/// returned unchanged.
pub fn normalize(data: &Dataset) -> Result<Dataset> {
    if data.normalized {
        return Ok(data.clone());
    }
    Normalizer::fit(data)?.apply(data)
}

/// Sample covariance with the `N - 1` denominator.
pub fn covariance(data: &Dataset) -> Result<MetricMatrix> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, have: n });
    }
    let k = data.dim();
    let mut mean = vec![0.0; k];
    for row in &data.features {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let mut acc = vec![0.0; k * k];
    for row in &data.features {
        let c: Vec<f64> = row.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..k {
            for j in i..k {
                acc[i * k + j] += c[i] * c[j];
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            let v = acc[i * k + j] / (n - 1) as f64;
            acc[i * k + j] = v;
            acc[j * k + i] = v;
        }
    }
    Ok(MetricMatrix::symmetrized(k, &acc))
}

/// Uniform integer in `[0, bound)` by widening multiply.
pub(crate) fn bounded(rng: &mut Xoshiro256PlusPlus, bound: usize) -> usize {
    ((rng.next_u64() as u128 * bound as u128) >> 64) as usize
}

/// Fisher-Yates permutation of `0..n` driven by xoshiro256++ seeded through
/// `seed_from_u64` (splitmix64 expansion).
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = bounded(&mut rng, i + 1);
        p.swap(i, j);
    }
    p
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    /// Fold index of every sample.
    pub assignments: Vec<usize>,
    pub fold_count: usize,
    pub seed: u64,
}

impl FoldPlan {
    /// Sample indices of `fold`, ascending.
    pub fn fold(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn complement(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.fold_count];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

/// Permutes `0..n` and deals the permuted samples round-robin into `t` folds.
pub fn split_folds(n: usize, t: usize, seed: u64) -> Result<FoldPlan> {
    if t == 0 || t > n {
        return Err(Error::TooManyFolds { n, folds: t });
    }
    let mut assignments = vec![0; n];
    for (pos, &i) in permutation(n, seed).iter().enumerate() {
        assignments[i] = pos % t;
    }
    Ok(FoldPlan {
        assignments,
        fold_count: t,
        seed,
    })
}

/// Fold count used by the benchmark protocol: `round(N / 4)`, at least 1.
pub fn default_fold_count(n: usize) -> usize {
    ((n as f64 / 4.0).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// One train/test split per seed; the first `round(train_frac * n)` permuted
/// samples train, the rest test. Both sides are kept nonempty.
pub fn cross_val_split(
    n: usize,
    train_frac: f64,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<TrainTestSplit>> {
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, have: n });
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidParameter(format!("train fraction {train_frac}")));
    }
    let n_train = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);
    Ok(seeds
        .into_iter()
        .map(|seed| {
            let p = permutation(n, seed);
            let mut train = p[..n_train].to_vec();
            let mut test = p[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            TrainTestSplit { train, test, seed }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Libsvm,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: DataFormat,
}

/// Benchmark suite description: a JSON array of `{name, path, format}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Manifest {
    pub datasets: Vec<ManifestEntry>,
}

impl Manifest {
    /// Loads a manifest; relative dataset paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m: Manifest = serde_json::from_str(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut m.datasets {
            if e.path.is_relative() {
                e.path = base.join(&e.path);
            }
        }
        Ok(m)
    }
}

impl ManifestEntry {
    pub fn load(&self) -> Result<Dataset> {
        let d = match self.format {
            DataFormat::Libsvm => load_libsvm(&self.path)?,
            DataFormat::Csv => load_csv(&self.path)?,
        };
        Ok(d.with_name(self.name.clone()))
    }
}

/// Picks the loader from the file extension (`.csv` or anything else as LibSVM).
pub fn load_any(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => load_csv(path),
        _ => load_libsvm(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn libsvm_line() {
        let d = parse_libsvm("+1 1:0.5 3:2\n", p()).unwrap();
        assert_eq!(d.sample(0), &[0.5, 0.0, 2.0]);
        assert_eq!(d.label(0), 1);
    }

    #[test]
    fn empty_file() {
        assert!(matches!(parse_libsvm("", p()), Err(Error::EmptyDataset)));
        assert!(matches!(parse_csv("", p()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn label_sets() {
        let d = parse_libsvm("2 1:1\n1 1:2\n2 1:3\n", p()).unwrap();
        assert_eq!(d.labels(), &[1, -1, 1]);
        let d = parse_libsvm("0 1:1\n1 1:2\n", p()).unwrap();
        assert_eq!(d.labels(), &[-1, 1]);
        assert!(matches!(
            parse_libsvm("3 1:1\n1 1:2\n", p()),
            Err(Error::UnsupportedLabelSet(_))
        ));
    }

    #[test]
    fn parse_errors_carry_line() {
        match parse_libsvm("+1 1:0.5\n-1 2-3\n", p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_roundtrip() {
        let d = parse_csv("label,f1,f2\n1,0.5,-2\n-1,3,4\n", p()).unwrap();
        assert_eq!(d.features(), &[vec![0.5, -2.0], vec![3.0, 4.0]]);
        assert_eq!(d.labels(), &[1, -1]);
    }

    #[test]
    fn constant_column_zeroed() {
        let d = Dataset::new("c", vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]], vec![1, -1, 1])
            .unwrap();
        let n = normalize(&d).unwrap();
        assert!(n.features().iter().all(|r| r[1] == 0.0));
        assert!(n.is_normalized());
    }

    #[test]
    fn unit_rows() {
        let d = Dataset::new("u", vec![vec![1.0, 1.0], vec![-1.0, -1.0]], vec![1, -1]).unwrap();
        let n = normalize(&d).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n.sample(0)[0] - h).abs() < 1e-9 && (n.sample(0)[1] - h).abs() < 1e-9);
    }

    #[test]
    fn covariance_examples() {
        let d = Dataset::new("d", vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1, -1]).unwrap();
        let e = covariance(&d).unwrap();
        assert_eq!(e.to_rows(), vec![vec![2.0, 0.0], vec![0.0, 0.0]]);
        let same = Dataset::new("s", vec![vec![0.3, 0.1]; 2], vec![1, 1]).unwrap();
        assert!(covariance(&same).unwrap().as_row_major().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fold_sizes() {
        let plan = split_folds(10, 3, 0).unwrap();
        let mut s = plan.sizes();
        s.sort_unstable();
        assert_eq!(s, vec![3, 3, 4]);
        assert_eq!(split_folds(4, 4, 7).unwrap().sizes(), vec![1; 4]);
        assert_eq!(split_folds(10, 3, 5).unwrap(), split_folds(10, 3, 5).unwrap());
        assert!(split_folds(3, 4, 0).is_err());
    }

    #[test]
    fn cv_splits() {
        let s = cross_val_split(20, 0.9, 0..10).unwrap();
        assert_eq!(s.len(), 10);
        for sp in &s {
            assert_eq!(sp.train.len(), 18);
            assert_eq!(sp.test.len(), 2);
        }
    }
}
