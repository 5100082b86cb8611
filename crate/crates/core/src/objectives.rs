//! Metric-learning objectives written as functions of pairwise Mahalanobis
//! distances `delta_p = df_p^T M df_p` over unordered sample pairs `p`.
//!
//! Every objective is evaluated from a distance vector, and its gradient with
//! respect to `M` follows from the chain rule
//! `dQ/dM = sum_p (dQ/d delta_p) df_p df_p^T`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::data::{bounded, Dataset};
use crate::error::{Error, Result};
use crate::matrix::MetricMatrix;

pub const DEFAULT_LMNN_MU: f64 = 0.5;
pub const LMNN_TARGETS: usize = 3;
/// Sample count above which similar/dissimilar pair lists are subsampled.
pub const LSML_FULL_PAIRS_MAX_N: usize = 200;
pub const LSML_MAX_COMPARISONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Mcml,
    /// Maximized; the loss is its negation.
    Deml,
    Lsml,
    Lmnn { mu: f64 },
    Glr,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 5] = [
        ObjectiveKind::Mcml,
        ObjectiveKind::Deml,
        ObjectiveKind::Lsml,
        ObjectiveKind::Lmnn {
            mu: DEFAULT_LMNN_MU,
        },
        ObjectiveKind::Glr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::Mcml => "mcml",
            ObjectiveKind::Deml => "deml",
            ObjectiveKind::Lsml => "lsml",
            ObjectiveKind::Lmnn { .. } => "lmnn",
            ObjectiveKind::Glr => "glr",
        }
    }

    /// `+1` for minimized objectives, `-1` for DEML.
    pub fn sense(&self) -> f64 {
        if matches!(self, ObjectiveKind::Deml) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_maximized(&self) -> bool {
        self.sense() < 0.0
    }

    /// Whether the objective is differentiable wherever every `delta > 0`.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self,
            ObjectiveKind::Mcml | ObjectiveKind::Deml | ObjectiveKind::Glr
        )
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcml" => Ok(ObjectiveKind::Mcml),
            "deml" => Ok(ObjectiveKind::Deml),
            "lsml" => Ok(ObjectiveKind::Lsml),
            "lmnn" => Ok(ObjectiveKind::Lmnn {
                mu: DEFAULT_LMNN_MU,
            }),
            "glr" => Ok(ObjectiveKind::Glr),
            other => Err(Error::InvalidParameter(format!("unknown objective {other:?}"))),
        }
    }
}

/// `(f_i - f_j)^T M (f_i - f_j)`.
pub fn mahalanobis(m: &MetricMatrix, fi: &[f64], fj: &[f64]) -> Result<f64> {
    let k = m.dim();
    if fi.len() != k || fj.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: if fi.len() != k { fi.len() } else { fj.len() },
        });
    }
    let d: Vec<f64> = fi.iter().zip(fj).map(|(a, b)| a - b).collect();
    Ok(m.quad_form(&d))
}

/// Which entries of `M` a gradient is taken with respect to.
///
/// Off-diagonal entries are single symmetric variables, so their partial
/// derivative carries the factor two from appearing at `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrySelector {
    /// `M_00, ..., M_{K-1,K-1}`.
    Diagonal,
    /// All diagonals, then `M_ic` for `i != c` ascending.
    Column(usize),
    /// All diagonals, then the strict upper triangle row-major.
    All,
}

impl EntrySelector {
    /// Matrix positions in gradient order.
    pub fn entries(&self, k: usize) -> Vec<(usize, usize)> {
        match *self {
            EntrySelector::Diagonal => (0..k).map(|i| (i, i)).collect(),
            EntrySelector::Column(c) => (0..k)
                .map(|i| (i, i))
                .chain((0..k).filter(|&i| i != c).map(|i| (i, c)))
                .collect(),
            EntrySelector::All => (0..k)
                .map(|i| (i, i))
                .chain((0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))))
                .collect(),
        }
    }
}

/// Similar and dissimilar unordered pairs plus LMNN target neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    pub similar: Vec<(usize, usize)>,
    pub dissimilar: Vec<(usize, usize)>,
    /// `target_neighbors[i]`: nearest same-label samples of `i`.
    pub target_neighbors: Vec<Vec<usize>>,
}

impl PairSet {
    /// Splits all pairs `i < j` by label and picks `k_target` same-label
    /// nearest neighbors of every sample under `metric` (ties to the lower
    /// index).
    pub fn new(data: &Dataset, metric: &MetricMatrix, k_target: usize) -> Result<Self> {
        let n = data.len();
        if metric.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                found: metric.dim(),
            });
        }
        let mut similar = Vec::new();
        let mut dissimilar = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if data.label(i) == data.label(j) {
                    similar.push((i, j));
                } else {
                    dissimilar.push((i, j));
                }
            }
        }
        let mut target_neighbors = Vec::with_capacity(n);
        for i in 0..n {
            let mut cands: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i && data.label(j) == data.label(i))
                .map(|j| Ok((mahalanobis(metric, data.sample(i), data.sample(j))?, j)))
                .collect::<Result<_>>()?;
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            target_neighbors.push(cands.iter().take(k_target).map(|c| c.1).collect());
        }
        Ok(PairSet {
            similar,
            dissimilar,
            target_neighbors,
        })
    }

    pub fn from_data(data: &Dataset) -> Result<Self> {
        Self::new(data, &MetricMatrix::identity(data.dim()), LMNN_TARGETS)
    }
}

#[derive(Debug, Clone)]
struct LmnnTerms {
    /// `(i, pair index of (i, j))` for every target neighbor `j` of `i`.
    targets: Vec<(usize, usize)>,
    /// `impostors[i]`: pair indices `(i, l)` with a different label.
    impostors: Vec<Vec<usize>>,
}

/// An objective bound to one dataset, with sample differences cached.
#[derive(Debug, Clone)]
pub struct Objective {
    kind: ObjectiveKind,
    n: usize,
    k: usize,
    /// All unordered pairs `i < j` in lexicographic order.
    pairs: Vec<(usize, usize)>,
    /// Row `p` holds `f_i - f_j` for `pairs[p]`.
    diffs: Vec<f64>,
    same: Vec<bool>,
    lmnn: Option<LmnnTerms>,
    /// `(similar pair, dissimilar pair)` comparisons.
    lsml: Vec<(usize, usize)>,
}

/// Per-pair derivative of the loss plus the number of square-root terms
/// evaluated at a zero distance (where the subgradient 0 is substituted).
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub values: Vec<f64>,
    pub singular_points: usize,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, data: &Dataset, seed: u64) -> Result<Self> {
        let pairs = PairSet::from_data(data)?;
        Self::with_pairs(kind, data, &pairs, seed)
    }

    /// `seed` drives LSML pair subsampling only.
    pub fn with_pairs(kind: ObjectiveKind, data: &Dataset, pairs: &PairSet, seed: u64) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, have: n });
        }
        if let ObjectiveKind::Lmnn { mu } = kind {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidParameter(format!("LMNN mu {mu} outside [0, 1]")));
            }
        }
        let k = data.dim();
        let mut all = Vec::with_capacity(n * (n - 1) / 2);
        let mut diffs = Vec::with_capacity(n * (n - 1) / 2 * k);
        let mut same = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                all.push((i, j));
                same.push(data.label(i) == data.label(j));
                diffs.extend(data.sample(i).iter().zip(data.sample(j)).map(|(a, b)| a - b));
            }
        }
        let mut obj = Objective {
            kind,
            n,
            k,
            pairs: all,
            diffs,
            same,
            lmnn: None,
            lsml: Vec::new(),
        };
        match kind {
            ObjectiveKind::Lmnn { .. } => {
                let targets = pairs
                    .target_neighbors
                    .iter()
                    .enumerate()
                    .flat_map(|(i, js)| js.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| (i, obj.pair_index(i, j)))
                    .collect();
                let impostors = (0..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&l| data.label(l) != data.label(i))
                            .map(|l| obj.pair_index(i, l))
                            .collect()
                    })
                    .collect();
                obj.lmnn = Some(LmnnTerms { targets, impostors });
            }
            ObjectiveKind::Lsml => {
                obj.lsml = obj.lsml_comparisons(pairs, seed);
            }
            _ => {}
        }
        Ok(obj)
    }

    fn lsml_comparisons(&self, pairs: &PairSet, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let to_idx = |v: &[(usize, usize)]| -> Vec<usize> {
            v.iter().map(|&(i, j)| self.pair_index(i, j)).collect()
        };
        let mut s = to_idx(&pairs.similar);
        let mut d = to_idx(&pairs.dissimilar);
        if self.n > LSML_FULL_PAIRS_MAX_N {
            let cap = LSML_FULL_PAIRS_MAX_N * self.k;
            s = sample_without_replacement(&mut rng, &s, cap);
            d = sample_without_replacement(&mut rng, &d, cap);
        }
        let total = s.len() * d.len();
        if total <= LSML_MAX_COMPARISONS {
            s.iter()
                .flat_map(|&a| d.iter().map(move |&b| (a, b)))
                .collect()
        } else {
            floyd(&mut rng, total, LSML_MAX_COMPARISONS)
                .into_iter()
                .map(|t| (s[t / d.len()], d[t % d.len()]))
                .collect()
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Index of unordered pair `{i, j}` in [`Self::pairs`].
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn pair_diff(&self, p: usize) -> &[f64] {
        &self.diffs[p * self.k..(p + 1) * self.k]
    }

    /// `delta_p` for every pair.
    pub fn distances(&self, m: &MetricMatrix) -> Vec<f64> {
        assert_eq!(m.dim(), self.k, "metric dimension must match the data");
        (0..self.pairs.len())
            .map(|p| m.quad_form(self.pair_diff(p)))
            .collect()
    }

    /// `delta_p` under a sparse symmetric matrix given by upper-triangle
    /// entries `(i, j, value)`.
    pub fn sparse_distances(&self, entries: &[(usize, usize, f64)]) -> Vec<f64> {
        (0..self.pairs.len())
            .map(|p| {
                let d = self.pair_diff(p);
                entries
                    .iter()
                    .map(|&(i, j, v)| {
                        if i == j {
                            v * d[i] * d[i]
                        } else {
                            2.0 * v * d[i] * d[j]
                        }
                    })
                    .sum()
            })
            .collect()
    }

    /// Objective in its natural sense (DEML is the maximized value).
    pub fn value_from(&self, delta: &[f64]) -> f64 {
        match self.kind {
            ObjectiveKind::Mcml => self.mcml(delta, None),
            ObjectiveKind::Deml => self
                .pairs_where(false)
                .map(|p| delta[p].max(0.0).sqrt())
                .sum(),
            ObjectiveKind::Lsml => self
                .lsml
                .iter()
                .map(|&(a, c)| {
                    let h = (delta[a].max(0.0).sqrt() - delta[c].max(0.0).sqrt()).max(0.0);
                    h * h
                })
                .sum(),
            ObjectiveKind::Lmnn { mu } => self.lmnn(mu, delta, None),
            ObjectiveKind::Glr => self
                .pairs_where(false)
                .map(|p| 8.0 * (-delta[p]).exp())
                .sum(),
        }
    }

    /// Minimized form: `sense * value`.
    pub fn loss_from(&self, delta: &[f64]) -> f64 {
        self.kind.sense() * self.value_from(delta)
    }

    pub fn value(&self, m: &MetricMatrix) -> f64 {
        self.value_from(&self.distances(m))
    }

    pub fn loss(&self, m: &MetricMatrix) -> f64 {
        self.loss_from(&self.distances(m))
    }

    fn pairs_where(&self, same: bool) -> impl Iterator<Item = usize> + '_ {
        (0..self.pairs.len()).filter(move |&p| self.same[p] == same)
    }

    /// `d loss / d delta_p` for every pair.
    pub fn pair_gradient(&self, delta: &[f64]) -> PairGradient {
        let mut g = vec![0.0; self.pairs.len()];
        let mut singular = 0;
        match self.kind {
            ObjectiveKind::Mcml => {
                self.mcml(delta, Some(&mut g));
            }
            ObjectiveKind::Deml => {
                for p in self.pairs_where(false) {
                    if delta[p] > 0.0 {
                        g[p] = -0.5 / delta[p].sqrt();
                    } else {
                        singular += 1;
                    }
                }
            }
            ObjectiveKind::Lsml => {
                for &(a, c) in &self.lsml {
                    let (ra, rc) = (delta[a].max(0.0).sqrt(), delta[c].max(0.0).sqrt());
                    let h = ra - rc;
                    if h <= 0.0 {
                        continue;
                    }
                    if ra > 0.0 {
                        g[a] += h / ra;
                    } else {
                        singular += 1;
                    }
                    if rc > 0.0 {
                        g[c] -= h / rc;
                    } else {
                        singular += 1;
                    }
                }
            }
            ObjectiveKind::Lmnn { mu } => {
                self.lmnn(mu, delta, Some(&mut g));
            }
            ObjectiveKind::Glr => {
                for p in self.pairs_where(false) {
                    g[p] = -8.0 * (-delta[p]).exp();
                }
            }
        }
        PairGradient {
            values: g,
            singular_points: singular,
        }
    }

    /// Gradient of the loss with respect to the selected entries of `M`.
    pub fn matrix_gradient(&self, pair_grad: &[f64], selector: EntrySelector) -> Vec<f64> {
        let k = self.k;
        match selector {
            EntrySelector::Diagonal => {
                let mut out = vec![0.0; k];
                for (p, &g) in pair_grad.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    for (o, d) in out.iter_mut().zip(self.pair_diff(p)) {
                        *o += g * d * d;
                    }
                }
                out
            }
            EntrySelector::Column(c) => {
                let mut diag = vec![0.0; k];
                let mut col = vec![0.0; k];
                for (p, &g) in pair_grad.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let d = self.pair_diff(p);
                    let gc = g * d[c];
                    for i in 0..k {
                        diag[i] += g * d[i] * d[i];
                        col[i] += gc * d[i];
                    }
                }
                diag.extend((0..k).filter(|&i| i != c).map(|i| 2.0 * col[i]));
                diag
            }
            EntrySelector::All => {
                let mut full = vec![0.0; k * k];
                for (p, &g) in pair_grad.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let d = self.pair_diff(p);
                    for i in 0..k {
                        let gi = g * d[i];
                        for j in i..k {
                            full[i * k + j] += gi * d[j];
                        }
                    }
                }
                EntrySelector::All
                    .entries(k)
                    .into_iter()
                    .map(|(i, j)| {
                        let v = full[i * k + j];
                        if i == j {
                            v
                        } else {
                            2.0 * v
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn gradient(&self, m: &MetricMatrix, selector: EntrySelector) -> Vec<f64> {
        let pg = self.pair_gradient(&self.distances(m));
        self.matrix_gradient(&pg.values, selector)
    }

    /// `sum_{same-label ordered} delta + sum_i log sum_{k != i} exp(-delta_ik)`.
    fn mcml(&self, delta: &[f64], mut grad: Option<&mut Vec<f64>>) -> f64 {
        let mut total = 0.0;
        for p in self.pairs_where(true) {
            total += 2.0 * delta[p];
            if let Some(g) = grad.as_deref_mut() {
                g[p] += 2.0;
            }
        }
        if self.n < 2 {
            return total;
        }
        let mut idx = Vec::with_capacity(self.n - 1);
        for i in 0..self.n {
            idx.clear();
            idx.extend((0..self.n).filter(|&k| k != i).map(|k| self.pair_index(i, k)));
            let lo = idx.iter().map(|&p| delta[p]).fold(f64::INFINITY, f64::min);
            let sum: f64 = idx.iter().map(|&p| (lo - delta[p]).exp()).sum();
            total += -lo + sum.ln();
            if let Some(g) = grad.as_deref_mut() {
                for &p in &idx {
                    g[p] -= (lo - delta[p]).exp() / sum;
                }
            }
        }
        total
    }

    fn lmnn(&self, mu: f64, delta: &[f64], mut grad: Option<&mut Vec<f64>>) -> f64 {
        let terms = self.lmnn.as_ref().expect("LMNN terms built at construction");
        let mut pull = 0.0;
        let mut push = 0.0;
        for &(i, pij) in &terms.targets {
            pull += delta[pij];
            let mut active = 0usize;
            for &pil in &terms.impostors[i] {
                let h = 1.0 + delta[pij] - delta[pil];
                if h > 0.0 {
                    push += h;
                    active += 1;
                    if let Some(g) = grad.as_deref_mut() {
                        g[pil] -= mu;
                    }
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                g[pij] += (1.0 - mu) + mu * active as f64;
            }
        }
        (1.0 - mu) * pull + mu * push
    }
}

/// Up to `cap` entries of `v` chosen uniformly without replacement, in their
/// original order.
fn sample_without_replacement(rng: &mut Xoshiro256PlusPlus, v: &[usize], cap: usize) -> Vec<usize> {
    if v.len() <= cap {
        return v.to_vec();
    }
    floyd(rng, v.len(), cap).into_iter().map(|t| v[t]).collect()
}

/// Floyd's algorithm: `count` distinct positions in `0..n`, sorted.
fn floyd(rng: &mut Xoshiro256PlusPlus, n: usize, count: usize) -> Vec<usize> {
    let mut chosen = BTreeSet::new();
    for j in (n - count)..n {
        let t = bounded(rng, j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}
