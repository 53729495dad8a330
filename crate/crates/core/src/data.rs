//! Sparse labeled datasets in libsvm text format, splitting, scaling and
//! label binarization.
//!
//! Indices are 1-based in text and 0-based in memory.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::InputVector;
use crate::rng::{seeded_rng, sign_bit};

/// Largest training split taken by [`split`].
pub const TRAIN_CAP: usize = 20_000;

/// Sample size for the mean pairwise distance heuristic.
pub const DISTANCE_SAMPLE: usize = 2_000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Indices must be strictly increasing and values finite.
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid("index and value lists differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("indices must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value {v}")));
        }
        Ok(SparseVector { indices, values })
    }

    /// Keeps the non-zero entries of a dense vector.
    pub fn from_dense(x: &[f64]) -> Self {
        let (indices, values) = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .unzip();
        SparseVector { indices, values }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Dimension implied by the largest index.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }

    pub fn norm(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.values.iter().map(|v| v.abs()).sum(),
            Norm::L2 => self.values.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.nnz() && j < other.nnz() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.nnz() || j < other.nnz() {
            let a = self.indices.get(i).copied().unwrap_or(u32::MAX);
            let b = other.indices.get(j).copied().unwrap_or(u32::MAX);
            let diff = if a < b {
                i += 1;
                self.values[i - 1]
            } else if b < a {
                j += 1;
                other.values[j - 1]
            } else {
                i += 1;
                j += 1;
                self.values[i - 1] - other.values[j - 1]
            };
            acc += diff * diff;
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            if (i as usize) < dim {
                out[i as usize] = v;
            }
        }
        out
    }
}

impl InputVector for SparseVector {
    fn check_dim(&self, d: usize) -> Result<()> {
        if self.min_dim() > d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.min_dim(),
            });
        }
        Ok(())
    }

    fn signed_dot(&self, words: &[u64]) -> f64 {
        let mut acc = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            if sign_bit(words, i as usize) {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc
    }

    fn write_scaled(&self, out: &mut [f64], factor: f64) {
        out.fill(0.0);
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i as usize] = factor * v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            _ => Err(Error::invalid(format!("unknown norm `{s}` (use l1 or l2)"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    labels: Vec<f64>,
    rows: Vec<SparseVector>,
    dim: usize,
}

impl Dataset {
    /// `dim` is raised to cover every row.
    pub fn new(labels: Vec<f64>, rows: Vec<SparseVector>, dim: usize) -> Result<Self> {
        if labels.len() != rows.len() {
            return Err(Error::invalid("label and row counts differ"));
        }
        let dim = rows.iter().map(SparseVector::min_dim).fold(dim, usize::max);
        Ok(Dataset { labels, rows, dim })
    }

    pub fn from_dense(labels: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Self::new(
            labels,
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
            dim,
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    /// Same data viewed in `dim` dimensions (at least the current one).
    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = self.dim.max(dim);
        self
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Dataset {
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            dim: self.dim,
        }
    }

    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.to_dense(self.dim)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Dataset {
            labels: self.labels.clone(),
            rows: self.rows.iter().map(|r| r.scaled(factor)).collect(),
            dim: self.dim,
        }
    }

    pub fn divided(&self, s: f64) -> Self {
        Dataset {
            labels: self.labels.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| SparseVector {
                    indices: r.indices.clone(),
                    values: r.values.iter().map(|v| v / s).collect(),
                })
                .collect(),
            dim: self.dim,
        }
    }

    pub fn max_norm(&self, norm: Norm) -> f64 {
        self.rows.iter().map(|r| r.norm(norm)).fold(0.0, f64::max)
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Reads `label idx:val idx:val ...` lines. Blank lines and `#` comments are
/// skipped.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let lineno = n + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(lineno, format!("bad label `{label_tok}`")))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, got `{tok}`")))?;
            let idx: u32 = i
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index `{i}`")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            let val: f64 = v
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("bad value `{v}`")))?;
            if indices.last().is_some_and(|&last| idx - 1 <= last) {
                return Err(parse_err(lineno, format!("non-increasing index {idx}")));
            }
            indices.push(idx - 1);
            values.push(val);
        }
        labels.push(label);
        rows.push(SparseVector { indices, values });
    }
    if rows.is_empty() {
        return Err(Error::Degenerate("dataset has no examples".into()));
    }
    Dataset::new(labels, rows, 0)
}

pub fn write_libsvm<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for (label, row) in dataset.labels.iter().zip(&dataset.rows) {
        write!(out, "{label}")?;
        for (&i, &v) in row.indices.iter().zip(&row.values) {
            write!(out, " {}:{v}", i + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Seeded shuffle, then `min(⌊fraction N⌋, TRAIN_CAP)` rows for training and
/// the rest for testing.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::Degenerate("cannot split an empty dataset".into()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut seeded_rng(seed));
    let n_train = ((train_fraction * dataset.len() as f64).floor() as usize).min(TRAIN_CAP);
    Ok((
        dataset.subset(&order[..n_train]),
        dataset.subset(&order[n_train..]),
    ))
}

/// Divides both splits by the largest training norm `s` and returns `s`.
pub fn fit_apply_scaling(
    train: &Dataset,
    test: &Dataset,
    norm: Norm,
) -> Result<(Dataset, Dataset, f64)> {
    if train.is_empty() {
        return Err(Error::Degenerate("empty training set".into()));
    }
    let s = train.max_norm(norm);
    if s == 0.0 {
        return Err(Error::Degenerate("all training vectors are zero".into()));
    }
    Ok((train.divided(s), test.divided(s), s))
}

/// Assignment of raw label values to ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    negative: Vec<f64>,
    positive: Vec<f64>,
}

impl LabelMap {
    /// Two distinct values map min → -1, max → +1. More values are shuffled
    /// with `seed` and the first half becomes -1.
    pub fn fit(labels: &[f64], seed: u64) -> Result<Self> {
        let mut distinct = labels.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::Degenerate(format!(
                "need at least two classes, found {}",
                distinct.len()
            )));
        }
        if distinct.len() > 2 {
            distinct.shuffle(&mut seeded_rng(seed));
        }
        let positive = distinct.split_off(distinct.len() / 2);
        Ok(LabelMap {
            negative: distinct,
            positive,
        })
    }

    pub fn negative(&self) -> &[f64] {
        &self.negative
    }

    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    /// Labels outside the fitted set are rejected.
    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        let labels = dataset
            .labels
            .iter()
            .map(|&y| {
                if self.positive.contains(&y) {
                    Ok(1.0)
                } else if self.negative.contains(&y) {
                    Ok(-1.0)
                } else {
                    Err(Error::Degenerate(format!(
                        "label {y} was not seen when binarizing"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            labels,
            rows: dataset.rows.clone(),
            dim: dataset.dim,
        })
    }
}

pub fn binarize_labels(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    LabelMap::fit(&dataset.labels, seed)?.apply(dataset)
}

/// Mean Euclidean distance over unordered pairs of at most `max_points`
/// rows (a seeded sample when there are more).
pub fn mean_pairwise_distance(rows: &[SparseVector], max_points: usize, seed: u64) -> Result<f64> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    if rows.len() > max_points {
        idx.shuffle(&mut seeded_rng(seed));
        idx.truncate(max_points);
        idx.sort_unstable();
    }
    if idx.len() < 2 {
        return Err(Error::Degenerate(
            "need two points for a pairwise distance".into(),
        ));
    }
    let sums: Vec<f64> = (0..idx.len())
        .into_par_iter()
        .map(|a| {
            idx[a + 1..]
                .iter()
                .map(|&b| rows[idx[a]].squared_distance(&rows[b]).sqrt())
                .sum()
        })
        .collect();
    let pairs = (idx.len() * (idx.len() - 1) / 2) as f64;
    Ok(sums.iter().sum::<f64>() / pairs)
}

/// Uniform draw from the unit ball of the given norm.
pub fn sample_unit_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, norm: Norm) -> Vec<f64> {
    match norm {
        Norm::L2 => {
            let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = rng.random::<f64>().powf(1.0 / dim as f64);
            g.into_iter().map(|v| v * r / len).collect()
        }
        Norm::L1 => {
            // d + 1 exponential spacings; the extra one is slack inside the ball
            let e: Vec<f64> = (0..=dim).map(|_| rng.sample(Exp1)).collect();
            let total: f64 = e.iter().sum();
            e[..dim]
                .iter()
                .map(|v| {
                    if rng.random::<bool>() {
                        v / total
                    } else {
                        -v / total
                    }
                })
                .collect()
        }
    }
}

pub fn unit_ball_points(n: usize, dim: usize, norm: Norm, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| sample_unit_ball(&mut rng, dim, norm))
        .collect()
}
