//! Random Maclaurin feature maps.
//!
//! Each of the `D` features draws a degree `N` from a geometric measure
//! `μ_n = (1 - 1/p) p^{-n}`, then `N` Rademacher vectors `ω_1..ω_N`, and
//! evaluates
//!
//! ```text
//! Z_i(x) = sqrt(a_N / μ_N) · Π_j <ω_j, x>
//! ```
//!
//! so that `E[Z_i(x) Z_i(y)] = Σ a_n <x, y>^n = K(x, y)`. The map output is
//! `(Z_1(x), ..., Z_D(x)) / sqrt(D)`.
//!
//! In [`MapMode::H01`] the constant and linear terms are represented exactly
//! by the prefix `[sqrt(a_0), sqrt(a_1) x]` and the random features only
//! estimate the degree >= 2 remainder, with degrees drawn from the geometric
//! measure shifted to start at 2.
//!
//! Rademacher vectors are not stored: they are regenerated from the per-
//! feature seed whenever the map is applied (unless `materialize` is set).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::MaclaurinKernel;
use crate::rng::{rademacher_words, seeded_rng, signed_dot, stream_rng};

pub const MAP_FORMAT_VERSION: u32 = 1;

/// Rows processed per block by [`RandomMaclaurinMap::apply_batch`].
const BATCH_ROWS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapMode {
    Plain,
    H01,
    Truncated(u32),
}

impl fmt::Display for MapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapMode::Plain => write!(f, "plain"),
            MapMode::H01 => write!(f, "h01"),
            MapMode::Truncated(k) => write!(f, "truncated:{k}"),
        }
    }
}

impl FromStr for MapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plain" | "rf" => Ok(MapMode::Plain),
            "h01" => Ok(MapMode::H01),
            other => {
                let k = other
                    .strip_prefix("truncated:")
                    .ok_or_else(|| Error::invalid(format!("unknown map mode `{other}`")))?;
                k.parse()
                    .map(MapMode::Truncated)
                    .map_err(|_| Error::invalid(format!("bad truncation degree `{k}`")))
            }
        }
    }
}

/// Construction parameters of a feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapSpec {
    /// Input dimension `d`.
    pub input_dim: usize,
    /// Number of random features `D`.
    pub num_features: usize,
    /// Tail parameter of the degree measure.
    pub p: f64,
    pub seed: u64,
    pub mode: MapMode,
    /// Renormalize the degree measure over degrees with `a_n > 0`.
    pub support_restricted: bool,
    /// Keep the Rademacher vectors in memory instead of regenerating them.
    pub materialize: bool,
}

impl FeatureMapSpec {
    pub fn new(input_dim: usize, num_features: usize) -> Self {
        FeatureMapSpec {
            input_dim,
            num_features,
            p: 2.0,
            seed: 0,
            mode: MapMode::Plain,
            support_restricted: false,
            materialize: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: MapMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn support_restricted(mut self, on: bool) -> Self {
        self.support_restricted = on;
        self
    }

    pub fn materialized(mut self, on: bool) -> Self {
        self.materialize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("input dimension must be >= 1"));
        }
        if self.num_features == 0 && self.mode != MapMode::H01 {
            return Err(Error::invalid("number of random features must be >= 1"));
        }
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::invalid(format!("p must be > 1, got {}", self.p)));
        }
        Ok(())
    }

    /// Output length: `D`, or `d + 1 + D` in h01 mode.
    pub fn output_dim(&self) -> usize {
        match self.mode {
            MapMode::H01 => self.input_dim + 1 + self.num_features,
            _ => self.num_features,
        }
    }
}

/// Draws `N` with `P[N = n] = (1 - 1/p) p^{-n}`: the number of failed trials
/// before the first success, success probability `1 - 1/p`.
pub fn sample_degree<R: Rng + ?Sized>(rng: &mut R, p: f64) -> Result<u32> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!("p must be > 1, got {p}")));
    }
    Ok(degree_from_uniforms(
        std::iter::repeat_with(|| rng.random::<f64>()),
        p,
    ))
}

/// Geometric count driven by an explicit stream of uniforms in `[0, 1)`.
pub fn degree_from_uniforms(uniforms: impl IntoIterator<Item = f64>, p: f64) -> u32 {
    let success = 1.0 - 1.0 / p;
    let mut n = 0u32;
    for u in uniforms {
        if u < success {
            break;
        }
        n += 1;
    }
    n
}

/// Geometric degree measure starting at `min_degree`, optionally conditioned
/// on the kernel's support.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMeasure {
    p: f64,
    min_degree: u32,
    /// Explicit `(degree, probability)` table when conditioning on a finite
    /// support; `None` for the plain shifted geometric.
    support: Option<Vec<(u32, f64)>>,
}

impl DegreeMeasure {
    pub fn geometric(p: f64, min_degree: u32) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(format!("p must be > 1, got {p}")));
        }
        Ok(DegreeMeasure {
            p,
            min_degree,
            support: None,
        })
    }

    /// The shifted geometric conditioned on `{n >= min_degree : a_n > 0}`.
    /// Infinite expansions have every coefficient positive, so conditioning
    /// changes nothing for them.
    pub fn support_restricted(p: f64, min_degree: u32, kernel: &MaclaurinKernel) -> Result<Self> {
        let mut m = Self::geometric(p, min_degree)?;
        let Some(max) = kernel.max_degree() else {
            return Ok(m);
        };
        let raw: Vec<(u32, f64)> = (min_degree..=max)
            .filter(|&n| kernel.coefficient(n) > 0.0)
            .map(|n| (n, m.log_mass(n).exp()))
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        if raw.is_empty() || total <= 0.0 {
            return Err(Error::Degenerate(format!(
                "kernel {kernel} has no positive coefficient at degree >= {min_degree}"
            )));
        }
        m.support = Some(raw.into_iter().map(|(n, w)| (n, w / total)).collect());
        Ok(m)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn min_degree(&self) -> u32 {
        self.min_degree
    }

    /// `ln μ_n`.
    pub fn log_mass(&self, n: u32) -> f64 {
        if let Some(table) = &self.support {
            return table
                .iter()
                .find(|(m, _)| *m == n)
                .map_or(f64::NEG_INFINITY, |(_, w)| w.ln());
        }
        if n < self.min_degree {
            return f64::NEG_INFINITY;
        }
        (1.0 - 1.0 / self.p).ln() - f64::from(n - self.min_degree) * self.p.ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.support {
            None => {
                self.min_degree
                    + degree_from_uniforms(std::iter::repeat_with(|| rng.random::<f64>()), self.p)
            }
            Some(table) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(n, w) in table {
                    acc += w;
                    if u < acc {
                        return n;
                    }
                }
                table[table.len() - 1].0
            }
        }
    }
}

/// Inputs a feature map can be applied to.
pub trait InputVector {
    /// Fails unless the vector lives in `R^d`.
    fn check_dim(&self, d: usize) -> Result<()>;
    /// `<ω, x>` for the packed sign vector `words`.
    fn signed_dot(&self, words: &[u64]) -> f64;
    /// Writes `factor * x` into the dense slice `out` (length `d`).
    fn write_scaled(&self, out: &mut [f64], factor: f64);
}

impl InputVector for [f64] {
    fn check_dim(&self, d: usize) -> Result<()> {
        if self.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.len(),
            });
        }
        Ok(())
    }

    fn signed_dot(&self, words: &[u64]) -> f64 {
        signed_dot(words, self)
    }

    fn write_scaled(&self, out: &mut [f64], factor: f64) {
        for (o, v) in out.iter_mut().zip(self) {
            *o = factor * v;
        }
    }
}

impl InputVector for Vec<f64> {
    fn check_dim(&self, d: usize) -> Result<()> {
        self.as_slice().check_dim(d)
    }

    fn signed_dot(&self, words: &[u64]) -> f64 {
        signed_dot(words, self)
    }

    fn write_scaled(&self, out: &mut [f64], factor: f64) {
        self.as_slice().write_scaled(out, factor)
    }
}

/// Sign words of the `N` Rademacher vectors owned by a feature seed.
pub(crate) fn feature_omegas(feature_seed: u64, degree: u32, dim: usize) -> Vec<Vec<u64>> {
    let mut rng = seeded_rng(feature_seed);
    (0..degree)
        .map(|_| {
            let s = rng.next_u64();
            rademacher_words(&mut seeded_rng(s), dim)
        })
        .collect()
}

/// A frozen random Maclaurin map.
#[derive(Debug, Clone)]
pub struct RandomMaclaurinMap {
    spec: FeatureMapSpec,
    kernel: MaclaurinKernel,
    random_kernel: MaclaurinKernel,
    measure: DegreeMeasure,
    degrees: Vec<u32>,
    feature_seeds: Vec<u64>,
    log_scales: Vec<f64>,
    scales: Vec<f64>,
    constant: f64,
    linear: f64,
    omegas: Option<Vec<Vec<Vec<u64>>>>,
}

impl RandomMaclaurinMap {
    /// Samples degrees and per-feature seeds; feature `i` draws from stream
    /// `i` of the master seed, so the result is independent of build order.
    pub fn build(kernel: &MaclaurinKernel, spec: &FeatureMapSpec) -> Result<Self> {
        spec.validate()?;
        let (random_kernel, measure) = Self::random_part(kernel, spec)?;
        let (degrees, feature_seeds): (Vec<u32>, Vec<u64>) = (0..spec.num_features as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(spec.seed, i);
                let n = measure.sample(&mut rng);
                (n, rng.next_u64())
            })
            .unzip();
        Self::assemble(kernel, spec, random_kernel, measure, degrees, feature_seeds)
    }

    /// Rebuilds a map from stored degrees and seeds, recomputing the scales.
    pub fn from_parts(
        kernel: &MaclaurinKernel,
        spec: &FeatureMapSpec,
        degrees: Vec<u32>,
        feature_seeds: Vec<u64>,
    ) -> Result<Self> {
        spec.validate()?;
        if degrees.len() != spec.num_features || feature_seeds.len() != spec.num_features {
            return Err(Error::invalid(format!(
                "map lists {} degrees and {} seeds for D = {}",
                degrees.len(),
                feature_seeds.len(),
                spec.num_features
            )));
        }
        let (random_kernel, measure) = Self::random_part(kernel, spec)?;
        Self::assemble(kernel, spec, random_kernel, measure, degrees, feature_seeds)
    }

    fn random_part(
        kernel: &MaclaurinKernel,
        spec: &FeatureMapSpec,
    ) -> Result<(MaclaurinKernel, DegreeMeasure)> {
        let (random_kernel, min_degree) = match spec.mode {
            MapMode::Plain => (kernel.clone(), 0),
            MapMode::H01 => (kernel.clone(), 2),
            MapMode::Truncated(k) => (kernel.truncated(k), 0),
        };
        let measure = if spec.support_restricted {
            DegreeMeasure::support_restricted(spec.p, min_degree, &random_kernel)?
        } else {
            DegreeMeasure::geometric(spec.p, min_degree)?
        };
        Ok((random_kernel, measure))
    }

    fn assemble(
        kernel: &MaclaurinKernel,
        spec: &FeatureMapSpec,
        random_kernel: MaclaurinKernel,
        measure: DegreeMeasure,
        degrees: Vec<u32>,
        feature_seeds: Vec<u64>,
    ) -> Result<Self> {
        let log_scales = feature_log_scales(&random_kernel, &measure, &degrees)?;
        let scales = log_scales.iter().map(|l| l.exp()).collect();
        let (constant, linear) = if spec.mode == MapMode::H01 {
            let (a0, a1) = (kernel.coefficient(0), kernel.coefficient(1));
            for (index, value) in [(0, a0), (1, a1)] {
                if value.is_nan() || value < 0.0 {
                    return Err(Error::NegativeCoefficient { index, value });
                }
            }
            (a0.sqrt(), a1.sqrt())
        } else {
            (0.0, 0.0)
        };
        let mut map = RandomMaclaurinMap {
            spec: spec.clone(),
            kernel: kernel.clone(),
            random_kernel,
            measure,
            degrees,
            feature_seeds,
            log_scales,
            scales,
            constant,
            linear,
            omegas: None,
        };
        if spec.materialize {
            map.omegas = Some(
                (0..map.degrees.len())
                    .into_par_iter()
                    .map(|i| map.omegas_for(i))
                    .collect(),
            );
        }
        Ok(map)
    }

    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }

    pub fn kernel(&self) -> &MaclaurinKernel {
        &self.kernel
    }

    /// Kernel estimated by the random block (truncated in truncated mode).
    pub fn random_kernel(&self) -> &MaclaurinKernel {
        &self.random_kernel
    }

    pub fn measure(&self) -> &DegreeMeasure {
        &self.measure
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn feature_seeds(&self) -> &[u64] {
        &self.feature_seeds
    }

    /// `ln sqrt(a_N / μ_N)` per feature, `-inf` for identically zero features.
    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    fn omegas_for(&self, i: usize) -> Vec<Vec<u64>> {
        feature_omegas(self.feature_seeds[i], self.degrees[i], self.spec.input_dim)
    }

    fn feature_value<V: InputVector + ?Sized>(&self, i: usize, omegas: &[Vec<u64>], x: &V) -> f64 {
        if self.log_scales[i] == f64::NEG_INFINITY {
            return 0.0;
        }
        omegas
            .iter()
            .fold(self.scales[i], |acc, w| acc * x.signed_dot(w))
    }

    fn with_omegas<T>(&self, i: usize, f: impl FnOnce(&[Vec<u64>]) -> T) -> T {
        match &self.omegas {
            Some(all) => f(&all[i]),
            None if self.log_scales[i] == f64::NEG_INFINITY => f(&[]),
            None => f(&self.omegas_for(i)),
        }
    }

    /// Unnormalized random features `Z_1(x), ..., Z_D(x)`.
    pub fn raw_features<V: InputVector + ?Sized>(&self, x: &V) -> Result<Vec<f64>> {
        x.check_dim(self.spec.input_dim)?;
        Ok((0..self.degrees.len())
            .map(|i| self.with_omegas(i, |om| self.feature_value(i, om, x)))
            .collect())
    }

    fn write_prefix<V: InputVector + ?Sized>(&self, x: &V, out: &mut [f64]) {
        out[0] = self.constant;
        x.write_scaled(&mut out[1..=self.spec.input_dim], self.linear);
    }

    fn prefix_len(&self) -> usize {
        match self.spec.mode {
            MapMode::H01 => self.spec.input_dim + 1,
            _ => 0,
        }
    }

    fn normalizer(&self) -> f64 {
        if self.degrees.is_empty() {
            0.0
        } else {
            1.0 / (self.degrees.len() as f64).sqrt()
        }
    }

    pub fn apply<V: InputVector + ?Sized>(&self, x: &V) -> Result<Vec<f64>> {
        let raw = self.raw_features(x)?;
        let mut out = vec![0.0; self.output_dim()];
        let offset = self.prefix_len();
        if offset > 0 {
            self.write_prefix(x, &mut out);
        }
        let norm = self.normalizer();
        for (o, z) in out[offset..].iter_mut().zip(raw) {
            *o = z * norm;
        }
        Ok(out)
    }

    /// Applies the map to many rows, regenerating each feature's Rademacher
    /// vectors once per block of rows. Output is identical to calling
    /// [`apply`](Self::apply) row by row.
    pub fn apply_batch<V: InputVector + Sync>(&self, rows: &[V]) -> Result<Vec<Vec<f64>>> {
        for x in rows {
            x.check_dim(self.spec.input_dim)?;
        }
        let offset = self.prefix_len();
        let norm = self.normalizer();
        let mut out = Vec::with_capacity(rows.len());
        for block in rows.chunks(BATCH_ROWS) {
            let columns: Vec<Vec<f64>> = (0..self.degrees.len())
                .into_par_iter()
                .map(|i| {
                    self.with_omegas(i, |om| {
                        block
                            .iter()
                            .map(|x| self.feature_value(i, om, x) * norm)
                            .collect()
                    })
                })
                .collect();
            for (r, x) in block.iter().enumerate() {
                let mut row = vec![0.0; self.output_dim()];
                if offset > 0 {
                    self.write_prefix(x, &mut row);
                }
                for (i, col) in columns.iter().enumerate() {
                    row[offset + i] = col[r];
                }
                out.push(row);
            }
        }
        Ok(out)
    }

    pub fn to_document(&self) -> MapDocument {
        MapDocument {
            format_version: MAP_FORMAT_VERSION,
            kernel: self.kernel.to_string(),
            base: None,
            radius: None,
            d: self.spec.input_dim,
            num_features: self.spec.num_features,
            p: self.spec.p,
            mode: self.spec.mode.to_string(),
            seed: self.spec.seed,
            support_restricted: self.spec.support_restricted,
            degrees: self.degrees.clone(),
            feature_seeds: self.feature_seeds.clone(),
        }
    }

    pub fn from_document(doc: &MapDocument) -> Result<Self> {
        doc.check_version()?;
        if doc.base.is_some() {
            return Err(Error::invalid(
                "document describes a compositional map; load it with CompositionalMap",
            ));
        }
        let kernel: MaclaurinKernel = doc.kernel.parse()?;
        Self::from_parts(
            &kernel,
            &doc.spec()?,
            doc.degrees.clone(),
            doc.feature_seeds.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

pub(crate) fn feature_log_scales(
    kernel: &MaclaurinKernel,
    measure: &DegreeMeasure,
    degrees: &[u32],
) -> Result<Vec<f64>> {
    degrees
        .iter()
        .map(|&n| {
            let a = kernel.coefficient(n);
            if a.is_nan() || a < 0.0 {
                return Err(Error::NegativeCoefficient { index: n, value: a });
            }
            if a == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(0.5 * (kernel.log_coefficient(n) - measure.log_mass(n)))
        })
        .collect()
}

/// Versioned JSON form of a feature map. Scales are recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub format_version: u32,
    pub kernel: String,
    /// Base oracle spec for compositional maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    /// Data radius used for the compositional domain check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub d: usize,
    #[serde(rename = "D")]
    pub num_features: usize,
    pub p: f64,
    pub mode: String,
    pub seed: u64,
    #[serde(default)]
    pub support_restricted: bool,
    pub degrees: Vec<u32>,
    pub feature_seeds: Vec<u64>,
}

impl MapDocument {
    pub(crate) fn check_version(&self) -> Result<()> {
        if self.format_version != MAP_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported map format version {}",
                self.format_version
            )));
        }
        Ok(())
    }

    pub(crate) fn spec(&self) -> Result<FeatureMapSpec> {
        Ok(FeatureMapSpec {
            input_dim: self.d,
            num_features: self.num_features,
            p: self.p,
            seed: self.seed,
            mode: self.mode.parse()?,
            support_restricted: self.support_restricted,
            materialize: false,
        })
    }
}

/// Smallest `k` with `Σ_{n>k} a_n R^{2n} <= eps`, and the kernel truncated
/// there. On the L1 ball of radius `R` the truncated kernel is within `eps`
/// of the original.
pub fn truncate_kernel(
    kernel: &MaclaurinKernel,
    radius: f64,
    eps: f64,
) -> Result<(u32, MaclaurinKernel)> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::invalid(format!("radius must be >= 0, got {radius}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!(
            "truncation error must be > 0, got {eps}"
        )));
    }
    let r2 = radius * radius;
    let term = |n: u32| {
        let a = kernel.coefficient(n);
        if a == 0.0 {
            0.0
        } else {
            a * r2.powf(f64::from(n))
        }
    };
    if let Some(max) = kernel.max_degree() {
        // exact tail by direct summation
        let mut tail = 0.0;
        let mut k = max;
        while k > 0 {
            let next = tail + term(k);
            if next > eps {
                break;
            }
            tail = next;
            k -= 1;
        }
        return Ok((k, kernel.truncated(k)));
    }
    let total = kernel.eval_f(r2)?;
    let mut partial = 0.0;
    let mut k = 0u32;
    loop {
        partial += term(k);
        if total - partial <= eps {
            return Ok((k, kernel.truncated(k)));
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::Domain {
                value: r2,
                radius: kernel.radius(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> MaclaurinKernel {
        MaclaurinKernel::exponential(1.0).unwrap()
    }

    #[test]
    fn degree_from_first_success() {
        assert_eq!(degree_from_uniforms([0.3], 2.0), 0);
        assert_eq!(degree_from_uniforms([0.7, 0.9, 0.1], 2.0), 2);
        assert!(sample_degree(&mut stream_rng(0, 0), 1.0).is_err());
        assert!(sample_degree(&mut stream_rng(0, 0), 0.5).is_err());
    }

    #[test]
    fn geometric_log_mass() {
        let m = DegreeMeasure::geometric(2.0, 0).unwrap();
        assert!((m.log_mass(0).exp() - 0.5).abs() < 1e-15);
        assert!((m.log_mass(3).exp() - 1.0 / 16.0).abs() < 1e-15);
        let shifted = DegreeMeasure::geometric(2.0, 2).unwrap();
        assert_eq!(shifted.log_mass(1), f64::NEG_INFINITY);
        assert!((shifted.log_mass(2).exp() - 0.5).abs() < 1e-15);
        let m3 = DegreeMeasure::geometric(3.0, 0).unwrap();
        let total: f64 = (0..200).map(|n| m3.log_mass(n).exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_restricted_measure() {
        let homog = MaclaurinKernel::homogeneous(10);
        let m = DegreeMeasure::support_restricted(2.0, 0, &homog).unwrap();
        assert_eq!(m.log_mass(10), 0.0);
        assert_eq!(m.sample(&mut stream_rng(1, 1)), 10);
        let none = MaclaurinKernel::from_coefficients(vec![1.0, 1.0]).unwrap();
        assert!(DegreeMeasure::support_restricted(2.0, 2, &none).is_err());
        // infinite expansions are unaffected
        assert_eq!(
            DegreeMeasure::support_restricted(2.0, 0, &exp1()).unwrap(),
            DegreeMeasure::geometric(2.0, 0).unwrap()
        );
    }

    #[test]
    fn homogeneous_features_vanish_off_degree() {
        let map = RandomMaclaurinMap::build(
            &MaclaurinKernel::homogeneous(10),
            &FeatureMapSpec::new(4, 20_000).with_seed(3),
        )
        .unwrap();
        let mut seen_ten = false;
        for (n, l) in map.degrees().iter().zip(map.log_scales()) {
            if *n == 10 {
                seen_ten = true;
                // a_10 / μ_10 = 2^11
                assert!((l - 0.5 * 11.0 * 2f64.ln()).abs() < 1e-12);
            } else {
                assert_eq!(*l, f64::NEG_INFINITY);
            }
        }
        assert!(seen_ten);
    }

    #[test]
    fn build_is_deterministic() {
        let k = exp1();
        let spec = FeatureMapSpec::new(5, 300).with_seed(99);
        let a = RandomMaclaurinMap::build(&k, &spec).unwrap();
        let b = RandomMaclaurinMap::build(&k, &spec).unwrap();
        assert_eq!(a.degrees(), b.degrees());
        assert_eq!(a.feature_seeds(), b.feature_seeds());
        assert_eq!(a.log_scales(), b.log_scales());
        let x = [0.1, -0.2, 0.3, 0.0, 0.05];
        assert_eq!(a.apply(&x[..]).unwrap(), b.apply(&x[..]).unwrap());
        let other = RandomMaclaurinMap::build(&k, &spec.clone().with_seed(100)).unwrap();
        assert_ne!(a.feature_seeds(), other.feature_seeds());
    }

    #[test]
    fn zero_input() {
        let k = exp1();
        let map = RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(3, 64).with_seed(5)).unwrap();
        let z = map.apply(&[0.0; 3][..]).unwrap();
        let norm = 1.0 / 8.0;
        for (i, n) in map.degrees().iter().enumerate() {
            if *n == 0 {
                // sqrt(a_0 / μ_0) / sqrt(D) = sqrt(2) / 8
                assert!((z[i] - 2f64.sqrt() * norm).abs() < 1e-15);
            } else {
                assert_eq!(z[i], 0.0);
            }
        }
    }

    #[test]
    fn h01_affine_kernel_is_exact() {
        let k = MaclaurinKernel::from_coefficients(vec![1.0, 1.0]).unwrap();
        for d_feat in [0, 1, 7, 50] {
            let map = RandomMaclaurinMap::build(
                &k,
                &FeatureMapSpec::new(3, d_feat)
                    .with_mode(MapMode::H01)
                    .with_seed(2),
            )
            .unwrap();
            let x = [0.5, -0.25, 0.125];
            let y = [0.25, 0.5, -1.0];
            let zx = map.apply(&x[..]).unwrap();
            let zy = map.apply(&y[..]).unwrap();
            assert_eq!(zx.len(), 4 + d_feat);
            assert!(zx[4..].iter().all(|v| *v == 0.0));
            let ip: f64 = zx.iter().zip(&zy).map(|(a, b)| a * b).sum();
            assert_eq!(ip, k.kernel_value(&x, &y).unwrap());
        }
    }

    #[test]
    fn h01_degrees_start_at_two() {
        let map = RandomMaclaurinMap::build(
            &exp1(),
            &FeatureMapSpec::new(2, 2000)
                .with_mode(MapMode::H01)
                .with_seed(4),
        )
        .unwrap();
        assert!(map.degrees().iter().all(|&n| n >= 2));
        assert_eq!(map.output_dim(), 2003);
    }

    #[test]
    fn dimension_checked() {
        let map = RandomMaclaurinMap::build(&exp1(), &FeatureMapSpec::new(3, 8)).unwrap();
        assert!(matches!(
            map.apply(&[1.0, 2.0][..]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
        assert!(map.apply_batch(&[vec![0.0; 3], vec![0.0; 4]]).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let k = exp1();
        assert!(RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(3, 0)).is_err());
        assert!(RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(0, 4)).is_err());
        assert!(RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(3, 4).with_p(1.0)).is_err());
        let neg = MaclaurinKernel::from_coefficients(vec![1.0, -1.0, 1.0]).unwrap();
        assert!(matches!(
            RandomMaclaurinMap::build(&neg, &FeatureMapSpec::new(2, 500)),
            Err(Error::NegativeCoefficient { index: 1, .. })
        ));
    }

    #[test]
    fn materialized_matches_lazy() {
        let k = MaclaurinKernel::polynomial(4, 1.0).unwrap();
        let spec = FeatureMapSpec::new(70, 40).with_seed(8);
        let lazy = RandomMaclaurinMap::build(&k, &spec).unwrap();
        let eager = RandomMaclaurinMap::build(&k, &spec.clone().materialized(true)).unwrap();
        let x: Vec<f64> = (0..70)
            .map(|i| ((i * 7) % 11) as f64 / 100.0 - 0.05)
            .collect();
        assert_eq!(lazy.apply(&x).unwrap(), eager.apply(&x).unwrap());
    }

    #[test]
    fn batch_equals_rowwise() {
        let k = exp1();
        let map =
            RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(4, 33).with_mode(MapMode::H01))
                .unwrap();
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|r| (0..4).map(|c| (r * 4 + c) as f64 / 80.0).collect())
            .collect();
        let batch = map.apply_batch(&rows).unwrap();
        for (x, z) in rows.iter().zip(batch) {
            assert_eq!(map.apply(x).unwrap(), z);
        }
    }

    #[test]
    fn json_round_trip() {
        let k = MaclaurinKernel::polynomial(3, 0.5)
            .unwrap()
            .rescale(2.0)
            .unwrap();
        for mode in [MapMode::Plain, MapMode::H01, MapMode::Truncated(2)] {
            let spec = FeatureMapSpec::new(3, 17)
                .with_seed(u64::MAX - 3)
                .with_mode(mode)
                .with_p(3.0);
            let map = RandomMaclaurinMap::build(&k, &spec).unwrap();
            let back = RandomMaclaurinMap::from_json(&map.to_json().unwrap()).unwrap();
            assert_eq!(back.spec(), map.spec());
            assert_eq!(back.log_scales(), map.log_scales());
            let x = [0.3, 0.2, -0.1];
            assert_eq!(back.apply(&x[..]).unwrap(), map.apply(&x[..]).unwrap());
        }
        let mut doc = RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(3, 4))
            .unwrap()
            .to_document();
        doc.degrees.pop();
        assert!(RandomMaclaurinMap::from_document(&doc).is_err());
        doc.format_version = 9;
        assert!(RandomMaclaurinMap::from_document(&doc).is_err());
    }

    #[test]
    fn mode_strings() {
        for m in [MapMode::Plain, MapMode::H01, MapMode::Truncated(6)] {
            assert_eq!(m.to_string().parse::<MapMode>().unwrap(), m);
        }
        assert!("truncated:x".parse::<MapMode>().is_err());
        assert!("fancy".parse::<MapMode>().is_err());
    }

    #[test]
    fn truncation_examples() {
        let (k, t) = truncate_kernel(&exp1(), 1.0, 1e-3).unwrap();
        assert_eq!(k, 6);
        assert_eq!(t.max_degree(), Some(6));

        let poly = MaclaurinKernel::polynomial(10, 1.0).unwrap();
        for eps in [1e-9, 1.0, 100.0] {
            let (k, _) = truncate_kernel(&poly, 1.0, eps).unwrap();
            assert!(k <= 10);
        }
        let (k, t) = truncate_kernel(&poly, 1.0, 1e-300).unwrap();
        assert_eq!(k, 10);
        for n in 0..=12 {
            assert_eq!(t.coefficient(n), poly.coefficient(n));
        }

        let (k, _) = truncate_kernel(&MaclaurinKernel::vovk_infinite(), 0.5, 0.01).unwrap();
        assert_eq!(k, 3);
        assert!(matches!(
            truncate_kernel(&MaclaurinKernel::vovk_infinite(), 1.0, 0.01),
            Err(Error::Domain { .. })
        ));
    }
}
