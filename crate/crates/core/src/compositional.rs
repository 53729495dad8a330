//! Feature maps for compositional kernels `K_co(x, y) = f(K(x, y))`.
//!
//! The base kernel `K` is only reachable through a [`BaseFeatureOracle`]: a
//! sampler of scalar features `W` with `E[W(x) W(y)] = K(x, y)` and
//! `|W(x)| <= sqrt(C_W)`. Feature `i` draws a degree `N`, takes `N`
//! independent oracle features and outputs `sqrt(a_N / μ_N) Π_j W_j(x)`.
//!
//! With [`RademacherLinear`] as the oracle the construction reproduces the
//! plain random Maclaurin map exactly: same degrees, same Rademacher vectors,
//! same outputs.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{
    feature_log_scales, DegreeMeasure, FeatureMapSpec, MapDocument, MapMode, MAP_FORMAT_VERSION,
};
use crate::kernel::{dot, MaclaurinKernel};
use crate::rng::{rademacher_words, seeded_rng, signed_dot, stream_rng};

/// Declared constants of a base oracle on a data domain of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleBounds {
    /// `sup |W(x)| <= sqrt(c_w)`
    pub c_w: f64,
    /// Lipschitz constant of `W` on expectation.
    pub l_w: f64,
    /// `sup |K(x, y)| <= c_k`
    pub c_k: f64,
    /// Lipschitz constant of `K` in each argument.
    pub l_k: f64,
}

/// One sampled scalar feature `W: R^d -> R`.
pub trait BaseFeature: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

/// Black-box sampler of unbiased, bounded features for a base kernel.
pub trait BaseFeatureOracle: Send + Sync + fmt::Debug {
    fn input_dim(&self) -> usize;

    fn bounds(&self, radius: f64) -> OracleBounds;

    fn sample(&self, rng: &mut ChaCha8Rng) -> Box<dyn BaseFeature>;

    /// Exact base kernel value.
    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// CLI form, e.g. `base=linear`; `None` when not expressible.
    fn spec(&self) -> Option<String>;

    /// The feature owned by a stored seed.
    fn instantiate(&self, seed: u64) -> Box<dyn BaseFeature> {
        self.sample(&mut seeded_rng(seed))
    }
}

fn check_pair(d: usize, x: &[f64], y: &[f64]) -> Result<()> {
    for v in [x, y] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// `W(x) = <ω, x>` with fair ±1 coordinates; the base kernel is `<x, y>`.
#[derive(Debug, Clone)]
pub struct RademacherLinear {
    dim: usize,
}

impl RademacherLinear {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("oracle input dimension must be >= 1"));
        }
        Ok(RademacherLinear { dim })
    }
}

struct SignProjection(Vec<u64>);

impl BaseFeature for SignProjection {
    fn eval(&self, x: &[f64]) -> f64 {
        signed_dot(&self.0, x)
    }
}

impl BaseFeatureOracle for RademacherLinear {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn bounds(&self, radius: f64) -> OracleBounds {
        OracleBounds {
            c_w: radius * radius,
            l_w: (self.dim as f64).sqrt(),
            c_k: radius * radius,
            l_k: radius,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Box<dyn BaseFeature> {
        Box::new(SignProjection(rademacher_words(rng, self.dim)))
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.dim, x, y)?;
        Ok(dot(x, y))
    }

    fn spec(&self) -> Option<String> {
        Some("base=linear".into())
    }
}

/// Random Fourier features for the Gaussian kernel
/// `exp(-|x - y|² / (2σ²))`: `W(x) = sqrt(2) cos(<ω, x> + b)` with
/// `ω ~ N(0, I / σ²)` and `b ~ U[0, 2π)`.
#[derive(Debug, Clone)]
pub struct RandomFourier {
    dim: usize,
    sigma: f64,
}

impl RandomFourier {
    pub fn new(dim: usize, sigma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("oracle input dimension must be >= 1"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "rff sigma must be > 0, got {sigma}"
            )));
        }
        Ok(RandomFourier { dim, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

struct Cosine {
    omega: Vec<f64>,
    phase: f64,
}

impl BaseFeature for Cosine {
    fn eval(&self, x: &[f64]) -> f64 {
        SQRT_2 * (dot(&self.omega, x) + self.phase).cos()
    }
}

impl BaseFeatureOracle for RandomFourier {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn bounds(&self, _radius: f64) -> OracleBounds {
        OracleBounds {
            c_w: 2.0,
            l_w: (2.0 * self.dim as f64).sqrt() / self.sigma,
            c_k: 1.0,
            l_k: 1.0 / self.sigma,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Box<dyn BaseFeature> {
        let omega = (0..self.dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal) / self.sigma)
            .collect();
        let phase = rng.random::<f64>() * 2.0 * PI;
        Box::new(Cosine { omega, phase })
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.dim, x, y)?;
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((-d2 / (2.0 * self.sigma * self.sigma)).exp())
    }

    fn spec(&self) -> Option<String> {
        Some(format!("base=rff:sigma={}", self.sigma))
    }
}

/// Parses `base=linear` or `base=rff:sigma=<v>` (the `base=` prefix is
/// optional).
pub fn parse_oracle(spec: &str, dim: usize) -> Result<Arc<dyn BaseFeatureOracle>> {
    let s = spec.trim();
    let s = s.strip_prefix("base=").unwrap_or(s);
    if s == "linear" {
        return Ok(Arc::new(RademacherLinear::new(dim)?));
    }
    if let Some(rest) = s.strip_prefix("rff") {
        let sigma = match rest.strip_prefix(":sigma=") {
            Some(v) => v
                .parse()
                .map_err(|_| Error::invalid(format!("bad rff sigma `{v}`")))?,
            None if rest.is_empty() => 1.0,
            None => return Err(Error::invalid(format!("bad oracle spec `{spec}`"))),
        };
        return Ok(Arc::new(RandomFourier::new(dim, sigma)?));
    }
    Err(Error::invalid(format!("unknown base oracle `{spec}`")))
}

/// `max(p f(p C), f(p C) / (1 - 1/p))`: bound on an unnormalized feature
/// product when every factor pair is bounded by `C`.
pub(crate) fn product_bound(kernel: &MaclaurinKernel, p: f64, c: f64) -> Result<f64> {
    let f = kernel.eval_f(p * c)?;
    Ok((p * f).max(f / (1.0 - 1.0 / p)))
}

/// The outer series must converge on every base kernel value `|K| <= C_K`.
fn check_domain(outer: &MaclaurinKernel, c_k: f64) -> Result<()> {
    let radius = outer.radius();
    if c_k >= radius {
        return Err(Error::Domain { value: c_k, radius });
    }
    Ok(())
}

fn spec_for_compositional(spec: &FeatureMapSpec) -> Result<()> {
    spec.validate()?;
    if spec.mode == MapMode::H01 {
        return Err(Error::invalid(
            "h01 mode needs exact base features; compositional maps support plain and truncated modes",
        ));
    }
    Ok(())
}

/// A frozen compositional feature map.
#[derive(Debug, Clone)]
pub struct CompositionalMap {
    outer: MaclaurinKernel,
    random_kernel: MaclaurinKernel,
    oracle: Arc<dyn BaseFeatureOracle>,
    spec: FeatureMapSpec,
    radius: f64,
    degrees: Vec<u32>,
    feature_seeds: Vec<u64>,
    log_scales: Vec<f64>,
    scales: Vec<f64>,
}

impl CompositionalMap {
    /// Samples degrees exactly as [`crate::RandomMaclaurinMap::build`] does.
    /// Rejects oracles whose base kernel can reach the outer radius of
    /// convergence.
    pub fn build(
        outer: &MaclaurinKernel,
        oracle: Arc<dyn BaseFeatureOracle>,
        spec: &FeatureMapSpec,
        radius: f64,
    ) -> Result<Self> {
        let measure = Self::measure(outer, &oracle, spec, radius)?;
        let (degrees, feature_seeds): (Vec<u32>, Vec<u64>) = (0..spec.num_features as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(spec.seed, i);
                let n = measure.sample(&mut rng);
                (n, rng.next_u64())
            })
            .unzip();
        Self::assemble(outer, oracle, spec, radius, measure, degrees, feature_seeds)
    }

    fn random_kernel(outer: &MaclaurinKernel, spec: &FeatureMapSpec) -> MaclaurinKernel {
        match spec.mode {
            MapMode::Truncated(k) => outer.truncated(k),
            _ => outer.clone(),
        }
    }

    fn measure(
        outer: &MaclaurinKernel,
        oracle: &Arc<dyn BaseFeatureOracle>,
        spec: &FeatureMapSpec,
        radius: f64,
    ) -> Result<DegreeMeasure> {
        spec_for_compositional(spec)?;
        if oracle.input_dim() != spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: spec.input_dim,
                got: oracle.input_dim(),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("radius must be > 0, got {radius}")));
        }
        let random_kernel = Self::random_kernel(outer, spec);
        check_domain(&random_kernel, oracle.bounds(radius).c_k)?;
        if spec.support_restricted {
            DegreeMeasure::support_restricted(spec.p, 0, &random_kernel)
        } else {
            DegreeMeasure::geometric(spec.p, 0)
        }
    }

    fn assemble(
        outer: &MaclaurinKernel,
        oracle: Arc<dyn BaseFeatureOracle>,
        spec: &FeatureMapSpec,
        radius: f64,
        measure: DegreeMeasure,
        degrees: Vec<u32>,
        feature_seeds: Vec<u64>,
    ) -> Result<Self> {
        let random_kernel = Self::random_kernel(outer, spec);
        let log_scales = feature_log_scales(&random_kernel, &measure, &degrees)?;
        let scales = log_scales.iter().map(|l| l.exp()).collect();
        Ok(CompositionalMap {
            outer: outer.clone(),
            random_kernel,
            oracle,
            spec: spec.clone(),
            radius,
            degrees,
            feature_seeds,
            log_scales,
            scales,
        })
    }

    pub fn outer(&self) -> &MaclaurinKernel {
        &self.outer
    }

    pub fn oracle(&self) -> &Arc<dyn BaseFeatureOracle> {
        &self.oracle
    }

    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn feature_seeds(&self) -> &[u64] {
        &self.feature_seeds
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    pub fn output_dim(&self) -> usize {
        self.spec.num_features
    }

    /// Exact target `f(K(x, y))`.
    pub fn target_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.random_kernel.eval_f(self.oracle.kernel(x, y)?)
    }

    /// Base features owned by feature `i`.
    fn base_features(&self, i: usize) -> Vec<Box<dyn BaseFeature>> {
        if self.log_scales[i] == f64::NEG_INFINITY {
            return Vec::new();
        }
        let mut rng = seeded_rng(self.feature_seeds[i]);
        (0..self.degrees[i])
            .map(|_| self.oracle.instantiate(rng.next_u64()))
            .collect()
    }

    fn value(&self, i: usize, features: &[Box<dyn BaseFeature>], x: &[f64]) -> f64 {
        if self.log_scales[i] == f64::NEG_INFINITY {
            return 0.0;
        }
        features
            .iter()
            .fold(self.scales[i], |acc, w| acc * w.eval(x))
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Unnormalized features `Z_i(x)`.
    pub fn raw_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok((0..self.degrees.len())
            .map(|i| self.value(i, &self.base_features(i), x))
            .collect())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let norm = 1.0 / (self.degrees.len() as f64).sqrt();
        Ok(self
            .raw_features(x)?
            .into_iter()
            .map(|z| z * norm)
            .collect())
    }

    pub fn apply_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        for x in rows {
            self.check(x)?;
        }
        let norm = 1.0 / (self.degrees.len() as f64).sqrt();
        let columns: Vec<Vec<f64>> = (0..self.degrees.len())
            .into_par_iter()
            .map(|i| {
                let feats = self.base_features(i);
                rows.iter()
                    .map(|x| self.value(i, &feats, x) * norm)
                    .collect()
            })
            .collect();
        Ok((0..rows.len())
            .map(|r| columns.iter().map(|c| c[r]).collect())
            .collect())
    }

    pub fn to_document(&self) -> Result<MapDocument> {
        let base = self
            .oracle
            .spec()
            .ok_or_else(|| Error::invalid("this base oracle has no serializable spec string"))?;
        Ok(MapDocument {
            format_version: MAP_FORMAT_VERSION,
            kernel: self.outer.to_string(),
            base: Some(base),
            radius: Some(self.radius),
            d: self.spec.input_dim,
            num_features: self.spec.num_features,
            p: self.spec.p,
            mode: self.spec.mode.to_string(),
            seed: self.spec.seed,
            support_restricted: self.spec.support_restricted,
            degrees: self.degrees.clone(),
            feature_seeds: self.feature_seeds.clone(),
        })
    }

    pub fn from_document(doc: &MapDocument) -> Result<Self> {
        doc.check_version()?;
        let base = doc
            .base
            .as_deref()
            .ok_or_else(|| Error::invalid("document has no base oracle"))?;
        let outer: MaclaurinKernel = doc.kernel.parse()?;
        let oracle = parse_oracle(base, doc.d)?;
        let spec = doc.spec()?;
        let radius = doc.radius.unwrap_or(1.0);
        if doc.degrees.len() != spec.num_features || doc.feature_seeds.len() != spec.num_features {
            return Err(Error::invalid("degree/seed lists do not match D"));
        }
        let measure = Self::measure(&outer, &oracle, &spec, radius)?;
        Self::assemble(
            &outer,
            oracle,
            &spec,
            radius,
            measure,
            doc.degrees.clone(),
            doc.feature_seeds.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document()?)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// A compositional kernel used as the base of another composition: each
/// sample is one unnormalized feature `sqrt(a_N / μ_N) Π_j W_j(x)`.
#[derive(Debug, Clone)]
pub struct NestedOracle {
    outer: MaclaurinKernel,
    inner: Arc<dyn BaseFeatureOracle>,
    measure: DegreeMeasure,
    radius: f64,
}

impl NestedOracle {
    pub fn new(
        outer: MaclaurinKernel,
        inner: Arc<dyn BaseFeatureOracle>,
        p: f64,
        radius: f64,
    ) -> Result<Self> {
        check_domain(&outer, inner.bounds(radius).c_k)?;
        if let crate::kernel::Validation::Negative { index, value } = outer.validate_nonneg(200) {
            return Err(Error::NegativeCoefficient { index, value });
        }
        Ok(NestedOracle {
            outer,
            inner,
            measure: DegreeMeasure::geometric(p, 0)?,
            radius,
        })
    }
}

struct ProductFeature {
    scale: f64,
    factors: Vec<Box<dyn BaseFeature>>,
}

impl BaseFeature for ProductFeature {
    fn eval(&self, x: &[f64]) -> f64 {
        self.factors
            .iter()
            .fold(self.scale, |acc, w| acc * w.eval(x))
    }
}

impl BaseFeatureOracle for NestedOracle {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn bounds(&self, radius: f64) -> OracleBounds {
        let inner = self.inner.bounds(radius);
        let p = self.measure.p();
        let f = |t: f64| self.outer.eval_f(t).unwrap_or(f64::INFINITY);
        let fp = |t: f64| self.outer.eval_f_prime(t).unwrap_or(f64::INFINITY);
        OracleBounds {
            c_w: product_bound(&self.outer, p, inner.c_w).unwrap_or(f64::INFINITY),
            l_w: inner.l_w * p * p * inner.c_w.sqrt() * fp(p * inner.c_w),
            c_k: f(inner.c_k),
            l_k: inner.l_k * fp(inner.c_k),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Box<dyn BaseFeature> {
        let n = self.measure.sample(rng);
        let a = self.outer.coefficient(n);
        if a <= 0.0 {
            return Box::new(ProductFeature {
                scale: 0.0,
                factors: Vec::new(),
            });
        }
        let scale = (0.5 * (self.outer.log_coefficient(n) - self.measure.log_mass(n))).exp();
        let factors = (0..n)
            .map(|_| self.inner.instantiate(rng.next_u64()))
            .collect();
        Box::new(ProductFeature { scale, factors })
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.outer.eval_f(self.inner.kernel(x, y)?)
    }

    fn spec(&self) -> Option<String> {
        None
    }
}

impl NestedOracle {
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// One draw of the oracle stream used by tests and the acceptance suite:
/// the feature for stream `i` under `seed`.
pub fn oracle_feature(oracle: &dyn BaseFeatureOracle, seed: u64, i: u64) -> Box<dyn BaseFeature> {
    oracle.sample(&mut stream_rng(seed, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RandomMaclaurinMap;

    fn exp1() -> MaclaurinKernel {
        MaclaurinKernel::exponential(1.0).unwrap()
    }

    #[test]
    fn linear_oracle_examples() {
        let o = RademacherLinear::new(3).unwrap();
        let w = SignProjection(vec![u64::MAX]);
        assert_eq!(w.eval(&[1.0, 0.0, 0.0]), 1.0);
        let b = o.bounds(2.0);
        assert_eq!((b.c_w, b.c_k, b.l_k), (4.0, 4.0, 2.0));
        assert!((b.l_w - 3f64.sqrt()).abs() < 1e-15);
        let x = [0.3, -0.5, 0.1];
        for i in 0..1000 {
            let w = oracle_feature(&o, 1, i);
            assert!(w.eval(&x).abs() <= 0.9 + 1e-15);
        }
    }

    #[test]
    fn fourier_oracle_is_bounded_and_exact_on_diagonal() {
        let o = RandomFourier::new(4, 0.7).unwrap();
        let x = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(o.kernel(&x, &x).unwrap(), 1.0);
        for i in 0..2000 {
            assert!(oracle_feature(&o, 2, i).eval(&x).abs() <= SQRT_2);
        }
        assert_eq!(o.bounds(1.0).c_w, 2.0);
        assert!(RandomFourier::new(4, 0.0).is_err());
    }

    #[test]
    fn oracle_specs() {
        assert_eq!(
            parse_oracle("base=linear", 3).unwrap().spec().unwrap(),
            "base=linear"
        );
        assert_eq!(
            parse_oracle("rff:sigma=0.5", 3).unwrap().spec().unwrap(),
            "base=rff:sigma=0.5"
        );
        assert!(parse_oracle("base=poly", 3).is_err());
        assert!(parse_oracle("base=rff:sigma=x", 3).is_err());
    }

    #[test]
    fn empty_product_is_constant() {
        let o: Arc<dyn BaseFeatureOracle> = Arc::new(RandomFourier::new(2, 1.0).unwrap());
        let map =
            CompositionalMap::build(&exp1(), o, &FeatureMapSpec::new(2, 200).with_seed(1), 1.0)
                .unwrap();
        let z1 = map.raw_features(&[0.3, 0.1]).unwrap();
        let z2 = map.raw_features(&[-0.9, 0.5]).unwrap();
        for (i, n) in map.degrees().iter().enumerate() {
            if *n == 0 {
                assert!((z1[i] - 2f64.sqrt()).abs() < 1e-15);
                assert_eq!(z2[i], z1[i]);
            }
        }
    }

    #[test]
    fn linear_oracle_reproduces_plain_map() {
        let k = MaclaurinKernel::polynomial(5, 1.0).unwrap();
        let spec = FeatureMapSpec::new(6, 500).with_seed(42);
        let plain = RandomMaclaurinMap::build(&k, &spec).unwrap();
        let comp =
            CompositionalMap::build(&k, Arc::new(RademacherLinear::new(6).unwrap()), &spec, 1.0)
                .unwrap();
        assert_eq!(plain.degrees(), comp.degrees());
        let x = [0.1, -0.2, 0.05, 0.3, -0.1, 0.2];
        assert_eq!(plain.apply(&x[..]).unwrap(), comp.apply(&x).unwrap());
    }

    #[test]
    fn domain_guard() {
        let o: Arc<dyn BaseFeatureOracle> = Arc::new(RandomFourier::new(2, 1.0).unwrap());
        let r = CompositionalMap::build(
            &MaclaurinKernel::vovk_infinite(),
            o.clone(),
            &FeatureMapSpec::new(2, 10),
            1.0,
        );
        assert!(matches!(r, Err(Error::Domain { .. })));
        // rff values reach K = 1; a radius of 1.5 covers them
        let ok = CompositionalMap::build(
            &MaclaurinKernel::vovk_infinite().rescale(1.5).unwrap(),
            o.clone(),
            &FeatureMapSpec::new(2, 10),
            1.0,
        );
        assert!(ok.is_ok());
        assert!(CompositionalMap::build(
            &exp1(),
            o,
            &FeatureMapSpec::new(2, 10).with_mode(MapMode::H01),
            1.0
        )
        .is_err());
    }

    #[test]
    fn compositional_json_round_trip() {
        let o = parse_oracle("base=rff:sigma=0.8", 3).unwrap();
        let map =
            CompositionalMap::build(&exp1(), o, &FeatureMapSpec::new(3, 25).with_seed(9), 1.0)
                .unwrap();
        let back = CompositionalMap::from_json(&map.to_json().unwrap()).unwrap();
        let x = [0.2, 0.1, -0.4];
        assert_eq!(back.apply(&x).unwrap(), map.apply(&x).unwrap());
        assert!(RandomMaclaurinMap::from_json(&map.to_json().unwrap()).is_err());
    }

    #[test]
    fn nested_oracle_constants() {
        let inner: Arc<dyn BaseFeatureOracle> = Arc::new(RandomFourier::new(2, 1.0).unwrap());
        let nested = NestedOracle::new(
            MaclaurinKernel::polynomial(2, 1.0).unwrap(),
            inner,
            2.0,
            1.0,
        )
        .unwrap();
        let b = nested.bounds(1.0);
        // p f(p C_W) with f = (1 + t)^2, C_W = 2
        assert_eq!(b.c_w, 2.0 * 25.0);
        assert_eq!(b.c_k, 4.0);
        let x = [0.3, 0.4];
        assert_eq!(nested.kernel(&x, &x).unwrap(), 4.0);
        for i in 0..5000 {
            let w = oracle_feature(&nested, 3, i);
            assert!(w.eval(&x).abs() <= b.c_w.sqrt() + 1e-12);
        }
        assert!(nested.spec().is_none());
    }
}
