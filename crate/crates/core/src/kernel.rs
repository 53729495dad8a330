//! Dot product kernels `K(x, y) = f(<x, y>)` described by the Maclaurin
//! coefficients of `f`.
//!
//! A kernel is positive definite on every Euclidean space exactly when all
//! coefficients `a_n` of `f(t) = Σ a_n t^n` are non-negative. Coefficients are
//! closed-form functions of `n`, so infinite expansions stay exact, and each
//! kernel also reports `ln a_n` so feature scales can be formed without
//! overflow.
//!
//! Rescaling by `c > 0` yields `g(t) = f(t / c)` with coefficients
//! `a_n / c^n` and radius of convergence `γ c`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The closed-form families available from the CLI and the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `<x, y>^q`
    Homogeneous { degree: u32 },
    /// `(<x, y> + r)^q`
    Polynomial { degree: u32, offset: f64 },
    /// `exp(<x, y> / σ²)`
    Exponential { sigma: f64 },
    /// `(1 - <x, y>^q) / (1 - <x, y>)`
    VovkReal { degree: u32 },
    /// `1 / (1 - <x, y>)`
    VovkInfinite,
    /// `Σ a_n <x, y>^n` over a user-supplied finite list.
    Coefficients(Vec<f64>),
}

/// A dot product kernel with an optional argument scale `c` and an optional
/// truncation degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MaclaurinKernel {
    family: KernelFamily,
    scale: f64,
    truncation: Option<u32>,
}

/// Outcome of [`MaclaurinKernel::validate_nonneg`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validation {
    Valid { checked_up_to: u32 },
    Negative { index: u32, value: f64 },
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validation::Valid { .. })
    }
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

fn horner(coeffs: impl DoubleEndedIterator<Item = f64>, u: f64) -> f64 {
    coeffs.rev().fold(0.0, |acc, a| acc * u + a)
}

impl MaclaurinKernel {
    fn new(family: KernelFamily) -> Self {
        MaclaurinKernel {
            family,
            scale: 1.0,
            truncation: None,
        }
    }

    pub fn homogeneous(degree: u32) -> Self {
        Self::new(KernelFamily::Homogeneous { degree })
    }

    pub fn polynomial(degree: u32, offset: f64) -> Result<Self> {
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::invalid(format!(
                "polynomial offset must be finite and >= 0, got {offset}"
            )));
        }
        Ok(Self::new(KernelFamily::Polynomial { degree, offset }))
    }

    pub fn exponential(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "exponential width must be finite and > 0, got {sigma}"
            )));
        }
        Ok(Self::new(KernelFamily::Exponential { sigma }))
    }

    pub fn vovk_real(degree: u32) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("Vovk real polynomial degree must be >= 1"));
        }
        Ok(Self::new(KernelFamily::VovkReal { degree }))
    }

    pub fn vovk_infinite() -> Self {
        Self::new(KernelFamily::VovkInfinite)
    }

    /// Kernel from an explicit finite coefficient list. Negative entries are
    /// accepted here and reported by [`validate_nonneg`](Self::validate_nonneg).
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coefficient list is empty"));
        }
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(Self::new(KernelFamily::Coefficients(coeffs)))
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            KernelFamily::Homogeneous { .. } => "homog",
            KernelFamily::Polynomial { .. } => "poly",
            KernelFamily::Exponential { .. } => "exp",
            KernelFamily::VovkReal { .. } => "vovk-real",
            KernelFamily::VovkInfinite => "vovk-inf",
            KernelFamily::Coefficients(_) => "coeffs",
        }
    }

    /// The argument scale `c` in `g(t) = f(t / c)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn truncation(&self) -> Option<u32> {
        self.truncation
    }

    /// Same kernel without truncation.
    pub fn untruncated(&self) -> Self {
        MaclaurinKernel {
            truncation: None,
            ..self.clone()
        }
    }

    /// Keeps only the terms of degree `<= k`.
    pub fn truncated(&self, k: u32) -> Self {
        let k = self.truncation.map_or(k, |t| t.min(k));
        MaclaurinKernel {
            truncation: Some(k),
            ..self.clone()
        }
    }

    /// `g(t) = f(t / c)`, composed with any existing scale.
    pub fn rescale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "scale must be finite and > 0, got {c}"
            )));
        }
        Ok(MaclaurinKernel {
            scale: self.scale * c,
            ..self.clone()
        })
    }

    /// Largest degree with a possibly non-zero coefficient, `None` for
    /// infinite expansions. Infinite-support families have strictly positive
    /// coefficients at every degree.
    pub fn max_degree(&self) -> Option<u32> {
        let base = match &self.family {
            KernelFamily::Homogeneous { degree } | KernelFamily::Polynomial { degree, .. } => {
                Some(*degree)
            }
            KernelFamily::VovkReal { degree } => Some(degree - 1),
            KernelFamily::Coefficients(c) => Some((c.len() - 1) as u32),
            KernelFamily::Exponential { .. } | KernelFamily::VovkInfinite => None,
        };
        match (base, self.truncation) {
            (Some(b), Some(t)) => Some(b.min(t)),
            (b, t) => b.or(t),
        }
    }

    /// Radius of convergence of the unscaled series.
    pub fn base_radius(&self) -> f64 {
        if self.truncation.is_some() {
            return f64::INFINITY;
        }
        match self.family {
            KernelFamily::VovkInfinite => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// Radius of convergence `γ c` of the scaled series.
    pub fn radius(&self) -> f64 {
        self.base_radius() * self.scale
    }

    fn base_coefficient(&self, n: u32) -> f64 {
        match &self.family {
            KernelFamily::Homogeneous { degree } => {
                if n == *degree {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::Polynomial { degree, offset } => {
                if n > *degree {
                    0.0
                } else {
                    binomial(*degree, n) * offset.powi((degree - n) as i32)
                }
            }
            KernelFamily::Exponential { sigma } => {
                if n > 170 {
                    return self.base_log_coefficient(n).exp();
                }
                let s2 = sigma * sigma;
                let mut term = 1.0;
                for k in 1..=n {
                    term /= s2 * f64::from(k);
                }
                if term == 0.0 || !term.is_finite() {
                    self.base_log_coefficient(n).exp()
                } else {
                    term
                }
            }
            KernelFamily::VovkReal { degree } => {
                if n < *degree {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::VovkInfinite => 1.0,
            KernelFamily::Coefficients(c) => c.get(n as usize).copied().unwrap_or(0.0),
        }
    }

    fn base_log_coefficient(&self, n: u32) -> f64 {
        match &self.family {
            KernelFamily::Polynomial { degree, offset } => {
                if n > *degree {
                    f64::NEG_INFINITY
                } else if n == *degree {
                    ln_binomial(*degree, n)
                } else {
                    ln_binomial(*degree, n) + f64::from(degree - n) * offset.ln()
                }
            }
            KernelFamily::Exponential { sigma } => {
                -f64::from(n) * (sigma * sigma).ln() - ln_factorial(n)
            }
            _ => {
                let a = self.base_coefficient(n);
                if a == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    // negative coefficients have no logarithm
                    a.ln()
                }
            }
        }
    }

    /// `a_n / c^n`, zero beyond a finite support or the truncation degree.
    pub fn coefficient(&self, n: u32) -> f64 {
        if self.truncation.is_some_and(|k| n > k) {
            return 0.0;
        }
        let a = self.base_coefficient(n);
        if self.scale == 1.0 || a == 0.0 {
            return a;
        }
        let v = a / self.scale.powf(f64::from(n));
        if v.is_finite() && v != 0.0 {
            v
        } else {
            self.log_coefficient(n).exp()
        }
    }

    /// `ln(a_n / c^n)`; `-inf` when the coefficient is zero, NaN when it is
    /// negative.
    pub fn log_coefficient(&self, n: u32) -> f64 {
        if self.truncation.is_some_and(|k| n > k) {
            return f64::NEG_INFINITY;
        }
        let l = self.base_log_coefficient(n);
        if l == f64::NEG_INFINITY || self.scale == 1.0 {
            l
        } else {
            l - f64::from(n) * self.scale.ln()
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let radius = self.radius();
        if !t.is_finite() || t.abs() >= radius {
            return Err(Error::Domain { value: t, radius });
        }
        Ok(())
    }

    fn base_f(&self, u: f64) -> f64 {
        if let Some(k) = self.truncation {
            return horner((0..=k).map(|n| self.base_coefficient(n)), u);
        }
        match &self.family {
            KernelFamily::Homogeneous { degree } => u.powi(*degree as i32),
            KernelFamily::Polynomial { degree, offset } => (u + offset).powi(*degree as i32),
            KernelFamily::Exponential { sigma } => (u / (sigma * sigma)).exp(),
            KernelFamily::VovkReal { degree } => {
                if (1.0 - u).abs() < 1e-3 {
                    horner((0..*degree).map(|_| 1.0), u)
                } else {
                    (1.0 - u.powi(*degree as i32)) / (1.0 - u)
                }
            }
            KernelFamily::VovkInfinite => 1.0 / (1.0 - u),
            KernelFamily::Coefficients(c) => horner(c.iter().copied(), u),
        }
    }

    fn series_derivative(&self, last: u32, u: f64) -> f64 {
        horner(
            (1..=last).map(|n| f64::from(n) * self.base_coefficient(n)),
            u,
        )
    }

    fn base_f_prime(&self, u: f64) -> f64 {
        if let Some(k) = self.truncation {
            return self.series_derivative(k, u);
        }
        match &self.family {
            KernelFamily::Homogeneous { degree } => {
                if *degree == 0 {
                    0.0
                } else {
                    f64::from(*degree) * u.powi(*degree as i32 - 1)
                }
            }
            KernelFamily::Polynomial { degree, offset } => {
                if *degree == 0 {
                    0.0
                } else {
                    f64::from(*degree) * (u + offset).powi(*degree as i32 - 1)
                }
            }
            KernelFamily::Exponential { sigma } => {
                let s2 = sigma * sigma;
                (u / s2).exp() / s2
            }
            KernelFamily::VovkReal { degree } => self.series_derivative(degree - 1, u),
            KernelFamily::VovkInfinite => 1.0 / ((1.0 - u) * (1.0 - u)),
            KernelFamily::Coefficients(c) => self.series_derivative((c.len() - 1) as u32, u),
        }
    }

    /// `g(t) = f(t / c)`.
    pub fn eval_f(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.base_f(t / self.scale))
    }

    /// `g'(t) = f'(t / c) / c`.
    pub fn eval_f_prime(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.base_f_prime(t / self.scale) / self.scale)
    }

    pub fn kernel_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        self.eval_f(dot(x, y))
    }

    /// Reports the first `n <= n_max` with a negative (or NaN) coefficient.
    pub fn validate_nonneg(&self, n_max: u32) -> Validation {
        for n in 0..=n_max {
            let a = self.coefficient(n);
            if a.is_nan() || a < 0.0 {
                return Validation::Negative { index: n, value: a };
            }
        }
        Validation::Valid {
            checked_up_to: n_max,
        }
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Parameters accepted in a kernel spec string.
#[derive(Debug, Clone, Default)]
pub struct KernelParams {
    pub degree: Option<u32>,
    pub offset: Option<f64>,
    pub sigma: Option<f64>,
}

/// One family in the built-in catalog.
pub struct CatalogEntry {
    pub name: &'static str,
    pub template: &'static str,
    pub formula: &'static str,
    pub keys: &'static [&'static str],
    pub build: fn(&KernelParams) -> Result<MaclaurinKernel>,
}

/// Degree used when a spec string omits `q`.
pub const DEFAULT_DEGREE: u32 = 10;

pub fn catalog() -> &'static [CatalogEntry] {
    const CATALOG: &[CatalogEntry] = &[
        CatalogEntry {
            name: "homog",
            template: "homog:q=10",
            formula: "<x,y>^q",
            keys: &["q"],
            build: |p| {
                Ok(MaclaurinKernel::homogeneous(
                    p.degree.unwrap_or(DEFAULT_DEGREE),
                ))
            },
        },
        CatalogEntry {
            name: "poly",
            template: "poly:q=10,r=1",
            formula: "(<x,y> + r)^q",
            keys: &["q", "r"],
            build: |p| {
                MaclaurinKernel::polynomial(
                    p.degree.unwrap_or(DEFAULT_DEGREE),
                    p.offset.unwrap_or(1.0),
                )
            },
        },
        CatalogEntry {
            name: "exp",
            template: "exp:sigma=1.0",
            formula: "exp(<x,y> / sigma^2)",
            keys: &["sigma"],
            build: |p| match p.sigma {
                Some(s) => MaclaurinKernel::exponential(s),
                None => Err(Error::invalid(
                    "exp kernel needs sigma=<width> (or sigma=auto where data is available)",
                )),
            },
        },
        CatalogEntry {
            name: "vovk-real",
            template: "vovk-real:q=10",
            formula: "(1 - <x,y>^q) / (1 - <x,y>)",
            keys: &["q"],
            build: |p| MaclaurinKernel::vovk_real(p.degree.unwrap_or(DEFAULT_DEGREE)),
        },
        CatalogEntry {
            name: "vovk-inf",
            template: "vovk-inf",
            formula: "1 / (1 - <x,y>)",
            keys: &[],
            build: |_| Ok(MaclaurinKernel::vovk_infinite()),
        },
    ];
    CATALOG
}

fn spec_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::KernelSpec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(spec: &str, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| spec_err(spec, format!("bad value `{v}` for `{key}`")))
}

/// True when the spec is an exponential kernel whose width must come from
/// data (`exp`, `exp:sigma=auto`).
pub fn needs_auto_sigma(spec: &str) -> bool {
    let spec = spec.trim();
    let name = spec.split([':', ',']).next().unwrap_or("");
    name == "exp"
        && !spec.split([':', ',']).any(|kv| {
            kv.trim()
                .strip_prefix("sigma=")
                .is_some_and(|v| v.trim() != "auto")
        })
}

/// Parses `poly:q=10,r=1`, `homog:q=10`, `exp:sigma=1.0`, `vovk-real:q=10`,
/// `vovk-inf`, `coeffs:[a0,a1,...]`, each with optional `,c=<scale>` and
/// `,trunc=<k>` suffixes. `auto_sigma` fills in `exp` / `exp:sigma=auto`.
pub fn parse_kernel_spec(spec: &str, auto_sigma: Option<f64>) -> Result<MaclaurinKernel> {
    let s = spec.trim();
    let split = s.find([':', ',']).unwrap_or(s.len());
    let name = &s[..split];
    let mut rest = if split < s.len() { &s[split + 1..] } else { "" };

    let mut kernel = if name == "coeffs" {
        let body = rest
            .strip_prefix('[')
            .ok_or_else(|| spec_err(spec, "expected `coeffs:[a0,a1,...]`"))?;
        let close = body
            .find(']')
            .ok_or_else(|| spec_err(spec, "missing `]`"))?;
        let coeffs = body[..close]
            .split(',')
            .map(|v| parse_num::<f64>(spec, "coeffs", v))
            .collect::<Result<Vec<_>>>()?;
        rest = body[close + 1..].trim_start_matches(',');
        MaclaurinKernel::from_coefficients(coeffs).map_err(|e| spec_err(spec, e.to_string()))?
    } else {
        let entry = catalog()
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| spec_err(spec, format!("unknown kernel `{name}`")))?;
        let mut params = KernelParams::default();
        for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| spec_err(spec, format!("expected key=value, got `{kv}`")))?;
            let k = k.trim();
            if k == "c" || k == "trunc" {
                continue;
            }
            if !entry.keys.contains(&k) {
                return Err(spec_err(
                    spec,
                    format!("`{k}` is not a parameter of {name}"),
                ));
            }
            match k {
                "q" => params.degree = Some(parse_num(spec, k, v)?),
                "r" => params.offset = Some(parse_num(spec, k, v)?),
                "sigma" => {
                    params.sigma = if v.trim() == "auto" {
                        Some(
                            auto_sigma
                                .ok_or_else(|| spec_err(spec, "sigma=auto needs training data"))?,
                        )
                    } else {
                        Some(parse_num(spec, k, v)?)
                    }
                }
                _ => unreachable!(),
            }
        }
        if name == "exp" && params.sigma.is_none() {
            params.sigma = auto_sigma;
        }
        (entry.build)(&params).map_err(|e| spec_err(spec, e.to_string()))?
    };

    for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(spec_err(spec, format!("expected key=value, got `{kv}`")));
        };
        match k.trim() {
            "c" => {
                let c: f64 = parse_num(spec, "c", v)?;
                kernel = kernel
                    .rescale(c)
                    .map_err(|e| spec_err(spec, e.to_string()))?;
            }
            "trunc" => kernel = kernel.truncated(parse_num(spec, "trunc", v)?),
            other if name == "coeffs" => {
                return Err(spec_err(
                    spec,
                    format!("`{other}` is not a parameter of coeffs"),
                ))
            }
            _ => {}
        }
    }
    Ok(kernel)
}

impl FromStr for MaclaurinKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_kernel_spec(s, None)
    }
}

/// Canonical spec string; parses back to an equal kernel.
impl fmt::Display for MaclaurinKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Homogeneous { degree } => write!(f, "homog:q={degree}")?,
            KernelFamily::Polynomial { degree, offset } => write!(f, "poly:q={degree},r={offset}")?,
            KernelFamily::Exponential { sigma } => write!(f, "exp:sigma={sigma}")?,
            KernelFamily::VovkReal { degree } => write!(f, "vovk-real:q={degree}")?,
            KernelFamily::VovkInfinite => write!(f, "vovk-inf")?,
            KernelFamily::Coefficients(c) => {
                let items: Vec<String> = c.iter().map(|a| a.to_string()).collect();
                write!(f, "coeffs:[{}]", items.join(","))?
            }
        }
        if self.scale != 1.0 {
            write!(f, ",c={}", self.scale)?;
        }
        if let Some(k) = self.truncation {
            write!(f, ",trunc={k}")?;
        }
        Ok(())
    }
}
