//! Uniform-approximation bounds: constants and the smallest embedding
//! dimension `D` that makes the tail inequality hold.

use serde::{Deserialize, Serialize};

use crate::compositional::{product_bound, BaseFeatureOracle, OracleBounds};
use crate::error::{Error, Result};
use crate::kernel::MaclaurinKernel;

/// Bound on `|Z_i(x) Z_i(y)|` for unnormalized features on the L1 ball of
/// radius `R`: the larger of `p f(pR²)` and `f(pR²) / (1 - 1/p)`.
pub fn feature_product_bound(kernel: &MaclaurinKernel, p: f64, radius: f64) -> Result<f64> {
    check_p(p)?;
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::invalid(format!("R must be >= 0, got {radius}")));
    }
    product_bound(kernel, p, radius * radius)
}

/// Inputs and outputs of a recommended-`D` computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `"dot-product"` or `"compositional"`.
    pub theorem: String,
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    pub c_omega: f64,
    pub lipschitz: f64,
    pub recommended_d: u64,
    pub radius: f64,
    pub eps: f64,
    pub delta: f64,
    pub input_dim: usize,
    pub p: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!("p must be > 1, got {p}")));
    }
    Ok(())
}

fn check_inputs(d: usize, radius: f64, eps: f64, delta: f64, p: f64) -> Result<()> {
    check_p(p)?;
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("R must be > 0, got {radius}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

fn ceil_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(Error::invalid(format!("recommended D overflows ({x})")));
    }
    Ok(x.ceil().max(0.0) as u64)
}

/// Smallest `D` with `2 (32RL/ε)^{2d} exp(-D ε² / (8 C²)) <= δ` for a dot
/// product kernel on the L1 ball of radius `R` in `d` dimensions.
pub fn recommended_d(
    kernel: &MaclaurinKernel,
    d: usize,
    radius: f64,
    eps: f64,
    delta: f64,
    p: f64,
) -> Result<BoundReport> {
    check_inputs(d, radius, eps, delta, p)?;
    let r2 = radius * radius;
    let c = p * kernel.eval_f(p * r2)?;
    let l = radius * kernel.eval_f_prime(r2)?
        + p * p * radius * (d as f64).sqrt() * kernel.eval_f_prime(p * r2)?;
    let ratio = 32.0 * radius * l / eps;
    if ratio.is_nan() || ratio <= 1.0 {
        return Err(Error::BoundVacuous(format!(
            "32RL/eps = {ratio} <= 1, the covering term is not positive"
        )));
    }
    let n = 8.0 * c * c / (eps * eps) * ((2.0 / delta).ln() + 2.0 * d as f64 * ratio.ln());
    Ok(BoundReport {
        theorem: "dot-product".into(),
        kernel: kernel.to_string(),
        base: None,
        c_omega: c,
        lipschitz: l,
        recommended_d: ceil_count(n)?,
        radius,
        eps,
        delta,
        input_dim: d,
        p,
    })
}

/// Constants `(C_1, L_1)` for an outer kernel over an oracle with the given
/// bounds.
pub fn compositional_constants(
    outer: &MaclaurinKernel,
    bounds: &OracleBounds,
    p: f64,
) -> Result<(f64, f64)> {
    check_p(p)?;
    let c1 = p * outer.eval_f(p * bounds.c_w)?;
    let l1 = bounds.l_k * outer.eval_f_prime(bounds.c_k)?
        + bounds.l_w * p * p * bounds.c_w.sqrt() * outer.eval_f_prime(p * bounds.c_w)?;
    Ok((c1, l1))
}

/// Smallest `D` with `(32RL₁/ε) exp(-D ε² / (8 C₁² d)) <= δ` for the
/// compositional kernel `f(K)`.
pub fn recommended_d_compositional(
    outer: &MaclaurinKernel,
    oracle: &dyn BaseFeatureOracle,
    radius: f64,
    eps: f64,
    delta: f64,
    p: f64,
) -> Result<BoundReport> {
    let d = oracle.input_dim();
    check_inputs(d, radius, eps, delta, p)?;
    let (c1, l1) = compositional_constants(outer, &oracle.bounds(radius), p)?;
    if eps >= 8.0 * radius * l1 {
        return Err(Error::OutsideTheoremRegime(format!(
            "eps = {eps} must be below 8 R L1 = {}",
            8.0 * radius * l1
        )));
    }
    let ratio = 32.0 * radius * l1 / eps;
    let n = 8.0 * c1 * c1 * d as f64 / (eps * eps) * ((1.0 / delta).ln() + ratio.ln());
    Ok(BoundReport {
        theorem: "compositional".into(),
        kernel: outer.to_string(),
        base: oracle.spec(),
        c_omega: c1,
        lipschitz: l1,
        recommended_d: ceil_count(n)?,
        radius,
        eps,
        delta,
        input_dim: d,
        p,
    })
}
