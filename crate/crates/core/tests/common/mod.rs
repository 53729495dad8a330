//! Helpers shared by the oracle and acceptance tests. Everything here is
//! written from closed forms, independent of the library's series code.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Closed-form outer functions used to recompute bound constants.
#[derive(Debug, Clone, Copy)]
pub enum Closed {
    Exp { sigma: f64 },
    Poly { q: i32, r: f64 },
}

impl Closed {
    pub fn f(self, t: f64) -> f64 {
        match self {
            Closed::Exp { sigma } => (t / (sigma * sigma)).exp(),
            Closed::Poly { q, r } => (t + r).powi(q),
        }
    }

    pub fn fp(self, t: f64) -> f64 {
        match self {
            Closed::Exp { sigma } => (t / (sigma * sigma)).exp() / (sigma * sigma),
            Closed::Poly { q, r } => f64::from(q) * (t + r).powi(q - 1),
        }
    }

    pub fn spec(self) -> String {
        match self {
            Closed::Exp { sigma } => format!("exp:sigma={sigma}"),
            Closed::Poly { q, r } => format!("poly:q={q},r={r}"),
        }
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        if rng.random::<bool>() {
            Closed::Exp {
                sigma: rng.random_range(0.7..2.0),
            }
        } else {
            Closed::Poly {
                q: rng.random_range(1..=10),
                r: rng.random_range(0.0..2.0),
            }
        }
    }
}

/// Least integer `D >= 0` with `log_lhs(D) <= log_delta`, found by doubling
/// then bisection. `log_lhs` must be decreasing in `D`.
pub fn least_d(log_lhs: impl Fn(u64) -> f64, log_delta: f64) -> u64 {
    if log_lhs(0) <= log_delta {
        return 0;
    }
    let mut hi = 1u64;
    while log_lhs(hi) > log_delta {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if log_lhs(mid) <= log_delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Dot product theorem: `2 (32RL/ε)^{2d} exp(-D ε² / (8C²)) <= δ`.
pub fn dot_product_search(
    f: Closed,
    d: usize,
    r: f64,
    eps: f64,
    delta: f64,
    p: f64,
) -> (f64, f64, u64) {
    let c = p * f.f(p * r * r);
    let l = r * f.fp(r * r) + p * p * r * (d as f64).sqrt() * f.fp(p * r * r);
    let cover = 2f64.ln() + 2.0 * d as f64 * (32.0 * r * l / eps).ln();
    let n = least_d(
        |dd| cover - dd as f64 * eps * eps / (8.0 * c * c),
        delta.ln(),
    );
    (c, l, n)
}

/// Compositional theorem: `(32RL₁/ε) exp(-D ε² / (8 C₁² d)) <= δ`.
pub fn compositional_search(
    f: Closed,
    (c_w, l_w, c_k, l_k): (f64, f64, f64, f64),
    d: usize,
    r: f64,
    eps: f64,
    delta: f64,
    p: f64,
) -> (f64, f64, u64) {
    let c1 = p * f.f(p * c_w);
    let l1 = l_k * f.fp(c_k) + l_w * p * p * c_w.sqrt() * f.fp(p * c_w);
    let cover = (32.0 * r * l1 / eps).ln();
    let n = least_d(
        |dd| cover - dd as f64 * eps * eps / (8.0 * c1 * c1 * d as f64),
        delta.ln(),
    );
    (c1, l1, n)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point uniformly on the L1 sphere of radius `r`, then pulled inside by a
/// uniform factor.
pub fn l1_point(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().ln()).collect();
    let s: f64 = e.iter().sum();
    let shrink = rng.random::<f64>();
    e.iter()
        .map(|v| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * r * shrink * v / s
        })
        .collect()
}
