//! Free entropy and free Fisher information of one-dimensional laws.
//!
//! Conjugate variable convention: ξ = 2·p.v.∫(x−y)⁻¹dμ(y), so that the
//! semicircle of variance 1/ρ is the Gibbs state of V_ρ = ρx²/2.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::freeconv::semicircular_flow;
use crate::measure::Measure1D;
use crate::quad::Rule;
use crate::transforms::{hilbert, hilbert_many, log_energy};

/// χ(σ) for the standard semicircle.
pub fn chi_semicircle() -> f64 {
    0.5 * (2.0 * PI * E).ln()
}

pub fn free_entropy(mu: &Measure1D) -> f64 {
    let e = log_energy(mu);
    if e == f64::NEG_INFINITY {
        return e;
    }
    e + 0.75 + 0.5 * (2.0 * PI).ln()
}

/// χ(μ|σ) = ½m₂ − χ(μ).
pub fn relative_entropy(mu: &Measure1D) -> f64 {
    relative_entropy_rho(mu, 1.0)
}

/// χ*(μ|V_ρ) = ½ρ·m₂ − χ(μ).
pub fn relative_entropy_rho(mu: &Measure1D, rho: f64) -> f64 {
    0.5 * rho * mu.moment(2) - free_entropy(mu)
}

pub fn conjugate_variable(mu: &Measure1D, x: f64) -> Result<f64> {
    if !mu.is_atomless() {
        return Err(Error::HasAtoms);
    }
    Ok(2.0 * hilbert(mu, x)?)
}

/// `(Φ*(μ), Φ*(μ|V_ρ))`; both infinite when μ has atoms.
pub fn fisher_pair(mu: &Measure1D, rho: f64) -> Result<(f64, f64)> {
    if !mu.is_atomless() {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let (xs, ps) = (mu.grid(), mu.density());
    let rule = Rule::new(2);
    let mut pts = Vec::with_capacity(2 * xs.len());
    let mut wts = Vec::with_capacity(2 * xs.len());
    for i in 0..xs.len() - 1 {
        let (a, b) = (xs[i], xs[i + 1]);
        if ps[i] == 0.0 && ps[i + 1] == 0.0 {
            continue;
        }
        for (x, w) in rule.on(a, b) {
            let t = (x - a) / (b - a);
            pts.push(x);
            wts.push(w * (ps[i] * (1.0 - t) + ps[i + 1] * t));
        }
    }
    let h = hilbert_many(mu, &pts)?;
    let mut abs = 0.0;
    let mut rel = 0.0;
    for ((x, w), hx) in pts.iter().zip(&wts).zip(&h) {
        let xi = 2.0 * hx;
        abs += w * xi * xi;
        rel += w * (xi - rho * x).powi(2);
    }
    Ok((abs, rel))
}

/// Φ*(μ) = ∫ξ² dμ.
pub fn fisher(mu: &Measure1D) -> Result<f64> {
    Ok(fisher_pair(mu, 1.0)?.0)
}

/// Φ*(μ|V_ρ) = ∫(ξ − ρx)² dμ.
pub fn relative_fisher(mu: &Measure1D, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("ρ must be positive, got {rho}")));
    }
    Ok(fisher_pair(mu, rho)?.1)
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub chi: f64,
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub chi_rel: f64,
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub fisher_rel: f64,
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub fisher_abs: f64,
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub variance: f64,
}

pub fn entropy_report(mu: &Measure1D) -> Result<EntropyReport> {
    let chi = free_entropy(mu);
    let (fisher_abs, fisher_rel) = fisher_pair(mu, 1.0)?;
    Ok(EntropyReport {
        chi,
        chi_rel: 0.5 * mu.moment(2) - chi,
        fisher_rel,
        fisher_abs,
        variance: mu.variance(),
    })
}

/// χ*(μ) = ½∫₀^∞ (1/(1+t) − Φ*(μ ⊞ σ_t)) dt + ½log(2πe).
///
/// Gauss–Legendre in s = log(1+t) on `[0, log(1+t_max)]` with `steps` nodes split
/// over panels of eight; beyond t_max Φ* is replaced by 1/(Var μ + t).
pub fn chi_star_via_flow(mu: &Measure1D, t_max: f64, steps: usize) -> Result<f64> {
    if !(t_max >= 1.0) || steps == 0 {
        return Err(Error::InvalidParameter(format!(
            "need t_max ≥ 1 and at least one step, got t_max={t_max}, steps={steps}"
        )));
    }
    let panels = steps.div_ceil(8);
    let rule = Rule::new(8);
    let smax = t_max.ln_1p();
    let mut nodes = Vec::new();
    for p in 0..panels {
        let a = smax * p as f64 / panels as f64;
        let b = smax * (p + 1) as f64 / panels as f64;
        nodes.extend(rule.on(a, b));
    }
    let mut integral = 0.0;
    for (s, w) in nodes {
        let t = s.exp_m1();
        let phi = fisher(&semicircular_flow(mu, t)?)?;
        integral += w * (1.0 - (1.0 + t) * phi);
    }
    let var = mu.variance();
    let tail = ((var + t_max) / (1.0 + t_max)).ln();
    Ok(0.5 * (integral + tail) + chi_semicircle())
}
