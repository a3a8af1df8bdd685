//! One-dimensional free Stein kernels relative to the semicircular potential.
//!
//! A kernel A(x, y) must satisfy ∫x P(x) dμ = ∬A(x, y) P̃(x, y) dμ(x)dμ(y) for every
//! polynomial P, where P̃ is the difference quotient. Truncating P to monomials of
//! degree ≤ d+1 leaves a finite linear system; its minimal-norm solution in
//! L²(μ⊗μ) gives a lower bound for the Stein discrepancy.
//!
//! The minimizer has the form A = 1 + Σ_k ν_k P̃_k, so only the (d+1)×(d+1) Gram
//! matrix of the difference quotients is needed. Everything is assembled in the
//! rescaled variable u = x/s with s² = m₂(μ) to keep the Hankel blocks tame.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure1D;

pub const MAX_DEGREE: usize = 10;
pub const DEFAULT_RIDGE: f64 = 1e-10;
const RIDGE_CONDITION: f64 = 1e12;
const RESIDUAL_TOL: f64 = 1e-8;

/// P̃(x, y) for P = Σ p_k x^k.
pub fn dq_eval(p: &[f64], x: f64, y: f64) -> f64 {
    let scale = 1f64.max(x.abs()).max(y.abs());
    if (x - y).abs() < 1e-8 * scale {
        // Σ_k p_k Σ_{i+j=k−1} x^i y^j, by Horner in k
        let mut h = 0.0;
        let mut acc = 0.0;
        let mut ypow = 1.0;
        for &pk in p.iter().skip(1) {
            // h_k = Σ_{i+j=k−1} x^i y^j satisfies h_{k+1} = x·h_k + y^k
            h = x * h + ypow;
            ypow *= y;
            acc += pk * h;
        }
        return acc;
    }
    (horner(p, x) - horner(p, y)) / (x - y)
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// A polynomial together with its difference-quotient evaluator.
#[derive(Clone, Debug)]
pub struct DifferenceQuotient {
    pub coeffs: Vec<f64>,
}

impl DifferenceQuotient {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        dq_eval(&self.coeffs, x, y)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteinKernel1D {
    pub degree: usize,
    /// A(x, y) = Σ coeffs[i][j] x^i y^j
    pub coeffs: Vec<Vec<f64>>,
    /// constraint violation for the test functions P = (x/s)^k, k = 1..=d+1
    pub residuals: Vec<f64>,
    pub discrepancy_lb: f64,
    /// ridge actually applied (0 when the system was well conditioned)
    pub ridge: f64,
    pub scale: f64,
}

impl SteinKernel1D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        let mut xi = 1.0;
        for row in &self.coeffs {
            acc += xi * horner(row, y);
            xi *= x;
        }
        acc
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn asymmetry(&self) -> f64 {
        let n = self.coeffs.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.coeffs[i][j] - self.coeffs[j][i]).abs());
            }
        }
        worst
    }
}

pub(crate) fn check_centered(mu: &Measure1D) -> Result<f64> {
    let s = mu.moment(2).sqrt();
    let mean = mu.mean();
    if mean.abs() > 1e-9 * s.max(1.0) {
        return Err(Error::InvalidMeasure(format!("expected a centered law, mean is {mean:.3e}")));
    }
    Ok(s)
}

/// Minimal-norm Stein kernel under the constraints for P ∈ {x, …, x^{d+1}}.
pub fn estimate_kernel(mu: &Measure1D, degree: usize, ridge: f64) -> Result<SteinKernel1D> {
    estimate_kernel_rho(mu, degree, ridge, 1.0)
}

/// Kernel relative to V_ρ = ρx²/2: ρ∫xP dμ = ∬A P̃ dμdμ.
pub fn estimate_kernel_rho(mu: &Measure1D, degree: usize, ridge: f64, rho: f64) -> Result<SteinKernel1D> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("ρ must be positive, got {rho}")));
    }
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!("degree must lie in 1..={MAX_DEGREE}, got {degree}")));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidParameter(format!("ridge must be nonnegative, got {ridge}")));
    }
    let s = check_centered(mu)?;
    if s == 0.0 {
        return Err(Error::InvalidMeasure("degenerate law at the origin".into()));
    }
    let nk = degree + 1;
    // moments of u = x/s up to order 2d+2
    let m: Vec<f64> = (0..=2 * nk as u32).map(|k| mu.moment(k) / s.powi(k as i32)).collect();

    // ⟨ũ_k, ũ_l⟩ with ũ_k(u, v) = Σ_{i+j=k−1} u^i v^j
    let gram = DMatrix::from_fn(nk, nk, |a, b| {
        let (k, l) = (a + 1, b + 1);
        let mut g = 0.0;
        for i in 0..k {
            for p in 0..l {
                g += m[i + p] * m[(k - 1 - i) + (l - 1 - p)];
            }
        }
        g
    });
    // ∫x·x^k = s^{k+1}m_{k+1}(u) and P̃_k = s^{k−1}ũ_k, so ∬(A−1)ũ_k = ρs²m_{k+1}(u) − ∬ũ_k
    let rhs = DVector::from_fn(nk, |a, _| {
        let k = a + 1;
        let pairs: f64 = (0..k).map(|i| m[i] * m[k - 1 - i]).sum();
        rho * s * s * m[k + 1] - pairs
    });
    let svd = gram.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let applied = if smax > 0.0 && smax / smin.max(f64::MIN_POSITIVE) > RIDGE_CONDITION {
        ridge
    } else {
        0.0
    };
    // exact zeros of a singular but consistent system (atomic laws) are dropped;
    // the ridge damps the directions that are merely tiny
    let cutoff = 1e-14 * smax;
    let lambda = applied * smax;
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let ut_r = u.transpose() * &rhs;
    let mut filtered = DVector::zeros(nk);
    for i in 0..nk {
        let sv = svd.singular_values[i];
        if sv > cutoff {
            filtered[i] = ut_r[i] * sv / (sv * sv + lambda * lambda);
        }
    }
    let nu = vt.transpose() * filtered;

    let resid_vec = &gram * &nu - &rhs;
    let residuals: Vec<f64> = resid_vec.iter().map(|r| r.abs() / s).collect();
    let worst = residuals.iter().fold(0.0, |a: f64, &b| a.max(b));
    if !(worst <= RESIDUAL_TOL) {
        return Err(Error::IllConditioned { degree, residual: worst });
    }
    let norm2 = nu.dot(&(&gram * &nu)).max(0.0);

    let mut coeffs = vec![vec![0.0; nk]; nk];
    coeffs[0][0] = 1.0;
    for (a, &v) in nu.iter().enumerate() {
        let k = a + 1;
        let w = v / s.powi(k as i32 - 1);
        for i in 0..k {
            coeffs[i][k - 1 - i] += w;
        }
    }
    Ok(SteinKernel1D {
        degree,
        coeffs,
        residuals,
        discrepancy_lb: norm2.sqrt(),
        ridge: applied,
        scale: s,
    })
}

/// Lower bound for Σ*(μ|σ) from the degree-d truncation; nondecreasing in d.
pub fn discrepancy(mu: &Measure1D, degree: usize) -> Result<f64> {
    Ok(estimate_kernel(mu, degree, DEFAULT_RIDGE)?.discrepancy_lb)
}

/// Lower bound for Σ*(μ|V_ρ).
pub fn discrepancy_rho(mu: &Measure1D, degree: usize, rho: f64) -> Result<f64> {
    Ok(estimate_kernel_rho(mu, degree, DEFAULT_RIDGE, rho)?.discrepancy_lb)
}
