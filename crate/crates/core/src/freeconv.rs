//! Free additive convolution through analytic subordination.
//!
//! Each convolution is represented lazily by its Cauchy transform (an
//! `AnalyticLaw` layer over the inputs' transforms) and materialized as a grid
//! density by evaluating `-Im G(x + iε)/π` at a tiny ε.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::entropy;
use crate::error::{Error, Result};
use crate::measure::Measure1D;
use crate::transforms::{AnalyticCauchy, AnalyticLaw, Reconstruction};

const STEP_TOL: f64 = 1e-12;
const MAX_ITER: usize = 10_000;
const TOP_LEVEL: f64 = 2.0;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Fixed point of `ω = T(ω)` in the upper half-plane.
///
/// Newton steps are taken while they decrease the residual; otherwise the
/// half-damped iteration `ω ← (ω + T(ω))/2`, which converges because `T` maps
/// the half-plane strictly into itself.
fn fixed_point<T>(z: C64, init: C64, map: &T) -> Result<C64>
where
    T: Fn(C64) -> Result<(C64, C64)>,
{
    let fail = || Error::NoConvergence { re: z.re, im: z.im };
    let mut w = init;
    let (mut tw, mut dtw) = map(w)?;
    let mut res = (w - tw).norm();
    // near a branch point the residual bottoms out at rounding level long before
    // the steps become tiny; accept once progress has stalled there
    let mut best = (res, w);
    let mut stalled = 0;
    for _ in 0..MAX_ITER {
        let mut next = None;
        let jac = one() - dtw;
        if jac.norm() > 1e-300 {
            let step = (w - tw) / jac;
            // backtrack to stay in the half-plane and decrease the residual
            let mut lambda = 1.0;
            for _ in 0..40 {
                let cand = w - lambda * step;
                if cand.im > 0.0 && cand.re.is_finite() && cand.im.is_finite() {
                    if let Ok((tc, dtc)) = map(cand) {
                        let rc = (cand - tc).norm();
                        if rc < res {
                            next = Some((cand, tc, dtc, rc));
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
        }
        let (nw, ntw, ndtw, nres) = match next {
            Some(v) => v,
            None => {
                let mut cand = 0.5 * (w + tw);
                // rounding in T can push a nearly real iterate across the axis
                cand.im = cand.im.max(0.5 * w.im);
                let (tc, dtc) = map(cand)?;
                let rc = (cand - tc).norm();
                (cand, tc, dtc, rc)
            }
        };
        let step = (nw - w).norm();
        w = nw;
        tw = ntw;
        dtw = ndtw;
        res = nres;
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(fail());
        }
        let size = w.norm().max(1.0);
        if step < STEP_TOL * size || res < 4e-15 * size {
            return Ok(w);
        }
        if res < best.0 {
            best = (res, w);
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 20 && best.0 < 1e-12 * size {
                return Ok(best.1);
            }
        }
    }
    Err(fail())
}

/// Solve at `z` by continuation from `Re z + i·TOP_LEVEL` down to `z`.
fn descend<S>(z: C64, solve: S) -> Result<C64>
where
    S: Fn(C64, C64) -> Result<C64>,
{
    if z.im >= 0.25 * TOP_LEVEL {
        return solve(z, z);
    }
    let mut y = TOP_LEVEL;
    let mut zp = C64::new(z.re, y);
    let mut w = solve(zp, zp)?;
    while y > z.im {
        y = next_level(y, z.im);
        let zn = C64::new(z.re, y);
        w = solve(zn, w + (zn - zp))?;
        zp = zn;
    }
    Ok(w)
}

// geometric steps toward the axis, much larger once the boundary value has settled
fn next_level(y: f64, target: f64) -> f64 {
    let factor = if y > 1e-3 { 8.0 } else { 1e4 };
    (y / factor).max(target)
}

// reciprocal Cauchy transform minus identity, with derivative
fn h_and_dh(g: &AnalyticCauchy, w: C64) -> Result<(C64, C64)> {
    let (gv, dg) = g.eval_with_derivative(w)?;
    let f = 1.0 / gv;
    let df = -dg * f * f;
    Ok((f - w, df - 1.0))
}

/// Cauchy transform of `base ⊞ σ_t` at `z` (upper half-plane).
pub(crate) fn flow_eval(base: &AnalyticCauchy, t: f64, z: C64) -> Result<(C64, C64)> {
    let omega = descend(z, |zz, init| {
        fixed_point(zz, init, &|w: C64| {
            let (g, dg) = base.eval_with_derivative(w)?;
            Ok((zz - t * g, -t * dg))
        })
    })?;
    let (g, dg) = base.eval_with_derivative(omega)?;
    Ok((g, dg / (1.0 + t * dg)))
}

/// Cauchy transform of the k-fold free convolution power of `base`.
pub(crate) fn power_eval(base: &AnalyticCauchy, k: f64, z: C64) -> Result<(C64, C64)> {
    let c = 1.0 - 1.0 / k;
    let omega = descend(z, |zz, init| {
        fixed_point(zz, init, &|w: C64| {
            let (h, dh) = h_and_dh(base, w)?;
            // T(ω) = z/k + c·F(ω)
            Ok((zz / k + c * (h + w), c * (dh + 1.0)))
        })
    })?;
    let (g, dg) = base.eval_with_derivative(omega)?;
    let df = -dg / (g * g);
    let domega = (1.0 / k) / (1.0 - c * df);
    Ok((g, dg * domega))
}

/// Cauchy transform of `a ⊞ b`.
pub(crate) fn add_eval(a: &AnalyticCauchy, b: &AnalyticCauchy, z: C64) -> Result<(C64, C64)> {
    let omega1 = descend(z, |zz, init| {
        fixed_point(zz, init, &|w: C64| {
            let (ha, dha) = h_and_dh(a, w)?;
            let (hb, dhb) = h_and_dh(b, zz + ha)?;
            Ok((zz + hb, dhb * dha))
        })
    })?;
    let (ha, dha) = h_and_dh(a, omega1)?;
    let (_, dhb) = h_and_dh(b, z + ha)?;
    let (g, dg) = a.eval_with_derivative(omega1)?;
    let domega = (1.0 + dhb) / (1.0 - dhb * dha);
    Ok((g, dg * domega))
}

/// Cauchy transform of `parts[0] ⊞ parts[1] ⊞ ⋯` via the joint subordination
/// system `ω_i = z + Σ_{k≠i} h_k(ω_k)`.
pub(crate) fn sum_eval(parts: &[AnalyticCauchy], z: C64) -> Result<(C64, C64)> {
    let n = parts.len();
    if n == 1 {
        return parts[0].eval_with_derivative(z);
    }
    if n == 2 {
        // the one-variable composition is far better conditioned near poles of F
        return add_eval(&parts[0], &parts[1], z);
    }
    joint_eval(parts, z)
}

fn joint_eval(parts: &[AnalyticCauchy], z: C64) -> Result<(C64, C64)> {
    let n = parts.len();
    let fail = || Error::NoConvergence { re: z.re, im: z.im };
    let eval_h = |ws: &[C64]| -> Result<Vec<(C64, C64)>> {
        ws.iter().zip(parts).map(|(w, p)| h_and_dh(p, *w)).collect()
    };
    let residual = |zz: C64, ws: &[C64], hs: &[(C64, C64)]| -> Vec<C64> {
        let total: C64 = hs.iter().map(|h| h.0).sum();
        ws.iter().zip(hs).map(|(w, h)| w - zz - (total - h.0)).collect()
    };
    let jacobian = |hs: &[(C64, C64)]| -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |i, k| if i == k { one() } else { -hs[k].1 })
    };
    let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

    let solve = |zz: C64, init: &[C64]| -> Result<Vec<C64>> {
        let mut ws = init.to_vec();
        let mut hs = eval_h(&ws)?;
        let mut r = residual(zz, &ws, &hs);
        let mut rn = norm(&r);
        let mut best = (rn, ws.clone());
        let mut stalled = 0;
        for _ in 0..MAX_ITER {
            let mut accepted = None;
            let jac = jacobian(&hs);
            if let Some(step) = jac.lu().solve(&DVector::from_column_slice(&r)) {
                let mut lambda = 1.0;
                for _ in 0..40 {
                    let cand: Vec<C64> =
                        ws.iter().zip(step.iter()).map(|(w, s)| w - lambda * s).collect();
                    if cand.iter().all(|w| w.im > 0.0 && w.re.is_finite() && w.im.is_finite()) {
                        if let Ok(hc) = eval_h(&cand) {
                            let rc = residual(zz, &cand, &hc);
                            let rcn = norm(&rc);
                            if rcn < rn {
                                accepted = Some((cand, hc, rc, rcn));
                                break;
                            }
                        }
                    }
                    lambda *= 0.5;
                }
            }
            let (nw, nh, nr, nrn) = match accepted {
                Some(v) => v,
                None => {
                    let total: C64 = hs.iter().map(|h| h.0).sum();
                    let cand: Vec<C64> = ws
                        .iter()
                        .zip(&hs)
                        .map(|(w, h)| {
                            let mut c = 0.5 * (w + zz + total - h.0);
                            c.im = c.im.max(0.5 * w.im);
                            c
                        })
                        .collect();
                    let hc = eval_h(&cand)?;
                    let rc = residual(zz, &cand, &hc);
                    let rcn = norm(&rc);
                    (cand, hc, rc, rcn)
                }
            };
            let step: f64 = nw.iter().zip(&ws).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            ws = nw;
            hs = nh;
            r = nr;
            rn = nrn;
            let size = ws.iter().map(|w| w.norm()).fold(1.0, f64::max);
            if step < STEP_TOL * size || rn < 4e-15 * size {
                return Ok(ws);
            }
            if rn < best.0 {
                best = (rn, ws.clone());
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > 20 && best.0 < 1e-12 * size {
                    return Ok(best.1);
                }
            }
        }
        Err(fail())
    };

    let ws = if z.im >= 0.25 * TOP_LEVEL {
        solve(z, &vec![z; n])?
    } else {
        let mut y = TOP_LEVEL;
        let mut zp = C64::new(z.re, y);
        let mut ws = solve(zp, &vec![zp; n])?;
        while y > z.im {
            y = next_level(y, z.im);
            let zn = C64::new(z.re, y);
            let init: Vec<C64> = ws.iter().map(|w| w + (zn - zp)).collect();
            ws = solve(zn, &init)?;
            zp = zn;
        }
        ws
    };
    let hs = eval_h(&ws)?;
    let dws = jacobian(&hs)
        .lu()
        .solve(&DVector::from_element(n, one()))
        .ok_or_else(fail)?;
    let (g, dg) = parts[0].eval_with_derivative(ws[0])?;
    Ok((g, dg * dws[0]))
}

fn source_of(m: &Measure1D) -> AnalyticCauchy {
    match m.cauchy_source() {
        Some(s) if s.is_cheap() => s.clone(),
        _ => AnalyticCauchy::quadrature(m),
    }
}

/// Grid density from the boundary values of an analytic Cauchy transform.
fn materialize(law: AnalyticCauchy, hint: (f64, f64)) -> Result<Measure1D> {
    let width = hint.1 - hint.0;
    let eps = 1e-30 * width.max(1.0);
    let density = |x: f64| -> Result<f64> { Ok(-law.eval(C64::new(x, eps))?.im / PI) };
    let (grid, vals, mass) = Reconstruction::default().run(&density, hint)?;
    if (mass - 1.0).abs() > 1e-3 {
        return Err(Error::Inversion { mass });
    }
    let m = Measure1D::from_parts(grid, vals, vec![])?;
    let keep = law.is_cheap();
    Ok(m.with_source(keep.then_some(law)))
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = 0.05 * (hi - lo).max(1e-6);
    (lo - pad, hi + pad)
}

/// Law of X + √t·S with S a standard semicircular free from X.
pub fn semicircular_flow(mu: &Measure1D, t: f64) -> Result<Measure1D> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("flow time must be positive, got {t}")));
    }
    let (a, b) = mu.support();
    let r = 2.0 * t.sqrt();
    let law = AnalyticCauchy::new(AnalyticLaw::SemicircularFlow { base: source_of(mu), t });
    materialize(law, padded(a - r, b + r))
}

/// Free additive convolution μ ⊞ ν.
pub fn free_add(mu: &Measure1D, nu: &Measure1D) -> Result<Measure1D> {
    // μ ⊞ ν has an atom exactly when some μ({a}) + ν({b}) exceeds one
    if mu.max_atom_mass() + nu.max_atom_mass() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(
            "free convolution would carry atoms (atom masses sum above one)".into(),
        ));
    }
    for (x, y) in [(mu, nu), (nu, mu)] {
        if let [atom] = x.atoms() {
            if x.grid().is_empty() && atom.mass == 1.0 {
                return Ok(y.translate(atom.location));
            }
        }
    }
    let (a1, b1) = mu.support();
    let (a2, b2) = nu.support();
    // the inner evaluation point of the composed map can approach a pole of the
    // second reciprocal transform (h(w) = −1/w for Bernoulli); atoms go first
    let (first, second) = if nu.max_atom_mass() > mu.max_atom_mass() { (nu, mu) } else { (mu, nu) };
    let law = AnalyticCauchy::new(AnalyticLaw::FreeAdd { a: source_of(first), b: source_of(second) });
    materialize(law, padded(a1 + a2, b1 + b2))
}

// enclosing interval for a free sum of laws with given means, variances and radii
fn sum_hint(parts: &[(f64, f64, f64, f64)]) -> (f64, f64) {
    let mean: f64 = parts.iter().map(|p| p.0).sum();
    let var: f64 = parts.iter().map(|p| p.1).sum();
    let rmax = parts.iter().map(|p| p.2).fold(0.0, f64::max);
    let rsum: f64 = parts.iter().map(|p| p.3).sum();
    let r = (2.0 * var.sqrt() + rmax).min(rsum) * 1.05;
    (mean - r, mean + r)
}

fn stats(m: &Measure1D) -> (f64, f64, f64, f64) {
    let mean = m.mean();
    let (a, b) = m.support();
    let r = (mean - a).max(b - mean);
    (mean, m.variance(), r, r)
}

/// k-fold free convolution power μ^{⊞k}, k ≥ 1 real.
pub fn free_power(mu: &Measure1D, k: f64) -> Result<Measure1D> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("convolution power must be ≥ 1, got {k}")));
    }
    if k == 1.0 {
        return Ok(mu.clone());
    }
    if mu.max_atom_mass() > 1.0 - 1.0 / k + 1e-12 {
        return Err(Error::InvalidParameter("free convolution power would carry atoms".into()));
    }
    let (mean, var, r, _) = stats(mu);
    let hint = sum_hint(&[(k * mean, k * var, r, k * r)]);
    let law = AnalyticCauchy::new(AnalyticLaw::FreePower { base: source_of(mu), k });
    materialize(law, hint)
}

/// Law of `Σ_ℓ a_ℓ X_ℓ` for freely independent copies X_ℓ of μ.
pub fn weighted_free_sum(mu: &Measure1D, weights: &[f64]) -> Result<Measure1D> {
    if weights.is_empty() || weights.iter().any(|w| *w == 0.0 || !w.is_finite()) {
        return Err(Error::InvalidParameter("weights must be nonzero and finite".into()));
    }
    let n = weights.len();
    if weights.iter().all(|w| *w == weights[0]) {
        return free_power(&mu.dilate(weights[0])?, n as f64);
    }
    if n as f64 * mu.max_atom_mass() > n as f64 - 1.0 + 1e-12 {
        return Err(Error::InvalidParameter("free sum would carry atoms".into()));
    }
    let parts: Vec<Measure1D> = weights.iter().map(|w| mu.dilate(*w)).collect::<Result<_>>()?;
    let st: Vec<_> = parts.iter().map(stats).collect();
    let law = AnalyticCauchy::new(AnalyticLaw::FreeSum(parts.iter().map(source_of).collect()));
    materialize(law, sum_hint(&st))
}

/// A point on the Ornstein–Uhlenbeck interpolation `e^{-t}X + √(1−e^{-2t}) ρ^{-1/2} S`.
#[derive(Clone, Debug)]
pub struct FlowPoint {
    pub t: f64,
    pub rho: f64,
    pub law: Measure1D,
    /// free entropy χ of the law
    pub chi: f64,
    /// entropy relative to V_ρ: ½ρ·m₂ − χ
    pub chi_star: f64,
    pub fisher: f64,
    pub fisher_rel: f64,
}

pub fn ou_flow(mu: &Measure1D, t: f64, rho: f64) -> Result<FlowPoint> {
    if !(t >= 0.0 && t.is_finite()) || !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("need t ≥ 0 and ρ > 0, got t={t}, ρ={rho}")));
    }
    let law = if t == 0.0 {
        mu.clone()
    } else {
        let s = (-2.0 * t).exp();
        semicircular_flow(&mu.dilate((-t).exp())?, (1.0 - s) / rho)?
    };
    let chi = entropy::free_entropy(&law);
    let m2 = law.moment(2);
    let (fisher, fisher_rel) = entropy::fisher_pair(&law, rho)?;
    Ok(FlowPoint { t, rho, chi, chi_star: 0.5 * rho * m2 - chi, fisher, fisher_rel, law })
}
