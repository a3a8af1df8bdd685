#![allow(dead_code)]
//! Independent oracles and the seeded property suites shared by the
//! property tests and the acceptance run.

use std::f64::consts::PI;

use freeprob::measure::Family;
use freeprob::ncpoly::{tangent_inequality_check, MatrixTuple, NCPoly, NCPolyTensor};
use freeprob::stein::discrepancy;
use freeprob::transforms::cauchy;
use freeprob::{freeconv, Measure1D};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

pub fn runner(seed: u64, cases: u32) -> TestRunner {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes))
}

// ---------------------------------------------------------------- oracles

/// G(z) = 1/√(z²−4) for the arcsine law on [−2, 2], branch ~ 1/z at infinity.
pub fn arcsine_cauchy(z: C64) -> C64 {
    1.0 / ((z - 2.0).sqrt() * (z + 2.0).sqrt())
}

pub fn arcsine_density(x: f64) -> f64 {
    if x.abs() < 2.0 { 1.0 / (PI * (4.0 - x * x).sqrt()) } else { 0.0 }
}

/// Cauchy transform of the semicircle of mean m and variance v.
pub fn semicircle_cauchy(z: C64, m: f64, v: f64) -> C64 {
    let r = 2.0 * v.sqrt();
    let w = z - m;
    (w - (w - r).sqrt() * (w + r).sqrt()) / (2.0 * v)
}

/// Σ over pair partitions of the word with matching letters, weighted by
/// Π over crossings of q(letter of the first pair, letter of the second).
pub fn pair_partition_moment(q: &DMatrix<f64>, word: &[usize]) -> f64 {
    fn go(q: &DMatrix<f64>, word: &[usize], open: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, pos: usize) -> f64 {
        if pos == word.len() {
            if !open.is_empty() {
                return 0.0;
            }
            let mut w = 1.0;
            for (i, &(a, b)) in pairs.iter().enumerate() {
                for &(c, d) in &pairs[i + 1..] {
                    if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                        w *= q[(word[a] - 1, word[c] - 1)];
                    }
                }
            }
            return w;
        }
        // open a new pair here
        open.push(pos);
        let mut total = go(q, word, open, pairs, pos + 1);
        open.pop();
        // or close any open position carrying the same letter
        for k in 0..open.len() {
            let a = open[k];
            if word[a] == word[pos] {
                open.remove(k);
                pairs.push((a, pos));
                total += go(q, word, open, pairs, pos + 1);
                pairs.pop();
                open.insert(k, a);
            }
        }
        total
    }
    if word.len() % 2 == 1 {
        return 0.0;
    }
    go(q, word, &mut Vec::new(), &mut Vec::new(), 0)
}

/// ∂_j of a monomial straight from the definition: Σ over occurrences a t_j b ↦ a ⊗ b.
pub fn dq_oracle(p: &NCPoly, j: usize) -> Vec<((Vec<usize>, Vec<usize>), C64)> {
    let mut out: Vec<((Vec<usize>, Vec<usize>), C64)> = Vec::new();
    for (w, c) in p.terms() {
        for (k, &l) in w.iter().enumerate() {
            if l == j {
                let key = (w[..k].to_vec(), w[k + 1..].to_vec());
                match out.iter_mut().find(|(kk, _)| *kk == key) {
                    Some((_, acc)) => *acc += c,
                    None => out.push((key, *c)),
                }
            }
        }
    }
    out
}

// ------------------------------------------------------------- strategies

pub fn poly_strategy(n: usize, max_terms: usize, max_len: usize) -> impl Strategy<Value = NCPoly> {
    prop::collection::vec(
        (prop::collection::vec(1..=n, 0..=max_len), -2.0..2.0f64, -2.0..2.0f64),
        1..=max_terms,
    )
    .prop_map(move |terms| {
        NCPoly::from_terms(n, terms.into_iter().map(|(w, re, im)| (w, C64::new(re, im)))).expect("valid words")
    })
}

pub fn family_strategy() -> impl Strategy<Value = Family> {
    prop_oneof![
        (0.3..3.0f64).prop_map(|v| Family::Semicircle { mean: 0.0, variance: v }),
        Just(Family::Bernoulli),
        (0.5..2.0f64).prop_map(|c| Family::Arcsine { c }),
        (0.5..2.0f64).prop_map(|c| Family::Uniform { c }),
        (0.6..3.0f64).prop_map(|lambda| Family::MarchenkoPastur { lambda }),
    ]
}

fn build(f: &Family) -> Result<Measure1D, TestCaseError> {
    f.build().map_err(|e| TestCaseError::fail(format!("{f:?}: {e}")))
}

fn fail<E: std::fmt::Display>(e: E) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

// ------------------------------------------------------- property suites

/// ∂_j(pq) = (1⊗q)·∂_j p + (p⊗1)·∂_j q, and ∂_j agrees with the definition.
pub fn leibniz(seed: u64) -> Result<(), String> {
    let strat = (1..=3usize).prop_flat_map(|n| (Just(n), poly_strategy(n, 4, 4), poly_strategy(n, 4, 4), 1..=n));
    runner(seed, 48)
        .run(&strat, |(n, p, q, j)| {
            let lhs = p.mul(&q).map_err(fail)?.difference_quotient(j).map_err(fail)?;
            let one = NCPoly::one(n);
            let a = NCPolyTensor::simple(&one, &q).map_err(fail)?.mul(&p.difference_quotient(j).map_err(fail)?).map_err(fail)?;
            let b = NCPolyTensor::simple(&p, &one).map_err(fail)?.mul(&q.difference_quotient(j).map_err(fail)?).map_err(fail)?;
            let rhs = a.add(&b).map_err(fail)?;
            let diff = lhs.add(&rhs.scale(C64::new(-1.0, 0.0))).map_err(fail)?;
            let worst = diff.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
            prop_assert!(worst < 1e-12, "Leibniz defect {worst}");
            let direct = dq_oracle(&p, j);
            let dp = p.difference_quotient(j).map_err(fail)?;
            for ((a, b), c) in &direct {
                prop_assert!((dp.coeff(a, b) - c).norm() < 1e-12);
            }
            let nonzero = direct.iter().filter(|(_, c)| c.norm() > 1e-12).count();
            prop_assert_eq!(dp.terms().count(), nonzero);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// ‖pq‖_R ≤ ‖p‖_R‖q‖_R for R ≥ 0.
pub fn r_norm_submultiplicative(seed: u64) -> Result<(), String> {
    let strat = (1..=3usize).prop_flat_map(|n| (poly_strategy(n, 5, 5), poly_strategy(n, 5, 5), 0.0..4.0f64));
    runner(seed, 64)
        .run(&strat, |(p, q, r)| {
            let pq = p.mul(&q).map_err(fail)?.r_norm(r);
            let bound = p.r_norm(r) * q.r_norm(r);
            prop_assert!(pq <= bound * (1.0 + 1e-12) + 1e-12, "‖pq‖ = {pq} > {bound}");
            // the oracle for the norm itself: Σ|c|R^{|w|}
            let direct: f64 = p.terms().map(|(w, c)| c.norm() * r.powi(w.len() as i32)).sum();
            prop_assert!((direct - p.r_norm(r)).abs() <= 1e-12 * direct.max(1.0));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// G maps ℂ⁺ to ℂ⁻ with |G(z)| ≤ 1/Im z, and F = 1/G satisfies Im F ≥ Im z,
/// for the families and for free sums of pairs of them.
pub fn herglotz(seed: u64) -> Result<(), String> {
    let strat = (family_strategy(), family_strategy(), -4.0..4.0f64, 0.05..3.0f64, any::<bool>());
    runner(seed, 12)
        .run(&strat, |(f, g, x, y, convolve)| {
            let mu = build(&f)?;
            let law = if convolve && mu.max_atom_mass() + build(&g)?.max_atom_mass() <= 1.0 {
                freeconv::free_add(&mu, &build(&g)?).map_err(fail)?
            } else {
                mu
            };
            let z = C64::new(x, y);
            let gz = cauchy(&law, z).map_err(fail)?;
            prop_assert!(gz.im < 0.0, "Im G({z}) = {}", gz.im);
            prop_assert!(gz.norm() <= 1.0 / y * (1.0 + 1e-9));
            let fz = 1.0 / gz;
            prop_assert!(fz.im >= y * (1.0 - 1e-9), "Im F = {} < {y}", fz.im);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// (μ ⊞ σ_s) ⊞ σ_t = μ ⊞ σ_{s+t}, compared through Cauchy transforms on Im z = 1,
/// and σ_s ⊞ σ_t against the closed-form semicircle.
pub fn subordination_semigroup(seed: u64) -> Result<(), String> {
    let strat = (family_strategy(), 0.05..1.5f64, 0.05..1.5f64);
    runner(seed, 4)
        .run(&strat, |(f, s, t)| {
            let mu = build(&f)?;
            let two_step = freeconv::semicircular_flow(&freeconv::semicircular_flow(&mu, s).map_err(fail)?, t).map_err(fail)?;
            let one_step = freeconv::semicircular_flow(&mu, s + t).map_err(fail)?;
            let sa = build(&Family::Semicircle { mean: 0.0, variance: s })?;
            let sb = build(&Family::Semicircle { mean: 0.0, variance: t })?;
            let sum = freeconv::free_add(&sa, &sb).map_err(fail)?;
            for k in 0..=16 {
                let z = C64::new(-4.0 + 0.5 * k as f64, 1.0);
                let a = cauchy(&two_step, z).map_err(fail)?;
                let b = cauchy(&one_step, z).map_err(fail)?;
                prop_assert!((a - b).norm() < 1e-6, "{f:?} s={s} t={t} z={z}: {}", (a - b).norm());
                let c = cauchy(&sum, z).map_err(fail)?;
                let exact = semicircle_cauchy(z, 0.0, s + t);
                prop_assert!((c - exact).norm() < 1e-6, "σ_s ⊞ σ_t at {z}: {}", (c - exact).norm());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The truncated discrepancy is nondecreasing in the degree.
pub fn discrepancy_monotone(seed: u64) -> Result<(), String> {
    runner(seed, 6)
        .run(&family_strategy(), |f| {
            let mu = build(&f)?.center();
            let mut prev = 0.0;
            for d in 1..=6 {
                let cur = discrepancy(&mu, d).map_err(fail)?;
                prop_assert!(cur >= prev - 1e-7, "{f:?}: degree {d} gives {cur} < {prev}");
                prev = cur;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Evaluation is a unital *-homomorphism.
pub fn star_homomorphism(seed: u64) -> Result<(), String> {
    let strat = (1..=3usize, 1..=5usize, any::<u64>())
        .prop_flat_map(|(n, k, s)| (Just(n), Just(k), Just(s), poly_strategy(n, 4, 3), poly_strategy(n, 4, 3)));
    runner(seed, 32)
        .run(&strat, |(n, k, s, p, q)| {
            let x = MatrixTuple::random(n, k, &mut ChaCha8Rng::seed_from_u64(s));
            let ep = p.eval(&x).map_err(fail)?;
            let eq = q.eval(&x).map_err(fail)?;
            let tol = 1e-9 * (1.0 + ep.norm() * eq.norm());
            prop_assert!((p.mul(&q).map_err(fail)?.eval(&x).map_err(fail)? - &ep * &eq).norm() < tol);
            prop_assert!((p.add(&q).map_err(fail)?.eval(&x).map_err(fail)? - (&ep + &eq)).norm() < tol);
            prop_assert!((p.adjoint().eval(&x).map_err(fail)? - ep.adjoint()).norm() < tol);
            prop_assert!((NCPoly::one(n).eval(&x).map_err(fail)? - DMatrix::identity(k, k)).norm() < 1e-14);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Convex trace polynomials lie above their tangent lines.
pub fn tangent_lines(seed: u64) -> Result<(), String> {
    let strat = (1..=3usize, 0.1..3.0f64, 0.0..1.0f64, any::<u64>());
    runner(seed, 32)
        .run(&strat, |(n, rho, eps, s)| {
            let f = convex_mix(n, rho, eps);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let a = MatrixTuple::random(n, 4, &mut rng);
            let b = MatrixTuple::random(n, 4, &mut rng);
            let r = tangent_inequality_check(&f, &a, &b).map_err(fail)?;
            prop_assert!(r.holds && r.margin >= -1e-10, "margin {}", r.margin);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Σ_j t_j⁴.
pub fn quartic(n: usize) -> NCPoly {
    NCPoly::from_terms(n, (1..=n).map(|j| (vec![j; 4], C64::new(1.0, 0.0)))).expect("valid words")
}

/// V_ρ + ε Σ_j t_j⁴.
pub fn convex_mix(n: usize, rho: f64, eps: f64) -> NCPoly {
    NCPoly::potential(n, rho).add(&quartic(n).scale(C64::new(eps, 0.0))).expect("same arity")
}
