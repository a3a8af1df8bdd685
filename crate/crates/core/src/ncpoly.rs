//! Noncommutative polynomials in self-adjoint indeterminates t₁,…,tₙ.
//!
//! Words are stored as sequences of 1-based variable indices; the empty word is
//! the constant term. Coefficients are complex.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Word = Vec<usize>;
pub type CMatrix = DMatrix<C64>;

const SA_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct NCPoly {
    n_vars: usize,
    terms: BTreeMap<Word, C64>,
}

fn add_term<K: Ord>(terms: &mut BTreeMap<K, C64>, key: K, c: C64) {
    if c == C64::new(0.0, 0.0) {
        return;
    }
    let e = terms.entry(key).or_insert(C64::new(0.0, 0.0));
    *e += c;
}

fn prune<K: Ord>(terms: &mut BTreeMap<K, C64>) {
    terms.retain(|_, c| *c != C64::new(0.0, 0.0));
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::VarMismatch(a, b));
    }
    Ok(())
}

impl NCPoly {
    pub fn zero(n_vars: usize) -> Self {
        assert!(n_vars > 0, "need at least one variable");
        NCPoly { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, c: C64) -> Self {
        Self::monomial(n_vars, vec![], c).expect("empty word is always valid")
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, C64::new(1.0, 0.0))
    }

    /// The indeterminate t_j.
    pub fn var(n_vars: usize, j: usize) -> Result<Self> {
        Self::monomial(n_vars, vec![j], C64::new(1.0, 0.0))
    }

    pub fn monomial(n_vars: usize, word: Word, c: C64) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        p.check_word(&word)?;
        add_term(&mut p.terms, word, c);
        Ok(p)
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, C64)>>(n_vars: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for (w, c) in terms {
            p.check_word(&w)?;
            add_term(&mut p.terms, w, c);
        }
        prune(&mut p.terms);
        Ok(p)
    }

    /// V_ρ = (ρ/2)Σ t_j².
    pub fn potential(n_vars: usize, rho: f64) -> Self {
        let terms = (1..=n_vars).map(|j| (vec![j, j], C64::new(0.5 * rho, 0.0)));
        Self::from_terms(n_vars, terms).expect("indices in range")
    }

    fn check_word(&self, w: &[usize]) -> Result<()> {
        check_index(self.n_vars, w)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &[usize]) -> C64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Longest stored word; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn add(&self, other: &NCPoly) -> Result<NCPoly> {
        check_same(self.n_vars, other.n_vars)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            add_term(&mut out.terms, w.clone(), *c);
        }
        prune(&mut out.terms);
        Ok(out)
    }

    pub fn sub(&self, other: &NCPoly) -> Result<NCPoly> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> NCPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        prune(&mut out.terms);
        out
    }

    pub fn mul(&self, other: &NCPoly) -> Result<NCPoly> {
        check_same(self.n_vars, other.n_vars)?;
        let mut out = Self::zero(self.n_vars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                add_term(&mut out.terms, w, ca * cb);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    /// p*: words reversed, coefficients conjugated.
    pub fn adjoint(&self) -> NCPoly {
        let mut out = Self::zero(self.n_vars);
        for (w, c) in &self.terms {
            let mut r = w.clone();
            r.reverse();
            add_term(&mut out.terms, r, c.conj());
        }
        out
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let star = self.adjoint();
        let keys = self.terms.keys().chain(star.terms.keys());
        keys.into_iter().all(|w| (self.coeff(w) - star.coeff(w)).norm() <= tol)
    }

    /// 𝒟_j m = Σ_{m = a t_j b} b a.
    pub fn cyclic_derivative(&self, j: usize) -> Result<NCPoly> {
        check_index(self.n_vars, &[j])?;
        let mut out = Self::zero(self.n_vars);
        for (w, c) in &self.terms {
            for (k, _) in w.iter().enumerate().filter(|(_, &l)| l == j) {
                let mut r = w[k + 1..].to_vec();
                r.extend_from_slice(&w[..k]);
                add_term(&mut out.terms, r, *c);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    pub fn cyclic_gradient(&self) -> Vec<NCPoly> {
        (1..=self.n_vars).map(|j| self.cyclic_derivative(j).expect("index in range")).collect()
    }

    /// ∂_j m = Σ_{m = a t_j b} a ⊗ b.
    pub fn difference_quotient(&self, j: usize) -> Result<NCPolyTensor> {
        check_index(self.n_vars, &[j])?;
        let mut out = NCPolyTensor::zero(self.n_vars);
        for (w, c) in &self.terms {
            for (k, _) in w.iter().enumerate().filter(|(_, &l)| l == j) {
                add_term(&mut out.terms, (w[..k].to_vec(), w[k + 1..].to_vec()), *c);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    /// ‖p‖_R = Σ_m |c_m| R^{deg m}.
    pub fn r_norm(&self, r: f64) -> f64 {
        self.terms.iter().map(|(w, c)| c.norm() * r.powi(w.len() as i32)).sum()
    }

    pub fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        if x.len() != self.n_vars {
            return Err(Error::Dimension(format!(
                "polynomial in {} variables evaluated on {} matrices",
                self.n_vars,
                x.len()
            )));
        }
        let k = x.dim();
        let mut out = CMatrix::zeros(k, k);
        for (w, c) in &self.terms {
            out += x.word(w) * *c;
        }
        Ok(out)
    }

    /// Parse the `re im i₁ i₂ …` line format; `#` starts a comment.
    ///
    /// With `n_vars = None` the number of variables is the largest index seen (at least 1).
    pub fn parse(text: &str, n_vars: Option<usize>) -> Result<NCPoly> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            let mut fields = line.split_whitespace();
            let mut num = |name: &str| -> Result<f64> {
                fields
                    .next()
                    .ok_or_else(|| bad(&format!("missing {name}")))?
                    .parse::<f64>()
                    .map_err(|e| bad(&format!("{name}: {e}")))
            };
            let re = num("real part")?;
            let im = num("imaginary part")?;
            let word = fields
                .map(|f| f.parse::<usize>().map_err(|e| bad(&format!("index {f:?}: {e}"))))
                .collect::<Result<Word>>()?;
            raw.push((word, C64::new(re, im)));
        }
        let seen = raw.iter().flat_map(|(w, _)| w.iter().copied()).max().unwrap_or(1);
        NCPoly::from_terms(n_vars.unwrap_or(seen.max(1)), raw)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (w, c) in &self.terms {
            let _ = write!(s, "{:e} {:e}", c.re, c.im);
            for i in w {
                let _ = write!(s, " {i}");
            }
            s.push('\n');
        }
        s
    }
}

fn check_index(n_vars: usize, w: &[usize]) -> Result<()> {
    match w.iter().find(|&&i| i == 0 || i > n_vars) {
        Some(&index) => Err(Error::IndexOutOfRange { index, n_vars }),
        None => Ok(()),
    }
}

/// Element of 𝒫 ⊗ 𝒫^op, stored as a sum of c·(a ⊗ b) over word pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct NCPolyTensor {
    n_vars: usize,
    terms: BTreeMap<(Word, Word), C64>,
}

impl NCPolyTensor {
    pub fn zero(n_vars: usize) -> Self {
        NCPolyTensor { n_vars, terms: BTreeMap::new() }
    }

    /// p ⊗ q.
    pub fn simple(p: &NCPoly, q: &NCPoly) -> Result<Self> {
        check_same(p.n_vars, q.n_vars)?;
        let mut out = Self::zero(p.n_vars);
        for (a, ca) in &p.terms {
            for (b, cb) in &q.terms {
                add_term(&mut out.terms, (a.clone(), b.clone()), ca * cb);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    pub fn identity(n_vars: usize) -> Self {
        let one = NCPoly::one(n_vars);
        Self::simple(&one, &one).expect("same algebra")
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Word, Word), &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &[usize], b: &[usize]) -> C64 {
        self.terms.get(&(a.to_vec(), b.to_vec())).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// max over stored pairs of |a| + |b|.
    pub fn bidegree(&self) -> usize {
        self.terms.keys().map(|(a, b)| a.len() + b.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &NCPolyTensor) -> Result<NCPolyTensor> {
        check_same(self.n_vars, other.n_vars)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            add_term(&mut out.terms, k.clone(), *c);
        }
        prune(&mut out.terms);
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> NCPolyTensor {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        prune(&mut out.terms);
        out
    }

    /// Product in 𝒫 ⊗ 𝒫^op: (a⊗b)(c⊗d) = ac ⊗ db.
    pub fn mul(&self, other: &NCPolyTensor) -> Result<NCPolyTensor> {
        check_same(self.n_vars, other.n_vars)?;
        let mut out = Self::zero(self.n_vars);
        for ((a, b), x) in &self.terms {
            for ((c, d), y) in &other.terms {
                let mut left = a.clone();
                left.extend_from_slice(c);
                let mut right = d.clone();
                right.extend_from_slice(b);
                add_term(&mut out.terms, (left, right), x * y);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    /// (a ⊗ b) # c = a c b, after evaluating words at X.
    pub fn eval_sharp(&self, x: &MatrixTuple, c: &CMatrix) -> Result<CMatrix> {
        if x.len() != self.n_vars {
            return Err(Error::Dimension(format!(
                "tensor in {} variables evaluated on {} matrices",
                self.n_vars,
                x.len()
            )));
        }
        let k = x.dim();
        if c.nrows() != k || c.ncols() != k {
            return Err(Error::Dimension(format!(
                "{}×{} matrix acted on by {k}×{k} operands",
                c.nrows(),
                c.ncols()
            )));
        }
        let mut out = CMatrix::zeros(k, k);
        for ((a, b), coef) in &self.terms {
            out += x.word(a) * c * x.word(b) * *coef;
        }
        Ok(out)
    }
}

/// n×n matrix with entries in 𝒫 ⊗ 𝒫^op.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorMatrix {
    size: usize,
    entries: Vec<NCPolyTensor>,
}

impl TensorMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &NCPolyTensor {
        &self.entries[i * self.size + j]
    }
}

/// 𝒥P with entry (i, j) = ∂_j p_i (0-based positions).
pub fn jacobian(p: &[NCPoly]) -> Result<TensorMatrix> {
    let n = p.len();
    for q in p {
        if q.n_vars != n {
            return Err(Error::Dimension(format!(
                "Jacobian of a {n}-tuple needs polynomials in {n} variables, got {}",
                q.n_vars
            )));
        }
    }
    let mut entries = Vec::with_capacity(n * n);
    for q in p {
        for j in 1..=n {
            entries.push(q.difference_quotient(j)?);
        }
    }
    Ok(TensorMatrix { size: n, entries })
}

/// A tuple of k×k self-adjoint complex matrices.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    mats: Vec<CMatrix>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Dimension("empty matrix tuple".into()));
        };
        let k = first.nrows();
        for (index, m) in mats.iter().enumerate() {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::Dimension(format!(
                    "operand {index} is {}×{}, expected {k}×{k}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let deviation = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if deviation > SA_TOL {
                return Err(Error::NotSelfAdjoint { index, deviation });
            }
        }
        Ok(MatrixTuple { mats })
    }

    /// Real diagonal matrices, one per entry list.
    pub fn diagonal(diags: &[Vec<f64>]) -> Result<Self> {
        let mats = diags
            .iter()
            .map(|d| {
                let diag = DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0)));
                CMatrix::from_diagonal(&diag)
            })
            .collect();
        Self::new(mats)
    }

    /// n independent k×k GUE-type matrices scaled to unit normalized second moment.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (k as f64).sqrt();
        let mats = (0..n)
            .map(|_| {
                let mut m = CMatrix::zeros(k, k);
                for i in 0..k {
                    let d: f64 = rng.sample(StandardNormal);
                    m[(i, i)] = C64::new(d * scale, 0.0);
                    for j in i + 1..k {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        let z = C64::new(re, im) * (scale / 2f64.sqrt());
                        m[(i, j)] = z;
                        m[(j, i)] = z.conj();
                    }
                }
                m
            })
            .collect();
        MatrixTuple { mats }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn get(&self, i: usize) -> &CMatrix {
        &self.mats[i]
    }

    fn word(&self, w: &[usize]) -> CMatrix {
        let k = self.dim();
        let mut m = CMatrix::identity(k, k);
        for &i in w {
            m *= &self.mats[i - 1];
        }
        m
    }
}

/// Normalized trace (1/k)·Tr.
pub fn trace_state(m: &CMatrix) -> C64 {
    m.trace() / m.nrows() as f64
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TangentReport {
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub lhs: f64,
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub rhs: f64,
    #[serde(serialize_with = "crate::serde_ext::float")]
    pub margin: f64,
    pub holds: bool,
}

/// τ(f(A)) against the tangent value τ(f(B)) + Σ_j τ([𝒟_j f](B)(A_j − B_j)).
///
/// Convexity of f is the caller's responsibility.
pub fn tangent_inequality_check(f: &NCPoly, a: &MatrixTuple, b: &MatrixTuple) -> Result<TangentReport> {
    if !f.is_self_adjoint(SA_TOL) {
        return Err(Error::PolyNotSelfAdjoint);
    }
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "tuples of shape {}×{} and {}×{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        )));
    }
    let lhs = trace_state(&f.eval(a)?).re;
    let mut rhs = trace_state(&f.eval(b)?).re;
    for (j, d) in f.cyclic_gradient().iter().enumerate() {
        rhs += trace_state(&(d.eval(b)? * (a.get(j) - b.get(j)))).re;
    }
    let margin = lhs - rhs;
    Ok(TangentReport { lhs, rhs, margin, holds: margin >= -1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn word_poly(n: usize, w: &[usize]) -> NCPoly {
        NCPoly::monomial(n, w.to_vec(), c(1.0)).unwrap()
    }

    #[test]
    fn products() {
        let t1 = NCPoly::var(2, 1).unwrap();
        let t2 = NCPoly::var(2, 2).unwrap();
        assert_eq!(t1.mul(&t2).unwrap(), word_poly(2, &[1, 2]));
        assert_eq!(t1.mul(&NCPoly::one(2)).unwrap(), t1);
        let s = t1.add(&t2).unwrap();
        let sq = s.mul(&s).unwrap();
        for w in [[1, 1], [1, 2], [2, 1], [2, 2]] {
            assert_eq!(sq.coeff(&w), c(1.0));
        }
        assert_eq!(sq.terms().count(), 4);
        assert_eq!(sq.degree(), 2);
        assert_eq!(t1.mul(&NCPoly::var(3, 1).unwrap()), Err(Error::VarMismatch(2, 3)));
    }

    #[test]
    fn cyclic_derivatives() {
        let v = NCPoly::potential(3, 0.7);
        for j in 1..=3 {
            let want = NCPoly::var(3, j).unwrap().scale(c(0.7));
            assert_eq!(v.cyclic_derivative(j).unwrap(), want);
        }
        assert!(NCPoly::one(2).cyclic_derivative(1).unwrap().is_zero());
        let d = word_poly(2, &[1, 2, 1]).cyclic_derivative(1).unwrap();
        assert_eq!(d, word_poly(2, &[2, 1]).add(&word_poly(2, &[1, 2])).unwrap());
        assert!(matches!(v.cyclic_derivative(4), Err(Error::IndexOutOfRange { index: 4, .. })));
    }

    #[test]
    fn difference_quotients() {
        let t1 = NCPoly::var(2, 1).unwrap();
        assert_eq!(t1.difference_quotient(1).unwrap(), NCPolyTensor::identity(2));
        assert!(t1.difference_quotient(2).unwrap().is_zero());
        let d = word_poly(2, &[2, 2]).difference_quotient(2).unwrap();
        assert_eq!(d.coeff(&[], &[2]), c(1.0));
        assert_eq!(d.coeff(&[2], &[]), c(1.0));
        assert_eq!(d.terms().count(), 2);
    }

    #[test]
    fn jacobians() {
        let ts: Vec<_> = (1..=3).map(|j| NCPoly::var(3, j).unwrap()).collect();
        let j = jacobian(&ts).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let e = j.get(a, b);
                assert_eq!(e.is_zero(), a != b);
                if a == b {
                    assert_eq!(e, &NCPolyTensor::identity(3));
                }
            }
        }
        let grad = NCPoly::potential(2, 2.5).cyclic_gradient();
        let j = jacobian(&grad).unwrap();
        assert_eq!(j.get(0, 0), &NCPolyTensor::identity(2).scale(c(2.5)));
        assert!(j.get(0, 1).is_zero());
        let swap = [NCPoly::var(2, 2).unwrap(), NCPoly::var(2, 1).unwrap()];
        let j = jacobian(&swap).unwrap();
        assert!(j.get(0, 0).is_zero() && j.get(1, 1).is_zero());
        assert_eq!(j.get(0, 1), &NCPolyTensor::identity(2));
        assert!(jacobian(&swap[..1]).is_err());
    }

    #[test]
    fn r_norms() {
        assert_eq!(word_poly(2, &[1, 2]).r_norm(1.5), 2.25);
        assert!((NCPoly::potential(2, 1.0).r_norm(3.0) - 9.0).abs() < 1e-15);
        assert_eq!(NCPoly::zero(2).r_norm(2.0), 0.0);
    }

    #[test]
    fn evaluation() {
        let x = MatrixTuple::diagonal(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(NCPoly::one(1).eval(&x).unwrap(), CMatrix::identity(2, 2));
        let sq = word_poly(1, &[1, 1]).eval(&x).unwrap();
        assert_eq!(sq, MatrixTuple::diagonal(&[vec![1.0, 4.0]]).unwrap().get(0).clone());
        assert_eq!(trace_state(&sq), c(2.5));
        let tt = NCPolyTensor::simple(&NCPoly::var(1, 1).unwrap(), &NCPoly::var(1, 1).unwrap()).unwrap();
        assert_eq!(tt.eval_sharp(&x, &CMatrix::identity(2, 2)).unwrap(), sq);
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(NCPolyTensor::identity(1).eval_sharp(&x, &m).unwrap(), m);
        assert!(NCPoly::var(2, 1).unwrap().eval(&x).is_err());
    }

    #[test]
    fn matrix_tuples_validate_self_adjointness() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(MatrixTuple::new(vec![m]), Err(Error::NotSelfAdjoint { index: 0, .. })));
    }

    #[test]
    fn text_round_trip() {
        let p = NCPoly::from_terms(
            3,
            [(vec![], c(0.5)), (vec![1, 3, 2], C64::new(-1.25, 2.0)), (vec![2, 2], c(3.0))],
        )
        .unwrap();
        let q = NCPoly::parse(&p.to_text(), Some(3)).unwrap();
        assert_eq!(p, q);
        let r = NCPoly::parse("# V\n0.5 0 1 1\n0.5 0 2 2\n", None).unwrap();
        assert_eq!(r, NCPoly::potential(2, 1.0));
        assert!(matches!(NCPoly::parse("1 x 1", None), Err(Error::Parse(_))));
        assert!(NCPoly::parse("1 0 3", Some(2)).is_err());
    }

    #[test]
    fn tangent_at_the_point_itself() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = MatrixTuple::random(2, 4, &mut rng);
        let r = tangent_inequality_check(&NCPoly::potential(2, 1.0), &a, &a).unwrap();
        assert_eq!(r.lhs, r.rhs);
        let b = MatrixTuple::random(2, 4, &mut rng);
        assert!(tangent_inequality_check(&NCPoly::potential(2, 1.0), &a, &b).unwrap().holds);
        let skew = NCPoly::monomial(2, vec![1, 2], c(1.0)).unwrap();
        assert_eq!(tangent_inequality_check(&skew, &a, &b).unwrap_err(), Error::PolyNotSelfAdjoint);
    }
}
