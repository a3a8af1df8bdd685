//! Truncated q-deformed Fock spaces and their Stein kernels.
//!
//! Words over {1..n} of length ≤ D index the basis; the word of length d with
//! letters w₁…w_d has index Σ (w_a − 1) n^{d−1−a}, so prepending letter j to a
//! word w of length d lands at (j − 1)·n^d + idx(w). Vectors are stored per
//! degree in these coordinates and the q-inner product is ⟨u, v⟩ = Σ_d u_dᵀ G_d v_d.
//!
//! The mixed case carries a symmetric matrix (q_ij); the single-parameter case is
//! the all-q matrix.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ncpoly::NCPoly;

pub const BASIS_BUDGET: usize = 2_000_000;
/// Largest degree block held as a dense Gram matrix.
pub const DENSE_BLOCK: usize = 4096;
/// Pair-partition oracle length cap.
pub const ORACLE_MAX_LEN: usize = 12;
const DIRECT_GRAM_MAX_DEGREE: usize = 6;

pub type FockVector = Vec<DVector<f64>>;

/// Default truncation depth for n generators.
pub fn default_depth(n: usize) -> usize {
    match n {
        1 => 8,
        2 => 6,
        _ => 5,
    }
}

pub fn uniform_q(n: usize, q: f64) -> DMatrix<f64> {
    DMatrix::from_element(n, n, q)
}

fn check_qmatrix(q: &DMatrix<f64>) -> Result<()> {
    let n = q.nrows();
    if n == 0 || q.ncols() != n {
        return Err(Error::Dimension(format!("q-matrix must be square and nonempty, got {}×{}", q.nrows(), q.ncols())));
    }
    for i in 0..n {
        for j in 0..n {
            let v = q[(i, j)];
            if !(v.abs() < 1.0) {
                return Err(Error::InvalidParameter(format!("q[{},{}] = {v} must lie in (−1, 1)", i + 1, j + 1)));
            }
            if v != q[(j, i)] {
                return Err(Error::InvalidParameter(format!("q-matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct QFockSpace {
    n: usize,
    depth: usize,
    q: DMatrix<f64>,
    gram: Vec<DMatrix<f64>>,
    chol: Vec<Cholesky<f64, Dyn>>,
    /// ann[j][d]: q-adjoint of ℓ_{j+1}, mapping degree d+1 to degree d
    ann: Vec<Vec<DMatrix<f64>>>,
}

/// Truncated q-Fock space with a single deformation parameter.
pub fn build_fock(n: usize, q: f64, depth: usize) -> Result<QFockSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one generator".into()));
    }
    QFockSpace::build(uniform_q(n, q), depth)
}

/// Truncated mixed q-Fock space; requires Q_j(2) = Σ_i q_ij² < 1 for every j.
pub fn build_mixed(q: DMatrix<f64>, depth: usize) -> Result<QFockSpace> {
    check_qmatrix(&q)?;
    for j in 0..q.ncols() {
        let qj = q.column(j).norm_squared();
        if !(qj < 1.0) {
            return Err(Error::InvalidParameter(format!("Q_{}(2) = {qj} must be below 1", j + 1)));
        }
    }
    QFockSpace::build(q, depth)
}

impl QFockSpace {
    pub fn build(q: DMatrix<f64>, depth: usize) -> Result<Self> {
        check_qmatrix(&q)?;
        let n = q.nrows();
        if depth < 2 {
            return Err(Error::InvalidParameter(format!("depth must be at least 2, got {depth}")));
        }
        let mut total = 0usize;
        for d in 0..=depth {
            let size = n.checked_pow(d as u32).unwrap_or(usize::MAX);
            if size > DENSE_BLOCK {
                return Err(Error::BasisBudget { words: size, budget: DENSE_BLOCK });
            }
            total = total.saturating_add(size);
        }
        if total > BASIS_BUDGET {
            return Err(Error::BasisBudget { words: total, budget: BASIS_BUDGET });
        }

        let mut gram = vec![DMatrix::from_element(1, 1, 1.0)];
        for d in 1..=depth {
            let g = if d <= DIRECT_GRAM_MAX_DEGREE {
                gram_direct(&q, d)
            } else {
                gram_recursive(&q, d, &gram[d - 1])
            };
            gram.push(g);
        }
        let chol = gram
            .iter()
            .enumerate()
            .map(|(d, g)| Cholesky::new(g.clone()).ok_or(Error::GramFactorization(d)))
            .collect::<Result<Vec<_>>>()?;

        let mut ann = vec![Vec::with_capacity(depth); n];
        for d in 0..depth {
            let lo = n.pow(d as u32);
            for (j, a) in ann.iter_mut().enumerate() {
                // ℓ_j* = G_d⁻¹ ℓ_jᵀ G_{d+1}; rows of ℓ_jᵀ G_{d+1} are the rows j·w of G_{d+1}
                let rows = gram[d + 1].rows(j * lo, lo).into_owned();
                a.push(chol[d].solve(&rows));
            }
        }
        Ok(QFockSpace { n, depth, q, gram, chol, ann })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn q_matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn gram(&self, d: usize) -> &DMatrix<f64> {
        &self.gram[d]
    }

    pub fn dim(&self, d: usize) -> usize {
        self.n.pow(d as u32)
    }

    pub fn zero(&self) -> FockVector {
        (0..=self.depth).map(|d| DVector::zeros(self.dim(d))).collect()
    }

    pub fn vacuum(&self) -> FockVector {
        let mut v = self.zero();
        v[0][0] = 1.0;
        v
    }

    pub fn inner(&self, u: &FockVector, v: &FockVector) -> f64 {
        u.iter().zip(v).zip(&self.gram).map(|((a, b), g)| a.dot(&(g * b))).sum()
    }

    fn check_letter(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange { index: j, n_vars: self.n });
        }
        Ok(())
    }

    /// ℓ_j; the top degree is truncated away.
    pub fn create(&self, j: usize, v: &FockVector) -> Result<FockVector> {
        self.check_letter(j)?;
        let mut out = self.zero();
        for d in 0..self.depth {
            let lo = self.dim(d);
            out[d + 1].rows_mut((j - 1) * lo, lo).copy_from(&v[d]);
        }
        Ok(out)
    }

    pub fn annihilate(&self, j: usize, v: &FockVector) -> Result<FockVector> {
        self.check_letter(j)?;
        let mut out = self.zero();
        for d in 0..self.depth {
            out[d] = &self.ann[j - 1][d] * &v[d + 1];
        }
        Ok(out)
    }

    /// x_j = ℓ_j + ℓ_j*.
    pub fn apply_x(&self, j: usize, v: &FockVector) -> Result<FockVector> {
        let mut out = self.create(j, v)?;
        for (o, a) in out.iter_mut().zip(self.annihilate(j, v)?) {
            *o += a;
        }
        Ok(out)
    }

    /// x_{w₁}⋯x_{w_m} v, rightmost letter first.
    pub fn apply_word(&self, word: &[usize], v: &FockVector) -> Result<FockVector> {
        let mut cur = v.clone();
        for &j in word.iter().rev() {
            cur = self.apply_x(j, &cur)?;
        }
        Ok(cur)
    }

    /// ⟨x_{w₁}⋯x_{w_m}Ω, Ω⟩; exact while m ≤ 2D since the path never climbs above degree m/2.
    pub fn vacuum_moment(&self, word: &[usize]) -> Result<f64> {
        let limit = 2 * self.depth;
        if word.len() > limit {
            return Err(Error::DepthExceeded { len: word.len(), limit });
        }
        // climb only as far as needed to come back down
        let m = word.len();
        let mut cur = self.vacuum();
        for (step, &j) in word.iter().rev().enumerate() {
            self.check_letter(j)?;
            let mut next = self.annihilate(j, &cur)?;
            let ceiling = (step + 1).min(m - step - 1);
            let created = self.create(j, &cur)?;
            for d in 1..=ceiling.min(self.depth) {
                next[d] += &created[d];
            }
            cur = next;
        }
        Ok(cur[0][0])
    }

    /// p(X)Ω for a polynomial with real or complex coefficients (real part kept).
    fn poly_vacuum(&self, p: &NCPoly) -> Result<(FockVector, FockVector)> {
        let mut re = self.zero();
        let mut im = self.zero();
        for (w, c) in p.terms() {
            let v = self.apply_word(w, &self.vacuum())?;
            for d in 0..=self.depth {
                re[d] += &v[d] * c.re;
                im[d] += &v[d] * c.im;
            }
        }
        Ok((re, im))
    }

    /// Ξ_j: scalar Π_a q_{j w_a} on each basis word; for the all-q matrix this is q^d π_d.
    pub fn xi(&self, j: usize) -> Result<HSKernelOp> {
        self.check_letter(j)?;
        let blocks = (0..=self.depth)
            .map(|d| {
                DVector::from_fn(self.dim(d), |idx, _| {
                    word_of(idx, d, self.n).iter().map(|&i| self.q[(j - 1, i - 1)]).product()
                })
            })
            .collect();
        Ok(HSKernelOp { blocks })
    }

    /// ‖K − π₀‖²_HS over degrees 1..=D in the q-inner product.
    pub fn hs_distance_sq(&self, k: &HSKernelOp) -> f64 {
        let mut total = 0.0;
        for d in 1..=self.depth {
            // Tr(K* K) with K* = G⁻¹KᵀG for K diagonal in coordinates
            let kd = &k.blocks[d];
            let gk = DMatrix::from_fn(self.dim(d), self.dim(d), |r, c| self.gram[d][(r, c)] * kd[c]);
            let ktgk = DMatrix::from_fn(self.dim(d), self.dim(d), |r, c| kd[r] * gk[(r, c)]);
            total += self.chol[d].solve(&ktgk).trace();
        }
        total
    }

    /// |⟨x_j, p(X)⟩_φ − Σ_k ⟨A_{jk}, [∂_k p](X)⟩| for a kernel diagonal in the generators.
    ///
    /// The tensor a ⊗ b pairs with A as ⟨A(b*Ω), aΩ⟩, the rank-one identification
    /// a ⊗ b ↦ ⟨·, b*Ω⟩aΩ.
    pub fn stein_identity_residual(&self, kernels: &[HSKernelOp], p: &NCPoly, j: usize) -> Result<f64> {
        self.check_letter(j)?;
        if p.n_vars() != self.n || kernels.len() != self.n {
            return Err(Error::Dimension(format!(
                "need {} kernels and a polynomial in {} variables",
                self.n, self.n
            )));
        }
        let limit = self.depth.saturating_sub(1);
        if p.degree() > limit {
            return Err(Error::DepthExceeded { len: p.degree() + 1, limit: self.depth });
        }
        let xj = self.apply_x(j, &self.vacuum())?;
        let (pr, pi) = self.poly_vacuum(p)?;
        let lhs = C64::new(self.inner(&xj, &pr), -self.inner(&xj, &pi));

        let omega = self.vacuum();
        let mut rhs = C64::new(0.0, 0.0);
        let dq = p.difference_quotient(j)?;
        for ((a, b), c) in dq.terms() {
            let a_vec = self.apply_word(a, &omega)?;
            let b_rev: Vec<usize> = b.iter().rev().copied().collect();
            let b_vec = self.apply_word(&b_rev, &omega)?;
            let kb = kernels[j - 1].apply(&b_vec);
            rhs += c.conj() * self.inner(&kb, &a_vec);
        }
        Ok((lhs - rhs).norm())
    }

    /// Ξ_j for every generator: the Stein kernel A = Σ_j Ξ_j ⊗ E_jj.
    pub fn stein_kernel(&self) -> Vec<HSKernelOp> {
        (1..=self.n).map(|j| self.xi(j).expect("letter in range")).collect()
    }

    pub fn xi_report(&self) -> XiReport {
        let per_generator: Vec<f64> = self.stein_kernel().iter().map(|k| self.hs_distance_sq(k)).collect();
        let truncated_sq: f64 = per_generator.iter().sum();
        let closed: Option<Vec<f64>> = (0..self.n)
            .map(|j| {
                let qj = self.q.column(j).norm_squared();
                (qj < 1.0).then(|| qj / (1.0 - qj))
            })
            .collect();
        let closed_bound = closed.as_ref().map(|c| c.iter().sum::<f64>().sqrt());
        XiReport {
            per_generator_truncated: per_generator,
            per_generator_closed: closed,
            truncated_bound: truncated_sq.sqrt(),
            closed_bound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct XiReport {
    /// ‖Ξ_j − 1⊗1‖² summed over degrees 1..=D
    pub per_generator_truncated: Vec<f64>,
    /// Q_j(2)/(1 − Q_j(2)); None when some Q_j(2) ≥ 1
    pub per_generator_closed: Option<Vec<f64>>,
    /// (Σ_j ‖Ξ_j − 1⊗1‖²)^{1/2} on the truncation
    pub truncated_bound: f64,
    pub closed_bound: Option<f64>,
}

/// Operator diagonal in the word basis, stored per degree.
#[derive(Clone, Debug)]
pub struct HSKernelOp {
    pub blocks: Vec<DVector<f64>>,
}

impl HSKernelOp {
    pub fn apply(&self, v: &FockVector) -> FockVector {
        v.iter().zip(&self.blocks).map(|(x, k)| x.component_mul(k)).collect()
    }
}

/// Closed form of ‖Ξ_q − 1⊗1‖²: q²n/(1 − q²n), None when q²n ≥ 1.
pub fn xi_q_closed_form(n: usize, q: f64) -> Option<f64> {
    let r = q * q * n as f64;
    (r < 1.0).then(|| r / (1.0 - r))
}

/// Discrepancy bound |q|n/√(1 − q²n).
pub fn example1_bound(n: usize, q: f64) -> Option<f64> {
    let r = q * q * n as f64;
    (r < 1.0).then(|| q.abs() * n as f64 / (1.0 - r).sqrt())
}

/// Discrepancy bound (Σ_j Q_j(2)/(1 − Q_j(2)))^{1/2}.
pub fn example2_bound(q: &DMatrix<f64>) -> Option<f64> {
    let mut acc = 0.0;
    for j in 0..q.ncols() {
        let qj = q.column(j).norm_squared();
        if qj >= 1.0 {
            return None;
        }
        acc += qj / (1.0 - qj);
    }
    Some(acc.sqrt())
}

fn word_of(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut w = vec![0; d];
    for a in (0..d).rev() {
        w[a] = idx % n + 1;
        idx /= n;
    }
    w
}

fn index_of(w: &[usize], n: usize) -> usize {
    w.iter().fold(0, |acc, &l| acc * n + (l - 1))
}

// [G_d]_{u,v} = Σ over letter-preserving bijections σ (u_a ↦ v_{σ(a)}) of the
// product of q_{u_a u_b} over inverted pairs a < b, σ(a) > σ(b)
fn gram_direct(q: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let n = q.nrows();
    let size = n.pow(d as u32);
    let mut g = DMatrix::zeros(size, size);
    let perms = permutations(d);
    let mut v = vec![0; d];
    for row in 0..size {
        let u = word_of(row, d, n);
        for sigma in &perms {
            let mut weight = 1.0;
            for a in 0..d {
                v[sigma[a]] = u[a];
                for b in a + 1..d {
                    if sigma[a] > sigma[b] {
                        weight *= q[(u[a] - 1, u[b] - 1)];
                    }
                }
            }
            g[(row, index_of(&v, n))] += weight;
        }
    }
    g
}

// ⟨j·w, v⟩ = Σ_{k: v_k = j} Π_{a<k} q_{j v_a} ⟨w, v∖k⟩
fn gram_recursive(q: &DMatrix<f64>, d: usize, prev: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let size = n.pow(d as u32);
    let lo = size / n;
    let mut g = DMatrix::zeros(size, size);
    let mut rest = vec![0; d - 1];
    for col in 0..size {
        let v = word_of(col, d, n);
        for j in 1..=n {
            let mut weight = 1.0;
            for k in 0..d {
                if v[k] == j {
                    rest[..k].copy_from_slice(&v[..k]);
                    rest[k..].copy_from_slice(&v[k + 1..]);
                    let r = index_of(&rest, n);
                    for w in 0..lo {
                        g[((j - 1) * lo + w, col)] += weight * prev[(w, r)];
                    }
                }
                weight *= q[(j - 1, v[k] - 1)];
            }
        }
    }
    g
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    heap_permute(d, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, cur, out);
}

/// Σ over letter-compatible pair partitions of the product of q_{ij} over crossings.
pub fn q_moment_oracle(q: &DMatrix<f64>, word: &[usize]) -> Result<f64> {
    if word.len() > ORACLE_MAX_LEN {
        return Err(Error::DepthExceeded { len: word.len(), limit: ORACLE_MAX_LEN });
    }
    if let Some(&bad) = word.iter().find(|&&l| l == 0 || l > q.nrows()) {
        return Err(Error::IndexOutOfRange { index: bad, n_vars: q.nrows() });
    }
    if word.len() % 2 == 1 {
        return Ok(0.0);
    }
    let mut partner = vec![usize::MAX; word.len()];
    Ok(pairings(q, word, &mut partner))
}

fn pairings(q: &DMatrix<f64>, word: &[usize], partner: &mut [usize]) -> f64 {
    let Some(a) = partner.iter().position(|&p| p == usize::MAX) else {
        let mut weight = 1.0;
        for a in 0..word.len() {
            let b = partner[a];
            if b < a {
                continue;
            }
            // pairs (a,b), (c,e) cross when a < c < b < e
            for c in a + 1..b {
                if partner[c] > b {
                    weight *= q[(word[a] - 1, word[c] - 1)];
                }
            }
        }
        return weight;
    };
    let mut total = 0.0;
    for b in a + 1..word.len() {
        if partner[b] == usize::MAX && word[b] == word[a] {
            partner[a] = b;
            partner[b] = a;
            total += pairings(q, word, partner);
            partner[a] = usize::MAX;
            partner[b] = usize::MAX;
        }
    }
    total
}
