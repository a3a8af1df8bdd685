//! Small quadrature helpers shared by the measure and transform code.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Rule { nodes, weights }
    }

    /// Points and weights for the interval `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n` nodes on `[a, b]` clustered toward both endpoints (Chebyshev–Lobatto points).
///
/// The endpoints are reproduced exactly and the sequence is strictly increasing.
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && b > a);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut xs: Vec<f64> = (0..n)
        .map(|k| mid - half * (PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    xs[0] = a;
    xs[n - 1] = b;
    if n % 2 == 1 {
        xs[n / 2] = mid;
    }
    xs
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let h = (b - a) / (n - 1) as f64;
    let mut xs: Vec<f64> = (0..n).map(|k| a + h * k as f64).collect();
    xs[n - 1] = b;
    xs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=8 {
            let rule = Rule::new(n);
            for k in 0..(2 * n) {
                let got: f64 = rule.on(0.0, 2.0).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = 2f64.powi(k as i32 + 1) / (k as f64 + 1.0);
                assert!((got - want).abs() < 1e-12 * want.max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn chebyshev_grid_is_increasing_with_exact_endpoints() {
        let xs = chebyshev_grid(-2.0, 3.0, 101);
        assert_eq!(xs[0], -2.0);
        assert_eq!(xs[100], 3.0);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        // clustered: first cell much smaller than the middle one
        assert!(xs[1] - xs[0] < 0.05 * (xs[51] - xs[50]));
    }
}
