//! Legendre modal basis on the reference interval `[-1, 1]` and Gauss
//! quadrature rules.
//!
//! All cell and edge integrals in the crate go through the 5-point
//! Gauss-Legendre rule mapped affinely onto the physical cell.

use crate::mesh::Cell;

/// Nodes and weights of a quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterate `(node, weight)` mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = x;
    let mut d1 = 1.0;
    let mut d0 = 0.0;
    for m in 1..n {
        let m = m as f64;
        let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        let d2 = d0 + (2.0 * m + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss-Legendre rule with `n` points (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n > 0, "quadrature needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    QuadratureRule { nodes, weights }
}

/// The 5-point Gauss-Legendre rule, exact up to degree 9.
pub fn gauss_legendre_5() -> QuadratureRule {
    gauss_legendre(5)
}

/// Right-sided Gauss-Radau rule with `n` points (last node at `+1`),
/// exact up to degree `2n - 2`.
pub fn gauss_radau_right(n: usize) -> QuadratureRule {
    assert!(n > 0, "quadrature needs at least one point");
    if n == 1 {
        return QuadratureRule {
            nodes: vec![1.0],
            weights: vec![2.0],
        };
    }
    // Interior nodes are the roots of (P_{n-1} - P_n) / (1 - x); find them
    // with Newton on P_{n-1} - P_n started from Chebyshev-like guesses and
    // deflated against the root at +1.
    let f = |x: f64| {
        let (a, da) = legendre_pair(n - 1, x);
        let (b, db) = legendre_pair(n, x);
        (a - b, da - db)
    };
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let mut x = -(std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64 - 1.0)).cos();
        for _ in 0..200 {
            let (g, dg) = f(x);
            // deflate the known root at x = 1
            let h = g / (x - 1.0);
            let dh = (dg - h) / (x - 1.0);
            let dx = h / dh;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
    }
    nodes.push(1.0);
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let weights = nodes
        .iter()
        .map(|&x| {
            if x == 1.0 {
                2.0 / (n * n) as f64
            } else {
                let (p, _) = legendre_pair(n - 1, x);
                (1.0 + x) / ((n * n) as f64 * p * p)
            }
        })
        .collect();
    QuadratureRule { nodes, weights }
}

/// Values of `L_0..L_k` at `xi`.
pub fn legendre_values(k: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(xi);
    }
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * xi * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// Derivatives `L_0'..L_k'` at `xi`.
pub fn legendre_derivatives(k: usize, xi: f64) -> Vec<f64> {
    (0..=k).map(|n| legendre_pair(n, xi).1).collect()
}

/// Legendre polynomials of degree `0..=k` tabulated at the quadrature
/// nodes and at the endpoints of `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    pub degree: usize,
    pub rule: QuadratureRule,
    /// `values[q][n] = L_n(xi_q)`.
    pub values: Vec<Vec<f64>>,
    /// `derivs[q][n] = L_n'(xi_q)`.
    pub derivs: Vec<Vec<f64>>,
    /// `L_n(-1) = (-1)^n`.
    pub left: Vec<f64>,
    /// `L_n(1) = 1`.
    pub right: Vec<f64>,
}

impl ReferenceBasis {
    pub fn new(degree: usize) -> Self {
        Self::with_rule(degree, gauss_legendre_5())
    }

    pub fn with_rule(degree: usize, rule: QuadratureRule) -> Self {
        let values = rule.nodes.iter().map(|&x| legendre_values(degree, x)).collect();
        let derivs = rule
            .nodes
            .iter()
            .map(|&x| legendre_derivatives(degree, x))
            .collect();
        ReferenceBasis {
            degree,
            values,
            derivs,
            left: legendre_values(degree, -1.0),
            right: legendre_values(degree, 1.0),
            rule,
        }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `int_{-1}^{1} L_n^2 = 2 / (2n + 1)`.
    pub fn mass(&self, n: usize) -> f64 {
        2.0 / (2 * n + 1) as f64
    }
}

pub fn eval_basis_1d(basis: &ReferenceBasis, xi: f64) -> Vec<f64> {
    legendre_values(basis.degree, xi)
}

pub fn eval_basis_1d_derivative(basis: &ReferenceBasis, xi: f64) -> Vec<f64> {
    legendre_derivatives(basis.degree, xi)
}

/// Integrate `f` over `[a, b]` with the 5-point rule.
pub fn integrate_interval(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    gauss_legendre_5().mapped(a, b).map(|(x, w)| w * f(x)).sum()
}

/// Integrate `f` over a rectangular cell with the 5x5 tensor rule.
pub fn cell_integrate(f: impl Fn(f64, f64) -> f64, cell: &Cell) -> f64 {
    let rule = gauss_legendre_5();
    let mut acc = 0.0;
    for (y, wy) in rule.mapped(cell.y0, cell.y1) {
        for (x, wx) in rule.mapped(cell.x0, cell.x1) {
            acc += wx * wy * f(x, y);
        }
    }
    acc
}
