//! Local L² and Gauss–Radau projections.
//!
//! Every projection is a square system per element, posed on the reference
//! cell. Moments use the 5-point Gauss rule on cells and edges.

use crate::basis::{gauss_legendre_5, legendre_values, QuadratureRule};
use crate::linalg::dense_solve;
use crate::mesh::{build_mesh_1d, tensor_mesh, MeshKind, MeshSpec, Region};
use crate::error::Result;
use crate::space::{FieldPair, FieldTriple, ScalarField, Space1D, Space2D};

/// Which one-sided condition closes a Radau system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Right end (`x_j^-`).
    Minus,
    /// Left end (`x_{j-1}^+`).
    Plus,
}

impl Side {
    fn xi(self) -> f64 {
        match self {
            Side::Minus => 1.0,
            Side::Plus => -1.0,
        }
    }
}

fn norm_sq(m: usize) -> f64 {
    2.0 / (2 * m + 1) as f64
}

struct Tab {
    rule: QuadratureRule,
    /// `vals[q][a] = L_a(node_q)`
    vals: Vec<Vec<f64>>,
}

impl Tab {
    fn new(k: usize) -> Self {
        let rule = gauss_legendre_5();
        let vals = rule.nodes.iter().map(|&x| legendre_values(k, x)).collect();
        Tab { rule, vals }
    }
}

fn map(a: f64, b: f64, xi: f64) -> f64 {
    // exact endpoints, so traces never stray into a neighbour
    if xi == -1.0 {
        a
    } else if xi == 1.0 {
        b
    } else {
        0.5 * (a + b) + 0.5 * (b - a) * xi
    }
}

/// Local L² projection onto piecewise `P^k`.
pub fn l2_project_1d(space: &Space1D, z: &dyn Fn(f64) -> f64) -> ScalarField {
    let k = space.degree;
    let tab = Tab::new(k);
    let mut out = space.zero_field();
    for e in 0..space.n_elements() {
        let (x0, x1) = space.mesh.cell(e);
        let c = out.element_mut(e);
        for (q, &xi) in tab.rule.nodes.iter().enumerate() {
            let zw = z(map(x0, x1, xi)) * tab.rule.weights[q];
            for a in 0..=k {
                c[a] += zw * tab.vals[q][a] / norm_sq(a);
            }
        }
    }
    out
}

/// Local L² projection onto piecewise `Q^k`.
pub fn l2_project_2d(space: &Space2D, z: &dyn Fn(f64, f64) -> f64) -> ScalarField {
    let k = space.degree;
    let n1 = k + 1;
    let tab = Tab::new(k);
    let nq = tab.rule.len();
    let mut out = space.zero_field();
    for (i, j, cell) in space.mesh.cells() {
        let c = out.element_mut(space.mesh.index(i, j));
        for qy in 0..nq {
            let y = map(cell.y0, cell.y1, tab.rule.nodes[qy]);
            for qx in 0..nq {
                let x = map(cell.x0, cell.x1, tab.rule.nodes[qx]);
                let zw = z(x, y) * tab.rule.weights[qx] * tab.rule.weights[qy];
                for b in 0..n1 {
                    for a in 0..n1 {
                        c[a + n1 * b] +=
                            zw * tab.vals[qx][a] * tab.vals[qy][b] / (norm_sq(a) * norm_sq(b));
                    }
                }
            }
        }
    }
    out
}

/// Componentwise L² projection of a `(u, p, q)` closure.
pub fn l2_project_triple(space: &Space2D, z: &dyn Fn(f64, f64) -> [f64; 3]) -> FieldTriple {
    FieldTriple {
        u: l2_project_2d(space, &|x, y| z(x, y)[0]),
        p: l2_project_2d(space, &|x, y| z(x, y)[1]),
        q: l2_project_2d(space, &|x, y| z(x, y)[2]),
    }
}

/// Componentwise L² projection of a `(u, q)` closure.
pub fn l2_project_pair(space: &Space1D, z: &dyn Fn(f64) -> [f64; 2]) -> FieldPair {
    FieldPair {
        u: l2_project_1d(space, &|x| z(x)[0]),
        q: l2_project_1d(space, &|x| z(x)[1]),
    }
}

/// 1D Gauss–Radau projection: moments against `P^{k-1}` plus collocation
/// at one end. For `k = 0` only the collocation remains.
pub fn gr_project_1d(space: &Space1D, z: &dyn Fn(f64) -> f64, side: Side) -> ScalarField {
    let k = space.degree;
    let n1 = k + 1;
    let tab = Tab::new(k);
    let end = legendre_values(k, side.xi());
    let mut mat = vec![0.0; n1 * n1];
    for m in 0..k {
        mat[m * n1 + m] = norm_sq(m);
    }
    mat[k * n1..].copy_from_slice(&end);
    let mut out = space.zero_field();
    for e in 0..space.n_elements() {
        let (x0, x1) = space.mesh.cell(e);
        let mut rhs = vec![0.0; n1];
        for (q, &xi) in tab.rule.nodes.iter().enumerate() {
            let zw = z(map(x0, x1, xi)) * tab.rule.weights[q];
            for (m, r) in rhs.iter_mut().enumerate().take(k) {
                *r += zw * tab.vals[q][m];
            }
        }
        rhs[k] = z(if side == Side::Minus { x1 } else { x0 });
        out.element_mut(e).copy_from_slice(&dense_solve(n1, &mat, &rhs));
    }
    out
}

pub fn gr_minus_1d(space: &Space1D, z: &dyn Fn(f64) -> f64) -> ScalarField {
    gr_project_1d(space, z, Side::Minus)
}

pub fn gr_plus_1d(space: &Space1D, z: &dyn Fn(f64) -> f64) -> ScalarField {
    gr_project_1d(space, z, Side::Plus)
}

/// One condition row of a 2D projection in the reference cell.
enum Cond {
    /// Cell moment against `L_m(xi) L_n(eta)`.
    Cell(usize, usize),
    /// Moment against `L_n(eta)` on the vertical edge `xi = s`.
    VEdge(f64, usize),
    /// Moment against `L_m(xi)` on the horizontal edge `eta = s`.
    HEdge(f64, usize),
    /// Point value at `(xi, eta)`.
    Point(f64, f64),
}

fn project_2d_with(space: &Space2D, z: &dyn Fn(f64, f64) -> f64, conds: &[Cond]) -> ScalarField {
    let k = space.degree;
    let n1 = k + 1;
    let nl = n1 * n1;
    assert_eq!(conds.len(), nl);
    let tab = Tab::new(k);
    let nq = tab.rule.len();
    let mut mat = vec![0.0; nl * nl];
    for (r, cond) in conds.iter().enumerate() {
        for b in 0..n1 {
            for a in 0..n1 {
                let col = a + n1 * b;
                mat[r * nl + col] = match *cond {
                    Cond::Cell(m, n) => {
                        if a == m && b == n {
                            norm_sq(m) * norm_sq(n)
                        } else {
                            0.0
                        }
                    }
                    Cond::VEdge(s, n) => {
                        if b == n {
                            legendre_values(k, s)[a] * norm_sq(n)
                        } else {
                            0.0
                        }
                    }
                    Cond::HEdge(s, m) => {
                        if a == m {
                            legendre_values(k, s)[b] * norm_sq(m)
                        } else {
                            0.0
                        }
                    }
                    Cond::Point(sx, sy) => legendre_values(k, sx)[a] * legendre_values(k, sy)[b],
                };
            }
        }
    }
    let mut out = space.zero_field();
    let mut rhs = vec![0.0; nl];
    for (i, j, cell) in space.mesh.cells() {
        let xs: Vec<f64> = tab.rule.nodes.iter().map(|&t| map(cell.x0, cell.x1, t)).collect();
        let ys: Vec<f64> = tab.rule.nodes.iter().map(|&t| map(cell.y0, cell.y1, t)).collect();
        let px = |s: f64| map(cell.x0, cell.x1, s);
        let py = |s: f64| map(cell.y0, cell.y1, s);
        for (r, cond) in conds.iter().enumerate() {
            rhs[r] = match *cond {
                Cond::Cell(m, n) => {
                    let mut acc = 0.0;
                    for qy in 0..nq {
                        for qx in 0..nq {
                            acc += tab.rule.weights[qx]
                                * tab.rule.weights[qy]
                                * z(xs[qx], ys[qy])
                                * tab.vals[qx][m]
                                * tab.vals[qy][n];
                        }
                    }
                    acc
                }
                Cond::VEdge(s, n) => (0..nq)
                    .map(|q| tab.rule.weights[q] * z(px(s), ys[q]) * tab.vals[q][n])
                    .sum(),
                Cond::HEdge(s, m) => (0..nq)
                    .map(|q| tab.rule.weights[q] * z(xs[q], py(s)) * tab.vals[q][m])
                    .sum(),
                Cond::Point(sx, sy) => z(px(sx), py(sy)),
            };
        }
        let c = dense_solve(nl, &mat, &rhs);
        out.element_mut(space.mesh.index(i, j)).copy_from_slice(&c);
    }
    out
}

/// `Pi^-`: moments against `Q^{k-1}`, right- and top-edge moments against
/// `P^{k-1}`, and collocation at the top-right corner.
pub fn pi_minus_2d(space: &Space2D, z: &dyn Fn(f64, f64) -> f64) -> ScalarField {
    let k = space.degree;
    let mut conds = Vec::new();
    for n in 0..k {
        for m in 0..k {
            conds.push(Cond::Cell(m, n));
        }
    }
    for n in 0..k {
        conds.push(Cond::VEdge(1.0, n));
    }
    for m in 0..k {
        conds.push(Cond::HEdge(1.0, m));
    }
    conds.push(Cond::Point(1.0, 1.0));
    project_2d_with(space, z, &conds)
}

/// `Pi_x^+`: moments against `P^{k-1}(x) P^k(y)` plus left-edge moments
/// against `P^k(y)`.
pub fn pi_x_plus_2d(space: &Space2D, z: &dyn Fn(f64, f64) -> f64) -> ScalarField {
    let k = space.degree;
    let mut conds = Vec::new();
    for n in 0..=k {
        for m in 0..k {
            conds.push(Cond::Cell(m, n));
        }
    }
    for n in 0..=k {
        conds.push(Cond::VEdge(-1.0, n));
    }
    project_2d_with(space, z, &conds)
}

/// `Pi_y^+`: moments against `P^k(x) P^{k-1}(y)` plus bottom-edge moments
/// against `P^k(x)`.
pub fn pi_y_plus_2d(space: &Space2D, z: &dyn Fn(f64, f64) -> f64) -> ScalarField {
    let k = space.degree;
    let mut conds = Vec::new();
    for n in 0..k {
        for m in 0..=k {
            conds.push(Cond::Cell(m, n));
        }
    }
    for m in 0..=k {
        conds.push(Cond::HEdge(-1.0, m));
    }
    project_2d_with(space, z, &conds)
}

/// One row of a projection rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRate {
    pub n: usize,
    /// `|Pi^- u - u|` on the coarse region.
    pub u_coarse_error: f64,
    /// `eps^{-1/2} |Pi_x^+ p - p|` on the whole domain.
    pub p_error: f64,
    pub u_rate: Option<f64>,
    pub p_rate: Option<f64>,
}

/// Measure projection errors of a `(u, p, q)` closure across `ns`.
/// On the S-mesh rates are taken against `N^{-1} ln N`.
pub fn projection_rate_study(
    kind: MeshKind,
    k: usize,
    eps: f64,
    sigma: f64,
    ns: &[usize],
    z: &dyn Fn(f64, f64) -> [f64; 3],
) -> Result<Vec<ProjectionRate>> {
    let tab = Tab::new(k);
    let nq = tab.rule.len();
    let mut rows: Vec<ProjectionRate> = Vec::new();
    for &n in ns {
        let spec = MeshSpec::new(kind, n, eps, sigma, 1.0)?;
        let space = Space2D::new(tensor_mesh(&spec), k);
        let pu = pi_minus_2d(&space, &|x, y| z(x, y)[0]);
        let pp = pi_x_plus_2d(&space, &|x, y| z(x, y)[1]);
        let (mut eu, mut ep) = (0.0, 0.0);
        for (i, j, cell) in space.mesh.cells() {
            let e = space.mesh.index(i, j);
            let coarse = space.mesh.region(i, j) == Region::R11;
            let jac = 0.25 * cell.hx() * cell.hy();
            for qy in 0..nq {
                let eta = tab.rule.nodes[qy];
                for qx in 0..nq {
                    let xi = tab.rule.nodes[qx];
                    let w = jac * tab.rule.weights[qx] * tab.rule.weights[qy];
                    let [u, p, _] = z(map(cell.x0, cell.x1, xi), map(cell.y0, cell.y1, eta));
                    if coarse {
                        let d = space.eval(&pu, e, xi, eta) - u;
                        eu += w * d * d;
                    }
                    let d = space.eval(&pp, e, xi, eta) - p;
                    ep += w * d * d;
                }
            }
        }
        let u_err = eu.sqrt();
        let p_err = (ep / eps).sqrt();
        let (u_rate, p_rate) = match rows.last() {
            Some(prev) => {
                let scale = if kind == MeshKind::S {
                    let h = |m: usize| (m as f64).ln() / m as f64;
                    (h(prev.n) / h(n)).ln()
                } else {
                    (n as f64 / prev.n as f64).ln()
                };
                (
                    Some((prev.u_coarse_error / u_err).ln() / (n as f64 / prev.n as f64).ln()),
                    Some((prev.p_error / p_err).ln() / scale),
                )
            }
            None => (None, None),
        };
        rows.push(ProjectionRate {
            n,
            u_coarse_error: u_err,
            p_error: p_err,
            u_rate,
            p_rate,
        });
    }
    Ok(rows)
}

/// Uniform 1D space, useful for smooth-function checks.
pub fn uniform_space_1d(n: usize, k: usize) -> Space1D {
    let spec = MeshSpec::new(MeshKind::S, n, 1.0, 1.0, 1.0).expect("valid uniform mesh");
    Space1D::new(build_mesh_1d(&spec), k)
}
