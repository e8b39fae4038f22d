//! Ritz projection: the discrete triple `R w` with `B(R w; z) = B(w; z)` for
//! every discrete `z`, where `w` is a continuous exact triple.

use crate::analysis::l2_error_2d;
use crate::error::Result;
use crate::ldg2d::{self, AssembledSystem, Tables};
use crate::linalg::factorize_condensed;
use crate::mesh::{tensor_mesh, MeshKind, MeshSpec};
use crate::problem::ProblemDef2D;
use crate::space::{FieldTriple, Space2D};

/// The vector `B(w; e_l)` over all discrete basis triples `e_l`, with `w`
/// given pointwise. `w` is assumed continuous, so every trace is a point
/// value of `w`.
pub fn ritz_rhs(problem: &ProblemDef2D, space: &Space2D, w: &dyn Fn(f64, f64) -> [f64; 3]) -> Vec<f64> {
    let t = Tables::new(&space.basis);
    let n1 = t.n1;
    let nl = n1 * n1;
    let nq = t.nq();
    let ne = space.n_elements();
    let mesh = &space.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let eps = problem.eps;
    let n = space.n_dofs();
    let mut out = vec![0.0; 3 * n];
    let (ur, pr, qr) = (|e: usize| e * nl, |e: usize| n + e * nl, |e: usize| 2 * n + e * nl);

    for (i, j, cell) in mesh.cells() {
        let e = mesh.index(i, j);
        let (hx, hy) = (cell.hx(), cell.hy());
        let jac = 0.25 * hx * hy;
        for qy in 0..nq {
            let y = 0.5 * (cell.y0 + cell.y1) + 0.5 * hy * t.nodes[qy];
            for qx in 0..nq {
                let x = 0.5 * (cell.x0 + cell.x1) + 0.5 * hx * t.nodes[qx];
                let wq = t.w[qx] * t.w[qy] * jac;
                let [u, p, q] = w(x, y);
                let a1 = (problem.a1)(x, y);
                let a2 = (problem.a2)(x, y);
                let react = (problem.b)(x, y) - (problem.a1_x)(x, y) - (problem.a2_y)(x, y);
                for b in 0..n1 {
                    for a in 0..n1 {
                        let l = a + n1 * b;
                        let phi = t.v[qx][a] * t.v[qy][b];
                        let phx = 2.0 / hx * t.d[qx][a] * t.v[qy][b];
                        let phy = 2.0 / hy * t.v[qx][a] * t.d[qy][b];
                        out[ur(e) + l] += wq * (react * u * phi + (p - a1 * u) * phx + (q - a2 * u) * phy);
                        out[pr(e) + l] += wq * (p * phi / eps + u * phx);
                        out[qr(e) + l] += wq * (q * phi / eps + u * phy);
                    }
                }
            }
        }
    }

    // Vertical edges.
    let lam_x = eps / mesh.mesh_x.widths[nx - 1];
    for j in 0..ny {
        let (y0, y1) = mesh.mesh_y.cell(j);
        for ei in 0..=nx {
            let xe = mesh.mesh_x.points[ei];
            for q in 0..nq {
                let y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * t.nodes[q];
                let wq = 0.5 * (y1 - y0) * t.w[q];
                let [u, p, _] = w(xe, y);
                let a1 = (problem.a1)(xe, y);
                for b in 0..n1 {
                    for a in 0..n1 {
                        let l = a + n1 * b;
                        let lo = t.right[a] * t.v[q][b];
                        let hi = t.left[a] * t.v[q][b];
                        if ei == 0 {
                            out[ur(mesh.index(0, j)) + l] += wq * p * hi;
                        } else if ei == nx {
                            let le = mesh.index(nx - 1, j);
                            out[ur(le) + l] += wq * (-p + (a1 + lam_x) * u) * lo;
                        } else {
                            let (le, re) = (mesh.index(ei - 1, j), mesh.index(ei, j));
                            out[pr(re) + l] += wq * u * hi;
                            out[pr(le) + l] -= wq * u * lo;
                            out[ur(re) + l] += wq * (p - a1 * u) * hi;
                            out[ur(le) + l] -= wq * (p - a1 * u) * lo;
                        }
                    }
                }
            }
        }
    }

    // Horizontal edges.
    let lam_y = eps / mesh.mesh_y.widths[ny - 1];
    for i in 0..nx {
        let (x0, x1) = mesh.mesh_x.cell(i);
        for ej in 0..=ny {
            let ye = mesh.mesh_y.points[ej];
            for q in 0..nq {
                let x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t.nodes[q];
                let wq = 0.5 * (x1 - x0) * t.w[q];
                let [u, _, qv] = w(x, ye);
                let a2 = (problem.a2)(x, ye);
                for b in 0..n1 {
                    for a in 0..n1 {
                        let l = a + n1 * b;
                        let lo = t.v[q][a] * t.right[b];
                        let hi = t.v[q][a] * t.left[b];
                        if ej == 0 {
                            out[ur(mesh.index(i, 0)) + l] += wq * qv * hi;
                        } else if ej == ny {
                            let le = mesh.index(i, ny - 1);
                            out[ur(le) + l] += wq * (-qv + (a2 + lam_y) * u) * lo;
                        } else {
                            let (le, re) = (mesh.index(i, ej - 1), mesh.index(i, ej));
                            out[qr(re) + l] += wq * u * hi;
                            out[qr(le) + l] -= wq * u * lo;
                            out[ur(re) + l] += wq * (qv - a2 * u) * hi;
                            out[ur(le) + l] -= wq * (qv - a2 * u) * lo;
                        }
                    }
                }
            }
        }
    }
    debug_assert_eq!(out.len(), 3 * ne * nl);
    out
}

/// Solve `B(R w; z) = B(w; z)` for the Ritz projection of `w`.
pub fn ritz_project(
    problem: &ProblemDef2D,
    system: &AssembledSystem,
    space: &Space2D,
    w: &dyn Fn(f64, f64) -> [f64; 3],
) -> Result<FieldTriple> {
    let rhs = ritz_rhs(problem, space, w);
    let lu = factorize_condensed(&system.operator, system.field_len)?;
    let x = lu.solve(&rhs)?;
    Ok(FieldTriple::from_vector(&x, space.per_element()))
}

/// Errors of the Ritz projection of an exact solution at one `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RitzRate {
    pub n: usize,
    /// `|||w - R w|||`.
    pub energy_error: f64,
    /// `|u_t - (R w_t)_u|`.
    pub dt_l2_error: f64,
    pub energy_rate: Option<f64>,
    pub dt_rate: Option<f64>,
}

/// Ritz projection errors of the problem's exact solution at time `t`
/// across `ns`. On the S-mesh rates are taken against `N^{-1} ln N`.
pub fn ritz_rate_study(
    problem: &ProblemDef2D,
    kind: MeshKind,
    k: usize,
    sigma: f64,
    ns: &[usize],
    t: f64,
) -> Result<Vec<RitzRate>> {
    let exact = problem
        .exact
        .clone()
        .ok_or_else(|| crate::LdgError::Config("problem has no exact solution".into()))?;
    let exact_dt = problem.exact_dt.clone();
    let mut rows: Vec<RitzRate> = Vec::new();
    for &n in ns {
        let spec = MeshSpec::new(kind, n, problem.eps, sigma, problem.alpha1.min(problem.alpha2))?;
        let space = Space2D::new(tensor_mesh(&spec), k);
        let sys = ldg2d::assemble_b(problem, &space)?;
        let w = |x: f64, y: f64| exact(x, y, t);
        let r = ritz_project(problem, &sys, &space, &w)?;
        let energy_error = ldg2d::energy_error(problem, &space, &r, &w);
        let dt_l2_error = match &exact_dt {
            Some(d) => {
                let wt = |x: f64, y: f64| d(x, y, t);
                let rt = ritz_project(problem, &sys, &space, &wt)?;
                l2_error_2d(&space, &rt.u, &|x, y| wt(x, y)[0])
            }
            None => f64::NAN,
        };
        let (energy_rate, dt_rate) = match rows.last() {
            Some(prev) => {
                let scale = if kind == MeshKind::S {
                    let h = |m: usize| (m as f64).ln() / m as f64;
                    (h(prev.n) / h(n)).ln()
                } else {
                    (n as f64 / prev.n as f64).ln()
                };
                (
                    Some((prev.energy_error / energy_error).ln() / scale),
                    Some((prev.dt_l2_error / dt_l2_error).ln() / scale),
                )
            }
            None => (None, None),
        };
        rows.push(RitzRate {
            n,
            energy_error,
            dt_l2_error,
            energy_rate,
            dt_rate,
        });
    }
    Ok(rows)
}
