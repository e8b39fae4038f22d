//! LDG discretization of the 2D problem in the first-order form
//! `u_t - p_x - q_y + a1 u_x + a2 u_y + b u = f`, `p = eps u_x`, `q = eps u_y`.
//!
//! Fluxes: `p_hat`, `q_hat` from the right/top neighbour, with a penalized
//! one-sided value `p^- - (eps/h) u^-` on the outflow boundary; `u_hat`
//! from the left/bottom with zero on the whole boundary; the convective
//! trace `u_tilde` from the left/bottom with zero at inflow.
//!
//! Matrices act on stacked `(u, p, q)` vectors: entry `(row, col)` of the
//! operator is `B(trial = e_col; test = e_row)`.

use crate::basis::ReferenceBasis;
use crate::error::Result;
use crate::linalg::{BlockAssembler, SparseMatrix};
use crate::problem::ProblemDef2D;
use crate::space::{FieldTriple, Space2D};

const DROP_REL: f64 = 1e-14;

/// Operator and mass matrices of a semi-discrete LDG system.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// The bilinear form `B`.
    pub operator: SparseMatrix,
    /// `<u, v>` embedded in the full multi-field size.
    pub mass: SparseMatrix,
    pub n_fields: usize,
    pub field_len: usize,
    pub per_element: usize,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.n_fields * self.field_len
    }

    /// `z^T B z`.
    pub fn quadratic_form(&self, z: &[f64]) -> f64 {
        self.operator.bilinear(z, z)
    }

    /// `M + theta dt B`, the matrix of one theta step at the combined level.
    pub fn step_matrix(&self, theta: f64, dt: f64) -> SparseMatrix {
        self.mass.add_scaled(&self.operator, theta * dt)
    }

    /// Embed a u-block load into a full-length vector.
    pub fn embed_load(&self, load: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[..self.field_len].copy_from_slice(load);
        v
    }
}

/// Reference tables shared by assembly and evaluation.
pub(crate) struct Tables {
    pub n1: usize,
    pub w: Vec<f64>,
    pub nodes: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Tables {
    pub fn new(basis: &ReferenceBasis) -> Self {
        Tables {
            n1: basis.len(),
            w: basis.rule.weights.clone(),
            nodes: basis.rule.nodes.clone(),
            v: basis.values.clone(),
            d: basis.derivs.clone(),
            left: basis.left.clone(),
            right: basis.right.clone(),
        }
    }

    pub fn nq(&self) -> usize {
        self.w.len()
    }
}

/// Assemble the LDG bilinear form and the u-mass matrix.
pub fn assemble_b(problem: &ProblemDef2D, space: &Space2D) -> Result<AssembledSystem> {
    problem.check_coefficients()?;
    let t = Tables::new(&space.basis);
    let n1 = t.n1;
    let nl = n1 * n1;
    let nq = t.nq();
    let ne = space.n_elements();
    let mesh = &space.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let eps = problem.eps;
    let ub = |e: usize| e;
    let pb = |e: usize| ne + e;
    let qb = |e: usize| 2 * ne + e;

    let mut asm = BlockAssembler::new(nl, 3 * ne);
    let mut mass_asm = BlockAssembler::new(nl, 3 * ne);

    let mut mass = vec![0.0; nl * nl];
    let mut uu = vec![0.0; nl * nl];
    let mut dx = vec![0.0; nl * nl];
    let mut dy = vec![0.0; nl * nl];
    let mut phi = vec![0.0; nl];
    let mut phx = vec![0.0; nl];
    let mut phy = vec![0.0; nl];

    for (i, j, cell) in mesh.cells() {
        let e = mesh.index(i, j);
        let (hx, hy) = (cell.hx(), cell.hy());
        let jac = 0.25 * hx * hy;
        mass.iter_mut().for_each(|x| *x = 0.0);
        uu.iter_mut().for_each(|x| *x = 0.0);
        dx.iter_mut().for_each(|x| *x = 0.0);
        dy.iter_mut().for_each(|x| *x = 0.0);
        for qy in 0..nq {
            let y = 0.5 * (cell.y0 + cell.y1) + 0.5 * hy * t.nodes[qy];
            for qx in 0..nq {
                let x = 0.5 * (cell.x0 + cell.x1) + 0.5 * hx * t.nodes[qx];
                let wq = t.w[qx] * t.w[qy] * jac;
                let a1 = (problem.a1)(x, y);
                let a2 = (problem.a2)(x, y);
                let react = (problem.b)(x, y) - (problem.a1_x)(x, y) - (problem.a2_y)(x, y);
                for b in 0..n1 {
                    for a in 0..n1 {
                        let l = a + n1 * b;
                        phi[l] = t.v[qx][a] * t.v[qy][b];
                        phx[l] = 2.0 / hx * t.d[qx][a] * t.v[qy][b];
                        phy[l] = 2.0 / hy * t.v[qx][a] * t.d[qy][b];
                    }
                }
                for l in 0..nl {
                    for m in 0..nl {
                        let pm = wq * phi[m];
                        mass[l * nl + m] += pm * phi[l];
                        uu[l * nl + m] += pm * (react * phi[l] - a1 * phx[l] - a2 * phy[l]);
                        dx[l * nl + m] += pm * phx[l];
                        dy[l * nl + m] += pm * phy[l];
                    }
                }
            }
        }
        asm.add(ub(e), ub(e), &uu, 1.0);
        asm.add(pb(e), pb(e), &mass, 1.0 / eps);
        asm.add(qb(e), qb(e), &mass, 1.0 / eps);
        // <u, s_x>, <u, r_y>
        asm.add(pb(e), ub(e), &dx, 1.0);
        asm.add(qb(e), ub(e), &dy, 1.0);
        // <p, v_x>, <q, v_y>
        asm.add(ub(e), pb(e), &dx, 1.0);
        asm.add(ub(e), qb(e), &dy, 1.0);
        mass_asm.add(ub(e), ub(e), &mass, 1.0);
    }

    // Edge blocks: outer(trace_test, trace_trial) integrated along the edge.
    let mut ll = vec![0.0; nl * nl];
    let mut lr = vec![0.0; nl * nl];
    let mut rl = vec![0.0; nl * nl];
    let mut rr = vec![0.0; nl * nl];
    let mut all = vec![0.0; nl * nl];
    let mut arl = vec![0.0; nl * nl];
    let mut tr_lo = vec![0.0; nl];
    let mut tr_hi = vec![0.0; nl];

    // Vertical edges x = x_e.
    let lam_x = eps / mesh.mesh_x.widths[nx - 1];
    for j in 0..ny {
        let (y0, y1) = mesh.mesh_y.cell(j);
        let hy = y1 - y0;
        for e in 0..=nx {
            let xe = mesh.mesh_x.points[e];
            for buf in [&mut ll, &mut lr, &mut rl, &mut rr, &mut all, &mut arl] {
                buf.iter_mut().for_each(|x| *x = 0.0);
            }
            for qy in 0..nq {
                let y = 0.5 * (y0 + y1) + 0.5 * hy * t.nodes[qy];
                let w = 0.5 * hy * t.w[qy];
                let a1 = (problem.a1)(xe, y);
                for b in 0..n1 {
                    for a in 0..n1 {
                        let l = a + n1 * b;
                        // left element seen at xi = +1, right element at xi = -1
                        tr_lo[l] = t.right[a] * t.v[qy][b];
                        tr_hi[l] = t.left[a] * t.v[qy][b];
                    }
                }
                edge_outer(w, a1, &tr_lo, &tr_hi, nl, &mut ll, &mut lr, &mut rl, &mut rr, &mut all, &mut arl);
            }
            if e == 0 {
                let r = mesh.index(0, j);
                asm.add(ub(r), pb(r), &rr, 1.0);
            } else if e == nx {
                let l = mesh.index(nx - 1, j);
                asm.add(ub(l), pb(l), &ll, -1.0);
                asm.add(ub(l), ub(l), &all, 1.0);
                asm.add(ub(l), ub(l), &ll, lam_x);
            } else {
                let l = mesh.index(e - 1, j);
                let r = mesh.index(e, j);
                // T2: u^-_L [s]
                asm.add(pb(r), ub(l), &rl, 1.0);
                asm.add(pb(l), ub(l), &ll, -1.0);
                // T3: p^+_R [v]
                asm.add(ub(r), pb(r), &rr, 1.0);
                asm.add(ub(l), pb(r), &lr, -1.0);
                // T4: -a1 u^-_L [v]
                asm.add(ub(r), ub(l), &arl, -1.0);
                asm.add(ub(l), ub(l), &all, 1.0);
            }
        }
    }

    // Horizontal edges y = y_e.
    let lam_y = eps / mesh.mesh_y.widths[ny - 1];
    for i in 0..nx {
        let (x0, x1) = mesh.mesh_x.cell(i);
        let hx = x1 - x0;
        for e in 0..=ny {
            let ye = mesh.mesh_y.points[e];
            for buf in [&mut ll, &mut lr, &mut rl, &mut rr, &mut all, &mut arl] {
                buf.iter_mut().for_each(|x| *x = 0.0);
            }
            for qx in 0..nq {
                let x = 0.5 * (x0 + x1) + 0.5 * hx * t.nodes[qx];
                let w = 0.5 * hx * t.w[qx];
                let a2 = (problem.a2)(x, ye);
                for b in 0..n1 {
                    for a in 0..n1 {
                        let l = a + n1 * b;
                        tr_lo[l] = t.v[qx][a] * t.right[b];
                        tr_hi[l] = t.v[qx][a] * t.left[b];
                    }
                }
                edge_outer(w, a2, &tr_lo, &tr_hi, nl, &mut ll, &mut lr, &mut rl, &mut rr, &mut all, &mut arl);
            }
            if e == 0 {
                let r = mesh.index(i, 0);
                asm.add(ub(r), qb(r), &rr, 1.0);
            } else if e == ny {
                let l = mesh.index(i, ny - 1);
                asm.add(ub(l), qb(l), &ll, -1.0);
                asm.add(ub(l), ub(l), &all, 1.0);
                asm.add(ub(l), ub(l), &ll, lam_y);
            } else {
                let l = mesh.index(i, e - 1);
                let r = mesh.index(i, e);
                asm.add(qb(r), ub(l), &rl, 1.0);
                asm.add(qb(l), ub(l), &ll, -1.0);
                asm.add(ub(r), qb(r), &rr, 1.0);
                asm.add(ub(l), qb(r), &lr, -1.0);
                asm.add(ub(r), ub(l), &arl, -1.0);
                asm.add(ub(l), ub(l), &all, 1.0);
            }
        }
    }

    Ok(AssembledSystem {
        operator: asm.finish(DROP_REL),
        mass: mass_asm.finish(DROP_REL),
        n_fields: 3,
        field_len: space.n_dofs(),
        per_element: nl,
    })
}

/// Accumulate the edge outer products at one quadrature point. Names read
/// `test side` then `trial side`; `lo` is the left/bottom element.
#[allow(clippy::too_many_arguments)]
fn edge_outer(
    w: f64,
    a: f64,
    lo: &[f64],
    hi: &[f64],
    nl: usize,
    ll: &mut [f64],
    lr: &mut [f64],
    rl: &mut [f64],
    rr: &mut [f64],
    all: &mut [f64],
    arl: &mut [f64],
) {
    for l in 0..nl {
        for m in 0..nl {
            let k = l * nl + m;
            ll[k] += w * lo[l] * lo[m];
            lr[k] += w * lo[l] * hi[m];
            rl[k] += w * hi[l] * lo[m];
            rr[k] += w * hi[l] * hi[m];
            all[k] += w * a * lo[l] * lo[m];
            arl[k] += w * a * hi[l] * lo[m];
        }
    }
}

/// Load vector `<f(t), v>` for the u-test block (length of one field).
pub fn rhs_load(problem: &ProblemDef2D, space: &Space2D, t: f64) -> Vec<f64> {
    let tb = Tables::new(&space.basis);
    let n1 = tb.n1;
    let nl = n1 * n1;
    let nq = tb.nq();
    let mut out = vec![0.0; space.n_dofs()];
    for (i, j, cell) in space.mesh.cells() {
        let e = space.mesh.index(i, j);
        let jac = 0.25 * cell.hx() * cell.hy();
        let dst = &mut out[e * nl..(e + 1) * nl];
        for qy in 0..nq {
            let y = 0.5 * (cell.y0 + cell.y1) + 0.5 * cell.hy() * tb.nodes[qy];
            for qx in 0..nq {
                let x = 0.5 * (cell.x0 + cell.x1) + 0.5 * cell.hx() * tb.nodes[qx];
                let fw = (problem.f)(x, y, t) * tb.w[qx] * tb.w[qy] * jac;
                for b in 0..n1 {
                    for a in 0..n1 {
                        dst[a + n1 * b] += fw * tb.v[qx][a] * tb.v[qy][b];
                    }
                }
            }
        }
    }
    out
}

/// Full-length right-hand side: `<f(t), v>` in the u block, zero elsewhere.
pub fn rhs_vector(problem: &ProblemDef2D, space: &Space2D, t: f64) -> Vec<f64> {
    let load = rhs_load(problem, space, t);
    let mut v = vec![0.0; 3 * load.len()];
    v[..load.len()].copy_from_slice(&load);
    v
}

/// Values of a field at the tensor quadrature points of element `e`,
/// ordered `qx + nq * qy`.
pub(crate) fn element_values(t: &Tables, coeffs: &[f64], out: &mut [f64]) {
    let n1 = t.n1;
    let nq = t.nq();
    for qy in 0..nq {
        for qx in 0..nq {
            let mut acc = 0.0;
            for b in 0..n1 {
                let mut row = 0.0;
                for a in 0..n1 {
                    row += coeffs[a + n1 * b] * t.v[qx][a];
                }
                acc += row * t.v[qy][b];
            }
            out[qx + nq * qy] = acc;
        }
    }
}

/// Traces on the edge `xi = side` (when `vertical`) or `eta = side`, at the
/// edge quadrature nodes.
pub(crate) fn edge_values(t: &Tables, coeffs: &[f64], vertical: bool, high: bool, out: &mut [f64]) {
    let n1 = t.n1;
    let side = if high { &t.right } else { &t.left };
    for (q, o) in out.iter_mut().enumerate().take(t.nq()) {
        let mut acc = 0.0;
        for b in 0..n1 {
            for a in 0..n1 {
                let c = coeffs[a + n1 * b];
                acc += if vertical {
                    c * side[a] * t.v[q][b]
                } else {
                    c * t.v[q][a] * side[b]
                };
            }
        }
        *o = acc;
    }
}

/// Squared energy norm of `w` (or of `exact - w` when an exact triple is
/// given), evaluated term by term:
/// `eps^-1 (|p|^2 + |q|^2) + |(b - a1_x/2 - a2_y/2)^{1/2} u|^2`
/// `+ sum 1/2 <a1, [u]^2> + <lambda, [u]^2>_{outflow}` and the same in `y`.
pub fn energy_norm_sq(
    problem: &ProblemDef2D,
    space: &Space2D,
    w: &FieldTriple,
    exact: Option<&dyn Fn(f64, f64) -> [f64; 3]>,
) -> f64 {
    let t = Tables::new(&space.basis);
    let nq = t.nq();
    let mesh = &space.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let eps = problem.eps;
    let ex = |x: f64, y: f64| exact.map_or([0.0; 3], |f| f(x, y));
    let mut uvals = vec![0.0; nq * nq];
    let mut pvals = vec![0.0; nq * nq];
    let mut qvals = vec![0.0; nq * nq];
    let mut total = 0.0;
    for (i, j, cell) in mesh.cells() {
        let e = mesh.index(i, j);
        element_values(&t, w.u.element(e), &mut uvals);
        element_values(&t, w.p.element(e), &mut pvals);
        element_values(&t, w.q.element(e), &mut qvals);
        let jac = 0.25 * cell.hx() * cell.hy();
        for qy in 0..nq {
            let y = 0.5 * (cell.y0 + cell.y1) + 0.5 * cell.hy() * t.nodes[qy];
            for qx in 0..nq {
                let x = 0.5 * (cell.x0 + cell.x1) + 0.5 * cell.hx() * t.nodes[qx];
                let k = qx + nq * qy;
                let [ue, pe, qe] = ex(x, y);
                let react = (problem.b)(x, y) - 0.5 * ((problem.a1_x)(x, y) + (problem.a2_y)(x, y));
                let du = ue - uvals[k];
                let dp = pe - pvals[k];
                let dq = qe - qvals[k];
                total += t.w[qx] * t.w[qy] * jac * ((dp * dp + dq * dq) / eps + react * du * du);
            }
        }
    }
    let mut lo = vec![0.0; nq];
    let mut hi = vec![0.0; nq];
    let lam_x = eps / mesh.mesh_x.widths[nx - 1];
    for j in 0..ny {
        let (y0, y1) = mesh.mesh_y.cell(j);
        for e in 0..=nx {
            let xe = mesh.mesh_x.points[e];
            if e > 0 {
                edge_values(&t, w.u.element(mesh.index(e - 1, j)), true, true, &mut lo);
            }
            if e < nx {
                edge_values(&t, w.u.element(mesh.index(e, j)), true, false, &mut hi);
            }
            for q in 0..nq {
                let y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * t.nodes[q];
                let wq = 0.5 * (y1 - y0) * t.w[q];
                let ue = ex(xe, y)[0];
                // jump of (exact - discrete); exact is continuous
                let jump = if e == 0 {
                    ue - hi[q]
                } else if e == nx {
                    -(ue - lo[q])
                } else {
                    lo[q] - hi[q]
                };
                let mut weight = 0.5 * (problem.a1)(xe, y);
                if e == nx {
                    weight += lam_x;
                }
                total += wq * weight * jump * jump;
            }
        }
    }
    let lam_y = eps / mesh.mesh_y.widths[ny - 1];
    for i in 0..nx {
        let (x0, x1) = mesh.mesh_x.cell(i);
        for e in 0..=ny {
            let ye = mesh.mesh_y.points[e];
            if e > 0 {
                edge_values(&t, w.u.element(mesh.index(i, e - 1)), false, true, &mut lo);
            }
            if e < ny {
                edge_values(&t, w.u.element(mesh.index(i, e)), false, false, &mut hi);
            }
            for q in 0..nq {
                let x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t.nodes[q];
                let wq = 0.5 * (x1 - x0) * t.w[q];
                let ue = ex(x, ye)[0];
                let jump = if e == 0 {
                    ue - hi[q]
                } else if e == ny {
                    -(ue - lo[q])
                } else {
                    lo[q] - hi[q]
                };
                let mut weight = 0.5 * (problem.a2)(x, ye);
                if e == ny {
                    weight += lam_y;
                }
                total += wq * weight * jump * jump;
            }
        }
    }
    total
}

/// Energy norm `|||w|||` of a discrete triple.
pub fn energy_norm(problem: &ProblemDef2D, space: &Space2D, w: &FieldTriple) -> f64 {
    energy_norm_sq(problem, space, w, None).sqrt()
}

/// `|||w_exact - w|||` with exact traces evaluated pointwise.
pub fn energy_error(
    problem: &ProblemDef2D,
    space: &Space2D,
    w: &FieldTriple,
    exact: &dyn Fn(f64, f64) -> [f64; 3],
) -> f64 {
    energy_norm_sq(problem, space, w, Some(exact)).sqrt()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::factorize;
    use crate::mesh::{tensor_mesh, MeshKind, MeshSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn space(kind: MeshKind, n: usize, eps: f64, k: usize) -> Space2D {
        let spec = MeshSpec::new(kind, n, eps, (k + 2) as f64, 1.0).unwrap();
        Space2D::new(tensor_mesh(&spec), k)
    }

    #[test]
    fn quadratic_form_equals_energy_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in MeshKind::ALL {
            for k in 0..=2 {
                for n in [4, 8] {
                    let eps = 1e-3;
                    let problem = ProblemDef2D::layer_test(eps);
                    let sp = space(kind, n, eps, k);
                    let sys = assemble_b(&problem, &sp).unwrap();
                    for _ in 0..100 {
                        let z: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let w = FieldTriple::from_vector(&z, sp.per_element());
                        let lhs = sys.quadratic_form(&z);
                        let rhs = energy_norm_sq(&problem, &sp, &w, None);
                        assert!(
                            (lhs - rhs).abs() <= 1e-10 * rhs,
                            "{kind} k={k} N={n}: {lhs} vs {rhs}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn coercive_in_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-6;
        let problem = ProblemDef2D::layer_test(eps);
        let sp = space(MeshKind::BS, 8, eps, 1);
        let sys = assemble_b(&problem, &sp).unwrap();
        for _ in 0..50 {
            let z: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = sys.field_len;
            let u_only: Vec<f64> = z[..n].iter().copied().chain(std::iter::repeat_n(0.0, 2 * n)).collect();
            let l2 = sys.mass.bilinear(&u_only, &u_only);
            assert!(sys.quadratic_form(&z) >= problem.beta * l2 * (1.0 - 1e-12));
        }
    }

    // With k = 2 the exact triple of the polynomial problem is discrete, so
    // B(w; z) = (f, v) for all z and the stationary system reproduces it.
    #[test]
    fn polynomial_solution_is_consistent() {
        let eps = 1e-2;
        let problem = ProblemDef2D::polynomial(eps);
        let exact = problem.exact.clone().unwrap();
        let exact_dt = problem.exact_dt.clone().unwrap();
        for kind in MeshKind::ALL {
            let sp = space(kind, 4, eps, 2);
            let sys = assemble_b(&problem, &sp).unwrap();
            let t = 0.3;
            // B w = F - M w_t
            let w = crate::projection::l2_project_triple(&sp, &|x, y| exact(x, y, t));
            let wt = crate::projection::l2_project_triple(&sp, &|x, y| exact_dt(x, y, t));
            let mut rhs = rhs_vector(&problem, &sp, t);
            let mwt = sys.mass.matvec(&wt.to_vector());
            rhs.iter_mut().zip(&mwt).for_each(|(r, m)| *r -= m);
            let bw = sys.operator.matvec(&w.to_vector());
            let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let res = bw.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-9 * scale.max(1.0), "{kind}: residual {res}");
            let lu = factorize(&sys.operator).unwrap();
            let sol = lu.solve(&rhs).unwrap();
            let diff = sol.iter().zip(w.to_vector()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff <= 1e-9, "{kind}: solution error {diff}");
        }
    }

    #[test]
    fn unit_source_load_is_cell_area_for_k0() {
        let sp = space(MeshKind::S, 8, 1e-4, 0);
        let problem = ProblemDef2D::unit_coefficients(
            1e-4,
            std::sync::Arc::new(|_, _, _| 1.0),
            std::sync::Arc::new(|_, _| 0.0),
        );
        let load = rhs_load(&problem, &sp, 0.0);
        for (i, j, c) in sp.mesh.cells() {
            let e = sp.mesh.index(i, j);
            assert!((load[e] - c.hx() * c.hy()).abs() <= 1e-15);
        }
    }

    #[test]
    fn sparsity_stays_within_stencil() {
        for k in 0..=2 {
            let sp = space(MeshKind::BType, 8, 1e-4, k);
            let sys = assemble_b(&ProblemDef2D::layer_test(1e-4), &sp).unwrap();
            let nl = (k + 1) * (k + 1);
            // own element plus one trace row or column per neighbour
            let widest = (0..sys.field_len).map(|r| sys.operator.row(r).0.len()).max().unwrap();
            assert!(widest <= 5 * nl + 4 * (k + 1), "k={k}: {widest}");
            // the modal mass matrix is diagonal
            assert_eq!(sys.mass.nnz(), sp.n_dofs());
        }
    }

    #[test]
    fn operator_does_not_depend_on_source() {
        let eps = 1e-4;
        let sp = space(MeshKind::S, 4, eps, 1);
        let a = assemble_b(&ProblemDef2D::layer_test(eps), &sp).unwrap();
        let b = assemble_b(&ProblemDef2D::polynomial(eps), &sp).unwrap();
        assert_eq!(a.operator, b.operator);
    }

    #[test]
    fn rejects_bad_coefficients() {
        let mut p = ProblemDef2D::layer_test(1e-4);
        p.b = std::sync::Arc::new(|_, _| -1.0);
        assert!(assemble_b(&p, &space(MeshKind::S, 4, 1e-4, 1)).is_err());
    }
}
