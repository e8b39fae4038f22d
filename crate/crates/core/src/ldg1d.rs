//! LDG discretization of `u_t - q_x + a u_x + b u = f`, `q = eps u_x` on
//! `(0, 1)` with homogeneous Dirichlet data. Same flux choices as the 2D
//! scheme; vectors are stacked `(u, q)`.

use crate::error::Result;
use crate::ldg2d::AssembledSystem;
use crate::linalg::BlockAssembler;
use crate::problem::ProblemDef1D;
use crate::space::{FieldPair, Space1D};

const DROP_REL: f64 = 1e-14;

/// Assemble the 1D LDG bilinear form and the u-mass matrix.
pub fn assemble_b(problem: &ProblemDef1D, space: &Space1D) -> Result<AssembledSystem> {
    problem.check_coefficients()?;
    let basis = &space.basis;
    let n1 = basis.len();
    let nq = basis.rule.len();
    let ne = space.n_elements();
    let eps = problem.eps;
    let ub = |e: usize| e;
    let qb = |e: usize| ne + e;
    let mut asm = BlockAssembler::new(n1, 2 * ne);
    let mut mass_asm = BlockAssembler::new(n1, 2 * ne);

    let mut mass = vec![0.0; n1 * n1];
    let mut uu = vec![0.0; n1 * n1];
    let mut dx = vec![0.0; n1 * n1];
    for e in 0..ne {
        let (x0, x1) = space.mesh.cell(e);
        let h = x1 - x0;
        mass.iter_mut().for_each(|v| *v = 0.0);
        uu.iter_mut().for_each(|v| *v = 0.0);
        dx.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..nq {
            let x = 0.5 * (x0 + x1) + 0.5 * h * basis.rule.nodes[q];
            let w = 0.5 * h * basis.rule.weights[q];
            let a = (problem.a)(x);
            let react = (problem.b)(x) - (problem.a_x)(x);
            let phi = &basis.values[q];
            let dphi: Vec<f64> = basis.derivs[q].iter().map(|d| 2.0 / h * d).collect();
            for l in 0..n1 {
                for m in 0..n1 {
                    let wm = w * phi[m];
                    mass[l * n1 + m] += wm * phi[l];
                    uu[l * n1 + m] += wm * (react * phi[l] - a * dphi[l]);
                    dx[l * n1 + m] += wm * dphi[l];
                }
            }
        }
        asm.add(ub(e), ub(e), &uu, 1.0);
        asm.add(qb(e), qb(e), &mass, 1.0 / eps);
        asm.add(qb(e), ub(e), &dx, 1.0);
        asm.add(ub(e), qb(e), &dx, 1.0);
        mass_asm.add(ub(e), ub(e), &mass, 1.0);
    }

    // Node blocks: outer(test trace, trial trace).
    let lo = &basis.right;
    let hi = &basis.left;
    let outer = |t: &[f64], s: &[f64]| -> Vec<f64> {
        let mut o = vec![0.0; n1 * n1];
        for l in 0..n1 {
            for m in 0..n1 {
                o[l * n1 + m] = t[l] * s[m];
            }
        }
        o
    };
    let ll = outer(lo, lo);
    let lr = outer(lo, hi);
    let rl = outer(hi, lo);
    let rr = outer(hi, hi);
    let lam = eps / space.mesh.widths[ne - 1];
    for node in 0..=ne {
        let a = (problem.a)(space.mesh.points[node]);
        if node == 0 {
            asm.add(ub(0), qb(0), &rr, 1.0);
        } else if node == ne {
            let l = ne - 1;
            asm.add(ub(l), qb(l), &ll, -1.0);
            asm.add(ub(l), ub(l), &ll, a + lam);
        } else {
            let (l, r) = (node - 1, node);
            asm.add(qb(r), ub(l), &rl, 1.0);
            asm.add(qb(l), ub(l), &ll, -1.0);
            asm.add(ub(r), qb(r), &rr, 1.0);
            asm.add(ub(l), qb(r), &lr, -1.0);
            asm.add(ub(r), ub(l), &rl, -a);
            asm.add(ub(l), ub(l), &ll, a);
        }
    }

    Ok(AssembledSystem {
        operator: asm.finish(DROP_REL),
        mass: mass_asm.finish(DROP_REL),
        n_fields: 2,
        field_len: space.n_dofs(),
        per_element: n1,
    })
}

/// Load vector `<f(t), v>` for the u-test block.
pub fn rhs_load(problem: &ProblemDef1D, space: &Space1D, t: f64) -> Vec<f64> {
    let basis = &space.basis;
    let n1 = basis.len();
    let mut out = vec![0.0; space.n_dofs()];
    for e in 0..space.n_elements() {
        let (x0, x1) = space.mesh.cell(e);
        let h = x1 - x0;
        for q in 0..basis.rule.len() {
            let x = 0.5 * (x0 + x1) + 0.5 * h * basis.rule.nodes[q];
            let fw = (problem.f)(x, t) * 0.5 * h * basis.rule.weights[q];
            for a in 0..n1 {
                out[e * n1 + a] += fw * basis.values[q][a];
            }
        }
    }
    out
}

/// Full-length right-hand side with zeros in the q block.
pub fn rhs_vector(problem: &ProblemDef1D, space: &Space1D, t: f64) -> Vec<f64> {
    let load = rhs_load(problem, space, t);
    let mut v = vec![0.0; 2 * load.len()];
    v[..load.len()].copy_from_slice(&load);
    v
}

fn trace(coeffs: &[f64], side: &[f64]) -> f64 {
    coeffs.iter().zip(side).map(|(c, s)| c * s).sum()
}

/// Squared energy norm of `w` (or of `exact - w`):
/// `eps^-1 |q|^2 + |(b - a_x/2)^{1/2} u|^2 + sum 1/2 a [u]^2 + lambda [u]_N^2`.
pub fn energy_norm_sq(
    problem: &ProblemDef1D,
    space: &Space1D,
    w: &FieldPair,
    exact: Option<&dyn Fn(f64) -> [f64; 2]>,
) -> f64 {
    let basis = &space.basis;
    let ne = space.n_elements();
    let eps = problem.eps;
    let ex = |x: f64| exact.map_or([0.0; 2], |f| f(x));
    let mut total = 0.0;
    for e in 0..ne {
        let (x0, x1) = space.mesh.cell(e);
        let h = x1 - x0;
        let cu = w.u.element(e);
        let cq = w.q.element(e);
        for q in 0..basis.rule.len() {
            let x = 0.5 * (x0 + x1) + 0.5 * h * basis.rule.nodes[q];
            let phi = &basis.values[q];
            let [ue, qe] = ex(x);
            let du = ue - trace(cu, phi);
            let dq = qe - trace(cq, phi);
            let react = (problem.b)(x) - 0.5 * (problem.a_x)(x);
            total += 0.5 * h * basis.rule.weights[q] * (dq * dq / eps + react * du * du);
        }
    }
    let lam = eps / space.mesh.widths[ne - 1];
    for node in 0..=ne {
        let x = space.mesh.points[node];
        let ue = ex(x)[0];
        let jump = if node == 0 {
            ue - trace(w.u.element(0), &basis.left)
        } else if node == ne {
            -(ue - trace(w.u.element(ne - 1), &basis.right))
        } else {
            trace(w.u.element(node - 1), &basis.right) - trace(w.u.element(node), &basis.left)
        };
        let mut weight = 0.5 * (problem.a)(x);
        if node == ne {
            weight += lam;
        }
        total += weight * jump * jump;
    }
    total
}

pub fn energy_norm(problem: &ProblemDef1D, space: &Space1D, w: &FieldPair) -> f64 {
    energy_norm_sq(problem, space, w, None).sqrt()
}

pub fn energy_error(
    problem: &ProblemDef1D,
    space: &Space1D,
    w: &FieldPair,
    exact: &dyn Fn(f64) -> [f64; 2],
) -> f64 {
    energy_norm_sq(problem, space, w, Some(exact)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh_1d, MeshKind, MeshSpec};
    use crate::projection::l2_project_pair;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(kind: MeshKind, n: usize, eps: f64, k: usize) -> Space1D {
        let spec = MeshSpec::new(kind, n, eps, (k + 2) as f64, 1.0).unwrap();
        Space1D::new(build_mesh_1d(&spec), k)
    }

    #[test]
    fn quadratic_form_equals_energy_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eps = 1e-4;
        let problem = ProblemDef1D::layer_test(eps);
        for kind in MeshKind::ALL {
            for k in 0..=3 {
                let sp = space(kind, 16, eps, k);
                let sys = assemble_b(&problem, &sp).unwrap();
                for _ in 0..20 {
                    let z: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let w = FieldPair::from_vector(&z, sp.per_element());
                    let lhs = sys.quadratic_form(&z);
                    let rhs = energy_norm_sq(&problem, &sp, &w, None);
                    assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{kind} k={k}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn coercive_in_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let eps = 1e-6;
        let problem = ProblemDef1D::layer_test(eps);
        let sp = space(MeshKind::BType, 32, eps, 2);
        let sys = assemble_b(&problem, &sp).unwrap();
        let n = sys.field_len;
        for _ in 0..50 {
            let z: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u_only: Vec<f64> = z[..n].iter().copied().chain(std::iter::repeat_n(0.0, n)).collect();
            let l2 = sys.mass.bilinear(&u_only, &u_only);
            assert!(sys.quadratic_form(&z) >= problem.beta * l2 * (1.0 - 1e-12));
        }
    }

    // A flux-only pair has norm eps^-1 |q|^2.
    #[test]
    fn flux_only_norm() {
        let eps = 1e-3;
        let problem = ProblemDef1D::layer_test(eps);
        let sp = space(MeshKind::S, 8, eps, 1);
        let w = l2_project_pair(&sp, &|x| [0.0, x]);
        let got = energy_norm_sq(&problem, &sp, &w, None);
        let want = 1.0 / (3.0 * eps);
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }

    // With k = 2 the exact pair of the polynomial problem is discrete:
    // B w = F - M w_t.
    #[test]
    fn polynomial_solution_is_consistent() {
        let eps = 1e-2;
        let problem = ProblemDef1D::polynomial(eps);
        let exact = problem.exact.clone().unwrap();
        for kind in MeshKind::ALL {
            let sp = space(kind, 8, eps, 2);
            let sys = assemble_b(&problem, &sp).unwrap();
            let t = 0.4;
            let w = l2_project_pair(&sp, &|x| exact(x, t)).to_vector();
            let wt = l2_project_pair(&sp, &|x| [x * (1.0 - x), 0.0]).to_vector();
            let bw = sys.operator.matvec(&w);
            let mwt = sys.mass.matvec(&wt);
            let f = rhs_vector(&problem, &sp, t);
            let d = (0..bw.len()).map(|i| (bw[i] + mwt[i] - f[i]).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-10, "{kind}: {d}");
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let mut problem = ProblemDef1D::homogeneous(1e-3);
        problem.b = std::sync::Arc::new(|_| 0.1);
        let sp = space(MeshKind::S, 4, 1e-3, 1);
        assert!(assemble_b(&problem, &sp).is_err());
    }
}
