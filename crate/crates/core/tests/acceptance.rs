//! Acceptance criteria. Every test prints one `PASS` or `FAIL` line and fails
//! on any violated check.

use std::io::Write;

use ldg_core::analysis::{l2_error_1d, l2_norm_1d, StudyRecord};
use ldg_core::basis::{gauss_legendre, legendre_values};
use ldg_core::ldg1d;
use ldg_core::ldg2d;
use ldg_core::mesh::{build_mesh_1d, max_abs_psi_prime, tensor_mesh};
use ldg_core::problem::{ProblemDef1D, ProblemDef2D};
use ldg_core::projection::{
    gr_minus_1d, gr_plus_1d, l2_project_1d, l2_project_triple, pi_minus_2d, pi_x_plus_2d, pi_y_plus_2d,
    uniform_space_1d,
};
use ldg_core::ritz::{ritz_project, ritz_rate_study, ritz_rhs};
use ldg_core::space::{FieldTriple, ScalarField, Space1D, Space2D};
use ldg_core::study::{run_sweep, table_preset, PresetOptions};
use ldg_core::timestep::{run_dg_time, run_theta, DgTimeConfig, SlabQuadrature, ThetaConfig};
use ldg_core::{MeshKind, MeshSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use MeshKind::{BType, BS, S};

/// Collects violated checks and prints the verdict line.
struct Verdict {
    id: u32,
    title: &'static str,
    failures: Vec<String>,
}

impl Verdict {
    fn new(id: u32, title: &'static str) -> Self {
        Verdict {
            id,
            title,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn rel(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let r = (got - want).abs() / want.abs();
        self.check(r <= tol, || {
            format!("{label}: {got:.4e} vs {want:.3e} ({:.1}% > {:.0}%)", 100.0 * r, 100.0 * tol)
        });
    }

    fn abs(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || format!("{label}: {got:.3} vs {want:.2} ± {tol}"));
    }

    // Written to the raw stream so the line shows without `--nocapture`.
    fn finish(self) {
        let mut out = std::io::stdout().lock();
        if self.failures.is_empty() {
            let _ = writeln!(out, "criterion {} ({}): PASS", self.id, self.title);
        } else {
            let _ = writeln!(out, "criterion {} ({}): FAIL", self.id, self.title);
            for f in &self.failures {
                let _ = writeln!(out, "    {f}");
            }
        }
        let _ = out.flush();
        assert!(self.failures.is_empty(), "criterion {} failed: {:#?}", self.id, self.failures);
    }
}

fn sweep(table: u32, opts: PresetOptions) -> Vec<StudyRecord> {
    let preset = table_preset(table, &opts).expect("preset");
    run_sweep(&preset.cases, preset.axis, &mut |_| {}).expect("sweep")
}

fn opts(k: Option<usize>, n_max: Option<usize>, n: Option<usize>) -> PresetOptions {
    PresetOptions {
        meshes: None,
        k,
        n_max,
        n,
        eps_list: None,
    }
}

fn find(rows: &[StudyRecord], mesh: MeshKind, pred: impl Fn(&StudyRecord) -> bool) -> &StudyRecord {
    rows.iter()
        .find(|r| r.mesh == mesh && pred(r))
        .unwrap_or_else(|| panic!("missing {mesh} row"))
}

const MESHES: [MeshKind; 3] = [S, BS, BType];

/// Reference rows `(N, [value, rate] per mesh)`; a rate of 0 marks "none".
type Row = (usize, [(f64, f64); 3]);

// The BS entry at N = 16 is printed as 1.14e-03 in the source table; its
// neighbours and its rate of 1.93 both put it at 1.14e-02.
const L2_K1: [Row; 5] = [
    (4, [(1.64e-1, 0.0), (1.62e-1, 0.0), (1.59e-1, 0.0)]),
    (8, [(4.39e-2, 1.90), (4.35e-2, 1.90), (4.35e-2, 1.87)]),
    (16, [(1.14e-2, 1.94), (1.14e-2, 1.93), (1.14e-2, 1.93)]),
    (32, [(2.93e-3, 1.97), (2.92e-3, 1.96), (2.92e-3, 1.96)]),
    (64, [(7.41e-4, 1.98), (7.40e-4, 1.98), (7.40e-4, 1.98)]),
];

const L2_K2: [Row; 4] = [
    (4, [(1.58e-2, 0.0), (1.59e-2, 0.0), (1.55e-2, 0.0)]),
    (8, [(2.09e-3, 2.91), (2.09e-3, 2.93), (2.10e-3, 2.89)]),
    (16, [(2.75e-4, 2.93), (2.74e-4, 2.93), (2.75e-4, 2.93)]),
    (32, [(3.52e-5, 2.97), (3.52e-5, 2.96), (3.52e-5, 2.97)]),
];

const ENERGY_K1: [Row; 5] = [
    (4, [(4.57e-1, 0.0), (3.77e-1, 0.0), (4.65e-1, 0.0)]),
    (8, [(2.65e-1, 1.89), (1.52e-1, 1.32), (1.68e-1, 1.47)]),
    (16, [(1.46e-1, 1.48), (5.76e-2, 1.39), (6.07e-2, 1.47)]),
    (32, [(7.35e-2, 1.46), (2.12e-2, 1.44), (2.17e-2, 1.48)]),
    (64, [(3.46e-2, 1.48), (7.64e-3, 1.47), (7.74e-3, 1.49)]),
];

const TIME_STEPS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];
const L2_TIME: [[f64; 4]; 3] = [
    [7.35e-3, 1.80e-3, 4.53e-4, 1.13e-4],
    [7.35e-3, 1.80e-3, 4.53e-4, 1.13e-4],
    [7.35e-3, 1.80e-3, 4.53e-4, 1.13e-4],
];
const ENERGY_TIME: [[f64; 4]; 3] = [
    [7.35e-3, 1.85e-3, 4.63e-4, 1.21e-4],
    [7.35e-3, 1.85e-3, 4.62e-4, 1.15e-4],
    [7.35e-3, 1.85e-3, 4.62e-4, 1.15e-4],
];

#[test]
fn criterion_1_space_l2_k1() {
    let mut v = Verdict::new(1, "space L2, k = 1, N = 4..64");
    let rows = sweep(2, opts(Some(1), Some(64), None));
    for (n, refs) in L2_K1 {
        for (m, (want, rate)) in MESHES.into_iter().zip(refs) {
            let r = find(&rows, m, |r| r.n == n);
            v.rel(&format!("{m} N={n} L2"), r.l2_error, want, 0.03);
            if rate > 0.0 {
                v.abs(&format!("{m} N={n} rate"), r.l2_rate.unwrap_or(f64::NAN), rate, 0.05);
            }
        }
    }
    v.finish();
}

#[test]
fn criterion_2_space_l2_k2() {
    let mut v = Verdict::new(2, "space L2, k = 2, N = 4..32");
    let rows = sweep(2, opts(Some(2), Some(32), None));
    for (n, refs) in L2_K2 {
        for (m, (want, rate)) in MESHES.into_iter().zip(refs) {
            let r = find(&rows, m, |r| r.n == n);
            v.rel(&format!("{m} N={n} L2"), r.l2_error, want, 0.03);
            if rate > 0.0 {
                v.abs(&format!("{m} N={n} rate"), r.l2_rate.unwrap_or(f64::NAN), rate, 0.1);
            }
        }
    }
    v.finish();
}

#[test]
fn criterion_3_space_energy_k1() {
    let mut v = Verdict::new(3, "space energy, k = 1, N = 4..64");
    let rows = sweep(3, opts(Some(1), Some(64), None));
    for (n, refs) in ENERGY_K1 {
        for (m, (want, rate)) in MESHES.into_iter().zip(refs) {
            let r = find(&rows, m, |r| r.n == n);
            v.rel(&format!("{m} N={n} energy"), r.energy_error, want, 0.05);
            if n == 64 {
                v.abs(&format!("{m} N={n} rate"), r.energy_rate.unwrap_or(f64::NAN), rate, 0.05);
            }
        }
    }
    v.finish();
}

#[test]
fn criterion_4_time_k3() {
    let mut v = Verdict::new(4, "time, k = 3, N = 64, dt = 0.5..0.0625");
    let rows = sweep(4, opts(None, None, Some(64)));
    for (mi, m) in MESHES.into_iter().enumerate() {
        for (di, &dt) in TIME_STEPS.iter().enumerate() {
            let r = find(&rows, m, |r| (r.dt - dt).abs() < 1e-12);
            v.rel(&format!("{m} dt={dt} L2"), r.l2_error, L2_TIME[mi][di], 0.05);
            v.rel(&format!("{m} dt={dt} energy"), r.energy_error, ENERGY_TIME[mi][di], 0.05);
            if di > 0 {
                v.abs(&format!("{m} dt={dt} L2 rate"), r.l2_rate.unwrap_or(f64::NAN), 2.0, 0.05);
                v.abs(&format!("{m} dt={dt} energy rate"), r.energy_rate.unwrap_or(f64::NAN), 2.0, 0.05);
            }
        }
    }
    v.finish();
}

#[test]
fn criterion_5_eps_robustness() {
    let mut v = Verdict::new(5, "eps robustness, k = 1, N = 128, eps = 1e-4..1e-11");
    let rows = sweep(6, opts(None, None, None));
    v.check(rows.len() == 24, || format!("expected 24 rows, got {}", rows.len()));
    let energy = [(S, 1.55e-2), (BS, 2.73e-3), (BType, 2.75e-3)];
    for r in &rows {
        v.check(r.n == 128, || format!("{} eps={:e} ran at N={}", r.mesh, r.eps, r.n));
        v.rel(&format!("{} eps={:.0e} L2", r.mesh, r.eps), r.l2_error, 1.86e-4, 0.03);
        let want = energy.iter().find(|(m, _)| *m == r.mesh).unwrap().1;
        v.rel(&format!("{} eps={:.0e} energy", r.mesh, r.eps), r.energy_error, want, 0.03);
    }
    v.finish();
}

fn space_2d(kind: MeshKind, n: usize, eps: f64, k: usize) -> Space2D {
    let spec = MeshSpec::new(kind, n, eps, (k + 2) as f64, 1.0).unwrap();
    Space2D::new(tensor_mesh(&spec), k)
}

fn map(a: f64, b: f64, xi: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * xi
}

fn property_checks(v: &mut Verdict) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // quadratic form and coercivity
    let eps = 1e-6;
    let problem = ProblemDef2D::layer_test(eps);
    for kind in MESHES {
        for k in 0..=2 {
            let sp = space_2d(kind, 8, eps, k);
            let sys = ldg2d::assemble_b(&problem, &sp).unwrap();
            let n = sys.field_len;
            let mut worst_identity: f64 = 0.0;
            let mut coercive = true;
            for _ in 0..100 {
                let z: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q = sys.quadratic_form(&z);
                let w = FieldTriple::from_vector(&z, sp.per_element());
                let norm = ldg2d::energy_norm_sq(&problem, &sp, &w, None);
                worst_identity = worst_identity.max((q - norm).abs() / norm);
                let mut u_only = z.clone();
                u_only[n..].iter_mut().for_each(|x| *x = 0.0);
                coercive &= q >= problem.beta * sys.mass.bilinear(&u_only, &u_only) * (1.0 - 1e-12);
            }
            v.check(worst_identity <= 1e-10, || {
                format!("{kind} k={k}: quadratic form off by {worst_identity:e}")
            });
            v.check(coercive, || format!("{kind} k={k}: coercivity violated"));
        }
    }

    // projection conditions
    let fine = gauss_legendre(12);
    for k in 0..=3 {
        let sp = uniform_space_1d(8, k);
        let m = gr_minus_1d(&sp, &f64::sin);
        let p = gr_plus_1d(&sp, &f64::sin);
        let l2 = l2_project_1d(&sp, &f64::sin);
        let mut worst: f64 = 0.0;
        for e in 0..8 {
            let (a, b) = sp.mesh.cell(e);
            worst = worst.max((sp.eval(&m, e, 1.0) - b.sin()).abs());
            worst = worst.max((sp.eval(&p, e, -1.0) - a.sin()).abs());
            for j in 0..=k {
                let moment = |f: &ScalarField| -> f64 {
                    fine.mapped(a, b)
                        .map(|(x, w)| {
                            let xi = (2.0 * x - a - b) / (b - a);
                            w * (sp.eval(f, e, xi) - x.sin()) * legendre_values(k, xi)[j]
                        })
                        .sum()
                };
                worst = worst.max(moment(&l2).abs());
                if j < k {
                    worst = worst.max(moment(&m).abs()).max(moment(&p).abs());
                }
            }
        }
        v.check(worst < 1e-12, || format!("1D projections k={k}: residual {worst:e}"));
    }
    let z = |x: f64, y: f64| (std::f64::consts::PI * x * y).sin();
    let rule = gauss_legendre(5);
    for k in 0..=3 {
        let sp = space_2d(BType, 4, 1e-3, k);
        let m = pi_minus_2d(&sp, &z);
        let px = pi_x_plus_2d(&sp, &z);
        let py = pi_y_plus_2d(&sp, &z);
        let mut worst: f64 = 0.0;
        for (i, j, c) in sp.mesh.cells() {
            let e = sp.mesh.index(i, j);
            worst = worst.max((sp.eval(&m, e, 1.0, 1.0) - z(c.x1, c.y1)).abs());
            let edge = |f: &ScalarField, vertical: bool, side: f64, n: usize| -> f64 {
                let at = if side > 0.0 { (c.x1, c.y1) } else { (c.x0, c.y0) };
                (0..rule.len())
                    .map(|q| {
                        let s = rule.nodes[q];
                        let (got, want) = if vertical {
                            (sp.eval(f, e, side, s), z(at.0, map(c.y0, c.y1, s)))
                        } else {
                            (sp.eval(f, e, s, side), z(map(c.x0, c.x1, s), at.1))
                        };
                        rule.weights[q] * (got - want) * legendre_values(k, s)[n]
                    })
                    .sum()
            };
            for n in 0..=k {
                if n < k {
                    worst = worst.max(edge(&m, true, 1.0, n).abs()).max(edge(&m, false, 1.0, n).abs());
                }
                worst = worst.max(edge(&px, true, -1.0, n).abs()).max(edge(&py, false, -1.0, n).abs());
            }
        }
        v.check(worst < 1e-12, || format!("2D projections k={k}: residual {worst:e}"));
    }

    // polynomial consistency: B w + M w_t = F for a discrete exact triple
    let eps = 1e-2;
    let problem = ProblemDef2D::polynomial(eps);
    let exact = problem.exact.clone().unwrap();
    let exact_dt = problem.exact_dt.clone().unwrap();
    for kind in MESHES {
        let sp = space_2d(kind, 4, eps, 2);
        let sys = ldg2d::assemble_b(&problem, &sp).unwrap();
        let t = 0.3;
        let w = l2_project_triple(&sp, &|x, y| exact(x, y, t)).to_vector();
        let wt = l2_project_triple(&sp, &|x, y| exact_dt(x, y, t)).to_vector();
        let bw = sys.operator.matvec(&w);
        let mwt = sys.mass.matvec(&wt);
        let f = ldg2d::rhs_vector(&problem, &sp, t);
        let d = (0..f.len()).map(|i| (bw[i] + mwt[i] - f[i]).abs()).fold(0.0, f64::max);
        v.check(d <= 1e-9, || format!("{kind}: polynomial consistency {d:e}"));
    }

    // mesh properties
    let ns = [8usize, 16, 32, 64, 128, 256, 512];
    let eps = 1e-8;
    let mut bs_ratio = Vec::new();
    for &n in &ns {
        let s = build_mesh_1d(&MeshSpec::new(S, n, eps, 3.0, 1.0).unwrap());
        let h = s.widths[n / 2];
        v.check(s.widths[n / 2..].iter().all(|w| (w - h).abs() <= 4.0 * f64::EPSILON), || {
            format!("S N={n}: fine widths differ")
        });
        let bs = build_mesh_1d(&MeshSpec::new(BS, n, eps, 3.0, 1.0).unwrap());
        let ratios: Vec<f64> = bs.widths[n / 2..].windows(2).map(|w| w[1] / w[0]).collect();
        v.check(ratios.iter().all(|&r| r <= 1.0), || format!("BS N={n}: width ratio above 1"));
        bs_ratio.push(ratios.iter().copied().fold(f64::INFINITY, f64::min));
        for e in [1e-4 / n as f64, 1e-8, 1e-11] {
            let spec = MeshSpec::new(BType, n, e, 3.0, 1.0).unwrap();
            let m = build_mesh_1d(&spec);
            let scale = spec.sigma * spec.eps / spec.alpha;
            v.check((1..=n / 2).all(|i| m.widths[n / 2 + i - 1] >= scale / (i + 1) as f64), || {
                format!("B-type N={n} eps={e:e}: width bound violated")
            });
        }
    }
    let spread = |c: &[f64]| c.iter().copied().fold(0.0, f64::max) / c.iter().copied().fold(f64::INFINITY, f64::min);
    v.check(bs_ratio.iter().all(|&c| c > 0.4) && spread(&bs_ratio) < 1.1, || {
        format!("BS width ratio bound not stable: {bs_ratio:?}")
    });
    for kind in MESHES {
        let c: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let spec = MeshSpec::new(kind, n, eps, 3.0, 1.0).unwrap();
                build_mesh_1d(&spec).min_width() / (eps / n as f64 * max_abs_psi_prime(&spec))
            })
            .collect();
        v.check(c.iter().all(|&x| x > 1.0) && spread(&c) < 1.2, || {
            format!("{kind}: min width constant not stable: {c:?}")
        });
    }
}

#[test]
fn criterion_6_property_suite() {
    let mut v = Verdict::new(6, "property suite");
    property_checks(&mut v);
    v.finish();
}

#[test]
fn criterion_7_ritz_projection() {
    let mut v = Verdict::new(7, "Ritz projection");
    let eps = 1e-8;
    let problem = ProblemDef2D::layer_test(eps);
    let rows = ritz_rate_study(&problem, BS, 1, 3.0, &[32, 64], 1.0).unwrap();
    let rate = rows[1].energy_rate.unwrap_or(f64::NAN);
    v.check(rate >= 1.4, || format!("BS energy rate {rate:.3} < 1.4"));

    let exact = problem.exact.clone().unwrap();
    let sp = space_2d(BS, 16, eps, 1);
    let sys = ldg2d::assemble_b(&problem, &sp).unwrap();
    let w = |x: f64, y: f64| exact(x, y, 1.0);
    let r = ritz_project(&problem, &sys, &sp, &w).unwrap().to_vector();
    let rhs = ritz_rhs(&problem, &sp, &w);
    let br = sys.operator.matvec(&r);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let z: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let res: f64 = z.iter().zip(rhs.iter().zip(&br)).map(|(z, (f, b))| z * (f - b)).sum();
        worst = worst.max(res.abs() / sys.quadratic_form(&z).sqrt());
    }
    v.check(worst <= 1e-8, || format!("Galerkin orthogonality residual {worst:e}"));
    v.finish();
}

fn space_1d(kind: MeshKind, n: usize, eps: f64, k: usize) -> Space1D {
    let spec = MeshSpec::new(kind, n, eps, (k + 2) as f64, 1.0).unwrap();
    Space1D::new(build_mesh_1d(&spec), k)
}

fn dg_final(problem: &ProblemDef1D, sp: &Space1D, r: usize, steps: usize, quad: SlabQuadrature) -> Vec<f64> {
    let sys = ldg1d::assemble_b(problem, sp).unwrap();
    let u0 = l2_project_1d(sp, &*problem.u0);
    let mut cfg = DgTimeConfig::new(r, 1.0, steps).unwrap();
    cfg.quadrature = quad;
    let load = |t| ldg1d::rhs_load(problem, sp, t);
    let out = run_dg_time(&sys, &u0.coeffs, &load, &cfg, &mut |_, _, _| {}).unwrap();
    out.final_state[..sys.field_len].to_vec()
}

#[test]
fn criterion_8_one_dimensional_schemes() {
    let mut v = Verdict::new(8, "1D theta scheme and DG in time");
    let eps = 1e-8;
    let problem = ProblemDef1D::layer_test(eps);
    let ex = problem.exact.clone().unwrap();
    let theta_error = |n: usize| {
        let sp = space_1d(BS, n, eps, 1);
        let sys = ldg1d::assemble_b(&problem, &sp).unwrap();
        let u0 = l2_project_1d(&sp, &*problem.u0);
        let cfg = ThetaConfig::new(0.5, 1.0, n).unwrap();
        let load = |t| ldg1d::rhs_load(&problem, &sp, t);
        let out = run_theta(&sys, &u0.coeffs, &load, &cfg, &mut |_| {}).unwrap();
        l2_error_1d(&sp, &ScalarField::from_coeffs(out.u_final, 2), &|x| ex(x, 1.0)[0])
    };
    let rate = (theta_error(32) / theta_error(64)).log2();
    v.check(rate >= 1.9, || format!("1D theta L2 rate {rate:.3} < 1.9"));

    let eps = 1e-4;
    let problem = ProblemDef1D::layer_test(eps);
    let ex = problem.exact.clone().unwrap();
    let sp = space_1d(BS, 16, eps, 3);
    let sys = ldg1d::assemble_b(&problem, &sp).unwrap();
    let u0 = l2_project_1d(&sp, &*problem.u0);
    let load = |t| ldg1d::rhs_load(&problem, &sp, t);
    let be = run_theta(&sys, &u0.coeffs, &load, &ThetaConfig::new(1.0, 1.0, 8).unwrap(), &mut |_| {}).unwrap();
    let dg0 = dg_final(&problem, &sp, 0, 8, SlabQuadrature::RadauRight);
    let diff: Vec<f64> = be.u_final.iter().zip(&dg0).map(|(a, b)| a - b).collect();
    let rel = l2_norm_1d(&sp, &ScalarField::from_coeffs(diff, 4))
        / l2_norm_1d(&sp, &ScalarField::from_coeffs(be.u_final.clone(), 4));
    v.check(rel <= 1e-9, || format!("DG r=0 differs from backward Euler by {rel:e}"));

    let dg_error = |steps| {
        let u = dg_final(&problem, &sp, 1, steps, SlabQuadrature::Gauss);
        l2_error_1d(&sp, &ScalarField::from_coeffs(u, 4), &|x| ex(x, 1.0)[0])
    };
    let rate = (dg_error(4) / dg_error(8)).log2();
    v.check(rate >= 1.9, || format!("DG r=1 temporal rate {rate:.3} < 1.9"));
    v.finish();
}
