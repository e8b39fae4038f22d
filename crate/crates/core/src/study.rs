//! Convergence studies: single runs, sweeps and the table presets.

use crate::analysis::{fill_rates, l2_error_1d, l2_error_2d, EnergyAccumulator, StudyRecord, SweepAxis, TableLayout};
use crate::error::{LdgError, Result};
use crate::ldg1d;
use crate::ldg2d;
use crate::mesh::{build_mesh_1d, tensor_mesh, MeshKind, MeshSpec};
use crate::problem::{ProblemDef1D, ProblemDef2D};
use crate::projection::{l2_project_1d, l2_project_2d};
use crate::space::{FieldPair, FieldTriple, ScalarField, Space1D, Space2D};
use crate::timestep::{run_dg_time, run_theta, step_count, DgTimeConfig, ThetaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// 2D layer solution `e^t sin(pi x y)` times outflow layers.
    Layer2D,
    /// 1D layer solution `e^t sin(pi x / 2)` times an outflow layer.
    Layer1D,
    /// `(1 + t)` times a quadratic bubble, in the chosen dimension.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScheme {
    Theta(f64),
    /// DG in time of the given degree (1D only).
    Dg(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `1/N` for `k <= 1`, `N^{-1.5}` for `k >= 2`.
    Auto,
    Fixed(f64),
}

/// Everything that defines one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseConfig {
    pub dim: usize,
    pub mesh: MeshKind,
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    pub scheme: TimeScheme,
    pub dt: StepSize,
    pub t_final: f64,
    /// `None` selects `k + 2`.
    pub sigma: Option<f64>,
    pub problem: ProblemKind,
}

impl CaseConfig {
    pub fn new(mesh: MeshKind, k: usize, n: usize, eps: f64) -> Self {
        CaseConfig {
            dim: 2,
            mesh,
            k,
            n,
            eps,
            scheme: TimeScheme::Theta(0.5),
            dt: StepSize::Auto,
            t_final: 1.0,
            sigma: None,
            problem: ProblemKind::Layer2D,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or((self.k + 2) as f64)
    }

    pub fn dt_target(&self) -> f64 {
        match self.dt {
            StepSize::Fixed(dt) => dt,
            StepSize::Auto if self.k >= 2 => (self.n as f64).powf(-1.5),
            StepSize::Auto => 1.0 / self.n as f64,
        }
    }

    pub fn steps(&self) -> Result<usize> {
        step_count(self.t_final, self.dt_target())
    }

    pub fn theta(&self) -> f64 {
        match self.scheme {
            TimeScheme::Theta(t) => t,
            TimeScheme::Dg(_) => f64::NAN,
        }
    }

    fn validate(&self) -> Result<()> {
        match (self.dim, self.problem) {
            (2, ProblemKind::Layer1D) | (1, ProblemKind::Layer2D) => {
                return Err(LdgError::Config(format!(
                    "problem {:?} does not match dimension {}",
                    self.problem, self.dim
                )))
            }
            (1, _) | (2, _) => {}
            (d, _) => return Err(LdgError::Config(format!("dimension must be 1 or 2, got {d}"))),
        }
        if let TimeScheme::Dg(_) = self.scheme {
            if self.dim != 1 {
                return Err(LdgError::Config("DG in time is only available in 1D".into()));
            }
        }
        Ok(())
    }
}

fn wrap(cfg: &CaseConfig, dt: f64) -> impl Fn(LdgError) -> LdgError + '_ {
    move |e| match e {
        LdgError::Singular { .. } | LdgError::Solver(_) => LdgError::Step {
            n: cfg.n,
            k: cfg.k,
            eps: cfg.eps,
            dt,
            source: Box::new(e),
        },
        other => other,
    }
}

/// Run one case and report its errors at `T` (rates left empty).
pub fn run_case(cfg: &CaseConfig) -> Result<StudyRecord> {
    cfg.validate()?;
    let spec = MeshSpec::new(cfg.mesh, cfg.n, cfg.eps, cfg.sigma(), 1.0)?;
    let steps = cfg.steps()?;
    let dt = cfg.t_final / steps as f64;
    let (l2_error, energy_error) = if cfg.dim == 2 {
        let problem = match cfg.problem {
            ProblemKind::Polynomial => ProblemDef2D::polynomial(cfg.eps),
            _ => ProblemDef2D::layer_test(cfg.eps),
        };
        run_2d(&problem, &Space2D::new(tensor_mesh(&spec), cfg.k), cfg, steps).map_err(wrap(cfg, dt))?
    } else {
        let problem = match cfg.problem {
            ProblemKind::Polynomial => ProblemDef1D::polynomial(cfg.eps),
            _ => ProblemDef1D::layer_test(cfg.eps),
        };
        run_1d(&problem, &Space1D::new(build_mesh_1d(&spec), cfg.k), cfg, steps).map_err(wrap(cfg, dt))?
    };
    Ok(StudyRecord {
        mesh: cfg.mesh,
        k: cfg.k,
        n: cfg.n,
        eps: cfg.eps,
        theta: cfg.theta(),
        dt,
        l2_error,
        energy_error,
        l2_rate: None,
        energy_rate: None,
    })
}

fn run_2d(problem: &ProblemDef2D, space: &Space2D, cfg: &CaseConfig, steps: usize) -> Result<(f64, f64)> {
    let exact = problem.exact.clone().expect("built-in problems carry an exact solution");
    let sys = ldg2d::assemble_b(problem, space)?;
    let u0 = l2_project_2d(space, &*problem.u0);
    let theta = cfg.theta();
    let tc = ThetaConfig::new(theta, cfg.t_final, steps)?;
    let dt = tc.dt();
    let mut acc = EnergyAccumulator::default();
    let per = space.per_element();
    let out = run_theta(&sys, &u0.coeffs, &|t| ldg2d::rhs_load(problem, space, t), &tc, &mut |s| {
        let w = FieldTriple::from_vector(s.theta_level, per);
        let combined = |x: f64, y: f64| {
            let a = exact(x, y, s.t);
            let b = exact(x, y, s.t_prev);
            [0, 1, 2].map(|c| theta * a[c] + (1.0 - theta) * b[c])
        };
        acc.add(dt, ldg2d::energy_error(problem, space, &w, &combined));
    })?;
    let u = ScalarField::from_coeffs(out.u_final, per);
    let l2 = l2_error_2d(space, &u, &|x, y| exact(x, y, cfg.t_final)[0]);
    Ok((l2, acc.total))
}

fn run_1d(problem: &ProblemDef1D, space: &Space1D, cfg: &CaseConfig, steps: usize) -> Result<(f64, f64)> {
    let exact = problem.exact.clone().expect("built-in problems carry an exact solution");
    let sys = ldg1d::assemble_b(problem, space)?;
    let u0 = l2_project_1d(space, &*problem.u0);
    let per = space.per_element();
    let load = |t| ldg1d::rhs_load(problem, space, t);
    let mut acc = EnergyAccumulator::default();
    let u_final = match cfg.scheme {
        TimeScheme::Theta(theta) => {
            let tc = ThetaConfig::new(theta, cfg.t_final, steps)?;
            let dt = tc.dt();
            let out = run_theta(&sys, &u0.coeffs, &load, &tc, &mut |s| {
                let w = FieldPair::from_vector(s.theta_level, per);
                let combined = |x: f64| {
                    let a = exact(x, s.t);
                    let b = exact(x, s.t_prev);
                    [0, 1].map(|c| theta * a[c] + (1.0 - theta) * b[c])
                };
                acc.add(dt, ldg1d::energy_error(problem, space, &w, &combined));
            })?;
            out.u_final
        }
        TimeScheme::Dg(r) => {
            let dc = DgTimeConfig::new(r, cfg.t_final, steps)?;
            let dt = dc.dt();
            // energy error sampled at slab ends
            let out = run_dg_time(&sys, &u0.coeffs, &load, &dc, &mut |_, t, state| {
                let w = FieldPair::from_vector(state, per);
                acc.add(dt, ldg1d::energy_error(problem, space, &w, &|x| exact(x, t)));
            })?;
            out.final_state[..sys.field_len].to_vec()
        }
    };
    let u = ScalarField::from_coeffs(u_final, per);
    let l2 = l2_error_1d(space, &u, &|x| exact(x, cfg.t_final)[0]);
    Ok((l2, acc.total))
}

/// Run a list of cases in order, then fill rates per contiguous group of
/// equal `(mesh, k)`.
pub fn run_sweep(cases: &[CaseConfig], axis: SweepAxis, progress: &mut dyn FnMut(&StudyRecord)) -> Result<Vec<StudyRecord>> {
    let mut out = Vec::with_capacity(cases.len());
    for c in cases {
        let r = run_case(c)?;
        progress(&r);
        out.push(r);
    }
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && out[end].mesh == out[start].mesh && out[end].k == out[start].k {
            end += 1;
        }
        fill_rates(&mut out[start..end], axis)?;
        start = end;
    }
    Ok(out)
}

/// A predefined sweep reproducing one of the published result tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePreset {
    pub table: u32,
    pub cases: Vec<CaseConfig>,
    pub axis: SweepAxis,
    pub layouts: Vec<TableLayout>,
}

/// Overrides applied to a preset grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetOptions {
    pub meshes: Option<Vec<MeshKind>>,
    pub k: Option<usize>,
    /// Largest N of the space sweeps.
    pub n_max: Option<usize>,
    /// Fixed N of the time and eps sweeps.
    pub n: Option<usize>,
    pub eps_list: Option<Vec<f64>>,
}

pub const SPACE_EPS: f64 = 1e-8;

/// Decades from `a` to `b`, both included, e.g. `1e-4..1e-11`.
pub fn eps_decades(a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(LdgError::Config(format!("eps sweep bounds must be positive: {a}:{b}")));
    }
    let (ea, eb) = (a.log10().round() as i32, b.log10().round() as i32);
    let step = if eb >= ea { 1 } else { -1 };
    let mut out = Vec::new();
    let mut e = ea;
    loop {
        out.push(10f64.powi(e));
        if e == eb {
            break;
        }
        e += step;
    }
    Ok(out)
}

/// Doubling sequence `a, 2a, ..., <= b`.
pub fn doubling(a: usize, b: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = a;
    while n <= b {
        out.push(n);
        n *= 2;
    }
    out
}

pub fn table_preset(table: u32, opts: &PresetOptions) -> Result<TablePreset> {
    let meshes = opts.meshes.clone().unwrap_or_else(|| MeshKind::ALL.to_vec());
    let mut cases = Vec::new();
    let (axis, layouts) = match table {
        2 | 3 => {
            let ks = opts.k.map(|k| vec![k]).unwrap_or_else(|| vec![1, 2]);
            let n_max = opts.n_max.unwrap_or(128);
            for &k in &ks {
                for &mesh in &meshes {
                    for n in doubling(4, n_max) {
                        cases.push(CaseConfig::new(mesh, k, n, SPACE_EPS));
                    }
                }
            }
            let layout = if table == 2 { TableLayout::SpaceL2 } else { TableLayout::SpaceEnergy };
            (SweepAxis::Space, vec![layout])
        }
        4 | 5 => {
            let k = opts.k.unwrap_or(3);
            let n = opts.n.unwrap_or(128);
            for &mesh in &meshes {
                for dt in [0.5, 0.25, 0.125, 0.0625] {
                    let mut c = CaseConfig::new(mesh, k, n, SPACE_EPS);
                    c.dt = StepSize::Fixed(dt);
                    cases.push(c);
                }
            }
            let layout = if table == 4 { TableLayout::TimeL2 } else { TableLayout::TimeEnergy };
            (SweepAxis::Time, vec![layout])
        }
        6 => {
            let k = opts.k.unwrap_or(1);
            let n = opts.n.unwrap_or(128);
            let eps_list = match &opts.eps_list {
                Some(l) => l.clone(),
                None => eps_decades(1e-4, 1e-11)?,
            };
            for &mesh in &meshes {
                for &eps in &eps_list {
                    cases.push(CaseConfig::new(mesh, k, n, eps));
                }
            }
            (SweepAxis::Eps, vec![TableLayout::Eps])
        }
        other => {
            return Err(LdgError::Config(format!("no preset for table {other}; expected 2 to 6")))
        }
    };
    Ok(TablePreset {
        table,
        cases,
        axis,
        layouts,
    })
}
