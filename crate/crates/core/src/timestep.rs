//! Time integration of `M u_t + B w = F(t)`: the implicit theta scheme on
//! any assembled system and discontinuous Galerkin in time for 1D.

use crate::basis::{gauss_legendre, gauss_radau_right, legendre_values, QuadratureRule};
use crate::error::{LdgError, Result};
use crate::ldg2d::AssembledSystem;
use crate::linalg::{factorize, factorize_condensed, Factorization, SparseMatrix};

/// Number of equal steps covering `[0, t_final]` with steps no longer than
/// `dt_target` (up to a relative slack of `1e-9`).
pub fn step_count(t_final: f64, dt_target: f64) -> Result<usize> {
    if !(t_final > 0.0 && dt_target > 0.0 && t_final.is_finite() && dt_target.is_finite()) {
        return Err(LdgError::Config(format!(
            "need T > 0 and dt > 0, got T = {t_final}, dt = {dt_target}"
        )));
    }
    Ok(((t_final / dt_target) * (1.0 - 1e-9)).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    pub theta: f64,
    pub t_final: f64,
    pub steps: usize,
    /// Refactorize the step matrix every step; only useful as a check.
    pub refactor_each_step: bool,
}

impl ThetaConfig {
    pub fn new(theta: f64, t_final: f64, steps: usize) -> Result<Self> {
        if !(0.5..=1.0).contains(&theta) {
            return Err(LdgError::Domain {
                name: "theta",
                value: theta,
                expected: "[0.5, 1]",
            });
        }
        if steps == 0 || !(t_final > 0.0) {
            return Err(LdgError::Config(format!(
                "need T > 0 and at least one step, got T = {t_final}, M = {steps}"
            )));
        }
        Ok(ThetaConfig {
            theta,
            t_final,
            steps,
            refactor_each_step: false,
        })
    }

    /// Steps of length at most `dt_target`, shortened to divide `T`.
    pub fn with_dt(theta: f64, t_final: f64, dt_target: f64) -> Result<Self> {
        Self::new(theta, t_final, step_count(t_final, dt_target)?)
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        if m == self.steps {
            self.t_final
        } else {
            m as f64 * self.dt()
        }
    }
}

/// State handed to the observer after each theta step.
#[derive(Debug)]
pub struct ThetaStep<'a> {
    pub step: usize,
    pub t_prev: f64,
    pub t: f64,
    /// The full unknown at the combined level `theta t^m + (1 - theta) t^{m-1}`.
    pub theta_level: &'a [f64],
    /// `U^m` (u block only).
    pub u: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct ThetaOutcome {
    /// `U^M` (u block only).
    pub u_final: Vec<f64>,
    /// Full unknown of the last step at the combined level.
    pub last_theta_level: Vec<f64>,
    pub max_relative_residual: f64,
}

/// Run the theta scheme from the u-coefficients `u0`. `load(t)` returns the
/// u-block load vector at time `t`.
pub fn run_theta(
    system: &AssembledSystem,
    u0: &[f64],
    load: &dyn Fn(f64) -> Vec<f64>,
    cfg: &ThetaConfig,
    observer: &mut dyn FnMut(ThetaStep<'_>),
) -> Result<ThetaOutcome> {
    let n = system.field_len;
    if u0.len() != n {
        return Err(LdgError::Config(format!(
            "initial value has {} coefficients, expected {n}",
            u0.len()
        )));
    }
    let theta = cfg.theta;
    let dt = cfg.dt();
    let matrix = system.step_matrix(theta, dt);
    let mut lu = factorize_condensed(&matrix, n)?;
    let mut u_prev = u0.to_vec();
    let mut f_prev = load(0.0);
    let mut x = vec![0.0; system.dim()];
    let mut max_res: f64 = 0.0;
    let mut mu = vec![0.0; system.dim()];
    for m in 1..=cfg.steps {
        let (t_prev, t) = (cfg.time(m - 1), cfg.time(m));
        let f_now = load(t);
        mu[..n].copy_from_slice(&u_prev);
        let mut rhs = system.mass.matvec(&mu);
        for i in 0..n {
            rhs[i] += theta * dt * (theta * f_now[i] + (1.0 - theta) * f_prev[i]);
        }
        if cfg.refactor_each_step && m > 1 {
            lu = factorize_condensed(&matrix, n)?;
        }
        let (sol, report) = lu.solve_with_report(&rhs)?;
        max_res = max_res.max(report.relative_residual);
        x = sol;
        let u_now: Vec<f64> = (0..n)
            .map(|i| (x[i] - (1.0 - theta) * u_prev[i]) / theta)
            .collect();
        observer(ThetaStep {
            step: m,
            t_prev,
            t,
            theta_level: &x,
            u: &u_now,
        });
        u_prev = u_now;
        f_prev = f_now;
    }
    Ok(ThetaOutcome {
        u_final: u_prev,
        last_theta_level: x,
        max_relative_residual: max_res,
    })
}

/// Quadrature used for the load integral over each time slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabQuadrature {
    /// `r + 1` Gauss points, exact to degree `2r + 1`.
    Gauss,
    /// `r + 1` right Radau points, exact to degree `2r`; with `r = 0` it
    /// samples the load at the slab end like backward Euler.
    RadauRight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgTimeConfig {
    pub degree: usize,
    pub t_final: f64,
    pub steps: usize,
    pub quadrature: SlabQuadrature,
}

impl DgTimeConfig {
    pub fn new(degree: usize, t_final: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(t_final > 0.0) {
            return Err(LdgError::Config(format!(
                "need T > 0 and at least one step, got T = {t_final}, M = {steps}"
            )));
        }
        Ok(DgTimeConfig {
            degree,
            t_final,
            steps,
            quadrature: SlabQuadrature::Gauss,
        })
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    fn rule(&self) -> QuadratureRule {
        match self.quadrature {
            SlabQuadrature::Gauss => gauss_legendre(self.degree + 1),
            SlabQuadrature::RadauRight => gauss_radau_right(self.degree + 1),
        }
    }
}

/// Slab matrix of the DG-in-time scheme with a Legendre basis in time:
/// block `(b, a)` is `(int L_a' L_b + (-1)^{a+b}) M + delta_ab dt/(2b+1) B`.
pub fn dg_slab_matrix(system: &AssembledSystem, degree: usize, dt: f64) -> SparseMatrix {
    let d = system.dim();
    let r1 = degree + 1;
    let mut entries = Vec::new();
    for b in 0..r1 {
        for a in 0..r1 {
            // int_{-1}^{1} L_a' L_b = 2 when b < a and a - b is odd
            let stiff = if b < a && (a - b) % 2 == 1 { 2.0 } else { 0.0 };
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let cm = stiff + sign;
            if cm != 0.0 {
                for (r, c, v) in system.mass.triplets() {
                    entries.push((b * d + r, a * d + c, cm * v));
                }
            }
            if a == b {
                let cb = dt / (2 * b + 1) as f64;
                for (r, c, v) in system.operator.triplets() {
                    entries.push((b * d + r, a * d + c, cb * v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(r1 * d, r1 * d, entries)
}

#[derive(Debug, Clone)]
pub struct DgTimeOutcome {
    /// `U^{M,-}` (full unknown).
    pub final_state: Vec<f64>,
    pub max_relative_residual: f64,
}

/// Discontinuous Galerkin in time of degree `r`. `observer(m, t_m, U^{m,-})`
/// sees the full unknown at each slab end.
pub fn run_dg_time(
    system: &AssembledSystem,
    u0: &[f64],
    load: &dyn Fn(f64) -> Vec<f64>,
    cfg: &DgTimeConfig,
    observer: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<DgTimeOutcome> {
    let n = system.field_len;
    let d = system.dim();
    if u0.len() != n {
        return Err(LdgError::Config(format!(
            "initial value has {} coefficients, expected {n}",
            u0.len()
        )));
    }
    let r1 = cfg.degree + 1;
    let dt = cfg.dt();
    let lu: Factorization = factorize(&dg_slab_matrix(system, cfg.degree, dt))?;
    let rule = cfg.rule();
    let lvals: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| legendre_values(cfg.degree, s)).collect();
    let mut state = vec![0.0; d];
    state[..n].copy_from_slice(u0);
    let mut max_res: f64 = 0.0;
    for m in 1..=cfg.steps {
        let t0 = (m - 1) as f64 * dt;
        let mprev = system.mass.matvec(&state);
        let mut rhs = vec![0.0; r1 * d];
        for (q, &s) in rule.nodes.iter().enumerate() {
            let f = load(t0 + 0.5 * (s + 1.0) * dt);
            let w = 0.5 * dt * rule.weights[q];
            for b in 0..r1 {
                let c = w * lvals[q][b];
                for i in 0..n {
                    rhs[b * d + i] += c * f[i];
                }
            }
        }
        for b in 0..r1 {
            let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..d {
                rhs[b * d + i] += sign * mprev[i];
            }
        }
        let (y, report) = lu.solve_with_report(&rhs)?;
        max_res = max_res.max(report.relative_residual);
        // U^{m,-} = sum_a Y_a L_a(1)
        state.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..r1 {
            for i in 0..d {
                state[i] += y[a * d + i];
            }
        }
        let t = if m == cfg.steps { cfg.t_final } else { m as f64 * dt };
        observer(m, t, &state);
    }
    Ok(DgTimeOutcome {
        final_state: state,
        max_relative_residual: max_res,
    })
}
