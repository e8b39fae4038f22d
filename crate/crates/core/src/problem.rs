//! Problem data: coefficients, sources, initial values and exact solutions.
//!
//! The 2D model is `u_t - eps Laplace(u) + a . grad(u) + b u = f` on the unit
//! square with homogeneous Dirichlet data; the 1D model is its analogue on
//! `(0, 1)`. Coefficients are time independent.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LdgError, Result};

pub type Coef1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Source1 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(x, t) -> [u, q]` with `q = eps u_x`.
pub type Exact1 = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

pub type Coef2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Source2 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// `(x, y, t) -> [u, p, q]` with `p = eps u_x`, `q = eps u_y`.
pub type Exact2 = Arc<dyn Fn(f64, f64, f64) -> [f64; 3] + Send + Sync>;

const SAMPLES: usize = 64;

/// Boundary layer factor `1 - exp(-(1 - x)/eps)` and `exp(-(1 - x)/eps)`,
/// both evaluated without cancellation.
fn layer(x: f64, eps: f64) -> (f64, f64) {
    let z = -(1.0 - x) / eps;
    (-z.exp_m1(), z.exp())
}

#[derive(Clone)]
pub struct ProblemDef2D {
    pub eps: f64,
    pub a1: Coef2,
    pub a2: Coef2,
    /// `d a1 / dx`, supplied analytically.
    pub a1_x: Coef2,
    /// `d a2 / dy`, supplied analytically.
    pub a2_y: Coef2,
    pub b: Coef2,
    pub f: Source2,
    pub u0: Coef2,
    pub exact: Option<Exact2>,
    /// Time derivative of the exact triple.
    pub exact_dt: Option<Exact2>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
}

impl std::fmt::Debug for ProblemDef2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemDef2D")
            .field("eps", &self.eps)
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .field("beta", &self.beta)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

fn constant2(c: f64) -> Coef2 {
    Arc::new(move |_, _| c)
}

impl ProblemDef2D {
    /// `a = (1, 1)`, `b = 1` with the given source and initial value.
    pub fn unit_coefficients(eps: f64, f: Source2, u0: Coef2) -> Self {
        ProblemDef2D {
            eps,
            a1: constant2(1.0),
            a2: constant2(1.0),
            a1_x: constant2(0.0),
            a2_y: constant2(0.0),
            b: constant2(1.0),
            f,
            u0,
            exact: None,
            exact_dt: None,
            alpha1: 1.0,
            alpha2: 1.0,
            beta: 1.0,
        }
    }

    /// Layer test problem with exact solution
    /// `u = e^t sin(pi x y) (1 - e^{-(1-x)/eps}) (1 - e^{-(1-y)/eps})`.
    pub fn layer_test(eps: f64) -> Self {
        let exact: Exact2 = Arc::new(move |x, y, t| {
            let (gx, ex) = layer(x, eps);
            let (gy, ey) = layer(y, eps);
            let s = (PI * x * y).sin();
            let c = (PI * x * y).cos();
            let et = t.exp();
            [
                et * s * gx * gy,
                et * gy * (eps * PI * y * c * gx - s * ex),
                et * gx * (eps * PI * x * c * gy - s * ey),
            ]
        });
        let f: Source2 = Arc::new(move |x, y, t| {
            let (gx, ex) = layer(x, eps);
            let (gy, ey) = layer(y, eps);
            let s = (PI * x * y).sin();
            let c = (PI * x * y).cos();
            // u_t + u contributes 2u; -eps u_xx + u_x collapses because the
            // layer factor solves -eps g'' + g' = 0 exactly.
            let along_x = eps * PI * PI * y * y * s * gx + 2.0 * PI * y * c * ex + PI * y * c * gx;
            let along_y = eps * PI * PI * x * x * s * gy + 2.0 * PI * x * c * ey + PI * x * c * gy;
            t.exp() * (2.0 * s * gx * gy + gy * along_x + gx * along_y)
        });
        let u0_exact = exact.clone();
        let u0: Coef2 = Arc::new(move |x, y| u0_exact(x, y, 0.0)[0]);
        let mut p = Self::unit_coefficients(eps, f, u0);
        p.exact_dt = Some(exact.clone());
        p.exact = Some(exact);
        p
    }

    /// Smooth polynomial problem `u = (1 + t) x(1-x) y(1-y)`; its exact
    /// triple lies in the discrete space for `k >= 2`.
    pub fn polynomial(eps: f64) -> Self {
        let exact: Exact2 = Arc::new(move |x, y, t| {
            let (xx, yy) = (x * (1.0 - x), y * (1.0 - y));
            let s = 1.0 + t;
            [s * xx * yy, eps * s * (1.0 - 2.0 * x) * yy, eps * s * xx * (1.0 - 2.0 * y)]
        });
        let exact_dt: Exact2 = Arc::new(move |x, y, _| {
            let (xx, yy) = (x * (1.0 - x), y * (1.0 - y));
            [xx * yy, eps * (1.0 - 2.0 * x) * yy, eps * xx * (1.0 - 2.0 * y)]
        });
        let f: Source2 = Arc::new(move |x, y, t| {
            let (xx, yy) = (x * (1.0 - x), y * (1.0 - y));
            let (dx, dy) = (1.0 - 2.0 * x, 1.0 - 2.0 * y);
            let s = 1.0 + t;
            xx * yy + s * (2.0 * eps * (xx + yy) + dx * yy + xx * dy + xx * yy)
        });
        let u0: Coef2 = Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y));
        let mut p = Self::unit_coefficients(eps, f, u0);
        p.exact = Some(exact);
        p.exact_dt = Some(exact_dt);
        p
    }

    /// Zero source and zero initial value.
    pub fn homogeneous(eps: f64) -> Self {
        let mut p = Self::unit_coefficients(eps, Arc::new(|_, _, _| 0.0), constant2(0.0));
        p.exact = Some(Arc::new(|_, _, _| [0.0; 3]));
        p
    }

    /// Sample `a1 >= alpha1`, `a2 >= alpha2` and
    /// `b - (a1_x + a2_y)/2 >= beta > 0` on a 64x64 grid of cell centres.
    pub fn check_coefficients(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(LdgError::Coefficients(format!("eps = {} must be positive", self.eps)));
        }
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.beta > 0.0) {
            return Err(LdgError::Coefficients(
                "lower bounds alpha1, alpha2, beta must be positive".into(),
            ));
        }
        for j in 0..SAMPLES {
            for i in 0..SAMPLES {
                let x = (i as f64 + 0.5) / SAMPLES as f64;
                let y = (j as f64 + 0.5) / SAMPLES as f64;
                let a1 = (self.a1)(x, y);
                let a2 = (self.a2)(x, y);
                let react = (self.b)(x, y) - 0.5 * ((self.a1_x)(x, y) + (self.a2_y)(x, y));
                if a1 < self.alpha1 || a2 < self.alpha2 || react < self.beta {
                    return Err(LdgError::Coefficients(format!(
                        "at ({x:.4}, {y:.4}): a = ({a1}, {a2}), b - div(a)/2 = {react}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct ProblemDef1D {
    pub eps: f64,
    pub a: Coef1,
    pub a_x: Coef1,
    pub b: Coef1,
    pub f: Source1,
    pub u0: Coef1,
    pub exact: Option<Exact1>,
    pub alpha: f64,
    pub beta: f64,
}

impl std::fmt::Debug for ProblemDef1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemDef1D")
            .field("eps", &self.eps)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemDef1D {
    pub fn unit_coefficients(eps: f64, f: Source1, u0: Coef1) -> Self {
        ProblemDef1D {
            eps,
            a: Arc::new(|_| 1.0),
            a_x: Arc::new(|_| 0.0),
            b: Arc::new(|_| 1.0),
            f,
            u0,
            exact: None,
            alpha: 1.0,
            beta: 1.0,
        }
    }

    /// Layer test problem `u = e^t sin(pi x / 2) (1 - e^{-(1-x)/eps})` with
    /// `a = b = 1`.
    pub fn layer_test(eps: f64) -> Self {
        let w = 0.5 * PI;
        let exact: Exact1 = Arc::new(move |x, t| {
            let (g, e) = layer(x, eps);
            let (s, c) = (w * x).sin_cos();
            let et = t.exp();
            [et * s * g, et * (eps * w * c * g - s * e)]
        });
        let f: Source1 = Arc::new(move |x, t| {
            let (g, e) = layer(x, eps);
            let (s, c) = (w * x).sin_cos();
            t.exp() * (2.0 * s * g + eps * w * w * s * g + 2.0 * w * c * e + w * c * g)
        });
        let ex = exact.clone();
        let u0: Coef1 = Arc::new(move |x| ex(x, 0.0)[0]);
        let mut p = Self::unit_coefficients(eps, f, u0);
        p.exact = Some(exact);
        p
    }

    /// `u = (1 + t) x (1 - x)`.
    pub fn polynomial(eps: f64) -> Self {
        let exact: Exact1 = Arc::new(move |x, t| {
            let s = 1.0 + t;
            [s * x * (1.0 - x), eps * s * (1.0 - 2.0 * x)]
        });
        let f: Source1 = Arc::new(move |x, t| {
            let xx = x * (1.0 - x);
            xx + (1.0 + t) * (2.0 * eps + (1.0 - 2.0 * x) + xx)
        });
        let mut p = Self::unit_coefficients(eps, f, Arc::new(|x| x * (1.0 - x)));
        p.exact = Some(exact);
        p
    }

    pub fn homogeneous(eps: f64) -> Self {
        let mut p = Self::unit_coefficients(eps, Arc::new(|_, _| 0.0), Arc::new(|_| 0.0));
        p.exact = Some(Arc::new(|_, _| [0.0; 2]));
        p
    }

    pub fn check_coefficients(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.alpha > 0.0 && self.beta > 0.0) {
            return Err(LdgError::Coefficients(
                "eps, alpha and beta must be positive".into(),
            ));
        }
        for i in 0..SAMPLES {
            let x = (i as f64 + 0.5) / SAMPLES as f64;
            let a = (self.a)(x);
            let react = (self.b)(x) - 0.5 * (self.a_x)(x);
            if a < self.alpha || react < self.beta {
                return Err(LdgError::Coefficients(format!(
                    "at x = {x:.4}: a = {a}, b - a_x/2 = {react}"
                )));
            }
        }
        Ok(())
    }
}
