//! Layer-adapted meshes on the unit interval and their tensor products.
//!
//! The mesh is uniform on `[0, 1 - tau]` with `N/2` cells and graded on
//! `[1 - tau, 1]` with the remaining `N/2` cells. The grading comes from a
//! mesh generating function `lambda(t)` built on a function `phi` with
//! `phi(0) = 0`, `phi' > 0`, `phi'' >= 0`. Three choices of `phi` are
//! provided (Shishkin, Bakhvalov-Shishkin and a Bakhvalov-type mesh).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{LdgError, Result};

/// Which mesh-characterizing function drives the fine region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshKind {
    /// Shishkin mesh, `phi(t) = 2 t ln N`.
    S,
    /// Bakhvalov-Shishkin mesh, `phi(t) = -ln(1 - 2 (1 - 1/N) t)`.
    BS,
    /// Bakhvalov-type mesh, `phi(t) = -ln(1 - 2 (1 - eps) t)`.
    BType,
}

impl MeshKind {
    pub const ALL: [MeshKind; 3] = [MeshKind::S, MeshKind::BS, MeshKind::BType];

    pub fn label(self) -> &'static str {
        match self {
            MeshKind::S => "S-mesh",
            MeshKind::BS => "BS-mesh",
            MeshKind::BType => "B-type mesh",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshKind::S => "s",
            MeshKind::BS => "bs",
            MeshKind::BType => "btype",
        })
    }
}

impl FromStr for MeshKind {
    type Err = LdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" | "shishkin" => Ok(MeshKind::S),
            "bs" => Ok(MeshKind::BS),
            "btype" | "b-type" | "b" => Ok(MeshKind::BType),
            other => Err(LdgError::Config(format!("unknown mesh kind `{other}`"))),
        }
    }
}

/// Parameters of a layer-adapted mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub kind: MeshKind,
    /// Cells per direction; even and at least 4.
    pub n: usize,
    pub eps: f64,
    pub sigma: f64,
    pub alpha: f64,
}

impl MeshSpec {
    pub fn new(kind: MeshKind, n: usize, eps: f64, sigma: f64, alpha: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(LdgError::InvalidMesh(format!(
                "N must be even and at least 4, got {n}"
            )));
        }
        for (name, value) in [("eps", eps), ("sigma", sigma), ("alpha", alpha)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LdgError::InvalidMesh(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(MeshSpec {
            kind,
            n,
            eps,
            sigma,
            alpha,
        })
    }

    /// Set when `eps > 1/N`; the mesh is still built but the layer is not
    /// really resolved in the singularly perturbed sense.
    pub fn coarse_eps_warning(&self) -> bool {
        self.eps > 1.0 / self.n as f64
    }

    fn scale(&self) -> f64 {
        self.sigma * self.eps / self.alpha
    }

    /// The function `phi` of the mesh kind, valid on `[0, 1/2]`.
    pub fn phi(&self, t: f64) -> f64 {
        let n = self.n as f64;
        match self.kind {
            MeshKind::S => 2.0 * t * n.ln(),
            MeshKind::BS => -(-2.0 * (1.0 - 1.0 / n) * t).ln_1p(),
            MeshKind::BType => -(-2.0 * (1.0 - self.eps) * t).ln_1p(),
        }
    }

    /// Mesh characterizing function `psi = exp(-phi)` in closed form.
    pub fn psi(&self, t: f64) -> f64 {
        let n = self.n as f64;
        match self.kind {
            MeshKind::S => n.powf(-2.0 * t),
            MeshKind::BS => 1.0 - 2.0 * (1.0 - 1.0 / n) * t,
            MeshKind::BType => 1.0 - 2.0 * (1.0 - self.eps) * t,
        }
    }

    /// `phi(1/2)`: `ln N` for the S- and BS-mesh, `ln(1/eps)` for B-type.
    pub fn phi_half(&self) -> f64 {
        match self.kind {
            MeshKind::S | MeshKind::BS => (self.n as f64).ln(),
            MeshKind::BType => -self.eps.ln(),
        }
    }

    fn tau_is_clamped(&self) -> bool {
        self.scale() * self.phi_half() >= 0.5
    }
}

/// Transition point offset `tau = min(1/2, sigma eps / alpha * phi(1/2))`.
pub fn transition_tau(spec: &MeshSpec) -> f64 {
    (spec.scale() * spec.phi_half()).min(0.5)
}

/// Evaluate the mesh generating function at `t` in `[0, 1]`.
///
/// When `tau` is clamped to `1/2` the fine branch is rescaled to
/// `1 - tau phi(1-t) / phi(1/2)`, which keeps `lambda` continuous and
/// monotone; otherwise it is `1 - (sigma eps / alpha) phi(1-t)`.
pub fn mesh_generating_lambda(spec: &MeshSpec, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LdgError::Domain {
            name: "t",
            value: t,
            expected: "[0, 1]",
        });
    }
    let tau = transition_tau(spec);
    Ok(lambda_unchecked(spec, tau, t))
}

fn lambda_unchecked(spec: &MeshSpec, tau: f64, t: f64) -> f64 {
    if t <= 0.5 {
        2.0 * (1.0 - tau) * t
    } else if spec.tau_is_clamped() {
        1.0 - tau * spec.phi(1.0 - t) / spec.phi_half()
    } else {
        1.0 - spec.scale() * spec.phi(1.0 - t)
    }
}

/// `max |psi'|` on `[0, 1/2]` with explicit constants.
pub fn max_abs_psi_prime(spec: &MeshSpec) -> f64 {
    let n = spec.n as f64;
    match spec.kind {
        MeshKind::S => 2.0 * n.ln(),
        MeshKind::BS => 2.0 * (1.0 - 1.0 / n),
        MeshKind::BType => 2.0 * (1.0 - spec.eps),
    }
}

/// A realized one-dimensional layer-adapted mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    /// Nodes `x_0 = 0 < x_1 < ... < x_N = 1`.
    pub points: Vec<f64>,
    pub tau: f64,
    /// `widths[i-1] = x_i - x_{i-1}`.
    pub widths: Vec<f64>,
    pub spec: MeshSpec,
}

impl Mesh1D {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Endpoints of cell `i` (0-based).
    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.points[i], self.points[i + 1])
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True for cells in the graded layer region `[1 - tau, 1]`.
    pub fn is_fine(&self, i: usize) -> bool {
        i >= self.spec.n / 2
    }

    /// Write the nodes as `i x_i`, one per line, 17 significant digits.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, x) in self.points.iter().enumerate() {
            writeln!(out, "{i} {x:.16e}")?;
        }
        Ok(())
    }
}

pub fn build_mesh_1d(spec: &MeshSpec) -> Mesh1D {
    let n = spec.n;
    let tau = transition_tau(spec);
    let mut points: Vec<f64> = (0..=n)
        .map(|i| lambda_unchecked(spec, tau, i as f64 / n as f64))
        .collect();
    points[0] = 0.0;
    points[n] = 1.0;
    let widths = points.windows(2).map(|w| w[1] - w[0]).collect();
    Mesh1D {
        points,
        tau,
        widths,
        spec: *spec,
    }
}

/// Weighted layer quantity `min(h_i/eps, 1) exp(-alpha (1 - x_i) / (sigma eps))`
/// for `i = N/2+1, ..., N`.
pub fn layer_diagnostic_theta(mesh: &Mesh1D) -> Vec<f64> {
    let spec = &mesh.spec;
    let n = spec.n;
    ((n / 2 + 1)..=n)
        .map(|i| {
            let h = mesh.widths[i - 1];
            let x = mesh.points[i];
            (h / spec.eps).min(1.0) * (-spec.alpha * (1.0 - x) / (spec.sigma * spec.eps)).exp()
        })
        .collect()
}

/// Subregions of the unit square split at `1 - tau` in each direction.
/// The first digit refers to `x`, the second to `y`; `2` means the layer side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    R11,
    R21,
    R12,
    R22,
}

/// Axis-aligned cell `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cell {
    pub fn hx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn hy(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Tensor product of two one-dimensional meshes. Cell `(i, j)` is
/// `I_i x J_j` with 0-based indices and linear index `i + N_x j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh2D {
    pub mesh_x: Mesh1D,
    pub mesh_y: Mesh1D,
}

impl TensorMesh2D {
    pub fn nx(&self) -> usize {
        self.mesh_x.n()
    }

    pub fn ny(&self) -> usize {
        self.mesh_y.n()
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        let (x0, x1) = self.mesh_x.cell(i);
        let (y0, y1) = self.mesh_y.cell(j);
        Cell { x0, x1, y0, y1 }
    }

    pub fn region(&self, i: usize, j: usize) -> Region {
        match (self.mesh_x.is_fine(i), self.mesh_y.is_fine(j)) {
            (false, false) => Region::R11,
            (true, false) => Region::R21,
            (false, true) => Region::R12,
            (true, true) => Region::R22,
        }
    }

    /// Iterate `(i, j, cell)` in element order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Cell)> + '_ {
        (0..self.ny()).flat_map(move |j| (0..self.nx()).map(move |i| (i, j, self.cell(i, j))))
    }
}

pub fn tensor_mesh(spec: &MeshSpec) -> TensorMesh2D {
    let mesh = build_mesh_1d(spec);
    TensorMesh2D {
        mesh_x: mesh.clone(),
        mesh_y: mesh,
    }
}
