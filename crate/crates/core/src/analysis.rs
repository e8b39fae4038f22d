//! Error norms, convergence rates and result tables.

use std::fmt::Write as _;
use std::io::Write;

use crate::basis::gauss_legendre_5;
use crate::error::{LdgError, Result};
use crate::mesh::MeshKind;
use crate::space::{ScalarField, Space1D, Space2D};

fn map(a: f64, b: f64, xi: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * xi
}

/// `|exact - field|` in L² with the 5-point rule per cell.
pub fn l2_error_1d(space: &Space1D, field: &ScalarField, exact: &dyn Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre_5();
    let mut acc = 0.0;
    for e in 0..space.n_elements() {
        let (a, b) = space.mesh.cell(e);
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let d = exact(map(a, b, xi)) - space.eval(field, e, xi);
            acc += 0.5 * (b - a) * w * d * d;
        }
    }
    acc.sqrt()
}

pub fn l2_norm_1d(space: &Space1D, field: &ScalarField) -> f64 {
    l2_error_1d(space, field, &|_| 0.0)
}

/// `|exact - field|` in L² with the tensor 5-point rule per cell.
pub fn l2_error_2d(space: &Space2D, field: &ScalarField, exact: &dyn Fn(f64, f64) -> f64) -> f64 {
    let rule = gauss_legendre_5();
    let mut acc = 0.0;
    for (i, j, c) in space.mesh.cells() {
        let e = space.mesh.index(i, j);
        let jac = 0.25 * c.hx() * c.hy();
        for (&eta, &wy) in rule.nodes.iter().zip(&rule.weights) {
            let y = map(c.y0, c.y1, eta);
            for (&xi, &wx) in rule.nodes.iter().zip(&rule.weights) {
                let d = exact(map(c.x0, c.x1, xi), y) - space.eval(field, e, xi, eta);
                acc += jac * wx * wy * d * d;
            }
        }
    }
    acc.sqrt()
}

pub fn l2_norm_2d(space: &Space2D, field: &ScalarField) -> f64 {
    l2_error_2d(space, field, &|_, _| 0.0)
}

/// Running value of `dt * sum_m |||(w - W)^{m,theta}|||`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyAccumulator {
    pub total: f64,
    pub steps: usize,
}

impl EnergyAccumulator {
    pub fn add(&mut self, dt: f64, step_error: f64) {
        self.total += dt * step_error;
        self.steps += 1;
    }
}

fn check_positive(e: f64) -> Result<()> {
    if e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(LdgError::Domain {
            name: "error",
            value: e,
            expected: "(0, inf)",
        })
    }
}

/// `log2(e_N / e_2N)`.
pub fn rate_r2(e_n: f64, e_2n: f64) -> Result<f64> {
    check_positive(e_n)?;
    check_positive(e_2n)?;
    Ok((e_n / e_2n).ln() / std::f64::consts::LN_2)
}

/// Rate against `N^{-1} ln N`: `log(e_N / e_2N) / log(2 ln N / ln 2N)`.
pub fn rate_rs(e_n: f64, e_2n: f64, n: usize) -> Result<f64> {
    check_positive(e_n)?;
    check_positive(e_2n)?;
    if n < 2 {
        return Err(LdgError::Domain {
            name: "N",
            value: n as f64,
            expected: "[2, inf)",
        });
    }
    let nf = n as f64;
    let p = 2.0 * nf.ln() / (2.0 * nf).ln();
    Ok((e_n / e_2n).ln() / p.ln())
}

/// One run of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub mesh: MeshKind,
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    pub theta: f64,
    pub dt: f64,
    pub l2_error: f64,
    pub energy_error: f64,
    pub l2_rate: Option<f64>,
    pub energy_rate: Option<f64>,
}

/// Which parameter a sweep varies; decides how rates are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Rates over doubling `N`; the energy rate uses the `ln N / N` scaling
    /// on the S-mesh.
    Space,
    /// Rates over halving `dt`.
    Time,
    /// No rates.
    Eps,
}

/// Fill in the rate columns of a sweep, in order. The first record of the
/// sweep gets none.
pub fn fill_rates(records: &mut [StudyRecord], axis: SweepAxis) -> Result<()> {
    for i in 0..records.len() {
        let (l2, en) = if i == 0 || axis == SweepAxis::Eps {
            (None, None)
        } else {
            let (prev, cur) = (&records[i - 1], &records[i]);
            let l2 = rate_r2(prev.l2_error, cur.l2_error)?;
            let en = if axis == SweepAxis::Space && cur.mesh == MeshKind::S {
                rate_rs(prev.energy_error, cur.energy_error, prev.n)?
            } else {
                rate_r2(prev.energy_error, cur.energy_error)?
            };
            (Some(l2), Some(en))
        };
        records[i].l2_rate = l2;
        records[i].energy_rate = en;
    }
    Ok(())
}

pub const CSV_HEADER: &str = "mesh,k,N,eps,theta,dt,l2_error,l2_rate,energy_error,energy_rate";

fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

/// Write records as CSV; six significant digits, empty rate cells where a
/// sweep starts.
pub fn write_csv<W: Write>(records: &[StudyRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.mesh,
            r.k,
            r.n,
            sci(r.eps),
            sci(r.theta),
            sci(r.dt),
            sci(r.l2_error),
            opt(r.l2_rate),
            sci(r.energy_error),
            opt(r.energy_rate)
        )?;
    }
    Ok(())
}

/// Layout of a rendered result table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    /// Rows `(k, N)`, a column pair per mesh kind, L² errors.
    SpaceL2,
    /// Rows `(k, N)`, energy errors.
    SpaceEnergy,
    /// Rows `dt`, L² errors.
    TimeL2,
    /// Rows `dt`, energy errors.
    TimeEnergy,
    /// Rows `eps`, L² then energy errors per mesh kind.
    Eps,
}

fn short(v: f64) -> String {
    format!("{v:.2e}")
}

fn rate_cell(v: Option<f64>) -> String {
    v.map(|r| format!("{r:.2}")).unwrap_or_else(|| "-".into())
}

fn mesh_title(kind: MeshKind) -> &'static str {
    match kind {
        MeshKind::S => "S-mesh",
        MeshKind::BS => "BS-mesh",
        MeshKind::BType => "B-type mesh",
    }
}

/// Render records as a markdown table. Rows are matched across mesh kinds
/// by their sweep key; missing cells print as blanks.
pub fn render_markdown(records: &[StudyRecord], layout: TableLayout) -> String {
    let kinds: Vec<MeshKind> = MeshKind::ALL
        .into_iter()
        .filter(|k| records.iter().any(|r| r.mesh == *k))
        .collect();
    let key = |r: &StudyRecord| -> (usize, u64) {
        match layout {
            TableLayout::SpaceL2 | TableLayout::SpaceEnergy => (r.k, r.n as u64),
            TableLayout::TimeL2 | TableLayout::TimeEnergy => (r.k, (r.dt * 1e12).round() as u64),
            TableLayout::Eps => (r.k, (-r.eps.log10() * 1e6).round() as u64),
        }
    };
    let mut keys: Vec<(usize, u64)> = Vec::new();
    for r in records {
        if !keys.contains(&key(r)) {
            keys.push(key(r));
        }
    }
    let find = |kind: MeshKind, k: (usize, u64)| records.iter().find(|r| r.mesh == kind && key(r) == k);
    let mut s = String::new();
    match layout {
        TableLayout::Eps => {
            let mut head = "| eps |".to_string();
            for kind in &kinds {
                let _ = write!(head, " L2 {} |", mesh_title(*kind));
            }
            for kind in &kinds {
                let _ = write!(head, " energy {} |", mesh_title(*kind));
            }
            let _ = writeln!(s, "{head}");
            let _ = writeln!(s, "|---|{}", "---|".repeat(2 * kinds.len()));
            for k in &keys {
                let eps = kinds.iter().find_map(|m| find(*m, *k)).map(|r| r.eps).unwrap_or(f64::NAN);
                let mut row = format!("| {} |", short(eps));
                for kind in &kinds {
                    let _ = write!(row, " {} |", find(*kind, *k).map(|r| short(r.l2_error)).unwrap_or_default());
                }
                for kind in &kinds {
                    let _ = write!(row, " {} |", find(*kind, *k).map(|r| short(r.energy_error)).unwrap_or_default());
                }
                let _ = writeln!(s, "{row}");
            }
        }
        _ => {
            let energy = matches!(layout, TableLayout::SpaceEnergy | TableLayout::TimeEnergy);
            let space = matches!(layout, TableLayout::SpaceL2 | TableLayout::SpaceEnergy);
            let label = if energy { "energy-error" } else { "L2-error" };
            let mut head = if space { "| k | N |".to_string() } else { "| dt |".to_string() };
            for kind in &kinds {
                let rate = if energy && space && *kind == MeshKind::S { "r_S" } else { "r_2" };
                let _ = write!(head, " {} {label} | {rate} |", mesh_title(*kind));
            }
            let _ = writeln!(s, "{head}");
            let cols = if space { 2 } else { 1 } + 2 * kinds.len();
            let _ = writeln!(s, "|{}", "---|".repeat(cols));
            for k in &keys {
                let any = kinds.iter().find_map(|m| find(*m, *k));
                let mut row = match (space, any) {
                    (true, Some(r)) => format!("| {} | {} |", r.k, r.n),
                    (false, Some(r)) => format!("| {} |", r.dt),
                    _ => continue,
                };
                for kind in &kinds {
                    match find(*kind, *k) {
                        Some(r) => {
                            let (e, rate) = if energy {
                                (r.energy_error, r.energy_rate)
                            } else {
                                (r.l2_error, r.l2_rate)
                            };
                            let _ = write!(row, " {} | {} |", short(e), rate_cell(rate));
                        }
                        None => row.push_str("  |  |"),
                    }
                }
                let _ = writeln!(s, "{row}");
            }
        }
    }
    s
}
