//! Sparse storage and direct solves.
//!
//! [`SparseMatrix`] is plain compressed row storage. [`Factorization`] wraps
//! faer's sparse LU (COLAMD ordering, partial pivoting) behind row
//! equilibration, a residual check and one step of iterative refinement.
//! Trailing unknowns whose diagonal block is diagonal can be condensed out
//! before factoring, see [`factorize_condensed`].

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};

use crate::error::{LdgError, Result};

/// Compressed sparse row matrix with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let s = self.row_ptr[r];
        let e = self.row_ptr[r + 1];
        (&self.col_idx[s..e], &self.values[s..e])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|i| vals[i]).unwrap_or(0.0)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let (c, v) = self.row(r);
                c.iter().zip(v).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseMatrix, s: f64) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let entries = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, s * v)))
            .collect();
        SparseMatrix::from_triplets(self.nrows, self.ncols, entries)
    }

    pub fn scale(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `P A P^T` for the permutation `perm[old] = new`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> SparseMatrix {
        let entries = self
            .triplets()
            .map(|(r, c, v)| (perm[r], perm[c], v))
            .collect();
        SparseMatrix::from_triplets(self.nrows, self.ncols, entries)
    }

    /// Write the matrix as `row col value` lines.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {v:.16e}")?;
        }
        Ok(())
    }

    fn to_faer_scaled(&self, row_scale: &[f64]) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v * row_scale[r]))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| LdgError::Solver(format!("cannot build column matrix: {e:?}")))
    }
}

/// Accumulates dense square blocks of a block-structured sparse matrix.
#[derive(Debug, Clone)]
pub struct BlockAssembler {
    block: usize,
    n_blocks: usize,
    blocks: std::collections::HashMap<(usize, usize), Vec<f64>>,
}

impl BlockAssembler {
    pub fn new(block: usize, n_blocks: usize) -> Self {
        BlockAssembler {
            block,
            n_blocks,
            blocks: std::collections::HashMap::new(),
        }
    }

    /// Add `scale * local` (row-major, `block x block`) into block `(rb, cb)`.
    pub fn add(&mut self, rb: usize, cb: usize, local: &[f64], scale: f64) {
        let n = self.block;
        debug_assert_eq!(local.len(), n * n);
        let dst = self.blocks.entry((rb, cb)).or_insert_with(|| vec![0.0; n * n]);
        dst.iter_mut().zip(local).for_each(|(d, s)| *d += scale * s);
    }

    /// Convert to CSR, dropping entries below `drop_rel` times the largest
    /// magnitude in their block (quadrature round-off on exact zeros).
    pub fn finish(self, drop_rel: f64) -> SparseMatrix {
        let n = self.block;
        let dim = n * self.n_blocks;
        let mut keys: Vec<_> = self.blocks.keys().copied().collect();
        keys.sort_unstable();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut start = 0;
        while start < keys.len() {
            let rb = keys[start].0;
            let mut end = start;
            while end < keys.len() && keys[end].0 == rb {
                end += 1;
            }
            for l in 0..n {
                let row = rb * n + l;
                for key in &keys[start..end] {
                    let blk = &self.blocks[key];
                    let cut = drop_rel * blk.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    for m in 0..n {
                        let v = blk[l * n + m];
                        if v.abs() > cut {
                            col_idx.push(key.1 * n + m);
                            values.push(v);
                        }
                    }
                }
                row_ptr[row + 1] = col_idx.len();
            }
            start = end;
        }
        for r in 0..dim {
            if row_ptr[r + 1] < row_ptr[r] {
                row_ptr[r + 1] = row_ptr[r];
            }
        }
        SparseMatrix {
            nrows: dim,
            ncols: dim,
            row_ptr,
            col_idx,
            values,
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Residual of the last solve relative to the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub relative_residual: f64,
    pub refined: bool,
}

/// Reusable sparse LU factors of a square matrix.
pub struct Factorization {
    matrix: SparseMatrix,
    row_scale: Vec<f64>,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    condensed: Option<Condensed>,
}

/// Unknowns `keep..n` eliminated through their diagonal block.
struct Condensed {
    keep: usize,
    inv_diag: Vec<f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("n", &self.matrix.nrows)
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

/// Residual above which one refinement step is taken.
pub const REFINE_THRESHOLD: f64 = 1e-10;
/// Residual above which a solve is reported as failed.
pub const FAILURE_THRESHOLD: f64 = 1e-6;

pub fn factorize(a: &SparseMatrix) -> Result<Factorization> {
    check_square(a)?;
    let (row_scale, lu) = lu_of(a)?;
    Ok(Factorization {
        matrix: a.clone(),
        row_scale,
        lu,
        condensed: None,
    })
}

/// Factorize after eliminating the unknowns `keep..n`. The block of `a` on
/// those rows and columns must be diagonal; the Schur complement on the
/// first `keep` unknowns is factored instead of `a`.
pub fn factorize_condensed(a: &SparseMatrix, keep: usize) -> Result<Factorization> {
    check_square(a)?;
    let n = a.nrows;
    if keep == 0 || keep > n {
        return Err(LdgError::Solver(format!("cannot keep {keep} of {n} unknowns")));
    }
    let mut inv_diag = vec![0.0; n - keep];
    for r in keep..n {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if c == r {
                inv_diag[r - keep] = 1.0 / v;
            } else if c >= keep && v != 0.0 {
                return Err(LdgError::Solver(format!(
                    "eliminated block has off-diagonal entry ({r}, {c})"
                )));
            }
        }
        if !inv_diag[r - keep].is_finite() || inv_diag[r - keep] == 0.0 {
            return Err(LdgError::Singular { pivot: r });
        }
    }
    // S = A_kk - A_ke D^-1 A_ek, row by row with a dense accumulator
    let mut acc = vec![0.0; keep];
    let mut seen = vec![false; keep];
    let mut touched: Vec<usize> = Vec::new();
    let mut entries = Vec::new();
    for r in 0..keep {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if c < keep {
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                acc[c] += v;
            } else {
                let w = v * inv_diag[c - keep];
                let (c2s, v2s) = a.row(c);
                for (&c2, &v2) in c2s.iter().zip(v2s) {
                    if c2 < keep {
                        if !seen[c2] {
                            seen[c2] = true;
                            touched.push(c2);
                        }
                        acc[c2] -= w * v2;
                    }
                }
            }
        }
        for &c in &touched {
            entries.push((r, c, acc[c]));
            acc[c] = 0.0;
            seen[c] = false;
        }
        touched.clear();
    }
    let schur = SparseMatrix::from_triplets(keep, keep, entries);
    let (row_scale, lu) = lu_of(&schur)?;
    Ok(Factorization {
        matrix: a.clone(),
        row_scale,
        lu,
        condensed: Some(Condensed { keep, inv_diag }),
    })
}

fn check_square(a: &SparseMatrix) -> Result<()> {
    if a.nrows != a.ncols {
        return Err(LdgError::Solver(format!(
            "matrix is {}x{}, not square",
            a.nrows, a.ncols
        )));
    }
    Ok(())
}

type FaerLu = faer::sparse::linalg::solvers::Lu<usize, f64>;

fn lu_of(a: &SparseMatrix) -> Result<(Vec<f64>, FaerLu)> {
    faer::set_global_parallelism(Par::Seq);
    let mut row_scale = Vec::with_capacity(a.nrows);
    for r in 0..a.nrows {
        let m = a.row(r).1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return Err(LdgError::Singular { pivot: r });
        }
        row_scale.push(1.0 / m);
    }
    let scaled = a.to_faer_scaled(&row_scale)?;
    let lu = scaled.sp_lu().map_err(|e| match e {
        faer::sparse::linalg::LuError::SymbolicSingular { index } => LdgError::Singular { pivot: index },
        other => LdgError::Solver(format!("{other:?}")),
    })?;
    Ok((row_scale, lu))
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    fn lu_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i] * self.row_scale[i]);
        let x = self.lu.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    fn raw_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let Some(cond) = &self.condensed else {
            return self.lu_solve(rhs);
        };
        let keep = cond.keep;
        let mut reduced = rhs[..keep].to_vec();
        for (r, red) in reduced.iter_mut().enumerate() {
            let (cols, vals) = self.matrix.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c >= keep {
                    *red -= v * cond.inv_diag[c - keep] * rhs[c];
                }
            }
        }
        let mut x = self.lu_solve(&reduced);
        x.reserve(rhs.len() - keep);
        for r in keep..rhs.len() {
            let (cols, vals) = self.matrix.row(r);
            let mut v_r = rhs[r];
            for (&c, &v) in cols.iter().zip(vals) {
                if c < keep {
                    v_r -= v * x[c];
                }
            }
            x.push(v_r * cond.inv_diag[r - keep]);
        }
        x
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_report(rhs).map(|(x, _)| x)
    }

    pub fn solve_with_report(&self, rhs: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        assert_eq!(rhs.len(), self.dim(), "rhs length mismatch");
        let bnorm = norm2(rhs);
        if bnorm == 0.0 {
            return Ok((
                vec![0.0; rhs.len()],
                SolveReport {
                    relative_residual: 0.0,
                    refined: false,
                },
            ));
        }
        let mut x = self.raw_solve(rhs);
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(LdgError::Singular { pivot: i });
        }
        let residual = |x: &[f64]| -> Vec<f64> {
            self.matrix
                .matvec(x)
                .iter()
                .zip(rhs)
                .map(|(ax, b)| b - ax)
                .collect()
        };
        let mut r = residual(&x);
        let mut rel = norm2(&r) / bnorm;
        let mut refined = false;
        if rel > REFINE_THRESHOLD {
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            r = residual(&x);
            rel = norm2(&r) / bnorm;
            refined = true;
        }
        if !(rel <= FAILURE_THRESHOLD) {
            return Err(LdgError::Solver(format!(
                "relative residual {rel:e} after refinement"
            )));
        }
        Ok((
            x,
            SolveReport {
                relative_residual: rel,
                refined,
            },
        ))
    }
}

pub fn solve(f: &Factorization, rhs: &[f64]) -> Result<Vec<f64>> {
    f.solve(rhs)
}

/// Solve a small dense system `a x = b` (row-major `a`) by partial-pivot LU.
pub fn dense_solve(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    (0..n).map(|i| x[(i, 0)]).collect()
}

/// BiCGSTAB with a block-Jacobi preconditioner built from the diagonal
/// blocks of size `block`. An alternative to [`factorize`] for systems too
/// large to factor; not used by the convergence studies.
pub fn bicgstab_block_jacobi(
    a: &SparseMatrix,
    b: &[f64],
    block: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.nrows;
    if block == 0 || !n.is_multiple_of(block) {
        return Err(LdgError::Config(format!(
            "block size {block} does not divide {n}"
        )));
    }
    let nb = n / block;
    let mut blocks: Vec<faer::linalg::solvers::PartialPivLu<f64>> = Vec::with_capacity(nb);
    for k in 0..nb {
        let off = k * block;
        let m = Mat::<f64>::from_fn(block, block, |i, j| a.get(off + i, off + j));
        blocks.push(m.partial_piv_lu());
    }
    let precond = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (k, lu) in blocks.iter().enumerate() {
            let off = k * block;
            let rhs = Mat::<f64>::from_fn(block, 1, |i, _| v[off + i]);
            let z = lu.solve(&rhs);
            for i in 0..block {
                out[off + i] = z[(i, 0)];
            }
        }
        out
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 0..max_iter {
        if norm2(&r) / bnorm < tol {
            return Ok((x, it));
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let y = precond(&p);
        v = a.matvec(&y);
        alpha = rho / dot(&r_hat, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        if norm2(&s) / bnorm < tol {
            x.iter_mut().zip(&y).for_each(|(x, y)| *x += alpha * y);
            return Ok((x, it + 1));
        }
        let z = precond(&s);
        let t = a.matvec(&z);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    if norm2(&r) / bnorm < tol {
        return Ok((x, max_iter));
    }
    Err(LdgError::Solver(format!(
        "BiCGSTAB did not converge in {max_iter} iterations"
    )))
}
