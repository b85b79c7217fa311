//! Sparse direct solves with residual control.
//!
//! Two backends are available. [`Backend::Lu`] is LU with partial pivoting
//! on the full matrix. [`Backend::IteratedPenalty`] handles symmetric
//! saddle-point matrices `[[A, Bᵀ], [B, 0]]` with `A` positive semidefinite:
//! it factors `K = A + ρBᵀDB` by sparse Cholesky, where `D = diag(BBᵀ)⁻¹`,
//! and iterates
//!
//! ```text
//! w ← K⁻¹(g − Bᵀz + ρBᵀD f),   z ← z + ρD(Bw − f)
//! ```
//!
//! until the residual of the full system stalls. `K` is positive definite
//! whenever the saddle-point matrix is nonsingular, and its factor is much
//! smaller than an LU factor of the indefinite matrix.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::linalg::{LltError, LuError};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, MatMut, Side};

use crate::assembly::{spmv, SparseMatrix};
use crate::error::{Error, Result};

/// Relative residual above which a solve fails.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Relative residual above which one refinement step is taken.
pub const REFINE_THRESHOLD: f64 = 1e-12;
/// `ρ` relative to `max diag A / max diag BᵀDB`.
pub const PENALTY_SCALE: f64 = 100.0;
/// Iteration cap of the penalty backend.
pub const MAX_PENALTY_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Lu,
    IteratedPenalty,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Lu => "lu",
            Backend::IteratedPenalty => "penalty",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lu" => Ok(Backend::Lu),
            "penalty" | "iterated-penalty" => Ok(Backend::IteratedPenalty),
            _ => Err(Error::InvalidArgument(format!("unknown solver backend `{s}` (expected lu or penalty)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorStats {
    pub n: usize,
    pub nnz: usize,
    pub backend: Backend,
    pub pivoting: &'static str,
    /// Order and stored entries of the matrix actually factored.
    pub factored_n: usize,
    pub factored_nnz: usize,
    /// The penalty parameter, `None` for LU.
    pub rho: Option<f64>,
}

/// Outcome of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub residual: f64,
    pub refined: bool,
    /// Triangular solve pairs used.
    pub iterations: usize,
}

struct Penalty {
    m: usize,
    llt: Llt<usize, f64>,
    rho: f64,
    d: Vec<f64>,
    // B by rows, over the first m unknowns.
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    val: Vec<f64>,
}

impl Penalty {
    fn b_mul(&self, w: &[f64]) -> Vec<f64> {
        (0..self.d.len())
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|p| self.val[p] * w[self.col_idx[p]]).sum())
            .collect()
    }

    fn bt_mul(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (r, &zr) in z.iter().enumerate() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.col_idx[p]] += self.val[p] * zr;
            }
        }
        out
    }

    fn k_solve(&self, mut w: Vec<f64>) -> Vec<f64> {
        let m = self.m;
        self.llt.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(&mut w, m, 1));
        w
    }
}

enum Inner {
    Lu(Lu<usize, f64>),
    Penalty(Box<Penalty>),
}

/// A factorized square sparse matrix. Immutable once built, so it can be
/// shared across threads and reused for several right-hand sides.
pub struct SparseFactorization {
    matrix: SparseMatrix,
    inner: Inner,
    pub stats: FactorStats,
}

impl std::fmt::Debug for SparseFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseFactorization").field("stats", &self.stats).finish()
    }
}

fn check_square(m: &SparseMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if m.val().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// LU factorization with partial pivoting. Structural singularity is
/// reported with the offending column; numerical singularity is detected by
/// the first solve.
pub fn factorize(m: &SparseMatrix) -> Result<SparseFactorization> {
    check_square(m)?;
    let lu = m.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
        LuError::Generic(e) => Error::Backend(format!("{e:?}")),
    })?;
    let (n, nnz) = (m.nrows(), m.val().len());
    Ok(SparseFactorization {
        stats: FactorStats {
            n,
            nnz,
            backend: Backend::Lu,
            pivoting: "partial (row)",
            factored_n: n,
            factored_nnz: nnz,
            rho: None,
        },
        matrix: m.clone(),
        inner: Inner::Lu(lu),
    })
}

/// Iterated-penalty factorization of a symmetric saddle-point matrix whose
/// first `n_primal` unknowns carry the semidefinite block and whose trailing
/// diagonal block is zero.
pub fn factorize_saddle(m: &SparseMatrix, n_primal: usize) -> Result<SparseFactorization> {
    check_square(m)?;
    let n = m.nrows();
    let mp = n_primal;
    if mp == 0 || mp >= n {
        return Err(Error::InvalidArgument(format!("primal block size {mp} must lie in 1..{n}")));
    }
    let nz = n - mp;
    let cp = m.symbolic().col_ptr();
    let ri = m.symbolic().row_idx();
    let v = m.val();
    let not_saddle = |what: &str| Error::InvalidArgument(format!("not a symmetric saddle-point matrix: {what}"));

    // B by rows from the lower-left block.
    let mut row_ptr = vec![0usize; nz + 1];
    for j in 0..mp {
        for p in cp[j]..cp[j + 1] {
            if ri[p] >= mp {
                row_ptr[ri[p] - mp + 1] += 1;
            }
        }
    }
    for r in 0..nz {
        row_ptr[r + 1] += row_ptr[r];
    }
    let mut next = row_ptr.clone();
    let mut col_idx = vec![0usize; row_ptr[nz]];
    let mut bval = vec![0.0; row_ptr[nz]];
    for j in 0..mp {
        for p in cp[j]..cp[j + 1] {
            if ri[p] >= mp {
                let slot = &mut next[ri[p] - mp];
                col_idx[*slot] = j;
                bval[*slot] = v[p];
                *slot += 1;
            }
        }
    }
    let bmax = bval.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut a_diag = vec![0.0; mp];
    for j in 0..mp {
        for p in cp[j]..cp[j + 1] {
            let i = ri[p];
            if i == j {
                a_diag[j] = v[p];
            } else if i < mp && ri[cp[i]..cp[i + 1]].binary_search(&j).is_err() {
                return Err(not_saddle("unsymmetric pattern in the primal block"));
            }
        }
    }
    // The upper-right block must be Bᵀ and the trailing block zero.
    for r in 0..nz {
        let j = mp + r;
        let upper: Vec<(usize, f64)> = (cp[j]..cp[j + 1]).map(|p| (ri[p], v[p])).collect();
        if upper.iter().any(|&(i, x)| i >= mp && x != 0.0) {
            return Err(not_saddle("nonzero trailing diagonal block"));
        }
        let mut upper = upper.into_iter().filter(|e| e.0 < mp).peekable();
        let mut lower = (row_ptr[r]..row_ptr[r + 1]).map(|q| (col_idx[q], bval[q])).peekable();
        loop {
            let (x, y) = match (upper.peek().copied(), lower.peek().copied()) {
                (None, None) => break,
                (Some(u), Some(l)) if u.0 == l.0 => {
                    upper.next();
                    lower.next();
                    (u.1, l.1)
                }
                (Some(u), l) if l.map_or(true, |l| u.0 < l.0) => {
                    upper.next();
                    (u.1, 0.0)
                }
                (_, l) => {
                    lower.next();
                    (0.0, l.map_or(0.0, |l| l.1))
                }
            };
            if (x - y).abs() > 1e-12 * bmax {
                return Err(not_saddle("off-diagonal blocks are not transposes"));
            }
        }
    }

    let mut d = Vec::with_capacity(nz);
    for r in 0..nz {
        let s: f64 = bval[row_ptr[r]..row_ptr[r + 1]].iter().map(|b| b * b).sum();
        if s == 0.0 {
            return Err(Error::SingularMatrix { pivot: mp + r });
        }
        d.push(1.0 / s);
    }
    let mut bdb_diag = vec![0.0; mp];
    for r in 0..nz {
        for p in row_ptr[r]..row_ptr[r + 1] {
            bdb_diag[col_idx[p]] += d[r] * bval[p] * bval[p];
        }
    }
    let a_max = a_diag.iter().fold(0.0f64, |a, &b| a.max(b));
    let bdb_max = bdb_diag.iter().fold(0.0f64, |a, &b| a.max(b));
    let rho = PENALTY_SCALE * if a_max > 0.0 { a_max / bdb_max } else { 1.0 / bdb_max };

    // Lower triangle of K, column by column with a dense accumulator.
    let mut acc = vec![0.0; mp];
    let mut mark = vec![usize::MAX; mp];
    let mut k_ptr = Vec::with_capacity(mp + 1);
    k_ptr.push(0usize);
    let mut k_row = Vec::new();
    let mut k_val = Vec::new();
    let mut touched = Vec::new();
    for c in 0..mp {
        touched.clear();
        let mut touch = |i: usize, x: f64, touched: &mut Vec<usize>| {
            if mark[i] != c {
                mark[i] = c;
                acc[i] = 0.0;
                touched.push(i);
            }
            acc[i] += x;
        };
        touch(c, 0.0, &mut touched);
        for p in cp[c]..cp[c + 1] {
            let i = ri[p];
            if i >= c && i < mp {
                touch(i, v[p], &mut touched);
            } else if i >= mp {
                let r = i - mp;
                let brc = rho * d[r] * v[p];
                for q in row_ptr[r]..row_ptr[r + 1] {
                    if col_idx[q] >= c {
                        touch(col_idx[q], brc * bval[q], &mut touched);
                    }
                }
            }
        }
        touched.sort_unstable();
        for &i in &touched {
            k_row.push(i);
            k_val.push(acc[i]);
        }
        k_ptr.push(k_row.len());
    }
    let factored_nnz = k_val.len();
    let sym = SymbolicSparseColMat::new_checked(mp, mp, k_ptr, None, k_row);
    let k = SparseColMat::new(sym, k_val);
    let llt = k.sp_cholesky(Side::Lower).map_err(|e| match e {
        LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
            Error::SingularMatrix { pivot: index }
        }
        LltError::Generic(e) => Error::Backend(format!("{e:?}")),
    })?;
    Ok(SparseFactorization {
        stats: FactorStats {
            n,
            nnz: v.len(),
            backend: Backend::IteratedPenalty,
            pivoting: "none (Cholesky of the penalized primal block)",
            factored_n: mp,
            factored_nnz,
            rho: Some(rho),
        },
        matrix: m.clone(),
        inner: Inner::Penalty(Box::new(Penalty { m: mp, llt, rho, d, row_ptr, col_idx, val: bval })),
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SparseFactorization {
    fn lu_apply(lu: &Lu<usize, f64>, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        let n = x.len();
        lu.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(&mut x, n, 1));
        x
    }

    fn relative_residual(&self, x: &[f64], b: &[f64], bn: f64) -> f64 {
        let mx = spmv(&self.matrix, x);
        norm(&b.iter().zip(mx).map(|(bi, mi)| bi - mi).collect::<Vec<_>>()) / bn
    }

    pub fn backend(&self) -> Backend {
        self.stats.backend
    }

    /// Solves `M x = b` to a relative residual of at most
    /// [`RESIDUAL_TOLERANCE`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_with_report(b)?.0)
    }

    pub fn solve_with_report(&self, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let n = self.stats.n;
        if b.len() != n {
            return Err(Error::InvalidArgument(format!("rhs has length {}, matrix has {n} rows", b.len())));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("rhs has non-finite entries".into()));
        }
        let bn = norm(b);
        if bn == 0.0 {
            return Ok((vec![0.0; n], SolveReport { residual: 0.0, refined: false, iterations: 0 }));
        }
        let (x, rel, iterations) = match &self.inner {
            Inner::Lu(lu) => self.solve_lu(lu, b, bn)?,
            Inner::Penalty(pen) => self.solve_penalty(pen, b, bn)?,
        };
        if !rel.is_finite() {
            return Err(Error::SingularMatrix { pivot: x.iter().position(|v| !v.is_finite()).unwrap_or(0) });
        }
        if rel > RESIDUAL_TOLERANCE {
            return Err(Error::SolverAccuracy { residual: rel, tolerance: RESIDUAL_TOLERANCE });
        }
        Ok((x, SolveReport { residual: rel, refined: iterations > 1, iterations }))
    }

    fn solve_lu(&self, lu: &Lu<usize, f64>, b: &[f64], bn: f64) -> Result<(Vec<f64>, f64, usize)> {
        let mut x = Self::lu_apply(lu, b);
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot: i });
        }
        let mut rel = self.relative_residual(&x, b, bn);
        if rel > REFINE_THRESHOLD {
            let mx = spmv(&self.matrix, &x);
            let r: Vec<f64> = b.iter().zip(mx).map(|(bi, mi)| bi - mi).collect();
            for (xi, d) in x.iter_mut().zip(Self::lu_apply(lu, &r)) {
                *xi += d;
            }
            rel = self.relative_residual(&x, b, bn);
            return Ok((x, rel, 2));
        }
        Ok((x, rel, 1))
    }

    // Penalty iteration in residual-correction form: with `(r, s)` the
    // residual of the full system, `δw = K⁻¹(r + ρBᵀDs)` and
    // `δz = ρD(Bδw − s)`.
    fn solve_penalty(&self, pen: &Penalty, b: &[f64], bn: f64) -> Result<(Vec<f64>, f64, usize)> {
        let m = pen.m;
        let mut x = vec![0.0; b.len()];
        let mut res = b.to_vec();
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut stalled = 0;
        let mut iterations = 0;
        while iterations < MAX_PENALTY_ITERATIONS {
            iterations += 1;
            let (r, s) = res.split_at(m);
            let ds: Vec<f64> = s.iter().zip(&pen.d).map(|(si, di)| pen.rho * di * si).collect();
            let rhs: Vec<f64> = r.iter().zip(pen.bt_mul(&ds)).map(|(a, b)| a + b).collect();
            let dw = pen.k_solve(rhs);
            if let Some(i) = dw.iter().position(|v| !v.is_finite()) {
                return Err(Error::SingularMatrix { pivot: i });
            }
            let bdw = pen.b_mul(&dw);
            for (xi, d) in x[..m].iter_mut().zip(&dw) {
                *xi += d;
            }
            for (r, xi) in x[m..].iter_mut().enumerate() {
                *xi += pen.rho * pen.d[r] * (bdw[r] - s[r]);
            }
            let mx = spmv(&self.matrix, &x);
            res = b.iter().zip(mx).map(|(bi, mi)| bi - mi).collect();
            let rel = norm(&res) / bn;
            let best_rel = best.as_ref().map_or(f64::INFINITY, |b| b.1);
            if rel < 0.9 * best_rel {
                stalled = 0;
            } else {
                stalled += 1;
            }
            if rel < best_rel {
                best = Some((x.clone(), rel));
            }
            if rel <= REFINE_THRESHOLD || stalled >= 5 {
                break;
            }
        }
        let (x, rel) = best.expect("at least one iteration");
        Ok((x, rel, iterations))
    }
}

/// Factorize by LU and solve in one step.
pub fn solve(m: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    factorize(m)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::sparse::Triplet;

    fn sparse(n: usize, entries: &[(usize, usize, f64)]) -> SparseMatrix {
        let t: Vec<_> = entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseMatrix::try_new_from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity() {
        let m = sparse(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
        let x = solve(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn small_saddle() {
        let m = sparse(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let x = solve(&m, &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn diagonal_and_zero_rhs() {
        let m = sparse(2, &[(0, 0, 2.0), (1, 1, 4.0)]);
        assert_eq!(solve(&m, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(solve(&m, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn structurally_singular() {
        let m = sparse(2, &[(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(matches!(factorize(&m), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn numerically_singular() {
        let m = sparse(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let r = factorize(&m).and_then(|f| f.solve(&[1.0, 2.0]));
        assert!(r.is_err());
    }
}
