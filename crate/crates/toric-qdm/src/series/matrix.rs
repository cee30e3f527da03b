//! Matrices of truncated series, plus exact linear algebra over the scalar
//! fraction field.

use super::scheme::VariableScheme;
use super::trunc::TruncSeries;
use crate::coeffs::{RatFun, VarTable};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// A dense matrix with [`TruncSeries`] entries. Connection matrices, gauge
/// transformations, fundamental solutions, and block decompositions are all
/// stored this way; a column vector is a one-column matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMat {
    rows: usize,
    cols: usize,
    entries: Vec<TruncSeries>,
}

impl SeriesMat {
    /// Zero matrix.
    pub fn zero(
        scheme: &Arc<VariableScheme>,
        table: &Arc<VarTable>,
        rows: usize,
        cols: usize,
    ) -> Self {
        SeriesMat {
            rows,
            cols,
            entries: vec![TruncSeries::zero(scheme, table); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(scheme: &Arc<VariableScheme>, table: &Arc<VarTable>, n: usize) -> Self {
        let mut m = Self::zero(scheme, table, n, n);
        for i in 0..n {
            m.set(i, i, TruncSeries::one(scheme, table));
        }
        m
    }

    /// Build entrywise.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> TruncSeries,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        SeriesMat {
            rows,
            cols,
            entries,
        }
    }

    /// Build fallibly entrywise.
    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<TruncSeries>,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j)?);
            }
        }
        Ok(SeriesMat {
            rows,
            cols,
            entries,
        })
    }

    /// Stack column vectors into a matrix.
    pub fn from_columns(columns: &[Vec<TruncSeries>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map(|c| c.len()).unwrap_or(0);
        Self::from_fn(rows, cols, |i, j| columns[j][i].clone())
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry accessor.
    pub fn get(&self, i: usize, j: usize) -> &TruncSeries {
        &self.entries[i * self.cols + j]
    }

    /// Entry setter.
    pub fn set(&mut self, i: usize, j: usize, v: TruncSeries) {
        self.entries[i * self.cols + j] = v;
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<TruncSeries> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// The scheme of the first entry (all entries share it).
    pub fn scheme(&self) -> &Arc<VariableScheme> {
        self.entries[0].scheme()
    }

    /// The scalar table of the first entry.
    pub fn table(&self) -> &Arc<VarTable> {
        self.entries[0].table()
    }

    /// Entrywise map.
    pub fn map(&self, mut f: impl FnMut(&TruncSeries) -> TruncSeries) -> Self {
        SeriesMat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| f(e)).collect(),
        }
    }

    /// Entrywise fallible map.
    pub fn try_map(&self, mut f: impl FnMut(&TruncSeries) -> Result<TruncSeries>) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            entries.push(f(e)?);
        }
        Ok(SeriesMat {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        SeriesMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        SeriesMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        let scheme = self.scheme().clone();
        let table = self.table().clone();
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = TruncSeries::zero(&scheme, &table);
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        })
    }

    /// Scale every entry by a series.
    pub fn scale_series(&self, s: &TruncSeries) -> Self {
        self.map(|e| e.mul(s))
    }

    /// Scale every entry by a scalar.
    pub fn scale(&self, c: &RatFun) -> Self {
        self.map(|e| e.scale(c))
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Multiply every entry by `z^n`.
    pub fn mul_z(&self, n: i32) -> Self {
        self.map(|e| e.mul_z(n))
    }

    /// Substitute `z → -z` in every entry.
    pub fn flip_z(&self) -> Self {
        self.map(|e| e.flip_z())
    }

    /// Restrict every entry's exactness window.
    pub fn truncate_window(&self, lo: i32, hi: i32) -> Self {
        self.map(|e| e.truncate_window(lo, hi))
    }

    /// Require every entry exact on `[lo, hi]`.
    pub fn require_window(&self, lo: i32, hi: i32) -> Result<()> {
        for e in &self.entries {
            e.require_window(lo, hi)?;
        }
        Ok(())
    }

    /// The deformation-constant part at `z^0` as a scalar matrix, requiring
    /// that the constant key carries nothing else inside the window.
    pub fn constant_scalar_part(&self) -> Result<Vec<Vec<RatFun>>> {
        let key = self.scheme().key_one();
        let mut out = vec![vec![RatFun::zero(self.table()); self.cols]; self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                let c0 = e.constant_key_part();
                for (_, zp, c) in c0.iter() {
                    if zp != 0 && !c.is_zero() {
                        return Err(Error::NonInvertibleLeadingTerm(format!(
                            "entry ({i},{j}) has z-dependent constant term"
                        )));
                    }
                }
                out[i][j] = e.coeff(&key, 0)?;
            }
        }
        Ok(out)
    }

    /// Inverse of a matrix whose deformation-constant part is the identity
    /// (`M = Id + N` with `N` of positive order): terminating geometric
    /// series `Σ (-N)^k`.
    pub fn invert_unipotent(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "inverse needs a square matrix");
        let scheme = self.scheme().clone();
        let table = self.table().clone();
        let id = Self::identity(&scheme, &table, self.rows);
        // Verify the constant part is exactly Id.
        for i in 0..self.rows {
            for j in 0..self.cols {
                let c0 = self.get(i, j).constant_key_part();
                let expect =
                    if i == j { Some(()) } else { None };
                for (_, zp, c) in c0.iter() {
                    let is_unit = expect.is_some() && zp == 0 && c.is_one();
                    if !is_unit && !c.is_zero() {
                        return Err(Error::NonInvertibleLeadingTerm(format!(
                            "matrix is not unipotent at entry ({i},{j})"
                        )));
                    }
                }
                if expect.is_some() {
                    let diag = self.get(i, j).coeff(&scheme.key_one(), 0)?;
                    if !diag.is_one() {
                        return Err(Error::NonInvertibleLeadingTerm(format!(
                            "matrix diagonal ({i},{i}) constant term is {diag}, not 1"
                        )));
                    }
                }
            }
        }
        let n = self.sub(&id);
        let bound = scheme.nov_total_cap() + scheme.par_total_cap() + 1;
        let mut acc = id.clone();
        let mut pow = id;
        for _ in 1..=bound {
            pow = pow.mul(&n).neg();
            if pow.entries.iter().all(|e| e.is_provably_zero()) {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc)
    }

    /// Inverse of a matrix whose deformation-constant part is an invertible
    /// `z`-free scalar matrix: factor it out exactly, then invert the
    /// unipotent remainder.
    pub fn invert_leading_scalar(&self) -> Result<Self> {
        let c = self.constant_scalar_part()?;
        let c_inv = ratfun_mat_inverse(&c, self.table())?;
        let c_inv_mat = Self::from_fn(self.rows, self.cols, |i, j| {
            TruncSeries::constant(self.scheme(), self.table(), c_inv[i][j].clone())
        });
        let unipotent = c_inv_mat.mul(self);
        Ok(unipotent.invert_unipotent()?.mul(&c_inv_mat))
    }
}

impl fmt::Display for SeriesMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                writeln!(f, "[{i},{j}] = {}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Exact inverse of a square scalar matrix by Gauss–Jordan elimination.
pub fn ratfun_mat_inverse(m: &[Vec<RatFun>], table: &Arc<VarTable>) -> Result<Vec<Vec<RatFun>>> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::RankMismatch("matrix is not square".into()));
    }
    let mut a: Vec<Vec<RatFun>> = m.to_vec();
    let mut inv: Vec<Vec<RatFun>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        RatFun::one(table)
                    } else {
                        RatFun::zero(table)
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        // Pivot: any row with a nonzero entry in this column.
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::SingularLinearSolve(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p_inv = a[col][col].inverse()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&p_inv);
            inv[col][j] = inv[col][j].mul(&p_inv);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = a[col][j].mul(&factor);
                a[r][j] = a[r][j].sub(&t);
                let t = inv[col][j].mul(&factor);
                inv[r][j] = inv[r][j].sub(&t);
            }
        }
    }
    Ok(inv)
}

/// Product of scalar matrices.
pub fn ratfun_mat_mul(a: &[Vec<RatFun>], b: &[Vec<RatFun>], table: &Arc<VarTable>) -> Vec<Vec<RatFun>> {
    let n = a.len();
    let k = b.len();
    let m = if k > 0 { b[0].len() } else { 0 };
    let mut out = vec![vec![RatFun::zero(table); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if b[l][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][l].mul(&b[l][j]));
            }
        }
    }
    out
}

/// Matrix–vector product over scalars.
pub fn ratfun_mat_vec(a: &[Vec<RatFun>], v: &[RatFun], table: &Arc<VarTable>) -> Vec<RatFun> {
    a.iter()
        .map(|row| {
            let mut acc = RatFun::zero(table);
            for (c, x) in row.iter().zip(v) {
                if !c.is_zero() && !x.is_zero() {
                    acc = acc.add(&c.mul(x));
                }
            }
            acc
        })
        .collect()
}
