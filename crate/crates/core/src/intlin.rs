//! Exact integer linear algebra.
//!
//! Everything here runs on arbitrary-precision integers: intermediate entries of
//! the Hermite reduction and of fraction-free elimination can grow well beyond
//! the size of the inputs, so there is no fixed-width path to overflow.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CilsError, Result};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CilsError::InvalidArgument(format!(
                "integer matrix must be nonempty, got {rows}x{cols}"
            )));
        }
        Ok(IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        Ok(m)
    }

    /// Builds a matrix from rows of machine integers. All rows must have equal length.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(nrows, ncols)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(CilsError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m.data[i * ncols + j] = BigInt::from(v);
            }
        }
        Ok(m)
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols)?;
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(CilsError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (j, v) in row.into_iter().enumerate() {
                m.data[i * ncols + j] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        IntMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(CilsError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> IntMatrix {
        let k = BigInt::from(k);
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * &k).collect(),
        }
    }

    /// Converts to machine integers, failing if any entry does not fit in `i64`.
    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| {
                        v.to_i64()
                            .ok_or(CilsError::Overflow("integer matrix to i64"))
                    })
                    .collect()
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = -std::mem::take(v);
        }
    }

    /// row[target] -= q * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = q * &self.data[source * self.cols + j];
            self.data[target * self.cols + j] -= delta;
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// `H = U·A` with `U` unimodular and `H` in row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnfResult {
    pub h: IntMatrix,
    pub u: IntMatrix,
}

impl HnfResult {
    /// Pivot column of each row of `H`, `None` for zero rows.
    pub fn pivots(&self) -> Vec<Option<usize>> {
        pivot_columns(&self.h)
    }

    /// Number of nonzero rows of `H`, which is the rank of `A`.
    pub fn rank(&self) -> usize {
        self.pivots().iter().flatten().count()
    }
}

/// Row-style Hermite normal form.
///
/// Pivots are positive and every entry above a pivot is reduced into
/// `[0, pivot)`. Zero rows are kept at the bottom so that `H = U·A` holds with a
/// square `U`.
pub fn hermite_normal_form(a: &IntMatrix) -> HnfResult {
    let rows = a.rows();
    let mut h = a.clone();
    let mut u = IntMatrix::identity(rows).expect("rows >= 1");
    let mut r = 0;

    for c in 0..a.cols() {
        if r == rows {
            break;
        }
        // Euclid on column c over rows r.. until a single nonzero remains at row r.
        loop {
            let pivot = (r..rows)
                .filter(|&i| !h.get(i, c).is_zero())
                .min_by(|&x, &y| h.get(x, c).abs().cmp(&h.get(y, c).abs()));
            let Some(p) = pivot else { break };
            h.swap_rows(p, r);
            u.swap_rows(p, r);
            let mut clean = true;
            for i in r + 1..rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                let q = h.get(i, c).div_floor(h.get(r, c));
                h.sub_row_multiple(i, r, &q);
                u.sub_row_multiple(i, r, &q);
                if !h.get(i, c).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let pivot = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&pivot);
            h.sub_row_multiple(i, r, &q);
            u.sub_row_multiple(i, r, &q);
        }
        r += 1;
    }
    HnfResult { h, u }
}

/// First nonzero column of every row.
pub fn pivot_columns(h: &IntMatrix) -> Vec<Option<usize>> {
    (0..h.rows())
        .map(|i| h.row(i).iter().position(|v| !v.is_zero()))
        .collect()
}

/// Pivot columns strictly increase down the nonzero rows and zero rows come last.
pub fn is_row_echelon(h: &IntMatrix) -> bool {
    let mut last: Option<usize> = None;
    let mut seen_zero = false;
    for p in pivot_columns(h) {
        match p {
            None => seen_zero = true,
            Some(c) => {
                if seen_zero || last.is_some_and(|l| c <= l) {
                    return false;
                }
                last = Some(c);
            }
        }
    }
    true
}

/// Checks `H = U·A`, `|det U| = 1` and that `H` is row-echelon.
pub fn validate_hnf(h: &IntMatrix, u: &IntMatrix, a: &IntMatrix) -> Result<bool> {
    if u.rows() != u.cols() {
        return Err(CilsError::DimensionMismatch(format!(
            "U must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    if u.cols() != a.rows() || h.rows() != a.rows() || h.cols() != a.cols() {
        return Err(CilsError::DimensionMismatch(format!(
            "H {}x{}, U {}x{}, A {}x{} are incompatible",
            h.rows(),
            h.cols(),
            u.rows(),
            u.cols(),
            a.rows(),
            a.cols()
        )));
    }
    if &u.mul(a)? != h {
        return Ok(false);
    }
    if determinant(u)?.abs() != BigInt::one() {
        return Ok(false);
    }
    Ok(is_row_echelon(h))
}

/// Exact determinant by Bareiss elimination.
pub fn determinant(m: &IntMatrix) -> Result<BigInt> {
    if m.rows() != m.cols() {
        return Err(CilsError::DimensionMismatch(format!(
            "determinant of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
            return Ok(BigInt::zero());
        };
        if p != k {
            a.swap_rows(p, k);
            sign = !sign;
        }
        bareiss_step(&mut a, k, k, &prev);
        prev = a.get(k, k).clone();
    }
    let det = a.get(n - 1, n - 1).clone();
    Ok(if sign { -det } else { det })
}

/// Exact rank over the rationals by fraction-free elimination.
pub fn int_rank(x: &IntMatrix) -> usize {
    let mut a = x.clone();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..a.cols() {
        if rank == a.rows() {
            break;
        }
        let Some(p) = (rank..a.rows()).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        a.swap_rows(p, rank);
        bareiss_step(&mut a, rank, c, &prev);
        prev = a.get(rank, c).clone();
        rank += 1;
    }
    rank
}

/// One Bareiss update below pivot `(r, c)`; every division is exact.
fn bareiss_step(a: &mut IntMatrix, r: usize, c: usize, prev: &BigInt) {
    let cols = a.cols();
    let pivot = a.get(r, c).clone();
    for i in r + 1..a.rows() {
        let factor = a.get(i, c).clone();
        for j in c + 1..cols {
            let v = &pivot * a.get(i, j) - &factor * a.get(r, j);
            debug_assert!((&v % prev).is_zero());
            a.set(i, j, v / prev);
        }
        a.set(i, c, BigInt::zero());
    }
}
