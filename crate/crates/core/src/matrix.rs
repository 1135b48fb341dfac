//! Dense matrices over `Z/p^N` and the Smith normal form.

use std::fmt;

use thiserror::Error;

use crate::padic::{PAdicInt, PadicError, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Ring(#[from] PadicError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct RingMatrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    entries: Vec<PAdicInt>,
}

impl RingMatrix {
    pub fn new(ring: Ring, rows: usize, cols: usize, entries: Vec<PAdicInt>) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::Shape { rows, cols, got: entries.len() });
        }
        for e in &entries {
            ring.check_same(&e.ring())?;
        }
        Ok(RingMatrix { ring, rows, cols, entries })
    }

    pub fn from_ints(ring: Ring, rows: usize, cols: usize, ints: &[i64]) -> Result<Self, MatrixError> {
        Self::new(ring, rows, cols, ints.iter().map(|&n| ring.reduce(n)).collect())
    }

    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Self {
        RingMatrix { ring, rows, cols, entries: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: Ring, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(ring: Ring, rows: usize, columns: &[Vec<PAdicInt>]) -> Self {
        let mut m = Self::zeros(ring, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> PAdicInt {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PAdicInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<PAdicInt> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[PAdicInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn to_signed_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|e| e.residue() as i64).collect()).collect()
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.ring.check_same(&other.ring)?;
        let mut out = RingMatrix::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.entries[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[PAdicInt]) -> Result<Vec<PAdicInt>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::Dimension(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(self.ring.zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect())
    }

    pub fn scale(&self, s: PAdicInt) -> RingMatrix {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e *= s;
        }
        out
    }

    pub fn sub(&self, other: &RingMatrix) -> RingMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a -= *b;
        }
        out
    }

    /// Reduce every entry to a lower precision of the same prime.
    pub fn truncate(&self, ring: Ring) -> RingMatrix {
        RingMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.truncate(ring)).collect(),
        }
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &RingMatrix) -> RingMatrix {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        RingMatrix { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, entries }
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &RingMatrix) -> RingMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = RingMatrix::zeros(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row_dst += s * row_src
    fn add_row(&mut self, dst: usize, src: usize, s: PAdicInt) {
        for j in 0..self.cols {
            let v = self.get(src, j);
            self.entries[dst * self.cols + j] += s * v;
        }
    }

    /// col_dst += s * col_src
    fn add_col(&mut self, dst: usize, src: usize, s: PAdicInt) {
        for i in 0..self.rows {
            let v = self.get(i, src);
            self.entries[i * self.cols + dst] += s * v;
        }
    }

    fn scale_row(&mut self, i: usize, s: PAdicInt) {
        for j in 0..self.cols {
            self.entries[i * self.cols + j] *= s;
        }
    }

    fn scale_col(&mut self, j: usize, s: PAdicInt) {
        for i in 0..self.rows {
            self.entries[i * self.cols + j] *= s;
        }
    }
}

impl fmt::Debug for RingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RingMatrix {}x{} over {}", self.rows, self.cols, self.ring)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|e| e.signed().to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `U * M * V = D` with `D` diagonal, entries `p^e_1, ..., p^e_k, 0, ...`
/// and `e_1 <= ... <= e_k < N`. Inverses of `U` and `V` are carried along.
#[derive(Debug, Clone)]
pub struct SnfDecomposition {
    pub u: RingMatrix,
    pub u_inv: RingMatrix,
    pub d: RingMatrix,
    pub v: RingMatrix,
    pub v_inv: RingMatrix,
    /// Valuations of the nonzero diagonal entries, in order.
    pub diagonal_exponents: Vec<u32>,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.diagonal_exponents.len()
    }

    /// Columns of `V` with a zero diagonal entry: a free basis of the part of
    /// the kernel that does not come from truncation.
    pub fn free_kernel_columns(&self) -> Vec<Vec<PAdicInt>> {
        (self.rank()..self.v.cols()).map(|j| self.v.column(j)).collect()
    }

    /// log_p |ker M| over `Z/p^N`.
    pub fn kernel_log_size(&self) -> u32 {
        let n = self.d.ring().precision();
        let free = (self.v.cols() - self.rank()) as u32 * n;
        free + self.diagonal_exponents.iter().sum::<u32>()
    }

    /// log_p |im M| over `Z/p^N`.
    pub fn image_log_size(&self) -> u32 {
        let n = self.d.ring().precision();
        self.diagonal_exponents.iter().map(|e| n - e).sum()
    }
}

/// Smith normal form. Pivot: entry of minimal valuation, ties broken by the
/// lowest (row, col) in lexicographic order.
pub fn smith_normal_form(m: &RingMatrix) -> SnfDecomposition {
    let ring = m.ring();
    let n = ring.precision();
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = RingMatrix::identity(ring, rows);
    let mut u_inv = RingMatrix::identity(ring, rows);
    let mut v = RingMatrix::identity(ring, cols);
    let mut v_inv = RingMatrix::identity(ring, cols);
    let mut exponents = Vec::new();

    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let val = d.get(i, j).valuation();
                if val < n && best.map_or(true, |(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                }
            }
        }
        let Some((e, pi, pj)) = best else { break };

        // D -> S D T keeps U M V = D when U -> S U and V -> V T.
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        u_inv.swap_cols(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        v_inv.swap_rows(t, pj);

        let pivot = d.get(t, t);
        let unit = pivot.div_p_pow(e).expect("pivot valuation").inverse().expect("unit part");
        let unit_inv = unit.inverse().expect("unit");
        d.scale_row(t, unit);
        u.scale_row(t, unit);
        u_inv.scale_col(t, unit_inv);

        for i in t + 1..rows {
            let a = d.get(i, t);
            if a.is_zero() {
                continue;
            }
            let q = a.div_p_pow(e).expect("minimal valuation pivot divides column");
            d.add_row(i, t, -q);
            u.add_row(i, t, -q);
            // inverse of (row_i -= q row_t) is (row_i += q row_t); on the right: col_t += q col_i
            u_inv.add_col(t, i, q);
        }
        for j in t + 1..cols {
            let a = d.get(t, j);
            if a.is_zero() {
                continue;
            }
            let q = a.div_p_pow(e).expect("minimal valuation pivot divides row");
            d.add_col(j, t, -q);
            v.add_col(j, t, -q);
            v_inv.add_row(t, j, q);
        }
        exponents.push(e);
    }

    SnfDecomposition { u, u_inv, d, v, v_inv, diagonal_exponents: exponents }
}

/// Some `x` with `M x = b`, or `None` when no solution exists over `Z/p^N`.
/// The returned solution is the SNF-canonical one (zero on kernel directions,
/// signed-residue quotients on the diagonal).
pub fn solve_linear(m: &RingMatrix, b: &[PAdicInt]) -> Result<Option<Vec<PAdicInt>>, MatrixError> {
    let snf = smith_normal_form(m);
    solve_with_snf(m, &snf, b)
}

pub fn solve_with_snf(
    m: &RingMatrix,
    snf: &SnfDecomposition,
    b: &[PAdicInt],
) -> Result<Option<Vec<PAdicInt>>, MatrixError> {
    if b.len() != m.rows() {
        return Err(MatrixError::Dimension(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            m.rows()
        )));
    }
    let ring = m.ring();
    for e in b {
        ring.check_same(&e.ring())?;
    }
    let ub = snf.u.apply(b)?;
    let mut y = vec![ring.zero(); m.cols()];
    for (i, c) in ub.iter().enumerate() {
        if i < snf.rank() {
            match c.div_p_pow(snf.diagonal_exponents[i]) {
                Some(q) => y[i] = q,
                None => return Ok(None),
            }
        } else if !c.is_zero() {
            return Ok(None);
        }
    }
    Ok(Some(snf.v.apply(&y)?))
}
