//! Exact linear algebra over prime fields F_q.
//!
//! Matrices are dense, row-major, and immutable after construction. A
//! matrix with zero rows or zero columns is a valid "empty matrix"; it is
//! full rank with rank 0, and multiplying by it yields an empty (or
//! all-zero) product of the appropriate shape.
//!
//! Enumeration of full-rank matrices is canonicalized by row span: every
//! span is produced exactly once, represented by its reduced row echelon
//! form with zero rows dropped.

use thiserror::Error;

/// Default cap on the raw candidate space `q^(rows*cols)` of the
/// enumeration operations.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("modulus {0} is not a supported prime")]
    BadModulus(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("row index {index} out of range for matrix with {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("entry {0} is not reduced modulo {1}")]
    EntryOutOfRange(u64, u64),
    #[error("enumeration space of {space} candidates exceeds budget {budget}")]
    BudgetExceeded { space: u128, budget: u64 },
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Checks that `q` is a prime small enough that products of two reduced
/// residues cannot overflow a `u64`.
fn check_modulus(q: u64) -> Result<(), GfError> {
    if q >= (1 << 31) || !is_prime(q) {
        return Err(GfError::BadModulus(q));
    }
    Ok(())
}

/// An element of the prime field F_q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GfElem {
    value: u64,
    modulus: u64,
}

impl GfElem {
    pub fn new(value: u64, modulus: u64) -> Result<Self, GfError> {
        check_modulus(modulus)?;
        Ok(Self {
            value: value % modulus,
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn add(&self, other: &GfElem) -> GfElem {
        debug_assert_eq!(self.modulus, other.modulus);
        GfElem {
            value: (self.value + other.value) % self.modulus,
            modulus: self.modulus,
        }
    }

    pub fn sub(&self, other: &GfElem) -> GfElem {
        debug_assert_eq!(self.modulus, other.modulus);
        GfElem {
            value: (self.value + self.modulus - other.value) % self.modulus,
            modulus: self.modulus,
        }
    }

    pub fn mul(&self, other: &GfElem) -> GfElem {
        debug_assert_eq!(self.modulus, other.modulus);
        GfElem {
            value: (self.value * other.value) % self.modulus,
            modulus: self.modulus,
        }
    }

    /// Multiplicative inverse via Fermat's little theorem. Zero has none.
    pub fn inv(&self) -> Option<GfElem> {
        if self.value == 0 {
            return None;
        }
        Some(GfElem {
            value: pow_mod(self.value, self.modulus - 2, self.modulus),
            modulus: self.modulus,
        })
    }
}

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

/// A dense matrix over the prime field F_q, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GfMatrix {
    rows: usize,
    cols: usize,
    q: u64,
    data: Vec<u64>,
}

impl GfMatrix {
    /// All-zero matrix of the given shape. Zero rows or columns are fine.
    pub fn zero(rows: usize, cols: usize, q: u64) -> Result<Self, GfError> {
        check_modulus(q)?;
        Ok(Self {
            rows,
            cols,
            q,
            data: vec![0; rows * cols],
        })
    }

    /// Builds a matrix from nested rows; entries must already be reduced.
    pub fn from_rows(rows: &[Vec<u64>], cols: usize, q: u64) -> Result<Self, GfError> {
        check_modulus(q)?;
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(GfError::DimensionMismatch(format!(
                    "row of length {} in a {}-column matrix",
                    row.len(),
                    cols
                )));
            }
            for &v in row {
                if v >= q {
                    return Err(GfError::EntryOutOfRange(v, q));
                }
                data.push(v);
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            q,
            data,
        })
    }

    /// Convenience constructor for a single row vector.
    pub fn row_vector(row: &[u64], q: u64) -> Result<Self, GfError> {
        Self::from_rows(&[row.to_vec()], row.len(), q)
    }

    pub fn identity(n: usize, q: u64) -> Result<Self, GfError> {
        let mut m = Self::zero(n, n, q)?;
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        Ok(m)
    }

    /// The matrix `I(S)` whose rows are the standard basis vectors `e_k`,
    /// `k` in `s`, in ascending order. `s` must hold zero-based indices
    /// below `n`.
    pub fn identity_rows(s: &[usize], n: usize, q: u64) -> Result<Self, GfError> {
        let mut m = Self::zero(s.len(), n, q)?;
        for (i, &k) in s.iter().enumerate() {
            if k >= n {
                return Err(GfError::RowOutOfRange { index: k, rows: n });
            }
            m.data[i * n + k] = 1;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn elem(&self, r: usize, c: usize) -> GfElem {
        GfElem {
            value: self.get(r, c),
            modulus: self.q,
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Vertically stacks `self` on top of `other`.
    pub fn stack(&self, other: &GfMatrix) -> Result<GfMatrix, GfError> {
        if self.q != other.q {
            return Err(GfError::DimensionMismatch(format!(
                "stacking matrices over F_{} and F_{}",
                self.q, other.q
            )));
        }
        // A genuinely empty operand adapts to the other's width.
        let cols = if self.rows == 0 && self.cols != other.cols {
            other.cols
        } else {
            self.cols
        };
        if other.rows != 0 && other.cols != cols {
            return Err(GfError::DimensionMismatch(format!(
                "stacking {} columns on {} columns",
                other.cols, cols
            )));
        }
        let mut data = Vec::with_capacity((self.rows + other.rows) * cols);
        if self.cols == cols {
            data.extend_from_slice(&self.data);
        }
        if other.cols == cols {
            data.extend_from_slice(&other.data);
        }
        Ok(GfMatrix {
            rows: self.rows + other.rows,
            cols,
            q: self.q,
            data,
        })
    }

    pub fn transpose(&self) -> GfMatrix {
        let mut data = vec![0; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.get(r, c);
            }
        }
        GfMatrix {
            rows: self.cols,
            cols: self.rows,
            q: self.q,
            data,
        }
    }
}

/// Row rank of `m` over F_q. An empty matrix has rank 0.
pub fn rank(m: &GfMatrix) -> usize {
    reduce(m.clone(), false).0
}

/// The unique reduced row echelon form of `m` with zero rows dropped.
/// Idempotent; preserves the row span.
pub fn rref(m: &GfMatrix) -> GfMatrix {
    let (r, mut reduced) = reduce(m.clone(), true);
    reduced.data.truncate(r * reduced.cols);
    reduced.rows = r;
    reduced
}

/// In-place Gaussian elimination. With `full` the result is the reduced
/// row echelon form (pivots 1, cleared above and below, zero rows sunk to
/// the bottom); otherwise only the rank is meaningful. Returns the rank
/// and the worked matrix.
fn reduce(mut m: GfMatrix, full: bool) -> (usize, GfMatrix) {
    let q = m.q;
    let (rows, cols) = (m.rows, m.cols);
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        let Some(src) = (pivot_row..rows).find(|&r| m.get(r, col) != 0) else {
            continue;
        };
        if src != pivot_row {
            for c in 0..cols {
                m.data.swap(src * cols + c, pivot_row * cols + c);
            }
        }
        let inv = GfElem {
            value: m.get(pivot_row, col),
            modulus: q,
        }
        .inv()
        .expect("pivot is nonzero");
        for c in col..cols {
            let v = m.get(pivot_row, c);
            m.data[pivot_row * cols + c] = v * inv.value % q;
        }
        let lo = if full { 0 } else { pivot_row + 1 };
        for r in lo..rows {
            if r == pivot_row {
                continue;
            }
            let factor = m.get(r, col);
            if factor == 0 {
                continue;
            }
            for c in col..cols {
                let sub = factor * m.get(pivot_row, c) % q;
                let v = m.get(r, c);
                m.data[r * cols + c] = (v + q - sub) % q;
            }
        }
        pivot_row += 1;
    }
    (pivot_row, m)
}

/// True iff every row of `small` lies in the row span of `big`, tested as
/// `rank(stack(big, small)) == rank(big)`.
pub fn span_contains(big: &GfMatrix, small: &GfMatrix) -> Result<bool, GfError> {
    if big.q != small.q {
        return Err(GfError::DimensionMismatch(format!(
            "span test over F_{} and F_{}",
            big.q, small.q
        )));
    }
    if big.cols != small.cols && !big.is_empty() && !small.is_empty() {
        return Err(GfError::DimensionMismatch(format!(
            "span test with {} and {} columns",
            big.cols, small.cols
        )));
    }
    let stacked = big.stack(small)?;
    Ok(rank(&stacked) == rank(big))
}

/// An RREF basis of the left nullspace `{c : c * m = 0}` of `m`. The
/// result has `rows(m)` columns and `rows(m) - rank(m)` rows.
pub fn nullspace_rowbasis(m: &GfMatrix) -> GfMatrix {
    let q = m.q;
    let rows = m.rows;
    let cols = m.cols;
    // Row-reduce [m | I]; rows whose m-part vanishes carry the kernel
    // combinations in the augmented part.
    let mut aug = GfMatrix::zero(rows, cols + rows, q).expect("modulus already validated");
    for r in 0..rows {
        for c in 0..cols {
            aug.data[r * (cols + rows) + c] = m.get(r, c);
        }
        aug.data[r * (cols + rows) + cols + r] = 1;
    }
    let width = cols + rows;
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        let Some(src) = (pivot_row..rows).find(|&r| aug.get(r, col) != 0) else {
            continue;
        };
        if src != pivot_row {
            for c in 0..width {
                aug.data.swap(src * width + c, pivot_row * width + c);
            }
        }
        let inv = GfElem {
            value: aug.get(pivot_row, col),
            modulus: q,
        }
        .inv()
        .expect("pivot is nonzero");
        for c in 0..width {
            let v = aug.get(pivot_row, c);
            aug.data[pivot_row * width + c] = v * inv.value % q;
        }
        for r in 0..rows {
            if r == pivot_row {
                continue;
            }
            let factor = aug.get(r, col);
            if factor == 0 {
                continue;
            }
            for c in 0..width {
                let sub = factor * aug.get(pivot_row, c) % q;
                let v = aug.get(r, c);
                aug.data[r * width + c] = (v + q - sub) % q;
            }
        }
        pivot_row += 1;
    }
    let mut basis_rows = Vec::new();
    for r in 0..rows {
        if (0..cols).all(|c| aug.get(r, c) == 0) {
            basis_rows.push(aug.data[r * width + cols..(r + 1) * width].to_vec());
        }
    }
    let basis = GfMatrix::from_rows(&basis_rows, rows, q).expect("kernel rows are reduced");
    rref(&basis)
}

/// The submatrix of `m` made of the rows indexed by `s`, ascending.
/// Equals `I(S) * m`. Indices are zero-based.
pub fn select_rows(m: &GfMatrix, s: &[usize]) -> Result<GfMatrix, GfError> {
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for &idx in &sorted {
        if idx >= m.rows {
            return Err(GfError::RowOutOfRange {
                index: idx,
                rows: m.rows,
            });
        }
        rows.push(m.row(idx).to_vec());
    }
    GfMatrix::from_rows(&rows, m.cols, m.q)
}

/// Matrix product over F_q. A product with an empty operand is the empty
/// (or all-zero) matrix of the resulting shape.
pub fn matmul(a: &GfMatrix, b: &GfMatrix) -> Result<GfMatrix, GfError> {
    if a.q != b.q {
        return Err(GfError::DimensionMismatch(format!(
            "product over F_{} and F_{}",
            a.q, b.q
        )));
    }
    if a.cols != b.rows && !(a.rows == 0 && a.cols == 0) {
        return Err(GfError::DimensionMismatch(format!(
            "product of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let inner = a.cols.min(b.rows);
    let mut out = GfMatrix::zero(a.rows, b.cols, a.q)?;
    for r in 0..a.rows {
        for i in 0..inner {
            let f = a.get(r, i);
            if f == 0 {
                continue;
            }
            for c in 0..b.cols {
                let v = out.get(r, c);
                out.data[r * b.cols + c] = (v + f * b.get(i, c)) % a.q;
            }
        }
    }
    Ok(out)
}

/// All size-`m` subsets of `{0, ..., n-1}` in lexicographic order.
pub fn index_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(current.clone());
        // Advance to the next combination.
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + n - m {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..m {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn enum_space(rows: usize, cols: usize, q: u64) -> u128 {
    let exp = (rows * cols) as u32;
    (q as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

/// Enumerates every full-rank `rows x cols` matrix in reduced row echelon
/// form exactly once (one representative per `rows`-dimensional row
/// span). The budget caps the raw search space `q^(rows*cols)`.
pub fn enum_fullrank_rref(
    rows: usize,
    cols: usize,
    q: u64,
    budget: u64,
) -> Result<Vec<GfMatrix>, GfError> {
    check_modulus(q)?;
    let space = enum_space(rows, cols, q);
    if space > budget as u128 {
        return Err(GfError::BudgetExceeded { space, budget });
    }
    if rows > cols {
        return Ok(Vec::new());
    }
    if rows == 0 {
        return Ok(vec![GfMatrix::zero(0, cols, q)?]);
    }
    let mut out = Vec::new();
    for pivots in index_subsets(cols, rows) {
        // Free positions: right of the row's own pivot, not a pivot column.
        let mut free = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for c in p + 1..cols {
                if !pivots.contains(&c) {
                    free.push((i, c));
                }
            }
        }
        let mut assignment = vec![0u64; free.len()];
        loop {
            let mut m = GfMatrix::zero(rows, cols, q)?;
            for (i, &p) in pivots.iter().enumerate() {
                m.data[i * cols + p] = 1;
            }
            for (slot, &(r, c)) in free.iter().enumerate() {
                m.data[r * cols + c] = assignment[slot];
            }
            out.push(m);
            // Odometer over the free entries.
            let mut idx = 0;
            loop {
                if idx == assignment.len() {
                    break;
                }
                assignment[idx] += 1;
                if assignment[idx] < q {
                    break;
                }
                assignment[idx] = 0;
                idx += 1;
            }
            if idx == assignment.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Enumerates all RREF full-rank `lb x cols(a)` matrices whose row span
/// contains the row span of `a`, each span exactly once.
pub fn enum_superspan_rref(a: &GfMatrix, lb: usize, budget: u64) -> Result<Vec<GfMatrix>, GfError> {
    let r = rank(a);
    if lb < r || lb > a.cols {
        return Err(GfError::DimensionMismatch(format!(
            "superspan dimension {} outside [{}, {}]",
            lb, r, a.cols
        )));
    }
    let mut out = Vec::new();
    for candidate in enum_fullrank_rref(lb, a.cols, a.q, budget)? {
        if span_contains(&candidate, a)? {
            out.push(candidate);
        }
    }
    Ok(out)
}
