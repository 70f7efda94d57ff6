//! Exact rational and integer linear algebra kernels.
//!
//! Everything here computes over arbitrary-precision integers or rationals;
//! no floating point enters any code path. Rank and kernels use fraction-free
//! (Bareiss) elimination to keep intermediate entries small, and the Smith
//! normal form carries its unimodular transforms so that integer solvability
//! questions can be decided downstream.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Arbitrary-precision rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Shorthand for a small rational `p/q`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Shorthand for an integer as a rational.
pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Errors raised by the exact kernels.
#[derive(Debug, Error)]
pub enum ExactError {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An operation requiring integer entries received a proper fraction.
    #[error("entry ({row}, {col}) is not an integer")]
    NonIntegralEntry { row: usize, col: usize },
    /// The averaging projector needs at least one representation matrix.
    #[error("empty representation list")]
    EmptyRepresentation,
    /// A square matrix was required.
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// Dense matrix over the rationals, row-major, entries kept in lowest terms
/// (automatic with [`BigRational`]).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![Rat::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rat::one() } else { Rat::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Convenience constructor from integer literals.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| rat_int(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Rat::zero();
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, j);
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * &v[k];
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) + other.get(i, j)
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) - other.get(i, j)
        })
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * c)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Interprets the matrix as an integer matrix, rejecting fractions.
    pub fn to_int(&self) -> Result<IntMatrix, ExactError> {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                if !x.is_integer() {
                    return Err(ExactError::NonIntegralEntry { row: i, col: j });
                }
                data.push(x.to_integer());
            }
        }
        Ok(IntMatrix::new(self.rows, self.cols, data))
    }

    /// Exact inverse by Gauss-Jordan elimination, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a.get(i, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                let v = a.get(col, j) / &p;
                a.set(col, j, v);
                let w = inv.get(col, j) / &p;
                inv.set(col, j, w);
            }
            for i in 0..n {
                if i == col || a.get(i, col).is_zero() {
                    continue;
                }
                let f = a.get(i, col).clone();
                for j in 0..n {
                    let v = a.get(i, j) - &f * a.get(col, j);
                    a.set(i, j, v);
                    let w = inv.get(i, j) - &f * inv.get(col, j);
                    inv.set(i, j, w);
                }
            }
        }
        Some(inv)
    }
}

/// Dense matrix over the integers, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = BigInt::zero();
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, j);
            }
            acc
        })
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.get(i, j).is_one()
                    } else {
                        self.get(i, j).is_zero()
                    }
                })
            })
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| {
            Rat::from_integer(self.get(i, j).clone())
        })
    }

    /// Exact integer inverse; `None` unless the matrix is unimodular.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        let inv = self.to_rational().inverse()?;
        inv.to_int().ok()
    }

    pub fn det(&self) -> BigInt {
        det_int(self)
    }
}

/// Result of a fraction-free elimination: integer echelon form plus pivot
/// bookkeeping.
struct Echelon {
    mat: IntMatrix,
    pivot_cols: Vec<usize>,
    sign: i32,
}

/// Bareiss fraction-free elimination to row echelon form. All divisions are
/// exact; debug builds verify this.
fn bareiss_echelon(input: &IntMatrix) -> Echelon {
    let mut m = input.clone();
    let (rows, cols) = (m.rows, m.cols);
    let mut pivot_cols = Vec::new();
    let mut sign = 1;
    let mut prev = BigInt::one();
    let mut r = 0usize;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                m.data.swap(p * cols + j, r * cols + j);
            }
            sign = -sign;
        }
        let pivot = m.get(r, c).clone();
        for i in (r + 1)..rows {
            let head = m.get(i, c).clone();
            for j in 0..cols {
                let v = if j < c {
                    m.get(i, j).clone()
                } else {
                    let num = &pivot * m.get(i, j) - &head * m.get(r, j);
                    debug_assert!((&num % &prev).is_zero(), "Bareiss division not exact");
                    num / &prev
                };
                m.set(i, j, v);
            }
        }
        prev = pivot;
        pivot_cols.push(c);
        r += 1;
    }
    Echelon {
        mat: m,
        pivot_cols,
        sign,
    }
}

/// Clears denominators row by row, returning the integer matrix and the
/// factor each row was multiplied by.
fn clear_rows(m: &RationalMatrix) -> (IntMatrix, Vec<BigInt>) {
    let mut scales = Vec::with_capacity(m.rows);
    let mut out = IntMatrix::zeros(m.rows, m.cols);
    for i in 0..m.rows {
        let mut l = BigInt::one();
        for j in 0..m.cols {
            l = num_integer::lcm(l, m.get(i, j).denom().clone());
        }
        for j in 0..m.cols {
            let v = m.get(i, j) * Rat::from_integer(l.clone());
            debug_assert!(v.is_integer());
            out.set(i, j, v.to_integer());
        }
        scales.push(l);
    }
    (out, scales)
}

/// Rank over the rationals, computed by fraction-free elimination.
pub fn rank(m: &RationalMatrix) -> usize {
    let (im, _) = clear_rows(m);
    bareiss_echelon(&im).pivot_cols.len()
}

/// Exact determinant of a square rational matrix.
pub fn det(m: &RationalMatrix) -> Rat {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.rows == 0 {
        return Rat::one();
    }
    let (im, scales) = clear_rows(m);
    let d = det_int(&im);
    let mut denom = BigInt::one();
    for s in &scales {
        denom *= s;
    }
    Rat::new(d, denom)
}

fn det_int(m: &IntMatrix) -> BigInt {
    assert!(m.is_square());
    if m.rows == 0 {
        return BigInt::one();
    }
    if let Some(fast) = det_int_i128(m) {
        return fast;
    }
    let ech = bareiss_echelon(m);
    if ech.pivot_cols.len() < m.rows {
        return BigInt::zero();
    }
    let last = ech.mat.get(m.rows - 1, m.cols - 1).clone();
    if ech.sign < 0 {
        -last
    } else {
        last
    }
}

/// Machine-word Bareiss determinant; `None` when entries do not fit or an
/// intermediate product overflows, in which case the caller retries with
/// arbitrary precision.
fn det_int_i128(m: &IntMatrix) -> Option<BigInt> {
    use num_traits::ToPrimitive;
    let n = m.rows;
    let mut a: Vec<i128> = Vec::with_capacity(n * n);
    for v in &m.data {
        a.push(v.to_i128()?);
    }
    det_i128_in_place(&mut a, n).map(BigInt::from)
}

fn det_i128_in_place(a: &mut [i128], n: usize) -> Option<i128> {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        let p = (k..n).find(|&i| a[i * n + k] != 0);
        let Some(p) = p else {
            return Some(0);
        };
        if p != k {
            for j in k..n {
                a.swap(p * n + j, k * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let head = a[i * n + k];
            for j in k..n {
                let v = pivot
                    .checked_mul(a[i * n + j])?
                    .checked_sub(head.checked_mul(a[k * n + j])?)?;
                debug_assert_eq!(v % prev, 0, "Bareiss division not exact");
                a[i * n + j] = v / prev;
            }
        }
        prev = pivot;
    }
    Some(sign * a[n * n - 1])
}

/// Exact basis of the right kernel `{v : M v = 0}`. The number of returned
/// vectors equals `cols - rank`.
pub fn kernel(m: &RationalMatrix) -> Vec<Vec<Rat>> {
    let (im, _) = clear_rows(m);
    let ech = bareiss_echelon(&im);
    let pivots = &ech.pivot_cols;
    let cols = m.cols;
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = Some(row);
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        // Back-substitute through pivot rows, bottom-up.
        for (row, &pc) in pivots.iter().enumerate().rev() {
            if pc > free {
                continue;
            }
            let mut acc = Rat::zero();
            for j in (pc + 1)..=free {
                if !v[j].is_zero() {
                    acc += Rat::from_integer(ech.mat.get(row, j).clone()) * &v[j];
                }
            }
            v[pc] = -acc / Rat::from_integer(ech.mat.get(row, pc).clone());
        }
        debug_assert!(m.mul_vec(&v).iter().all(Rat::is_zero));
        basis.push(v);
    }
    basis
}

/// Particular exact solution of `M x = b`, `None` when inconsistent. Free
/// variables are set to zero.
pub fn solve(m: &RationalMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(m.rows, b.len(), "rhs length mismatch");
    let aug = RationalMatrix::from_fn(m.rows, m.cols + 1, |i, j| {
        if j < m.cols {
            m.get(i, j).clone()
        } else {
            b[i].clone()
        }
    });
    let (im, _) = clear_rows(&aug);
    let ech = bareiss_echelon(&im);
    if ech.pivot_cols.contains(&m.cols) {
        return None; // pivot in the augmented column
    }
    let mut x = vec![Rat::zero(); m.cols];
    for (row, &pc) in ech.pivot_cols.iter().enumerate().rev() {
        let mut acc = Rat::from_integer(ech.mat.get(row, m.cols).clone());
        for j in (pc + 1)..m.cols {
            if !x[j].is_zero() {
                acc -= Rat::from_integer(ech.mat.get(row, j).clone()) * &x[j];
            }
        }
        x[pc] = acc / Rat::from_integer(ech.mat.get(row, pc).clone());
    }
    debug_assert_eq!(m.mul_vec(&x), b.to_vec());
    Some(x)
}

/// Smith normal form `U · M · V = D` with unimodular `U`, `V` and a
/// nonnegative diagonal `D` whose entries divide in sequence.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        let k = self.d.rows().min(self.d.cols());
        (0..k).filter(|&i| !self.d.get(i, i).is_zero()).count()
    }

    /// Exact check of every structural invariant against the source matrix.
    pub fn verify(&self, m: &IntMatrix) -> bool {
        let prod = self.u.mul(m).mul(&self.v);
        if prod != self.d {
            return false;
        }
        if !self.u.det().abs().is_one() || !self.v.det().abs().is_one() {
            return false;
        }
        let k = self.d.rows().min(self.d.cols());
        for i in 0..self.d.rows() {
            for j in 0..self.d.cols() {
                if i != j && !self.d.get(i, j).is_zero() {
                    return false;
                }
            }
        }
        for i in 0..k {
            if self.d.get(i, i).is_negative() {
                return false;
            }
            if i + 1 < k {
                let a = self.d.get(i, i);
                let b = self.d.get(i + 1, i + 1);
                if !a.is_zero() && !(b % a).is_zero() {
                    return false;
                }
                if a.is_zero() && !b.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// Smith normal form of an integer matrix given with rational entries.
/// Fractional input is rejected.
pub fn smith_normal_form(m: &RationalMatrix) -> Result<SmithDecomposition, ExactError> {
    Ok(smith_normal_form_int(&m.to_int()?))
}

/// Smith normal form of an integer matrix, with transforms accumulated by
/// gcd-reduction.
pub fn smith_normal_form_int(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let swap_rows = |d: &mut IntMatrix, u: &mut IntMatrix, a: usize, b: usize| {
        for j in 0..cols {
            d.data.swap(a * cols + j, b * cols + j);
        }
        for j in 0..rows {
            u.data.swap(a * rows + j, b * rows + j);
        }
    };
    let swap_cols = |d: &mut IntMatrix, v: &mut IntMatrix, a: usize, b: usize| {
        for i in 0..rows {
            d.data.swap(i * cols + a, i * cols + b);
        }
        for i in 0..cols {
            v.data.swap(i * cols + a, i * cols + b);
        }
    };
    // row_a -= q * row_b, and the matching update of U.
    let row_op = |d: &mut IntMatrix, u: &mut IntMatrix, a: usize, b: usize, q: &BigInt| {
        for j in 0..cols {
            let x = d.get(a, j) - q * d.get(b, j);
            d.set(a, j, x);
        }
        for j in 0..rows {
            let x = u.get(a, j) - q * u.get(b, j);
            u.set(a, j, x);
        }
    };
    let col_op = |d: &mut IntMatrix, v: &mut IntMatrix, a: usize, b: usize, q: &BigInt| {
        for i in 0..rows {
            let x = d.get(i, a) - q * d.get(i, b);
            d.set(i, a, x);
        }
        for i in 0..cols {
            let x = v.get(i, a) - q * v.get(i, b);
            v.set(i, a, x);
        }
    };

    let mut t = 0usize;
    while t < rows.min(cols) {
        // Pick the nonzero entry of smallest magnitude in the working block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if d.get(i, j).is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if d.get(i, j).abs() < d.get(bi, bj).abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = best else {
            break; // block is all zero
        };
        if pi != t {
            swap_rows(&mut d, &mut u, pi, t);
        }
        if pj != t {
            swap_cols(&mut d, &mut v, pj, t);
        }

        loop {
            // Reduce the pivot column.
            let mut dirty = false;
            for i in (t + 1)..rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t) / d.get(t, t);
                if !q.is_zero() {
                    row_op(&mut d, &mut u, i, t, &q);
                }
                if !d.get(i, t).is_zero() {
                    // Remainder is smaller than the pivot; promote it.
                    swap_rows(&mut d, &mut u, i, t);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Reduce the pivot row.
            for j in (t + 1)..cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j) / d.get(t, t);
                if !q.is_zero() {
                    col_op(&mut d, &mut v, j, t, &q);
                }
                if !d.get(t, j).is_zero() {
                    swap_cols(&mut d, &mut v, j, t);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Pivot must divide the rest of the block for the chain to hold.
            let mut offender = None;
            'scan: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !(d.get(i, j) % d.get(t, t)).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let q = BigInt::from(-1);
                    row_op(&mut d, &mut u, t, i, &q); // row_t += row_i
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            for j in 0..cols {
                let x = -d.get(t, j).clone();
                d.set(t, j, x);
            }
            for j in 0..rows {
                let x = -u.get(t, j).clone();
                u.set(t, j, x);
            }
        }
        t += 1;
    }
    let out = SmithDecomposition { u, d, v };
    debug_assert!(out.verify(m));
    out
}

/// Coefficients `c_0..c_N` of `det(Id + x·M)`; `c_k` is the trace of the k-th
/// exterior power of `M`. Computed exactly by evaluating the determinant at
/// `x = 0..N` and interpolating.
pub fn char_poly_exterior(m: &RationalMatrix) -> Result<Vec<Rat>, ExactError> {
    if !m.is_square() {
        return Err(ExactError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if let Ok(im) = m.to_int() {
        return Ok(char_poly_exterior_int(&im));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(vec![Rat::one()]);
    }
    let points = centered_points(n);
    let values: Vec<Rat> = points
        .iter()
        .map(|&t| {
            let shifted = RationalMatrix::from_fn(n, n, |i, j| {
                let mut v = m.get(i, j) * rat_int(t);
                if i == j {
                    v += Rat::one();
                }
                v
            });
            det(&shifted)
        })
        .collect();
    let coeffs = lagrange_interpolate(&points, &values);
    debug_assert!(coeffs[0].is_one());
    Ok(coeffs)
}

/// Integer-matrix specialization of [`char_poly_exterior`].
pub fn char_poly_exterior_int(m: &IntMatrix) -> Vec<Rat> {
    assert!(m.is_square());
    let n = m.rows;
    if n == 0 {
        return vec![Rat::one()];
    }
    let points = centered_points(n);
    let values: Vec<Rat> = points
        .iter()
        .map(|&t| {
            let shifted = IntMatrix::from_fn(n, n, |i, j| {
                let mut v = m.get(i, j) * BigInt::from(t);
                if i == j {
                    v += BigInt::one();
                }
                v
            });
            Rat::from_integer(det_int(&shifted))
        })
        .collect();
    let coeffs = lagrange_interpolate(&points, &values);
    debug_assert!(coeffs[0].is_one());
    coeffs
}

/// `n + 1` integer sample points centered around zero, to keep determinant
/// magnitudes small during interpolation.
fn centered_points(n: usize) -> Vec<i64> {
    let half = (n / 2) as i64;
    (0..=n as i64).map(|k| k - half).collect()
}

/// Exact Lagrange interpolation through `(points[i], values[i])`.
fn lagrange_interpolate(points: &[i64], values: &[Rat]) -> Vec<Rat> {
    let n = values.len();
    assert_eq!(points.len(), n);
    let mut result = vec![Rat::zero(); n];
    for (idx, val) in values.iter().enumerate() {
        if val.is_zero() {
            continue;
        }
        let t = points[idx];
        // numerator poly prod_{s != t} (x - s), denominator prod (t - s)
        let mut num = vec![Rat::one()];
        let mut den = Rat::one();
        for &s in points {
            if s == t {
                continue;
            }
            let mut next = vec![Rat::zero(); num.len() + 1];
            for (k, c) in num.iter().enumerate() {
                next[k] -= c * rat_int(s);
                next[k + 1] += c;
            }
            num = next;
            den *= rat_int(t - s);
        }
        let w = val / den;
        for (k, c) in num.iter().enumerate() {
            result[k] += c * &w;
        }
    }
    result
}

/// Group-averaging projector `P = (1/|G|) Σ_g M_g` onto the fixed subspace of
/// a representation. The caller guarantees the matrices form a group.
pub fn reynolds_projector(rep: &[RationalMatrix]) -> Result<RationalMatrix, ExactError> {
    let first = rep.first().ok_or(ExactError::EmptyRepresentation)?;
    let (r, c) = (first.rows, first.cols);
    if r != c {
        return Err(ExactError::NotSquare { rows: r, cols: c });
    }
    let mut sum = RationalMatrix::zeros(r, c);
    for m in rep {
        if (m.rows, m.cols) != (r, c) {
            return Err(ExactError::DimensionMismatch(format!(
                "representation matrices of sizes {}x{} and {}x{}",
                r, c, m.rows, m.cols
            )));
        }
        sum = sum.add(m);
    }
    let inv_order = Rat::new(BigInt::one(), BigInt::from(rep.len()));
    Ok(sum.scale(&inv_order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rm(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_i64_rows(rows)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RationalMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&RationalMatrix::identity(4)), 4);
        assert_eq!(rank(&rm(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel(&RationalMatrix::identity(3)).is_empty());

        let z = kernel(&RationalMatrix::zeros(2, 2));
        assert_eq!(z.len(), 2);
        let span = RationalMatrix::from_fn(2, 2, |i, j| z[j][i].clone());
        assert_eq!(rank(&span), 2);

        let k = kernel(&rm(&[&[1, 1]]));
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][0], -k[0][1].clone());
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn kernel_vectors_annihilate_rows() {
        let m = rm(&[&[2, 4, 6], &[1, 2, 3], &[0, 0, 5]]);
        let basis = kernel(&m);
        assert_eq!(basis.len(), 3 - rank(&m));
        for v in &basis {
            assert!(m.mul_vec(v).iter().all(Rat::is_zero));
        }
    }

    #[test]
    fn smith_examples() {
        let id = smith_normal_form(&RationalMatrix::identity(3)).unwrap();
        assert!(id.d.is_identity());

        let m = rm(&[&[2, 0], &[0, 3]]);
        let s = smith_normal_form(&m).unwrap();
        assert!(s.verify(&m.to_int().unwrap()));
        assert_eq!(s.d.get(0, 0), &BigInt::from(1));
        assert_eq!(s.d.get(1, 1), &BigInt::from(6));

        let z = rm(&[&[0]]);
        let s = smith_normal_form(&z).unwrap();
        assert!(s.d.get(0, 0).is_zero());
    }

    #[test]
    fn smith_rejects_fractions() {
        let mut m = RationalMatrix::identity(2);
        m.set(0, 1, rat(1, 2));
        assert!(matches!(
            smith_normal_form(&m),
            Err(ExactError::NonIntegralEntry { row: 0, col: 1 })
        ));
    }

    #[test]
    fn char_poly_examples() {
        let c = char_poly_exterior(&RationalMatrix::identity(2)).unwrap();
        assert_eq!(c, vec![rat_int(1), rat_int(2), rat_int(1)]);

        let c = char_poly_exterior(&rm(&[&[-1, 0], &[0, -1]])).unwrap();
        assert_eq!(c, vec![rat_int(1), rat_int(-2), rat_int(1)]);

        let c = char_poly_exterior(&rm(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(c, vec![rat_int(1), rat_int(0), rat_int(-1)]);
    }

    #[test]
    fn reynolds_examples() {
        let id = RationalMatrix::identity(2);
        let p = reynolds_projector(std::slice::from_ref(&id)).unwrap();
        assert_eq!(p, id);

        let neg = rm(&[&[-1, 0], &[0, -1]]);
        let p = reynolds_projector(&[id.clone(), neg]).unwrap();
        assert!(p.is_zero());

        let swap = rm(&[&[0, 1], &[1, 0]]);
        let p = reynolds_projector(&[id, swap]).unwrap();
        assert_eq!(rank(&p), 1);
        // fixed space is spanned by e1 + e2
        let v = p.mul_vec(&[rat_int(1), rat_int(0)]);
        assert_eq!(v, vec![rat(1, 2), rat(1, 2)]);
        assert!(reynolds_projector(&[]).is_err());
    }

    #[test]
    fn reynolds_is_idempotent_and_commutes() {
        // sign-flip group of order 4 on Q^2
        let rep = vec![
            RationalMatrix::identity(2),
            rm(&[&[-1, 0], &[0, 1]]),
            rm(&[&[1, 0], &[0, -1]]),
            rm(&[&[-1, 0], &[0, -1]]),
        ];
        let p = reynolds_projector(&rep).unwrap();
        assert_eq!(p.mul(&p), p);
        for g in &rep {
            assert_eq!(p.mul(g), g.mul(&p));
        }
    }

    #[test]
    fn solve_particular_and_inconsistent() {
        let m = rm(&[&[1, 1], &[2, 2]]);
        assert!(solve(&m, &[rat_int(1), rat_int(2)]).is_some());
        assert!(solve(&m, &[rat_int(1), rat_int(3)]).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let m = rm(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).to_int().unwrap().is_identity());
        assert!(rm(&[&[1, 1], &[2, 2]]).inverse().is_none());
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RationalMatrix> {
        proptest::collection::vec(-9i64..=9, rows * cols)
            .prop_map(move |v| RationalMatrix::from_fn(rows, cols, |i, j| rat_int(v[i * cols + j])))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn smith_invariants_hold(m in small_matrix(3, 4)) {
            let im = m.to_int().unwrap();
            let s = smith_normal_form_int(&im);
            prop_assert!(s.verify(&im));
        }

        #[test]
        fn char_poly_sums_to_det_shift(m in small_matrix(3, 3)) {
            let c = char_poly_exterior(&m).unwrap();
            let total: Rat = c.iter().cloned().sum();
            let shifted = m.add(&RationalMatrix::identity(3));
            prop_assert_eq!(total, det(&shifted));
            prop_assert_eq!(c[3].clone(), det(&m));
        }

        #[test]
        fn kernel_dimension_matches_rank(m in small_matrix(3, 5)) {
            let basis = kernel(&m);
            prop_assert_eq!(basis.len(), 5 - rank(&m));
            for v in &basis {
                prop_assert!(m.mul_vec(v).iter().all(Rat::is_zero));
            }
        }
    }
}
