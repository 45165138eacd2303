//! Exact rational scalars, dense vectors and matrices, and the linear solves
//! every other module is built on.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::NumericError;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Dense vector of exact rationals.
pub type Vector = Vec<Rational>;

/// Default denominator bound (2⁶⁴) used whenever an irrational quantity has to
/// be replaced by a nearby rational.
pub const DEFAULT_DENOM_BITS: u32 = 64;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn vec_i64(v: &[i64]) -> Vector {
    v.iter().map(|&x| int(x)).collect()
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-0.125"`.
pub fn parse_rational(s: &str) -> Result<Rational, NumericError> {
    let s = s.trim();
    let bad = || NumericError::Parse(s.to_string());
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if s.contains('/') {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rational::new(numer, denom);
        return Ok(if negative { -r } else { r });
    }
    Rational::from_str(s).map_err(|_| bad())
}

/// Canonical text form: `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratios of huge integers: scale down before converting
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = r.numer() >> shift;
        let d = r.denom() >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

pub fn vec_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Rounds `x` to the nearest multiple of `1/denom`; the result has a
/// denominator dividing `denom`.
pub fn rational_from_f64(x: f64, denom: &BigInt) -> Rational {
    assert!(x.is_finite(), "cannot rationalize non-finite value {x}");
    if x == 0.0 {
        return Rational::zero();
    }
    // x = mantissa * 2^exp exactly
    let exact = Rational::from_float(x).expect("finite float");
    let scaled = exact * Rational::from_integer(denom.clone());
    Rational::new(scaled.round().to_integer(), denom.clone())
}

pub fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn isqrt_floor(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// Exact square root when `r` is the square of a rational.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let p = r.numer().magnitude();
    let q = r.denom().magnitude();
    let sp = isqrt_floor(p);
    let sq = isqrt_floor(q);
    if &(&sp * &sp) == p && &(&sq * &sq) == q {
        Some(Rational::new(
            BigInt::from_biguint(Sign::Plus, sp),
            BigInt::from_biguint(Sign::Plus, sq),
        ))
    } else {
        None
    }
}

/// Largest multiple of `2^-bits` that is ≤ √r (exact when r is a rational square).
pub fn sqrt_lower(r: &Rational, bits: u32) -> Rational {
    assert!(!r.is_negative(), "sqrt of negative rational");
    if let Some(s) = exact_sqrt(r) {
        return s;
    }
    // √(p/q) = √(p·q·4^bits) / (q·2^bits)
    let p = r.numer().magnitude();
    let q = r.denom().magnitude();
    let radicand = p * q * (BigUint::one() << (2 * bits));
    let s = isqrt_floor(&radicand);
    Rational::new(
        BigInt::from_biguint(Sign::Plus, s),
        BigInt::from_biguint(Sign::Plus, q.clone()) << bits,
    )
}

/// Smallest multiple of `2^-bits` over `q` that is ≥ √r (exact when r is a rational square).
pub fn sqrt_upper(r: &Rational, bits: u32) -> Rational {
    assert!(!r.is_negative(), "sqrt of negative rational");
    if let Some(s) = exact_sqrt(r) {
        return s;
    }
    let p = r.numer().magnitude();
    let q = r.denom().magnitude();
    let radicand = p * q * (BigUint::one() << (2 * bits));
    let mut s = isqrt_floor(&radicand);
    if &s * &s < radicand {
        s += 1u32;
    }
    Rational::new(
        BigInt::from_biguint(Sign::Plus, s),
        BigInt::from_biguint(Sign::Plus, q.clone()) << bits,
    )
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm_sq(a: &[Rational]) -> Rational {
    dot(a, a)
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Vector {
    a.iter().map(|x| x * s).collect()
}

/// `y += s·x`
pub fn axpy(y: &mut [Rational], s: &Rational, x: &[Rational]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have the same length.
    /// An empty row list gives a 0×`cols` matrix only through [`Matrix::zeros`].
    pub fn from_rows(rows: Vec<Vector>) -> Result<Self, NumericError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumericError::DimensionMismatch);
        }
        let n = rows.len();
        Ok(Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| vec_i64(r)).collect()).expect("ragged rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Rational] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vector {
        self.row(i).to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data: idx.iter().flat_map(|&i| self.row(i).iter().cloned()).collect(),
        }
    }

    pub fn push_row(&mut self, row: Vector) -> Result<(), NumericError> {
        if self.rows > 0 && row.len() != self.cols {
            return Err(NumericError::DimensionMismatch);
        }
        if self.rows == 0 {
            self.cols = row.len();
        }
        self.data.extend(row);
        self.rows += 1;
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, NumericError> {
        if self.cols != other.rows {
            return Err(NumericError::DimensionMismatch);
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vector, NumericError> {
        if x.len() != self.cols {
            return Err(NumericError::DimensionMismatch);
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `xᵀ·M`, i.e. `Mᵀ·x`.
    pub fn tmul_vec(&self, x: &[Rational]) -> Result<Vector, NumericError> {
        if x.len() != self.rows {
            return Err(NumericError::DimensionMismatch);
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                axpy(&mut out, xi, self.row(i));
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        row_echelon(self.clone()).1.len()
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn determinant(&self) -> Result<Rational, NumericError> {
        if self.rows != self.cols {
            return Err(NumericError::DimensionMismatch);
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det *= &pivot;
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &pivot;
                for c in col..n {
                    let v = &f * &m[(col, c)];
                    m[(r, c)] -= v;
                }
            }
        }
        Ok(det)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn inverse(&self) -> Result<Matrix, NumericError> {
        if self.rows != self.cols {
            return Err(NumericError::DimensionMismatch);
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            // exact arithmetic: any nonzero pivot will do
            let p = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(NumericError::SingularMatrix)?;
            a.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pivot_inv = a[(col, col)].recip();
            for c in 0..n {
                a[(col, c)] *= &pivot_inv;
                inv[(col, c)] *= &pivot_inv;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let va = &f * &a[(col, c)];
                    a[(r, c)] -= va;
                    let vi = &f * &inv[(col, c)];
                    inv[(r, c)] -= vi;
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Forward elimination; returns the reduced matrix and the pivot columns.
fn row_echelon(mut m: Matrix) -> (Matrix, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
            continue;
        };
        m.swap_rows(p, r);
        let pivot_inv = m[(r, col)].recip();
        for c in col..m.cols {
            m[(r, c)] *= &pivot_inv;
        }
        for i in 0..m.rows {
            if i == r || m[(i, col)].is_zero() {
                continue;
            }
            let f = m[(i, col)].clone();
            for c in col..m.cols {
                let v = &f * &m[(r, c)];
                m[(i, c)] -= v;
            }
        }
        pivots.push(col);
        r += 1;
    }
    (m, pivots)
}

/// Rank of a list of row vectors.
pub fn rank_of_rows(rows: &[&[Rational]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("ragged rows");
    m.rank()
}

/// A basis of the null space `{x : M x = 0}`, one vector per free column.
pub fn null_space(m: &Matrix) -> Vec<Vector> {
    let (rref, pivots) = row_echelon(m.clone());
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); m.cols()];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rref[(r, f)].clone();
            }
            v
        })
        .collect()
}

/// Solves `M x = rhs` for invertible square `M`.
pub fn solve_square(m: &Matrix, rhs: &[Rational]) -> Result<Vector, NumericError> {
    let n = m.rows();
    if m.cols() != n || rhs.len() != n {
        return Err(NumericError::DimensionMismatch);
    }
    let mut a = m.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !a[(r, col)].is_zero())
            .ok_or(NumericError::SingularMatrix)?;
        a.swap_rows(p, col);
        b.swap(p, col);
        for r in col + 1..n {
            if a[(r, col)].is_zero() {
                continue;
            }
            let f = &a[(r, col)] / &a[(col, col)];
            for c in col..n {
                let v = &f * &a[(col, c)];
                a[(r, c)] -= v;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for j in i + 1..n {
            s -= &a[(i, j)] * &x[j];
        }
        x[i] = s / &a[(i, i)];
    }
    Ok(x)
}

/// Column transform `U = A_B⁻¹` making the basis rows of `A·U` the identity.
///
/// Returns `(A·U, U)`. Objectives transform as `c ↦ Uᵀc`, which preserves
/// basis optimality.
pub fn gauss_column_transform(
    a: &Matrix,
    basis: &[usize],
) -> Result<(Matrix, Matrix), NumericError> {
    if basis.len() != a.cols() {
        return Err(NumericError::DimensionMismatch);
    }
    let u = a.select_rows(basis).inverse().map_err(|e| match e {
        NumericError::SingularMatrix => NumericError::SingularBasis,
        other => other,
    })?;
    let transformed = a.mul(&u)?;
    Ok((transformed, u))
}

/// Columns of `M⁻¹`.
pub fn inverse_columns(m: &Matrix) -> Result<Vec<Vector>, NumericError> {
    let inv = m.inverse()?;
    Ok((0..inv.cols()).map(|j| inv.column(j)).collect())
}
