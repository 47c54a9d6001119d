//! Exact rational scalars, vectors and dense matrices.
//!
//! Every decision in this crate bottoms out in the kernels here: rank,
//! kernel bases and span membership are computed with fraction-free
//! (Bareiss) elimination over the integers after clearing denominators
//! row by row, so intermediate entries stay bounded by minors of the input.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// A dense rational vector.
pub type RVector = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("cannot parse {0:?} as an exact rational")]
    BadRational(String),
    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("ragged rows: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn qvec(values: &[i64]) -> RVector {
    values.iter().map(|&v| int(v)).collect()
}

pub fn zero_vec(n: usize) -> RVector {
    vec![Rational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> RVector {
    let mut v = zero_vec(n);
    v[i] = Rational::one();
    v
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add_scaled(a: &[Rational], s: &Rational, b: &[Rational]) -> RVector {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> RVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> RVector {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Rational]) -> RVector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// `max(0, x)`.
pub fn relu(x: &Rational) -> Rational {
    if x.is_positive() {
        x.clone()
    } else {
        Rational::zero()
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"-0.125"`.
///
/// Scientific notation is rejected: it usually means the value went through
/// a binary float somewhere upstream.
pub fn parse_rational(text: &str) -> Result<Rational, ExactError> {
    let s = text.trim();
    let bad = || ExactError::BadRational(text.to_string());
    if s.is_empty() || s.contains(['e', 'E']) {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() && digits.is_empty() {
            return Err(bad());
        }
        if !digits.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut all = String::with_capacity(digits.len() + frac.len());
        all.push_str(digits);
        all.push_str(frac);
        if all.is_empty() {
            return Err(bad());
        }
        let mag: BigInt = all.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(mag, den);
        return Ok(if negative { -value } else { value });
    }
    let v: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(v))
}

/// Canonical `"p/q"` form (`"p"` for integers).
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Human-readable decimal approximation; never used in a decision path.
pub fn approx_decimal(q: &Rational, digits: usize) -> String {
    let negative = q.is_negative();
    let a = q.abs();
    let scale_factor = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a.numer() * &scale_factor + a.denom() / BigInt::from(2)) / a.denom();
    let (ip, fp) = scaled.div_rem(&scale_factor);
    let mut s = String::new();
    if negative && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&ip.to_string());
    if digits > 0 {
        let f = fp.to_string();
        s.push('.');
        s.push_str(&"0".repeat(digits - f.len()));
        s.push_str(&f);
    }
    s
}

pub fn format_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

/// Scales a nonzero vector to the unique primitive integer vector on the same
/// open ray (coprime entries).
pub fn primitive_direction(v: &[Rational]) -> RVector {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl RMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, ExactError> {
        if data.len() != rows * cols {
            return Err(ExactError::Shape { rows, cols, got: data.len() });
        }
        Ok(RMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix from explicit rows. `cols` is needed so that a matrix
    /// with zero rows still knows its width.
    pub fn from_rows(rows: Vec<RVector>, cols: usize) -> Result<Self, ExactError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(ExactError::Ragged { row: i, got: r.len(), expected: cols });
            }
            data.extend(r);
        }
        Ok(RMatrix { rows: n, cols, data })
    }

    /// Small-integer constructor, mostly for fixtures.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| qvec(r)).collect(), cols).expect("ragged fixture")
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

    pub fn row_vec(&self, i: usize) -> RVector {
        self.row(i).to_vec()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rational]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<RVector> {
        self.row_iter().map(<[Rational]>::to_vec).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> RVector {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        self.row_iter().map(|r| dot(r, x)).collect()
    }

    pub fn mul(&self, other: &RMatrix) -> RMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = &out.data[idx] + a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> RMatrix {
        let rows = idx.iter().map(|&i| self.row_vec(i)).collect();
        RMatrix::from_rows(rows, self.cols).expect("rows share width")
    }

    pub fn stack(&self, other: &RMatrix) -> Result<RMatrix, ExactError> {
        if self.cols != other.cols {
            return Err(ExactError::DimensionMismatch { expected: self.cols, got: other.cols });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(RMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

/// Clears denominators row by row. Row scaling does not change rank or the
/// null space.
fn integer_rows(rows: &[&[Rational]]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let mut l = BigInt::one();
            for x in r.iter() {
                l = l.lcm(x.denom());
            }
            r.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect()
}

/// Fraction-free row echelon form. Returns the pivot columns; `a` is
/// overwritten with the echelon form (rows beyond the rank are zero).
fn bareiss_echelon(a: &mut [Vec<BigInt>], cols: usize) -> Vec<usize> {
    let m = a.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..m {
            for j in c + 1..cols {
                let num = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                a[i][j] = num / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        // Rows above the next pivot keep their old scale; entries to the left
        // of column c in rows below are already zero.
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn echelon_of(rows: &[&[Rational]], cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut a = integer_rows(rows);
    let pivots = bareiss_echelon(&mut a, cols);
    (a, pivots)
}

pub fn rank(m: &RMatrix) -> usize {
    let rows: Vec<&[Rational]> = m.row_iter().collect();
    rank_of_rows(&rows, m.cols())
}

pub fn rank_of_rows(rows: &[&[Rational]], cols: usize) -> usize {
    if rows.is_empty() || cols == 0 {
        return 0;
    }
    echelon_of(rows, cols).1.len()
}

/// Basis of `{x : M x = 0}`, one primitive integer vector per free column.
/// Empty iff `rank(M) = cols(M)`.
pub fn kernel_basis(m: &RMatrix) -> Vec<RVector> {
    let rows: Vec<&[Rational]> = m.row_iter().collect();
    kernel_of_rows(&rows, m.cols())
}

pub fn kernel_of_rows(rows: &[&[Rational]], cols: usize) -> Vec<RVector> {
    if rows.is_empty() {
        return (0..cols).map(|j| unit_vec(cols, j)).collect();
    }
    let (ech, pivots) = echelon_of(rows, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut x = zero_vec(cols);
        x[f] = Rational::one();
        // Back substitution on the integer echelon rows.
        for (r, &pc) in pivots.iter().enumerate().rev() {
            let mut s = Rational::zero();
            for j in pc + 1..cols {
                if !ech[r][j].is_zero() && !x[j].is_zero() {
                    s += Rational::from_integer(ech[r][j].clone()) * &x[j];
                }
            }
            x[pc] = -s / Rational::from_integer(ech[r][pc].clone());
        }
        basis.push(primitive_direction(&x));
    }
    basis
}

/// True iff `v` is a rational linear combination of `span`.
pub fn in_span(v: &[Rational], span: &[RVector]) -> bool {
    if is_zero_vec(v) {
        return true;
    }
    if span.is_empty() {
        return false;
    }
    let base: Vec<&[Rational]> = span.iter().map(Vec::as_slice).collect();
    let r = rank_of_rows(&base, v.len());
    let mut ext = base;
    ext.push(v);
    rank_of_rows(&ext, v.len()) == r
}

/// Reduced row echelon form over the rationals, zero rows dropped.
pub fn rref(m: &RMatrix) -> (Vec<RVector>, Vec<usize>) {
    let mut a = m.to_rows();
    let cols = m.cols();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Some solution of `A x = b`, or `None` if the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(a: &RMatrix, b: &[Rational]) -> Option<RVector> {
    assert_eq!(a.rows(), b.len());
    let mut aug_rows = Vec::with_capacity(a.rows());
    for (i, r) in a.row_iter().enumerate() {
        let mut row = r.to_vec();
        row.push(b[i].clone());
        aug_rows.push(row);
    }
    let aug = RMatrix::from_rows(aug_rows, a.cols() + 1).expect("augmented rows");
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&a.cols()) {
        return None;
    }
    let mut x = zero_vec(a.cols());
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = red[r][a.cols()].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RMatrix::identity(2)), 2);
        assert_eq!(rank(&RMatrix::from_i64(&[&[1, -1], &[-1, 1]])), 1);
        assert_eq!(rank(&RMatrix::from_i64(&[&[1, 0], &[0, 1], &[-1, -1]])), 2);
        assert_eq!(rank(&RMatrix::zeros(0, 3)), 0);
        assert_eq!(rank(&RMatrix::zeros(2, 2)), 0);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&RMatrix::from_i64(&[&[1, 0]])), vec![qvec(&[0, 1])]);
        assert!(kernel_basis(&RMatrix::identity(2)).is_empty());
        assert_eq!(kernel_basis(&RMatrix::from_i64(&[&[1, -1]])), vec![qvec(&[1, 1])]);
        assert_eq!(kernel_basis(&RMatrix::zeros(0, 2)), vec![qvec(&[1, 0]), qvec(&[0, 1])]);
    }

    #[test]
    fn span_examples() {
        assert!(in_span(&qvec(&[1, 1]), &[qvec(&[1, 0]), qvec(&[0, 1])]));
        assert!(!in_span(&qvec(&[1, 0]), &[]));
        assert!(in_span(&qvec(&[2, -2]), &[qvec(&[1, -1])]));
        assert!(!in_span(&qvec(&[1, 0]), &[qvec(&[1, -1])]));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("0.5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert_eq!(format_rational(&ratio(6, -4)), "-3/2");
        assert_eq!(format_rational(&int(7)), "7");
    }

    #[test]
    fn decimal_approximation() {
        assert_eq!(approx_decimal(&ratio(1, 3), 4), "0.3333");
        assert_eq!(approx_decimal(&ratio(-2, 3), 3), "-0.667");
        assert_eq!(approx_decimal(&int(5), 2), "5.00");
    }

    #[test]
    fn primitive_direction_is_coprime() {
        assert_eq!(primitive_direction(&[ratio(2, 3), ratio(-4, 3)]), qvec(&[1, -2]));
        assert_eq!(primitive_direction(&qvec(&[0, -6])), qvec(&[0, -1]));
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = RMatrix::from_i64(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&a, &qvec(&[2, 0])).unwrap(), qvec(&[1, 1]));
        let b = RMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert!(solve(&b, &qvec(&[1, 3])).is_none());
    }
}
