//! Exact rationals, vectors and dense matrices.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rat = BigRational;

/// A vector of exact rationals.
pub type RatVec = Vec<Rat>;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// Canonical file form: `"p/q"`, or `"p"` when the denominator is one.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Display form used on the command line: always `"p/q"`.
pub fn fmt_rat_full(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `(a,b,c)` with canonical rational strings.
pub fn fmt_vec(v: &[Rat]) -> String {
    format!("({})", v.iter().map(fmt_rat).collect::<Vec<_>>().join(","))
}

pub fn parse_vec(s: &str) -> Result<RatVec> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_rat).collect()
}

pub fn zero_vec(n: usize) -> RatVec {
    vec![Rat::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> RatVec {
    let mut v = zero_vec(n);
    v[i] = Rat::one();
    v
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn scale(v: &[Rat], s: &Rat) -> RatVec {
    v.iter().map(|x| x * s).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[Rat]) -> RatVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Least common multiple of the denominators.
pub fn denom_lcm(a: &[Rat]) -> BigInt {
    a.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Multiplies through by the denominator lcm.
pub fn clear_denominators(a: &[Rat]) -> Vec<BigInt> {
    let l = denom_lcm(a);
    a.iter()
        .map(|x| x.numer() * (&l / x.denom()))
        .collect()
}

/// Flips the sign so that the first nonzero entry is positive.
pub fn sign_normalize(a: RatVec) -> RatVec {
    match a.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => neg(&a),
        _ => a,
    }
}

/// Ordering used for canonical vertex and functional lists.
pub fn canonical_cmp(a: &[Rat], b: &[Rat]) -> Ordering {
    clear_denominators(a)
        .cmp(&clear_denominators(b))
        .then_with(|| a.cmp(b))
}

pub fn max_denominator<'a>(it: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    it.into_iter()
        .map(|x| x.denom().clone())
        .max()
        .unwrap_or_else(BigInt::one)
}

/// Largest-magnitude rational with denominator at most `bound` whose
/// absolute value does not exceed `|x|`, with the sign of `x`.
pub fn round_toward_zero(x: &Rat, bound: u64) -> Rat {
    let n = BigInt::from(bound.max(1));
    if x.denom() <= &n {
        return x.clone();
    }
    let r = best_lower(&x.abs(), &n);
    if x.is_negative() {
        -r
    } else {
        r
    }
}

/// Best rational approximation from below with denominator at most `n`,
/// by Stern–Brocot descent with batched steps.
fn best_lower(x: &Rat, n: &BigInt) -> Rat {
    let (mut a, mut b) = (x.floor().to_integer(), BigInt::one());
    let (mut c, mut d) = (BigInt::one(), BigInt::zero());
    loop {
        let lo = Rat::new(a.clone(), b.clone());
        if &lo == x {
            return lo;
        }
        // Raise the lower bound: (a + k c)/(b + k d) <= x.
        let gap_up = Rat::from_integer(c.clone()) - x * Rat::from_integer(d.clone());
        let gap_lo = x * Rat::from_integer(b.clone()) - Rat::from_integer(a.clone());
        let mut k1 = (&gap_lo / &gap_up).floor().to_integer();
        if !d.is_zero() {
            k1 = k1.min((n - &b) / &d);
        }
        if k1.is_positive() {
            a += &k1 * &c;
            b += &k1 * &d;
        }
        let lo = Rat::new(a.clone(), b.clone());
        if &lo == x {
            return lo;
        }
        // Lower the upper bound: (c + k a)/(d + k b) > x.
        let gap_lo = x * Rat::from_integer(b.clone()) - Rat::from_integer(a.clone());
        let gap_up = Rat::from_integer(c.clone()) - x * Rat::from_integer(d.clone());
        let mut k2 = (&gap_up / &gap_lo).ceil().to_integer() - BigInt::one();
        k2 = k2.min((n - &d) / &b);
        if !k1.is_positive() && !k2.is_positive() {
            return lo;
        }
        if k2.is_positive() {
            c += &k2 * &a;
            d += &k2 * &b;
        }
    }
}

pub fn pow_int(x: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMat[{}x{}](", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(fmt_rat).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, ")")
    }
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Rat>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(RatMat { rows, cols, data })
    }

    /// Builds a matrix from a list of equal-length rows. `cols` is needed
    /// for the zero-row case.
    pub fn from_row_vecs(cols: usize, rows: &[RatVec]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().cloned());
        }
        Ok(RatMat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[RatVec]) -> Result<Self> {
        Ok(Self::from_row_vecs(rows, cols)?.transpose())
    }

    /// The `[I; 0]` inclusion of the first `n` coordinates into `m`.
    pub fn inclusion(m: usize, n: usize) -> Self {
        let mut out = Self::zeros(m, n);
        for i in 0..n.min(m) {
            out.data[i * n + i] = Rat::one();
        }
        out
    }

    /// Coordinate truncation on `n` coordinates keeping the first `k`.
    pub fn truncation(n: usize, k: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..k.min(n) {
            out.data[i * n + i] = Rat::one();
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> RatVec {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<RatVec> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn map_entries(&self, f: impl Fn(&Rat) -> Rat) -> RatMat {
        RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> RatMat {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rat]) -> Result<RatVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    pub fn mul(&self, other: &RatMat) -> Result<RatMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.data[r * other.cols + c] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RatMat) -> Result<RatMat> {
        self.same_shape(other)?;
        Ok(RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &RatMat) -> Result<RatMat> {
        self.same_shape(other)?;
        Ok(RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, s: &Rat) -> RatMat {
        self.map_entries(|x| x * s)
    }

    fn same_shape(&self, other: &RatMat) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn max_denominator(&self) -> BigInt {
        max_denominator(&self.data)
    }

    /// Columns `from..to` as a new matrix.
    pub fn column_block(&self, from: usize, to: usize) -> RatMat {
        let mut out = Self::zeros(self.rows, to - from);
        for r in 0..self.rows {
            for c in from..to {
                out.set(r, c - from, self.get(r, c).clone());
            }
        }
        out
    }

    /// Rows `from..to` as a new matrix.
    pub fn row_block(&self, from: usize, to: usize) -> RatMat {
        RatMat {
            rows: to - from,
            cols: self.cols,
            data: self.data[from * self.cols..to * self.cols].to_vec(),
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &RatMat) -> Result<RatMat> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vcat(&self, other: &RatMat) -> Result<RatMat> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(RatMat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.row_vecs(), self.cols)
    }

    /// Exact inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<RatMat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a.get(col, col).clone();
            for c in 0..n {
                let x = a.get(col, c) / &p;
                a.set(col, c, x);
                let y = inv.get(col, c) / &p;
                inv.set(col, c, y);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in 0..n {
                    let x = a.get(r, c) - &factor * a.get(col, c);
                    a.set(r, c, x);
                    let y = inv.get(r, c) - &factor * inv.get(col, c);
                    inv.set(r, c, y);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Rank of a list of vectors of length `dim`.
pub fn rank_of_rows(rows: &[RatVec], dim: usize) -> usize {
    pivot_rows(rows, dim).len()
}

/// Indices of a maximal linearly independent subfamily, chosen greedily
/// in input order.
pub fn pivot_rows(rows: &[RatVec], dim: usize) -> Vec<usize> {
    // Incremental echelon basis: (pivot column, normalized row).
    let mut basis: Vec<(usize, RatVec)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        for (pc, b) in &basis {
            if !r[*pc].is_zero() {
                let f = r[*pc].clone();
                for c in 0..dim {
                    if !b[c].is_zero() {
                        r[c] -= &f * &b[c];
                    }
                }
            }
        }
        if let Some(pc) = r.iter().position(|x| !x.is_zero()) {
            let p = r[pc].clone();
            for x in r.iter_mut() {
                *x /= &p;
            }
            basis.push((pc, r));
            chosen.push(idx);
            if basis.len() == dim {
                break;
            }
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_matches_brute_force() {
        for num in 0..60i64 {
            for den in 1..25i64 {
                let x = rat(num, den);
                for bound in 1..12u64 {
                    let mut best = Rat::zero();
                    for q in 1..=bound as i64 {
                        let c = Rat::new((&x * int(q)).floor().to_integer(), BigInt::from(q));
                        if c > best {
                            best = c;
                        }
                    }
                    assert_eq!(round_toward_zero(&x, bound), best, "{x} {bound}");
                    assert_eq!(round_toward_zero(&-x.clone(), bound), -best);
                }
            }
        }
    }

    #[test]
    fn parse_and_format_canonicalize() {
        assert_eq!(fmt_rat(&parse_rat("2/4").unwrap()), "1/2");
        assert_eq!(fmt_rat(&parse_rat("-6/3").unwrap()), "-2");
        assert_eq!(fmt_rat(&parse_rat("3/-4").unwrap()), "-3/4");
        assert_eq!(fmt_rat_full(&int(7)), "7/1");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn round_toward_zero_respects_bound() {
        assert_eq!(round_toward_zero(&rat(10, 21), 3), rat(1, 3));
        assert_eq!(round_toward_zero(&rat(-10, 21), 3), rat(-1, 3));
        assert_eq!(round_toward_zero(&rat(1, 2), 2), rat(1, 2));
        assert_eq!(round_toward_zero(&rat(5, 7), 1), int(0));
    }

    #[test]
    fn inverse_and_rank() {
        let m = RatMat::from_rows(2, 2, vec![int(1), int(2), int(3), int(4)]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RatMat::identity(2));
        let s = RatMat::from_rows(2, 2, vec![int(1), int(2), int(2), int(4)]).unwrap();
        assert!(s.inverse().is_none());
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn canonical_order_uses_cleared_vectors() {
        let a = vec![rat(1, 2), int(0)];
        let b = vec![int(0), int(1)];
        assert_eq!(canonical_cmp(&b, &a), Ordering::Less);
    }
}
