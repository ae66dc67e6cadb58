//! Fixed-width integer arithmetic for fields whose structure constants are integral.
//!
//! Used by the exhaustive determinant enumerations, where BigRational arithmetic
//! would dominate the runtime. Elements are coordinate arrays of `i128`; callers
//! clear denominators up front and keep track of the common factor themselves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field::Rational;
use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 16;

pub type IntElem = [i128; MAX_DEGREE];

pub const INT_ZERO: IntElem = [0; MAX_DEGREE];

/// Sparse integer structure constants: `terms[i*d + j]` lists `(k, c)` with
/// `b_i · b_j = Σ c · b_k`.
#[derive(Debug, Clone)]
pub struct IntegralTable {
    degree: usize,
    terms: Vec<Vec<(usize, i128)>>,
    max_row_weight: u128,
}

impl IntegralTable {
    pub(crate) fn from_mul_table(table: &[Vec<Vec<Rational>>]) -> Option<Self> {
        let d = table.len();
        if d > MAX_DEGREE {
            return None;
        }
        let mut terms = Vec::with_capacity(d * d);
        let mut max_row_weight = 0u128;
        for row in table {
            for v in row {
                let mut t = Vec::new();
                let mut weight = 0u128;
                for (k, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if !c.is_integer() {
                        return None;
                    }
                    let c = c.to_integer().to_i128()?;
                    weight += c.unsigned_abs();
                    t.push((k, c));
                }
                max_row_weight = max_row_weight.max(weight);
                terms.push(t);
            }
        }
        Some(Self {
            degree: d,
            terms,
            max_row_weight,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest Σ|c| over a single product b_i·b_j; bounds coefficient growth.
    pub fn max_row_weight(&self) -> u128 {
        self.max_row_weight
    }

    #[inline]
    pub fn mul(&self, a: &IntElem, b: &IntElem) -> IntElem {
        let d = self.degree;
        let mut out = INT_ZERO;
        for i in 0..d {
            let ai = a[i];
            if ai == 0 {
                continue;
            }
            for j in 0..d {
                let bj = b[j];
                if bj == 0 {
                    continue;
                }
                let ab = ai * bj;
                for &(k, c) in &self.terms[i * d + j] {
                    out[k] += ab * c;
                }
            }
        }
        out
    }

    /// Bound on the l1 norm of a product given the l1 norms of its factors.
    pub fn product_bound(&self, a: u128, b: u128) -> Option<u128> {
        a.checked_mul(b)?.checked_mul(self.max_row_weight.max(1))
    }

    /// Division-free determinant by Laplace expansion over column subsets.
    ///
    /// `m` is row-major `n × n`. Cost is O(n · 2^n) products.
    pub fn det(&self, m: &[IntElem], n: usize) -> IntElem {
        debug_assert_eq!(m.len(), n * n);
        // minors[mask] = det of the submatrix on the last popcount(mask) rows and the
        // columns in mask
        let size = 1usize << n;
        let mut minors = vec![INT_ZERO; size];
        minors[0][0] = 1;
        for mask in 1..size {
            let cnt = mask.count_ones() as usize;
            let row = n - cnt;
            let mut acc = INT_ZERO;
            let mut sign_pos = true;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let sub = mask & !(1 << col);
                let entry = &m[row * n + col];
                if entry.iter().any(|&x| x != 0) && minors[sub].iter().any(|&x| x != 0) {
                    let p = self.mul(entry, &minors[sub]);
                    if sign_pos {
                        add_assign(&mut acc, &p);
                    } else {
                        sub_assign(&mut acc, &p);
                    }
                }
                sign_pos = !sign_pos;
            }
            minors[mask] = acc;
        }
        minors[size - 1]
    }

    /// Upper bound on the l1 norm of the determinant coordinates, used to rule out
    /// `i128` overflow before an enumeration starts.
    pub fn det_bound(&self, entry_l1: u128, n: usize) -> Option<u128> {
        // n! terms, each a product of n entries
        let mut term = entry_l1;
        for _ in 1..n {
            term = self.product_bound(term, entry_l1)?;
        }
        let fact: u128 = (1..=n as u128).product();
        term.checked_mul(fact)
    }
}

#[inline]
pub fn add_assign(a: &mut IntElem, b: &IntElem) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += *y;
    }
}

#[inline]
pub fn sub_assign(a: &mut IntElem, b: &IntElem) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= *y;
    }
}

#[inline]
pub fn scaled_add_assign(a: &mut IntElem, b: &IntElem, s: i128) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += *y * s;
    }
}

pub fn l1(a: &IntElem) -> u128 {
    a.iter().map(|x| x.unsigned_abs()).sum()
}

/// Least common multiple of all coordinate denominators.
pub fn common_denominator<'a>(coords: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    coords
        .into_iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

/// Convert `scale · coords` into integer coordinates; errors when not integral or too large.
pub fn to_integral(coords: &[Rational], scale: &BigInt) -> Result<IntElem> {
    if coords.len() > MAX_DEGREE {
        return Err(Error::Overflow(format!("degree {} exceeds {MAX_DEGREE}", coords.len())));
    }
    let mut out = INT_ZERO;
    for (o, c) in out.iter_mut().zip(coords) {
        let v = c * Rational::from_integer(scale.clone());
        if !v.is_integer() {
            return Err(Error::InvalidInput("coordinate not integral after scaling".into()));
        }
        let v = v.to_integer();
        if v.abs() > BigInt::from(i64::MAX) {
            return Err(Error::Overflow(format!("coordinate {v} too large")));
        }
        *o = v.to_i128().expect("bounded");
    }
    Ok(out)
}

pub fn from_integral(a: &IntElem, degree: usize, denom: &BigInt) -> Vec<Rational> {
    a[..degree]
        .iter()
        .map(|&x| Rational::new(BigInt::from(x), denom.clone()))
        .collect()
}
