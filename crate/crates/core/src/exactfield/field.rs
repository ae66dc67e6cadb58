use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::integral::IntegralTable;
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub(crate) fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn rat_frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// How an automorphism acts on the fixed complex embedding, when that is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexAction {
    Identity,
    Conjugation,
}

/// A field automorphism stored as a d×d rational matrix acting on coordinates.
///
/// Column `j` holds the coordinates of the image of basis element `j`.
#[derive(Debug, Clone)]
pub struct Automorphism {
    pub name: String,
    pub matrix: Vec<Vec<Rational>>,
    pub complex_action: Option<ComplexAction>,
}

impl Automorphism {
    pub fn apply(&self, coords: &[Rational]) -> Vec<Rational> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(coords)
                    .filter(|(_, c)| !c.is_zero())
                    .fold(Rational::zero(), |acc, (m, c)| acc + m * c)
            })
            .collect()
    }
}

/// A finite-dimensional commutative Q-algebra given by structure constants over a
/// fixed basis, together with a numeric embedding into C and named automorphisms.
///
/// Basis element 0 is the unit.
pub struct NumberField {
    name: String,
    degree: usize,
    basis_labels: Vec<String>,
    mul_table: Vec<Vec<Vec<Rational>>>,
    sparse: Vec<Vec<(usize, Rational)>>,
    embedding: Vec<Complex64>,
    automorphisms: Vec<Automorphism>,
    integral: Option<IntegralTable>,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumberField")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("basis", &self.basis_labels)
            .finish()
    }
}

impl NumberField {
    /// Assemble a field from raw structure constants. Shapes are checked here; the
    /// algebraic invariants are checked by [`NumberField::validate`].
    pub fn new(
        name: impl Into<String>,
        basis_labels: Vec<String>,
        mul_table: Vec<Vec<Vec<Rational>>>,
        embedding: Vec<Complex64>,
        automorphisms: Vec<Automorphism>,
    ) -> Result<Self> {
        let name = name.into();
        let d = basis_labels.len();
        if d == 0 {
            return Err(Error::InvalidField(format!("{name}: empty basis")));
        }
        if embedding.len() != d {
            return Err(Error::InvalidField(format!(
                "{name}: {} embedding values for degree {d}",
                embedding.len()
            )));
        }
        if mul_table.len() != d
            || mul_table
                .iter()
                .any(|row| row.len() != d || row.iter().any(|v| v.len() != d))
        {
            return Err(Error::InvalidField(format!("{name}: mul_table must be {d}x{d}x{d}")));
        }
        for aut in &automorphisms {
            if aut.matrix.len() != d || aut.matrix.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidField(format!(
                    "{name}: automorphism {} must be {d}x{d}",
                    aut.name
                )));
            }
        }
        let sparse = mul_table
            .iter()
            .flat_map(|row| {
                row.iter().map(|v| {
                    v.iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| (k, c.clone()))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let integral = IntegralTable::from_mul_table(&mul_table);
        Ok(Self {
            name,
            degree: d,
            basis_labels,
            mul_table,
            sparse,
            embedding,
            automorphisms,
            integral,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn mul_table(&self) -> &[Vec<Vec<Rational>>] {
        &self.mul_table
    }

    pub fn embedding(&self) -> &[Complex64] {
        &self.embedding
    }

    pub fn automorphisms(&self) -> &[Automorphism] {
        &self.automorphisms
    }

    /// Integer structure constants, present when every entry of the table is integral.
    pub fn integral_table(&self) -> Option<&IntegralTable> {
        self.integral.as_ref()
    }

    pub fn automorphism(&self, name: &str) -> Result<&Automorphism> {
        self.automorphisms
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAutomorphism(name.to_string(), self.name.clone()))
    }

    pub fn has_automorphism(&self, name: &str) -> bool {
        self.automorphisms.iter().any(|a| a.name == name)
    }

    /// Name of an automorphism acting as complex conjugation, if one is registered.
    pub fn conjugation(&self) -> Option<&str> {
        self.automorphisms
            .iter()
            .find(|a| a.complex_action == Some(ComplexAction::Conjugation))
            .map(|a| a.name.as_str())
    }

    pub(crate) fn mul_coords(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let d = self.degree;
        let mut out = vec![Rational::zero(); d];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let ab = ai * bj;
                for (k, c) in &self.sparse[i * d + j] {
                    out[*k] += &ab * c;
                }
            }
        }
        out
    }

    pub(crate) fn embed_coords(&self, coords: &[Rational]) -> Complex64 {
        coords
            .iter()
            .zip(&self.embedding)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, e)| e * rat_to_f64(c))
            .sum()
    }

    /// Order of an automorphism (smallest m ≥ 1 with φ^m = id), searched up to `max`.
    pub fn automorphism_order(&self, name: &str, max: usize) -> Result<Option<usize>> {
        let aut = self.automorphism(name)?;
        let d = self.degree;
        let mut power = aut.matrix.clone();
        for m in 1..=max {
            if is_identity(&power) {
                return Ok(Some(m));
            }
            power = mat_mul(&aut.matrix, &power, d);
        }
        Ok(None)
    }

    /// Exhaustively check the algebraic invariants: commutative, associative and unital
    /// product on all basis triples; automorphisms invertible and multiplicative on
    /// basis pairs; embedding multiplicative to within 1e-12 (relative).
    pub fn validate(&self) -> Result<()> {
        let d = self.degree;
        let unit = unit_coords(d);
        let basis = |i: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); d];
            v[i] = Rational::one();
            v
        };
        for i in 0..d {
            if self.mul_coords(&unit, &basis(i)) != basis(i) {
                return Err(self.invalid(format!("basis element 0 is not a unit on b{i}")));
            }
            for j in 0..d {
                if self.mul_table[i][j] != self.mul_table[j][i] {
                    return Err(self.invalid(format!("product not commutative on (b{i}, b{j})")));
                }
                for k in 0..d {
                    let left = self.mul_coords(&self.mul_table[i][j], &basis(k));
                    let right = self.mul_coords(&basis(i), &self.mul_table[j][k]);
                    if left != right {
                        return Err(self.invalid(format!(
                            "product not associative on (b{i}, b{j}, b{k})"
                        )));
                    }
                }
                let lhs = self.embedding[i] * self.embedding[j];
                let rhs = self.embed_coords(&self.mul_table[i][j]);
                if (lhs - rhs).norm() > 1e-12 * (1.0 + lhs.norm()) {
                    return Err(self.invalid(format!(
                        "embedding not multiplicative on (b{i}, b{j}): {lhs} vs {rhs}"
                    )));
                }
            }
        }
        for aut in &self.automorphisms {
            if determinant_q(&aut.matrix).is_zero() {
                return Err(self.invalid(format!("automorphism {} is singular", aut.name)));
            }
            if aut.apply(&unit) != unit {
                return Err(self.invalid(format!("automorphism {} moves 1", aut.name)));
            }
            for i in 0..d {
                for j in i..d {
                    let lhs = aut.apply(&self.mul_table[i][j]);
                    let rhs = self.mul_coords(&aut.apply(&basis(i)), &aut.apply(&basis(j)));
                    if lhs != rhs {
                        return Err(self.invalid(format!(
                            "automorphism {} not multiplicative on (b{i}, b{j})",
                            aut.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn invalid(&self, msg: String) -> Error {
        Error::InvalidField(format!("{}: {msg}", self.name))
    }
}

pub(crate) fn unit_coords(d: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    v[0] = Rational::one();
    v
}

fn is_identity(m: &[Vec<Rational>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
    })
}

pub(crate) fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>], d: usize) -> Vec<Vec<Rational>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).fold(Rational::zero(), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant of a rational matrix by Gaussian elimination.
pub(crate) fn determinant_q(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Solve `m x = rhs` over Q; `None` when `m` is singular.
pub(crate) fn solve_q(m: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let pivot = a[col][col].clone();
        for c in col..=n {
            a[col][c] = &a[col][c] / &pivot;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..=n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Formats a rational compactly: `3`, `-2/7`.
pub(crate) fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

