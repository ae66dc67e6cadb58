use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::field::{fmt_rational, rat, solve_q, NumberField, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

/// An exact element of a [`NumberField`], stored as rational coordinates.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<NumberField>,
    coords: Vec<Rational>,
}

impl FieldElement {
    pub fn from_coords(field: &Arc<NumberField>, coords: Vec<Rational>) -> Result<Self> {
        if coords.len() != field.degree() {
            return Err(Error::Dimension(format!(
                "{} coordinates for {} of degree {}",
                coords.len(),
                field.name(),
                field.degree()
            )));
        }
        Ok(Self {
            field: field.clone(),
            coords,
        })
    }

    pub fn from_ints(field: &Arc<NumberField>, coords: &[i64]) -> Result<Self> {
        Self::from_coords(field, coords.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        Self {
            field: field.clone(),
            coords: vec![Rational::zero(); field.degree()],
        }
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::basis(field, 0)
    }

    pub fn basis(field: &Arc<NumberField>, idx: usize) -> Self {
        let mut e = Self::zero(field);
        e.coords[idx] = Rational::one();
        e
    }

    pub fn from_rational(field: &Arc<NumberField>, r: Rational) -> Self {
        let mut e = Self::zero(field);
        e.coords[0] = r;
        e
    }

    pub fn from_int(field: &Arc<NumberField>, n: i64) -> Self {
        Self::from_rational(field, rat(n))
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn same_field(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.field, &other.field)
            || (self.field.name() == other.field.name() && self.field.degree() == other.field.degree())
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.same_field(other) {
            Ok(())
        } else {
            Err(Error::FieldMismatch(
                self.field.name().to_string(),
                other.field.name().to_string(),
            ))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(Self {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(Self {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(Self {
            field: self.field.clone(),
            coords: self.field.mul_coords(&self.coords, &other.coords),
        })
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| c * r).collect(),
        }
    }

    pub fn apply_aut(&self, name: &str) -> Result<Self> {
        let aut = self.field.automorphism(name)?;
        Ok(Self {
            field: self.field.clone(),
            coords: aut.apply(&self.coords),
        })
    }

    /// Apply `name` repeatedly.
    pub fn apply_aut_pow(&self, name: &str, times: usize) -> Result<Self> {
        let aut = self.field.automorphism(name)?;
        let mut coords = self.coords.clone();
        for _ in 0..times {
            coords = aut.apply(&coords);
        }
        Ok(Self {
            field: self.field.clone(),
            coords,
        })
    }

    /// Complex conjugate via the registered conjugation automorphism.
    pub fn conj(&self) -> Result<Self> {
        let name = self.field.conjugation().ok_or_else(|| {
            Error::UnknownAutomorphism("conjugation".into(), self.field.name().to_string())
        })?;
        self.apply_aut(name)
    }

    /// Image under the fixed embedding into C.
    pub fn embed(&self) -> Complex64 {
        self.field.embed_coords(&self.coords)
    }

    /// Multiplicative inverse; `None` for zero (or a zero divisor in a non-field algebra).
    pub fn inverse(&self) -> Option<Self> {
        let d = self.field.degree();
        // matrix of multiplication by self: column j = self · b_j
        let cols: Vec<Vec<Rational>> = (0..d)
            .map(|j| {
                let mut b = vec![Rational::zero(); d];
                b[j] = Rational::one();
                self.field.mul_coords(&self.coords, &b)
            })
            .collect();
        let m: Vec<Vec<Rational>> = (0..d)
            .map(|r| (0..d).map(|c| cols[c][r].clone()).collect())
            .collect();
        let mut rhs = vec![Rational::zero(); d];
        rhs[0] = Rational::one();
        solve_q(&m, &rhs).map(|coords| Self {
            field: self.field.clone(),
            coords,
        })
    }

    /// True when every coordinate is an integer.
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }
}

/// Exact `add`, `sub` or `mul` of two elements of the same field.
pub fn fe_arith(a: &FieldElement, b: &FieldElement, kind: ArithKind) -> Result<FieldElement> {
    match kind {
        ArithKind::Add => a.try_add(b),
        ArithKind::Sub => a.try_sub(b),
        ArithKind::Mul => a.try_mul(b),
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.coords == other.coords
    }
}

impl Eq for FieldElement {}

// Operator forms panic on a field mismatch; use `try_*` or `fe_arith` to get an error.
impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> FieldElement {
        self.try_add(rhs).expect("field mismatch in +")
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> FieldElement {
        self.try_sub(rhs).expect("field mismatch in -")
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> FieldElement {
        self.try_mul(rhs).expect("field mismatch in *")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.field.name(), self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, label) in self.coords.iter().zip(self.field.basis_labels()) {
            if c.is_zero() {
                continue;
            }
            let mag = fmt_rational(&c.abs());
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (label.as_str(), c.abs().is_one()) {
                ("1", _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "{label}")?,
                (_, false) => write!(f, "{mag}·{label}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
