//! Dense matrices: exact ones over a [`NumberField`] and numeric complex ones.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exactfield::{FieldElement, NumberField};

/// Numeric carrier for codewords, channels and embedded lattice bases.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Row-major matrix with entries in a single number field.
#[derive(Clone)]
pub struct ExactMatrix {
    field: Arc<NumberField>,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl PartialEq for ExactMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for ExactMatrix {}

impl ExactMatrix {
    pub fn zeros(field: &Arc<NumberField>, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![FieldElement::zero(field); rows * cols],
        }
    }

    pub fn identity(field: &Arc<NumberField>, n: usize) -> Self {
        Self::from_fn(field, n, n, |i, j| {
            if i == j {
                FieldElement::one(field)
            } else {
                FieldElement::zero(field)
            }
        })
    }

    pub fn from_fn(
        field: &Arc<NumberField>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let r = rows.len();
        let first = rows
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| Error::Dimension("empty matrix".into()))?;
        let field = first.field().clone();
        let first = first.clone();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for e in row {
                if !e.same_field(&first) {
                    return Err(Error::FieldMismatch(
                        field.name().to_string(),
                        e.field().name().to_string(),
                    ));
                }
                data.push(e);
            }
        }
        Ok(Self {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
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

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &FieldElement> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElement::is_zero)
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field.name() == other.field.name() {
            Ok(())
        } else {
            Err(Error::FieldMismatch(
                self.field.name().to_string(),
                other.field.name().to_string(),
            ))
        }
    }

    fn same_shape(&self, other: &Self, op: &str) -> Result<()> {
        self.same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sub")?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(&self.field, self.rows, other.cols, |i, j| {
            let mut acc = FieldElement::zero(&self.field);
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        }))
    }

    pub fn scale(&self, s: &FieldElement) -> Result<Self> {
        let data = self.data.iter().map(|e| e.try_mul(s)).collect::<Result<_>>()?;
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn scale_int(&self, s: i64) -> Self {
        let r = crate::exactfield::rat(s);
        Self {
            data: self.data.iter().map(|e| e.scale(&r)).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        self.scale_int(-1)
    }

    /// Apply a field automorphism entrywise.
    pub fn map_aut(&self, name: &str) -> Result<Self> {
        let data = self.data.iter().map(|e| e.apply_aut(name)).collect::<Result<_>>()?;
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Conjugate transpose, using the field's conjugation automorphism.
    pub fn conj_transpose(&self) -> Result<Self> {
        self.transpose().map_aut(
            self.field
                .conjugation()
                .ok_or_else(|| Error::UnknownAutomorphism("conjugation".into(), self.field.name().into()))?,
        )
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(&self.field, nr, nc, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        for m in [b, c, d] {
            a.same_shape(m, "block2x2")?;
        }
        let (r, k) = (a.rows, a.cols);
        Ok(Self::from_fn(&a.field, 2 * r, 2 * k, |i, j| {
            let blk = match (i < r, j < k) {
                (true, true) => a,
                (true, false) => b,
                (false, true) => c,
                (false, false) => d,
            };
            blk.get(i % r, j % k).clone()
        }))
    }

    pub fn block_diag(blocks: &[Self]) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Dimension("no blocks".into()))?;
        for b in blocks {
            first.same_field(b)?;
        }
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(&first.field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Exact determinant by division-free Laplace expansion over column subsets.
    pub fn det(&self) -> Result<FieldElement> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("det of {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        if n > 16 {
            return Err(Error::Dimension("exact det limited to n <= 16".into()));
        }
        let size = 1usize << n;
        let mut minors = vec![FieldElement::zero(&self.field); size];
        minors[0] = FieldElement::one(&self.field);
        for mask in 1..size {
            let row = n - mask.count_ones() as usize;
            let mut acc = FieldElement::zero(&self.field);
            let mut positive = true;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let e = self.get(row, col);
                let sub = &minors[mask & !(1 << col)];
                if !e.is_zero() && !sub.is_zero() {
                    let p = e * sub;
                    acc = if positive { &acc + &p } else { &acc - &p };
                }
                positive = !positive;
            }
            minors[mask] = acc;
        }
        Ok(minors.pop().expect("nonempty"))
    }

    /// Exact rank by Gaussian elimination over the field.
    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<FieldElement>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(p, rank);
            let inv = a[rank][col].inverse().expect("nonzero pivot in a field");
            for r in rank + 1..self.rows {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] * &inv;
                for c in col..self.cols {
                    let v = &f * &a[rank][c];
                    a[r][c] = &a[r][c] - &v;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).embed())
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactMatrix<{}>{}x{} {}", self.field.name(), self.rows, self.cols, self)
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `Σ_i Re(a_i · conj(b_i))` over all entries: the real inner product of the
/// real vectorizations.
pub fn real_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

/// Real vectorization: column-stacked real parts followed by imaginary parts.
pub fn real_vec(m: &ComplexMatrix) -> Vec<f64> {
    // nalgebra stores column-major, so iteration order is already column stacking
    m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im)).collect()
}

/// Matrix of i.i.d. circularly-symmetric complex Gaussian entries with unit
/// variance (each real component has variance 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}
