//! Full-diversity check over codeword differences.
//!
//! Differences of codewords with coefficients in J are lattice points with
//! coefficients in J − J. Their block determinants are evaluated in floating
//! point; anything that is small relative to its Hadamard bound is recomputed
//! exactly, and exact zeros get an exact rank.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detstats::{odometer, IntegralBasis};
use super::STCodeLattice;
use crate::error::{Error, Result};
use crate::exactfield::integral::INT_ZERO;
use crate::matrix::ExactMatrix;

/// Default cap on |J − J|^k.
pub const DEFAULT_DIVERSITY_BUDGET: u128 = 43_046_721; // 3^16

const RECHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityReport {
    pub code: String,
    pub alphabet: Vec<i64>,
    pub differences: Vec<i64>,
    /// Nonzero difference points examined, one per ± pair.
    pub points: u64,
    pub n: usize,
    pub min_rank: usize,
    /// Smallest |det| of a nonzero difference, full n×n matrix at the lattice's scale.
    pub min_abs_det_nonzero_diff: Option<f64>,
    pub argmin: Option<Vec<i64>>,
    pub singular_points: u64,
    /// First singular difference in enumeration order, if any.
    pub singular_example: Option<Vec<i64>>,
    pub exact_rechecks: u64,
    pub fully_diverse: bool,
}

#[derive(Clone)]
struct Partial {
    min_val: f64,
    min_t: u64,
    min_block_rank: usize,
    singular: u64,
    first_singular: u64,
    rechecks: u64,
}

impl Partial {
    fn empty(bn: usize) -> Self {
        Self {
            min_val: f64::INFINITY,
            min_t: u64::MAX,
            min_block_rank: bn,
            singular: 0,
            first_singular: u64::MAX,
            rechecks: 0,
        }
    }

    fn offer(&mut self, v: f64, t: u64) {
        if v < self.min_val || (v == self.min_val && t < self.min_t) {
            self.min_val = v;
            self.min_t = t;
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.offer(o.min_val, o.min_t);
        self.min_block_rank = self.min_block_rank.min(o.min_block_rank);
        self.singular += o.singular;
        self.first_singular = self.first_singular.min(o.first_singular);
        self.rechecks += o.rechecks;
        self
    }
}

/// Determinant by Gaussian elimination with partial pivoting; `m` is row-major
/// and is overwritten.
fn lu_det(m: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let mut p = c;
        for r in c + 1..n {
            if m[r * n + c].norm_sqr() > m[p * n + c].norm_sqr() {
                p = r;
            }
        }
        let pivot = m[p * n + c];
        if pivot.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        det *= pivot;
        for r in c + 1..n {
            let f = m[r * n + c] / pivot;
            if f.norm_sqr() != 0.0 {
                for j in c + 1..n {
                    let v = m[c * n + j];
                    m[r * n + j] -= f * v;
                }
            }
        }
    }
    det
}

fn hadamard_bound(m: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|r| m[r * n..(r + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product()
}

/// All `Σ d_j B_{offset+j}` for d ranging over `diffs^count` in odometer order, flattened row-major.
fn partial_sums(blocks: &[Vec<Complex64>], diffs: &[i64], offset: usize, count: usize) -> Vec<Vec<Complex64>> {
    let size = diffs.len().pow(count as u32);
    let len = blocks[0].len();
    let mut d = vec![0i64; count];
    (0..size)
        .map(|t| {
            odometer(t as u64, diffs, count, &mut d);
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for (j, dj) in d.iter().enumerate() {
                if *dj != 0 {
                    let s = *dj as f64;
                    for (a, b) in acc.iter_mut().zip(&blocks[offset + j]) {
                        *a += b * s;
                    }
                }
            }
            acc
        })
        .collect()
}

fn exact_block(code: &STCodeLattice, z: &[i64]) -> Result<ExactMatrix> {
    let bn = code.block_size();
    let mut acc = ExactMatrix::zeros(code.field(), bn, bn);
    for (zj, b) in z.iter().zip(&code.block_basis) {
        if *zj != 0 {
            acc = acc.try_add(&b.scale_int(*zj))?;
        }
    }
    Ok(acc)
}

/// Unscaled exact |det| of the block for coefficient vector `z`; zero is exact.
fn exact_abs_det(code: &STCodeLattice, ib: Option<&IntegralBasis<'_>>, z: &[i64]) -> Result<f64> {
    match ib {
        Some(ib) => {
            let mut scratch = vec![INT_ZERO; ib.block * ib.block];
            let d = ib.det(z, &mut scratch);
            Ok(if d.iter().all(|c| *c == 0) { 0.0 } else { ib.abs_value(&d) })
        }
        None => {
            let d = exact_block(code, z)?.det()?;
            Ok(if d.is_zero() { 0.0 } else { d.embed().norm() })
        }
    }
}

pub fn diversity_check(code: &STCodeLattice, alphabet: &[i64]) -> Result<DiversityReport> {
    diversity_check_with_budget(code, alphabet, DEFAULT_DIVERSITY_BUDGET)
}

/// Enumerate nonzero lattice points with coefficients in J − J and report the
/// minimum rank and minimum nonzero |det| of the corresponding codeword differences.
pub fn diversity_check_with_budget(code: &STCodeLattice, alphabet: &[i64], budget: u128) -> Result<DiversityReport> {
    if alphabet.is_empty() {
        return Err(Error::InvalidInput("empty alphabet".into()));
    }
    let mut diffs: Vec<i64> = alphabet
        .iter()
        .flat_map(|a| alphabet.iter().map(move |b| a - b))
        .collect();
    diffs.sort_unstable();
    diffs.dedup();
    let k = code.k();
    let bn = code.block_size();
    let needed = (diffs.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let total = needed as u64;
    // diffs is symmetric with odd size, so the zero vector sits at the middle index
    // and t, total-1-t are negatives of each other
    let half = (total - 1) / 2;
    let max_coeff = diffs.iter().map(|d| d.abs()).max().unwrap_or(0);
    let ib = IntegralBasis::new(code, max_coeff);

    let blocks: Vec<Vec<Complex64>> = code
        .block_basis
        .iter()
        .map(|b| {
            let m = b.to_complex();
            (0..bn).flat_map(|r| (0..bn).map(move |c| (r, c))).map(|(r, c)| m[(r, c)]).collect()
        })
        .collect();
    let k_in = k / 2;
    let k_out = k - k_in;
    let outer = partial_sums(&blocks, &diffs, 0, k_out);
    let inner = partial_sums(&blocks, &diffs, k_out, k_in);
    let inner_len = inner.len() as u64;

    let result = (0..outer.len())
        .into_par_iter()
        .map(|o| -> Result<Partial> {
            let mut part = Partial::empty(bn);
            let start = o as u64 * inner_len;
            if start >= half {
                return Ok(part);
            }
            let end = (start + inner_len).min(half);
            let mut m = vec![Complex64::new(0.0, 0.0); bn * bn];
            let mut z = vec![0i64; k];
            for t in start..end {
                let inn = &inner[(t - start) as usize];
                for ((dst, a), b) in m.iter_mut().zip(&outer[o]).zip(inn) {
                    *dst = a + b;
                }
                let hb = hadamard_bound(&m, bn);
                let det = lu_det(&mut m, bn).norm();
                if det > RECHECK_TOL * hb {
                    part.offer(det, t);
                    continue;
                }
                part.rechecks += 1;
                odometer(t, &diffs, k, &mut z);
                let exact = exact_abs_det(code, ib.as_ref(), &z)?;
                if exact > 0.0 {
                    part.offer(exact, t);
                } else {
                    part.singular += 1;
                    part.first_singular = part.first_singular.min(t);
                    part.min_block_rank = part.min_block_rank.min(exact_block(code, &z)?.rank());
                }
            }
            Ok(part)
        })
        .try_reduce(|| Partial::empty(bn), |a, b| Ok(a.merge(b)))?;

    let (min_abs, argmin) = if result.min_t == u64::MAX {
        (None, None)
    } else {
        let mut z = vec![0i64; k];
        odometer(result.min_t, &diffs, k, &mut z);
        let v = exact_abs_det(code, ib.as_ref(), &z)?;
        let full = (code.scale.powi(bn as i32) * v).powi(code.copies as i32);
        (Some(full), Some(z))
    };
    let min_rank = result.min_block_rank * code.copies;
    let singular_example = (result.first_singular != u64::MAX).then(|| {
        let mut z = vec![0i64; k];
        odometer(result.first_singular, &diffs, k, &mut z);
        z
    });
    Ok(DiversityReport {
        code: code.name.clone(),
        alphabet: alphabet.to_vec(),
        differences: diffs,
        points: half,
        n: code.n(),
        min_rank,
        min_abs_det_nonzero_diff: min_abs,
        argmin,
        singular_points: result.singular,
        singular_example,
        exact_rechecks: result.rechecks,
        fully_diverse: min_rank == code.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_lattice, CodeName};
    use crate::exactfield::{golden_field, FieldElement};

    #[test]
    fn lu_det_matches_closed_form() {
        let c = |re, im| Complex64::new(re, im);
        let mut m = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(-1.0, 0.5)];
        let want = c(1.0, 1.0) * c(-1.0, 0.5) - c(2.0, 0.0) * c(0.0, 3.0);
        assert!((lu_det(&mut m, 2) - want).norm() < 1e-14);
    }

    #[test]
    fn identity_lattice_is_trivially_diverse() {
        let f = golden_field();
        let lat = STCodeLattice::new("id", vec![ExactMatrix::identity(&f, 3)], 1, vec![-1, 1]).unwrap();
        let r = diversity_check(&lat, &[-1, 1]).unwrap();
        assert_eq!(r.points, 1);
        assert_eq!(r.min_rank, 3);
        assert!(r.fully_diverse);
        assert!((r.min_abs_det_nonzero_diff.unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn detects_rank_deficient_differences() {
        let f = golden_field();
        let e = |v: i64| FieldElement::from_int(&f, v);
        // B_0 − B_1 = diag(0, 1) has rank 1
        let b0 = ExactMatrix::from_rows(vec![vec![e(1), e(0)], vec![e(0), e(1)]]).unwrap();
        let b1 = ExactMatrix::from_rows(vec![vec![e(1), e(0)], vec![e(0), e(0)]]).unwrap();
        let lat = STCodeLattice::new("deficient", vec![b0, b1], 2, vec![-1, 1]).unwrap();
        let r = diversity_check(&lat, &[-1, 1]).unwrap();
        assert_eq!(r.min_rank, 2);
        assert!(!r.fully_diverse);
        assert!(r.singular_points >= 1);
        assert!(r.min_abs_det_nonzero_diff.unwrap() > 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let lat = build_lattice(CodeName::Golden).unwrap();
        assert!(matches!(
            diversity_check_with_budget(&lat, &[-1, 1], 1000),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn golden_sub_lattice_is_fully_diverse() {
        let full = build_lattice(CodeName::Golden).unwrap();
        let lat = STCodeLattice::new("sub", full.block_basis[..8].to_vec(), 2, vec![-1, 1]).unwrap();
        let r = diversity_check(&lat, &[-1, 1]).unwrap();
        assert_eq!(r.points, (3u64.pow(8) - 1) / 2);
        assert!(r.fully_diverse);
        assert_eq!(r.min_rank, 8);
    }
}
