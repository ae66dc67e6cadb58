//! Exhaustive determinant spectra over J^k.

use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_normalized, CodeName, STCodeLattice};
use crate::error::{Error, Result};
use crate::exactfield::integral::{self, IntElem, IntegralTable, INT_ZERO};
use crate::matrix::ExactMatrix;

/// Default cap on |J|^k for exhaustive enumeration.
pub const DEFAULT_DET_BUDGET: u128 = 1 << 24;

/// Reference (min, max, mean) for the unit-volume Golden lattice with J = {±1}.
pub const GOLDEN_REFERENCE: (f64, f64, f64) = (4.445e-3, 13.871, 1.819);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// |det X| of the full n×n codeword.
    AbsDet,
    /// |det X|².
    AbsDetSquared,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::AbsDet, Convention::AbsDetSquared];

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::AbsDet => "abs_det",
            Convention::AbsDetSquared => "abs_det_squared",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "abs_det" => Ok(Convention::AbsDet),
            "abs_det_squared" => Ok(Convention::AbsDetSquared),
            other => Err(Error::InvalidInput(format!("unknown convention `{other}`"))),
        }
    }
}

/// Log-binned histogram; zero determinants are counted separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins_per_decade: u32,
    /// log10 of the lower edge of bin 0.
    pub first_decade: i32,
    pub counts: Vec<u64>,
    pub zeros: u64,
}

impl Histogram {
    fn build(values: &[f64], bins_per_decade: u32) -> Self {
        let positive = values.iter().copied().filter(|v| *v > 0.0);
        let (lo, hi) = positive.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let zeros = values.iter().filter(|v| **v <= 0.0).count() as u64;
        if !lo.is_finite() {
            return Self {
                bins_per_decade,
                first_decade: 0,
                counts: Vec::new(),
                zeros,
            };
        }
        let bpd = bins_per_decade as f64;
        let first_decade = lo.log10().floor() as i32;
        let last = (hi.log10().floor() as i32).max(first_decade) + 1;
        let nbins = ((last - first_decade) as u32 * bins_per_decade) as usize;
        let mut counts = vec![0u64; nbins];
        for &v in values {
            if v > 0.0 {
                let pos = ((v.log10() - first_decade as f64) * bpd).floor() as isize;
                counts[pos.clamp(0, nbins as isize - 1) as usize] += 1;
            }
        }
        Self {
            bins_per_decade,
            first_decade,
            counts,
            zeros,
        }
    }

    /// Geometric center of bin `i`.
    pub fn bin_center(&self, i: usize) -> f64 {
        10f64.powf(self.first_decade as f64 + (i as f64 + 0.5) / self.bins_per_decade as f64)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.zeros
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetStats {
    pub code: String,
    pub convention: Convention,
    pub scale: f64,
    pub alphabet: Vec<i64>,
    pub codewords: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub argmin: Vec<i64>,
    pub argmax: Vec<i64>,
    pub histogram: Histogram,
}

/// Integer form of a lattice's block basis: entries scaled by a common
/// denominator so that codeword determinants are exact `i128` coordinates.
pub(crate) struct IntegralBasis<'a> {
    pub table: &'a IntegralTable,
    /// entries[j][r*bn + c] = denom · B_j[r][c]
    pub entries: Vec<Vec<IntElem>>,
    pub block: usize,
    embedding: Vec<Complex64>,
    /// denom^block
    det_denom: f64,
}

impl<'a> IntegralBasis<'a> {
    /// `None` when the field has no integral table or `max_coeff` could overflow.
    pub fn new(code: &'a STCodeLattice, max_coeff: i64) -> Option<Self> {
        let field = code.field();
        let table = field.integral_table()?;
        let denom: BigInt = integral::common_denominator(
            code.block_basis.iter().flat_map(|b| b.entries().flat_map(|e| e.coords().iter())),
        );
        let entries: Vec<Vec<IntElem>> = code
            .block_basis
            .iter()
            .map(|b| b.entries().map(|e| integral::to_integral(e.coords(), &denom)).collect::<Result<_>>())
            .collect::<Result<_>>()
            .ok()?;
        let bn = code.block_size();
        let mut worst = 0u128;
        for e in 0..bn * bn {
            let s: u128 = entries.iter().map(|b| integral::l1(&b[e])).sum();
            worst = worst.max(s);
        }
        let entry_bound = worst.checked_mul(max_coeff.unsigned_abs() as u128)?;
        let det_bound = table.det_bound(entry_bound, bn)?;
        if det_bound >= i128::MAX as u128 / 2 {
            return None;
        }
        Some(Self {
            table,
            entries,
            block: bn,
            embedding: field.embedding().to_vec(),
            det_denom: denom.to_f64()?.powi(bn as i32),
        })
    }

    pub fn block_entries(&self, z: &[i64], out: &mut [IntElem]) {
        out.fill(INT_ZERO);
        for (zj, b) in z.iter().zip(&self.entries) {
            if *zj == 0 {
                continue;
            }
            for (o, e) in out.iter_mut().zip(b) {
                integral::scaled_add_assign(o, e, *zj as i128);
            }
        }
    }

    pub fn det(&self, z: &[i64], scratch: &mut [IntElem]) -> IntElem {
        self.block_entries(z, scratch);
        self.table.det(scratch, self.block)
    }

    /// |embedded value| of an integer determinant, undoing the denominator.
    pub fn abs_value(&self, det: &IntElem) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, e) in det.iter().zip(&self.embedding) {
            if *c != 0 {
                acc += e * (*c as f64);
            }
        }
        acc.norm() / self.det_denom
    }
}

/// Coefficient vector for odometer index `t` (last coordinate fastest).
pub(crate) fn odometer(t: u64, alphabet: &[i64], k: usize, out: &mut [i64]) {
    let base = alphabet.len() as u64;
    let mut t = t;
    for j in (0..k).rev() {
        out[j] = alphabet[(t % base) as usize];
        t /= base;
    }
}

fn enumeration_size(base: usize, k: usize, budget: u128) -> Result<u64> {
    let needed = (base as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    Ok(needed as u64)
}

fn exact_block_abs_det(code: &STCodeLattice, z: &[i64]) -> Result<f64> {
    let bn = code.block_size();
    let mut acc = ExactMatrix::zeros(code.field(), bn, bn);
    for (zj, b) in z.iter().zip(&code.block_basis) {
        if *zj != 0 {
            acc = acc.try_add(&b.scale_int(*zj))?;
        }
    }
    Ok(acc.det()?.embed().norm())
}

/// |det| of the unscaled block for every codeword, in odometer order.
fn block_abs_dets(code: &STCodeLattice, budget: u128) -> Result<Vec<f64>> {
    let k = code.k();
    let alphabet = &code.alphabet;
    let total = enumeration_size(alphabet.len(), k, budget)?;
    let symmetric = alphabet.iter().all(|a| alphabet.contains(&-a));
    // for a symmetric alphabet, index t and total-1-t are negatives of each other
    let half = if symmetric { total.div_ceil(2) } else { total };
    let max_coeff = alphabet.iter().map(|a| a.abs()).max().unwrap_or(0);
    let mut values = vec![0.0f64; total as usize];
    const CHUNK: usize = 512;
    match IntegralBasis::new(code, max_coeff) {
        Some(ib) => {
            let bn = code.block_size();
            values[..half as usize]
                .par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let mut z = vec![0i64; k];
                    let mut scratch = vec![INT_ZERO; bn * bn];
                    for (off, v) in chunk.iter_mut().enumerate() {
                        odometer((c * CHUNK + off) as u64, alphabet, k, &mut z);
                        *v = ib.abs_value(&ib.det(&z, &mut scratch));
                    }
                });
        }
        None => {
            values[..half as usize]
                .par_chunks_mut(CHUNK)
                .enumerate()
                .try_for_each(|(c, chunk)| -> Result<()> {
                    let mut z = vec![0i64; k];
                    for (off, v) in chunk.iter_mut().enumerate() {
                        odometer((c * CHUNK + off) as u64, alphabet, k, &mut z);
                        *v = exact_block_abs_det(code, &z)?;
                    }
                    Ok(())
                })?;
        }
    }
    if symmetric {
        let n = total as usize;
        for t in half as usize..n {
            values[t] = values[n - 1 - t];
        }
    }
    Ok(values)
}

fn full_value(block_abs: f64, code: &STCodeLattice, convention: Convention) -> f64 {
    let bn = code.block_size() as i32;
    let v = (code.scale.powi(bn) * block_abs).powi(code.copies as i32);
    match convention {
        Convention::AbsDet => v,
        Convention::AbsDetSquared => v * v,
    }
}

fn stats_from(code: &STCodeLattice, convention: Convention, block_values: &[f64]) -> DetStats {
    let values: Vec<f64> = block_values.iter().map(|b| full_value(*b, code, convention)).collect();
    let (mut imin, mut imax) = (0usize, 0usize);
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[imin] {
            imin = i;
        }
        if *v > values[imax] {
            imax = i;
        }
        sum += v;
    }
    let k = code.k();
    let mut argmin = vec![0i64; k];
    let mut argmax = vec![0i64; k];
    odometer(imin as u64, &code.alphabet, k, &mut argmin);
    odometer(imax as u64, &code.alphabet, k, &mut argmax);
    DetStats {
        code: code.name.clone(),
        convention,
        scale: code.scale,
        alphabet: code.alphabet.clone(),
        codewords: values.len() as u64,
        min: values[imin],
        max: values[imax],
        mean: sum / values.len() as f64,
        argmin,
        argmax,
        histogram: Histogram::build(&values, 10),
    }
}

/// Enumerate every codeword of `code` over its alphabet and summarise |det| under
/// `convention`, using the lattice's current scale.
pub fn det_statistics(code: &STCodeLattice, convention: Convention) -> Result<DetStats> {
    det_statistics_with_budget(code, convention, DEFAULT_DET_BUDGET)
}

pub fn det_statistics_with_budget(code: &STCodeLattice, convention: Convention, budget: u128) -> Result<DetStats> {
    let values = block_abs_dets(code, budget)?;
    Ok(stats_from(code, convention, &values))
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

/// Pick the convention under which the unit-volume Golden lattice matches
/// [`GOLDEN_REFERENCE`] within 1% on min, max and mean.
pub fn select_convention() -> Result<Convention> {
    let code = build_normalized(CodeName::Golden)?;
    let values = block_abs_dets(&code, DEFAULT_DET_BUDGET)?;
    let (rmin, rmax, rmean) = GOLDEN_REFERENCE;
    for conv in Convention::ALL {
        let s = stats_from(&code, conv, &values);
        if within(s.min, rmin, 0.01) && within(s.max, rmax, 0.01) && within(s.mean, rmean, 0.01) {
            return Ok(conv);
        }
    }
    Err(Error::InvalidInput(
        "no determinant convention reproduces the Golden reference row".into(),
    ))
}

/// [`select_convention`], computed once per process.
pub fn locked_convention() -> Result<Convention> {
    static LOCK: OnceLock<std::result::Result<Convention, String>> = OnceLock::new();
    LOCK.get_or_init(|| select_convention().map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::InvalidInput)
}

/// `bin_center,count` rows; zero determinants appear as a row with center 0.
pub fn histogram_csv(stats: &DetStats) -> String {
    let mut out = String::from("bin_center,count\n");
    let h = &stats.histogram;
    if h.zeros > 0 {
        let _ = writeln!(out, "0,{}", h.zeros);
    }
    for (i, c) in h.counts.iter().enumerate() {
        let _ = writeln!(out, "{:.6e},{c}", h.bin_center(i));
    }
    out
}
