//! The distributed iterated lattices Λ_s, Λ_g, Λ_m, unit-volume normalization,
//! determinant spectra and full-diversity checks.

mod detstats;
mod diversity;
mod generators;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{distribute, iterate_alpha, Eta, IterationSpec};
use crate::error::{Error, Result};
use crate::exactfield::{golden_field, silver_field, FieldElement, NumberField};
use crate::matrix::{real_inner, ComplexMatrix, ExactMatrix};

pub use detstats::{
    det_statistics, det_statistics_with_budget, histogram_csv, locked_convention, select_convention,
    Convention, DetStats, Histogram, DEFAULT_DET_BUDGET, GOLDEN_REFERENCE,
};
pub use diversity::{diversity_check, diversity_check_with_budget, DiversityReport, DEFAULT_DIVERSITY_BUDGET};
pub use generators::{gaussian, golden_codeword, mido_codeword, silver_codeword};

/// The four lattices of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeName {
    #[serde(rename = "silver_-17")]
    SilverM17,
    #[serde(rename = "silver_-1")]
    SilverM1,
    #[serde(rename = "golden")]
    Golden,
    #[serde(rename = "mido_a4")]
    MidoA4,
}

impl CodeName {
    pub const ALL: [CodeName; 4] = [CodeName::SilverM17, CodeName::SilverM1, CodeName::Golden, CodeName::MidoA4];

    pub fn as_str(self) -> &'static str {
        match self {
            CodeName::SilverM17 => "silver_-17",
            CodeName::SilverM1 => "silver_-1",
            CodeName::Golden => "golden",
            CodeName::MidoA4 => "mido_a4",
        }
    }
}

impl fmt::Display for CodeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodeName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCode(s.to_string()))
    }
}

/// A rank-k lattice code `{ s · Σ z_j B_j : z_j ∈ J }` whose basis matrices are
/// block-diagonal with `copies` equal blocks.
#[derive(Debug, Clone)]
pub struct STCodeLattice {
    pub name: String,
    /// One diagonal block of each basis matrix.
    pub block_basis: Vec<ExactMatrix>,
    pub copies: usize,
    /// The alphabet J, sorted ascending.
    pub alphabet: Vec<i64>,
    pub scale: f64,
    /// Partition of the coefficient indices into transmitted symbols; the decoder
    /// analysis never splits a unit.
    pub units: Vec<Vec<usize>>,
}

impl STCodeLattice {
    /// Validates shapes, `k ≤ 2n²` and linear independence of the basis.
    pub fn new(name: impl Into<String>, block_basis: Vec<ExactMatrix>, copies: usize, alphabet: Vec<i64>) -> Result<Self> {
        let first = block_basis
            .first()
            .ok_or_else(|| Error::InvalidInput("lattice needs at least one basis matrix".into()))?;
        if copies == 0 || !first.is_square() {
            return Err(Error::Dimension("basis blocks must be square and copies >= 1".into()));
        }
        for b in &block_basis {
            if b.rows() != first.rows() || b.cols() != first.cols() {
                return Err(Error::Dimension("basis blocks differ in size".into()));
            }
            if b.field().name() != first.field().name() {
                return Err(Error::FieldMismatch(first.field().name().into(), b.field().name().into()));
            }
        }
        let mut alphabet = alphabet;
        alphabet.sort_unstable();
        alphabet.dedup();
        if alphabet.is_empty() {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        let lat = Self {
            name: name.into(),
            block_basis,
            copies,
            alphabet,
            scale: 1.0,
            units: Vec::new(),
        };
        let lat = Self {
            units: (0..lat.k()).map(|j| vec![j]).collect(),
            ..lat
        };
        let n = lat.n();
        if lat.k() > 2 * n * n {
            return Err(Error::DegenerateLattice(format!("rank {} exceeds 2n² = {}", lat.k(), 2 * n * n)));
        }
        lat.log_volume()?;
        Ok(lat)
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.block_basis[0].field()
    }

    /// Size of one diagonal block.
    pub fn block_size(&self) -> usize {
        self.block_basis[0].rows()
    }

    /// Full codeword size.
    pub fn n(&self) -> usize {
        self.block_size() * self.copies
    }

    pub fn k(&self) -> usize {
        self.block_basis.len()
    }

    pub fn block_structure(&self) -> Vec<usize> {
        vec![self.block_size(); self.copies]
    }

    pub fn with_alphabet(mut self, alphabet: Vec<i64>) -> Result<Self> {
        let mut alphabet = alphabet;
        alphabet.sort_unstable();
        alphabet.dedup();
        if alphabet.is_empty() {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    /// Replace the symbol units; they must partition `0..k`.
    pub fn with_units(mut self, units: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; self.k()];
        for u in &units {
            if u.is_empty() {
                return Err(Error::InvalidInput("empty unit".into()));
            }
            for &j in u {
                if j >= self.k() || seen[j] {
                    return Err(Error::InvalidInput(format!("units do not partition 0..{}", self.k())));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput(format!("units do not cover 0..{}", self.k())));
        }
        self.units = units;
        Ok(self)
    }

    /// Unscaled exact n×n basis matrices.
    pub fn basis(&self) -> Result<Vec<ExactMatrix>> {
        self.block_basis
            .iter()
            .map(|b| distribute(b, self.copies, &Eta::Identity))
            .collect()
    }

    /// Scaled numeric blocks.
    pub fn complex_block_basis(&self) -> Vec<ComplexMatrix> {
        self.block_basis
            .iter()
            .map(|b| b.to_complex() * num_complex::Complex64::new(self.scale, 0.0))
            .collect()
    }

    /// Scaled numeric n×n basis matrices.
    pub fn complex_basis(&self) -> Vec<ComplexMatrix> {
        let b = self.block_size();
        self.complex_block_basis()
            .into_iter()
            .map(|blk| {
                let mut m = ComplexMatrix::zeros(self.n(), self.n());
                for c in 0..self.copies {
                    m.view_mut((c * b, c * b), (b, b)).copy_from(&blk);
                }
                m
            })
            .collect()
    }

    /// Exact unscaled codeword `Σ z_j B_j`.
    pub fn codeword(&self, z: &[i64]) -> Result<ExactMatrix> {
        if z.len() != self.k() {
            return Err(Error::Dimension(format!("{} coefficients for rank {}", z.len(), self.k())));
        }
        let mut acc = ExactMatrix::zeros(self.field(), self.block_size(), self.block_size());
        for (zj, b) in z.iter().zip(&self.block_basis) {
            if *zj != 0 {
                acc = acc.try_add(&b.scale_int(*zj))?;
            }
        }
        distribute(&acc, self.copies, &Eta::Identity)
    }

    /// Scaled numeric codeword.
    pub fn complex_codeword(&self, z: &[f64]) -> ComplexMatrix {
        let basis = self.complex_basis();
        let mut acc = ComplexMatrix::zeros(self.n(), self.n());
        for (zj, b) in z.iter().zip(&basis) {
            acc += b * num_complex::Complex64::new(*zj, 0.0);
        }
        acc
    }

    /// Gram matrix of the real vectorizations of the scaled n×n basis.
    pub fn gram(&self) -> DMatrix<f64> {
        let blocks = self.complex_block_basis();
        let k = self.k();
        // the full matrices repeat each block `copies` times
        let c = self.copies as f64;
        DMatrix::from_fn(k, k, |i, j| c * real_inner(&blocks[i], &blocks[j]))
    }

    /// ln δ(Λ) with δ = sqrt(det Gram).
    pub fn log_volume(&self) -> Result<f64> {
        let g = self.gram();
        let max_diag = g.diagonal().max();
        let chol = g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateLattice(format!("{}: Gram matrix is singular", self.name)))?;
        let l = chol.l();
        let min_pivot = l.diagonal().min();
        if !(min_pivot * min_pivot > 1e-12 * max_diag) {
            return Err(Error::DegenerateLattice(format!(
                "{}: basis is numerically dependent",
                self.name
            )));
        }
        Ok(l.diagonal().iter().map(|d| d.ln()).sum())
    }

    pub fn volume(&self) -> Result<f64> {
        Ok(self.log_volume()?.exp())
    }

    /// Average ‖X‖²_F of the scaled codewords for z uniform on J^k.
    pub fn mean_energy(&self) -> f64 {
        let m1 = self.alphabet.iter().sum::<i64>() as f64 / self.alphabet.len() as f64;
        let m2 = self.alphabet.iter().map(|a| (a * a) as f64).sum::<f64>() / self.alphabet.len() as f64;
        let g = self.gram();
        let mut e = 0.0;
        for i in 0..self.k() {
            for j in 0..self.k() {
                e += if i == j { m2 * g[(i, j)] } else { m1 * m1 * g[(i, j)] };
            }
        }
        e
    }

    /// Copy rescaled so that the average codeword energy is `n`.
    pub fn power_normalized(&self) -> Self {
        let mut out = self.clone();
        out.scale *= (self.n() as f64 / self.mean_energy()).sqrt();
        out
    }
}

/// Rescale so that the fundamental parallelotope has unit volume.
pub fn normalize_unit_volume(code: &STCodeLattice) -> Result<STCodeLattice> {
    let lv = code.log_volume()?;
    let mut out = code.clone();
    out.scale *= (-lv / code.k() as f64).exp();
    Ok(out)
}

/// Basis order: coefficient unit vectors over (x1..x4, y1..y4) with multiplier 1,
/// then the same eight with multiplier i.
fn iterated_basis(
    field: &Arc<NumberField>,
    codeword: fn(&[FieldElement]) -> Result<ExactMatrix>,
    it: &IterationSpec,
) -> Result<Vec<ExactMatrix>> {
    let mut out = Vec::with_capacity(16);
    for (re, im) in [(1, 0), (0, 1)] {
        for idx in 0..8 {
            let mut v = vec![gaussian(field, 0, 0); 8];
            v[idx] = gaussian(field, re, im);
            let x = codeword(&v[..4])?;
            let y = codeword(&v[4..])?;
            out.push(iterate_alpha(&x, &y, it)?);
        }
    }
    Ok(out)
}

/// The four 8×8 lattices with J = {±1}, unnormalized (scale 1).
pub fn build_lattice(name: CodeName) -> Result<STCodeLattice> {
    let blocks = match name {
        CodeName::SilverM17 | CodeName::SilverM1 => {
            let f = silver_field();
            let theta = if name == CodeName::SilverM17 { -17 } else { -1 };
            let it = IterationSpec::new("sigma_s", FieldElement::from_int(&f, theta), None)?;
            iterated_basis(&f, silver_codeword, &it)?
        }
        CodeName::Golden => {
            let f = golden_field();
            let it = IterationSpec::new("sigma_g", gaussian(&f, 1, -1), None)?;
            iterated_basis(&f, golden_codeword, &it)?
        }
        CodeName::MidoA4 => (0..16)
            .map(|j| {
                let mut l = [0i64; 16];
                l[j] = 1;
                mido_codeword(&l)
            })
            .collect::<Result<_>>()?,
    };
    let units: Vec<Vec<usize>> = match name {
        // real and imaginary coefficient of each Gaussian-integer symbol
        CodeName::MidoA4 => (0..4).map(|j| (4 * j..4 * j + 4).collect()).collect(),
        _ => (0..8).map(|j| vec![j, j + 8]).collect(),
    };
    STCodeLattice::new(name.as_str(), blocks, 2, vec![-1, 1])?.with_units(units)
}

/// [`build_lattice`] followed by [`normalize_unit_volume`].
pub fn build_normalized(name: CodeName) -> Result<STCodeLattice> {
    normalize_unit_volume(&build_lattice(name)?)
}
