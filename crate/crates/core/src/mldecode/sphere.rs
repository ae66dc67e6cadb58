use std::cmp::Ordering;

use super::lattice::RealizedLattice;
use crate::error::{Error, Result};

/// Largest `|J|^k` accepted by [`exhaustive_ml`].
pub const EXHAUSTIVE_BUDGET: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub z: Vec<i64>,
    /// Full-length candidates whose metric was computed.
    pub nodes_visited: u64,
    /// `‖y − Bz‖²` of the returned point.
    pub metric: f64,
}

fn sorted_alphabet(alphabet: &[i64]) -> Result<Vec<i64>> {
    let mut a = alphabet.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.is_empty() {
        return Err(Error::InvalidInput("empty alphabet".into()));
    }
    Ok(a)
}

fn check_y(y: &[f64], lat: &RealizedLattice) -> Result<()> {
    if y.len() != lat.b.nrows() {
        return Err(Error::Dimension(format!("received vector of length {} for {} rows", y.len(), lat.b.nrows())));
    }
    Ok(())
}

/// Squared distance `‖y − Bz‖²` computed directly from the generator.
pub fn ml_metric(y: &[f64], lat: &RealizedLattice, z: &[i64]) -> f64 {
    let mut acc = 0.0;
    for (i, yi) in y.iter().enumerate() {
        let mut s = *yi;
        for (j, zj) in z.iter().enumerate() {
            s -= lat.b[(i, j)] * *zj as f64;
        }
        acc += s * s;
    }
    acc
}

struct Search<'a> {
    lat: &'a RealizedLattice,
    yp: Vec<f64>,
    values: Vec<f64>,
    z: Vec<usize>,
    best: f64,
    best_z: Option<Vec<usize>>,
    radius: f64,
    nodes: u64,
    scratch: Vec<Vec<(f64, usize)>>,
}

impl Search<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        let r = &self.lat.r;
        let k = self.z.len();
        let mut c = self.yp[level];
        for j in level + 1..k {
            c -= r[(level, j)] * self.values[self.z[j]];
        }
        let rii = r[(level, level)];
        let mut cands = std::mem::take(&mut self.scratch[level]);
        cands.clear();
        for (a, v) in self.values.iter().enumerate() {
            let d = c - rii * v;
            cands.push((partial + d * d, a));
        }
        // stable sort keeps equal metrics in ascending symbol order
        cands.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
        if level == 0 {
            self.nodes += cands.len() as u64;
        }
        for &(m, a) in &cands {
            if m > self.best || m > self.radius {
                break;
            }
            self.z[level] = a;
            if level == 0 {
                let better = m < self.best
                    || self.best_z.as_ref().is_none_or(|bz| self.z.as_slice() < bz.as_slice());
                if better {
                    self.best = m;
                    self.best_z = Some(self.z.clone());
                }
            } else {
                self.descend(level - 1, m);
            }
        }
        self.scratch[level] = cands;
    }
}

/// Depth-first Schnorr–Euchner enumeration of `argmin ‖y − Bz‖²` over `J^k`.
///
/// The radius starts at `initial_radius` (a squared distance, `None` for
/// infinite) and shrinks to the best metric found. If a finite radius contains
/// no lattice point the search restarts with an infinite one, so the result is
/// always the exact minimizer. Ties go to the lexicographically smallest `z`.
pub fn sphere_decode(y: &[f64], lat: &RealizedLattice, alphabet: &[i64], initial_radius: Option<f64>) -> Result<Decoded> {
    check_y(y, lat)?;
    let alph = sorted_alphabet(alphabet)?;
    let k = lat.k();
    let yp = lat.rotate(y);
    // part of ‖y‖² outside the column space of B
    let outside = (y.iter().map(|v| v * v).sum::<f64>() - yp.iter().map(|v| v * v).sum::<f64>()).max(0.0);
    let mut s = Search {
        lat,
        yp,
        values: alph.iter().map(|&v| v as f64).collect(),
        z: vec![0; k],
        best: f64::INFINITY,
        best_z: None,
        radius: initial_radius.map_or(f64::INFINITY, |r| (r - outside).max(0.0)),
        nodes: 0,
        scratch: vec![Vec::with_capacity(alph.len()); k],
    };
    s.descend(k - 1, 0.0);
    if s.best_z.is_none() {
        s.radius = f64::INFINITY;
        s.descend(k - 1, 0.0);
    }
    let idx = s.best_z.expect("an infinite radius always yields a point");
    let z: Vec<i64> = idx.iter().map(|&a| alph[a]).collect();
    Ok(Decoded {
        metric: ml_metric(y, lat, &z),
        z,
        nodes_visited: s.nodes,
    })
}

/// Brute-force minimizer of `‖y − Bz‖²` over `J^k` in lexicographic order.
pub fn exhaustive_ml(y: &[f64], lat: &RealizedLattice, alphabet: &[i64]) -> Result<Decoded> {
    check_y(y, lat)?;
    let alph = sorted_alphabet(alphabet)?;
    let k = lat.k();
    let needed = (alph.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > EXHAUSTIVE_BUDGET {
        return Err(Error::Budget { needed, budget: EXHAUSTIVE_BUDGET });
    }
    let m = y.len();
    let mut idx = vec![0usize; k];
    let mut z: Vec<i64> = vec![alph[0]; k];
    // residual y − Bz, updated as the odometer turns
    let mut res: Vec<f64> = y.to_vec();
    for (j, zj) in z.iter().enumerate() {
        for i in 0..m {
            res[i] -= lat.b[(i, j)] * *zj as f64;
        }
    }
    let mut best = f64::INFINITY;
    let mut best_z = z.clone();
    let mut count = 0u64;
    loop {
        count += 1;
        let approx: f64 = res.iter().map(|v| v * v).sum();
        // near the incumbent, settle with the direct metric so drift cannot decide
        if approx <= best * (1.0 + 1e-9) + 1e-12 {
            let exact = ml_metric(y, lat, &z);
            if exact < best {
                best = exact;
                best_z.clone_from(&z);
            }
        }
        // last coordinate turns fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(Decoded {
                    z: best_z,
                    nodes_visited: count,
                    metric: best,
                });
            }
            pos -= 1;
            let old = z[pos];
            let wrap = idx[pos] + 1 == alph.len();
            idx[pos] = if wrap { 0 } else { idx[pos] + 1 };
            z[pos] = alph[idx[pos]];
            let delta = (z[pos] - old) as f64;
            for i in 0..m {
                res[i] -= lat.b[(i, pos)] * delta;
            }
            if !wrap {
                break;
            }
        }
    }
}
