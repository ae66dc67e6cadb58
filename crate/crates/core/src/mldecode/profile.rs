use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::fd::analysis_receive_antennas;
use super::lattice::RealizedLattice;
use super::sphere::sphere_decode;
use crate::codes::STCodeLattice;
use crate::error::{Error, Result};
use crate::matrix::{complex_gaussian, real_vec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityProfile {
    pub code: String,
    pub snr_db: f64,
    pub channels: usize,
    pub seed: u64,
    pub mean_nodes: f64,
    pub max_nodes: u64,
}

fn channel_nodes(code: &STCodeLattice, basis: &[crate::matrix::ComplexMatrix], alphabet: &[i64], snr: f64, seed: u64, index: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n_d = analysis_receive_antennas(code);
    for _ in 0..100 {
        let h = complex_gaussian(n_d, code.n(), &mut rng) * num_complex::Complex64::new(snr.sqrt(), 0.0);
        let lat = match RealizedLattice::from_channel(&h, basis) {
            Ok(l) => l,
            Err(Error::DegenerateChannel(_)) => continue,
            Err(e) => return Err(e),
        };
        let z: Vec<i64> = (0..code.k()).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        let noise = real_vec(&complex_gaussian(n_d, code.n(), &mut rng));
        let y: Vec<f64> = (0..lat.b.nrows())
            .map(|i| (0..z.len()).map(|j| lat.b[(i, j)] * z[j] as f64).sum::<f64>() + noise[i])
            .collect();
        return Ok(sphere_decode(&y, &lat, alphabet, None)?.nodes_visited);
    }
    Err(Error::DegenerateLattice("no full-rank channel in 100 draws".into()))
}

/// Sphere-decoder node counts over `channels` random channels at `snr_db`,
/// after power normalization. Channel `i` draws from its own stream of the
/// seeded generator, so the result does not depend on scheduling.
pub fn complexity_profile(code: &STCodeLattice, alphabet: &[i64], channels: usize, seed: u64, snr_db: f64) -> Result<ComplexityProfile> {
    complexity_profile_ordered(code, alphabet, channels, seed, snr_db, None)
}

/// As [`complexity_profile`], with the basis columns taken in `order`.
pub fn complexity_profile_ordered(
    code: &STCodeLattice,
    alphabet: &[i64],
    channels: usize,
    seed: u64,
    snr_db: f64,
    order: Option<&[usize]>,
) -> Result<ComplexityProfile> {
    if channels == 0 || alphabet.is_empty() {
        return Err(Error::InvalidInput("need at least one channel and one symbol".into()));
    }
    let code = code.power_normalized();
    let mut basis = code.complex_basis();
    if let Some(o) = order {
        basis = o.iter().map(|&j| basis[j].clone()).collect();
    }
    let snr = 10f64.powf(snr_db / 10.0);
    let counts: Vec<u64> = (0..channels as u64)
        .into_par_iter()
        .map(|i| channel_nodes(&code, &basis, alphabet, snr, seed, i))
        .collect::<Result<_>>()?;
    Ok(ComplexityProfile {
        code: code.name.clone(),
        snr_db,
        channels,
        seed,
        mean_nodes: counts.iter().sum::<u64>() as f64 / channels as f64,
        max_nodes: counts.iter().copied().max().unwrap_or(0),
    })
}

/// CSV with header `snr_db,mean_nodes,max_nodes`.
pub fn profiles_csv(profiles: &[ComplexityProfile]) -> String {
    let mut s = String::from("snr_db,mean_nodes,max_nodes\n");
    for p in profiles {
        s.push_str(&format!("{},{},{}\n", p.snr_db, p.mean_nodes, p.max_nodes));
    }
    s
}
