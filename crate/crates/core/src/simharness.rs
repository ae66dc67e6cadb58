//! Seeded Monte Carlo experiments and result persistence.
//!
//! Every trial draws from its own ChaCha8 generator seeded by
//! [`derive_trial_seed`], so a sweep is bit-identical for a given
//! configuration whatever the thread count. Trials run in parallel batches
//! and are merged in trial order, which also makes the error-count stopping
//! rule schedule independent.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{build_normalized, det_statistics, histogram_csv, locked_convention, CodeName, Convention, DetStats};
use crate::error::{Error, Result};
use crate::matrix::{real_vec, ComplexMatrix};
use crate::mldecode::{sphere_decode, RealizedLattice};
use crate::relaychannel::{equivalent_channel, frames_from_codeword, naf_transmit, quasi_static_mimo, sample_channels, stack_received, NafConfig};

pub const DEFAULT_MAX_BLOCK_ERRORS: u64 = 200;
const BATCH: u64 = 2048;
const MAX_RESAMPLES: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    QuasiStatic,
    Naf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub code: CodeName,
    pub mode: ChannelMode,
    pub snr_db: Vec<f64>,
    /// Trial cap per SNR point.
    pub trials: u64,
    /// A point stops at the trial producing this many block errors.
    pub max_block_errors: u64,
    pub master_seed: u64,
    pub alphabet: Vec<i64>,
    /// Receive antennas in quasi-static mode; the NAF split lives in `naf`.
    pub receive_antennas: usize,
    pub naf: NafConfig,
    pub output: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            code: CodeName::Golden,
            mode: ChannelMode::QuasiStatic,
            snr_db: vec![10.0],
            trials: 10_000,
            max_block_errors: DEFAULT_MAX_BLOCK_ERRORS,
            master_seed: 1,
            alphabet: vec![-1, 1],
            receive_antennas: 1,
            naf: NafConfig::default(),
            output: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("snr list must be nonempty and finite".into()));
        }
        if self.alphabet.is_empty() {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        if self.max_block_errors == 0 {
            return Err(Error::InvalidInput("max_block_errors must be at least 1".into()));
        }
        if self.mode == ChannelMode::QuasiStatic && self.receive_antennas == 0 {
            return Err(Error::InvalidInput("receive_antennas must be positive".into()));
        }
        if self.mode == ChannelMode::Naf {
            self.naf.validate()?;
        }
        Ok(())
    }

    fn sorted_alphabet(&self) -> Vec<i64> {
        let mut a = self.alphabet.clone();
        a.sort_unstable();
        a.dedup();
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bler: f64,
    pub ber: f64,
    pub mean_decoder_nodes: f64,
    pub channel_resamples: u64,
    /// True when the block-error target ended the point before the trial cap.
    pub stopped_on_errors: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub code: String,
    pub seed: u64,
    pub convention: String,
    pub rate_bpcu: f64,
    pub bits_per_block: u64,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub metadata: Metadata,
    pub points: Vec<SnrPoint>,
}

fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Counter-based trial seed. For `trial_index < 2^40` and `snr_index < 2^24`
/// distinct cells give distinct seeds, since the final mixing step is a bijection.
pub fn derive_trial_seed(master_seed: u64, snr_index: u64, trial_index: u64) -> u64 {
    let cell = (snr_index << 40) | (trial_index & ((1 << 40) - 1));
    mix64(cell ^ mix64(master_seed.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn bits_per_symbol(q: usize) -> u32 {
    usize::BITS - (q.max(2) - 1).leading_zeros()
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

struct Outcome {
    block_error: bool,
    bit_errors: u64,
    nodes: u64,
    resamples: u64,
}

struct PointContext<'a> {
    cfg: &'a SimConfig,
    basis: Vec<ComplexMatrix>,
    alphabet: Vec<i64>,
    snr: f64,
    naf: NafConfig,
}

impl PointContext<'_> {
    fn trial(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.basis.len();
        let n = self.basis[0].nrows();
        let q = self.alphabet.len();
        let idx: Vec<usize> = (0..k).map(|_| rng.random_range(0..q)).collect();
        let z: Vec<i64> = idx.iter().map(|&i| self.alphabet[i]).collect();
        let mut x = ComplexMatrix::zeros(n, n);
        for (zj, b) in z.iter().zip(&self.basis) {
            x += b * Complex64::new(*zj as f64, 0.0);
        }
        let mut resamples = 0;
        let (lat, y) = loop {
            if resamples > MAX_RESAMPLES as u64 {
                return Err(Error::DegenerateLattice("no full-rank channel found".into()));
            }
            let attempt = match self.cfg.mode {
                ChannelMode::QuasiStatic => {
                    let h = quasi_static_mimo(self.cfg.receive_antennas, n, self.snr, &mut rng);
                    let noise = crate::matrix::complex_gaussian(h.nrows(), n, &mut rng);
                    let y = &h * &x + noise;
                    RealizedLattice::from_channel(&h, &self.basis).map(|l| (l, real_vec(&y)))
                }
                ChannelMode::Naf => {
                    let ch = sample_channels(&self.naf, &mut rng);
                    let frames = frames_from_codeword(&self.naf, &x)?;
                    let received = stack_received(&naf_transmit(&self.naf, &ch, &frames, &mut rng)?);
                    equivalent_channel(&self.naf, &ch).and_then(|eq| {
                        let y = eq.whiten(&received)?;
                        RealizedLattice::from_channel(&eq.whitened, &self.basis).map(|l| (l, real_vec(&y)))
                    })
                }
            };
            match attempt {
                Ok(v) => break v,
                Err(Error::DegenerateChannel(_)) => resamples += 1,
                Err(e) => return Err(e),
            }
        };
        let dec = sphere_decode(&y, &lat, &self.alphabet, None)?;
        let mut bit_errors = 0u64;
        for (zh, &i) in dec.z.iter().zip(&idx) {
            let j = self.alphabet.binary_search(zh).expect("decoder returns alphabet symbols");
            bit_errors += (gray(i) ^ gray(j)).count_ones() as u64;
        }
        Ok(Outcome {
            block_error: dec.z != z,
            bit_errors,
            nodes: dec.nodes_visited,
            resamples,
        })
    }
}

fn run_point(cfg: &SimConfig, basis: &[ComplexMatrix], snr_index: usize, snr_db: f64, bits_per_block: u64) -> Result<SnrPoint> {
    let ctx = PointContext {
        cfg,
        basis: basis.to_vec(),
        alphabet: cfg.sorted_alphabet(),
        snr: 10f64.powf(snr_db / 10.0),
        naf: NafConfig { snr_db, ..cfg.naf.clone() },
    };
    let (mut trials, mut blocks, mut bits, mut nodes, mut resamples) = (0u64, 0u64, 0u64, 0u64, 0u64);
    let mut start = 0u64;
    while start < cfg.trials {
        let end = (start + BATCH).min(cfg.trials);
        let batch: Vec<Outcome> = (start..end)
            .into_par_iter()
            .map(|t| ctx.trial(derive_trial_seed(cfg.master_seed, snr_index as u64, t)))
            .collect::<Result<_>>()?;
        for o in batch {
            trials += 1;
            blocks += o.block_error as u64;
            bits += o.bit_errors;
            nodes += o.nodes;
            resamples += o.resamples;
            if blocks >= cfg.max_block_errors {
                break;
            }
        }
        if blocks >= cfg.max_block_errors {
            break;
        }
        start = end;
    }
    Ok(SnrPoint {
        snr_db,
        trials,
        block_errors: blocks,
        bit_errors: bits,
        bler: blocks as f64 / trials as f64,
        ber: bits as f64 / (trials * bits_per_block) as f64,
        mean_decoder_nodes: nodes as f64 / trials as f64,
        channel_resamples: resamples,
        stopped_on_errors: blocks >= cfg.max_block_errors && trials < cfg.trials,
    })
}

/// BLER/BER sweep: per trial a channel, a uniform `z ∈ J^k`, transmission in
/// the configured mode and exact sphere decoding of the power-normalized code.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let code = build_normalized(cfg.code)?.power_normalized();
    if cfg.mode == ChannelMode::Naf && cfg.naf.n() != code.n() {
        return Err(Error::InvalidInput(format!("NAF configuration has n = {}, code has n = {}", cfg.naf.n(), code.n())));
    }
    let basis = code.complex_basis();
    let q = cfg.sorted_alphabet().len();
    let bits_per_block = code.k() as u64 * bits_per_symbol(q) as u64;
    let points = cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(i, &s)| run_point(cfg, &basis, i, s, bits_per_block))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        metadata: Metadata {
            tool: "stcode".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            code: cfg.code.to_string(),
            seed: cfg.master_seed,
            convention: locked_convention()?.as_str().into(),
            rate_bpcu: code.k() as f64 * (q as f64).log2() / code.n() as f64,
            bits_per_block,
            config: cfg.clone(),
        },
        points,
    })
}

/// CSV with header `snr_db,bler,ber,trials`.
pub fn sweep_csv(result: &SimResult) -> String {
    let mut s = String::from("snr_db,bler,ber,trials\n");
    for p in &result.points {
        s.push_str(&format!("{},{:e},{:e},{}\n", p.snr_db, p.bler, p.ber, p.trials));
    }
    s
}

/// Convention choice for determinant reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionPolicy {
    Auto,
    Fixed(Convention),
}

#[derive(Debug, Clone)]
pub struct DetReport {
    pub stats: DetStats,
    pub histogram_csv: String,
}

/// Determinant statistics of the unit-volume code with its log-binned histogram.
pub fn run_det_report(code: CodeName, policy: ConventionPolicy) -> Result<DetReport> {
    let convention = match policy {
        ConventionPolicy::Auto => locked_convention()?,
        ConventionPolicy::Fixed(c) => c,
    };
    let lattice = build_normalized(code)?;
    let stats = det_statistics(&lattice, convention)?;
    let histogram_csv = histogram_csv(&stats);
    Ok(DetReport { stats, histogram_csv })
}

/// Write via a temporary file in the target directory and rename into place.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let io = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small(code: CodeName, snr: Vec<f64>, trials: u64) -> SimConfig {
        SimConfig {
            code,
            snr_db: snr,
            trials,
            master_seed: 7,
            ..SimConfig::default()
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let mut seen = HashSet::with_capacity(1 << 20);
        for s in 0..16 {
            for t in 0..(1 << 16) {
                assert!(seen.insert(derive_trial_seed(3, s, t)));
            }
        }
        assert_eq!(derive_trial_seed(3, 1, 2), derive_trial_seed(3, 1, 2));
        for t in 0..100 {
            assert_ne!(derive_trial_seed(3, 0, t), derive_trial_seed(4, 0, t));
        }
    }

    #[test]
    fn bits_and_gray() {
        assert_eq!(bits_per_symbol(2), 1);
        assert_eq!(bits_per_symbol(4), 2);
        assert_eq!(bits_per_symbol(5), 3);
        assert_eq!((gray(1) ^ gray(2)).count_ones(), 1);
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        for code in CodeName::ALL {
            let r = run_ber_sweep(&small(code, vec![120.0], 100)).unwrap();
            assert_eq!(r.points[0].block_errors, 0, "{code}");
            assert_eq!(r.points[0].trials, 100);
        }
        let cfg = SimConfig { mode: ChannelMode::Naf, ..small(CodeName::Golden, vec![120.0], 100) };
        assert_eq!(run_ber_sweep(&cfg).unwrap().points[0].block_errors, 0);
    }

    #[test]
    fn repeatable_and_rate_recorded() {
        let cfg = small(CodeName::SilverM17, vec![0.0, 6.0], 300);
        let a = run_ber_sweep(&cfg).unwrap();
        let b = run_ber_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert!((a.metadata.rate_bpcu - 2.0).abs() < 1e-12);
        for p in &a.points {
            assert!(p.bit_errors <= p.trials * a.metadata.bits_per_block);
            assert!(p.block_errors <= p.trials);
        }
        assert!(a.points[0].bler >= a.points[1].bler);
    }

    #[test]
    fn stops_at_error_target() {
        let cfg = SimConfig {
            max_block_errors: 5,
            ..small(CodeName::Golden, vec![-5.0], 5000)
        };
        let p = &run_ber_sweep(&cfg).unwrap().points[0];
        assert_eq!(p.block_errors, 5);
        assert!(p.stopped_on_errors);
        assert!(p.trials < 5000);
    }

    #[test]
    fn invalid_configs() {
        assert!(run_ber_sweep(&small(CodeName::Golden, vec![], 10)).is_err());
        assert!(run_ber_sweep(&small(CodeName::Golden, vec![1.0], 0)).is_err());
        let cfg = SimConfig {
            mode: ChannelMode::Naf,
            naf: NafConfig { relays: 3, ..NafConfig::default() },
            ..small(CodeName::Golden, vec![1.0], 10)
        };
        assert!(run_ber_sweep(&cfg).is_err());
    }

    #[test]
    fn csv_and_atomic_write() {
        let r = run_ber_sweep(&small(CodeName::Golden, vec![3.0], 20)).unwrap();
        let csv = sweep_csv(&r);
        assert!(csv.starts_with("snr_db,bler,ber,trials\n3,"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        atomic_write(&p, csv.as_bytes()).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), csv);
        let bad = dir.path().join("missing/out.csv");
        assert!(matches!(atomic_write(&bad, b"x"), Err(Error::Io { .. })));
    }
}
