//! Half-duplex N-relay non-orthogonal amplify-and-forward channel.
//!
//! During cooperation frame `i` the source sends `X_{i,1}` then `X_{i,2}`
//! (each `n_s × T/2`). Relay `i` listens in the first half and retransmits
//! `B_i(γ'_{R_i} H_i X_{i,1} + W_i)` in the second:
//!
//! ```text
//! Y_{i,1} = γ_{i,1} F X_{i,1} + V_{i,1}
//! Y_{i,2} = γ_{i,2} F X_{i,2} + V_{i,2} + γ_{R_i} G_i B_i (γ'_{R_i} H_i X_{i,1} + W_i)
//! ```
//!
//! Stacking `[Y_{i,1}; Y_{i,2}]` over the frames gives `H_eq · X` for the
//! block-diagonal codeword `X` whose block `i` is `[X_{i,1}; X_{i,2}]`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::algebra::reshape_to_naf_frames;
use crate::error::{Error, Result};
use crate::matrix::{complex_gaussian, ComplexMatrix};

/// How the relay amplification matrix `B_i = b_i·I` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayGain {
    /// `b_i = 1/√(γ'² P + 1)`: unit average output power per relay antenna,
    /// where `P` is the source power per channel use.
    Normalized,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NafConfig {
    pub relays: usize,
    pub n_s: usize,
    pub n_r: usize,
    pub n_d: usize,
    pub snr_db: f64,
    pub gamma_1: Option<f64>,
    pub gamma_2: Option<f64>,
    pub gamma_r: Option<f64>,
    pub gamma_r_prime: Option<f64>,
    pub relay_gain: RelayGain,
    /// Average source energy per channel use; defaults to that of a
    /// codeword with `E‖X‖² = n`.
    pub source_power: Option<f64>,
}

impl Default for NafConfig {
    fn default() -> Self {
        Self {
            relays: 2,
            n_s: 2,
            n_r: 2,
            n_d: 1,
            snr_db: 10.0,
            gamma_1: None,
            gamma_2: None,
            gamma_r: None,
            gamma_r_prime: None,
            relay_gain: RelayGain::Normalized,
            source_power: None,
        }
    }
}

/// Resolved scalar gains of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub gamma_r: f64,
    pub gamma_r_prime: f64,
    pub b: f64,
}

impl NafConfig {
    pub fn validate(&self) -> Result<()> {
        if self.relays == 0 || self.n_s == 0 || self.n_d == 0 {
            return Err(Error::InvalidInput("relays, n_s and n_d must be positive".into()));
        }
        if self.n_r != self.n_s {
            return Err(Error::InvalidInput(format!(
                "only n_r = n_s is supported (got n_s = {}, n_r = {})",
                self.n_s, self.n_r
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidInput("snr_db must be finite".into()));
        }
        Ok(())
    }

    /// Codeword size `n = N(n_s + n_r)`.
    pub fn n(&self) -> usize {
        self.relays * (self.n_s + self.n_r)
    }

    /// Cooperation frame length `T`; each half carries one block's rows.
    pub fn frame_length(&self) -> usize {
        2 * (self.n_s + self.n_r)
    }

    pub fn snr(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn source_power(&self) -> f64 {
        self.source_power
            .unwrap_or(self.n() as f64 / (self.relays * self.frame_length()) as f64)
    }

    pub fn gains(&self) -> Gains {
        let snr = self.snr();
        let gamma_r_prime = self.gamma_r_prime.unwrap_or(snr.sqrt());
        let b = match self.relay_gain {
            RelayGain::Normalized => 1.0 / (gamma_r_prime * gamma_r_prime * self.source_power() + 1.0).sqrt(),
            RelayGain::Fixed(b) => b,
        };
        Gains {
            gamma_1: self.gamma_1.unwrap_or(snr.sqrt()),
            gamma_2: self.gamma_2.unwrap_or(snr.sqrt()),
            gamma_r: self.gamma_r.unwrap_or((snr / (1.0 + snr)).sqrt()),
            gamma_r_prime,
            b,
        }
    }
}

/// Rayleigh channels frozen over one superframe.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Source to destination, `n_d × n_s`.
    pub f: ComplexMatrix,
    /// Source to relay `i`, `n_r × n_s`.
    pub h: Vec<ComplexMatrix>,
    /// Relay `i` to destination, `n_d × n_r`.
    pub g: Vec<ComplexMatrix>,
}

pub fn sample_channels(cfg: &NafConfig, rng: &mut dyn RngCore) -> ChannelRealization {
    let f = complex_gaussian(cfg.n_d, cfg.n_s, rng);
    let mut h = Vec::with_capacity(cfg.relays);
    let mut g = Vec::with_capacity(cfg.relays);
    for _ in 0..cfg.relays {
        h.push(complex_gaussian(cfg.n_r, cfg.n_s, rng));
        g.push(complex_gaussian(cfg.n_d, cfg.n_r, rng));
    }
    ChannelRealization { f, h, g }
}

/// Plain `n_d × n` Rayleigh channel scaled by `√snr` (linear snr).
pub fn quasi_static_mimo(n_d: usize, n: usize, snr: f64, rng: &mut dyn RngCore) -> ComplexMatrix {
    complex_gaussian(n_d, n, rng) * Complex64::new(snr.sqrt(), 0.0)
}

fn cscale(m: &ComplexMatrix, s: f64) -> ComplexMatrix {
    m * Complex64::new(s, 0.0)
}

/// Per-frame transmit pairs `(X_{i,1}, X_{i,2})` of a block-diagonal codeword.
pub fn frames_from_codeword(cfg: &NafConfig, x: &ComplexMatrix) -> Result<Vec<(ComplexMatrix, ComplexMatrix)>> {
    if x.nrows() != cfg.n() {
        return Err(Error::Dimension(format!("codeword is {}x{}, expected n = {}", x.nrows(), x.ncols(), cfg.n())));
    }
    let half = cfg.frame_length() / 2;
    Ok(reshape_to_naf_frames(x, cfg.n_s)?
        .into_iter()
        .map(|c| (c.columns(0, half).into_owned(), c.columns(half, half).into_owned()))
        .collect())
}

fn transmit(
    cfg: &NafConfig,
    ch: &ChannelRealization,
    frames: &[(ComplexMatrix, ComplexMatrix)],
    mut rng: Option<&mut dyn RngCore>,
) -> Result<Vec<(ComplexMatrix, ComplexMatrix)>> {
    cfg.validate()?;
    let half = cfg.frame_length() / 2;
    if frames.len() != cfg.relays || ch.h.len() != cfg.relays || ch.g.len() != cfg.relays {
        return Err(Error::Dimension(format!("{} frames for {} relays", frames.len(), cfg.relays)));
    }
    let gn = cfg.gains();
    let mut out = Vec::with_capacity(frames.len());
    for (i, (x1, x2)) in frames.iter().enumerate() {
        for x in [x1, x2] {
            if x.shape() != (cfg.n_s, half) {
                return Err(Error::Dimension(format!("frame {i} is {:?}, expected ({}, {half})", x.shape(), cfg.n_s)));
            }
        }
        let mut y1 = cscale(&(&ch.f * x1), gn.gamma_1);
        let mut y2 = cscale(&(&ch.f * x2), gn.gamma_2);
        let mut relay_in = cscale(&(&ch.h[i] * x1), gn.gamma_r_prime);
        if let Some(r) = rng.as_deref_mut() {
            y1 += complex_gaussian(cfg.n_d, half, r);
            y2 += complex_gaussian(cfg.n_d, half, r);
            relay_in += complex_gaussian(cfg.n_r, half, r);
        }
        y2 += cscale(&(&ch.g[i] * relay_in), gn.gamma_r * gn.b);
        out.push((y1, y2));
    }
    Ok(out)
}

/// Received blocks `(Y_{i,1}, Y_{i,2})` with unit-variance noise `V`, `W`.
pub fn naf_transmit(
    cfg: &NafConfig,
    ch: &ChannelRealization,
    frames: &[(ComplexMatrix, ComplexMatrix)],
    rng: &mut dyn RngCore,
) -> Result<Vec<(ComplexMatrix, ComplexMatrix)>> {
    transmit(cfg, ch, frames, Some(rng))
}

pub fn naf_transmit_noiseless(
    cfg: &NafConfig,
    ch: &ChannelRealization,
    frames: &[(ComplexMatrix, ComplexMatrix)],
) -> Result<Vec<(ComplexMatrix, ComplexMatrix)>> {
    transmit(cfg, ch, frames, None)
}

/// `2n_d × n` matrix whose column block `i` is `[Y_{i,1}; Y_{i,2}]`.
pub fn stack_received(outputs: &[(ComplexMatrix, ComplexMatrix)]) -> ComplexMatrix {
    let rows = outputs.first().map_or(0, |(a, b)| a.nrows() + b.nrows());
    let mut cols = Vec::new();
    for (y1, y2) in outputs {
        let mut blk = ComplexMatrix::zeros(rows, y1.ncols());
        blk.rows_mut(0, y1.nrows()).copy_from(y1);
        blk.rows_mut(y1.nrows(), y2.nrows()).copy_from(y2);
        cols.push(blk);
    }
    let width = cols.iter().map(|c| c.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, width);
    let mut c0 = 0;
    for c in cols {
        out.columns_mut(c0, c.ncols()).copy_from(&c);
        c0 += c.ncols();
    }
    out
}

/// Virtual MIMO channel of one superframe.
#[derive(Debug, Clone)]
pub struct EquivalentChannel {
    /// `[H_1^eq … H_N^eq]`, `2n_d × n`.
    pub h_eq: ComplexMatrix,
    /// `blockdiag(I, Σ_i^{-1/2})` for each frame.
    pub whiteners: Vec<ComplexMatrix>,
    /// `[W_1 H_1^eq … W_N H_N^eq]`: the channel seen after whitening.
    pub whitened: ComplexMatrix,
    /// Column width of each frame block.
    pub block: usize,
}

impl EquivalentChannel {
    /// Apply the per-frame whitener to the matching column block of stacked output.
    pub fn whiten(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if y.nrows() != self.h_eq.nrows() || y.ncols() != self.block * self.whiteners.len() {
            return Err(Error::Dimension(format!("stacked output is {}x{}", y.nrows(), y.ncols())));
        }
        let mut out = ComplexMatrix::zeros(y.nrows(), y.ncols());
        for (i, w) in self.whiteners.iter().enumerate() {
            let c = w * y.columns(i * self.block, self.block);
            out.columns_mut(i * self.block, self.block).copy_from(&c);
        }
        Ok(out)
    }
}

fn inverse_sqrt_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::DegenerateChannel("relay noise covariance is not positive definite".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Equivalent channel and noise whitener; for zero noise,
/// `stack_received(naf_transmit(...)) = h_eq · X` exactly.
pub fn equivalent_channel(cfg: &NafConfig, ch: &ChannelRealization) -> Result<EquivalentChannel> {
    cfg.validate()?;
    if ch.f.shape() != (cfg.n_d, cfg.n_s) || ch.h.len() != cfg.relays || ch.g.len() != cfg.relays {
        return Err(Error::Dimension("channel realization does not match the configuration".into()));
    }
    let gn = cfg.gains();
    let (nd, ns, block) = (cfg.n_d, cfg.n_s, cfg.n_s + cfg.n_r);
    let mut h_eq = ComplexMatrix::zeros(2 * nd, cfg.n());
    let mut whitened = ComplexMatrix::zeros(2 * nd, cfg.n());
    let mut whiteners = Vec::with_capacity(cfg.relays);
    for i in 0..cfg.relays {
        if ch.h[i].shape() != (cfg.n_r, ns) || ch.g[i].shape() != (nd, cfg.n_r) {
            return Err(Error::Dimension(format!("relay {i} channel shapes")));
        }
        let mut hi = ComplexMatrix::zeros(2 * nd, block);
        hi.view_mut((0, 0), (nd, ns)).copy_from(&cscale(&ch.f, gn.gamma_1));
        hi.view_mut((nd, ns), (nd, ns)).copy_from(&cscale(&ch.f, gn.gamma_2));
        let relay = cscale(&(&ch.g[i] * &ch.h[i]), gn.gamma_r * gn.gamma_r_prime * gn.b);
        hi.view_mut((nd, 0), (nd, ns)).copy_from(&relay);

        // colored relay-path noise: Σ = I + γ_R² b² G Gᴴ
        let gr = gn.gamma_r * gn.b;
        let sigma = ComplexMatrix::identity(nd, nd) + &ch.g[i] * ch.g[i].adjoint() * Complex64::new(gr * gr, 0.0);
        let mut w = ComplexMatrix::identity(2 * nd, 2 * nd);
        w.view_mut((nd, nd), (nd, nd)).copy_from(&inverse_sqrt_hermitian(&sigma)?);

        whitened.columns_mut(i * block, block).copy_from(&(&w * &hi));
        h_eq.columns_mut(i * block, block).copy_from(&hi);
        whiteners.push(w);
    }
    Ok(EquivalentChannel {
        h_eq,
        whiteners,
        whitened,
        block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block_diag_random(cfg: &NafConfig, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let b = cfg.n_s + cfg.n_r;
        let mut x = ComplexMatrix::zeros(cfg.n(), cfg.n());
        for i in 0..cfg.relays {
            x.view_mut((i * b, i * b), (b, b)).copy_from(&complex_gaussian(b, b, rng));
        }
        x
    }

    #[test]
    fn dimensions_and_determinism() {
        let cfg = NafConfig::default();
        let ch = sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(ch.f.shape(), (1, 2));
        assert_eq!(ch.h[1].shape(), (2, 2));
        assert_eq!(ch.g[0].shape(), (1, 2));
        assert_eq!(ch, sample_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(4)));
        assert_eq!(cfg.n(), 8);
        assert_eq!(cfg.frame_length() % 2, 0);
        let h = quasi_static_mimo(1, 8, 4.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(h.shape(), (1, 8));
        assert_eq!(h, quasi_static_mimo(1, 8, 4.0, &mut ChaCha8Rng::seed_from_u64(1)));
    }

    #[test]
    fn entry_variance_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = NafConfig::default();
        let samples = 100_000;
        let mut acc = 0.0;
        for _ in 0..samples / 2 {
            let ch = sample_channels(&cfg, &mut rng);
            acc += ch.f.norm_squared();
        }
        let var = acc / samples as f64;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn rejects_unsupported_splits() {
        let cfg = NafConfig { n_r: 1, ..NafConfig::default() };
        assert!(cfg.validate().is_err());
        assert!(NafConfig { relays: 0, ..NafConfig::default() }.validate().is_err());
    }

    #[test]
    fn zero_noise_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n_d in [1, 2] {
            let cfg = NafConfig { n_d, snr_db: 7.0, ..NafConfig::default() };
            for _ in 0..100 {
                let ch = sample_channels(&cfg, &mut rng);
                let x = block_diag_random(&cfg, &mut rng);
                let frames = frames_from_codeword(&cfg, &x).unwrap();
                let y = stack_received(&naf_transmit_noiseless(&cfg, &ch, &frames).unwrap());
                let eq = equivalent_channel(&cfg, &ch).unwrap();
                assert!((&y - &eq.h_eq * &x).norm() < 1e-10);
                let wy = eq.whiten(&y).unwrap();
                assert!((wy - &eq.whitened * &x).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn relay_off_leaves_direct_link() {
        let cfg = NafConfig { gamma_r: Some(0.0), ..NafConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = sample_channels(&cfg, &mut rng);
        let x = block_diag_random(&cfg, &mut rng);
        let frames = frames_from_codeword(&cfg, &x).unwrap();
        let out = naf_transmit_noiseless(&cfg, &ch, &frames).unwrap();
        let g = cfg.gains();
        for ((y1, y2), (x1, x2)) in out.iter().zip(&frames) {
            assert!((y1 - cscale(&(&ch.f * x1), g.gamma_1)).norm() < 1e-12);
            assert!((y2 - cscale(&(&ch.f * x2), g.gamma_2)).norm() < 1e-12);
        }
        let eq = equivalent_channel(&cfg, &ch).unwrap();
        // the lower-left (relay) block of each H_i^eq vanishes
        for i in 0..cfg.relays {
            assert_eq!(eq.h_eq.view((1, 4 * i), (1, 2)).norm(), 0.0);
        }
    }

    #[test]
    fn relay_path_rearrangement() {
        let cfg = NafConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = sample_channels(&cfg, &mut rng);
        let x = block_diag_random(&cfg, &mut rng);
        let frames = frames_from_codeword(&cfg, &x).unwrap();
        let out = naf_transmit_noiseless(&cfg, &ch, &frames).unwrap();
        let g = cfg.gains();
        for (i, ((_, y2), (x1, x2))) in out.iter().zip(&frames).enumerate() {
            let direct = cscale(&(&ch.f * x2), g.gamma_2);
            let relay = cscale(&(&ch.g[i] * &ch.h[i] * x1), g.gamma_r * g.gamma_r_prime * g.b);
            assert!((y2 - direct - relay).norm() < 1e-12);
        }
    }

    #[test]
    fn received_energy_matches_gains() {
        let cfg = NafConfig { snr_db: 5.0, ..NafConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = block_diag_random(&cfg, &mut rng);
        let frames = frames_from_codeword(&cfg, &x).unwrap();
        let g = cfg.gains();
        let trials = 10_000;
        let mut measured = 0.0;
        for _ in 0..trials {
            let ch = sample_channels(&cfg, &mut rng);
            let out = naf_transmit_noiseless(&cfg, &ch, &frames).unwrap();
            measured += out.iter().map(|(y1, _)| y1.norm_squared()).sum::<f64>();
        }
        measured /= trials as f64;
        let expected: f64 = frames.iter().map(|(x1, _)| g.gamma_1 * g.gamma_1 * cfg.n_d as f64 * x1.norm_squared()).sum();
        assert!((measured / expected - 1.0).abs() < 0.02, "{measured} vs {expected}");
    }

    #[test]
    fn whitened_noise_is_white() {
        let cfg = NafConfig { n_d: 2, snr_db: 10.0, ..NafConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ch = sample_channels(&cfg, &mut rng);
        let eq = equivalent_channel(&cfg, &ch).unwrap();
        let zero = vec![(ComplexMatrix::zeros(2, 4), ComplexMatrix::zeros(2, 4)); cfg.relays];
        let mut cov = ComplexMatrix::zeros(4, 4);
        let mut count = 0.0;
        while count < 10_000.0 {
            let y = eq.whiten(&stack_received(&naf_transmit(&cfg, &ch, &zero, &mut rng).unwrap())).unwrap();
            for c in 0..y.ncols() {
                let col = y.column(c);
                cov += col * col.adjoint();
                count += 1.0;
            }
        }
        cov /= Complex64::new(count, 0.0);
        let dev = (cov - ComplexMatrix::identity(4, 4)).norm() / 2.0;
        assert!(dev < 0.05, "{dev}");
    }

    #[test]
    fn source_energy_scales_with_snr() {
        let lo = NafConfig { snr_db: 0.0, ..NafConfig::default() }.gains();
        let hi = NafConfig { snr_db: 10.0, ..NafConfig::default() }.gains();
        assert!((hi.gamma_1.powi(2) / lo.gamma_1.powi(2) - 10.0).abs() < 1e-9);
        assert!((hi.gamma_2.powi(2) / lo.gamma_2.powi(2) - 10.0).abs() < 1e-9);
    }
}
