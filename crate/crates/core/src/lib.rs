//! Distributed iterated space-time codes for the N-relay MIMO non-orthogonal
//! amplify-and-forward channel.
//!
//! The crate builds the codes exactly over number fields ([`exactfield`],
//! [`algebra`], [`codes`]), analyses their determinant spectra and diversity,
//! measures fast-decodability of the sphere decoder's R factor ([`mldecode`]),
//! models the relay channel ([`relaychannel`]) and runs seeded Monte Carlo
//! experiments ([`simharness`]). The [`cli`] module backs the `stcode` binary.

pub mod error;
pub mod exactfield;

pub use error::{Error, Result};
pub mod algebra;
pub mod matrix;
pub mod codes;
pub mod mldecode;
pub mod relaychannel;
pub mod simharness;
pub mod cli;
