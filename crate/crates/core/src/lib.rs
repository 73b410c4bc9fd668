//! Dynamical entropy of operational partitions of unity and classical
//! capacities of quantum dynamical systems used as communication carriers.
//!
//! Modules, bottom-up:
//! - [`opalg`]: dense complex matrices, spectra, entropies, Weyl operators
//! - [`partition`]: operational partitions of unity and their CP maps
//! - [`dynsys`]: finite unitary systems, multi-time correlation matrices,
//!   entropy traces and the purified (GNS) construction
//! - [`bernoulli`]: quantum Bernoulli shifts on a finite lattice window
//! - [`channel`]: encodings, decoders, mutual information, Holevo quantities
//!   and the three single-site coding schemes
//! - [`verify`]: seeded verification suites shared by the CLI and tests

pub mod bernoulli;
pub mod channel;
pub mod dynsys;
pub mod error;
pub mod format;
pub mod opalg;
pub mod partition;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
pub use opalg::{ComplexMatrix, DensityMatrix, Guard};
