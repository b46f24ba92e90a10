//! File formats, benchmarks and the `dmmd` command-line driver built on
//! [`dmmd_core`].
//!
//! | module | contents |
//! |--------|----------|
//! | [`manifest`] | manifest, vector and attribute files; collection round-trip |
//! | [`cachefile`] | binary gram cache |
//! | [`coreset`] | JSON coreset file |
//! | [`tables`] | delimited analysis and benchmark tables |
//! | [`bench`] | MMD² curves and size-to-threshold tables |
//! | [`synth`] | synthetic fixtures |
//! | [`cli`] | subcommands and exit codes |

pub mod bench;
pub mod cachefile;
pub mod cli;
pub mod coreset;
mod error;
pub mod manifest;
pub mod synth;
pub mod tables;

pub use error::{Error, Result};
