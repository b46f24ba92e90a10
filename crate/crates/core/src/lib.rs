//! Dependent MMD coresets.
//!
//! A dependent coreset summarizes a family of related datasets `{X_t}` with one
//! shared set of exemplars drawn from a candidate pool `U`. Each dataset gets its
//! own probability weights over the shared exemplars, so the summaries can be
//! compared exemplar by exemplar.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches the outside
//! world is injected: wall-clock time through [`Clock`], parallelism through the
//! optional `parallel` feature.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`data`] | embedding tables, dataset collections, attribute partitioning |
//! | [`synthetic`] | Gaussian mixture fixtures |
//! | [`kernels`] | additive squared-exponential kernel, median bandwidths |
//! | [`gram`] | cached gram quantities consumed by every fit |
//! | [`mmd`] | MMD², loss and witness function |
//! | [`selection`] | `dmmd`, `dmmd-opt` and dependent `protodash` |
//! | [`analysis`] | criticisms, weight ratios, grouped weights, attribute moments |
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod clock;
pub mod data;
mod error;
pub mod gram;
pub mod kernels;
pub mod mmd;
mod par;
pub mod selection;
pub mod synthetic;

pub use clock::{Clock, NoClock};
pub use data::{Binning, DatasetCollection, EmbeddingTable};
pub use error::{Error, Result};
pub use gram::GramCache;
pub use kernels::{KernelComponent, KernelModel};
pub use mmd::WeightedSupport;
pub use selection::{Algorithm, DependentCoreset, FitConfig, StopReason};
pub use synthetic::MixtureSpec;
