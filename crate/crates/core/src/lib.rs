//! Population-protocol simulation of tree network formation and
//! peer-to-peer energy redistribution among wireless devices.
//!
//! Devices interact in pairs chosen by a fair random scheduler. Local rules
//! first connect them into a rooted tree (arbitrary or k-ary), let every
//! node learn its depth and the tree height, and then move energy between
//! interacting nodes so that parents end up holding about twice the energy
//! of each child.
//!
//! ```
//! use tree_energy::config::{EnergyProtocolConfig, ExperimentConfig};
//! use tree_energy::sim::run_single;
//!
//! let cfg = ExperimentConfig {
//!     n: 10,
//!     energy_protocol: EnergyProtocolConfig::IdealTarget,
//!     ..ExperimentConfig::default()
//! };
//! let out = run_single(&cfg, 0).unwrap();
//! assert!(out.row.converged);
//! assert!(out.row.ed_percent < 1e-6);
//! ```

pub mod cli;
pub mod config;
pub mod energy;
pub mod equilibrium;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod formation;
pub mod metrics;
pub mod population;
pub mod scheduler;
pub mod sim;
pub mod snapshot;

pub use error::{Error, Result};
