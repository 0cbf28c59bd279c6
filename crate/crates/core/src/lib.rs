//! Capacity and delay analysis for bimodal fiber-wireless (FiWi) access
//! networks: a PON backhaul (TDM, wavelength-broadcasting or
//! wavelength-routed WDM) feeding a multi-radio wireless mesh front-end.
//!
//! The pipeline runs traffic matrix → routing → PON and WLAN analysis →
//! end-to-end delay, see [`evaluator::Analyzer`]. A discrete-event simulator
//! in [`sim`] serves as an independent check of the analytical model.

pub mod aggregation;
pub mod config;
pub mod dcf;
pub mod error;
pub mod evaluator;
pub mod pon;
pub mod presets;
pub mod routing;
pub mod sim;
pub mod topology;
pub mod traffic;
pub mod wireless_delay;

pub use error::{Error, Result};
pub use evaluator::{Analyzer, DelayReport};
pub use topology::{FailureSet, FiberPlant, NodeId, PonKind, Topology, TopologySpec};
