//! Performance and energy exploration of single-ISA heterogeneous multicore
//! configurations.
//!
//! A [`WorkloadProfile`] (serial / parallel / barrier phases with instruction
//! mixes) is simulated on a [`SystemConfig`] built from [`CoreTypeSpec`]s.
//! The [`explorer`] sweeps every core-count composition and ranks the
//! results by delay, energy-to-solution and energy-delay product.

pub mod cli;
pub mod core_model;
pub mod data;
pub mod engine;
pub mod error;
pub mod explorer;
pub mod metrics;
pub mod workload;

pub use core_model::{ClassTable, CoreRegistry, CoreTypeSpec, InstructionClass};
pub use engine::{simulate, simulate_with, SimOptions, SimResult, Slot, SystemConfig};
pub use error::{ConfigError, Error, SimError};
pub use explorer::{enumerate_configs, run_dse, DseQuery, DseReport, Preset};
pub use metrics::{pareto_front, ParetoSet, TradePoint};
pub use workload::{load_profile, serial_fraction, InstructionMix, Phase, WorkloadProfile};

/// Version tag carried by every input and output document.
pub const SCHEMA_VERSION: u32 = 1;
