//! Co-design of supercapacitor sizing and fuzzy energy management for a
//! battery/supercapacitor hybrid energy storage system.
//!
//! The crate is split along the simulation pipeline:
//!
//! * [`fis`]: batched Mamdani controllers and their membership-function genome,
//! * [`powertrain`]: battery, capacity-loss and supercapacitor plant models,
//! * [`cycle`]: drive cycles and demand power,
//! * [`sim`]: closed-loop lap simulation and the objective pair,
//! * [`moo`]: controlled-elitist NSGA-II over sizing plus genome,
//! * [`config`]: the toolkit configuration file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod cycle;
pub mod exec;
pub mod fis;
pub mod moo;
pub mod powertrain;
pub mod sim;

pub use exec::Exec;
