//! Elementary cellular automata, run either as exact truth tables or
//! through a model of a time-multiplexed photonic loop: delay-line
//! interference with signed weights, square-law detection and an intensity
//! threshold.
//!
//! The crate also compiles rules into weight/threshold settings, emulates
//! the pulse-train loop event by event, and carries the analyses used to
//! characterize the dynamics (box counting, damage spreading, middle-column
//! randomness, Rule 54 ether filtering and glider tracking).

pub mod analysis;
pub mod compiler;
pub mod diagram;
pub mod eca;
pub mod emulator;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generation;
pub mod io;
pub mod photonic;
pub mod rule;

pub use compiler::{compile_rule, feasibility_census, neighborhood_intensities, verify_config, Census, CompilationResult};
pub use diagram::SpaceTimeDiagram;
pub use eca::{evolve, step, step_packed};
pub use error::{Error, Result};
pub use generation::{single_seed, Boundary, Generation};
pub use photonic::{
    detect_threshold, extinction_ratio, interfere, photonic_evolve, photonic_step, NoiseSpec, PhotonicConfig, Weights,
};
pub use rule::{rule_from_number, RuleTable};
