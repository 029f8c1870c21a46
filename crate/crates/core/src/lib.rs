//! Multiplexing-gain simulation for dense multi-antenna remote-radio-head
//! (RRH) systems that reuse uplink pilots aggressively.
//!
//! * [`geometry`]: wrap-around distances, bearings, disc and sector proximity
//! * [`deployment`]: random and lattice placement of sites and users
//! * [`serving`]: proximity graphs, the pilot-collision rule, gain estimates
//! * [`bounds`]: lattice-scheduling upper bounds
//! * [`pilotcode`]: constant-weight on-off codes and OR-channel decoding
//! * [`phy`]: energy-detection check of the OR abstraction
//! * [`harness`]: configured sweeps and CSV output

pub mod bounds;
pub mod deployment;
pub mod geometry;
pub mod harness;
pub mod phy;
pub mod pilotcode;
pub mod rng;
pub mod serving;
pub mod stats;

pub use rng::StreamKey;
pub use stats::Estimate;
