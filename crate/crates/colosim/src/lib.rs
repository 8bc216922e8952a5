//! # colosim
//!
//! A desk-scale software re-creation of a hardware-in-the-loop wireless
//! network emulator. Every directed node pair is a sparse FIR filter (512
//! delay slots, at most 4 active taps); the engine convolves all transmit
//! streams with their per-pair taps and delivers the interference-accurate
//! sum, plus receiver noise, to every node.
//!
//! Around the sample-domain core sit the pieces needed to run repeatable
//! experiments end to end:
//!
//! - [`channel`] — the deterministic block engine itself;
//! - [`scenario`] — data model, interchange formats and the scenario catalogue;
//! - [`compiler`] — geometry + propagation models to tap timelines, with
//!   built-in scenario family generators;
//! - [`traffic`] — flow scheduling, delivery logging and flow metrics;
//! - [`radio`] — virtual nodes: PN probes, SNR/SINR estimators and a minimal
//!   BPSK packet modem;
//! - [`orchestrator`] — reservations, token accounting, the batch queue,
//!   experiment lifecycle and log archiving;
//! - [`netapps`] — an example relay-selection experiment (SINR matrix +
//!   maximum weighted matching vs. random allocation).
//!
//! Determinism is a design requirement throughout: all randomness is derived
//! from counter-based keyed generators (see [`rng`]), so identical seeds and
//! inputs reproduce experiments bit for bit, independent of block size.

pub mod channel;
pub mod compiler;
pub mod netapps;
pub mod orchestrator;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod traffic;

/// Propagation speed used for all delay/distance conversions, in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 2.998e8;
