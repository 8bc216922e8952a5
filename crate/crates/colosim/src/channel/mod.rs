//! Sample-domain channel engine.
//!
//! The engine applies a sparse FIR filter per directed node pair: 512 delay
//! slots of which at most 4 carry a non-zero complex gain. Each emitted block
//! is the exact superposition of every transmitter's convolved contribution
//! (transmitters ascending, taps ascending) plus counter-seeded receiver
//! noise, so outputs are bit-identical across runs and block sizes.

mod engine;
mod iq;
mod types;

pub use engine::{DelayBudget, Engine};
pub use iq::{read_iq_file, IqDumpWriter};
pub use types::{
    ChannelError, CirTaps, ComplexSample, EngineConfig, NodeTuning, SampleBlock, Tap,
    MAX_ACTIVE_TAPS, MAX_DIRECTED_PAIRS, TAP_SLOTS,
};
