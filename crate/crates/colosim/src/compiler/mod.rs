//! Scenario compiler: geometry + propagation models to tap timelines.
//!
//! Distances become delay slots, pathloss and fading become complex gains,
//! and the result is an ordinary [`RfScenario`](crate::scenario::RfScenario)
//! the engine can play back. Three scenario family generators ship with the
//! compiler: a ten-node qualification schedule, a five-squad urban mobility
//! scenario, and a configurable cellular deployment.

mod compile;
mod generators;
mod geometry;
mod models;

pub use compile::{compile, CompileRequest};
pub use generators::{gen_alleys, gen_cellular, gen_sce_qualification, DistanceClass, SpeedClass};
pub use geometry::{
    parse_geometry, serialize_geometry, Geometry, NodeTrajectory, TerrainBounds, Waypoint,
};
pub use models::{
    delay_to_tap, fading_taps, pathloss_gain, snr_to_gain, ChannelModelParams, CompilerError,
    FadingModel, MultipathTap, PathlossModel, PropagationTap,
};
