//! Four-way signalised intersection simulator.
//!
//! Coordinates are metres with x east and y north, origin at the junction
//! centre; headings are degrees counter-clockwise from +x in `[-180, 180)`.
//! Traffic keeps right. Frames are sampled every `dt` (0.2 s by default).

pub mod agents;
pub mod collision;
pub mod config;
pub mod dataset;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod idm;
pub mod lights;
pub mod policy;
pub mod scenario;
pub mod sim;
pub mod world;

pub use config::{IdmParams, LightTiming, SimConfig, WorldConfig};
pub use dataset::{
    generate_dataset, generate_episode, generate_episodes, read_dataset, DatasetMeta, Episode,
};
pub use error::{Result, SimError};
pub use frame::{Frame, PedestrianState, VehicleState};
pub use geometry::{Rect, Vec2};
pub use lights::{LightColor, LightState, Lights};
pub use scenario::{ScenarioCase, ScenarioMix};
pub use sim::Simulator;
pub use world::{Approach, Intent, LaneType, WorldMap};
