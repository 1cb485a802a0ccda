use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::world::{Intent, WorldMap};

/// Simulator-side vehicle: path progress plus right-of-way bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: u32,
    pub path: usize,
    /// Inbound lane; kept for the whole trip.
    pub lane: usize,
    pub intent: Intent,
    /// Arc length of the vehicle centre along its path.
    pub s: f64,
    pub v: f64,
    /// Control applied over the next tick.
    pub a: f64,
    /// Held stop-line permission on the last decision.
    pub permitted: bool,
    pub crossed: bool,
    pub stopped_at_line: bool,
    pub yellow_denied: bool,
    /// Tick at which the vehicle came within the arrival distance of its stop line.
    pub arrival: Option<u64>,
}

impl Vehicle {
    pub fn pose(&self, world: &WorldMap) -> (Vec2, f64) {
        world.path(self.path).pose_at(self.s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub id: u32,
    pub crosswalk: usize,
    pub pos: Vec2,
    pub speed: f64,
    /// Walking direction along x: +1 east, -1 west.
    pub dir: f64,
    pub crossing: bool,
}
