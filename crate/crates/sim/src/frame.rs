use serde::{Deserialize, Serialize};

use crate::lights::Lights;
use crate::world::Intent;

/// One vehicle at one tick; `a` is the control applied from this tick on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub a: f64,
    pub lane: usize,
    pub intent: Intent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianState {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub ep: u32,
    pub t: u32,
    pub lights: Lights,
    pub vehicles: Vec<VehicleState>,
    pub peds: Vec<PedestrianState>,
}

impl Frame {
    pub fn vehicle(&self, id: u32) -> Option<&VehicleState> {
        self.vehicles.iter().find(|v| v.id == id)
    }
}
