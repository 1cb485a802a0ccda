//! Car-following and persistence baselines.

use maip_sim::geometry::Vec2;
use maip_sim::idm::{idm_accel, NO_LEADER_GAP};
use maip_sim::world::WorldMap;
use maip_sim::{Frame, IdmParams};

use crate::error::{BaselineError, Result};
use crate::PredictionSample;

/// Lateral distance within which another vehicle counts as on the ego path.
const SAME_PATH_LATERAL: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmInput {
    pub v: f64,
    /// Inbound heading of the vehicle's lane.
    pub lane_heading: f64,
    /// Bumper-to-bumper gap to the leader, or the no-leader sentinel.
    pub gap: f64,
    pub v_lead: f64,
}

/// Leader = nearest same-lane vehicle ahead along the ego path.
pub fn idm_inputs(
    world: &WorldMap,
    frame: &Frame,
    id: u32,
    vehicle_length: f64,
) -> Result<IdmInput> {
    let ego = frame.vehicle(id).ok_or(BaselineError::UnknownVehicle(id))?;
    let lane = world
        .lane(ego.lane)
        .ok_or(BaselineError::UnknownVehicle(id))?;
    let path = world
        .path_for(ego.lane, ego.intent)
        .map_err(maip_grid::GridError::from)?;
    let s_ego = path
        .line
        .project(Vec2::new(ego.x, ego.y), 0.0, path.length())
        .map_or(0.0, |p| p.0);
    let mut best: Option<(f64, f64)> = None;
    for other in frame
        .vehicles
        .iter()
        .filter(|o| o.id != id && o.lane == ego.lane)
    {
        let Some((s, d)) = path
            .line
            .project(Vec2::new(other.x, other.y), s_ego, path.length())
        else {
            continue;
        };
        if d > SAME_PATH_LATERAL || s <= s_ego {
            continue;
        }
        let gap = s - s_ego - vehicle_length;
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, other.v));
        }
    }
    let (gap, v_lead) = best.unwrap_or((NO_LEADER_GAP, ego.v));
    Ok(IdmInput {
        v: ego.v,
        lane_heading: lane.heading(),
        gap,
        v_lead,
    })
}

/// Rolls the car-following law forward with the leader at constant speed.
pub fn idm_rollout(inp: &IdmInput, horizon: usize, dt: f64, p: &IdmParams) -> PredictionSample {
    let (mut v, mut gap) = (inp.v, inp.gap);
    let mut steps = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let a = idm_accel(v, inp.v_lead, gap, p).accel.max(-v / dt);
        let dx = v * dt + 0.5 * a * dt * dt;
        v = (v + a * dt).max(0.0);
        if gap < NO_LEADER_GAP {
            gap += inp.v_lead * dt - dx;
        }
        steps.push((v, inp.lane_heading));
    }
    PredictionSample {
        steps,
        z: Vec::new(),
    }
}

/// Repeats the last observed (v, θ).
pub fn const_vel(v: f64, theta: f64, horizon: usize) -> PredictionSample {
    PredictionSample {
        steps: vec![(v, theta); horizon],
        z: Vec::new(),
    }
}
