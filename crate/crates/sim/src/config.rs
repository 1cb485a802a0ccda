use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Road geometry. All lengths in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    /// Half of the square world side; the world spans `[-half, half]²`.
    pub half_extent: f64,
    pub lane_width: f64,
    /// Half side of the junction box.
    pub box_half: f64,
    pub sidewalk_width: f64,
    pub crosswalk_width: f64,
    /// Distance from the centre to the crosswalk centre line on the N/S arms.
    pub crosswalk_offset: f64,
    /// Distance from the centre to each stop line.
    pub stop_distance: f64,
    pub right_turn_radius: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            half_extent: 50.0,
            lane_width: 3.5,
            box_half: 7.0,
            sidewalk_width: 3.0,
            crosswalk_width: 3.0,
            crosswalk_offset: 10.0,
            stop_distance: 12.5,
            right_turn_radius: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdmParams {
    pub v0: f64,
    pub time_headway: f64,
    pub s0: f64,
    pub a_max: f64,
    pub b: f64,
    pub delta: f64,
    /// Emergency braking bound; accelerations are clamped to `[-b_hard, a_max]`.
    pub b_hard: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            v0: 12.0,
            time_headway: 1.5,
            s0: 2.0,
            a_max: 1.5,
            b: 2.0,
            delta: 4.0,
            b_hard: 8.0,
        }
    }
}

/// Per-group signal timing in seconds. The east-west group runs the same
/// cycle shifted by `green + yellow`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LightTiming {
    pub green: f64,
    pub yellow: f64,
    pub red: f64,
}

impl Default for LightTiming {
    fn default() -> Self {
        Self {
            green: 15.0,
            yellow: 3.0,
            red: 18.0,
        }
    }
}

impl LightTiming {
    pub fn cycle(&self) -> f64 {
        self.green + self.yellow + self.red
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    pub episode_seconds: f64,
    pub world: WorldConfig,
    pub idm: IdmParams,
    pub lights: LightTiming,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    pub min_vehicles: usize,
    pub max_vehicles: usize,
    /// Probability per tick of attempting a spawn while below the target count.
    pub spawn_prob: f64,
    pub spawn_speed: (f64, f64),
    pub spawn_clearance: f64,
    pub ped_speed: (f64, f64),
    pub ped_spawn_prob: f64,
    pub ped_spawn_prob_boosted: f64,
    pub max_waiting_peds: usize,
    /// Deceleration used for the yellow-light stop/go decision.
    pub yellow_decel: f64,
    /// Time window within which oncoming straight traffic blocks a left turn.
    pub left_window: f64,
    /// Minimum time headway for a right-turn merge.
    pub merge_headway: f64,
    /// Vehicles closer than this (in time) to their stop line take part in right-of-way ordering.
    pub imminent_horizon: f64,
    pub turn_speed_left: f64,
    pub turn_speed_right: f64,
    pub turn_decel: f64,
    /// Front bumper stops this far before a stop line.
    pub stop_margin: f64,
    /// Lateral distance below which a vehicle on the path counts as a leader.
    pub leader_lateral: f64,
    pub leader_lookahead: f64,
    /// Extra reach added to the braking distance when checking pedestrians.
    pub ped_envelope_margin: f64,
    /// A pedestrian stops blocking once this far past the path crossing point.
    pub ped_clear_margin: f64,
    /// Paths closer than this inside the junction region conflict.
    pub conflict_radius: f64,
    pub conflict_region_half: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.2,
            episode_seconds: 60.0,
            world: WorldConfig::default(),
            idm: IdmParams::default(),
            lights: LightTiming::default(),
            vehicle_length: 4.5,
            vehicle_width: 2.0,
            min_vehicles: 4,
            max_vehicles: 6,
            spawn_prob: 0.25,
            spawn_speed: (6.0, 10.0),
            spawn_clearance: 15.0,
            ped_speed: (0.8, 1.8),
            ped_spawn_prob: 0.02,
            ped_spawn_prob_boosted: 0.08,
            max_waiting_peds: 3,
            yellow_decel: 3.0,
            left_window: 8.0,
            merge_headway: 3.0,
            imminent_horizon: 5.0,
            turn_speed_left: 6.0,
            turn_speed_right: 5.0,
            turn_decel: 1.5,
            stop_margin: 0.5,
            leader_lateral: 2.5,
            leader_lookahead: 60.0,
            ped_envelope_margin: 10.0,
            ped_clear_margin: 3.5,
            conflict_radius: 3.0,
            conflict_region_half: 14.5,
        }
    }
}

impl SimConfig {
    pub fn frames_per_episode(&self) -> usize {
        (self.episode_seconds / self.dt).round() as usize
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.vehicle_length
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.episode_seconds < self.dt {
            return bad("episode shorter than one tick");
        }
        if self.min_vehicles == 0 || self.min_vehicles > self.max_vehicles {
            return bad("vehicle count range must satisfy 1 <= min <= max");
        }
        if self.spawn_speed.0 > self.spawn_speed.1 || self.spawn_speed.0 < 0.0 {
            return bad("spawn speed range");
        }
        if self.ped_speed.0 <= 0.0 || self.ped_speed.0 > self.ped_speed.1 {
            return bad("pedestrian speed range");
        }
        let l = &self.lights;
        if l.green <= 0.0 || l.yellow < 0.0 || (l.red - (l.green + l.yellow)).abs() > 1e-9 {
            return bad("light timing must satisfy red = green + yellow");
        }
        let ticks = l.cycle() / self.dt;
        if (ticks - ticks.round()).abs() > 1e-9 {
            return bad("light cycle must be a whole number of ticks");
        }
        let p = &self.idm;
        if p.v0 <= 0.0 || p.a_max <= 0.0 || p.b <= 0.0 || p.b_hard < p.b {
            return bad("IDM parameters");
        }
        Ok(())
    }
}
