use serde::{Deserialize, Serialize};

use crate::config::LightTiming;
use crate::world::LightGroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LightColor {
    R,
    G,
    Y,
}

/// Colours of the two signal groups, as written to frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lights {
    pub ns: LightColor,
    pub ew: LightColor,
}

impl Lights {
    pub fn color(&self, group: LightGroup) -> LightColor {
        match group {
            LightGroup::NorthSouth => self.ns,
            LightGroup::EastWest => self.ew,
        }
    }
}

/// Signal state with its phase timer (seconds into the north-south cycle).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightState {
    pub lights: Lights,
    pub timer: f64,
}

fn color_at(t: f64, timing: &LightTiming) -> LightColor {
    if t < timing.green {
        LightColor::G
    } else if t < timing.green + timing.yellow {
        LightColor::Y
    } else {
        LightColor::R
    }
}

impl LightState {
    /// State after `tick` steps of `dt` from a cycle offset of `offset_ticks`.
    /// Works in whole ticks so long runs do not drift.
    pub fn at_tick(timing: &LightTiming, dt: f64, offset_ticks: u64, tick: u64) -> Self {
        let cycle = (timing.cycle() / dt).round() as u64;
        let k = (offset_ticks + tick) % cycle;
        let t = k as f64 * dt;
        let shift = timing.green + timing.yellow;
        let t_ew = (t - shift).rem_euclid(timing.cycle());
        Self {
            lights: Lights {
                ns: color_at(t, timing),
                ew: color_at(t_ew, timing),
            },
            timer: t,
        }
    }
}
