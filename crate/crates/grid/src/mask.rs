//! Attention mask over the dynamic map.
//!
//! A cell is kept when its centre lies in one of three regions built from the
//! ego vehicle's path, position along it and the current lights:
//! the corridor around the path ahead, the crosswalks the path has yet to
//! clear, and the inbound strips of lanes whose paths conflict with the ego
//! path and currently hold a green or yellow light.

use maip_sim::geometry::Vec2;
use maip_sim::lights::LightColor;
use maip_sim::world::{Path, WorldMap};
use maip_sim::Frame;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::grid::{Grid, GridSpec, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    /// Half-width of the corridor around the path, metres.
    pub lateral: f64,
    /// Corridor length ahead of the vehicle along its path.
    pub ahead: f64,
    /// Corridor length kept behind the vehicle (covers its own footprint).
    pub behind: f64,
    /// Arc-length spacing of corridor probes.
    pub step: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            lateral: 10.0,
            ahead: 40.0,
            behind: 5.0,
            step: 0.5,
        }
    }
}

/// Which rule admitted a cell; used by tests and renderers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskRule {
    Corridor,
    Crosswalk,
    ConflictLane,
}

fn mark_disc(m: &mut Grid, grid_spec: &GridSpec, c: Vec2, r: f64) {
    let d = Vec2::new(r, r);
    let Some(((r0, r1), (c0, c1))) = grid_spec.cell_range(c - d, c + d) else {
        return;
    };
    for row in r0..=r1 {
        for col in c0..=c1 {
            if grid_spec.cell_center(row, col).dist(c) <= r {
                m.set(row, col, 1);
            }
        }
    }
}

fn mark_where(m: &mut Grid, grid_spec: &GridSpec, pred: impl Fn(Vec2) -> bool) {
    for row in 0..grid_spec.cells {
        for col in 0..grid_spec.cells {
            if pred(grid_spec.cell_center(row, col)) {
                m.set(row, col, 1);
            }
        }
    }
}

/// Arc length of `p` along `path`.
pub fn path_position(path: &Path, p: Vec2) -> f64 {
    path.line
        .project(p, 0.0, path.length())
        .map_or(0.0, |(s, _)| s)
}

fn segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab).max(1e-12)).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Mask for a single rule; the full mask is the union of all three.
pub fn rule_mask(
    frame: &Frame,
    world: &WorldMap,
    grid_spec: &GridSpec,
    id: u32,
    cfg: &MaskConfig,
    rule: MaskRule,
) -> Result<Mask> {
    let v = frame.vehicle(id).ok_or(GridError::UnknownVehicle(id))?;
    let path = world.path_for(v.lane, v.intent)?;
    let s = path_position(path, Vec2::new(v.x, v.y));
    let mut m = Grid::for_spec(grid_spec);
    match rule {
        MaskRule::Corridor => {
            let lo = (s - cfg.behind).max(0.0);
            let hi = (s + cfg.ahead).min(path.length());
            let n = ((hi - lo) / cfg.step).ceil().max(0.0) as usize;
            for i in 0..=n {
                let (p, _) = path.pose_at((lo + i as f64 * cfg.step).min(hi));
                mark_disc(&mut m, grid_spec, p, cfg.lateral);
            }
        }
        MaskRule::Crosswalk => {
            for span in path.crosswalks.iter().filter(|c| c.s_out >= s) {
                let rect = world.crosswalks[span.crosswalk].rect;
                mark_where(&mut m, grid_spec, |p| rect.contains(p));
            }
        }
        MaskRule::ConflictLane => {
            let half_w = 0.5 * world.config.lane_width;
            for lane in &world.lanes {
                if lane.id == v.lane || frame.lights.color(lane.approach.group()) == LightColor::R {
                    continue;
                }
                if !world
                    .paths_of_lane(lane.id)
                    .any(|o| world.conflict(path.id, o.id).is_some())
                {
                    continue;
                }
                let [a, b] = lane.centerline;
                mark_where(&mut m, grid_spec, |p| segment_dist(p, a, b) <= half_w);
            }
        }
    }
    Ok(m)
}

pub fn build_mask(
    frame: &Frame,
    world: &WorldMap,
    grid_spec: &GridSpec,
    id: u32,
    cfg: &MaskConfig,
) -> Result<Mask> {
    let mut m = Grid::for_spec(grid_spec);
    for rule in [
        MaskRule::Corridor,
        MaskRule::Crosswalk,
        MaskRule::ConflictLane,
    ] {
        m.union_with(&rule_mask(frame, world, grid_spec, id, cfg, rule)?)?;
    }
    Ok(m)
}
