//! Rule-based driver: IDM car following with stop-line permission,
//! right-of-way ordering, left-turn yielding, merge gap acceptance and
//! pedestrian priority.

use crate::agents::{Pedestrian, Vehicle};
use crate::config::SimConfig;
use crate::idm::{idm_accel, NO_LEADER_GAP};
use crate::lights::{LightColor, Lights};
use crate::world::{Intent, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accel: f64,
    pub permitted: bool,
    pub yellow_denied: bool,
}

struct Ctx<'a> {
    world: &'a WorldMap,
    cfg: &'a SimConfig,
    lights: Lights,
    vehicles: &'a [Vehicle],
}

impl Ctx<'_> {
    fn front(&self, v: &Vehicle) -> f64 {
        v.s + self.cfg.half_length()
    }

    fn to_line(&self, v: &Vehicle) -> f64 {
        self.world.path(v.path).stop_s - self.front(v)
    }

    fn color(&self, v: &Vehicle) -> LightColor {
        let approach = self.world.lanes[v.lane].approach;
        self.lights.color(approach.group())
    }

    fn light_ok(&self, v: &Vehicle) -> bool {
        match self.color(v) {
            LightColor::G => true,
            LightColor::Y => {
                let d = self.to_line(v);
                !v.yellow_denied && d < v.v * v.v / (2.0 * self.cfg.yellow_decel)
            }
            LightColor::R => v.intent == Intent::R && v.stopped_at_line,
        }
    }

    fn committed(&self, v: &Vehicle) -> bool {
        let b = self.cfg.idm.b;
        v.permitted && !v.crossed && self.to_line(v) < v.v * v.v / (2.0 * b) + 1.0
    }

    fn cleared(&self, v: &Vehicle, span: (f64, f64)) -> bool {
        v.s - self.cfg.half_length() > span.1
    }

    fn time_to(&self, v: &Vehicle, s_front: f64) -> f64 {
        (s_front - self.front(v)).max(0.0) / v.v.max(1.0)
    }

    fn priority(&self, v: &Vehicle) -> (u8, u64, u32) {
        let rank = match v.intent {
            Intent::F => 0,
            Intent::L => 1,
            Intent::R if self.color(v) == LightColor::R => 3,
            Intent::R => 2,
        };
        (rank, v.arrival.unwrap_or(u64::MAX), v.id)
    }

    fn imminent(&self, v: &Vehicle) -> bool {
        !v.crossed
            && self.light_ok(v)
            && self.time_to(v, self.world.path(v.path).stop_s) <= self.cfg.imminent_horizon
    }

    fn permission(&self, i: usize) -> bool {
        let u = &self.vehicles[i];
        if u.crossed || self.committed(u) {
            return true;
        }
        if !self.light_ok(u) {
            return false;
        }
        let u_approach = self.world.lanes[u.lane].approach;
        let right_on_red = u.intent == Intent::R && self.color(u) == LightColor::R;
        for (j, w) in self.vehicles.iter().enumerate() {
            if j == i {
                continue;
            }
            let Some(zone) = self.world.conflict(u.path, w.path) else {
                continue;
            };
            if self.cleared(w, zone.other_span) {
                continue;
            }
            if w.crossed || self.committed(w) {
                return false;
            }
            let w_approach = self.world.lanes[w.lane].approach;
            if u.intent == Intent::L
                && w.intent == Intent::F
                && w_approach == u_approach.opposite()
                && self.time_to(w, zone.other_span.0) <= self.cfg.left_window
            {
                return false;
            }
            if right_on_red && self.light_ok(w) {
                let d_u = (zone.span.0 - self.front(u)).max(0.0);
                let t_u = (2.0 * d_u / self.cfg.idm.a_max).sqrt();
                if self.time_to(w, zone.other_span.0) - t_u < self.cfg.merge_headway {
                    return false;
                }
            }
            if self.imminent(w) && self.priority(w) < self.priority(u) {
                return false;
            }
        }
        true
    }

    fn accel(&self, i: usize, permitted: bool, peds: &[Pedestrian]) -> f64 {
        let cfg = self.cfg;
        let u = &self.vehicles[i];
        let path = self.world.path(u.path);
        let half = cfg.half_length();
        let front = self.front(u);
        let mut p = cfg.idm;

        let mut a = f64::INFINITY;
        if let Some((t0, t1)) = path.turn {
            let vt = if u.intent == Intent::L {
                cfg.turn_speed_left
            } else {
                cfg.turn_speed_right
            };
            if front < t0 {
                if u.v > vt {
                    a = a.min((vt * vt - u.v * u.v) / (2.0 * (t0 - front).max(0.5)));
                }
            } else if u.s <= t1 {
                p.v0 = vt;
            }
        }
        a = a.min(idm_accel(u.v, u.v, NO_LEADER_GAP, &p).accel);

        if let Some((gap, v_lead)) = self.leader(i) {
            a = a.min(idm_accel(u.v, v_lead, gap, &p).accel);
        }

        if !permitted {
            let gap = path.stop_s - cfg.stop_margin - front + p.s0;
            a = a.min(idm_accel(u.v, 0.0, gap, &p).accel);
        }

        for span in &path.crosswalks {
            if u.s - half > span.s_out {
                continue;
            }
            let blocked = peds.iter().any(|ped| {
                ped.crosswalk == span.crosswalk
                    && ped_blocks(ped, span.cross_point.x, cfg.ped_clear_margin)
            });
            if !blocked {
                continue;
            }
            let d = span.s_in - front;
            if d < 0.0 {
                continue;
            }
            let gap = d - cfg.stop_margin + p.s0;
            a = a.min(idm_accel(u.v, 0.0, gap, &p).accel);
            if d <= u.v * u.v / (2.0 * p.b) + cfg.ped_envelope_margin {
                a = a.min(0.0);
            }
        }

        let a = a.clamp(-p.b_hard, p.a_max);
        a.max(-u.v / cfg.dt)
    }

    /// Nearest vehicle whose body lies on this vehicle's path ahead: `(gap, speed along path)`.
    fn leader(&self, i: usize) -> Option<(f64, f64)> {
        let cfg = self.cfg;
        let u = &self.vehicles[i];
        let path = self.world.path(u.path);
        let half = cfg.half_length();
        let half_w = 0.5 * cfg.vehicle_width;
        let mut best: Option<(f64, f64)> = None;
        for (j, w) in self.vehicles.iter().enumerate() {
            if j == i {
                continue;
            }
            let (pos, theta) = w.pose(self.world);
            let Some((sp, lat)) = path.line.project(pos, u.s, u.s + cfg.leader_lookahead) else {
                continue;
            };
            let (_, h) = path.pose_at(sp);
            let delta = (theta - h).to_radians();
            let (sin, cos) = (delta.sin().abs(), delta.cos().abs());
            if lat >= half_w + half * sin + half_w * cos + 0.3 {
                continue;
            }
            let extent = half * cos + half_w * sin;
            let gap = sp - u.s - half - extent;
            let v_lead = (w.v * delta.cos()).max(0.0);
            if best.is_none_or(|(g, _)| gap < g) {
                best = Some((gap, v_lead));
            }
        }
        best
    }
}

/// Decisions for every vehicle, computed from one snapshot so that the result
/// does not depend on vehicle order.
pub fn decide(
    world: &WorldMap,
    cfg: &SimConfig,
    lights: Lights,
    vehicles: &[Vehicle],
    peds: &[Pedestrian],
) -> Vec<Decision> {
    let ctx = Ctx {
        world,
        cfg,
        lights,
        vehicles,
    };
    (0..vehicles.len())
        .map(|i| {
            let u = &vehicles[i];
            let permitted = ctx.permission(i);
            let yellow_denied = match ctx.color(u) {
                LightColor::G => false,
                LightColor::Y => u.yellow_denied || (!u.crossed && !ctx.light_ok(u)),
                LightColor::R => u.yellow_denied,
            };
            Decision {
                accel: ctx.accel(i, permitted, peds),
                permitted,
                yellow_denied,
            }
        })
        .collect()
}

/// Whether a crossing pedestrian blocks the crosswalk span at `cross_x`.
pub fn ped_blocks(ped: &Pedestrian, cross_x: f64, clear_margin: f64) -> bool {
    ped.crossing && (ped.pos.x - cross_x) * ped.dir <= clear_margin
}
