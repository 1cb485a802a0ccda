use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{Pedestrian, Vehicle};
use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::frame::{Frame, PedestrianState, VehicleState};
use crate::geometry::Vec2;
use crate::lights::{LightColor, LightState};
use crate::policy::decide;
use crate::scenario::ScenarioCase;
use crate::world::WorldMap;

/// Distance to the stop line at which a vehicle's arrival is stamped.
const ARRIVAL_DISTANCE: f64 = 20.0;

pub struct Simulator<'w> {
    world: &'w WorldMap,
    cfg: SimConfig,
    rng: ChaCha8Rng,
    ep: u32,
    case: ScenarioCase,
    tick: u64,
    light_offset: u64,
    lights: LightState,
    vehicles: Vec<Vehicle>,
    peds: Vec<Pedestrian>,
    next_vehicle: u32,
    next_ped: u32,
    target: usize,
    spawning: bool,
}

impl<'w> Simulator<'w> {
    /// Fresh episode: random light phase, initial traffic, decisions for tick 0.
    pub fn new(
        world: &'w WorldMap,
        cfg: &SimConfig,
        ep: u32,
        seed: u64,
        case: ScenarioCase,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cycle_ticks = (cfg.lights.cycle() / cfg.dt).round() as u64;
        let light_offset = rng.random_range(0..cycle_ticks);
        let target = rng.random_range(cfg.min_vehicles..=cfg.max_vehicles);
        let mut sim = Self {
            world,
            cfg: cfg.clone(),
            rng,
            ep,
            case,
            tick: 0,
            light_offset,
            lights: LightState::at_tick(&cfg.lights, cfg.dt, light_offset, 0),
            vehicles: Vec::new(),
            peds: Vec::new(),
            next_vehicle: 0,
            next_ped: 0,
            target,
            spawning: true,
        };
        for _ in 0..target {
            sim.spawn_initial();
        }
        sim.refresh();
        Ok(sim)
    }

    /// Rebuilds a simulator from a recorded frame with spawning disabled.
    /// Path progress is recovered by projection; right-of-way flags start cleared.
    pub fn from_frame(
        world: &'w WorldMap,
        cfg: &SimConfig,
        frame: &Frame,
        light_offset: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let half = cfg.half_length();
        let mut vehicles = Vec::new();
        for vs in &frame.vehicles {
            let path = world.path_for(vs.lane, vs.intent)?;
            let (s, _) = path
                .line
                .project(Vec2::new(vs.x, vs.y), 0.0, path.length())
                .ok_or(SimError::UnknownVehicle(vs.id))?;
            vehicles.push(Vehicle {
                id: vs.id,
                path: path.id,
                lane: vs.lane,
                intent: vs.intent,
                s,
                v: vs.v,
                a: vs.a,
                permitted: false,
                crossed: s + half >= path.stop_s,
                stopped_at_line: false,
                yellow_denied: false,
                arrival: None,
            });
        }
        let next_vehicle = frame.vehicles.iter().map(|v| v.id + 1).max().unwrap_or(0);
        Ok(Self {
            world,
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(0),
            ep: frame.ep,
            case: ScenarioCase::UnprotectedLeft,
            tick: u64::from(frame.t),
            light_offset,
            lights: LightState::at_tick(&cfg.lights, cfg.dt, light_offset, u64::from(frame.t)),
            vehicles,
            peds: Vec::new(),
            next_vehicle,
            next_ped: 0,
            target: frame.vehicles.len(),
            spawning: false,
        })
    }

    /// Adds a pedestrian to a scripted scene.
    pub fn add_pedestrian(&mut self, ped: Pedestrian) {
        self.next_ped = self.next_ped.max(ped.id + 1);
        self.peds.push(ped);
    }

    /// Recomputes every vehicle's control from the current state.
    pub fn redecide(&mut self) {
        self.refresh();
    }

    pub fn world(&self) -> &WorldMap {
        self.world
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn peds(&self) -> &[Pedestrian] {
        &self.peds
    }

    pub fn lights(&self) -> LightState {
        self.lights
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn frame(&self) -> Frame {
        let vehicles = self
            .vehicles
            .iter()
            .map(|v| {
                let (p, theta) = v.pose(self.world);
                VehicleState {
                    id: v.id,
                    x: p.x,
                    y: p.y,
                    theta,
                    v: v.v,
                    a: v.a,
                    lane: v.lane,
                    intent: v.intent,
                }
            })
            .collect();
        let peds = self
            .peds
            .iter()
            .map(|p| PedestrianState {
                id: p.id,
                x: p.pos.x,
                y: p.pos.y,
            })
            .collect();
        Frame {
            ep: self.ep,
            t: self.tick as u32,
            lights: self.lights.lights,
            vehicles,
            peds,
        }
    }

    /// Advances one tick: integrate the recorded controls, move pedestrians,
    /// advance lights, despawn/spawn, then decide the next controls.
    pub fn step(&mut self) {
        let dt = self.cfg.dt;
        let half = self.cfg.half_length();
        for v in &mut self.vehicles {
            let v1 = (v.v + v.a * dt).max(0.0);
            v.s += v.v * dt + 0.5 * v.a * dt * dt;
            v.v = v1;
            if !v.crossed && v.s + half >= self.world.path(v.path).stop_s {
                v.crossed = true;
            }
        }
        for p in &mut self.peds {
            if p.crossing {
                p.pos.x += p.dir * p.speed * dt;
            }
        }
        self.tick += 1;
        self.lights = LightState::at_tick(&self.cfg.lights, dt, self.light_offset, self.tick);

        let world = self.world;
        self.vehicles
            .retain(|v| v.s < world.path(v.path).length() - half);
        let far = world.config.box_half + 0.5 * world.config.sidewalk_width;
        self.peds
            .retain(|p| !(p.crossing && p.pos.x * p.dir >= far));

        if self.spawning {
            if self.vehicles.len() < self.target && self.rng.random_bool(self.cfg.spawn_prob) {
                self.spawn_at_edge();
            }
            self.spawn_peds();
        }
        self.refresh();
    }

    pub fn run(mut self, frames: usize) -> Vec<Frame> {
        let mut out = Vec::with_capacity(frames);
        for k in 0..frames {
            if k > 0 {
                self.step();
            }
            out.push(self.frame());
        }
        out
    }

    fn refresh(&mut self) {
        let l = self.lights.lights;
        if l.ns == LightColor::R && l.ew == LightColor::G {
            for p in &mut self.peds {
                p.crossing = true;
            }
        }
        for v in &mut self.vehicles {
            let path = self.world.path(v.path);
            let to_line = path.stop_s - (v.s + self.cfg.half_length());
            if !v.crossed && v.v < 0.05 && to_line <= 1.5 {
                v.stopped_at_line = true;
            }
            if v.arrival.is_none() && to_line <= ARRIVAL_DISTANCE {
                v.arrival = Some(self.tick);
            }
        }
        let decisions = decide(self.world, &self.cfg, l, &self.vehicles, &self.peds);
        for (v, d) in self.vehicles.iter_mut().zip(decisions) {
            v.a = d.accel;
            v.permitted = d.permitted;
            v.yellow_denied = d.yellow_denied;
        }
    }

    fn pick_path(&mut self, lane_clear: impl Fn(usize) -> bool) -> Option<usize> {
        let weights: Vec<(usize, f64)> = self
            .world
            .paths
            .iter()
            .filter(|p| lane_clear(p.lane))
            .map(|p| (p.id, self.case.spawn_weight(self.world, p)))
            .collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if total <= 0.0 {
            return None;
        }
        let mut r = self.rng.random_range(0.0..total);
        for (id, w) in &weights {
            if r < *w {
                return Some(*id);
            }
            r -= w;
        }
        weights.last().map(|w| w.0)
    }

    fn new_vehicle(&mut self, path: usize, s: f64, v: f64) {
        let p = self.world.path(path);
        self.vehicles.push(Vehicle {
            id: self.next_vehicle,
            path,
            lane: p.lane,
            intent: p.intent,
            s,
            v,
            a: 0.0,
            permitted: false,
            crossed: false,
            stopped_at_line: false,
            yellow_denied: false,
            arrival: None,
        });
        self.next_vehicle += 1;
    }

    fn lane_gap(&self, lane: usize, s: f64) -> Option<(f64, f64)> {
        self.vehicles
            .iter()
            .filter(|v| v.lane == lane)
            .map(|v| (v.s - s, v.v))
            .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
    }

    fn spawn_at_edge(&mut self) {
        let s = self.cfg.half_length();
        let clearance = self.cfg.spawn_clearance;
        let blocked: Vec<usize> = (0..self.world.lanes.len())
            .filter(|&lane| {
                self.lane_gap(lane, s)
                    .is_some_and(|(d, _)| d.abs() < clearance)
            })
            .collect();
        let Some(path) = self.pick_path(|lane| !blocked.contains(&lane)) else {
            return;
        };
        let (lo, hi) = self.cfg.spawn_speed;
        let mut v = self.rng.random_range(lo..=hi);
        if let Some((d, v_lead)) = self.lane_gap(self.world.path(path).lane, s) {
            if d < self.cfg.leader_lookahead {
                v = v.min(v_lead + 2.0);
            }
        }
        self.new_vehicle(path, s, v);
    }

    fn spawn_initial(&mut self) {
        let half = self.cfg.half_length();
        let clearance = self.cfg.spawn_clearance;
        for _ in 0..20 {
            let Some(path) = self.pick_path(|_| true) else {
                return;
            };
            let stop_s = self.world.path(path).stop_s;
            let s = self.rng.random_range(half..=(stop_s - 12.0).max(half));
            let lane = self.world.path(path).lane;
            if self
                .lane_gap(lane, s)
                .is_some_and(|(d, _)| d.abs() < clearance)
            {
                continue;
            }
            let (lo, hi) = self.cfg.spawn_speed;
            let room = (stop_s - s - half - 3.0).max(0.0);
            let v = self
                .rng
                .random_range(lo..=hi)
                .min((2.0 * self.cfg.idm.b * room).sqrt());
            self.new_vehicle(path, s, v);
            return;
        }
    }

    fn spawn_peds(&mut self) {
        let boosted = self.case == ScenarioCase::PedestrianAvoidance;
        let prob = if boosted {
            self.cfg.ped_spawn_prob_boosted
        } else {
            self.cfg.ped_spawn_prob
        };
        let c = &self.world.config;
        let side_x = c.box_half + 0.5 * c.sidewalk_width;
        for cw in 0..self.world.crosswalks.len() {
            if !self.rng.random_bool(prob) {
                continue;
            }
            let dir = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let waiting = self
                .peds
                .iter()
                .filter(|p| p.crosswalk == cw && !p.crossing && p.dir == dir)
                .count();
            let rect = self.world.crosswalks[cw].rect;
            let jitter = self.rng.random_range(-0.5..=0.5) * (rect.height() - 0.8);
            let (lo, hi) = self.cfg.ped_speed;
            let speed = self.rng.random_range(lo..=hi);
            if waiting >= self.cfg.max_waiting_peds {
                continue;
            }
            self.peds.push(Pedestrian {
                id: self.next_ped,
                crosswalk: cw,
                pos: Vec2::new(-dir * side_x, rect.center().y + jitter),
                speed,
                dir,
                crossing: false,
            });
            self.next_ped += 1;
        }
    }
}
