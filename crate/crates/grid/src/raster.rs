//! Scene rasterisation: static map (X1), dynamic map (X2), per-vehicle map
//! (X3) and the state vector (X4).

use maip_sim::geometry::{box_corners, Rect, Vec2};
use maip_sim::lights::LightColor;
use maip_sim::world::WorldMap;
use maip_sim::{Frame, VehicleState};

use crate::codes::{self, StaticClass};
use crate::error::{GridError, Result};
use crate::grid::{Grid, GridSpec, StaticGrid};

pub const VEHICLE_LENGTH: f64 = 4.5;
pub const VEHICLE_WIDTH: f64 = 2.0;
pub const PED_RADIUS: f64 = 0.3;
/// Length of the X4 state vector: (x, y, θ, v, a) + one-hot (R, G, Y).
pub const STATE_DIM: usize = 8;

const EPS: f64 = 1e-9;

pub fn encode_static(world: &WorldMap, grid_spec: &GridSpec) -> StaticGrid {
    let mut g = Grid::for_spec(grid_spec);
    for r in 0..grid_spec.cells {
        for c in 0..grid_spec.cells {
            let class = world
                .surface_at(grid_spec.cell_center(r, c))
                .map_or(StaticClass::Empty, StaticClass::Surface);
            g.set(r, c, class.code());
        }
    }
    for post in &world.lights {
        if let Some((r, c)) = grid_spec.cell_of(post.position) {
            g.set(r, c, codes::LIGHT);
        }
    }
    g
}

/// Decodes every cell of a static grid; `None` for unknown codes.
pub fn decode_static(grid: &StaticGrid) -> Option<Vec<StaticClass>> {
    grid.cells()
        .iter()
        .map(|&v| StaticClass::from_code(v))
        .collect()
}

pub fn rasterize_classes(rows: usize, cols: usize, classes: &[StaticClass]) -> StaticGrid {
    let mut g = Grid::zeros(rows, cols);
    for (i, class) in classes.iter().enumerate() {
        g.set(i / cols, i % cols, class.code());
    }
    g
}

fn project(points: &[Vec2], axis: Vec2) -> (f64, f64) {
    points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let d = p.dot(axis);
            (lo.min(d), hi.max(d))
        })
}

/// Separating-axis test between a convex quad and an axis-aligned cell;
/// touching edges do not count as overlap.
pub fn quad_overlaps_rect(quad: &[Vec2; 4], rect: &Rect) -> bool {
    let cell = [
        Vec2::new(rect.x0, rect.y0),
        Vec2::new(rect.x1, rect.y0),
        Vec2::new(rect.x1, rect.y1),
        Vec2::new(rect.x0, rect.y1),
    ];
    let e0 = quad[1] - quad[0];
    let e1 = quad[2] - quad[1];
    for axis in [
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
        e0.perp(),
        e1.perp(),
    ] {
        let n = axis.norm();
        if n < EPS {
            continue;
        }
        let axis = axis * (1.0 / n);
        let (a0, a1) = project(quad, axis);
        let (b0, b1) = project(&cell, axis);
        if a1.min(b1) - a0.max(b0) <= EPS {
            return false;
        }
    }
    true
}

pub fn disc_overlaps_rect(center: Vec2, radius: f64, rect: &Rect) -> bool {
    let q = Vec2::new(
        center.x.clamp(rect.x0, rect.x1),
        center.y.clamp(rect.y0, rect.y1),
    );
    q.dist(center) < radius - EPS
}

/// Cells (row, col) with positive-area overlap with a vehicle's box.
pub fn vehicle_cells(grid_spec: &GridSpec, v: &VehicleState) -> Vec<(usize, usize)> {
    let quad = box_corners(Vec2::new(v.x, v.y), v.theta, VEHICLE_LENGTH, VEHICLE_WIDTH);
    let lo = Vec2::new(
        quad.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
        quad.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
    );
    let hi = Vec2::new(
        quad.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
        quad.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
    );
    let Some(((r0, r1), (c0, c1))) = grid_spec.cell_range(lo, hi) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            if quad_overlaps_rect(&quad, &grid_spec.cell_rect(r, c)) {
                out.push((r, c));
            }
        }
    }
    out
}

pub fn ped_cells(grid_spec: &GridSpec, center: Vec2) -> Vec<(usize, usize)> {
    let d = Vec2::new(PED_RADIUS, PED_RADIUS);
    let Some(((r0, r1), (c0, c1))) = grid_spec.cell_range(center - d, center + d) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            if disc_overlaps_rect(center, PED_RADIUS, &grid_spec.cell_rect(r, c)) {
                out.push((r, c));
            }
        }
    }
    out
}

pub fn light_code(color: LightColor) -> u8 {
    match color {
        LightColor::G => codes::GREEN,
        LightColor::R => codes::RED,
        LightColor::Y => codes::YELLOW,
    }
}

/// Vehicles first, then pedestrians, then light markers.
pub fn encode_dynamic(frame: &Frame, world: &WorldMap, grid_spec: &GridSpec) -> Grid {
    let mut g = Grid::for_spec(grid_spec);
    for v in &frame.vehicles {
        for (r, c) in vehicle_cells(grid_spec, v) {
            g.set(r, c, codes::VEHICLE);
        }
    }
    for p in &frame.peds {
        for (r, c) in ped_cells(grid_spec, Vec2::new(p.x, p.y)) {
            g.set(r, c, codes::PEDESTRIAN);
        }
    }
    for post in &world.lights {
        if let Some((r, c)) = grid_spec.cell_of(post.position) {
            g.set(r, c, light_code(frame.lights.color(post.group)));
        }
    }
    g
}

/// X3: only the selected vehicle's footprint cells from `dynamic`.
pub fn extract_vehicle_map(
    dynamic: &Grid,
    frame: &Frame,
    grid_spec: &GridSpec,
    id: u32,
) -> Result<Grid> {
    let v = frame.vehicle(id).ok_or(GridError::UnknownVehicle(id))?;
    let mut g = Grid::zeros(dynamic.shape().0, dynamic.shape().1);
    for (r, c) in vehicle_cells(grid_spec, v) {
        if dynamic.get(r, c) != 0 {
            g.set(r, c, codes::VEHICLE);
        }
    }
    Ok(g)
}

/// X4: (x, y, θ, v, a) plus the one-hot (R, G, Y) of the light governing the vehicle's approach.
pub fn vehicle_state_vector(frame: &Frame, world: &WorldMap, id: u32) -> Result<[f64; STATE_DIM]> {
    let v = frame.vehicle(id).ok_or(GridError::UnknownVehicle(id))?;
    let lane = world.lane(v.lane).ok_or(GridError::UnknownVehicle(id))?;
    let color = frame.lights.color(lane.approach.group());
    let mut out = [v.x, v.y, v.theta, v.v, v.a, 0.0, 0.0, 0.0];
    let k = match color {
        LightColor::R => 5,
        LightColor::G => 6,
        LightColor::Y => 7,
    };
    out[k] = 1.0;
    Ok(out)
}
