//! SVG rendering of a frame with sampled future paths.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use maip_model::PredictionSample;
use maip_sim::geometry::{box_corners, Vec2};
use maip_sim::lights::LightColor;
use maip_sim::world::{SurfaceKind, WorldMap};
use maip_sim::Frame;

use crate::error::{EvalError, Result};

const PX_PER_M: f64 = 8.0;
const VEHICLE_LENGTH: f64 = 4.5;
const VEHICLE_WIDTH: f64 = 2.0;

/// Polyline from `start` stepping `v·dt` along each sampled heading.
pub fn dead_reckon(start: Vec2, steps: &[(f64, f64)], dt: f64) -> Vec<Vec2> {
    let mut pts = Vec::with_capacity(steps.len() + 1);
    let mut p = start;
    pts.push(p);
    for &(v, th) in steps {
        p = p + Vec2::from_heading(th) * (v * dt);
        pts.push(p);
    }
    pts
}

struct Canvas {
    half: f64,
    body: String,
}

impl Canvas {
    fn px(&self, p: Vec2) -> (f64, f64) {
        ((p.x + self.half) * PX_PER_M, (self.half - p.y) * PX_PER_M)
    }

    fn polygon(&mut self, pts: &[Vec2], fill: &str, stroke: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = self.px(*p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#,
            coords.join(" ")
        );
    }

    fn circle(&mut self, c: Vec2, r: f64, fill: &str) {
        let (x, y) = self.px(c);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{fill}"/>"#,
            r * PX_PER_M
        );
    }

    fn polyline(&mut self, pts: &[Vec2], stroke: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = self.px(*p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline class="prediction" points="{}" fill="none" stroke="{stroke}" stroke-width="1.5" stroke-opacity="0.7"/>"#,
            coords.join(" ")
        );
    }
}

fn surface_fill(kind: SurfaceKind) -> &'static str {
    match kind {
        SurfaceKind::Lane(_) => "#5a5a5a",
        SurfaceKind::Junction => "#4a4a4a",
        SurfaceKind::Crosswalk => "#d8d8d8",
        SurfaceKind::Sidewalk => "#b9a98f",
        SurfaceKind::Infeasible => "#7fa36b",
    }
}

fn light_fill(c: LightColor) -> &'static str {
    match c {
        LightColor::R => "#e0301e",
        LightColor::G => "#2fb344",
        LightColor::Y => "#f2c500",
    }
}

/// Map layers, entities and each vehicle's sampled paths.
pub fn render_svg(
    world: &WorldMap,
    frame: &Frame,
    predictions: &BTreeMap<u32, Vec<PredictionSample>>,
    dt: f64,
) -> String {
    let half = world.half_extent();
    let size = 2.0 * half * PX_PER_M;
    let mut cv = Canvas {
        half,
        body: String::new(),
    };
    let _ = writeln!(cv.body, r#"<g id="map">"#);
    let _ = writeln!(
        cv.body,
        r##"<rect x="0" y="0" width="{size}" height="{size}" fill="#7fa36b"/>"##
    );
    // drawn back to front so earlier (higher priority) surfaces end on top
    for s in world.surfaces.iter().rev() {
        let r = s.rect;
        let pts = [
            Vec2::new(r.x0, r.y0),
            Vec2::new(r.x1, r.y0),
            Vec2::new(r.x1, r.y1),
            Vec2::new(r.x0, r.y1),
        ];
        cv.polygon(&pts, surface_fill(s.kind), "none");
    }
    for post in &world.lights {
        cv.circle(
            post.position,
            0.8,
            light_fill(frame.lights.color(post.group)),
        );
    }
    let _ = writeln!(cv.body, "</g>");
    let _ = writeln!(cv.body, r#"<g id="entities">"#);
    for v in &frame.vehicles {
        let corners = box_corners(Vec2::new(v.x, v.y), v.theta, VEHICLE_LENGTH, VEHICLE_WIDTH);
        cv.polygon(&corners, "#f5f5f5", "#202020");
    }
    for p in &frame.peds {
        cv.circle(Vec2::new(p.x, p.y), 0.3, "#f2c500");
    }
    let _ = writeln!(cv.body, "</g>");
    let _ = writeln!(cv.body, r#"<g id="predictions">"#);
    for (id, samples) in predictions {
        let Some(v) = frame.vehicle(*id) else {
            continue;
        };
        for s in samples {
            let pts = dead_reckon(Vec2::new(v.x, v.y), &s.steps, dt);
            cv.polyline(&pts, "#d0021b");
        }
    }
    let _ = writeln!(cv.body, "</g>");
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n{}</svg>\n",
        cv.body
    )
}

pub fn render_to_file(
    path: &Path,
    world: &WorldMap,
    frame: &Frame,
    predictions: &BTreeMap<u32, Vec<PredictionSample>>,
    dt: f64,
) -> Result<()> {
    std::fs::write(path, render_svg(world, frame, predictions, dt)).map_err(|source| {
        EvalError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}
