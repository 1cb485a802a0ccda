//! Planar geometry: points, axis-aligned rectangles, line/arc paths.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector for a heading in degrees (counter-clockwise from +x).
    pub fn from_heading(deg: f64) -> Self {
        let r = deg.to_radians();
        Self::new(r.cos(), r.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Rotates counter-clockwise about the origin by a multiple of 90 degrees.
    pub fn rot90(self, quarter_turns: u8) -> Self {
        match quarter_turns % 4 {
            0 => self,
            1 => Self::new(-self.y, self.x),
            2 => Self::new(-self.x, -self.y),
            _ => Self::new(self.y, -self.x),
        }
    }

    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Wraps an angle in degrees into [-180, 180).
pub fn wrap_deg(d: f64) -> f64 {
    let w = (d + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(xa: f64, ya: f64, xb: f64, yb: f64) -> Self {
        Self {
            x0: xa.min(xb),
            y0: ya.min(yb),
            x1: xa.max(xb),
            y1: ya.max(yb),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn rot90(&self, quarter_turns: u8) -> Self {
        let a = Vec2::new(self.x0, self.y0).rot90(quarter_turns);
        let b = Vec2::new(self.x1, self.y1).rot90(quarter_turns);
        Rect::new(a.x, a.y, b.x, b.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line {
        from: Vec2,
        to: Vec2,
    },
    /// Circular arc; `start` and `sweep` in radians, positive sweep is counter-clockwise.
    Arc {
        center: Vec2,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => from.dist(to),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point and heading (degrees) at arc length `u` from the segment start.
    pub fn pose_at(&self, u: f64) -> (Vec2, f64) {
        match *self {
            Segment::Line { from, to } => {
                let len = from.dist(to);
                let dir = (to - from) * (1.0 / len);
                (from + dir * u, dir.y.atan2(dir.x).to_degrees())
            }
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let phi = start + sweep.signum() * u / radius;
                let p = center + Vec2::new(phi.cos(), phi.sin()) * radius;
                let heading = phi + sweep.signum() * PI / 2.0;
                (p, heading.to_degrees())
            }
        }
    }

    pub fn rot90(&self, q: u8) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line {
                from: from.rot90(q),
                to: to.rot90(q),
            },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center: center.rot90(q),
                radius,
                start: start + f64::from(q % 4) * PI / 2.0,
                sweep,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub s: f64,
    pub p: Vec2,
    pub heading: f64,
}

/// Spacing of the precomputed samples used for projection.
pub const SAMPLE_STEP: f64 = 0.25;

/// A chain of segments parameterised by arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    segments: Vec<Segment>,
    offsets: Vec<f64>,
    length: f64,
    samples: Vec<PathSample>,
}

impl Polyline {
    pub fn new(segments: Vec<Segment>) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut length = 0.0;
        for seg in &segments {
            offsets.push(length);
            length += seg.length();
        }
        let mut line = Self {
            segments,
            offsets,
            length,
            samples: Vec::new(),
        };
        let n = (length / SAMPLE_STEP).ceil() as usize;
        line.samples = (0..=n)
            .map(|i| {
                let s = (i as f64 * SAMPLE_STEP).min(length);
                let (p, heading) = line.pose_at(s);
                PathSample { s, p, heading }
            })
            .collect();
        line
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Arc-length offset at which segment `i` starts.
    pub fn segment_start(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    /// Point and heading in degrees (wrapped) at arc length `s`, clamped to the path.
    pub fn pose_at(&self, s: f64) -> (Vec2, f64) {
        let s = s.clamp(0.0, self.length);
        let mut idx = 0;
        for (i, off) in self.offsets.iter().enumerate() {
            if s >= *off {
                idx = i;
            }
        }
        let (p, h) = self.segments[idx].pose_at(s - self.offsets[idx]);
        (p, wrap_deg(h))
    }

    /// Nearest sample within arc-length window `[s_min, s_max]`: `(s, distance)`.
    pub fn project(&self, p: Vec2, s_min: f64, s_max: f64) -> Option<(f64, f64)> {
        let lo = ((s_min / SAMPLE_STEP).floor().max(0.0)) as usize;
        let hi = ((s_max / SAMPLE_STEP).ceil().max(0.0) as usize)
            .min(self.samples.len().saturating_sub(1));
        let mut best: Option<(f64, f64)> = None;
        for smp in self.samples.get(lo..=hi)? {
            let d = smp.p.dist(p);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((smp.s, d));
            }
        }
        let (s0, _) = best?;
        // refine on the local tangent
        let (q, h) = self.pose_at(s0);
        let t = Vec2::from_heading(h);
        let s = (s0 + (p - q).dot(t))
            .clamp(s0 - SAMPLE_STEP, s0 + SAMPLE_STEP)
            .clamp(0.0, self.length);
        let (q2, _) = self.pose_at(s);
        Some((s, q2.dist(p)))
    }
}

/// Corners of an oriented box centred at `c` with heading `theta_deg`, counter-clockwise.
pub fn box_corners(c: Vec2, theta_deg: f64, length: f64, width: f64) -> [Vec2; 4] {
    let f = Vec2::from_heading(theta_deg);
    let l = f.perp();
    let hf = f * (0.5 * length);
    let hl = l * (0.5 * width);
    [c + hf + hl, c - hf + hl, c - hf - hl, c + hf - hl]
}
