//! Static intersection layout: lanes, turn paths, crosswalks, surfaces and
//! the pairwise path conflict table.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{SimConfig, WorldConfig};
use crate::error::{Result, SimError};
use crate::geometry::{Polyline, Rect, Segment, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Intent {
    F,
    L,
    R,
}

impl Intent {
    pub const ALL: [Intent; 3] = [Intent::F, Intent::L, Intent::R];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LaneType {
    L1,
    L2,
    L3,
}

impl LaneType {
    pub fn allowed(self) -> &'static [Intent] {
        match self {
            LaneType::L1 => &[Intent::F],
            LaneType::L2 => &[Intent::F, Intent::L],
            LaneType::L3 => &[Intent::F, Intent::R],
        }
    }
}

/// Arm a vehicle enters from. Traffic from `South` drives north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    South,
    East,
    North,
    West,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::South,
        Approach::East,
        Approach::North,
        Approach::West,
    ];

    /// Counter-clockwise quarter turns mapping the south approach onto this one.
    pub fn quarter_turns(self) -> u8 {
        self as u8
    }

    pub fn opposite(self) -> Approach {
        Approach::ALL[(self as usize + 2) % 4]
    }

    pub fn group(self) -> LightGroup {
        match self {
            Approach::South | Approach::North => LightGroup::NorthSouth,
            Approach::East | Approach::West => LightGroup::EastWest,
        }
    }

    /// Direction of travel of inbound traffic.
    pub fn travel(self) -> Direction {
        match self {
            Approach::South => Direction::North,
            Approach::East => Direction::West,
            Approach::North => Direction::South,
            Approach::West => Direction::East,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LightGroup {
    NorthSouth,
    EastWest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceKind {
    Lane(Direction),
    Junction,
    Crosswalk,
    Sidewalk,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub rect: Rect,
    pub kind: SurfaceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: usize,
    pub approach: Approach,
    pub lane_type: LaneType,
    /// Inbound centreline from the world edge to the junction box.
    pub centerline: [Vec2; 2],
    /// Stop line endpoints across the lane.
    pub stop_line: [Vec2; 2],
    /// Arc length from the lane start to the stop line.
    pub stop_s: f64,
}

impl Lane {
    pub fn allowed(&self) -> &'static [Intent] {
        self.lane_type.allowed()
    }

    pub fn heading(&self) -> f64 {
        let d = self.centerline[1] - self.centerline[0];
        d.y.atan2(d.x).to_degrees()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosswalkSpan {
    pub crosswalk: usize,
    /// Arc length where the path centreline enters and leaves the strip.
    pub s_in: f64,
    pub s_out: f64,
    /// Path position at the crosswalk centre line.
    pub cross_point: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub id: usize,
    pub lane: usize,
    pub intent: Intent,
    pub line: Polyline,
    pub stop_s: f64,
    /// Arc-length span of the turning arc, if any.
    pub turn: Option<(f64, f64)>,
    pub crosswalks: Vec<CrosswalkSpan>,
}

impl Path {
    pub fn length(&self) -> f64 {
        self.line.length()
    }

    pub fn pose_at(&self, s: f64) -> (Vec2, f64) {
        self.line.pose_at(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crosswalk {
    pub id: usize,
    pub approach: Approach,
    pub rect: Rect,
}

impl Crosswalk {
    /// Road portion of the strip (between the curbs).
    pub fn road_rect(&self, box_half: f64) -> Rect {
        Rect::new(-box_half, self.rect.y0, box_half, self.rect.y1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightPost {
    pub approach: Approach,
    pub group: LightGroup,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConflictKind {
    Crossing,
    Merge,
}

/// Where two paths from different lanes come within the conflict radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictZone {
    pub kind: ConflictKind,
    /// Span on the first path of the pair.
    pub span: (f64, f64),
    /// Span on the second path.
    pub other_span: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldMap {
    pub config: WorldConfig,
    pub lanes: Vec<Lane>,
    pub paths: Vec<Path>,
    pub crosswalks: Vec<Crosswalk>,
    /// Checked in order; the first surface containing a point wins.
    pub surfaces: Vec<Surface>,
    pub lights: Vec<LightPost>,
    conflicts: Vec<Vec<Option<ConflictZone>>>,
}

impl WorldMap {
    /// A map with no geometry at all.
    pub fn empty(config: WorldConfig) -> Self {
        Self {
            config,
            lanes: Vec::new(),
            paths: Vec::new(),
            crosswalks: Vec::new(),
            surfaces: Vec::new(),
            lights: Vec::new(),
            conflicts: Vec::new(),
        }
    }

    pub fn build(sim: &SimConfig) -> Result<Self> {
        build_world(&sim.world, sim.conflict_radius, sim.conflict_region_half)
    }

    pub fn half_extent(&self) -> f64 {
        self.config.half_extent
    }

    pub fn surface_at(&self, p: Vec2) -> Option<SurfaceKind> {
        self.surfaces
            .iter()
            .find(|s| s.rect.contains(p))
            .map(|s| s.kind)
    }

    pub fn lane(&self, id: usize) -> Option<&Lane> {
        self.lanes.get(id)
    }

    pub fn path(&self, id: usize) -> &Path {
        &self.paths[id]
    }

    pub fn path_for(&self, lane: usize, intent: Intent) -> Result<&Path> {
        self.paths
            .iter()
            .find(|p| p.lane == lane && p.intent == intent)
            .ok_or(SimError::NoPath { lane, intent })
    }

    pub fn paths_of_lane(&self, lane: usize) -> impl Iterator<Item = &Path> {
        self.paths.iter().filter(move |p| p.lane == lane)
    }

    pub fn light_for(&self, approach: Approach) -> Option<&LightPost> {
        self.lights.iter().find(|l| l.approach == approach)
    }

    /// Conflict between path `a` and path `b`; `span` refers to `a`.
    pub fn conflict(&self, a: usize, b: usize) -> Option<&ConflictZone> {
        self.conflicts.get(a)?.get(b)?.as_ref()
    }
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidWorld(msg.into())
}

fn validate(c: &WorldConfig) -> Result<()> {
    let w = c.lane_width;
    if !(w > 0.0) {
        return Err(invalid("lane width must be positive"));
    }
    if c.box_half + 1e-9 < 2.0 * w {
        return Err(invalid(
            "junction box narrower than two lanes per direction",
        ));
    }
    if !(c.crosswalk_width > 0.0) {
        return Err(invalid("crosswalk width must be positive"));
    }
    if !(c.sidewalk_width > 0.0) {
        return Err(invalid("sidewalk width must be positive"));
    }
    if c.crosswalk_offset - 0.5 * c.crosswalk_width <= c.box_half {
        return Err(invalid("crosswalk overlaps the junction box"));
    }
    if c.stop_distance < c.crosswalk_offset + 0.5 * c.crosswalk_width {
        return Err(invalid("stop line lies on or past the crosswalk"));
    }
    if 1.5 * w + c.right_turn_radius > c.stop_distance {
        return Err(invalid("right-turn arc starts before the stop line"));
    }
    if c.right_turn_radius <= 0.0 {
        return Err(invalid("right-turn radius must be positive"));
    }
    if c.half_extent <= c.stop_distance + c.sidewalk_width + 5.0
        || c.half_extent <= c.box_half + c.sidewalk_width
    {
        return Err(invalid("world extent too small for the approaches"));
    }
    Ok(())
}

/// Paths of the south approach; other approaches are quarter-turn rotations.
fn canonical_segments(c: &WorldConfig, inner: bool, intent: Intent) -> Vec<Segment> {
    let w = c.lane_width;
    let h = c.half_extent;
    let b = c.box_half;
    let x = if inner { 0.5 * w } else { 1.5 * w };
    match intent {
        Intent::F => vec![Segment::Line {
            from: Vec2::new(x, -h),
            to: Vec2::new(x, h),
        }],
        Intent::L => {
            let r = b + 0.5 * w;
            vec![
                Segment::Line {
                    from: Vec2::new(x, -h),
                    to: Vec2::new(x, -b),
                },
                Segment::Arc {
                    center: Vec2::new(x - r, -b),
                    radius: r,
                    start: 0.0,
                    sweep: PI / 2.0,
                },
                Segment::Line {
                    from: Vec2::new(x - r, -b + r),
                    to: Vec2::new(-h, -b + r),
                },
            ]
        }
        Intent::R => {
            let r = c.right_turn_radius;
            let cy = -(1.5 * w + r);
            vec![
                Segment::Line {
                    from: Vec2::new(x, -h),
                    to: Vec2::new(x, cy),
                },
                Segment::Arc {
                    center: Vec2::new(x + r, cy),
                    radius: r,
                    start: PI,
                    sweep: -PI / 2.0,
                },
                Segment::Line {
                    from: Vec2::new(x + r, cy + r),
                    to: Vec2::new(h, cy + r),
                },
            ]
        }
    }
}

pub fn build_world(c: &WorldConfig, conflict_radius: f64, region_half: f64) -> Result<WorldMap> {
    validate(c)?;
    let w = c.lane_width;
    let h = c.half_extent;
    let b = c.box_half;
    let sw = c.sidewalk_width;
    let mut lanes = Vec::new();
    let mut paths = Vec::new();
    for approach in Approach::ALL {
        let q = approach.quarter_turns();
        let (inner_type, outer_type) = match approach.group() {
            crate::world::LightGroup::NorthSouth => (LaneType::L2, LaneType::L3),
            crate::world::LightGroup::EastWest => (LaneType::L1, LaneType::L3),
        };
        for (inner, lane_type) in [(true, inner_type), (false, outer_type)] {
            let id = lanes.len();
            let x = if inner { 0.5 * w } else { 1.5 * w };
            let stop_y = -c.stop_distance;
            lanes.push(Lane {
                id,
                approach,
                lane_type,
                centerline: [Vec2::new(x, -h).rot90(q), Vec2::new(x, -b).rot90(q)],
                stop_line: [
                    Vec2::new(x - 0.5 * w, stop_y).rot90(q),
                    Vec2::new(x + 0.5 * w, stop_y).rot90(q),
                ],
                stop_s: h - c.stop_distance,
            });
            for &intent in lane_type.allowed() {
                let segs: Vec<Segment> = canonical_segments(c, inner, intent)
                    .iter()
                    .map(|s| s.rot90(q))
                    .collect();
                let line = Polyline::new(segs);
                let turn = (intent != Intent::F).then(|| {
                    let s0 = line.segment_start(1);
                    (s0, s0 + line.segments()[1].length())
                });
                paths.push(Path {
                    id: paths.len(),
                    lane: id,
                    intent,
                    line,
                    stop_s: h - c.stop_distance,
                    turn,
                    crosswalks: Vec::new(),
                });
            }
        }
    }

    let mut crosswalks = Vec::new();
    for approach in [Approach::South, Approach::North] {
        let q = approach.quarter_turns();
        let y0 = -(c.crosswalk_offset + 0.5 * c.crosswalk_width);
        let y1 = -(c.crosswalk_offset - 0.5 * c.crosswalk_width);
        crosswalks.push(Crosswalk {
            id: crosswalks.len(),
            approach,
            rect: Rect::new(-(b + sw), y0, b + sw, y1).rot90(q),
        });
    }
    for path in &mut paths {
        path.crosswalks = crosswalk_spans(&path.line, &crosswalks, b);
    }

    let mut surfaces = Vec::new();
    for cw in &crosswalks {
        surfaces.push(Surface {
            rect: cw.road_rect(b),
            kind: SurfaceKind::Crosswalk,
        });
    }
    surfaces.push(Surface {
        rect: Rect::new(-b, -b, b, b),
        kind: SurfaceKind::Junction,
    });
    for approach in Approach::ALL {
        let q = approach.quarter_turns();
        // inbound half on the right of travel, outbound half on the left
        let inbound = Rect::new(0.0, -h, b, -b).rot90(q);
        let outbound = Rect::new(-b, -h, 0.0, -b).rot90(q);
        surfaces.push(Surface {
            rect: inbound,
            kind: SurfaceKind::Lane(approach.travel()),
        });
        surfaces.push(Surface {
            rect: outbound,
            kind: SurfaceKind::Lane(approach.opposite().travel()),
        });
    }
    for approach in Approach::ALL {
        let q = approach.quarter_turns();
        surfaces.push(Surface {
            rect: Rect::new(b, -h, b + sw, -b).rot90(q),
            kind: SurfaceKind::Sidewalk,
        });
        surfaces.push(Surface {
            rect: Rect::new(-(b + sw), -h, -b, -b).rot90(q),
            kind: SurfaceKind::Sidewalk,
        });
    }
    for approach in Approach::ALL {
        surfaces.push(Surface {
            rect: Rect::new(b + sw, -h, h, -(b + sw)).rot90(approach.quarter_turns()),
            kind: SurfaceKind::Infeasible,
        });
    }

    let lights = Approach::ALL
        .iter()
        .map(|&approach| LightPost {
            approach,
            group: approach.group(),
            position: Vec2::new(b + 0.5 * sw, -c.stop_distance).rot90(approach.quarter_turns()),
        })
        .collect();

    let conflicts = conflict_table(&paths, conflict_radius, region_half);
    Ok(WorldMap {
        config: c.clone(),
        lanes,
        paths,
        crosswalks,
        surfaces,
        lights,
        conflicts,
    })
}

fn crosswalk_spans(line: &Polyline, crosswalks: &[Crosswalk], box_half: f64) -> Vec<CrosswalkSpan> {
    let mut out = Vec::new();
    for cw in crosswalks {
        let road = cw.road_rect(box_half);
        let inside: Vec<f64> = line
            .samples()
            .iter()
            .filter(|s| road.contains(s.p))
            .map(|s| s.s)
            .collect();
        if let (Some(&s_in), Some(&s_out)) = (inside.first(), inside.last()) {
            let mid_y = road.center().y;
            let cross_point = line
                .samples()
                .iter()
                .filter(|s| s.s >= s_in && s.s <= s_out)
                .min_by(|a, b| (a.p.y - mid_y).abs().total_cmp(&(b.p.y - mid_y).abs()))
                .map(|s| s.p)
                .unwrap_or_default();
            out.push(CrosswalkSpan {
                crosswalk: cw.id,
                s_in,
                s_out,
                cross_point,
            });
        }
    }
    out
}

fn conflict_table(paths: &[Path], radius: f64, region_half: f64) -> Vec<Vec<Option<ConflictZone>>> {
    let n = paths.len();
    let mut table = vec![vec![None; n]; n];
    let inside = |p: Vec2| p.x.abs() <= region_half && p.y.abs() <= region_half;
    for i in 0..n {
        for j in (i + 1)..n {
            if paths[i].lane == paths[j].lane {
                continue;
            }
            let a: Vec<_> = paths[i]
                .line
                .samples()
                .iter()
                .filter(|s| inside(s.p))
                .collect();
            let b: Vec<_> = paths[j]
                .line
                .samples()
                .iter()
                .filter(|s| inside(s.p))
                .collect();
            let mut sa = (f64::INFINITY, f64::NEG_INFINITY);
            let mut sb = (f64::INFINITY, f64::NEG_INFINITY);
            for pa in &a {
                for pb in &b {
                    if pa.p.dist(pb.p) < radius {
                        sa = (sa.0.min(pa.s), sa.1.max(pa.s));
                        sb = (sb.0.min(pb.s), sb.1.max(pb.s));
                    }
                }
            }
            if sa.0 > sa.1 {
                continue;
            }
            let end_a = paths[i].line.pose_at(paths[i].length()).0;
            let end_b = paths[j].line.pose_at(paths[j].length()).0;
            let kind = if end_a.dist(end_b) < 0.5 {
                ConflictKind::Merge
            } else {
                ConflictKind::Crossing
            };
            table[i][j] = Some(ConflictZone {
                kind,
                span: sa,
                other_span: sb,
            });
            table[j][i] = Some(ConflictZone {
                kind,
                span: sb,
                other_span: sa,
            });
        }
    }
    table
}
