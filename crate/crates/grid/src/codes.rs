//! Integer cell codes. Changing a value requires bumping `CODE_TABLE_VERSION`.

use std::collections::BTreeMap;

use maip_sim::world::{Direction, SurfaceKind};

pub const CODE_TABLE_VERSION: u32 = 1;

pub const EMPTY: u8 = 0;

pub const LANE_NORTH: u8 = 1;
pub const LANE_SOUTH: u8 = 2;
pub const LANE_EAST: u8 = 3;
pub const LANE_WEST: u8 = 4;
pub const JUNCTION: u8 = 5;
pub const CROSSWALK: u8 = 6;
pub const SIDEWALK: u8 = 7;
pub const INFEASIBLE: u8 = 8;
pub const LIGHT: u8 = 9;
pub const STATIC_MAX: u8 = LIGHT;

pub const VEHICLE: u8 = 1;
pub const PEDESTRIAN: u8 = 2;
pub const GREEN: u8 = 3;
pub const RED: u8 = 4;
pub const YELLOW: u8 = 5;
pub const DYNAMIC_MAX: u8 = YELLOW;

/// Decoded meaning of a static cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StaticClass {
    Empty,
    Surface(SurfaceKind),
    Light,
}

impl StaticClass {
    pub fn code(self) -> u8 {
        match self {
            StaticClass::Empty => EMPTY,
            StaticClass::Light => LIGHT,
            StaticClass::Surface(kind) => match kind {
                SurfaceKind::Lane(Direction::North) => LANE_NORTH,
                SurfaceKind::Lane(Direction::South) => LANE_SOUTH,
                SurfaceKind::Lane(Direction::East) => LANE_EAST,
                SurfaceKind::Lane(Direction::West) => LANE_WEST,
                SurfaceKind::Junction => JUNCTION,
                SurfaceKind::Crosswalk => CROSSWALK,
                SurfaceKind::Sidewalk => SIDEWALK,
                SurfaceKind::Infeasible => INFEASIBLE,
            },
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            EMPTY => StaticClass::Empty,
            LANE_NORTH => StaticClass::Surface(SurfaceKind::Lane(Direction::North)),
            LANE_SOUTH => StaticClass::Surface(SurfaceKind::Lane(Direction::South)),
            LANE_EAST => StaticClass::Surface(SurfaceKind::Lane(Direction::East)),
            LANE_WEST => StaticClass::Surface(SurfaceKind::Lane(Direction::West)),
            JUNCTION => StaticClass::Surface(SurfaceKind::Junction),
            CROSSWALK => StaticClass::Surface(SurfaceKind::Crosswalk),
            SIDEWALK => StaticClass::Surface(SurfaceKind::Sidewalk),
            INFEASIBLE => StaticClass::Surface(SurfaceKind::Infeasible),
            LIGHT => StaticClass::Light,
            _ => return None,
        })
    }
}

pub fn static_table() -> BTreeMap<String, u8> {
    [
        ("empty", EMPTY),
        ("lane_north", LANE_NORTH),
        ("lane_south", LANE_SOUTH),
        ("lane_east", LANE_EAST),
        ("lane_west", LANE_WEST),
        ("junction", JUNCTION),
        ("crosswalk", CROSSWALK),
        ("sidewalk", SIDEWALK),
        ("infeasible", INFEASIBLE),
        ("light", LIGHT),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn dynamic_table() -> BTreeMap<String, u8> {
    [
        ("empty", EMPTY),
        ("vehicle", VEHICLE),
        ("pedestrian", PEDESTRIAN),
        ("green", GREEN),
        ("red", RED),
        ("yellow", YELLOW),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Both tables keyed as they appear in the dataset sidecar.
pub fn sidecar_tables() -> BTreeMap<String, BTreeMap<String, u8>> {
    let mut out = BTreeMap::new();
    out.insert("static".to_string(), static_table());
    out.insert("dynamic".to_string(), dynamic_table());
    out.insert(
        "version".to_string(),
        BTreeMap::from([("code_table".to_string(), CODE_TABLE_VERSION as u8)]),
    );
    out
}
