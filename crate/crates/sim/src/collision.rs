use crate::frame::VehicleState;
use crate::geometry::Vec2;

/// Disc cover of a 4.5 m x 2.0 m vehicle: two discs of radius 1.0 centred
/// ±1.25 m along the heading.
pub const DISC_OFFSET: f64 = 1.25;
pub const DISC_RADIUS: f64 = 1.0;

pub fn discs(x: f64, y: f64, theta_deg: f64) -> [Vec2; 2] {
    let c = Vec2::new(x, y);
    let f = Vec2::from_heading(theta_deg) * DISC_OFFSET;
    [c + f, c - f]
}

pub fn overlap(a: &VehicleState, b: &VehicleState) -> bool {
    let da = discs(a.x, a.y, a.theta);
    let db = discs(b.x, b.y, b.theta);
    da.iter()
        .any(|p| db.iter().any(|q| p.dist(*q) < 2.0 * DISC_RADIUS))
}

/// Pairs of vehicle ids whose discs overlap.
pub fn overlapping_pairs(vehicles: &[VehicleState]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in 0..vehicles.len() {
        for j in (i + 1)..vehicles.len() {
            if overlap(&vehicles[i], &vehicles[j]) {
                out.push((vehicles[i].id, vehicles[j].id));
            }
        }
    }
    out
}
