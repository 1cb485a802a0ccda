use maip_sim::agents::Pedestrian;
use maip_sim::geometry::Vec2;
use maip_sim::idm::{idm_accel, NO_LEADER_GAP};
use maip_sim::world::{ConflictKind, LaneType};
use maip_sim::*;

fn cfg() -> SimConfig {
    SimConfig::default()
}

fn world() -> WorldMap {
    WorldMap::build(&cfg()).unwrap()
}

fn vehicle_at(
    world: &WorldMap,
    id: u32,
    lane: usize,
    intent: Intent,
    s: f64,
    v: f64,
) -> VehicleState {
    let path = world.path_for(lane, intent).unwrap();
    let (p, theta) = path.pose_at(s);
    VehicleState {
        id,
        x: p.x,
        y: p.y,
        theta,
        v,
        a: 0.0,
        lane,
        intent,
    }
}

fn frame(vehicles: Vec<VehicleState>, lights: Lights) -> Frame {
    Frame {
        ep: 0,
        t: 0,
        lights,
        vehicles,
        peds: Vec::new(),
    }
}

// light offsets (in ticks) that put the given group on green at tick 0
const NS_GREEN: u64 = 0;
const EW_GREEN: u64 = 90;

fn lights_at(offset: u64) -> Lights {
    LightState::at_tick(&cfg().lights, cfg().dt, offset, 0).lights
}

#[test]
fn default_world_has_three_lane_types() {
    let w = world();
    for t in [LaneType::L1, LaneType::L2, LaneType::L3] {
        assert!(w.lanes.iter().any(|l| l.lane_type == t), "{t:?} missing");
    }
    assert_eq!(
        w.lanes
            .iter()
            .filter(|l| l.lane_type == LaneType::L1)
            .count(),
        2
    );
    assert_eq!(w.crosswalks.len(), 2);
    assert_eq!(w.lights.len(), 4);
    let h = w.half_extent();
    assert_eq!(h, 50.0);
}

#[test]
fn stop_lines_precede_the_box() {
    let w = world();
    let b = w.config.box_half;
    for path in &w.paths {
        let (p, _) = path.pose_at(path.stop_s);
        assert!(
            p.x.abs() > b || p.y.abs() > b,
            "path {} stop line inside box",
            path.id
        );
        let (q, _) = path.pose_at(path.stop_s + 1e-3);
        assert!(p.dist(Vec2::new(0.0, 0.0)) > q.dist(Vec2::new(0.0, 0.0)));
    }
}

#[test]
fn degenerate_crosswalk_rejected() {
    let mut c = cfg();
    c.world.crosswalk_width = 0.0;
    assert!(matches!(
        WorldMap::build(&c),
        Err(SimError::InvalidWorld(_))
    ));
    let mut c = cfg();
    c.world.crosswalk_offset = 7.5;
    assert!(WorldMap::build(&c).is_err());
}

#[test]
fn build_is_deterministic() {
    assert_eq!(world(), world());
}

#[test]
fn light_posts_sit_on_the_right_curb() {
    let w = world();
    let south = w.light_for(Approach::South).unwrap();
    assert_eq!(south.position, Vec2::new(8.5, -12.5));
    let east = w.light_for(Approach::East).unwrap();
    assert!(east.position.dist(Vec2::new(12.5, 8.5)) < 1e-12);
}

#[test]
fn conflict_table_is_symmetric() {
    let w = world();
    for a in 0..w.paths.len() {
        for b in 0..w.paths.len() {
            match (w.conflict(a, b), w.conflict(b, a)) {
                (Some(x), Some(y)) => {
                    assert_eq!(x.span, y.other_span);
                    assert_eq!(x.kind, y.kind);
                }
                (None, None) => {}
                _ => panic!("asymmetric conflict {a} {b}"),
            }
        }
    }
    let merges = (0..14)
        .flat_map(|a| (0..14).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            w.conflict(a, b)
                .is_some_and(|z| z.kind == ConflictKind::Merge)
        })
        .count();
    assert!(merges > 0);
}

#[test]
fn idm_hand_evaluation() {
    let p = IdmParams {
        v0: 15.0,
        time_headway: 1.5,
        s0: 2.0,
        a_max: 1.5,
        b: 2.0,
        delta: 4.0,
        b_hard: 8.0,
    };
    // s* = 2 + 10*1.5 + 0 = 17; a = 1.5 (1 - (10/15)^4 - (17/20)^2)
    let expected = 1.5 * (1.0 - (2.0f64 / 3.0).powi(4) - 0.85f64.powi(2));
    let a = idm_accel(10.0, 10.0, 20.0, &p).accel;
    assert!((a - expected).abs() < 1e-12);
    assert!((a - 0.120).abs() < 5e-4);
}

#[test]
fn empty_green_road_is_free_flow() {
    let w = world();
    let c = cfg();
    let f = frame(
        vec![vehicle_at(&w, 0, 0, Intent::F, 10.0, 8.0)],
        lights_at(NS_GREEN),
    );
    let mut sim = Simulator::from_frame(&w, &c, &f, NS_GREEN).unwrap();
    sim.redecide();
    let expected = idm_accel(8.0, 8.0, NO_LEADER_GAP, &c.idm).accel;
    assert_eq!(sim.vehicles()[0].a, expected);
}

#[test]
fn stationary_frame_stays_put() {
    let w = world();
    let c = cfg();
    let mut vs = Vec::new();
    for (k, lane) in [0usize, 2, 4, 6].into_iter().enumerate() {
        vs.push(vehicle_at(&w, k as u32, lane, Intent::F, 30.0, 0.0));
    }
    let f = frame(
        vs,
        Lights {
            ns: LightColor::R,
            ew: LightColor::R,
        },
    );
    let mut sim = Simulator::from_frame(&w, &c, &f, NS_GREEN).unwrap();
    sim.step();
    let next = sim.frame();
    assert_eq!(next.t, 1);
    for (a, b) in f.vehicles.iter().zip(&next.vehicles) {
        assert_eq!((a.x, a.y, a.v), (b.x, b.y, b.v));
    }
}

#[test]
fn constant_speed_advances_v_dt() {
    let w = world();
    let c = cfg();
    let f = frame(
        vec![vehicle_at(&w, 0, 2, Intent::F, 10.0, 10.0)],
        lights_at(EW_GREEN),
    );
    let mut sim = Simulator::from_frame(&w, &c, &f, EW_GREEN).unwrap();
    sim.step();
    let b = &sim.frame().vehicles[0];
    let a = &f.vehicles[0];
    let moved = Vec2::new(b.x - a.x, b.y - a.y);
    assert!((moved.norm() - 2.0).abs() < 1e-9);
    // east approach drives west along its centreline
    assert!(moved.x < 0.0 && moved.y.abs() < 1e-12);
}

#[test]
fn left_turner_holds_for_oncoming_straight() {
    let w = world();
    let c = cfg();
    let left = w.path_for(0, Intent::L).unwrap();
    let opp = w.path_for(4, Intent::F).unwrap();
    let zone = w.conflict(left.id, opp.id).unwrap();
    let ego_s = left.stop_s - c.stop_margin - c.half_length();
    // oncoming front 2 s from the conflict zone at 10 m/s
    let opp_s = zone.other_span.0 - 20.0 - c.half_length();
    let f = frame(
        vec![
            vehicle_at(&w, 0, 0, Intent::L, ego_s, 0.0),
            vehicle_at(&w, 1, 4, Intent::F, opp_s, 10.0),
        ],
        lights_at(NS_GREEN),
    );
    let mut sim = Simulator::from_frame(&w, &c, &f, NS_GREEN).unwrap();
    sim.redecide();
    assert!(!sim.vehicles()[0].permitted);
    assert!(sim.vehicles()[0].a <= 0.0);

    // replay until the turn finishes; the turner must enter the zone only
    // after the oncoming car has left it
    let mut entered = None;
    let mut cleared = None;
    for _ in 0..200 {
        sim.step();
        let fr = sim.frame();
        let tick = fr.t;
        let s_of = |id: u32, path: &maip_sim::world::Path| {
            fr.vehicle(id).map(|v| {
                path.line
                    .project(Vec2::new(v.x, v.y), 0.0, path.length())
                    .unwrap()
                    .0
            })
        };
        if let Some(s) = s_of(0, left) {
            if entered.is_none() && s + c.half_length() >= zone.span.0 {
                entered = Some(tick);
            }
        }
        match s_of(1, opp) {
            Some(s) if s - c.half_length() > zone.other_span.1 => cleared = cleared.or(Some(tick)),
            None => cleared = cleared.or(Some(tick)),
            _ => {}
        }
        if entered.is_some() {
            break;
        }
    }
    let (entered, cleared) = (
        entered.expect("turner never moved"),
        cleared.expect("oncoming never cleared"),
    );
    assert!(entered > cleared, "entered {entered} cleared {cleared}");
}

#[test]
fn pedestrian_in_path_overrides_green() {
    let w = world();
    let c = cfg();
    let ego = w.path_for(3, Intent::R).unwrap();
    let span = &ego.crosswalks[0];
    let s = span.s_in - c.half_length() - 20.0;
    let f = frame(
        vec![vehicle_at(&w, 0, 3, Intent::R, s, 6.0)],
        lights_at(EW_GREEN),
    );
    assert_eq!(f.lights.ew, LightColor::G);
    let mut sim = Simulator::from_frame(&w, &c, &f, EW_GREEN).unwrap();
    sim.add_pedestrian(Pedestrian {
        id: 0,
        crosswalk: span.crosswalk,
        pos: span.cross_point,
        speed: 0.0,
        dir: -1.0,
        crossing: true,
    });
    sim.redecide();
    assert!(sim.vehicles()[0].a < 0.0);
    for _ in 0..150 {
        sim.step();
        let v = &sim.vehicles()[0];
        assert!(v.a <= 0.0);
        assert!(v.s + c.half_length() < span.s_in, "entered the crosswalk");
    }
    assert!(sim.vehicles()[0].v < 1e-9);
}

#[test]
fn red_light_stops_before_the_line() {
    let w = world();
    let c = cfg();
    // north-south red while east-west is green
    let f = frame(
        vec![vehicle_at(&w, 0, 0, Intent::F, 5.0, 10.0)],
        lights_at(EW_GREEN),
    );
    let mut sim = Simulator::from_frame(&w, &c, &f, EW_GREEN).unwrap();
    sim.redecide();
    let stop_s = w.path_for(0, Intent::F).unwrap().stop_s;
    for _ in 0..60 {
        sim.step();
        let v = &sim.vehicles()[0];
        assert!(v.s + c.half_length() < stop_s);
    }
    let v = &sim.vehicles()[0];
    assert!(v.v < 0.05);
    assert!(stop_s - (v.s + c.half_length()) < 1.0);
}
