use std::collections::BTreeMap;

use maip_eval::modes::final_heading;
use maip_eval::*;
use maip_model::PredictionSample;
use maip_sim::geometry::Vec2;
use maip_sim::world::Intent;
use maip_sim::*;

fn ending_at(theta: f64) -> PredictionSample {
    PredictionSample {
        steps: vec![(5.0, 0.0), (5.0, theta / 2.0), (5.0, theta)],
        z: Vec::new(),
    }
}

#[test]
fn identical_samples_form_one_mode() {
    let m = cluster_modes(&vec![ending_at(40.0); 20]).unwrap();
    assert_eq!(m.count, 1);
    assert!(m.assignment.iter().all(|&a| a == 0));
}

#[test]
fn two_separated_groups_form_two_modes() {
    let mut s: Vec<PredictionSample> = (0..10).map(|_| ending_at(0.0)).collect();
    s.extend((0..10).map(|_| ending_at(90.0)));
    let m = cluster_modes(&s).unwrap();
    assert_eq!(m.count, 2);
    assert_eq!(m.assignment[0], m.assignment[9]);
    assert_ne!(m.assignment[0], m.assignment[10]);
}

#[test]
fn clustering_wraps_around_the_dateline() {
    let m = cluster_headings(&[179.0, -179.0, 175.0, -172.0], 15.0);
    assert_eq!(m.count, 1);
    assert_eq!(final_heading(&ending_at(270.0)), -90.0);
}

#[test]
fn densest_seed_wins() {
    // 0 has two neighbours within 15, 20 has one; the first cluster is
    // seeded at 0 and takes 10, leaving 20 and 30 for a second cluster.
    let m = cluster_headings(&[0.0, 10.0, -10.0, 20.0, 30.0], 15.0);
    assert_eq!(m.count, 2);
    assert_eq!(m.centers[0], 0.0);
    assert_eq!(m.assignment, vec![0, 0, 0, 1, 1]);
}

#[test]
fn too_few_samples_is_an_error() {
    assert!(matches!(
        cluster_modes(&vec![ending_at(0.0); 9]),
        Err(EvalError::TooFewSamples { need: 10, got: 9 })
    ));
}

fn world() -> WorldMap {
    WorldMap::build(&SimConfig::default()).unwrap()
}

fn scene(vehicles: Vec<VehicleState>) -> Frame {
    Frame {
        ep: 0,
        t: 0,
        lights: Lights {
            ns: LightColor::G,
            ew: LightColor::R,
        },
        vehicles,
        peds: Vec::new(),
    }
}

fn vehicle(x: f64, y: f64) -> VehicleState {
    VehicleState {
        id: 4,
        x,
        y,
        theta: 90.0,
        v: 6.0,
        a: 0.0,
        lane: 0,
        intent: Intent::F,
    }
}

fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter(|l| l.contains(r#"class="prediction""#))
        .map(|l| {
            let pts = l
                .split("points=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap();
            pts.split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

#[test]
fn empty_scene_draws_only_the_map() {
    let w = world();
    let svg = render_svg(&w, &scene(vec![]), &BTreeMap::new(), 0.2);
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(r#"<g id="map">"#));
    let entities = svg.split(r#"<g id="entities">"#).nth(1).unwrap();
    assert!(entities.trim_start().starts_with("</g>"));
    assert!(polylines(&svg).is_empty());
    assert_eq!(svg, render_svg(&w, &scene(vec![]), &BTreeMap::new(), 0.2));
}

#[test]
fn standing_sample_is_a_point_at_the_vehicle() {
    let w = world();
    let preds = BTreeMap::from([(
        4,
        vec![PredictionSample {
            steps: vec![(0.0, 33.0); 5],
            z: vec![],
        }],
    )]);
    let svg = render_svg(&w, &scene(vec![vehicle(1.75, -20.0)]), &preds, 0.2);
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 1);
    let (x0, y0) = ((1.75 + 50.0) * 8.0, (50.0 + 20.0) * 8.0);
    assert!(lines[0]
        .iter()
        .all(|&(x, y)| (x - x0).abs() < 1e-9 && (y - y0).abs() < 1e-9));
}

#[test]
fn constant_sample_ends_v_tp_dt_away() {
    let start = Vec2::new(1.75, -20.0);
    for theta in [0.0, 37.0, 90.0, -135.0] {
        let pts = dead_reckon(start, &[(6.0, theta); 5], 0.2);
        assert_eq!(pts.len(), 6);
        let end = *pts.last().unwrap();
        assert!(((end - start).norm() - 6.0 * 5.0 * 0.2).abs() < 1e-9);
    }
    let w = world();
    let preds = BTreeMap::from([(
        4,
        vec![PredictionSample {
            steps: vec![(6.0, 90.0); 5],
            z: vec![],
        }],
    )]);
    let svg = render_svg(&w, &scene(vec![vehicle(1.75, -20.0)]), &preds, 0.2);
    let line = &polylines(&svg)[0];
    let (a, b) = (line[0], *line.last().unwrap());
    assert!(((a.1 - b.1) - 6.0 * 8.0).abs() < 1e-6 && (a.0 - b.0).abs() < 1e-9);
}

#[test]
fn unwritable_path_is_an_io_error() {
    let w = world();
    let err = render_to_file(
        std::path::Path::new("/nonexistent/dir/x.svg"),
        &w,
        &scene(vec![]),
        &BTreeMap::new(),
        0.2,
    )
    .unwrap_err();
    assert!(matches!(err, EvalError::Io { .. }));
}

#[test]
fn config_files_set_known_keys_only() {
    let c = RunConfig::from_text("# comment\nseed = 7\nbeta = 0.25 # inline\n\nepochs=3\noptimizer = sgd\nloss_theta_scale = 5\n").unwrap();
    assert_eq!(c.seed, 7);
    assert_eq!(c.train.seed, 7);
    assert_eq!(c.train.beta, 0.25);
    assert_eq!(c.train.epochs, 3);
    assert!(c.train.sgd);
    assert_eq!(c.train.weights.theta, 5.0);
    assert!(matches!(
        RunConfig::from_text("speed = 3"),
        Err(EvalError::Config { line: 1, .. })
    ));
    assert!(matches!(
        RunConfig::from_text("\nepochs = many"),
        Err(EvalError::Config { line: 2, .. })
    ));
    assert!(matches!(
        RunConfig::from_text("epochs"),
        Err(EvalError::Config { .. })
    ));
}

#[test]
fn later_episodes_are_held_out() {
    let w = world();
    let sim = SimConfig::default();
    let eps = generate_episodes(&w, &sim, 5, 1, &ScenarioMix::default()).unwrap();
    let (train, test) = split_episodes(&eps, 0.2);
    assert_eq!(train.len(), 4);
    assert_eq!(test.len(), 1);
    assert_eq!(test[0].ep, eps[4].ep);
    let (train, test) = split_episodes(&eps[..1], 0.2);
    assert_eq!((train.len(), test.len()), (1, 0));
}
