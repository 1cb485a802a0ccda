use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::world::{Intent, LaneType, LightGroup, Path, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioCase {
    UnprotectedLeft,
    RightTurnMerge,
    PedestrianAvoidance,
}

impl ScenarioCase {
    pub const ALL: [ScenarioCase; 3] = [
        ScenarioCase::UnprotectedLeft,
        ScenarioCase::RightTurnMerge,
        ScenarioCase::PedestrianAvoidance,
    ];

    /// Relative spawn weight of a path under this case.
    pub fn spawn_weight(self, world: &WorldMap, path: &Path) -> f64 {
        let lane = &world.lanes[path.lane];
        let ns = lane.approach.group() == LightGroup::NorthSouth;
        let base = if path.intent == Intent::F { 2.0 } else { 1.0 };
        let boost = match (self, path.intent) {
            (ScenarioCase::UnprotectedLeft, Intent::L) => 5.0,
            (ScenarioCase::UnprotectedLeft, Intent::F) if ns => 1.5,
            (ScenarioCase::RightTurnMerge, Intent::R) => 4.0,
            (ScenarioCase::RightTurnMerge, Intent::F) if lane.lane_type == LaneType::L3 => 1.5,
            (ScenarioCase::PedestrianAvoidance, Intent::R) if !ns => 4.0,
            _ => 1.0,
        };
        base * boost
    }
}

/// Fractions of episodes per case, in `ScenarioCase::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMix(pub [f64; 3]);

impl Default for ScenarioMix {
    fn default() -> Self {
        Self([1.0 / 3.0; 3])
    }
}

impl ScenarioMix {
    /// Largest-remainder quotas for `n` episodes.
    pub fn quotas(&self, n: usize) -> [usize; 3] {
        let total: f64 = self.0.iter().sum();
        let exact: Vec<f64> = self.0.iter().map(|w| n as f64 * w / total).collect();
        let mut q = [0usize; 3];
        for (k, e) in exact.iter().enumerate() {
            q[k] = e.floor() as usize;
        }
        let mut rest = n - q.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| {
            (exact[b] - exact[b].floor())
                .total_cmp(&(exact[a] - exact[a].floor()))
                .then(a.cmp(&b))
        });
        for k in order {
            if rest == 0 {
                break;
            }
            q[k] += 1;
            rest -= 1;
        }
        q
    }

    /// Case per episode: exact quotas in shuffled order.
    pub fn assign<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<ScenarioCase> {
        let q = self.quotas(n);
        let mut cases: Vec<ScenarioCase> = ScenarioCase::ALL
            .iter()
            .zip(q)
            .flat_map(|(&c, k)| std::iter::repeat_n(c, k))
            .collect();
        cases.shuffle(rng);
        cases
    }
}
