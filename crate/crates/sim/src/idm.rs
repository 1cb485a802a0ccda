use crate::config::IdmParams;

/// Gap used when there is no leader.
pub const NO_LEADER_GAP: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmAccel {
    pub accel: f64,
    /// Set when the gap was not positive.
    pub collision: bool,
}

/// Intelligent driver model acceleration, clamped to `[-b_hard, a_max]`.
pub fn idm_accel(v: f64, v_lead: f64, gap: f64, p: &IdmParams) -> IdmAccel {
    if gap <= 0.0 {
        return IdmAccel {
            accel: -p.b_hard,
            collision: true,
        };
    }
    let dv = v - v_lead;
    let s_star = p.s0 + (v * p.time_headway + v * dv / (2.0 * (p.a_max * p.b).sqrt())).max(0.0);
    let a = p.a_max * (1.0 - (v / p.v0).powf(p.delta) - (s_star / gap).powi(2));
    IdmAccel {
        accel: a.clamp(-p.b_hard, p.a_max),
        collision: false,
    }
}
