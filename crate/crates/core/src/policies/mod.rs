//! The four search methods: two fixed coverage patterns and the
//! centroid-seeking heuristic composed with each of them.

mod heuristic;
mod patterns;

pub use heuristic::{decide_mode, explore_probability, heuristic_step, HeuristicPolicy, Mode};
pub use patterns::{
    expanding_square_waypoints, lissajous_waypoints, ExpandingSquare, PatternPolicy, Point,
    WaypointFollower,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::simenv::{Action, Observation, WorkspaceBounds};

/// A search policy for one episode.
pub trait Policy: Send {
    fn act(&mut self, obs: &Observation) -> Action;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Square,
    Lissajous,
    HeuristicSquare,
    HeuristicLissajous,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Square,
        Method::Lissajous,
        Method::HeuristicSquare,
        Method::HeuristicLissajous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Square => "square",
            Self::Lissajous => "lissajous",
            Self::HeuristicSquare => "heuristic-square",
            Self::HeuristicLissajous => "heuristic-lissajous",
        }
    }

    pub fn is_heuristic(self) -> bool {
        matches!(self, Self::HeuristicSquare | Self::HeuristicLissajous)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    /// First expanding-square leg, in pixels.
    pub square_leg0: f64,
    /// Growth of the leg length every second turn.
    pub square_leg_increment: f64,
    pub liss_freq_a: u32,
    pub liss_freq_b: u32,
    /// Phase offset on the x component, radians.
    pub liss_phase: f64,
    /// Half-extents `(Ax, Ay)` of the curve, in pixels.
    pub liss_amplitude: (f64, f64),
    pub liss_samples: usize,
    /// Cruise height of the naive baselines.
    pub travel_z: f64,
    /// Height the naive baselines descend to when scanning a waypoint.
    pub scan_descend_z: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            square_leg0: 62.0,
            square_leg_increment: 62.0,
            liss_freq_a: 5,
            liss_freq_b: 4,
            liss_phase: std::f64::consts::FRAC_PI_2,
            liss_amplitude: (450.0, 450.0),
            liss_samples: 160,
            travel_z: 0.05,
            scan_descend_z: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicParams {
    /// θ used for the explore/dive draw; `None` uses the environment's θ.
    pub theta_decision: Option<f64>,
    /// Cap on planar step length, in pixels. Shared with the naive baselines.
    pub max_step: f64,
    /// Below this distance the agent moves exactly onto the centroid.
    pub min_step: f64,
    pub ascend_rate: f64,
    pub descend_rate: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Self {
            theta_decision: None,
            max_step: 80.0,
            min_step: 2.0,
            ascend_rate: 0.05,
            descend_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub pattern: PatternConfig,
    pub heuristic: HeuristicParams,
}

impl PolicyConfig {
    pub fn validate(&self, bounds: &WorkspaceBounds) -> Result<()> {
        let p = &self.pattern;
        let h = &self.heuristic;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(h.max_step > h.min_step && h.min_step > 0.0) {
            return bad(format!(
                "need max_step > min_step > 0, got {} and {}",
                h.max_step, h.min_step
            ));
        }
        for (name, rate) in [
            ("ascend_rate", h.ascend_rate),
            ("descend_rate", h.descend_rate),
        ] {
            if !(rate > 0.0 && rate <= 1.0) {
                return bad(format!("{name} must be in (0, 1], got {rate}"));
            }
        }
        if let Some(t) = h.theta_decision {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("theta_decision must be > 0, got {t}"));
            }
        }
        if !(p.square_leg0 > 0.0 && p.square_leg_increment >= 0.0) {
            return bad("square legs must be positive".into());
        }
        if p.liss_freq_a == 0 || p.liss_freq_b == 0 || p.liss_samples < 2 {
            return bad("Lissajous frequencies must be >= 1 and samples >= 2".into());
        }
        let (cx, cy) = bounds.center();
        let (ax, ay) = p.liss_amplitude;
        if !(ax >= 0.0 && ay >= 0.0)
            || !bounds.contains(cx - ax, cy - ay)
            || !bounds.contains(cx + ax, cy + ay)
        {
            return bad(format!(
                "Lissajous amplitude ({ax}, {ay}) leaves the workspace"
            ));
        }
        for (name, z) in [
            ("travel_z", p.travel_z),
            ("scan_descend_z", p.scan_descend_z),
        ] {
            if !(0.0..=1.0).contains(&z) {
                return bad(format!("{name} must be in [0, 1], got {z}"));
            }
        }
        Ok(())
    }
}

/// Instantiates the policy for one episode. `theta` is the environment's
/// visibility factor; `seed` the episode seed.
pub fn build_policy(
    method: Method,
    config: &PolicyConfig,
    bounds: &WorkspaceBounds,
    theta: f64,
    seed: u64,
) -> Result<Box<dyn Policy>> {
    config.validate(bounds)?;
    let (cx, cy) = bounds.center();
    let center = Point::new(cx, cy);
    let waypoints = match method {
        Method::Square | Method::HeuristicSquare => {
            expanding_square_waypoints(&config.pattern, center, bounds)
        }
        Method::Lissajous | Method::HeuristicLissajous => {
            lissajous_waypoints(&config.pattern, center)
        }
    };
    let follower = WaypointFollower::new(waypoints);
    Ok(if method.is_heuristic() {
        let theta = config.heuristic.theta_decision.unwrap_or(theta);
        Box::new(HeuristicPolicy::new(
            config.heuristic.clone(),
            theta,
            follower,
            seeds::rng(seed, "policy"),
        ))
    } else {
        Box::new(PatternPolicy::new(
            config.pattern.clone(),
            config.heuristic.clone(),
            follower,
        ))
    })
}
