//! Centroid-seeking heuristic.
//!
//! When soil is in view the agent steps toward the centroid of the largest
//! soil component and descends. With nothing in view it either follows its
//! fallback pattern while climbing (explore), or drops in place to take a
//! sharper look (dive). Explore is chosen with probability
//! `e^(z/θ) / (e^(z/θ) + 1)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::patterns::{Point, WaypointFollower};
use super::{HeuristicParams, Policy};
use crate::imgproc::{largest_component, BinaryImage};
use crate::simenv::{visibility_sigmoid, zoom, Action, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Explore,
    Dive,
}

pub fn explore_probability(z_hat: f64, theta: f64) -> f64 {
    visibility_sigmoid(z_hat, theta)
}

/// Draws explore vs. dive. Diving at the floor would do nothing, so a dive
/// drawn at `z_hat == 0` becomes an explore.
pub fn decide_mode<R: Rng + ?Sized>(z_hat: f64, theta: f64, rng: &mut R) -> Mode {
    let explore = rng.gen::<f64>() < explore_probability(z_hat, theta);
    if explore || z_hat <= 0.0 {
        Mode::Explore
    } else {
        Mode::Dive
    }
}

/// Move toward the largest visible soil component, or `None` when the view
/// holds no soil. The planar step is the view-frame offset of the centroid
/// from the view center scaled by the zoom factor, shortened to `max_step`
/// if needed; it keeps its direction either way.
pub fn heuristic_step(view: &BinaryImage, z_hat: f64, params: &HeuristicParams) -> Option<Action> {
    let component = largest_component(view)?;
    let cx = (view.width() as f64 - 1.0) / 2.0;
    let cy = (view.height() as f64 - 1.0) / 2.0;
    let scale = zoom(z_hat);
    let (mut dx, mut dy) = (
        scale * (component.centroid.0 - cx),
        scale * (component.centroid.1 - cy),
    );
    let dist = dx.hypot(dy);
    if dist >= params.min_step && dist > params.max_step {
        let k = params.max_step / dist;
        dx *= k;
        dy *= k;
    }
    // under min_step the move already lands exactly on the centroid
    Some(Action::new(dx, dy, -params.descend_rate))
}

pub struct HeuristicPolicy {
    params: HeuristicParams,
    theta: f64,
    follower: WaypointFollower,
    rng: ChaCha8Rng,
}

impl HeuristicPolicy {
    pub fn new(
        params: HeuristicParams,
        theta: f64,
        follower: WaypointFollower,
        rng: ChaCha8Rng,
    ) -> Self {
        Self {
            params,
            theta,
            follower,
            rng,
        }
    }
}

impl Policy for HeuristicPolicy {
    fn act(&mut self, obs: &Observation) -> Action {
        let z = obs.pose.z_hat;
        if let Some(action) = heuristic_step(&obs.view, z, &self.params) {
            return action;
        }
        match decide_mode(z, self.theta, &mut self.rng) {
            Mode::Dive => Action::new(0.0, 0.0, -self.params.descend_rate),
            Mode::Explore => {
                let pos = Point::new(obs.pose.x, obs.pose.y);
                let (dx, dy) = self.follower.step_claiming(pos, self.params.max_step);
                Action::new(dx, dy, self.params.ascend_rate)
            }
        }
    }
}
