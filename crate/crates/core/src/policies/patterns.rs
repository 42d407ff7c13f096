use std::f64::consts::TAU;

use super::{HeuristicParams, PatternConfig, Policy};
use crate::simenv::{Action, Observation, WorkspaceBounds};

/// Waypoints closer than this count as reached.
const ARRIVAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Endless expanding-square spiral: legs of `s, s, s+d, s+d, s+2d, ...`,
/// starting along +y and turning 90° counterclockwise after every leg.
#[derive(Debug, Clone)]
pub struct ExpandingSquare {
    pos: Point,
    heading: (f64, f64),
    leg: usize,
    leg0: f64,
    increment: f64,
}

impl ExpandingSquare {
    pub fn new(config: &PatternConfig, origin: Point) -> Self {
        Self {
            pos: origin,
            heading: (0.0, 1.0),
            leg: 0,
            leg0: config.square_leg0,
            increment: config.square_leg_increment,
        }
    }
}

impl Iterator for ExpandingSquare {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let length = self.leg0 + (self.leg / 2) as f64 * self.increment;
        self.pos = Point::new(
            self.pos.x + self.heading.0 * length,
            self.pos.y + self.heading.1 * length,
        );
        self.heading = (-self.heading.1, self.heading.0);
        self.leg += 1;
        Some(self.pos)
    }
}

/// Spiral waypoints up to and including the first one outside `bounds`.
pub fn expanding_square_waypoints(
    config: &PatternConfig,
    origin: Point,
    bounds: &WorkspaceBounds,
) -> Vec<Point> {
    let mut out = Vec::new();
    for p in ExpandingSquare::new(config, origin) {
        out.push(p);
        if !bounds.contains(p.x, p.y) {
            break;
        }
    }
    out
}

/// Scan points at evenly spaced parameters `t_k` over `[0, 2π]` of
/// `(cx + Ax sin(a t + δ), cy + Ay sin(b t))`.
pub fn lissajous_waypoints(config: &PatternConfig, center: Point) -> Vec<Point> {
    let n = config.liss_samples;
    let (ax, ay) = config.liss_amplitude;
    let (a, b) = (f64::from(config.liss_freq_a), f64::from(config.liss_freq_b));
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / (n - 1) as f64;
            Point::new(
                center.x + ax * (a * t + config.liss_phase).sin(),
                center.y + ay * (b * t).sin(),
            )
        })
        .collect()
}

/// Walks a waypoint list with a bounded step. Once the list is used up the
/// walker keeps going along its last heading.
#[derive(Debug, Clone)]
pub struct WaypointFollower {
    waypoints: Vec<Point>,
    next: usize,
    heading: (f64, f64),
}

impl WaypointFollower {
    pub fn new(waypoints: Vec<Point>) -> Self {
        Self {
            waypoints,
            next: 0,
            heading: (1.0, 0.0),
        }
    }

    pub fn target(&self) -> Option<Point> {
        self.waypoints.get(self.next).copied()
    }

    pub fn index(&self) -> usize {
        self.next
    }

    pub fn is_exhausted(&self) -> bool {
        self.next >= self.waypoints.len()
    }

    pub fn arrived(&self, pos: Point) -> bool {
        self.target().is_some_and(|w| pos.distance(w) < ARRIVAL_TOL)
    }

    pub fn advance(&mut self) {
        self.next += 1;
    }

    /// Skips every waypoint already reached at `pos`.
    pub fn skip_reached(&mut self, pos: Point) {
        while self.arrived(pos) {
            self.advance();
        }
    }

    /// Planar move toward the current target, at most `max_step` long;
    /// lands exactly on the target when it is within reach.
    pub fn step_toward(&mut self, pos: Point, max_step: f64) -> (f64, f64) {
        let Some(target) = self.target() else {
            return (self.heading.0 * max_step, self.heading.1 * max_step);
        };
        let (dx, dy) = (target.x - pos.x, target.y - pos.y);
        let dist = dx.hypot(dy);
        if dist < ARRIVAL_TOL {
            return (0.0, 0.0);
        }
        self.heading = (dx / dist, dy / dist);
        if dist <= max_step {
            (dx, dy)
        } else {
            (self.heading.0 * max_step, self.heading.1 * max_step)
        }
    }

    /// Like [`step_toward`](Self::step_toward), but a waypoint counts as
    /// visited as soon as the returned move lands on it, so a later detour
    /// never leads back to it.
    pub fn step_claiming(&mut self, pos: Point, max_step: f64) -> (f64, f64) {
        self.skip_reached(pos);
        let step = self.step_toward(pos, max_step);
        if self.arrived(Point::new(pos.x + step.0, pos.y + step.1)) {
            self.advance();
        }
        step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Travel,
    Scan,
}

/// Naive baseline: cruise the pattern at `travel_z`, and at each waypoint
/// descend to `scan_descend_z` before moving on.
#[derive(Debug, Clone)]
pub struct PatternPolicy {
    pattern: PatternConfig,
    motion: HeuristicParams,
    follower: WaypointFollower,
    phase: Phase,
}

impl PatternPolicy {
    pub fn new(
        pattern: PatternConfig,
        motion: HeuristicParams,
        follower: WaypointFollower,
    ) -> Self {
        Self {
            pattern,
            motion,
            follower,
            phase: Phase::Travel,
        }
    }

    pub fn waypoint_index(&self) -> usize {
        self.follower.index()
    }
}

impl Policy for PatternPolicy {
    fn act(&mut self, obs: &Observation) -> Action {
        let pos = Point::new(obs.pose.x, obs.pose.y);
        let z = obs.pose.z_hat;
        let scanning_done = z <= self.pattern.scan_descend_z + 1e-12;
        if self.phase == Phase::Travel && self.follower.arrived(pos) {
            self.phase = Phase::Scan;
        }
        if self.phase == Phase::Scan {
            if !scanning_done {
                let dz = (self.pattern.scan_descend_z - z).max(-self.motion.descend_rate);
                return Action::new(0.0, 0.0, dz);
            }
            self.phase = Phase::Travel;
            self.follower.advance();
        }
        let (dx, dy) = self.follower.step_toward(pos, self.motion.max_step);
        Action::new(dx, dy, self.pattern.travel_z - z)
    }
}
