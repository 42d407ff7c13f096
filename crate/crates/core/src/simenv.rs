//! Episode state machine and the height-dependent observation model.
//!
//! The agent flies over the terrain at normalized height `z_hat` in
//! `[0, 1]`. Its camera footprint grows linearly with height; the footprint
//! is area-resampled to a fixed 25x25 view, blended with a sparse noise
//! image whose weight rises with height, and binarized.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{resize_area, BinaryImage, GrayImage};
use crate::seeds;
use crate::worldgen::TerrainMap;

pub const VIEW_SIDE: usize = 25;
/// Zoom factor at `z_hat = 1`.
pub const ZOOM_MAX: f64 = 3.5;
pub const MAX_STEPS: u32 = 300;
pub const SPAWN_Z: f64 = 0.5;
pub const SUCCESS_SOIL_FRACTION: f64 = 0.95;
pub const SUCCESS_MAX_Z: f64 = 0.10;

/// World pixels per view pixel at height `z_hat`.
pub fn zoom(z_hat: f64) -> f64 {
    1.0 + z_hat * (ZOOM_MAX - 1.0)
}

/// Edge of the square ground footprint, in world pixels.
pub fn footprint_side(z_hat: f64) -> usize {
    (VIEW_SIDE as f64 * zoom(z_hat)).round() as usize
}

/// `e^(z/θ) / (e^(z/θ) + 1)`. Drives both the noise weight and the
/// heuristic's explore probability.
pub fn visibility_sigmoid(z_hat: f64, theta: f64) -> f64 {
    1.0 / (1.0 + (-z_hat / theta).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl WorkspaceBounds {
    /// Pixel-center extent of a square grid: `[0, side - 1]` on both axes.
    pub fn for_side(side: usize) -> Self {
        let max = side as f64 - 1.0;
        Self {
            x_min: 0.0,
            x_max: max,
            y_min: 0.0,
            y_max: max,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub z_hat: f64,
    pub step_count: u32,
    /// Planar distance travelled, in pixels. Height changes are zoom, not travel.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Action {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Action {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self { dx, dy, dz }
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dz.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisibilityModel {
    /// Visibility factor θ; smaller means faster degradation with height.
    pub theta: f64,
    /// Standard deviation of the additive perturbation of the noise weight.
    pub nu_sigma: f64,
    /// Probability that a noise-image pixel is 1.
    pub noise_density: f64,
    /// Binarization level of the blended view.
    pub obs_threshold: f64,
}

impl Default for VisibilityModel {
    fn default() -> Self {
        Self {
            theta: 0.7,
            nu_sigma: 0.15,
            noise_density: 0.02,
            obs_threshold: 0.5,
        }
    }
}

impl VisibilityModel {
    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must be > 0, got {}",
                self.theta
            )));
        }
        if !(self.nu_sigma.is_finite() && self.nu_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nu_sigma must be >= 0, got {}",
                self.nu_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_density) {
            return Err(Error::InvalidParameter(format!(
                "noise_density must be in [0, 1], got {}",
                self.noise_density
            )));
        }
        if !self.obs_threshold.is_finite() {
            return Err(Error::InvalidParameter(
                "obs_threshold must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub pose: AgentState,
    pub view: BinaryImage,
    pub steps: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpisodeStatus {
    Running,
    TargetFound,
    Truncated,
    OutOfBounds,
}

impl EpisodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Running => "Running",
            Self::TargetFound => "TargetFound",
            Self::Truncated => "Truncated",
            Self::OutOfBounds => "OutOfBounds",
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Self::Running
    }
}

impl fmt::Display for EpisodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EpisodeStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Running" => Ok(Self::Running),
            "TargetFound" => Ok(Self::TargetFound),
            "Truncated" => Ok(Self::Truncated),
            "OutOfBounds" => Ok(Self::OutOfBounds),
            other => Err(Error::InvalidParameter(format!("unknown status `{other}`"))),
        }
    }
}

/// Noise-image weight: sigmoid of height plus `nu`, clamped to `[0, 1]`.
pub fn alpha_from_nu(z_hat: f64, theta: f64, nu: f64) -> f64 {
    (visibility_sigmoid(z_hat, theta) + nu).clamp(0.0, 1.0)
}

pub fn blend_alpha<R: Rng + ?Sized>(z_hat: f64, model: &VisibilityModel, rng: &mut R) -> f64 {
    let nu = if model.nu_sigma > 0.0 {
        Normal::new(0.0, model.nu_sigma)
            .expect("validated sigma")
            .sample(rng)
    } else {
        0.0
    };
    alpha_from_nu(z_hat, model.theta, nu)
}

/// Noise-free ground-truth view: the footprint around `(x, y)` (off-map
/// area counts as non-soil) area-resampled to 25x25.
pub fn truth_view(grid: &BinaryImage, x: f64, y: f64, z_hat: f64) -> GrayImage {
    let side = footprint_side(z_hat);
    let half = (side as f64 - 1.0) / 2.0;
    let x0 = (x - half).round() as i64;
    let y0 = (y - half).round() as i64;
    let (gw, gh) = (grid.width() as i64, grid.height() as i64);
    let mut crop = vec![0.0; side * side];
    for (row, dst) in crop.chunks_exact_mut(side).enumerate() {
        let gy = y0 + row as i64;
        if gy < 0 || gy >= gh {
            continue;
        }
        let src = &grid.bits()[(gy * gw) as usize..][..gw as usize];
        for (col, d) in dst.iter_mut().enumerate() {
            let gx = x0 + col as i64;
            if (0..gw).contains(&gx) {
                *d = f64::from(src[gx as usize]);
            }
        }
    }
    let crop = GrayImage::new(side, side, crop).expect("crop values are 0 or 1");
    resize_area(&crop, VIEW_SIDE, VIEW_SIDE).expect("view side is positive")
}

/// Renders the binarized view for a given noise weight `alpha`.
pub fn render_view_with_alpha<R: Rng + ?Sized>(
    grid: &BinaryImage,
    pose: (f64, f64, f64),
    model: &VisibilityModel,
    alpha: f64,
    rng: &mut R,
) -> BinaryImage {
    let (x, y, z_hat) = pose;
    let truth = truth_view(grid, x, y, z_hat);
    let bits = truth
        .pixels()
        .iter()
        .map(|&t| {
            let noise = if rng.gen_bool(model.noise_density) {
                1.0
            } else {
                0.0
            };
            u8::from((1.0 - alpha) * t + alpha * noise >= model.obs_threshold)
        })
        .collect();
    BinaryImage::new(VIEW_SIDE, VIEW_SIDE, bits).expect("bits are 0 or 1")
}

pub fn render_view<R: Rng + ?Sized>(
    grid: &BinaryImage,
    pose: (f64, f64, f64),
    model: &VisibilityModel,
    rng: &mut R,
) -> BinaryImage {
    let alpha = blend_alpha(pose.2, model, rng);
    render_view_with_alpha(grid, pose, model, alpha, rng)
}

/// The agent has reached a soil center: its own view is almost all soil and
/// it is flying low.
pub fn check_success(view: &BinaryImage, z_hat: f64) -> bool {
    view.fraction_ones() >= SUCCESS_SOIL_FRACTION && z_hat < SUCCESS_MAX_Z
}

/// One JSON-lines trace record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u32,
    pub x: f64,
    pub y: f64,
    pub z_hat: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub status: EpisodeStatus,
    pub view_soil_frac: f64,
}

/// A single search episode over a terrain.
#[derive(Debug, Clone)]
pub struct Env {
    map: Arc<TerrainMap>,
    model: VisibilityModel,
    bounds: WorkspaceBounds,
    max_steps: u32,
    state: AgentState,
    status: EpisodeStatus,
    view: BinaryImage,
    rng: ChaCha8Rng,
}

impl Env {
    pub fn new(map: Arc<TerrainMap>, model: VisibilityModel) -> Result<Self> {
        model.validate()?;
        let bounds = WorkspaceBounds::for_side(map.side());
        let (x, y) = bounds.center();
        Ok(Self {
            map,
            model,
            bounds,
            max_steps: MAX_STEPS,
            state: AgentState {
                x,
                y,
                z_hat: SPAWN_Z,
                step_count: 0,
                distance: 0.0,
            },
            status: EpisodeStatus::Running,
            view: BinaryImage::zeros(VIEW_SIDE, VIEW_SIDE),
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn with_max_steps(mut self, max_steps: u32) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Starts a fresh episode at the map center, half height.
    pub fn reset(&mut self, seed: u64) -> Observation {
        let (x, y) = self.bounds.center();
        self.state = AgentState {
            x,
            y,
            z_hat: SPAWN_Z,
            step_count: 0,
            distance: 0.0,
        };
        self.status = EpisodeStatus::Running;
        self.rng = seeds::rng(seed, "env");
        self.view = self.render();
        self.observation()
    }

    fn render(&mut self) -> BinaryImage {
        let pose = (self.state.x, self.state.y, self.state.z_hat);
        render_view(self.map.grid(), pose, &self.model, &mut self.rng)
    }

    fn observation(&self) -> Observation {
        Observation {
            pose: self.state,
            view: self.view.clone(),
            steps: self.state.step_count,
            distance: self.state.distance,
        }
    }

    pub fn step(&mut self, action: Action) -> Result<(Observation, EpisodeStatus)> {
        if self.status.is_terminal() {
            return Err(Error::EpisodeTerminated(self.status));
        }
        if !action.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite action {action:?}"
            )));
        }
        self.state.step_count += 1;
        let (nx, ny) = (self.state.x + action.dx, self.state.y + action.dy);
        if !self.bounds.contains(nx, ny) {
            self.status = EpisodeStatus::OutOfBounds;
            return Ok((self.observation(), self.status));
        }
        self.state.x = nx;
        self.state.y = ny;
        self.state.distance += action.dx.hypot(action.dy);
        self.state.z_hat = (self.state.z_hat + action.dz).clamp(0.0, 1.0);
        self.view = self.render();
        if self.state.step_count > self.max_steps {
            self.status = EpisodeStatus::Truncated;
        } else if check_success(&self.view, self.state.z_hat) {
            self.status = EpisodeStatus::TargetFound;
        }
        Ok((self.observation(), self.status))
    }

    pub fn status(&self) -> EpisodeStatus {
        self.status
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn view(&self) -> &BinaryImage {
        &self.view
    }

    pub fn bounds(&self) -> WorkspaceBounds {
        self.bounds
    }

    pub fn map(&self) -> &TerrainMap {
        &self.map
    }

    pub fn model(&self) -> &VisibilityModel {
        &self.model
    }

    /// Noise-free soil fraction under the current footprint.
    pub fn truth_soil_fraction(&self) -> f64 {
        truth_view(
            self.map.grid(),
            self.state.x,
            self.state.y,
            self.state.z_hat,
        )
        .mean()
    }

    pub fn trace_record(&self, action: Action) -> TraceRecord {
        TraceRecord {
            step: self.state.step_count,
            x: self.state.x,
            y: self.state.y,
            z_hat: self.state.z_hat,
            dx: action.dx,
            dy: action.dy,
            dz: action.dz,
            status: self.status,
            view_soil_frac: self.view.fraction_ones(),
        }
    }
}
