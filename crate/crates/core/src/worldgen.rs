//! Procedural soil terrains: white noise, Gaussian blur, intensity stretch,
//! threshold, then a closing to fill holes in the soil patches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{
    gaussian_blur, morph_close, rescale_intensity, threshold, BinaryImage, GrayImage,
};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    /// Terrain edge length in pixels.
    pub side: usize,
    pub blur_sigma: f64,
    pub blur_radius: usize,
    /// Fixed binarization level on the stretched field. When unset, each
    /// attempt draws a target abundance uniformly from `abundance_band` and
    /// thresholds at the matching quantile.
    pub soil_threshold: Option<f64>,
    pub close_radius: usize,
    /// Accepted soil fraction, inclusive on both ends.
    pub abundance_band: (f64, f64),
    pub max_attempts: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            side: 1000,
            blur_sigma: 30.0,
            blur_radius: 90,
            soil_threshold: None,
            close_radius: 2,
            abundance_band: (0.02, 0.40),
            max_attempts: 20,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let (lo, hi) = self.abundance_band;
        if self.side < 100 {
            return bad(format!("side must be >= 100, got {}", self.side));
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma > 0.0) {
            return bad(format!(
                "blur_sigma must be positive, got {}",
                self.blur_sigma
            ));
        }
        if self.blur_radius == 0 || self.close_radius == 0 {
            return bad("blur_radius and close_radius must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return bad(format!(
                "abundance_band must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})"
            ));
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be >= 1".into());
        }
        if let Some(t) = self.soil_threshold {
            if !t.is_finite() {
                return bad(format!("soil_threshold must be finite, got {t}"));
            }
        }
        Ok(())
    }
}

/// A generated (or loaded) terrain. 1 = soil.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainMap {
    grid: BinaryImage,
    soil_fraction: f64,
    seed: u64,
    params: GenParams,
}

impl TerrainMap {
    /// Wraps an existing square grid, e.g. one read from disk.
    pub fn from_grid(grid: BinaryImage, seed: u64, params: GenParams) -> Result<Self> {
        if grid.width() != grid.height() {
            return Err(Error::InvalidParameter(format!(
                "terrain must be square, got {}x{}",
                grid.width(),
                grid.height()
            )));
        }
        if !center_is_clear(&grid) {
            return Err(Error::InvalidParameter(
                "terrain center (agent spawn) must not be soil".into(),
            ));
        }
        let params = GenParams {
            side: grid.width(),
            ..params
        };
        Ok(Self {
            soil_fraction: grid.fraction_ones(),
            grid,
            seed,
            params,
        })
    }

    pub fn grid(&self) -> &BinaryImage {
        &self.grid
    }

    pub fn side(&self) -> usize {
        self.grid.width()
    }

    pub fn soil_fraction(&self) -> f64 {
        self.soil_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &GenParams {
        &self.params
    }
}

/// Index range of the pixels nearest the grid center: one pixel for odd
/// sides, the middle two for even sides.
pub fn center_span(side: usize) -> std::ops::RangeInclusive<usize> {
    if side % 2 == 1 {
        side / 2..=side / 2
    } else {
        side / 2 - 1..=side / 2
    }
}

fn center_is_clear(grid: &BinaryImage) -> bool {
    let span = center_span(grid.width());
    span.clone().all(|y| span.clone().all(|x| !grid.get(x, y)))
}

/// Blurred, stretched white-noise field for one attempt seed.
pub fn intensity_field(params: &GenParams, rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    let n = params.side * params.side;
    let noise: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let noise = GrayImage::new(params.side, params.side, noise)?;
    let blurred = gaussian_blur(&noise, params.blur_sigma, params.blur_radius)?;
    Ok(rescale_intensity(&blurred))
}

/// Level `v` such that a `target` fraction of `field` is `>= v`.
fn quantile_level(field: &GrayImage, target: f64) -> f64 {
    let mut values = field.pixels().to_vec();
    let n = values.len();
    let k = ((target * n as f64).round() as usize).clamp(1, n);
    let (_, v, _) = values.select_nth_unstable_by(n - k, f64::total_cmp);
    *v
}

/// Generates a terrain. Deterministic in `(params, seed)`; attempts that
/// miss the abundance band or put soil under the spawn point are retried
/// with derived sub-seeds.
pub fn generate(params: &GenParams, seed: u64) -> Result<TerrainMap> {
    params.validate()?;
    let (lo, hi) = params.abundance_band;
    for attempt in 0..params.max_attempts {
        let sub_seed = seeds::derive(seed, &[b"attempt", &attempt.to_le_bytes()]);
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let target = rng.gen_range(lo..=hi);
        let field = intensity_field(params, &mut rng)?;
        let level = params
            .soil_threshold
            .unwrap_or_else(|| quantile_level(&field, target));
        let grid = morph_close(&threshold(&field, level), params.close_radius);
        let fraction = grid.fraction_ones();
        if (lo..=hi).contains(&fraction) && center_is_clear(&grid) {
            return Ok(TerrainMap {
                grid,
                soil_fraction: fraction,
                seed,
                params: params.clone(),
            });
        }
    }
    Err(Error::GenerationExhausted {
        attempts: params.max_attempts,
        seed,
    })
}

/// Integer pixel rectangle; may extend past the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: i64,
    pub y: i64,
    pub width: u64,
    pub height: u64,
}

/// Soil fraction inside `rect` after clipping to the grid; 0 when nothing
/// of the rectangle is on the grid.
pub fn soil_fraction_at(map: &TerrainMap, rect: PixelRect) -> f64 {
    let side = map.side() as i64;
    let x0 = rect.x.clamp(0, side);
    let y0 = rect.y.clamp(0, side);
    let x1 = (rect.x + rect.width as i64).clamp(0, side);
    let y1 = (rect.y + rect.height as i64).clamp(0, side);
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let grid = map.grid();
    let ones: usize = (y0..y1)
        .map(|y| {
            let row = &grid.bits()[(y * side + x0) as usize..(y * side + x1) as usize];
            row.iter().map(|&b| b as usize).sum::<usize>()
        })
        .sum();
    ones as f64 / ((x1 - x0) * (y1 - y0)) as f64
}
