//! Raster kernels shared by terrain generation and the perception path.
//!
//! Coordinates follow image convention: `x` is the column, `y` the row,
//! origin at the top-left, storage row-major.

mod components;
mod filter;
mod morphology;
mod pgm;

pub use components::{component_areas, largest_component, ComponentStats};
pub use filter::{gaussian_blur, gaussian_kernel, rescale_intensity, resize_area, threshold};
pub use morphology::{dilate, erode, morph_close};
pub use pgm::{read_pgm, read_pgm_binary, write_pgm, write_pgm_binary};

use crate::error::{Error, Result};

/// Grayscale raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidImage(format!(
                "pixel value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from values already known to be in range, clamping
    /// away rounding excursions.
    pub(crate) fn from_clamped(width: usize, height: usize, mut pixels: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, pixels.len());
        for v in &mut pixels {
            *v = v.clamp(0.0, 1.0);
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Binary raster; every element is exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidImage(format!(
                "bit value {bad} not in {{0, 1}}"
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        let mut img = Self::zeros(width, height);
        img.bits.fill(1);
        img
    }

    pub(crate) fn from_bits_unchecked(width: usize, height: usize, bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] == 1
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = u8::from(value);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn fraction_ones(&self) -> f64 {
        self.count_ones() as f64 / self.bits.len() as f64
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| f64::from(b)).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidImage(format!(
            "{width}x{height} image needs {} pixels, got {len}",
            width * height
        )));
    }
    Ok(())
}
