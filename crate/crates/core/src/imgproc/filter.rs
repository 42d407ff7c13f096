use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Binarizes `img`: a pixel maps to 1 iff its value is `>= t`.
pub fn threshold(img: &GrayImage, t: f64) -> BinaryImage {
    let bits = img.pixels().iter().map(|&v| u8::from(v >= t)).collect();
    BinaryImage::from_bits_unchecked(img.width(), img.height(), bits)
}

/// Normalized 1-D discrete Gaussian of length `2 * radius + 1`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for w in &mut k {
        *w /= sum;
    }
    k
}

/// Separable Gaussian blur. Near the border the kernel is truncated to the
/// in-bounds taps and renormalized, so edges are not darkened.
pub fn gaussian_blur(img: &GrayImage, sigma: f64, radius: usize) -> Result<GrayImage> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    if radius == 0 {
        return Err(Error::InvalidParameter("blur radius must be >= 1".into()));
    }
    let kernel = gaussian_kernel(sigma, radius);
    let (w, h) = (img.width(), img.height());
    let rows = convolve_rows(img.pixels(), w, h, &kernel);
    let out = convolve_cols(&rows, w, h, &kernel);
    Ok(GrayImage::from_clamped(w, h, out))
}

/// Sum of the kernel taps that land inside `0..len` for every position.
fn border_norms(len: usize, kernel: &[f64]) -> Vec<f64> {
    let r = kernel.len() / 2;
    (0..len)
        .map(|p| {
            kernel
                .iter()
                .enumerate()
                .filter(|(j, _)| {
                    let q = p as isize + *j as isize - r as isize;
                    q >= 0 && (q as usize) < len
                })
                .map(|(_, w)| w)
                .sum()
        })
        .collect()
}

/// Index range `[lo, hi)` of positions `p` for which `p + offset` is in `0..len`.
fn valid_span(len: usize, offset: isize) -> (usize, usize) {
    let lo = (-offset).max(0) as usize;
    let hi = (len as isize - offset).clamp(0, len as isize) as usize;
    (lo.min(hi), hi)
}

fn convolve_rows(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = kernel.len() / 2;
    let norms = border_norms(w, kernel);
    let mut out = vec![0.0; w * h];
    for (row, dst) in src.chunks_exact(w).zip(out.chunks_exact_mut(w)) {
        for (j, &weight) in kernel.iter().enumerate() {
            let offset = j as isize - r as isize;
            let (lo, hi) = valid_span(w, offset);
            let shifted = &row[(lo as isize + offset) as usize..(hi as isize + offset) as usize];
            for (d, s) in dst[lo..hi].iter_mut().zip(shifted) {
                *d += weight * s;
            }
        }
        for (d, n) in dst.iter_mut().zip(&norms) {
            *d /= n;
        }
    }
    out
}

fn convolve_cols(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = kernel.len() / 2;
    let norms = border_norms(h, kernel);
    let mut out = vec![0.0; w * h];
    for (y, dst) in out.chunks_exact_mut(w).enumerate() {
        for (j, &weight) in kernel.iter().enumerate() {
            let q = y as isize + j as isize - r as isize;
            if q < 0 || q as usize >= h {
                continue;
            }
            let row = &src[q as usize * w..][..w];
            for (d, s) in dst.iter_mut().zip(row) {
                *d += weight * s;
            }
        }
        let n = norms[y];
        for d in dst.iter_mut() {
            *d /= n;
        }
    }
    out
}

/// Affine stretch of the value range onto `[0, 1]`. A constant image has no
/// range to stretch and maps to all zeros.
pub fn rescale_intensity(img: &GrayImage) -> GrayImage {
    let (lo, hi) = img.min_max();
    let range = hi - lo;
    let pixels = if range > 0.0 {
        img.pixels().iter().map(|&v| (v - lo) / range).collect()
    } else {
        vec![0.0; img.pixels().len()]
    };
    GrayImage::from_clamped(img.width(), img.height(), pixels)
}

/// Per output cell: first input index and the normalized overlap weights.
fn area_weights(in_len: usize, out_len: usize) -> Vec<(usize, Vec<f64>)> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|j| {
            let a = j as f64 * scale;
            let b = (j + 1) as f64 * scale;
            let first = a.floor() as usize;
            let last = (b.ceil() as usize).min(in_len);
            let weights = (first..last)
                .map(|i| (b.min((i + 1) as f64) - a.max(i as f64)).max(0.0) / scale)
                .collect();
            (first, weights)
        })
        .collect()
}

/// Area-averaging resample: each output pixel is the mean of the input
/// region it covers, with fractional pixels weighted by overlap.
pub fn resize_area(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParameter(format!(
            "resize target must be positive, got {out_w}x{out_h}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    if (w, h) == (out_w, out_h) {
        return Ok(img.clone());
    }
    let xw = area_weights(w, out_w);
    let yw = area_weights(h, out_h);

    let mut horiz = vec![0.0; out_w * h];
    for (row, dst) in img
        .pixels()
        .chunks_exact(w)
        .zip(horiz.chunks_exact_mut(out_w))
    {
        for (d, (first, weights)) in dst.iter_mut().zip(&xw) {
            *d = weights
                .iter()
                .zip(&row[*first..])
                .map(|(wt, v)| wt * v)
                .sum();
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for (dst, (first, weights)) in out.chunks_exact_mut(out_w).zip(&yw) {
        for (k, wt) in weights.iter().enumerate() {
            let src = &horiz[(first + k) * out_w..][..out_w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    Ok(GrayImage::from_clamped(out_w, out_h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, px: &[f64]) -> GrayImage {
        GrayImage::new(w, h, px.to_vec()).unwrap()
    }

    /// Direct 2-D convolution with the truncated, renormalized kernel.
    fn blur_oracle(img: &GrayImage, sigma: f64, radius: usize) -> Vec<f64> {
        let r = radius as isize;
        let (w, h) = (img.width() as isize, img.height() as isize);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let (mut acc, mut norm) = (0.0, 0.0);
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (qx, qy) = (x + dx, y + dy);
                        if qx < 0 || qy < 0 || qx >= w || qy >= h {
                            continue;
                        }
                        let wt = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                        acc += wt * img.get(qx as usize, qy as usize);
                        norm += wt;
                    }
                }
                out.push(acc / norm);
            }
        }
        out
    }

    #[test]
    fn threshold_is_inclusive_at_t() {
        assert_eq!(threshold(&gray(1, 1, &[0.4]), 0.5).bits(), &[0]);
        assert_eq!(threshold(&gray(1, 1, &[0.5]), 0.5).bits(), &[1]);
    }

    #[test]
    fn blur_rejects_bad_parameters() {
        let img = GrayImage::filled(4, 4, 0.5).unwrap();
        assert!(gaussian_blur(&img, 0.0, 2).is_err());
        assert!(gaussian_blur(&img, -1.0, 2).is_err());
        assert!(gaussian_blur(&img, 1.0, 0).is_err());
    }

    #[test]
    fn blur_keeps_constant_images() {
        let img = GrayImage::filled(13, 7, 0.37).unwrap();
        let out = gaussian_blur(&img, 2.0, 5).unwrap();
        assert!(out.pixels().iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn blur_impulse_matches_center_kernel_weight() {
        let mut px = vec![0.0; 81];
        px[40] = 1.0;
        let out = gaussian_blur(&gray(9, 9, &px), 1.0, 2).unwrap();
        // (0,0) weight of the normalized 5x5 discrete kernel, computed directly
        let total: f64 = (-2..=2)
            .flat_map(|dy: i32| (-2..=2).map(move |dx: i32| (dx, dy)))
            .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / 2.0).exp())
            .sum();
        assert!((out.get(4, 4) - 1.0 / total).abs() < 1e-12);
    }

    #[test]
    fn blur_matches_direct_convolution() {
        let (w, h) = (20, 16);
        let px: Vec<f64> = (0..w * h)
            .map(|i| ((i * 7 + i / w * 13) % 10) as f64 / 10.0)
            .collect();
        let img = gray(w, h, &px);
        let out = gaussian_blur(&img, 1.3, 3).unwrap();
        let oracle = blur_oracle(&img, 1.3, 3);
        for (a, b) in out.pixels().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_preserves_interior_mass_under_reflection_padding() {
        let (w, h, r) = (17, 11, 4);
        let px: Vec<f64> = (0..w * h).map(|i| ((i * 31) % 17) as f64 / 16.0).collect();
        let img = gray(w, h, &px);
        let padded = reflect_pad(&img, r);
        let blurred = gaussian_blur(&padded, 1.7, r).unwrap();
        let inner = |im: &GrayImage| -> f64 {
            (r..r + h)
                .flat_map(|y| (r..r + w).map(move |x| (x, y)))
                .map(|(x, y)| im.get(x, y))
                .sum()
        };
        assert!((inner(&blurred) - inner(&padded)).abs() < 1e-9);
    }

    fn reflect_pad(img: &GrayImage, pad: usize) -> GrayImage {
        let (w, h) = (img.width() as isize, img.height() as isize);
        let p = pad as isize;
        let reflect = |v: isize, n: isize| {
            if v < 0 {
                -v - 1
            } else if v >= n {
                2 * n - v - 1
            } else {
                v
            }
        };
        let mut px = Vec::new();
        for y in -p..h + p {
            for x in -p..w + p {
                px.push(img.get(reflect(x, w) as usize, reflect(y, h) as usize));
            }
        }
        gray((w + 2 * p) as usize, (h + 2 * p) as usize, &px)
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(
            rescale_intensity(&gray(2, 1, &[0.2, 0.6])).pixels(),
            &[0.0, 1.0]
        );
        let c = rescale_intensity(&GrayImage::filled(3, 3, 0.7).unwrap());
        assert!(c.pixels().iter().all(|&v| v == 0.0));
        let three = rescale_intensity(&gray(3, 1, &[0.2, 0.4, 0.6]));
        let expect = [0.0, (0.4 - 0.2) / (0.6 - 0.2), 1.0];
        for (a, b) in three.pixels().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((three.pixels()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resize_examples() {
        let r = resize_area(&gray(2, 2, &[1.0, 1.0, 0.0, 0.0]), 1, 1).unwrap();
        assert_eq!(r.pixels(), &[0.5]);
        let img = gray(3, 2, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        assert_eq!(resize_area(&img, 3, 2).unwrap(), img);
        let checker: Vec<f64> = (0..16).map(|i| ((i % 4 + i / 4) % 2) as f64).collect();
        let r = resize_area(&gray(4, 4, &checker), 2, 2).unwrap();
        // each 2x2 block holds two ones and two zeros
        assert!(r.pixels().iter().all(|v| (v - 0.5).abs() < 1e-12));
        assert!(resize_area(&img, 0, 2).is_err());
    }

    #[test]
    fn resize_fractional_cover_weights_by_overlap() {
        // 3 -> 2: first output covers pixel 0 fully and half of pixel 1
        let r = resize_area(&gray(3, 1, &[1.0, 0.0, 0.0]), 2, 1).unwrap();
        assert!((r.pixels()[0] - 1.0 / 1.5).abs() < 1e-12);
        assert!(r.pixels()[1].abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn threshold_is_identity_on_binary(bits in proptest::collection::vec(0u8..2, 1..64), t in 1e-9f64..=1.0) {
            let b = BinaryImage::new(bits.len(), 1, bits).unwrap();
            prop_assert_eq!(threshold(&b.to_gray(), t), b);
        }

        #[test]
        fn blur_stays_within_input_range(
            px in proptest::collection::vec(0.0f64..=1.0, 48),
            sigma in 0.3f64..4.0,
            radius in 1usize..6,
        ) {
            let img = gray(8, 6, &px);
            let (lo, hi) = img.min_max();
            let out = gaussian_blur(&img, sigma, radius).unwrap();
            for &v in out.pixels() {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }

        #[test]
        fn resize_preserves_mean_on_even_division(
            px in proptest::collection::vec(0.0f64..=1.0, 72),
            dims in prop::sample::select(vec![(1usize, 1usize), (2, 3), (3, 2), (6, 6), (4, 1), (12, 2)]),
        ) {
            let img = gray(12, 6, &px);
            let out = resize_area(&img, dims.0, dims.1).unwrap();
            prop_assert!((out.mean() - img.mean()).abs() < 1e-9);
        }
    }
}
