//! Square-element dilation, erosion and closing.
//!
//! Dilation treats the area outside the frame as background and erosion
//! treats it as foreground. The two are adjoint on the frame, so their
//! composition is a true closing: extensive and idempotent.

use super::BinaryImage;

/// Sliding-window test along one axis. `line` is read with stride `stride`.
/// With `all = false` a cell is set if any in-window cell is set (dilation),
/// with `all = true` only if every in-frame cell is set (erosion).
fn window_pass(src: &[u8], dst: &mut [u8], len: usize, stride: usize, radius: usize, all: bool) {
    // prefix[i] = number of ones among the first i cells
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(0usize);
    for i in 0..len {
        prefix.push(prefix[i] + src[i * stride] as usize);
    }
    for i in 0..len {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        let ones = prefix[hi] - prefix[lo];
        dst[i * stride] = u8::from(if all { ones == hi - lo } else { ones > 0 });
    }
}

fn separable(img: &BinaryImage, radius: usize, all: bool) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut tmp = vec![0u8; w * h];
    for y in 0..h {
        window_pass(&img.bits()[y * w..], &mut tmp[y * w..], w, 1, radius, all);
    }
    let mut out = vec![0u8; w * h];
    for x in 0..w {
        window_pass(&tmp[x..], &mut out[x..], h, w, radius, all);
    }
    BinaryImage::from_bits_unchecked(w, h, out)
}

/// Dilation by a `(2r+1)` square.
pub fn dilate(img: &BinaryImage, radius: usize) -> BinaryImage {
    separable(img, radius, false)
}

/// Erosion by a `(2r+1)` square.
pub fn erode(img: &BinaryImage, radius: usize) -> BinaryImage {
    separable(img, radius, true)
}

/// Closing (dilation then erosion) by a `(2r+1)` square; fills holes and
/// gaps narrower than the element.
pub fn morph_close(img: &BinaryImage, radius: usize) -> BinaryImage {
    erode(&dilate(img, radius), radius)
}
