//! Deliberately naive reference implementations used to cross-check the
//! optimized kernels.

use amorph_core::imgproc::BinaryImage;
use rand::Rng;

pub fn random_image<R: Rng>(w: usize, h: usize, density: f64, rng: &mut R) -> BinaryImage {
    let bits = (0..w * h)
        .map(|_| u8::from(rng.gen_bool(density)))
        .collect();
    BinaryImage::new(w, h, bits).unwrap()
}

/// Largest 8-connected component by union-find over all pixel pairs.
/// Ties go to the component whose first pixel comes first in row-major
/// order. Returns `(area, centroid)`.
pub fn largest_component(img: &BinaryImage) -> Option<(usize, (f64, f64))> {
    let (w, h) = (img.width(), img.height());
    let mut parent: Vec<usize> = (0..w * h).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            for (dx, dy) in [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if img.get(nx, ny) {
                    let a = find(&mut parent, y * w + x);
                    let b = find(&mut parent, ny * w + nx);
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // root -> (first index, area, sum x, sum y)
    let mut groups: std::collections::BTreeMap<usize, (usize, usize, f64, f64)> =
        Default::default();
    for i in 0..w * h {
        if img.bits()[i] == 0 {
            continue;
        }
        let root = find(&mut parent, i);
        let g = groups.entry(root).or_insert((i, 0, 0.0, 0.0));
        g.1 += 1;
        g.2 += (i % w) as f64;
        g.3 += (i / w) as f64;
    }
    groups
        .values()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|&(_, area, sx, sy)| (area, (sx / area as f64, sy / area as f64)))
}

fn window(img: &BinaryImage, r: usize, all: bool) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryImage::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let ys = y.saturating_sub(r)..=(y + r).min(h - 1);
            let mut cells = ys
                .flat_map(|yy| (x.saturating_sub(r)..=(x + r).min(w - 1)).map(move |xx| (xx, yy)));
            let v = if all {
                cells.all(|(xx, yy)| img.get(xx, yy))
            } else {
                cells.any(|(xx, yy)| img.get(xx, yy))
            };
            out.set(x, y, v);
        }
    }
    out
}

/// Square-element dilation; outside the frame counts as background.
pub fn dilate(img: &BinaryImage, r: usize) -> BinaryImage {
    window(img, r, false)
}

/// Square-element erosion; outside the frame is ignored, i.e. foreground.
pub fn erode(img: &BinaryImage, r: usize) -> BinaryImage {
    window(img, r, true)
}

pub fn subset(a: &BinaryImage, b: &BinaryImage) -> bool {
    a.bits().iter().zip(b.bits()).all(|(&x, &y)| x <= y)
}
