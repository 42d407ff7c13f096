use super::BinaryImage;

/// Statistics of one 8-connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    /// Pixel count.
    pub area: usize,
    /// Mean pixel position `(x̄, ȳ)` in image coordinates.
    pub centroid: (f64, f64),
    /// Inclusive bounds `(min_x, min_y, max_x, max_y)`.
    pub bbox: (usize, usize, usize, usize),
    /// The component alone.
    pub mask: BinaryImage,
}

struct Blob {
    area: usize,
    sum_x: u64,
    sum_y: u64,
    bbox: (usize, usize, usize, usize),
}

/// Labels 8-connected components in row-major discovery order. Returns the
/// per-pixel label (0 = background, k = k-th component) and blob summaries.
fn label(img: &BinaryImage) -> (Vec<u32>, Vec<Blob>) {
    let (w, h) = (img.width(), img.height());
    let bits = img.bits();
    let mut labels = vec![0u32; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if bits[start] == 0 || labels[start] != 0 {
            continue;
        }
        let id = blobs.len() as u32 + 1;
        let (sx, sy) = (start % w, start / w);
        let mut blob = Blob {
            area: 0,
            sum_x: 0,
            sum_y: 0,
            bbox: (sx, sy, sx, sy),
        };
        labels[start] = id;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            blob.area += 1;
            blob.sum_x += x as u64;
            blob.sum_y += y as u64;
            blob.bbox = (
                blob.bbox.0.min(x),
                blob.bbox.1.min(y),
                blob.bbox.2.max(x),
                blob.bbox.3.max(y),
            );
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let n = ny * w + nx;
                    if bits[n] == 1 && labels[n] == 0 {
                        labels[n] = id;
                        stack.push(n);
                    }
                }
            }
        }
        blobs.push(blob);
    }
    (labels, blobs)
}

/// Areas of all 8-connected components, in row-major discovery order.
pub fn component_areas(img: &BinaryImage) -> Vec<usize> {
    label(img).1.into_iter().map(|b| b.area).collect()
}

/// The largest 8-connected component, or `None` for an empty image. Equal
/// areas resolve to the component found first in row-major scan order.
pub fn largest_component(img: &BinaryImage) -> Option<ComponentStats> {
    let (labels, blobs) = label(img);
    let (best, blob) =
        blobs
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, &Blob)>, (i, b)| match acc {
                Some((_, cur)) if cur.area >= b.area => acc,
                _ => Some((i, b)),
            })?;
    let id = best as u32 + 1;
    let mask_bits = labels.iter().map(|&l| u8::from(l == id)).collect();
    let area = blob.area as f64;
    Some(ComponentStats {
        area: blob.area,
        centroid: (blob.sum_x as f64 / area, blob.sum_y as f64 / area),
        bbox: blob.bbox,
        mask: BinaryImage::from_bits_unchecked(img.width(), img.height(), mask_bits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fill_rect(img: &mut BinaryImage, x0: usize, y0: usize, w: usize, h: usize) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                img.set(x, y, true);
            }
        }
    }

    #[test]
    fn picks_larger_of_two_blocks() {
        let mut img = BinaryImage::zeros(12, 12);
        fill_rect(&mut img, 0, 0, 2, 2);
        fill_rect(&mut img, 6, 5, 3, 3);
        let c = largest_component(&img).unwrap();
        assert_eq!(c.area, 9);
        assert_eq!(c.centroid, (7.0, 6.0));
        assert_eq!(c.bbox, (6, 5, 8, 7));
        assert_eq!(c.mask.count_ones(), 9);
    }

    #[test]
    fn empty_image_has_no_component() {
        assert!(largest_component(&BinaryImage::zeros(25, 25)).is_none());
    }

    #[test]
    fn full_view_centroid_is_center() {
        let c = largest_component(&BinaryImage::ones(25, 25)).unwrap();
        assert_eq!(c.area, 625);
        assert_eq!(c.centroid, (12.0, 12.0));
    }

    #[test]
    fn diagonal_neighbours_are_connected() {
        let mut img = BinaryImage::zeros(4, 4);
        img.set(0, 0, true);
        img.set(1, 1, true);
        img.set(2, 2, true);
        assert_eq!(largest_component(&img).unwrap().area, 3);
        assert_eq!(component_areas(&img), vec![3]);
    }

    #[test]
    fn ties_go_to_first_in_scan_order() {
        let mut img = BinaryImage::zeros(10, 10);
        fill_rect(&mut img, 6, 1, 2, 2);
        fill_rect(&mut img, 1, 6, 2, 2);
        let c = largest_component(&img).unwrap();
        assert_eq!(c.centroid, (6.5, 1.5));
    }

    proptest! {
        #[test]
        fn rectangle_centroid_is_geometric_center(
            x0 in 0usize..20, y0 in 0usize..20, w in 1usize..6, h in 1usize..6,
        ) {
            let mut img = BinaryImage::zeros(25, 25);
            fill_rect(&mut img, x0, y0, w, h);
            let c = largest_component(&img).unwrap();
            prop_assert_eq!(c.area, w * h);
            prop_assert!((c.centroid.0 - (x0 as f64 + (w as f64 - 1.0) / 2.0)).abs() < 1e-12);
            prop_assert!((c.centroid.1 - (y0 as f64 + (h as f64 - 1.0) / 2.0)).abs() < 1e-12);
        }

        #[test]
        fn centroid_inside_bbox_and_mask_matches_area(
            bits in proptest::collection::vec(proptest::bool::weighted(0.4), 625),
        ) {
            let img = BinaryImage::new(25, 25, bits.into_iter().map(u8::from).collect()).unwrap();
            if let Some(c) = largest_component(&img) {
                let (x0, y0, x1, y1) = c.bbox;
                prop_assert!(c.centroid.0 >= x0 as f64 && c.centroid.0 <= x1 as f64);
                prop_assert!(c.centroid.1 >= y0 as f64 && c.centroid.1 <= y1 as f64);
                prop_assert_eq!(c.mask.count_ones(), c.area);
            }
        }
    }
}
