//! Segment-test corner detection with non-maximum suppression.

use image::GrayImage;

/// Bresenham circle of radius 3 around the candidate pixel, clockwise from
/// 12 o'clock.
const CIRCLE: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// Minimum contiguous arc length for a corner.
const ARC: usize = 9;

pub(crate) struct Corner {
    pub x: u32,
    pub y: u32,
    pub score: f32,
}

#[inline]
fn ring(image: &GrayImage, stride: usize, x: u32, y: u32) -> [i16; 16] {
    let data = image.as_raw();
    let mut out = [0i16; 16];
    for (k, (dx, dy)) in CIRCLE.iter().enumerate() {
        let idx = (y as i32 + dy) as usize * stride + (x as i32 + dx) as usize;
        out[k] = data[idx] as i16;
    }
    out
}

/// True when at least `ARC` contiguous ring pixels are all brighter than
/// `center + t` or all darker than `center - t`.
fn is_corner(ring: &[i16; 16], center: i16, t: i16) -> bool {
    let hi = center + t;
    let lo = center - t;

    let mut run_bright = 0usize;
    let mut run_dark = 0usize;
    let mut best_bright = 0usize;
    let mut best_dark = 0usize;
    // Walk the ring twice to handle wrap-around runs.
    for k in 0..32 {
        let v = ring[k % 16];
        if v > hi {
            run_bright += 1;
            best_bright = best_bright.max(run_bright);
        } else {
            run_bright = 0;
        }
        if v < lo {
            run_dark += 1;
            best_dark = best_dark.max(run_dark);
        } else {
            run_dark = 0;
        }
        if best_bright >= ARC || best_dark >= ARC {
            return true;
        }
    }
    false
}

/// Corner response: the largest threshold at which the segment test still
/// fires. Always >= the detection threshold for a detected corner.
fn score(ring: &[i16; 16], center: i16, t: i16) -> f32 {
    let mut lo = t;
    let mut hi = 255i16;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if is_corner(ring, center, mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as f32
}

/// Detects corners with a margin of `border` pixels and suppresses
/// non-maxima over each 3x3 neighborhood. Plateau ties keep the first
/// corner in row-major order so the result is deterministic.
pub(crate) fn detect_corners(image: &GrayImage, threshold: u8, border: u32) -> Vec<Corner> {
    let (width, height) = image.dimensions();
    let border = border.max(3);
    if width <= 2 * border || height <= 2 * border {
        return Vec::new();
    }
    let stride = width as usize;
    let data = image.as_raw();
    let t = threshold as i16;

    let mut scores = vec![0.0f32; (width * height) as usize];
    let mut candidates = Vec::new();
    for y in border..height - border {
        for x in border..width - border {
            let center = data[y as usize * stride + x as usize] as i16;
            let r = ring(image, stride, x, y);
            // Cheap cardinal pre-test: any 9-run covers at least two of the
            // four cardinal ring pixels.
            let cardinals = [r[0], r[4], r[8], r[12]];
            let bright = cardinals.iter().filter(|&&v| v > center + t).count();
            let dark = cardinals.iter().filter(|&&v| v < center - t).count();
            if bright < 2 && dark < 2 {
                continue;
            }
            if is_corner(&r, center, t) {
                let s = score(&r, center, t);
                scores[y as usize * stride + x as usize] = s;
                candidates.push((x, y, s));
            }
        }
    }

    let mut corners = Vec::new();
    for (x, y, s) in candidates {
        let mut keep = true;
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = x as i32 + dx;
                let ny = y as i32 + dy;
                let n = scores[ny as usize * stride + nx as usize];
                let later = dy > 0 || (dy == 0 && dx > 0);
                if n > s || (n == s && !later) {
                    keep = false;
                    break;
                }
            }
            if !keep {
                break;
            }
        }
        if keep {
            corners.push(Corner { x, y, score: s });
        }
    }
    corners
}
