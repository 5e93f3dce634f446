//! Oriented corner keypoints and 256-bit binary descriptors.
//!
//! Detection runs a segment-test corner detector with non-maximum
//! suppression, buckets survivors on an 8x8 grid so features do not all
//! collapse onto the horizon line, and orients each keypoint by the
//! intensity centroid of its patch. Descriptors are binary intensity
//! comparisons sampled from a fixed pattern rotated by the keypoint
//! orientation, compared under Hamming distance.

mod fast;
mod pattern;

use std::path::Path;

use image::GrayImage;
use thiserror::Error;

use crate::config::FeatureConfig;

/// Keypoints and descriptor samples stay this many pixels away from the
/// image border: the rotated sampling pattern reaches radius < 19 and the
/// orientation patch has radius 15.
pub const PATCH_MARGIN: u32 = 19;

/// Minimum image side accepted by the detector.
pub const MIN_IMAGE_SIDE: u32 = 64;

/// Side of the grid used to spread keypoints over the image.
const GRID_SIDE: usize = 8;

/// Radius of the circular patch used for the intensity-centroid orientation.
const CENTROID_RADIUS: i32 = 15;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("image {width}x{height} is smaller than the {min}x{min} minimum")]
    ImageTooSmall { width: u32, height: u32, min: u32 },
    #[error("keypoint {index} at ({u:.1}, {v:.1}) is within the patch margin")]
    PatchOutOfBounds { index: usize, u: f64, v: f64 },
    #[error("unsupported image extension `{0}` (expected .pgm or .png)")]
    UnsupportedFormat(String),
    #[error("cannot load image: {0}")]
    Load(String),
}

/// An oriented corner keypoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keypoint {
    /// Column, in pixels; sub-pixel values allowed.
    pub u: f64,
    /// Row, in pixels.
    pub v: f64,
    /// Corner response; at least the detection threshold.
    pub response: f32,
    /// Orientation from the intensity centroid, radians in (-pi, pi].
    pub angle: f64,
    /// Pyramid level the corner was found on (0 = full resolution).
    pub octave: u32,
}

/// A 256-bit descriptor packed into four 64-bit words.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryDescriptor(pub [u64; 4]);

impl BinaryDescriptor {
    pub const BITS: u32 = 256;

    pub fn zero() -> Self {
        Self([0; 4])
    }

    pub fn ones() -> Self {
        Self([u64::MAX; 4])
    }

    #[inline]
    pub fn bit(&self, index: u32) -> bool {
        (self.0[(index / 64) as usize] >> (index % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, index: u32) {
        self.0[(index / 64) as usize] |= 1 << (index % 64);
    }

    pub fn flip_bit(&mut self, index: u32) {
        self.0[(index / 64) as usize] ^= 1 << (index % 64);
    }

    /// Population count of the XOR; a metric in [0, 256].
    #[inline]
    pub fn hamming(&self, other: &Self) -> u32 {
        (self.0[0] ^ other.0[0]).count_ones()
            + (self.0[1] ^ other.0[1]).count_ones()
            + (self.0[2] ^ other.0[2]).count_ones()
            + (self.0[3] ^ other.0[3]).count_ones()
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, word) in self.0.iter().enumerate() {
            out[i * 8..(i + 1) * 8].copy_from_slice(&word.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Self {
        let mut words = [0u64; 4];
        for (i, word) in words.iter_mut().enumerate() {
            *word = u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
        }
        Self(words)
    }
}

impl std::fmt::Debug for BinaryDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryDescriptor({:016x}{:016x}{:016x}{:016x})",
            self.0[3], self.0[2], self.0[1], self.0[0]
        )
    }
}

/// Convenience wrapper over [`BinaryDescriptor::hamming`].
pub fn hamming(a: &BinaryDescriptor, b: &BinaryDescriptor) -> u32 {
    a.hamming(b)
}

/// Loads an 8-bit grayscale raster; PGM and PNG are selected by extension.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage, FeatureError> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    if ext != "pgm" && ext != "png" {
        return Err(FeatureError::UnsupportedFormat(ext));
    }
    let img = image::open(path).map_err(|e| FeatureError::Load(format!("{}: {e}", path.display())))?;
    Ok(img.into_luma8())
}

/// Detects up to `n_feat` oriented keypoints, strongest response first.
///
/// Corners are bucketed on an 8x8 grid with a per-cell quota of
/// `ceil(n_feat / 64)`; overflow is refilled globally by response so strong
/// texture still fills the budget when parts of the image are empty.
pub fn detect(
    image: &GrayImage,
    n_feat: usize,
    cfg: &FeatureConfig,
) -> Result<Vec<Keypoint>, FeatureError> {
    let (width, height) = image.dimensions();
    if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
        return Err(FeatureError::ImageTooSmall {
            width,
            height,
            min: MIN_IMAGE_SIDE,
        });
    }
    if n_feat == 0 {
        return Ok(Vec::new());
    }

    // Detect per pyramid level, then map back to full-resolution pixels.
    // Orientation and description always sample the full-resolution image.
    let mut raw: Vec<Keypoint> = Vec::new();
    let mut level = image.clone();
    for octave in 0..cfg.octaves {
        if level.width() < MIN_IMAGE_SIDE || level.height() < MIN_IMAGE_SIDE {
            break;
        }
        let scale = (1u32 << octave) as f64;
        let offset = (scale - 1.0) * 0.5;
        for corner in fast::detect_corners(&level, cfg.fast_threshold, 3) {
            let u = corner.x as f64 * scale + offset;
            let v = corner.y as f64 * scale + offset;
            if !in_margin(width, height, u, v) {
                continue;
            }
            raw.push(Keypoint {
                u,
                v,
                response: corner.score,
                angle: 0.0,
                octave,
            });
        }
        if octave + 1 < cfg.octaves {
            level = halve(&level);
        }
    }

    // Grid bucketing: per-cell quota, overflow refilled globally.
    let quota = n_feat.div_ceil(GRID_SIDE * GRID_SIDE);
    let mut cells: Vec<Vec<Keypoint>> = vec![Vec::new(); GRID_SIDE * GRID_SIDE];
    for kp in raw {
        let cx = ((kp.u / width as f64) * GRID_SIDE as f64) as usize;
        let cy = ((kp.v / height as f64) * GRID_SIDE as f64) as usize;
        let cx = cx.min(GRID_SIDE - 1);
        let cy = cy.min(GRID_SIDE - 1);
        cells[cy * GRID_SIDE + cx].push(kp);
    }
    let mut selected = Vec::new();
    let mut overflow = Vec::new();
    for cell in &mut cells {
        cell.sort_by(keypoint_order);
        let take = cell.len().min(quota);
        selected.extend_from_slice(&cell[..take]);
        overflow.extend_from_slice(&cell[take..]);
    }
    if selected.len() > n_feat {
        selected.sort_by(keypoint_order);
        selected.truncate(n_feat);
    } else if selected.len() < n_feat && !overflow.is_empty() {
        overflow.sort_by(keypoint_order);
        let missing = n_feat - selected.len();
        selected.extend_from_slice(&overflow[..missing.min(overflow.len())]);
    }
    selected.sort_by(keypoint_order);

    for kp in &mut selected {
        kp.angle = intensity_centroid_angle(image, kp.u, kp.v);
    }
    Ok(selected)
}

/// Total order on keypoints: response descending, then row, column, octave.
fn keypoint_order(a: &Keypoint, b: &Keypoint) -> std::cmp::Ordering {
    b.response
        .partial_cmp(&a.response)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.v.partial_cmp(&b.v).unwrap_or(std::cmp::Ordering::Equal))
        .then(a.u.partial_cmp(&b.u).unwrap_or(std::cmp::Ordering::Equal))
        .then(a.octave.cmp(&b.octave))
}

fn in_margin(width: u32, height: u32, u: f64, v: f64) -> bool {
    let m = PATCH_MARGIN as f64;
    u >= m && v >= m && u < width as f64 - m && v < height as f64 - m
}

/// 2x2 box-filter downsample.
fn halve(image: &GrayImage) -> GrayImage {
    let (w, h) = image.dimensions();
    let (nw, nh) = (w / 2, h / 2);
    let mut out = GrayImage::new(nw, nh);
    for y in 0..nh {
        for x in 0..nw {
            let s = image.get_pixel(2 * x, 2 * y)[0] as u32
                + image.get_pixel(2 * x + 1, 2 * y)[0] as u32
                + image.get_pixel(2 * x, 2 * y + 1)[0] as u32
                + image.get_pixel(2 * x + 1, 2 * y + 1)[0] as u32;
            out.put_pixel(x, y, image::Luma([((s + 2) / 4) as u8]));
        }
    }
    out
}

/// Orientation by the intensity-centroid moment of the circular patch.
fn intensity_centroid_angle(image: &GrayImage, u: f64, v: f64) -> f64 {
    let cx = u.round() as i32;
    let cy = v.round() as i32;
    let stride = image.width() as usize;
    let data = image.as_raw();
    let mut m10 = 0i64;
    let mut m01 = 0i64;
    for dy in -CENTROID_RADIUS..=CENTROID_RADIUS {
        let span = ((CENTROID_RADIUS * CENTROID_RADIUS - dy * dy) as f64).sqrt() as i32;
        let row = (cy + dy) as usize * stride;
        for dx in -span..=span {
            let val = data[row + (cx + dx) as usize] as i64;
            m10 += dx as i64 * val;
            m01 += dy as i64 * val;
        }
    }
    if m10 == 0 && m01 == 0 {
        return 0.0;
    }
    (m01 as f64).atan2(m10 as f64)
}

/// Computes one 256-bit descriptor per keypoint by sampling the fixed test
/// pattern rotated by each keypoint's orientation.
pub fn describe(
    image: &GrayImage,
    keypoints: &[Keypoint],
) -> Result<Vec<BinaryDescriptor>, FeatureError> {
    let (width, height) = image.dimensions();
    let stride = width as usize;
    let data = image.as_raw();

    let mut out = Vec::with_capacity(keypoints.len());
    for (index, kp) in keypoints.iter().enumerate() {
        if !in_margin(width, height, kp.u, kp.v) {
            return Err(FeatureError::PatchOutOfBounds {
                index,
                u: kp.u,
                v: kp.v,
            });
        }
        let cx = kp.u.round() as i32;
        let cy = kp.v.round() as i32;
        let (sin, cos) = kp.angle.sin_cos();
        let mut desc = BinaryDescriptor::zero();
        for (bit, &(x1, y1, x2, y2)) in pattern::TEST_PAIRS.iter().enumerate() {
            let a = rotated_sample(data, stride, cx, cy, (x1, y1), sin, cos);
            let b = rotated_sample(data, stride, cx, cy, (x2, y2), sin, cos);
            if a < b {
                desc.set_bit(bit as u32);
            }
        }
        out.push(desc);
    }
    Ok(out)
}

#[inline]
fn rotated_sample(
    data: &[u8],
    stride: usize,
    cx: i32,
    cy: i32,
    offset: (i8, i8),
    sin: f64,
    cos: f64,
) -> u8 {
    let xf = offset.0 as f64;
    let yf = offset.1 as f64;
    let rx = (xf * cos - yf * sin).round() as i32;
    let ry = (xf * sin + yf * cos).round() as i32;
    data[(cy + ry) as usize * stride + (cx + rx) as usize]
}
