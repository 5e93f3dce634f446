//! Metric stereo geometry: rectified matching, triangulation, the depth
//! window, cross-frame matching and robust PnP.

mod pnp;

pub use pnp::{pnp_ransac, PnpError, PnpResult};

use nalgebra::Vector3;
use thiserror::Error;

use crate::camera::CameraCalibration;
use crate::config::MatchingConfig;
use crate::features::{BinaryDescriptor, Keypoint};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("stereo match has non-positive disparity {0}")]
    ZeroDisparity(f64),
    #[error("parallel lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// One rectified stereo correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoMatch {
    pub left: usize,
    pub right: usize,
    /// `u_left - u_right`, always positive for a kept match.
    pub disparity: f64,
    pub distance: u32,
}

/// A triangulated point in the left-camera frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Landmark3D {
    pub position: Vector3<f64>,
    /// Index into the parallel list this landmark was triangulated from.
    pub source: usize,
}

impl Landmark3D {
    pub fn depth(&self) -> f64 {
        self.position.z
    }
}

/// A mutual-best match between query and candidate left-image descriptors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossFrameCorrespondence {
    pub query: usize,
    pub candidate: usize,
    pub distance: u32,
}

/// Brute-force rectified stereo matching.
///
/// For every left keypoint the best right keypoint within the row tolerance
/// and Hamming threshold is found; a match is kept only when it is also the
/// best left keypoint for that right keypoint (mutual best) and has positive
/// disparity, so each keypoint appears in at most one match per side.
/// Hamming ties break toward the lower index.
pub fn stereo_match(
    left_kps: &[Keypoint],
    left_descs: &[BinaryDescriptor],
    right_kps: &[Keypoint],
    right_descs: &[BinaryDescriptor],
    cfg: &MatchingConfig,
) -> Vec<StereoMatch> {
    assert_eq!(left_kps.len(), left_descs.len());
    assert_eq!(right_kps.len(), right_descs.len());
    if left_kps.is_empty() || right_kps.is_empty() {
        return Vec::new();
    }

    let admissible = |li: usize, ri: usize| -> Option<u32> {
        let l = &left_kps[li];
        let r = &right_kps[ri];
        if (l.v - r.v).abs() > cfg.stereo_row_tolerance {
            return None;
        }
        if l.u - r.u <= 0.0 {
            return None;
        }
        let d = left_descs[li].hamming(&right_descs[ri]);
        (d <= cfg.stereo_max_hamming).then_some(d)
    };

    let best_right: Vec<Option<(usize, u32)>> = (0..left_kps.len())
        .map(|li| {
            let mut best: Option<(usize, u32)> = None;
            for ri in 0..right_kps.len() {
                if let Some(d) = admissible(li, ri) {
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((ri, d));
                    }
                }
            }
            best
        })
        .collect();
    let best_left: Vec<Option<(usize, u32)>> = (0..right_kps.len())
        .map(|ri| {
            let mut best: Option<(usize, u32)> = None;
            for li in 0..left_kps.len() {
                if let Some(d) = admissible(li, ri) {
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((li, d));
                    }
                }
            }
            best
        })
        .collect();

    let mut matches = Vec::new();
    for (li, best) in best_right.iter().enumerate() {
        if let Some((ri, d)) = *best {
            if best_left[ri].map(|(i, _)| i) == Some(li) {
                matches.push(StereoMatch {
                    left: li,
                    right: ri,
                    disparity: left_kps[li].u - right_kps[ri].u,
                    distance: d,
                });
            }
        }
    }
    matches
}

/// Depth from disparity: `Z = f * b / d`, then the pinhole back-projection
/// of the left pixel.
pub fn triangulate(
    m: &StereoMatch,
    left_kps: &[Keypoint],
    cal: &CameraCalibration,
) -> Result<Landmark3D, GeometryError> {
    let kp = &left_kps[m.left];
    let position = triangulate_pixel(kp.u, kp.v, m.disparity, cal)?;
    Ok(Landmark3D {
        position,
        source: m.left,
    })
}

/// Closed-form rectified triangulation of a single left pixel.
pub fn triangulate_pixel(
    u: f64,
    v: f64,
    disparity: f64,
    cal: &CameraCalibration,
) -> Result<Vector3<f64>, GeometryError> {
    if disparity <= 0.0 {
        return Err(GeometryError::ZeroDisparity(disparity));
    }
    let depth = cal.focal() * cal.baseline() / disparity;
    Ok(cal.backproject(u, v, depth))
}

/// Removes entries whose depth leaves `[depth_min, depth_max]` from the
/// landmark list and from the parallel linked list, preserving order.
pub fn depth_filter<T: Clone>(
    landmarks: &[Landmark3D],
    linked: &[T],
    depth_min: f64,
    depth_max: f64,
) -> Result<(Vec<Landmark3D>, Vec<T>), GeometryError> {
    if landmarks.len() != linked.len() {
        return Err(GeometryError::LengthMismatch {
            left: landmarks.len(),
            right: linked.len(),
        });
    }
    let mut kept_lms = Vec::new();
    let mut kept_links = Vec::new();
    for (lm, link) in landmarks.iter().zip(linked.iter()) {
        let z = lm.depth();
        if z >= depth_min && z <= depth_max {
            kept_lms.push(*lm);
            kept_links.push(link.clone());
        }
    }
    Ok((kept_lms, kept_links))
}

/// Mutual-best Hamming matching between the left descriptors of two frames.
///
/// Both frames carry only stereo-surviving keypoints, so every left
/// correspondence is backed by a right partner in each frame and the result
/// is consistent across all four images.
pub fn cross_match(
    query: &[BinaryDescriptor],
    candidate: &[BinaryDescriptor],
    max_hamming: u32,
) -> Vec<CrossFrameCorrespondence> {
    if query.is_empty() || candidate.is_empty() {
        return Vec::new();
    }
    let best_in_candidate: Vec<Option<(usize, u32)>> = query
        .iter()
        .map(|qd| {
            let mut best: Option<(usize, u32)> = None;
            for (ci, cd) in candidate.iter().enumerate() {
                let d = qd.hamming(cd);
                if d <= max_hamming && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((ci, d));
                }
            }
            best
        })
        .collect();
    let best_in_query: Vec<Option<(usize, u32)>> = candidate
        .iter()
        .map(|cd| {
            let mut best: Option<(usize, u32)> = None;
            for (qi, qd) in query.iter().enumerate() {
                let d = qd.hamming(cd);
                if d <= max_hamming && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((qi, d));
                }
            }
            best
        })
        .collect();

    let mut out = Vec::new();
    for (qi, best) in best_in_candidate.iter().enumerate() {
        if let Some((ci, d)) = *best {
            if best_in_query[ci].map(|(i, _)| i) == Some(qi) {
                out.push(CrossFrameCorrespondence {
                    query: qi,
                    candidate: ci,
                    distance: d,
                });
            }
        }
    }
    out
}
