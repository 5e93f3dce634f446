//! Pinhole camera model for a rectified stereo pair.

use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("point has non-positive depth {0}")]
    NonPositiveDepth(f64),
}

/// Intrinsics and stereo geometry of a calibrated, rectified pair.
///
/// A single focal length is used for both axes; the right camera is offset
/// from the left by `baseline` meters along +X, so epipolar lines are image
/// rows and disparity is `u_left - u_right`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraCalibration {
    focal: f64,
    cx: f64,
    cy: f64,
    baseline: f64,
    width: u32,
    height: u32,
}

impl CameraCalibration {
    pub fn new(
        focal: f64,
        cx: f64,
        cy: f64,
        baseline: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, CameraError> {
        if !(focal > 0.0) {
            return Err(CameraError::InvalidCalibration(format!(
                "focal length must be positive, got {focal}"
            )));
        }
        if !(baseline > 0.0) {
            return Err(CameraError::InvalidCalibration(format!(
                "baseline must be positive, got {baseline}"
            )));
        }
        if !(cx > 0.0 && cx < width as f64) {
            return Err(CameraError::InvalidCalibration(format!(
                "principal point x {cx} outside image width {width}"
            )));
        }
        if !(cy > 0.0 && cy < height as f64) {
            return Err(CameraError::InvalidCalibration(format!(
                "principal point y {cy} outside image height {height}"
            )));
        }
        Ok(Self {
            focal,
            cx,
            cy,
            baseline,
            width,
            height,
        })
    }

    pub fn focal(&self) -> f64 {
        self.focal
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Projects a camera-frame point onto the image plane.
    pub fn project(&self, point: &Vector3<f64>) -> Result<(f64, f64), CameraError> {
        if point.z <= 0.0 {
            return Err(CameraError::NonPositiveDepth(point.z));
        }
        Ok((
            self.focal * point.x / point.z + self.cx,
            self.focal * point.y / point.z + self.cy,
        ))
    }

    /// Inverse of [`project`](Self::project) at a known depth.
    pub fn backproject(&self, u: f64, v: f64, depth: f64) -> Vector3<f64> {
        Vector3::new(
            (u - self.cx) * depth / self.focal,
            (v - self.cy) * depth / self.focal,
            depth,
        )
    }

    pub fn contains_pixel(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cal() -> CameraCalibration {
        CameraCalibration::new(100.0, 320.0, 240.0, 0.5, 640, 480).unwrap()
    }

    #[test]
    fn point_on_optical_axis_projects_to_principal_point() {
        assert_eq!(
            cal().project(&Vector3::new(0.0, 0.0, 5.0)).unwrap(),
            (320.0, 240.0)
        );
    }

    #[test]
    fn projection_follows_similar_triangles() {
        assert_eq!(
            cal().project(&Vector3::new(5.0, 0.0, 5.0)).unwrap(),
            (420.0, 240.0)
        );
    }

    #[test]
    fn point_behind_camera_is_rejected() {
        assert_eq!(
            cal().project(&Vector3::new(0.0, 0.0, -1.0)),
            Err(CameraError::NonPositiveDepth(-1.0))
        );
    }

    #[test]
    fn rejects_bad_calibration() {
        assert!(CameraCalibration::new(0.0, 320.0, 240.0, 0.5, 640, 480).is_err());
        assert!(CameraCalibration::new(100.0, 320.0, 240.0, -0.1, 640, 480).is_err());
        assert!(CameraCalibration::new(100.0, 700.0, 240.0, 0.5, 640, 480).is_err());
        assert!(CameraCalibration::new(100.0, 320.0, 500.0, 0.5, 640, 480).is_err());
    }

    proptest! {
        // project . backproject is the identity on the image plane for any
        // depth inside the working window.
        #[test]
        fn project_backproject_round_trip(
            u in 0.0f64..640.0,
            v in 0.0f64..480.0,
            depth in 0.4f64..50.0,
        ) {
            let c = cal();
            let (pu, pv) = c.project(&c.backproject(u, v, depth)).unwrap();
            prop_assert!((pu - u).abs() < 1e-6);
            prop_assert!((pv - v).abs() < 1e-6);
        }
    }
}
