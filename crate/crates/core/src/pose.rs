//! Rigid transforms on SE(3), stored as a unit quaternion plus translation.

use nalgebra::{UnitQuaternion, Vector3};

/// A rigid transform. `transform_point` applies rotation then translation;
/// `compose(a, b)` is the transform that applies `b` first, then `a`.
///
/// The quaternion is renormalized after every composition so long chains do
/// not drift away from the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: UnitQuaternion::new_normalize(rotation.into_inner()),
            translation,
        }
    }

    /// Builds a pose from raw quaternion components (x, y, z, w) and a
    /// translation. The quaternion is normalized.
    pub fn from_parts(quat_xyzw: [f64; 4], translation: [f64; 3]) -> Self {
        let [x, y, z, w] = quat_xyzw;
        Self::new(
            UnitQuaternion::new_normalize(nalgebra::Quaternion::new(w, x, y, z)),
            Vector3::new(translation[0], translation[1], translation[2]),
        )
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Quaternion components in (x, y, z, w) order.
    pub fn quaternion_xyzw(&self) -> [f64; 4] {
        let q = self.rotation.into_inner();
        [q.i, q.j, q.k, q.w]
    }

    /// `compose(a, b)`: the rigid transform `a` applied after `b`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv_rot = self.rotation.inverse();
        Pose::new(inv_rot, -(inv_rot * self.translation))
    }

    pub fn transform_point(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * point + self.translation
    }

    /// Rotation angle in radians, in [0, pi].
    pub fn rotation_angle(&self) -> f64 {
        self.rotation.angle()
    }

    /// Angle of the relative rotation between two poses, in radians.
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        self.rotation.angle_to(&other.rotation)
    }

    /// Euclidean distance between the two translations.
    pub fn translation_distance_to(&self, other: &Pose) -> f64 {
        (self.translation - other.translation).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tx(meters: f64) -> Pose {
        Pose::new(UnitQuaternion::identity(), Vector3::new(meters, 0.0, 0.0))
    }

    #[test]
    fn compose_with_identity_is_identity_map() {
        let p = Pose::new(
            UnitQuaternion::from_euler_angles(0.3, -0.2, 1.1),
            Vector3::new(1.0, -2.0, 0.5),
        );
        let composed = Pose::identity().compose(&p);
        assert_relative_eq!(composed.translation(), p.translation(), epsilon = 1e-12);
        assert!(composed.rotation_angle_to(&p) < 1e-12);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let p = Pose::new(
            UnitQuaternion::from_euler_angles(0.7, 0.1, -0.4),
            Vector3::new(3.0, 1.0, -2.0),
        );
        let id = p.compose(&p.inverse());
        assert!(id.translation().norm() < 1e-9);
        assert!(id.rotation_angle() < 1e-9);
    }

    #[test]
    fn pure_translations_add() {
        let sum = tx(1.0).compose(&tx(2.0));
        assert_relative_eq!(sum.translation().x, 3.0, epsilon = 1e-12);
        assert!(sum.rotation_angle() < 1e-15);
    }

    #[test]
    fn transform_point_applies_rotation_then_translation() {
        let p = Pose::new(
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2),
            Vector3::new(1.0, 0.0, 0.0),
        );
        let moved = p.transform_point(&Vector3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(moved, Vector3::new(1.0, 1.0, 0.0), epsilon = 1e-12);
    }

    fn arb_pose() -> impl Strategy<Value = Pose> {
        (
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            0.01f64..1.0,
            -10.0f64..10.0,
            -10.0f64..10.0,
            -10.0f64..10.0,
        )
            .prop_map(|(x, y, z, w, tx, ty, tz)| {
                Pose::from_parts([x, y, z, w], [tx, ty, tz])
            })
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in arb_pose(), b in arb_pose(), c in arb_pose()) {
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            prop_assert!(left.translation_distance_to(&right) < 1e-9);
            prop_assert!(left.rotation_angle_to(&right) < 1e-9);
        }

        #[test]
        fn inverse_cancels(a in arb_pose()) {
            let id = a.compose(&a.inverse());
            prop_assert!(id.translation().norm() < 1e-9);
            prop_assert!(id.rotation_angle() < 1e-9);
        }

        #[test]
        fn quaternion_stays_unit(a in arb_pose(), b in arb_pose()) {
            let q = a.compose(&b).rotation().into_inner();
            prop_assert!((q.norm() - 1.0).abs() < 1e-9);
        }
    }
}
