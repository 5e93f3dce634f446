//! Robust Perspective-n-Point: consensus over minimal samples followed by
//! damped Gauss-Newton refinement on the inlier set.
//!
//! The minimal solver recovers the camera-frame distances of three points
//! from the classic law-of-cosines system (reduced to a quartic), lifts the
//! points into the camera frame along their bearing rays, and closes with an
//! absolute-orientation fit. A fourth sampled point disambiguates the up to
//! four real solutions.

use nalgebra::{DMatrix, Matrix3, Matrix6, UnitQuaternion, Vector2, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::camera::CameraCalibration;
use crate::config::RansacConfig;
use crate::pose::Pose;
use crate::stereo::Landmark3D;

#[derive(Debug, Error, PartialEq)]
pub enum PnpError {
    #[error("need at least {required} correspondences, got {got}")]
    TooFewCorrespondences { got: usize, required: usize },
    #[error("no consensus: best inlier set has {best} of required {required}")]
    NoConsensus { best: usize, required: usize },
    #[error("degenerate geometry: inlier landmarks are collinear")]
    DegenerateGeometry,
}

/// Estimated transform from the landmark frame into the query camera frame,
/// with the indices of the consensus inliers.
#[derive(Clone, Debug)]
pub struct PnpResult {
    pub pose: Pose,
    pub inliers: Vec<usize>,
}

/// Robust pose from landmark/pixel correspondences.
///
/// `landmarks` live in the candidate frame; `pixels` are observations in the
/// query left image. The returned pose maps candidate-frame points into the
/// query camera frame. The consensus loop runs at most `cfg.iterations`
/// minimal samples with an adaptive inlier-ratio early exit, and the seed in
/// `cfg` makes the whole estimate reproducible.
pub fn pnp_ransac(
    landmarks: &[Landmark3D],
    pixels: &[(f64, f64)],
    cal: &CameraCalibration,
    cfg: &RansacConfig,
    min_inliers: usize,
) -> Result<PnpResult, PnpError> {
    assert_eq!(landmarks.len(), pixels.len());
    let n = landmarks.len();
    let required = min_inliers.max(4);
    if n < required {
        return Err(PnpError::TooFewCorrespondences { got: n, required });
    }

    let points: Vec<Vector3<f64>> = landmarks.iter().map(|l| l.position).collect();
    let bearings: Vec<Vector3<f64>> = pixels
        .iter()
        .map(|&(u, v)| cal.backproject(u, v, 1.0).normalize())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, f64, Pose)> = None; // (inliers, sse, pose)

    let mut iteration = 0usize;
    let mut needed = cfg.iterations as f64;
    while iteration < cfg.iterations && (iteration as f64) < needed {
        iteration += 1;
        let sample = rand::seq::index::sample(&mut rng, n, 4).into_vec();
        let tri = [points[sample[0]], points[sample[1]], points[sample[2]]];
        let rays = [
            bearings[sample[0]],
            bearings[sample[1]],
            bearings[sample[2]],
        ];
        let check = sample[3];

        let mut hypothesis: Option<(f64, Pose)> = None;
        for pose in p3p_solutions(&tri, &rays) {
            let err = reprojection_error(&pose, &points[check], &pixels[check], cal);
            if hypothesis.as_ref().is_none_or(|(e, _)| err < *e) {
                hypothesis = Some((err, pose));
            }
        }
        let Some((_, pose)) = hypothesis else {
            continue;
        };

        let mut count = 0usize;
        let mut sse = 0.0;
        for i in 0..n {
            let e = reprojection_error(&pose, &points[i], &pixels[i], cal);
            if e <= cfg.pixel_threshold {
                count += 1;
                sse += e * e;
            }
        }
        let improved = match &best {
            None => count > 0,
            Some((bc, bs, _)) => count > *bc || (count == *bc && sse < *bs),
        };
        if improved {
            best = Some((count, sse, pose));
            let w = count as f64 / n as f64;
            needed = if w >= 1.0 {
                0.0
            } else {
                ((1.0 - cfg.confidence).ln() / (1.0 - w.powi(4)).ln()).ceil()
            };
        }
    }

    let consensus = match best {
        Some((count, _, pose)) if count >= required => (count, pose),
        other => {
            // Collinear landmark sets never produce a minimal hypothesis, so
            // they surface here rather than as a plain consensus failure.
            if collinear(&points) {
                return Err(PnpError::DegenerateGeometry);
            }
            return Err(PnpError::NoConsensus {
                best: other.map_or(0, |(c, _, _)| c),
                required,
            });
        }
    };
    let (_, pose) = consensus;

    let inliers: Vec<usize> = (0..n)
        .filter(|&i| reprojection_error(&pose, &points[i], &pixels[i], cal) <= cfg.pixel_threshold)
        .collect();
    let inlier_points: Vec<Vector3<f64>> = inliers.iter().map(|&i| points[i]).collect();
    if collinear(&inlier_points) {
        return Err(PnpError::DegenerateGeometry);
    }
    let inlier_pixels: Vec<(f64, f64)> = inliers.iter().map(|&i| pixels[i]).collect();
    let refined = refine(&pose, &inlier_points, &inlier_pixels, cal, cfg);

    Ok(PnpResult {
        pose: refined,
        inliers,
    })
}

fn reprojection_error(
    pose: &Pose,
    point: &Vector3<f64>,
    pixel: &(f64, f64),
    cal: &CameraCalibration,
) -> f64 {
    let cam = pose.transform_point(point);
    match cal.project(&cam) {
        Ok((u, v)) => ((u - pixel.0).powi(2) + (v - pixel.1).powi(2)).sqrt(),
        Err(_) => f64::INFINITY,
    }
}

fn summed_squared_error(
    pose: &Pose,
    points: &[Vector3<f64>],
    pixels: &[(f64, f64)],
    cal: &CameraCalibration,
) -> f64 {
    let mut sse = 0.0;
    for (p, z) in points.iter().zip(pixels.iter()) {
        let cam = pose.transform_point(p);
        match cal.project(&cam) {
            Ok((u, v)) => sse += (u - z.0).powi(2) + (v - z.1).powi(2),
            Err(_) => return f64::INFINITY,
        }
    }
    sse
}

/// Damped Gauss-Newton over a local (axis-angle, translation) increment
/// composed onto the left of the estimate. The error never increases
/// between accepted iterations; if no downhill step exists the input pose
/// is returned unchanged.
fn refine(
    initial: &Pose,
    points: &[Vector3<f64>],
    pixels: &[(f64, f64)],
    cal: &CameraCalibration,
    cfg: &RansacConfig,
) -> Pose {
    let mut pose = *initial;
    let mut error = summed_squared_error(&pose, points, pixels, cal);
    if !error.is_finite() {
        return pose;
    }
    let mut lambda = 1e-6;
    let focal = cal.focal();

    for _ in 0..cfg.refine_max_iterations {
        let mut jtj = Matrix6::<f64>::zeros();
        let mut jtr = Vector6::<f64>::zeros();
        for (p, z) in points.iter().zip(pixels.iter()) {
            let y = pose.transform_point(p);
            if y.z <= 0.0 {
                continue;
            }
            let inv_z = 1.0 / y.z;
            let proj_u = focal * y.x * inv_z + cal.principal_point().0;
            let proj_v = focal * y.y * inv_z + cal.principal_point().1;
            let r = Vector2::new(proj_u - z.0, proj_v - z.1);
            // d(pi)/dY
            let d_pi = nalgebra::Matrix2x3::new(
                focal * inv_z,
                0.0,
                -focal * y.x * inv_z * inv_z,
                0.0,
                focal * inv_z,
                -focal * y.y * inv_z * inv_z,
            );
            // dY/d(omega, tau) for a left increment: [-[Y]x | I]
            let mut d_y = nalgebra::Matrix3x6::zeros();
            d_y
                .fixed_view_mut::<3, 3>(0, 0)
                .copy_from(&(-skew(&y)));
            d_y
                .fixed_view_mut::<3, 3>(0, 3)
                .copy_from(&Matrix3::identity());
            let jac = d_pi * d_y;
            jtj += jac.transpose() * jac;
            jtr += jac.transpose() * r;
        }

        let mut step: Option<Vector6<f64>> = None;
        for _ in 0..12 {
            let damped = jtj + Matrix6::identity() * lambda;
            let Some(delta) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let increment = Pose::new(
                UnitQuaternion::from_scaled_axis(delta.fixed_rows::<3>(0).into_owned()),
                delta.fixed_rows::<3>(3).into_owned(),
            );
            let candidate = increment.compose(&pose);
            let candidate_error = summed_squared_error(&candidate, points, pixels, cal);
            if candidate_error.is_finite() && candidate_error <= error {
                pose = candidate;
                error = candidate_error;
                lambda = (lambda / 3.0).max(1e-12);
                step = Some(delta);
                break;
            }
            lambda *= 10.0;
        }
        match step {
            Some(delta) if delta.norm() >= cfg.refine_step_tolerance => {}
            _ => break,
        }
    }
    pose
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// True when the points lie on a line within tolerance (pose from such a
/// set is not unique).
fn collinear(points: &[Vector3<f64>]) -> bool {
    if points.len() < 3 {
        return true;
    }
    let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let mut cov = Matrix3::<f64>::zeros();
    let mut scale = 0.0f64;
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
        scale = scale.max(d.norm_squared());
    }
    if scale <= 0.0 {
        return true;
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Second principal direction carries essentially no spread.
    values[1] <= 1e-12 * values[0].max(1e-30)
}

/// Up to four poses mapping `world` points onto the bearing rays.
fn p3p_solutions(world: &[Vector3<f64>; 3], rays: &[Vector3<f64>; 3]) -> Vec<Pose> {
    let side_a = (world[1] - world[2]).norm(); // opposite ray 0 pairing (1,2)
    let side_b = (world[0] - world[2]).norm();
    let side_c = (world[0] - world[1]).norm();
    if side_a <= 1e-12 || side_b <= 1e-12 || side_c <= 1e-12 {
        return Vec::new();
    }
    // Collinear world sample: absolute orientation is ambiguous.
    if (world[1] - world[0])
        .cross(&(world[2] - world[0]))
        .norm_squared()
        <= 1e-16 * side_b.powi(2) * side_c.powi(2)
    {
        return Vec::new();
    }

    let cos_alpha = rays[1].dot(&rays[2]);
    let cos_beta = rays[0].dot(&rays[2]);
    let cos_gamma = rays[0].dot(&rays[1]);

    let a2b2 = (side_a * side_a) / (side_b * side_b);
    let c2b2 = (side_c * side_c) / (side_b * side_b);

    // u = s2/s1 expressed as N(v)/D(v); substituting into the remaining
    // constraint gives a quartic in v = s3/s1.
    let n2 = (a2b2 - c2b2) - 1.0;
    let n1 = -2.0 * (a2b2 - c2b2) * cos_beta;
    let n0 = (a2b2 - c2b2) + 1.0;
    let d1 = -2.0 * cos_alpha;
    let d0 = 2.0 * cos_gamma;
    let q2 = -c2b2;
    let q1 = 2.0 * c2b2 * cos_beta;
    let q0 = 1.0 - c2b2;

    // quartic = N^2 - 2*cos_gamma*N*D + D^2*Q, coefficients low-to-high.
    let mut quartic = [0.0f64; 5];
    let nn = [n0, n1, n2];
    for (i, &ni) in nn.iter().enumerate() {
        for (j, &nj) in nn.iter().enumerate() {
            quartic[i + j] += ni * nj;
        }
    }
    let dd = [d0, d1];
    for (i, &ni) in nn.iter().enumerate() {
        for (j, &dj) in dd.iter().enumerate() {
            quartic[i + j] -= 2.0 * cos_gamma * ni * dj;
        }
    }
    let mut d_sq = [0.0f64; 3];
    for (i, &di) in dd.iter().enumerate() {
        for (j, &dj) in dd.iter().enumerate() {
            d_sq[i + j] += di * dj;
        }
    }
    let qq = [q0, q1, q2];
    for (i, &di) in d_sq.iter().enumerate() {
        for (j, &qj) in qq.iter().enumerate() {
            quartic[i + j] += di * qj;
        }
    }

    let mut poses = Vec::new();
    for v in real_roots(&quartic) {
        if v <= 0.0 || !v.is_finite() {
            continue;
        }
        let denom = d1 * v + d0;
        if denom.abs() < 1e-12 {
            continue;
        }
        let u = (n2 * v * v + n1 * v + n0) / denom;
        if u <= 0.0 || !u.is_finite() {
            continue;
        }
        let s1_sq = 1.0 + v * v - 2.0 * v * cos_beta;
        if s1_sq <= 1e-12 {
            continue;
        }
        let s1 = side_b / s1_sq.sqrt();
        let s2 = u * s1;
        let s3 = v * s1;
        let cam = [rays[0] * s1, rays[1] * s2, rays[2] * s3];
        if let Some(pose) = absolute_orientation(world, &cam) {
            poses.push(pose);
        }
    }
    poses
}

/// Least-squares rigid fit `cam_i = R * world_i + t` for three points.
fn absolute_orientation(world: &[Vector3<f64>; 3], cam: &[Vector3<f64>; 3]) -> Option<Pose> {
    let wc = (world[0] + world[1] + world[2]) / 3.0;
    let cc = (cam[0] + cam[1] + cam[2]) / 3.0;
    let mut h = Matrix3::<f64>::zeros();
    for i in 0..3 {
        h += (world[i] - wc) * (cam[i] - cc).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u?;
    let v_t = svd.v_t?;
    let mut r = v_t.transpose() * u.transpose();
    if r.determinant() < 0.0 {
        let mut flip = Matrix3::identity();
        flip[(2, 2)] = -1.0;
        r = v_t.transpose() * flip * u.transpose();
    }
    let rotation = UnitQuaternion::from_matrix(&r);
    let translation = cc - rotation * wc;
    Some(Pose::new(rotation, translation))
}

/// Real roots of a polynomial of degree <= 4, coefficients low-to-high.
/// Roots come from the companion-matrix eigenvalues and are polished with a
/// few Newton steps.
fn real_roots(coeffs: &[f64; 5]) -> Vec<f64> {
    let max_coeff = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max_coeff == 0.0 {
        return Vec::new();
    }
    let mut degree = 4usize;
    while degree > 0 && coeffs[degree].abs() < 1e-13 * max_coeff {
        degree -= 1;
    }
    if degree == 0 {
        return Vec::new();
    }
    if degree == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }

    let lead = coeffs[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 0..degree {
        companion[(0, i)] = -coeffs[degree - 1 - i] / lead;
    }
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    let eigen = companion.complex_eigenvalues();

    let eval = |x: f64| -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for i in (0..=degree).rev() {
            dp = dp * x + p;
            p = p * x + coeffs[i];
        }
        (p, dp)
    };

    let mut roots = Vec::new();
    for e in eigen.iter() {
        if e.im.abs() > 1e-8 * (1.0 + e.re.abs()) {
            continue;
        }
        let mut x = e.re;
        for _ in 0..3 {
            let (p, dp) = eval(x);
            if dp.abs() < 1e-300 {
                break;
            }
            let next = x - p / dp;
            if !next.is_finite() {
                break;
            }
            x = next;
        }
        roots.push(x);
    }
    roots
}
