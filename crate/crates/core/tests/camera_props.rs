use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;

use spheremotion::{FisheyeCalibration, PixelPoint, UnitVector3};

fn calibration() -> impl Strategy<Value = FisheyeCalibration> {
    (
        150.0..350.0f64,
        -20.0..20.0f64,
        -10.0..2.0f64,
        -1.0..1.0f64,
        0.8..1.7f64,
        -0.4..0.4f64,
    )
        .prop_filter_map("r(theta) must be monotone", |(a1, a2, a3, a4, theta_max, pitch)| {
            let rotation = *Rotation3::from_axis_angle(&Vector3::x_axis(), pitch).matrix();
            FisheyeCalibration::new(
                [a1, a2, a3, a4],
                PixelPoint::new(319.5, 239.5),
                (640, 480),
                theta_max,
                rotation,
                1.2,
            )
            .ok()
        })
}

/// Direction on the sphere within `fraction` of the field of view.
fn ray_in_fov(theta_max: f64, fraction: f64, phi: f64) -> UnitVector3 {
    let theta = theta_max * fraction;
    UnitVector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn radius_inverse_round_trips(calib in calibration(), fraction in 0.0..1.0f64) {
        let theta = fraction * calib.theta_max();
        let r = calib.radius_of_angle(theta).unwrap();
        let back = calib.angle_of_radius(r).unwrap();
        prop_assert!((calib.radius_of_angle(back).unwrap() - r).abs() < 1e-9);
    }

    #[test]
    fn radius_is_monotone(calib in calibration(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let t = calib.theta_max();
        prop_assert!(calib.radius_of_angle(lo * t).unwrap() < calib.radius_of_angle(hi * t).unwrap());
    }

    #[test]
    fn ray_round_trips_through_the_image_plane(
        calib in calibration(),
        fraction in 0.0..0.999f64,
        phi in -std::f64::consts::PI..std::f64::consts::PI,
    ) {
        let ray = ray_in_fov(calib.theta_max(), fraction, phi);
        let pixel = calib.project(&ray).unwrap();
        let back = calib.unproject(pixel).unwrap();
        prop_assert!((back.as_vector() - ray.as_vector()).norm() < 1e-9);
    }

    #[test]
    fn pixel_round_trips_through_the_sphere(
        calib in calibration(),
        fraction in 0.0..0.999f64,
        phi in -std::f64::consts::PI..std::f64::consts::PI,
    ) {
        let r = fraction * calib.rim_radius();
        let pp = calib.principal_point();
        let pixel = PixelPoint::new(pp.u + r * phi.cos(), pp.v + r * phi.sin());
        let ray = calib.unproject(pixel).unwrap();
        prop_assert!((ray.as_vector().norm() - 1.0).abs() < 1e-12);
        let back = calib.project(&ray).unwrap();
        prop_assert!((back.u - pixel.u).hypot(back.v - pixel.v) < 1e-6);
    }

    #[test]
    fn horizon_sign_matches_analytic_ground_rays(
        pitch in -0.6..0.6f64,
        yaw in -3.0..3.0f64,
        azimuth in -std::f64::consts::PI..std::f64::consts::PI,
        elevation in -1.2..1.2f64,
    ) {
        prop_assume!(elevation.abs() > 1e-6);
        // road frame: z up; camera looks along the rotated road x axis
        let camera_from_road = Rotation3::from_axis_angle(&Vector3::x_axis(), pitch)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), yaw)
            * Rotation3::from_matrix_unchecked(Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0));
        let calib = FisheyeCalibration::new(
            [190.0, 0.0, -4.0, 0.3],
            PixelPoint::new(319.5, 239.5),
            (640, 480),
            95f64.to_radians(),
            *camera_from_road.matrix(),
            1.0,
        ).unwrap();
        let road_dir = Vector3::new(
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        );
        let ray = UnitVector3::from_vector(camera_from_road * road_dir).unwrap();
        let below = elevation < 0.0;
        prop_assert_eq!(ray.dot(&calib.horizon_vector()) > 0.0, below);
    }
}
