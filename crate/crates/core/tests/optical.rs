use proptest::prelude::*;
use wave_enclosure::geometry::{sample_region, Point3, Region};
use wave_enclosure::optical::{
    critical_point, hessian_at, hessian_det, in_subcritical_zone, min_optical_distance, optical_distance, optical_path,
    path_length, snell_point, stationarity_residual, tilde_l, Layers,
};

fn below() -> impl Strategy<Value = Point3> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..3.0f64).prop_map(|(a, b, c)| Point3::new(a, b, -c))
}

fn above() -> impl Strategy<Value = Point3> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..3.0f64).prop_map(|(a, b, c)| Point3::new(a, b, c))
}

fn layers() -> impl Strategy<Value = Layers> {
    (0.2..5.0f64, 0.2..5.0f64).prop_map(|(p, m)| Layers::new(p, m))
}

/// `γ₊ > γ₋`, so a critical angle exists.
fn reflecting() -> impl Strategy<Value = Layers> {
    (0.2..2.0f64, 1.2..6.0f64).prop_map(|(m, k)| Layers::new(m * k, m))
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn snell_point_is_stationary(x in below(), y in above(), l in layers()) {
        let z = snell_point(x, y, l).unwrap();
        prop_assert!(norm2(stationarity_residual(x, y, z, l)) <= 1e-10);
        let path = optical_path(x, y, l).unwrap();
        prop_assert!(path.snell_residual(l).abs() <= 1e-10);
    }

    #[test]
    fn snell_point_minimizes(x in below(), y in above(), l in layers(), dz in (-0.5..0.5f64, -0.5..0.5f64)) {
        let z = snell_point(x, y, l).unwrap();
        let best = path_length(x, y, z, l);
        prop_assert!((optical_distance(x, y, l).unwrap() - best).abs() < 1e-14 * best.max(1.0));
        prop_assert!(path_length(x, y, [z[0] + dz.0, z[1] + dz.1], l) >= best - 1e-12);
    }

    #[test]
    fn deeper_source_is_farther(x in below(), y in above(), l in layers(), extra in 0.01..2.0f64) {
        let deeper = Point3::new(x.x1, x.x2, x.x3 - extra);
        prop_assert!(optical_distance(deeper, y, l).unwrap() > optical_distance(x, y, l).unwrap());
    }

    #[test]
    fn hessian_matches_finite_differences(x in below(), y in above(), l in layers()) {
        let z = snell_point(x, y, l).unwrap();
        let hs = hessian_at(x, y, z, l);
        let e = 1e-4;
        for i in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[i] += e;
            zm[i] -= e;
            let (gp, gm) = (stationarity_residual(x, y, zp, l), stationarity_residual(x, y, zm, l));
            for j in 0..2 {
                let fd = (gp[j] - gm[j]) / (2.0 * e);
                prop_assert!((fd - hs[i][j]).abs() <= 1e-5 * (1.0 + hs[i][j].abs()), "{} vs {}", fd, hs[i][j]);
            }
        }
        let det = hessian_det(x, y, l).unwrap();
        prop_assert!(det > 0.0);
        prop_assert!((det - (hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0])).abs() <= 1e-12 * det.max(1.0));
    }

    #[test]
    fn modified_length_never_exceeds_length(x in below(), y in above(), l in reflecting(), z in (-4.0..4.0f64, -4.0..4.0f64)) {
        let z = [z.0, z.1];
        let lt = tilde_l(x, y, z, l).unwrap();
        let full = path_length(x, y, z, l);
        prop_assert!(lt <= full);
        if in_subcritical_zone(x, z, l) {
            prop_assert_eq!(lt, full);
        }
    }

    #[test]
    fn branches_meet_on_the_critical_circle(x in below(), y in above(), l in reflecting(), phi in 0.0..6.283f64) {
        let reach = x.x3.abs() * l.critical_angle().unwrap().theta0.tan();
        let z = [x.x1 + reach * phi.cos(), x.x2 + reach * phi.sin()];
        let lt = tilde_l(x, y, z, l).unwrap();
        prop_assert!((lt - path_length(x, y, z, l)).abs() <= 1e-8);
        let z0 = critical_point(x, [x.x1 + 2.0 * reach * phi.cos() + 1e-3, x.x2 + 2.0 * reach * phi.sin()], l).unwrap();
        prop_assert!((norm2([z0[0] - x.x1, z0[1] - x.x2]) - reach).abs() <= 1e-9 * reach.max(1.0));
    }
}

#[test]
fn set_distance_is_a_lower_bound_and_attained() {
    let l = Layers::new(1.0, 4.0);
    let d = Region::union(vec![
        Region::ball(Point3::new(-0.8, 0.3, -2.0), 0.5),
        Region::cuboid(Point3::new(0.5, -0.4, -1.9), Point3::new(1.1, 0.2, -1.2)),
    ]);
    let b = Region::ball(Point3::new(0.4, 0.6, 1.5), 0.4);
    let m = min_optical_distance(&d, &b, l).unwrap();
    let xs = sample_region(&d, 0.1).unwrap().nodes;
    let ys = sample_region(&b, 0.1).unwrap().nodes;
    let mut brute = f64::INFINITY;
    for x in &xs {
        for y in &ys {
            let v = optical_distance(*x, *y, l).unwrap();
            assert!(m.l <= v + 1e-12);
            brute = brute.min(v);
        }
    }
    assert!(brute - m.l < 0.1, "{} vs sampled {brute}", m.l);
    assert!((optical_distance(m.x, m.y, l).unwrap() - m.l).abs() < 1e-12);
    assert!(d.distance_to(m.x) < 1e-9 && b.distance_to(m.y) < 1e-9);
}

#[test]
fn path_records_round_trip_through_json() {
    let l = Layers::new(2.0, 0.5);
    let p = optical_path(Point3::new(0.1, 0.2, -1.0), Point3::new(1.0, -0.5, 2.0), l).unwrap();
    let back: wave_enclosure::optical::OpticalPath = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
}
