//! Distances, support functions and the cone integral for a few regions.
//!
//! `cargo run --example geometry_support`

use std::f64::consts::PI;

use wave_enclosure::geometry::{cone_integral, dist_sets, support_function, Cone, Point3, Region};

fn main() {
    let d = Region::union(vec![
        Region::ball(Point3::new(0.0, 0.0, 0.0), 0.75),
        Region::cuboid(Point3::new(0.5, -0.2, -0.2), Point3::new(1.2, 0.2, 0.2)),
    ]);
    let b = Region::ball(Point3::new(0.0, 0.0, 2.5), 0.5);
    println!("dist(D, B) = {:.6}", dist_sets(&d, &b).expect("disjoint"));

    for w in [Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 1.0, 0.0)] {
        let w = w.normalized().expect("nonzero");
        println!("h_D({:.3}, {:.3}, {:.3}) = {:.6}", w.x1, w.x2, w.x3, support_function(&d, w));
    }

    let cone = Cone::new(Point3::ORIGIN, Point3::new(0.0, 0.0, 1.0), 1.0, PI / 6.0).expect("valid cone");
    for tau in [1.0, 4.0, 16.0, 64.0] {
        let v = cone_integral(&cone, tau).expect("tau >= 1");
        println!("tau = {tau:>4}: integral = {v:.6e}, tau^3 * integral = {:.6}", tau.powi(3) * v);
    }
}
