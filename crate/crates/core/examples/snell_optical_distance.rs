//! Snell point, optical distance and the modified length `l̃` across the
//! interface `x₃ = 0`.
//!
//! `cargo run --example snell_optical_distance`

use wave_enclosure::geometry::{Point3, Region};
use wave_enclosure::optical::{hessian_det, min_optical_distance, min_tilde_l, optical_path, Layers};

fn main() {
    let layers = Layers::new(4.0, 1.0);
    let x = Point3::new(0.0, 0.0, -1.0);
    let y = Point3::new(2.0, 1.0, 1.5);

    let path = optical_path(x, y, layers).expect("x below, y above");
    println!("z' = ({:.9}, {:.9})", path.z_prime[0], path.z_prime[1]);
    println!("theta- = {:.6}, theta+ = {:.6}, residual = {:.2e}", path.theta_minus, path.theta_plus, path.snell_residual(layers));
    println!("l(x, y) = {:.12}", path.l);
    println!("det H = {:.6}", hessian_det(x, y, layers).expect("valid pair"));
    if let Some(c) = layers.critical_angle() {
        println!("critical angle = {:.6} rad", c.theta0);
    }

    let (lt, z) = min_tilde_l(x, y, layers, 201).expect("gamma_plus > gamma_minus");
    println!("min l~ = {lt:.12} at ({:.6}, {:.6})", z[0], z[1]);

    let d = Region::ball(Point3::new(0.0, 0.0, -2.0), 0.5);
    let b = Region::ball(Point3::new(1.0, 0.0, 2.0), 0.5);
    let m = min_optical_distance(&d, &b, layers).expect("sets on their sides");
    println!("l(D, B) = {:.9} between {:?} and {:?}", m.l, m.x.to_array(), m.y.to_array());
}
