//! `∫_D |∇v|²` for the free-space field decays like `e^{−2τ·dist(D, B)}`;
//! the slope fit recovers the distance.
//!
//! `cargo run --release --example free_space_exponent`

use wave_enclosure::forward::SourceSpec;
use wave_enclosure::geometry::{dist_sets, Point3, Region};
use wave_enclosure::indicator::{extract_length_with, log_tau_grid, FitOptions};
use wave_enclosure::resolvent::grad_norm_sq_free;

fn main() {
    let d = Region::ball(Point3::ORIGIN, 1.0);
    let s = SourceSpec::new(Region::ball(Point3::new(0.0, 0.0, 4.0), 0.5), 1.0);
    let taus = log_tau_grid(6.0, 16.0, 12);
    let g: Vec<f64> = taus.iter().map(|&t| grad_norm_sq_free(&d, &s, t, 0.02).expect("disjoint")).collect();
    for (t, v) in taus.iter().zip(&g) {
        println!("tau = {t:7.4}  |grad v|^2 = {v:.6e}");
    }
    let fit = extract_length_with(&taus, &g, FitOptions::default()).expect("fit");
    let exact = dist_sets(&d, &s.region).expect("disjoint");
    println!("L_hat = {:.5} (dist = {exact}), p_hat = {:.3}, window {:?}", fit.l_hat, fit.p_hat, fit.window);
}
