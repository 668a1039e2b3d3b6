//! Layered background resolvent on a decay-padded box and its optical slope.
//!
//! `cargo run --release --example layered_resolvent -- [h]`

use wave_enclosure::forward::SourceSpec;
use wave_enclosure::geometry::{Point3, Region};
use wave_enclosure::indicator::{extract_length_with, log_tau_grid, FitOptions};
use wave_enclosure::medium::Background;
use wave_enclosure::optical::{min_optical_distance, Layers};
use wave_enclosure::resolvent::{grad_norm_sq_layered_sweep, HelmholtzSolveSpec};

fn main() {
    let h: f64 = std::env::args().nth(1).map(|a| a.parse().expect("numeric h")).unwrap_or(0.1);
    let background = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 4.0 };
    let b = Region::ball(Point3::new(0.0, 0.0, 2.0), 0.5);
    let d = Region::ball(Point3::new(0.0, 0.0, -2.0), 0.5);
    let s = SourceSpec::new(b.clone(), 1.0);
    let taus = log_tau_grid(3.0, 8.0, 8);
    let spec = HelmholtzSolveSpec::padded(&b, &d, h, taus[0], 0.0);
    println!("{} nodes at h = {h}", spec.lattice().len());
    let g = grad_norm_sq_layered_sweep(&d, &s, &taus, background, &spec).expect("solve");
    for (t, v) in taus.iter().zip(&g) {
        println!("tau = {t:6.3}  |grad v|^2 = {v:.6e}");
    }
    let l = min_optical_distance(&d, &b, Layers::new(1.0, 4.0)).expect("valid sets").l;
    let fit = extract_length_with(&taus, &g, FitOptions::default()).expect("fit");
    println!("L_hat = {:.4}, l(D, B) = {l:.4}", fit.l_hat);
}
