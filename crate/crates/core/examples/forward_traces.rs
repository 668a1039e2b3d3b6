//! Leapfrog run on a causality-padded grid: energy drift and the source
//! pairing `⟨f, u(t)⟩` over time.
//!
//! `cargo run --release --example forward_traces`

use wave_enclosure::forward::{simulate, GridSpec, SourceSpec};
use wave_enclosure::geometry::{Point3, Region};
use wave_enclosure::medium::{Gamma, Medium};

fn main() {
    let medium = Medium::homogeneous().with_inclusion(Region::ball(Point3::ORIGIN, 0.75), Gamma::scalar(2.0));
    let b = Region::ball(Point3::new(0.0, 0.0, 2.5), 0.5);
    let grid = GridSpec::padded(&medium, &b, 0.1, 4.0);
    println!("grid: h = {}, dt = {:.6}, steps = {}, extent = {:?}", grid.h, grid.dt, grid.steps, grid.extent);

    let sim = simulate(&medium, &SourceSpec::new(b, 1.0), &grid).expect("valid grid");
    let e0 = sim.energy[0];
    let drift = sim.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max);
    println!("{} trace nodes, max relative energy drift {drift:.2e}", sim.traces.nodes.len());

    let pairing = sim.traces.paired_with_source();
    for (k, p) in pairing.iter().enumerate().step_by(grid.steps / 10) {
        println!("t = {:.3}  <f, u> = {p:+.6e}", k as f64 * grid.dt);
    }
}
