//! 26 probes around a ball inclusion: fitted lengths, soundness on samples
//! of `D` and the enclosure radius along each probe direction.
//!
//! `cargo run --release --example enclosure_survey -- [h]`

use wave_enclosure::cli::config::cube26_directions;
use wave_enclosure::forward::SourceSpec;
use wave_enclosure::geometry::{sample_region, Point3, Region};
use wave_enclosure::indicator::{default_tau_grid, survey, Enclosure, PipelineOptions};
use wave_enclosure::medium::{Background, Gamma, Medium};

fn main() {
    let h: f64 = std::env::args().nth(1).map(|a| a.parse().expect("numeric h")).unwrap_or(0.1);
    let d = Region::ball(Point3::ORIGIN, 1.0);
    let medium = Medium::homogeneous().with_inclusion(d.clone(), Gamma::scalar(2.0));
    let dirs = cube26_directions();
    let probes: Vec<SourceSpec> = dirs.iter().map(|&u| SourceSpec::new(Region::ball(u * 2.75, 0.5), 1.0)).collect();
    let opts = PipelineOptions {
        h,
        t_final: 4.0,
        taus: default_tau_grid(),
        tail: Default::default(),
        fit: Default::default(),
        config_hash: String::new(),
        grid: None,
    };
    let out = survey(&medium, &probes, &opts).expect("valid survey");
    for r in &out.results {
        println!("probe at {:?}: L_hat = {:.4} (exact 1.25)", r.center.to_array().map(|c| (c * 1e3).round() / 1e3), r.l_hat);
    }
    let enc = Enclosure::new(out.results, Background::Homogeneous);
    let samples = sample_region(&d, 0.05).expect("nonempty").nodes;
    let inside = samples.iter().filter(|&&x| enc.contains(x)).count();
    println!("{inside}/{} lattice points of D inside the enclosure", samples.len());
    let boundary = enc.boundary_samples(Point3::ORIGIN, 200, 6.0);
    let radii: Vec<f64> = boundary.iter().map(|p| p.norm()).collect();
    let (lo, hi) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    println!("enclosure boundary radius in [{lo:.4}, {hi:.4}] (D has radius 1)");
}
