//! One probe end to end: forward runs with and without the inclusion, both
//! indicator series, the slope fit and the sign check.
//!
//! `cargo run --release --example probe_pipeline -- [gamma_D]`

use wave_enclosure::forward::SourceSpec;
use wave_enclosure::geometry::{Point3, Region};
use wave_enclosure::indicator::{default_tau_grid, run_probe_pipeline, PipelineOptions};
use wave_enclosure::medium::{Gamma, Medium};

fn main() {
    let gamma: f64 = std::env::args().nth(1).map(|a| a.parse().expect("numeric gamma_D")).unwrap_or(2.0);
    let medium = Medium::homogeneous().with_inclusion(Region::ball(Point3::ORIGIN, 0.75), Gamma::scalar(gamma));
    let source = SourceSpec::new(Region::ball(Point3::new(0.0, 0.0, 2.5), 0.5), 1.0);
    let opts = PipelineOptions {
        h: 0.1,
        t_final: 4.0,
        taus: default_tau_grid(),
        tail: Default::default(),
        fit: Default::default(),
        config_hash: String::new(),
        grid: None,
    };
    let out = run_probe_pipeline(&medium, &source, &opts).expect("valid configuration");
    println!("{:>8} {:>14} {:>14} {:>12}", "tau", "I", "I~", "equiv");
    for k in 0..out.standard.len() {
        println!(
            "{:8.4} {:+14.6e} {:+14.6e} {:12.4e}",
            out.standard.taus[k], out.standard.values[k], out.tilde.values[k], out.equivalence[k]
        );
    }
    match &out.fit {
        Ok(f) => println!("L_hat = {:.4} (dist = 1.25) on [{:.2}, {:.2}]", f.l_hat, f.window[0], f.window[1]),
        Err(e) => println!("fit failed: {e}"),
    }
    if let Some(s) = &out.sign {
        println!("monotonicity {:?}: sign check {}", s.monotonicity, if s.passed { "passed" } else { "failed" });
    }
}
