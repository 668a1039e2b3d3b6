//! Leading asymptotic term of the layered kernel against the grid resolvent
//! of a small ball source.
//!
//! `cargo run --release --example asymptotic_kernel -- [h]`

use wave_enclosure::forward::SourceSpec;
use wave_enclosure::geometry::{Point3, Region};
use wave_enclosure::medium::Background;
use wave_enclosure::optical::Layers;
use wave_enclosure::resolvent::{phi0_asymptotic, HelmholtzSolveSpec, LayeredSolver};

fn main() {
    let h: f64 = std::env::args().nth(1).map(|a| a.parse().expect("numeric h")).unwrap_or(0.05);
    let layers = Layers::new(1.0, 4.0);
    let background = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 4.0 };
    let (x, y, rho) = (Point3::new(0.0, 0.0, -0.5), Point3::new(0.2, 0.0, 0.5), 0.1);
    let s = SourceSpec::new(Region::ball(y, rho), 1.0);
    let taus = [4.0, 6.0, 8.0, 10.0];
    let spec = HelmholtzSolveSpec::padded(&s.region, &Region::ball(x, 0.01), h, taus[0], 0.0);
    let solver = LayeredSolver::new(background, &s, spec, vec![x]).expect("solver");
    let (v, _) = solver.sweep(&taus).expect("solve");
    let (_, f) = s.quadrature(h).expect("nonempty source");
    let volume = f.len() as f64 * h.powi(3);
    for (k, &tau) in taus.iter().enumerate() {
        let k0 = phi0_asymptotic(x, y, tau, layers).expect("valid pair");
        println!(
            "tau = {tau:>4}: v = {:.6e}, |B_h|·phi0 = {:.6e}, ratio = {:.4}, l = {:.6}",
            v[k][0].value,
            volume * k0.value,
            v[k][0].value / (volume * k0.value),
            k0.l
        );
    }
}
