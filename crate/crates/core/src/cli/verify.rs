//! Fast self-checks grouped by module, each against an independent oracle.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::forward::SourceSpec;
use crate::geometry::{cone_integral, dist_sets, incomplete_gamma3, sample_region, support_function, Cone, Point3, Region};
use crate::indicator::{
    extract_length_with, kendall_tau, laplace_transform_series, log_tau_grid, run_probe_pipeline, FitOptions,
    PipelineOptions,
};
use crate::medium::{Gamma, Medium};
use crate::optical::{critical_point, in_subcritical_zone, min_tilde_l, optical_path, path_length, tilde_l, Layers};
use crate::resolvent::{ball_potential, phi0_asymptotic, v_free, v_free_exact};

pub const SUITES: [&str; 5] = ["geometry", "optical", "resolvent", "indicator", "all"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: &'static str, name: &'static str, passed: bool, detail: String) -> Check {
    Check { suite, name, passed, detail }
}

/// `None` for an unknown suite name.
pub fn run_suite(name: &str, seed: u64) -> Option<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Some(match name {
        "geometry" => geometry(&mut rng),
        "optical" => optical(&mut rng),
        "resolvent" => resolvent(&mut rng),
        "indicator" => indicator(&mut rng),
        "all" => {
            let mut v = geometry(&mut rng);
            v.extend(optical(&mut rng));
            v.extend(resolvent(&mut rng));
            v.extend(indicator(&mut rng));
            v
        }
        _ => return None,
    })
}

fn unit(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let p = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = p.norm();
        if n > 1e-3 && n <= 1.0 {
            return p * (1.0 / n);
        }
    }
}

fn geometry(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();

    let cone = Cone::new(Point3::ORIGIN, Point3::new(0.0, 0.0, 1.0), 1.0, PI / 5.0).expect("valid cone");
    let tau = 2.0;
    let samples = 200_000;
    let mut acc = 0.0;
    for _ in 0..samples {
        let y = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
        if cone.contains(y) {
            acc += (-tau * y.norm()).exp();
        }
    }
    let mc = acc * 4.0 / samples as f64;
    let exact = cone_integral(&cone, tau).expect("tau >= 1");
    let rel = (mc / exact - 1.0).abs();
    out.push(check("geometry", "cone integral vs Monte Carlo", rel < 0.02, format!("rel err {rel:.2e}")));

    let lower = (1..=50).all(|t| {
        let t = t as f64;
        t.powi(3) * cone_integral(&cone, t).unwrap() >= 0.9 * cone.solid_angle() * incomplete_gamma3(cone.height)
    });
    out.push(check("geometry", "cone integral lower bound on [1, 50]", lower, String::new()));

    let ball = Region::ball(Point3::new(0.3, -0.2, 0.1), 0.8);
    let cuboid = Region::cuboid(Point3::new(1.5, 0.5, -0.4), Point3::new(2.5, 1.0, 0.7));
    let d = dist_sets(&ball, &cuboid).expect("disjoint");
    let mut brute = f64::INFINITY;
    for i in 0..=60 {
        for j in 0..=60 {
            for k in 0..=60 {
                let f = |t: usize, a: f64, b: f64| a + (b - a) * t as f64 / 60.0;
                let y = Point3::new(f(i, 1.5, 2.5), f(j, 0.5, 1.0), f(k, -0.4, 0.7));
                brute = brute.min(y.distance(Point3::new(0.3, -0.2, 0.1)) - 0.8);
            }
        }
    }
    out.push(check("geometry", "box-ball distance vs grid search", d <= brute + 1e-12 && brute - d < 0.02, format!("{d:.6} vs {brute:.6}")));

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let w = unit(rng);
        let corners = (0..8).map(|c| {
            let pick = |bit: usize, lo: f64, hi: f64| if c & bit == 0 { lo } else { hi };
            Point3::new(pick(1, 1.5, 2.5), pick(2, 0.5, 1.0), pick(4, -0.4, 0.7))
        });
        let vmax = corners.map(|p| p.dot(w)).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((support_function(&cuboid, w) - vmax).abs());
    }
    out.push(check("geometry", "box support function vs vertices", worst < 1e-12, format!("max err {worst:.1e}")));

    let q = sample_region(&Region::ball(Point3::ORIGIN, 1.0), 0.05).expect("nonempty");
    let rel = (q.total_weight() / (4.0 * PI / 3.0) - 1.0).abs();
    out.push(check("geometry", "ball sampling volume", rel < 0.01, format!("rel err {rel:.2e}")));
    out
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Point3, Point3) {
    (
        Point3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), -rng.gen_range(0.1..3.0)),
        Point3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0)),
    )
}

/// Minimizer of `l_{x,y}` on the segment `x′y′` by scan plus golden section.
pub fn brute_force_snell(x: Point3, y: Point3, layers: Layers) -> [f64; 2] {
    let at = |t: f64| [x.x1 + t * (y.x1 - x.x1), x.x2 + t * (y.x2 - x.x2)];
    let f = |t: f64| path_length(x, y, at(t), layers);
    let n = 2000;
    let k = (0..=n).min_by(|&a, &b| f(a as f64 / n as f64).total_cmp(&f(b as f64 / n as f64))).unwrap();
    let (mut a, mut b) = (((k as f64 - 1.0) / n as f64).max(0.0), ((k as f64 + 1.0) / n as f64).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    at(0.5 * (a + b))
}

fn optical(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let (mut dz, mut res): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let (x, y) = random_pair(rng);
        let layers = Layers::new(rng.gen_range(0.25..4.0), rng.gen_range(0.25..4.0));
        let p = optical_path(x, y, layers).expect("pair straddles interface");
        let b = brute_force_snell(x, y, layers);
        dz = dz.max((p.z_prime[0] - b[0]).hypot(p.z_prime[1] - b[1]));
        res = res.max(p.snell_residual(layers));
    }
    out.push(check("optical", "Snell point vs brute force", dz <= 1e-6, format!("max |dz'| {dz:.1e}")));
    out.push(check("optical", "Snell residual", res <= 1e-10, format!("max {res:.1e}")));

    let (mut below, mut decomposed, mut inside) = (true, 0.0f64, true);
    for _ in 0..200 {
        let (x, y) = random_pair(rng);
        let gm = rng.gen_range(0.25..2.0);
        let layers = Layers::new(gm * rng.gen_range(1.2..4.0), gm);
        let z = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let lt = tilde_l(x, y, z, layers).expect("total reflection possible");
        let l = path_length(x, y, z, layers);
        if in_subcritical_zone(x, z, layers) {
            inside &= lt == l;
        } else {
            below &= lt < l;
            let z0 = critical_point(x, z, layers).expect("outside zone");
            let lift = |p: [f64; 2]| Point3::new(p[0], p[1], 0.0);
            let form = lift(z0).distance(x) / layers.gamma_minus.sqrt()
                + ((z0[0] - z[0]).hypot(z0[1] - z[1]) + lift(z).distance(y)) / layers.gamma_plus.sqrt();
            decomposed = decomposed.max((form - lt).abs());
        }
    }
    out.push(check("optical", "modified length below l outside U1", below, String::new()));
    out.push(check("optical", "modified length equals z0 decomposition", decomposed <= 1e-12, format!("max {decomposed:.1e}")));
    out.push(check("optical", "modified length equals l inside U1", inside, String::new()));

    let (mut dl, mut darg) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let (x, y) = random_pair(rng);
        let gm = rng.gen_range(0.25..2.0);
        let layers = Layers::new(gm * rng.gen_range(1.2..4.0), gm);
        let p = optical_path(x, y, layers).expect("straddles");
        let (v, arg) = min_tilde_l(x, y, layers, 81).expect("total reflection possible");
        dl = dl.max((v - p.l).abs());
        darg = darg.max((arg[0] - p.z_prime[0]).hypot(arg[1] - p.z_prime[1]));
    }
    out.push(check("optical", "min of modified length equals l", dl <= 1e-8 && darg <= 1e-4, format!("|dl| {dl:.1e}, |dz'| {darg:.1e}")));
    out
}

fn resolvent(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let s = SourceSpec::new(Region::ball(Point3::new(0.1, 0.0, 2.0), 0.5), 1.0);
    let q = crate::geometry::QuadratureSet::gauss_ball(Point3::new(0.1, 0.0, 2.0), 0.5, 32, 32, 64);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x = unit(rng) * rng.gen_range(0.1..1.0);
        let tau = rng.gen_range(1.0..10.0);
        let e = v_free_exact(x, tau, &s).expect("outside ball").value;
        let n = v_free(x, tau, &s, &q).expect("valid").value;
        worst = worst.max((n / e - 1.0).abs());
    }
    out.push(check("resolvent", "ball potential vs Gauss quadrature", worst < 1e-6, format!("max rel {worst:.1e}")));

    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x = unit(rng) * rng.gen_range(0.1..1.0);
        let tau = rng.gen_range(1.0..10.0);
        let g = v_free_exact(x, tau, &s).unwrap().gradient;
        let eps = 1e-5;
        for (a, e) in [Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0), Point3::new(0.0, 0.0, 1.0)].into_iter().enumerate() {
            let fd = (v_free_exact(x + e * eps, tau, &s).unwrap().value - v_free_exact(x - e * eps, tau, &s).unwrap().value)
                / (2.0 * eps);
            worst = worst.max((fd - g[a]).abs() / g.norm());
        }
    }
    out.push(check("resolvent", "free-space gradient vs finite differences", worst < 1e-6, format!("max rel {worst:.1e}")));

    let (v, dv) = ball_potential(3.0, 0.5, 1.0, 2.0);
    let fd = (ball_potential(3.0, 0.5, 1.0, 2.0 + 1e-6).0 - ball_potential(3.0, 0.5, 1.0, 2.0 - 1e-6).0) / 2e-6;
    out.push(check("resolvent", "radial derivative of ball potential", ((fd - dv) / dv).abs() < 1e-6, format!("v = {v:.6e}")));

    let g = rng.gen_range(0.5..3.0);
    let x = Point3::new(0.2, -0.1, -0.7);
    let y = Point3::new(-0.3, 0.4, 1.2);
    let k = phi0_asymptotic(x, y, 4.0, Layers::new(g, g)).expect("valid pair");
    let r = x.distance(y);
    let free = (-4.0 * r / g.sqrt()).exp() / (4.0 * PI * g * r);
    let rel = (k.value / free - 1.0).abs();
    out.push(check("resolvent", "leading kernel with equal layers is free space", rel < 1e-12, format!("rel {rel:.1e}")));
    out
}

fn indicator(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let taus = log_tau_grid(2.0, 16.0, 16);
    let (mut exact, mut noisy) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (c, p, l) = (rng.gen_range(0.1..10.0), rng.gen_range(-7.0..2.0), rng.gen_range(0.5..4.0));
        let values: Vec<f64> = taus.iter().map(|t| c * t.powf(p) * (-2.0 * l * t).exp()).collect();
        let fit = extract_length_with(&taus, &values, FitOptions::default()).expect("exact series fits");
        exact = exact.max((fit.l_hat - l).abs());
        let noisy_values: Vec<f64> = values.iter().map(|v| v * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))).collect();
        let fit = extract_length_with(&taus, &noisy_values, FitOptions::default()).expect("noisy series fits");
        noisy = noisy.max((fit.l_hat / l - 1.0).abs());
    }
    out.push(check("indicator", "fit recovers exact synthetic length", exact <= 1e-6, format!("max |dL| {exact:.1e}")));
    out.push(check("indicator", "fit with 1% noise", noisy <= 0.01, format!("max rel {noisy:.2e}")));

    let (t_final, steps) = (3.0, 3000);
    let dt = t_final / steps as f64;
    let series: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let tau = 2.5;
    let closed = (1.0 - (-tau * t_final).exp() * (1.0 + tau * t_final)) / (tau * tau);
    let err = (laplace_transform_series(&series, dt, tau) - closed).abs();
    out.push(check("indicator", "Laplace transform of u = t", err < dt * dt, format!("err {err:.1e}")));

    // Coarse end-to-end run for the equivalence bound between both indicators.
    let medium = Medium::homogeneous().with_inclusion(Region::ball(Point3::ORIGIN, 0.75), Gamma::scalar(2.0));
    let source = SourceSpec::new(Region::ball(Point3::new(0.0, 0.0, 2.5), 0.5), 1.0);
    let opts = PipelineOptions {
        h: 0.1,
        t_final: 4.0,
        taus: taus.clone(),
        tail: Default::default(),
        fit: FitOptions::default(),
        config_hash: String::new(),
        grid: None,
    };
    match run_probe_pipeline(&medium, &source, &opts) {
        Ok(o) => {
            let start = o.fit.as_ref().map(|f| f.window[0]).unwrap_or(taus[0]);
            let seq: Vec<f64> = o.standard.taus.iter().zip(&o.equivalence).filter(|(t, _)| **t >= start).map(|(_, e)| *e).collect();
            let max = seq.iter().copied().fold(0.0, f64::max);
            let bounded = seq.iter().all(|v| v.is_finite()) && max <= 10.0 * seq[0].max(f64::MIN_POSITIVE);
            out.push(check(
                "indicator",
                "equivalence sequence bounded on fit window",
                bounded,
                format!("max {max:.2e}, first {:.2e}, kendall {:.2}", seq[0], kendall_tau(&seq)),
            ));
            let signs = o.sign.as_ref().is_some_and(|s| s.passed);
            out.push(check("indicator", "sign law on coarse pipeline", signs, format!("{:?}", o.fit.as_ref().map(|f| f.l_hat))));
        }
        Err(e) => out.push(check("indicator", "coarse pipeline", false, e.to_string())),
    }
    out
}
