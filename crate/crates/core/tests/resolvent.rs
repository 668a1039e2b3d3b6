use proptest::prelude::*;
use wave_enclosure::forward::SourceSpec;
use wave_enclosure::geometry::{sample_region, Point3, QuadratureSet, Region};
use wave_enclosure::indicator::log_tau_grid;
use wave_enclosure::medium::Background;
use wave_enclosure::resolvent::{
    grad_norm_sq_free, v_free, v_free_exact, v_layered, HelmholtzSolveSpec, LayeredSolver, ResolventError,
    SolveMethod,
};

fn source() -> SourceSpec {
    SourceSpec::new(Region::ball(Point3::new(0.1, -0.2, 1.0), 0.5), 1.0)
}

fn outside() -> impl Strategy<Value = Point3> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
        .prop_map(|(a, b, c)| Point3::new(a, b, c))
        .prop_filter("outside the closed source", |x| x.distance(Point3::new(0.1, -0.2, 1.0)) > 0.55)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_field_is_positive(x in outside(), tau in 1.0..20.0f64) {
        prop_assert!(v_free_exact(x, tau, &source()).unwrap().value > 0.0);
    }

    #[test]
    fn closed_form_gradient_matches_differences(x in outside(), tau in 1.0..10.0f64) {
        let s = source();
        let g = v_free_exact(x, tau, &s).unwrap().gradient;
        let e = 1e-5;
        let axes = [Point3::new(e, 0.0, 0.0), Point3::new(0.0, e, 0.0), Point3::new(0.0, 0.0, e)];
        for (a, d) in axes.iter().enumerate() {
            let fd = (v_free_exact(x + *d, tau, &s).unwrap().value - v_free_exact(x - *d, tau, &s).unwrap().value) / (2.0 * e);
            prop_assert!((fd - g[a]).abs() <= 1e-5 * g.norm(), "axis {}: {} vs {}", a, fd, g[a]);
        }
    }
}

#[test]
fn quadrature_field_matches_closed_form() {
    let s = source();
    let q = sample_region(&s.region, 0.02).unwrap();
    for x in [Point3::new(0.0, 0.0, -0.5), Point3::new(1.4, 0.3, 0.9), Point3::new(-0.7, -1.0, 2.2)] {
        for tau in [1.0, 4.0, 9.0] {
            let a = v_free(x, tau, &s, &q).unwrap();
            let b = v_free_exact(x, tau, &s).unwrap();
            assert!(rel(a.value, b.value) < 1e-2, "{x:?} τ={tau}: {} vs {}", a.value, b.value);
            assert!((a.gradient - b.gradient).norm() < 1e-2 * b.gradient.norm());
        }
    }
}

#[test]
fn quadrature_gradient_matches_differences() {
    let s = SourceSpec::new(Region::cuboid(Point3::new(-0.3, -0.3, 0.5), Point3::new(0.3, 0.2, 0.9)), 1.0);
    let q = sample_region(&s.region, 0.05).unwrap();
    let x = Point3::new(0.4, -0.1, -0.6);
    let tau = 3.0;
    let g = v_free(x, tau, &s, &q).unwrap().gradient;
    let e = 1e-5;
    for a in 0..3 {
        let mut d = [0.0; 3];
        d[a] = e;
        let d = Point3::new(d[0], d[1], d[2]);
        let fd = (v_free(x + d, tau, &s, &q).unwrap().value - v_free(x - d, tau, &s, &q).unwrap().value) / (2.0 * e);
        assert!((fd - g[a]).abs() <= 1e-5 * g.norm());
    }
}

#[test]
fn gradient_norm_respects_the_exponent_envelopes() {
    let d = Region::ball(Point3::ORIGIN, 1.0);
    let s = SourceSpec::new(Region::ball(Point3::new(0.0, 0.0, 3.0), 0.5), 1.0);
    let l = 1.5;
    let taus = log_tau_grid(2.0, 16.0, 10);
    let g: Vec<f64> = taus.iter().map(|&t| grad_norm_sq_free(&d, &s, t, 0.02).unwrap()).collect();
    let lower: Vec<f64> = taus.iter().zip(&g).map(|(t, g)| t.powi(7) * (2.0 * t * l).exp() * g).collect();
    let upper: Vec<f64> = taus.iter().zip(&g).map(|(t, g)| t.powi(-2) * (2.0 * t * l).exp() * g).collect();
    assert!(lower.windows(2).all(|w| w[1] > w[0]), "{lower:?}");
    assert!(upper.windows(2).all(|w| w[1] < w[0]), "{upper:?}");
}

fn eval_set() -> QuadratureSet {
    let nodes = vec![Point3::new(0.3, 0.0, -0.8), Point3::new(-0.2, 0.5, -1.2), Point3::new(0.9, 0.1, 0.4)];
    QuadratureSet { weights: vec![1.0; nodes.len()], nodes }
}

fn small_spec(s: &SourceSpec, tau_min: f64) -> HelmholtzSolveSpec {
    HelmholtzSolveSpec::padded(&s.region, &Region::ball(Point3::new(0.3, 0.2, -0.4), 1.0), 0.08, tau_min, 0.0)
}

#[test]
fn equal_layers_reproduce_free_space() {
    let s = source();
    let tau = 3.0;
    let bg = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 1.0 };
    let (v, _) = v_layered(&eval_set(), tau, &s, bg, &small_spec(&s, tau)).unwrap();
    for p in &v {
        let exact = v_free_exact(p.x, tau, &s).unwrap();
        assert!(rel(p.value, exact.value) < 3e-2, "{:?}: {} vs {}", p.x, p.value, exact.value);
        assert!((p.gradient - exact.gradient).norm() < 5e-2 * exact.gradient.norm());
    }
}

#[test]
fn marched_and_direct_solves_agree() {
    let s = source();
    let bg = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 3.0 };
    let taus = [3.0, 5.0];
    let mut spec = small_spec(&s, taus[0]);
    spec.tolerance = 1e-12;
    spec.method = SolveMethod::TimeMarched;
    let (a, _) = LayeredSolver::new(bg, &s, spec, eval_set().nodes).unwrap().sweep(&taus).unwrap();
    spec.method = SolveMethod::Direct;
    let (b, _) = LayeredSolver::new(bg, &s, spec, eval_set().nodes).unwrap().sweep(&taus).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for (pa, pb) in ra.iter().zip(rb) {
            assert!(rel(pa.value, pb.value) < 1e-6, "{} vs {}", pa.value, pb.value);
        }
    }
}

#[test]
fn quarter_turn_about_the_vertical_axis_is_a_symmetry() {
    let rot = |p: Point3| Point3::new(-p.x2, p.x1, p.x3);
    let bg = Background::TwoLayer { gamma_plus: 2.0, gamma_minus: 0.7 };
    let tau = 3.0;
    let s = source();
    let mut eval = eval_set();
    let (v, _) = v_layered(&eval, tau, &s, bg, &small_spec(&s, tau)).unwrap();
    let Region::Ball { center, radius } = s.region else { unreachable!() };
    let s_rot = SourceSpec::new(Region::ball(rot(center), radius), 1.0);
    eval.nodes = eval.nodes.into_iter().map(rot).collect();
    let spec = HelmholtzSolveSpec::padded(
        &s_rot.region,
        &Region::ball(rot(Point3::new(0.3, 0.2, -0.4)), 1.0),
        0.08,
        tau,
        0.0,
    );
    let (w, _) = v_layered(&eval, tau, &s_rot, bg, &spec).unwrap();
    for (a, b) in v.iter().zip(&w) {
        assert!(rel(b.value, a.value) < 1e-9, "{} vs {}", a.value, b.value);
        assert!((b.gradient - rot(a.gradient)).norm() < 1e-8 * a.gradient.norm());
    }
}

#[test]
fn layered_field_is_linear_in_the_source() {
    let s = source();
    let bg = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 4.0 };
    let tau = 3.0;
    let spec = small_spec(&s, tau);
    let (v1, _) = v_layered(&eval_set(), tau, &s, bg, &spec).unwrap();
    let (v2, _) = v_layered(&eval_set(), tau, &s.clone().scaled(2.5), bg, &spec).unwrap();
    let (vn, _) = v_layered(&eval_set(), tau, &s.clone().negated(), bg, &spec).unwrap();
    for ((a, b), c) in v1.iter().zip(&v2).zip(&vn) {
        assert!(rel(b.value, 2.5 * a.value) < 1e-10);
        assert!(rel(c.value, -a.value) < 1e-12);
    }
}

#[test]
fn layered_gradient_is_consistent_with_its_values() {
    let s = source();
    let bg = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 4.0 };
    let (tau, h) = (3.0, 0.08);
    let x = Point3::new(0.5 * h, 0.5 * h, -10.5 * h);
    let mut nodes = vec![x];
    for a in 0..3 {
        for sgn in [-1.0, 1.0] {
            let mut d = [0.0; 3];
            d[a] = sgn * h;
            nodes.push(x + Point3::new(d[0], d[1], d[2]));
        }
    }
    let eval = QuadratureSet { weights: vec![1.0; nodes.len()], nodes };
    let (v, _) = v_layered(&eval, tau, &s, bg, &small_spec(&s, tau)).unwrap();
    for a in 0..3 {
        let fd = (v[2 + 2 * a].value - v[1 + 2 * a].value) / (2.0 * h);
        assert!((fd - v[0].gradient[a]).abs() <= 1e-3 * v[0].gradient.norm());
    }
}

#[test]
fn insufficient_decay_padding_is_reported() {
    let s = source();
    let mut spec = small_spec(&s, 3.0);
    spec.extent = [spec.extent[0] - 2.0, spec.extent[1], spec.extent[2]];
    let bg = Background::TwoLayer { gamma_plus: 1.0, gamma_minus: 4.0 };
    let err = v_layered(&eval_set(), 3.0, &s, bg, &spec).unwrap_err();
    assert!(matches!(err, ResolventError::PaddingViolation { .. }), "{err}");
}
