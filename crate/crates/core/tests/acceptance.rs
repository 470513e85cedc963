//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the summary is always printed; exits nonzero if any criterion fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex;
use rand::SeedableRng;
use renvol::extremize::{area_neutral, hessian_quadform, random_direction};
use renvol::grid::convergence_order;
use renvol::infinity::{codazzi_star_residual, intrinsic_curvature_at_infinity, metric_from_infinity_at_rho};
use renvol::patch::{ball_volume, sphere_area};
use renvol::variational::{eps_schedule, schlafli_dv, w_variation};
use renvol::verify::involution_error;
use renvol::wvolume::{legendre_correction, momentum_trace_residual, renormalized_volume, sandwich_check, w_volume_quadrature};
use renvol::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn graph() -> GraphSurface<f64> {
    GraphSurface::new(0.25, TrigSeries::single(1, 1, 0.05, 0.02))
}

fn torus(n: usize, scheme: DiffScheme, f: impl Fn(Complex<f64>) -> f64) -> LiouvilleField<f64> {
    LiouvilleField::torus(Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), n, n, f).unwrap().with_scheme(scheme)
}

fn smooth_phi(z: Complex<f64>) -> f64 {
    0.1 * (TAU * z.re).cos() + 0.05 * (TAU * (z.re + z.im)).sin()
}

fn sphere(r: f64) -> FormField<f64> {
    analytic_family(AnalyticKind::GeodesicSphere(r), 16, 16).unwrap().1
}

fn ball_law() -> Outcome {
    let start = Instant::now();
    let (mut closed, mut quad) = (0.0f64, 0.0f64);
    for r in [0.5, 1.0, 2.0] {
        let leaf = sphere(r);
        let spec = SlabSpec::Foliation { leaf: &leaf, from: -r, to: 0.0 };
        closed = closed.max((w_volume(&spec).unwrap().w + TAU * r).abs());
        quad = quad.max((w_volume_quadrature(&spec, 4096).unwrap().w + TAU * r).abs());
    }
    let t = start.elapsed().as_secs_f64();
    outcome(closed <= 1e-8 && quad <= 1e-6 && t < 1.0, format!("closed {closed:.2e}, quadrature {quad:.2e}, {t:.3} s"))
}

fn sandwich() -> Outcome {
    let mut g0 = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        for rho in [0.3, 1.0, 2.5] {
            let c = sandwich_check(&sphere(r), rho).unwrap();
            g0 = g0.max(if c.genus == 0 { c.residual } else { f64::INFINITY });
        }
    }
    let (_, horo) = analytic_family(AnalyticKind::Horosphere(0.5), 16, 16).unwrap();
    let mut g1 = 0.0f64;
    for rho in [0.3, 1.0, 2.5] {
        let c = sandwich_check(&horo, rho).unwrap();
        g1 = g1.max(if c.genus == 1 { c.residual } else { f64::INFINITY });
    }
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for n in [16usize, 32, 64] {
        let forms = graph().patch(n, DiffScheme::Central).unwrap().compute_forms().unwrap();
        hs.push(1.0 / n as f64);
        errs.push(sandwich_check(&forms, 0.5).unwrap().residual);
    }
    let order = convergence_order(&hs, &errs);
    outcome(g0 <= 1e-8 && g1 <= 1e-10 && order >= 1.8, format!("g=0 {g0:.2e}, g=1 {g1:.2e}, discrete order {order:.2}"))
}

fn renormalized() -> Outcome {
    let rhos: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    let (_, horo) = analytic_family(AnalyticKind::Horosphere(0.5), 16, 16).unwrap();
    let mut identity = 0.0f64;
    let mut limit = 0.0f64;
    let mut decay = Vec::new();
    for (leaf, core, g) in [(sphere(0.5), ball_volume(0.5), 0), (sphere(1.0), ball_volume(1.0), 0), (sphere(2.0), ball_volume(2.0), 0), (horo, 0.0, 1)] {
        let rep = renormalized_volume(&leaf, &rhos, core, Some(g)).unwrap();
        identity = identity.max(rep.max_identity_error);
        limit = limit.max((rep.renormalized_volume - rep.expected).abs());
        if rep.rows[0].model.abs() > 1e-10 {
            decay.push(rep.decay_exponent);
        }
    }
    let decay_ok = !decay.is_empty() && decay.iter().all(|d| (d + 2.0).abs() <= 0.1);
    let worst = decay.iter().cloned().fold(-2.0f64, |a: f64, d| if (d + 2.0).abs() > (a + 2.0).abs() { d } else { a });
    outcome(identity <= 1e-8 && limit <= 1e-6 && decay_ok, format!("identity {identity:.2e}, V_R {limit:.2e}, decay exponent {worst:.4}"))
}

fn involution() -> Outcome {
    let start = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let err = involution_error(&mut rng, 1000);
    let t = start.elapsed().as_secs_f64();
    outcome(err <= 1e-12 && t < 1.0, format!("round trip {err:.2e}, {t:.3} s"))
}

fn mean_plus_gauss() -> Outcome {
    let mut analytic = 0.0f64;
    for r in [0.5f64, 1.0, 2.0] {
        let inf = to_infinity(&sphere(r));
        for k in 0..inf.len() {
            analytic = analytic.max((inf.mean[k] + inf.curvature[k]).abs()).max((inf.mean[k] + 2.0 * (-2.0 * r).exp()).abs());
        }
    }
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for n in [32usize, 64, 128] {
        let inf = to_infinity(&graph().patch(n, DiffScheme::Central).unwrap().compute_forms().unwrap());
        let k = intrinsic_curvature_at_infinity(&inf).unwrap();
        hs.push(1.0 / n as f64);
        errs.push((0..inf.len()).map(|i| (inf.mean[i] + k[i]).abs()).fold(0.0, f64::max));
    }
    let order = convergence_order(&hs, &errs);
    outcome(analytic <= 1e-10 && order >= 1.8, format!("analytic {analytic:.2e}, intrinsic order {order:.2}"))
}

fn codazzi_at_infinity() -> Outcome {
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for n in [16usize, 32, 64] {
        let field = torus(n, DiffScheme::Central, smooth_phi);
        let forms = field.epstein_embedding(1.0).unwrap().compute_forms().unwrap();
        hs.push(1.0 / n as f64);
        errs.push(codazzi_star_residual(&to_infinity(&forms)).unwrap());
    }
    let order = convergence_order(&hs, &errs);
    outcome(order >= 1.8, format!("order {order:.2}, residuals {:.2e} → {:.2e}", errs[0], errs[2]))
}

fn three_way() -> Outcome {
    let eps = eps_schedule::<f64>();
    let mut spread = 0.0f64;
    let mut ball = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let w = w_variation(&BallFamily { radius: r, n: 32 }, &eps).unwrap();
        spread = spread.max(w.spread());
        ball = ball.max((w.boundary + TAU).abs());
    }
    let fam = GraphFamily::new(graph(), GraphDirection::Vertical(TrigSeries::single(1, 1, 0.3, 0.2)), 32);
    let g = w_variation(&fam, &eps).unwrap();
    spread = spread.max(g.spread());
    let field = torus(32, DiffScheme::Spectral, |z| 0.1 * (TAU * z.re).cos());
    let u = (0..field.phi.len()).map(|k| 0.2 * (TAU * field.node(k).re).cos() + 0.1 * (TAU * field.node(k).im).sin()).collect();
    let e = w_variation(&EpsteinFamily::new(field, u, 1.0).unwrap(), &eps).unwrap();
    spread = spread.max(e.spread());
    // On Epstein tori W is exactly quadratic in φ, so the central difference
    // carries no truncation error and the comparison is absolute.
    let epstein_fd = e.check.max_error();
    let ok = spread <= 1e-9 && g.check.order >= 2.0 && epstein_fd <= 1e-9 && ball <= 1e-6;
    outcome(
        ok,
        format!("spread {spread:.2e}, graph FD order {:.2}, Epstein FD error {epstein_fd:.2e}, ball dW/dr {ball:.2e}", g.check.order),
    )
}

fn schlafli_volume() -> Outcome {
    let eps = eps_schedule::<f64>();
    let mut ball = 0.0f64;
    for r in [0.5f64, 1.0, 2.0] {
        let dv = schlafli_dv(&BallFamily { radius: r, n: 32 }, &eps).unwrap();
        ball = ball.max((dv.formula - sphere_area(r)).abs() / sphere_area(r));
    }
    let dir = GraphDirection::Tangential(TrigSeries::single(0, 1, 0.1, 0.0), TrigSeries::single(1, 0, 0.0, 0.1));
    let dv = schlafli_dv(&GraphFamily::new(graph(), dir, 32), &eps).unwrap();
    let tangential = dv.formula.abs().max(dv.finest_error());
    outcome(ball <= 1e-6 && tangential <= 1e-8, format!("ball relative {ball:.2e}, tangential {tangential:.2e}"))
}

fn self_duality() -> Outcome {
    let mut surfaces = vec![sphere(0.5), sphere(1.0), sphere(2.0), analytic_family(AnalyticKind::Horosphere(0.5), 16, 16).unwrap().1];
    let g = graph().patch(32, DiffScheme::Spectral).unwrap().compute_forms().unwrap();
    surfaces.push(renvol::equidistant::forms_at_distance(&g, 0.7).unwrap());
    surfaces.push(g);
    let (mut tr, mut legendre) = (0.0f64, 0.0f64);
    for f in &surfaces {
        tr = tr.max(momentum_trace_residual(f));
        legendre = legendre.max(legendre_correction(f).unwrap().abs());
    }
    let mut gap = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let leaf = sphere(r);
        gap = gap.max(w_volume(&SlabSpec::Foliation { leaf: &leaf, from: -r, to: 0.0 }).unwrap().duality_gap().abs());
    }
    outcome(tr <= 1e-14 && legendre <= 1e-10 && gap == 0.0, format!("tr π {tr:.2e}, ∫⟨π,I⟩ {legendre:.2e}, gap {gap:.1e}"))
}

fn epstein_consistency() -> Outcome {
    let rho = 2.0;
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for n in [16usize, 32, 64] {
        let field = torus(n, DiffScheme::Central, smooth_phi);
        let forms = field.epstein_embedding(rho).unwrap().compute_forms().unwrap();
        let predicted = metric_from_infinity_at_rho(&field.infinity_data().unwrap(), rho);
        hs.push(1.0 / n as f64);
        errs.push((0..predicted.len()).map(|k| (forms.first[k] - predicted[k]).max_abs()).fold(0.0, f64::max));
    }
    let order = convergence_order(&hs, &errs);
    let c = 0.3;
    let flat = torus(16, DiffScheme::Spectral, |_| c);
    let forms = flat.epstein_embedding(rho).unwrap().compute_forms().unwrap();
    let expected = 0.5 * (2.0 * rho + c).exp();
    let constant = forms.first.iter().map(|g| (*g - Mat2::identity().scale(expected)).max_abs()).fold(0.0, f64::max);
    let fuchsian = LiouvilleField::patch(Complex::new(-0.5, 1.0), Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), 61, 61, |z: Complex<f64>| {
        -2.0 * z.im.ln()
    })
    .unwrap();
    let theta = fuchsian.hqd_theta().unwrap().theta;
    let (k1, k2) = fuchsian.principal_curvatures_at_infinity().unwrap();
    let grid = fuchsian.grid();
    let th = grid.interior_nodes().map(|k| theta[k].norm()).fold(0.0, f64::max);
    let kk = grid.interior_nodes().map(|k| (k1[k] - 0.5).abs().max((k2[k] - 0.5).abs())).fold(0.0, f64::max);
    outcome(
        order >= 1.8 && constant <= 1e-10 && th <= 1e-8 && kk <= 1e-8,
        format!("metric order {order:.2}, constant φ {constant:.2e}, Fuchsian θ {th:.2e}, k* {kk:.2e}"),
    )
}

fn extremization() -> Outcome {
    let start = Instant::now();
    let field = torus(64, DiffScheme::Spectral, |z| 0.3 + 0.1 * (TAU * z.re).cos());
    let state = ConformalState::new(field, 1.0).unwrap();
    let gb0 = state.gauss_bonnet().unwrap();
    let (state, report) = run_extremization(state, &ExtremizeOptions::default()).unwrap();
    let t = start.elapsed().as_secs_f64();
    let drift = report.gauss_bonnet_drift().max((state.gauss_bonnet().unwrap() - gb0).abs());
    let mut rng = rand::rngs::StdRng::seed_from_u64(20);
    let mut negative = 0;
    for _ in 0..20 {
        let v = area_neutral(&state, &random_direction(&state.base, &mut rng, 3));
        let h = hessian_quadform(&state, &v, &v, 1e-6).unwrap();
        if h.laplacian_route < 0.0 && h.gradient_route < 0.0 {
            negative += 1;
        }
    }
    let ok = report.converged && report.curvature_stddev <= 1e-6 && t < 30.0 && report.max_decrease() <= 0.0 && negative == 20 && drift <= 1e-8;
    outcome(
        ok,
        format!(
            "stddev(K*) {:.2e} after {} steps in {t:.2} s, max F decrease {:.1e}, {negative}/20 negative probes, ∫K* drift {drift:.1e}",
            report.curvature_stddev,
            report.iterations,
            report.max_decrease()
        ),
    )
}

fn schwarzian_operator() -> Outcome {
    let patch = ComplexPatch { origin: Complex::new(0.2, 0.3), h: 0.02, n: 41, m: 5 };
    let interior: Vec<usize> = (0..patch.n * patch.m).filter(|&k| patch.is_interior(k)).collect();
    let mut mobius = 0.0f64;
    for (a, b, c, d) in [(2.0, 1.0, 0.3, 1.5), (1.0, -0.4, -0.2, 1.0), (0.5, 2.0, 1.0, 1.5)] {
        let s = schwarzian(&patch.sample(|z| (z * a + b) / (z * c + d)), &patch).unwrap();
        mobius = mobius.max(interior.iter().map(|&k| s[k].norm()).fold(0.0, f64::max));
    }
    let s = schwarzian(&patch.sample(|z| z.exp()), &patch).unwrap();
    let exp = interior.iter().map(|&k| (s[k] + 0.5).norm()).fold(0.0, f64::max);
    let s = schwarzian(&patch.sample(|z| z * z), &patch).unwrap();
    let square = interior
        .iter()
        .map(|&k| {
            let z = patch.node(k);
            (s[k] + (z * z * 2.0).inv() * 3.0).norm()
        })
        .fold(0.0, f64::max);
    outcome(mobius <= 1e-8 && exp <= 1e-8 && square <= 1e-8, format!("Möbius {mobius:.2e}, exp {exp:.2e}, z² {square:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("ball law W = −2πr", ball_law),
        ("sandwich formula", sandwich),
        ("renormalized-volume identity", renormalized),
        ("involution at infinity", involution),
        ("H* + K* = 0", mean_plus_gauss),
        ("Codazzi at infinity", codazzi_at_infinity),
        ("three-way δW agreement", three_way),
        ("Schläfli δV", schlafli_volume),
        ("self-duality", self_duality),
        ("Epstein consistency", epstein_consistency),
        ("extremization", extremization),
        ("Schwarzian operator", schwarzian_operator),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failures += 1;
        }
        println!("criterion {:2} {}: {} ({})", i + 1, if o.passed { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
