//! Named invariant suites with configurable tolerances, shared by the
//! command-line front end.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::equidistant::forms_at_distance;
use crate::error::{Error, Result};
use crate::extremize::{area_neutral, hessian_quadform, random_direction, run_extremization, ConformalState, ExtremizeOptions};
use crate::grid::{convergence_order, DiffScheme};
use crate::infinity::{
    codazzi_star_residual, intrinsic_curvature_at_infinity, metric_from_infinity_at_rho, star_forms, to_infinity,
    unstar_forms,
};
use crate::linalg::Mat2;
use crate::liouville::{schwarzian, ComplexPatch, LiouvilleField};
use crate::patch::{analytic_family, ball_volume, codazzi_residual, gauss_residual, sphere_area, AnalyticKind, GraphSurface, TrigSeries};
use crate::variational::{eps_schedule, schlafli_dv, trace_identity_check, w_variation, BallFamily, EpsteinFamily, GraphDirection, GraphFamily};
use crate::wvolume::{legendre_correction, momentum_trace_residual, renormalized_volume, sandwich_check, w_volume, w_volume_quadrature, SlabSpec};

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 6] = ["forms", "infinity", "volume", "schlafli", "extremize", "all"];

/// `key = value` settings; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        match self.values.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad value for {key}: {s}"))),
        }
    }

    /// Comma-separated list.
    pub fn list<V: FromStr + Clone>(&self, key: &str, default: &[V]) -> Result<Vec<V>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad list entry for {key}: {t}"))))
                .collect(),
        }
    }

    /// Tolerance `tol.<name>`.
    pub fn tol(&self, name: &str, default: f64) -> Result<f64> {
        self.get(&format!("tol.{name}"), default)
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed", 7)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(suite: &str, name: impl Into<String>, value: f64, bound: Bound, tolerance: f64) -> Self {
        let passed = match bound {
            Bound::AtMost => value <= tolerance,
            Bound::AtLeast => value >= tolerance,
        };
        Self { suite: suite.into(), name: name.into(), value, bound, tolerance, passed }
    }

    pub fn at_most(suite: &str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(suite, name, value, Bound::AtMost, tolerance)
    }

    pub fn at_least(suite: &str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(suite, name, value, Bound::AtLeast, tolerance)
    }
}

pub fn write_checks_csv(checks: &[Check], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["suite", "name", "value", "bound", "tolerance", "passed"])?;
    for c in checks {
        let bound = match c.bound {
            Bound::AtMost => "at_most",
            Bound::AtLeast => "at_least",
        };
        w.write_record([&c.suite, &c.name, &c.value.to_string(), bound, &c.tolerance.to_string(), &c.passed.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a suite, or every suite for `"all"`.
pub fn run_suite(name: &str, config: &Config) -> Result<Vec<Check>> {
    match name {
        "forms" => forms_suite(config),
        "infinity" => infinity_suite(config),
        "volume" => volume_suite(config),
        "schlafli" => schlafli_suite(config),
        "extremize" => extremize_suite(config),
        "all" => {
            let mut out = Vec::new();
            for s in &SUITES[..SUITES.len() - 1] {
                out.extend(run_suite(s, config)?);
            }
            Ok(out)
        }
        other => Err(Error::Parse(format!("unknown suite {other}; expected one of {}", SUITES.join("|")))),
    }
}

fn default_graph() -> GraphSurface<f64> {
    GraphSurface::new(0.25, TrigSeries::single(1, 1, 0.05, 0.02))
}

fn refinement(config: &Config) -> Result<Vec<usize>> {
    config.list("grid.refinement", &[32usize, 64, 128])
}

fn forms_suite(config: &Config) -> Result<Vec<Check>> {
    const S: &str = "forms";
    let mut out = Vec::new();
    let ns = refinement(config)?;
    let surface = GraphSurface::new(1.0, TrigSeries::single(1, 0, 0.05, 0.0).plus(&TrigSeries::single(1, 1, 0.0, 0.03)));
    let (mut hs, mut gauss, mut codazzi) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &ns {
        let forms = surface.patch(n, DiffScheme::Central)?.compute_forms()?;
        hs.push(1.0 / n as f64);
        gauss.push(gauss_residual(&forms)?);
        codazzi.push(codazzi_residual(&forms)?);
        if n == *ns.last().unwrap() {
            out.push(Check::at_most(S, "self-adjointness of B", forms.self_adjointness_residual(), config.tol("self_adjoint", 1e-12)?));
        }
    }
    let order = config.tol("order", 1.8)?;
    out.push(Check::at_least(S, "Gauss equation order (central)", convergence_order(&hs, &gauss), order));
    out.push(Check::at_least(S, "Codazzi equation order (central)", convergence_order(&hs, &codazzi), order));
    let spectral = surface.patch(64, DiffScheme::Spectral)?.compute_forms()?;
    out.push(Check::at_most(S, "Gauss equation (spectral)", gauss_residual(&spectral)?, config.tol("spectral", 1e-8)?));
    out.push(Check::at_most(S, "Codazzi equation (spectral)", codazzi_residual(&spectral)?, config.tol("spectral", 1e-8)?));
    for r in [0.5f64, 1.0, 2.0] {
        let (_, forms) = analytic_family(AnalyticKind::GeodesicSphere(r), 32, 32)?;
        let a = forms.integrate(|_| 1.0);
        out.push(Check::at_most(S, format!("sphere area r={r}"), (a - sphere_area(r)).abs() / sphere_area(r), config.tol("quadrature", 1e-10)?));
    }
    let patch = ComplexPatch { origin: Complex::new(0.2, 0.3), h: 0.02, n: 41, m: 5 };
    let mobius = patch.sample(|z| (z * 2.0 + Complex::new(1.0, 0.5)) / (z * Complex::new(0.3, -0.2) + Complex::new(1.5, 0.0)));
    let exp = patch.sample(|z| z.exp());
    let interior: Vec<usize> = (0..patch.n * patch.m).filter(|&k| patch.is_interior(k)).collect();
    let sm = schwarzian(&mobius, &patch)?;
    let se = schwarzian(&exp, &patch)?;
    let tol = config.tol("schwarzian", 1e-8)?;
    out.push(Check::at_most(S, "Schwarzian of a Möbius map", interior.iter().map(|&k| sm[k].norm()).fold(0.0, f64::max), tol));
    out.push(Check::at_most(S, "Schwarzian of exp", interior.iter().map(|&k| (se[k] + 0.5).norm()).fold(0.0, f64::max), tol));
    Ok(out)
}

/// Random `(I, II)` with `E + B` invertible.
pub fn random_admissible_pair(rng: &mut impl Rng) -> (Mat2<f64>, Mat2<f64>) {
    loop {
        let a = Mat2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let i = (a.transpose() * a + Mat2::identity().scale(0.3)).symmetrized();
        let s = Mat2::sym(rng.gen_range(-0.9..0.9), rng.gen_range(-0.5..0.5), rng.gen_range(-0.9..0.9));
        let ii = (i * s).symmetrized();
        let b = i.solve(&ii).unwrap();
        let (k1, k2) = b.real_eigenvalues();
        if k1 < 0.95 && k2 > -0.95 {
            return (i, ii);
        }
    }
}

/// Largest involution round-trip error over `samples` random pairs.
pub fn involution_error(rng: &mut impl Rng, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (i, ii) = random_admissible_pair(rng);
        let b = i.solve(&ii).unwrap();
        let (is, iis, _) = star_forms(&i, &b);
        let bs = is.solve(&iis).unwrap();
        let (i2, ii2, _) = unstar_forms(&is, &bs).unwrap();
        let scale = 1.0 + i.max_abs() + ii.max_abs();
        worst = worst.max(((i2 - i).max_abs() + (ii2 - ii).max_abs()) / scale);
    }
    worst
}

fn smooth_phi(z: Complex<f64>) -> f64 {
    0.1 * (TAU * z.re).cos() + 0.05 * (TAU * (z.re + z.im)).sin()
}

fn unit_torus(n: usize, scheme: DiffScheme, f: impl Fn(Complex<f64>) -> f64) -> Result<LiouvilleField<f64>> {
    Ok(LiouvilleField::torus(Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), n, n, f)?.with_scheme(scheme))
}

fn infinity_suite(config: &Config) -> Result<Vec<Check>> {
    const S: &str = "infinity";
    let mut out = Vec::new();
    let mut rng = rand::rngs::StdRng::seed_from_u64(config.seed()?);
    let samples = config.get("infinity.samples", 1000usize)?;
    out.push(Check::at_most(S, "involution round trip", involution_error(&mut rng, samples), config.tol("involution", 1e-12)?));
    for r in [0.5f64, 1.0, 2.0] {
        let (_, forms) = analytic_family(AnalyticKind::GeodesicSphere(r), 16, 16)?;
        let inf = to_infinity(&forms);
        let hk = (0..inf.len()).map(|k| (inf.mean[k] + inf.curvature[k]).abs()).fold(0.0, f64::max);
        let h = (0..inf.len()).map(|k| (inf.mean[k] + 2.0 * (-2.0 * r).exp()).abs()).fold(0.0, f64::max);
        out.push(Check::at_most(S, format!("H* + K* sphere r={r}"), hk.max(h), config.tol("analytic", 1e-10)?));
    }
    let ns = refinement(config)?;
    let order = config.tol("order", 1.8)?;
    let (mut hs, mut hk, mut cod, mut met) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let rho = 2.0;
    for &n in &ns {
        hs.push(1.0 / n as f64);
        let forms = default_graph().patch(n, DiffScheme::Central)?.compute_forms()?;
        let inf = to_infinity(&forms);
        let kint = intrinsic_curvature_at_infinity(&inf)?;
        hk.push(inf.grid.interior_nodes().map(|k| (inf.mean[k] + kint[k]).abs()).fold(0.0, f64::max));
        let field = unit_torus(n, DiffScheme::Central, smooth_phi)?;
        let eps = field.epstein_embedding(rho)?;
        let eforms = eps.compute_forms()?;
        cod.push(codazzi_star_residual(&to_infinity(&eforms))?);
        let predicted = metric_from_infinity_at_rho(&field.infinity_data()?, rho);
        let scale = 0.5 * (2.0 * rho).exp();
        met.push((0..predicted.len()).map(|k| (eforms.first[k] - predicted[k]).max_abs() / scale).fold(0.0, f64::max));
    }
    out.push(Check::at_least(S, "H* + intrinsic K* order", convergence_order(&hs, &hk), order));
    out.push(Check::at_least(S, "Codazzi at infinity order (Epstein)", convergence_order(&hs, &cod), order));
    out.push(Check::at_least(S, "Epstein metric vs data at infinity order", convergence_order(&hs, &met), order));
    let flat = unit_torus(16, DiffScheme::Spectral, |_| 0.3)?;
    let forms = flat.epstein_embedding(rho)?.compute_forms()?;
    let expected = 0.5 * (2.0 * rho + 0.3f64).exp();
    let err = forms.first.iter().map(|g| (*g - Mat2::identity().scale(expected)).max_abs()).fold(0.0, f64::max);
    out.push(Check::at_most(S, "Epstein metric, constant φ", err, config.tol("epstein_const", 1e-10)?));
    let fuchsian = LiouvilleField::patch(Complex::new(-0.5, 1.0), Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), 61, 61, |z: Complex<f64>| -2.0 * z.im.ln())?;
    let theta = fuchsian.hqd_theta()?.theta;
    let (k1, k2) = fuchsian.principal_curvatures_at_infinity()?;
    let grid = fuchsian.grid();
    let tol = config.tol("fuchsian", 1e-8)?;
    out.push(Check::at_most(S, "Fuchsian θ", grid.interior_nodes().map(|k| theta[k].norm()).fold(0.0, f64::max), tol));
    let kerr = grid.interior_nodes().map(|k| (k1[k] - 0.5).abs().max((k2[k] - 0.5).abs())).fold(0.0, f64::max);
    out.push(Check::at_most(S, "Fuchsian k*₁ = k*₂ = ½", kerr, tol));
    let random = unit_torus(32, DiffScheme::Spectral, smooth_phi)?;
    out.push(Check::at_most(S, "II*₀ = Re(θ dz²)", random.traceless_matches_theta()?, config.tol("traceless", 1e-12)?));
    Ok(out)
}

fn volume_suite(config: &Config) -> Result<Vec<Check>> {
    const S: &str = "volume";
    let mut out = Vec::new();
    let intervals = config.get("volume.intervals", 4096usize)?;
    for r in [0.5, 1.0, 2.0] {
        let (_, leaf) = analytic_family(AnalyticKind::GeodesicSphere(r), 16, 16)?;
        let spec = SlabSpec::Foliation { leaf: &leaf, from: -r, to: 0.0 };
        let closed = w_volume(&spec)?;
        let quad = w_volume_quadrature(&spec, intervals)?;
        out.push(Check::at_most(S, format!("W(ball r={r}) closed form"), (closed.w + TAU * r).abs(), config.tol("ball_closed", 1e-8)?));
        out.push(Check::at_most(S, format!("W(ball r={r}) quadrature"), (quad.w + TAU * r).abs(), config.tol("ball_quadrature", 1e-6)?));
        out.push(Check::at_most(S, format!("V(ball r={r})"), (closed.volume - ball_volume(r)).abs(), config.tol("ball_closed", 1e-8)?));
        out.push(Check::at_most(S, format!("self-duality gap r={r}"), closed.duality_gap().abs(), 0.0));
        let sw = sandwich_check(&leaf, 0.7)?;
        out.push(Check::at_most(S, format!("sandwich sphere r={r}"), sw.residual, config.tol("sandwich_sphere", 1e-8)?));
    }
    let (_, horo) = analytic_family(AnalyticKind::Horosphere(0.5), 16, 16)?;
    for rho in [0.5, 1.0, 2.0] {
        let sw = sandwich_check(&horo, rho)?;
        out.push(Check::at_most(S, format!("sandwich horotorus ρ={rho}"), sw.residual, config.tol("sandwich_torus", 1e-10)?));
    }
    let ns: Vec<usize> = config.list("volume.refinement", &[16usize, 32, 64])?;
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for &n in &ns {
        let forms = default_graph().patch(n, DiffScheme::Central)?.compute_forms()?;
        hs.push(1.0 / n as f64);
        errs.push(sandwich_check(&forms, 0.5)?.residual);
    }
    out.push(Check::at_least(S, "discrete sandwich order", convergence_order(&hs, &errs), config.tol("order", 1.8)?));
    let rhos: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    for (label, leaf, core, genus) in [
        ("sphere r=1", analytic_family(AnalyticKind::GeodesicSphere(1.0), 16, 16)?.1, ball_volume(1.0), 0i64),
        ("horotorus", horo.clone(), 0.0, 1),
    ] {
        let rep = renormalized_volume(&leaf, &rhos, core, Some(genus))?;
        out.push(Check::at_most(S, format!("renormalized identity ({label})"), rep.max_identity_error, config.tol("renormalized", 1e-8)?));
        out.push(Check::at_most(S, format!("V_R = W − π(g−1) ({label})"), (rep.renormalized_volume - rep.expected).abs(), config.tol("renormalized_limit", 1e-6)?));
        // The ρ-dependent part vanishes identically on horotori.
        if rep.rows[0].model.abs() > 1e-10 {
            out.push(Check::at_most(S, format!("decay exponent ({label})"), (rep.decay_exponent + 2.0).abs() / 2.0, 0.05));
        }
    }
    for (label, forms) in [
        ("sphere", analytic_family(AnalyticKind::GeodesicSphere(1.0), 16, 16)?.1),
        ("graph", default_graph().patch(32, DiffScheme::Spectral)?.compute_forms()?),
        ("leaf", forms_at_distance(&default_graph().patch(32, DiffScheme::Spectral)?.compute_forms()?, 0.5)?),
    ] {
        out.push(Check::at_most(S, format!("tr π ({label})"), momentum_trace_residual(&forms), config.tol("momentum_trace", 1e-14)?));
        out.push(Check::at_most(S, format!("∫⟨π, I⟩ ({label})"), legendre_correction(&forms)?.abs(), config.tol("legendre", 1e-10)?));
    }
    Ok(out)
}

/// Fitted order, or infinity when every finite difference already agrees
/// with the formula to `floor` (no truncation error left to fit).
fn order_or_exact(check: &crate::variational::VariationCheck, floor: f64) -> f64 {
    if check.max_error() <= floor * (1.0 + check.formula.abs()) {
        f64::INFINITY
    } else {
        check.order
    }
}

fn schlafli_suite(config: &Config) -> Result<Vec<Check>> {
    const S: &str = "schlafli";
    let mut out = Vec::new();
    let mut rng = rand::rngs::StdRng::seed_from_u64(config.seed()?);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a: Mat2<f64> = Mat2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let b = Mat2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if a.det().abs() > 1e-3 {
            worst = worst.max(trace_identity_check(&a, &b)?);
        }
    }
    out.push(Check::at_most(S, "2×2 trace identity", worst, config.tol("trace_identity", 1e-12)?));
    let eps = eps_schedule::<f64>();
    let spread = config.tol("spread", 1e-9)?;
    let order = config.tol("variation_order", 2.0)?;
    let floor = config.tol("fd_floor", 1e-9)?;
    for r in [0.5, 1.0, 2.0] {
        let fam = BallFamily { radius: r, n: 32 };
        let dv = schlafli_dv(&fam, &eps)?;
        let a = sphere_area(r);
        out.push(Check::at_most(S, format!("ball δV = A r={r}"), (dv.formula - a).abs() / a, config.tol("ball_dv", 1e-6)?));
        let w = w_variation(&fam, &eps)?;
        out.push(Check::at_most(S, format!("ball dW/dr = −2π r={r}"), (w.boundary + TAU).abs(), config.tol("ball_dw", 1e-6)?));
        out.push(Check::at_most(S, format!("ball three-way δW r={r}"), w.spread(), spread));
    }
    let n = config.get("schlafli.n", 32usize)?;
    let vertical = GraphFamily::new(default_graph(), GraphDirection::Vertical(TrigSeries::single(1, 1, 0.3, 0.2)), n);
    let w = w_variation(&vertical, &eps)?;
    out.push(Check::at_most(S, "graph three-way δW", w.spread(), spread));
    out.push(Check::at_least(S, "graph δW vs finite differences order", order_or_exact(&w.check, floor), order));
    let dv = schlafli_dv(&vertical, &eps)?;
    out.push(Check::at_least(S, "graph δV vs finite differences order", order_or_exact(&dv, floor), order));
    let tangential = GraphFamily::new(
        default_graph(),
        GraphDirection::Tangential(TrigSeries::single(0, 1, 0.1, 0.0), TrigSeries::single(1, 0, 0.0, 0.1)),
        n,
    );
    let dv = schlafli_dv(&tangential, &eps)?;
    out.push(Check::at_most(S, "tangential δV", dv.formula.abs().max(dv.finest_error()), config.tol("tangential", 1e-8)?));
    let field = unit_torus(n, DiffScheme::Spectral, |z| 0.1 * (TAU * z.re).cos())?;
    let u: Vec<f64> = (0..field.phi.len()).map(|k| 0.2 * (TAU * field.node(k).re).cos() + 0.1 * (TAU * field.node(k).im).sin()).collect();
    let fam = EpsteinFamily::new(field, u, 1.0)?;
    let w = w_variation(&fam, &eps)?;
    out.push(Check::at_most(S, "Epstein three-way δW", w.spread(), spread));
    out.push(Check::at_most(S, "Epstein δW vs −(1/8)∫∇φ·∇u", (w.boundary + PI * PI / 200.0).abs(), config.tol("epstein_dw", 1e-9)?));
    out.push(Check::at_least(S, "Epstein δW vs finite differences order", order_or_exact(&w.check, floor), order));
    Ok(out)
}

fn extremize_suite(config: &Config) -> Result<Vec<Check>> {
    const S: &str = "extremize";
    let mut out = Vec::new();
    let n = config.get("extremize.n", 64usize)?;
    let amp = config.get("extremize.amplitude", 0.1f64)?;
    let mean = config.get("extremize.mean", 0.3f64)?;
    let rho = config.get("extremize.rho_ref", 1.0f64)?;
    let probes = config.get("extremize.probes", 20usize)?;
    let opts = ExtremizeOptions { tol: config.tol("criticality", 1e-6)?, ..ExtremizeOptions::default() };
    let field = unit_torus(n, DiffScheme::Spectral, |z| mean + amp * (TAU * z.re).cos())?;
    let start = std::time::Instant::now();
    let state = ConformalState::new(field, rho)?;
    let gb0 = state.gauss_bonnet()?;
    let (state, report) = run_extremization(state, &opts)?;
    out.push(Check::at_most(S, "stddev(K*) at convergence", report.curvature_stddev, opts.tol));
    out.push(Check::at_most(S, "F decrease along accepted steps", report.max_decrease(), 0.0));
    out.push(Check::at_most(S, "∫K* da* drift", report.gauss_bonnet_drift().max((state.gauss_bonnet()? - gb0).abs()), config.tol("gauss_bonnet", 1e-8)?));
    out.push(Check::at_most(S, "runtime (s)", start.elapsed().as_secs_f64(), config.tol("runtime", 30.0)?));
    let mut rng = rand::rngs::StdRng::seed_from_u64(config.seed()?);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..probes {
        let v = area_neutral(&state, &random_direction(&state.base, &mut rng, 3));
        let h = hessian_quadform(&state, &v, &v, opts.tol)?;
        worst = worst.max(h.laplacian_route.max(h.gradient_route));
    }
    out.push(Check::at_most(S, "largest Hessian probe", worst, 0.0));
    Ok(out)
}
