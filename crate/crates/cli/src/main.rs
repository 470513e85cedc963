//! Batch front end: invariant suites, volume reports, Epstein mesh export,
//! Schläfli checks and extremization runs.

use std::f64::consts::{PI, TAU};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use num_complex::Complex;
use renvol::infinity::metric_from_infinity_at_rho;
use renvol::patch::ball_volume;
use renvol::variational::{eps_schedule, schlafli_dv, w_variation, VariationCheck};
use renvol::verify::{run_suite, write_checks_csv, Config};
use renvol::wvolume::{renormalized_volume, w_volume_quadrature};
use renvol::{
    analytic_family, run_extremization, w_volume, AnalyticKind, BallFamily, ConformalState, Convexity, DeformationFamily, DiffScheme,
    EpsteinFamily, ExtremizeOptions, GraphDirection, GraphFamily, GraphSurface, LiouvilleField, SlabSpec, TrigSeries,
};

#[derive(Parser)]
#[command(name = "renvol", version, about = "W-volume and renormalized-volume workbench")]
struct Cli {
    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized checks (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "renvol-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an invariant suite: forms, infinity, volume, schlafli, extremize or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Export Epstein surfaces of a Liouville field as OBJ meshes.
    Epstein {
        /// Liouville field CSV.
        #[arg(long, conflicts_with = "sample")]
        field: Option<PathBuf>,
        /// Built-in field: constant, cosine or fuchsian.
        #[arg(long)]
        sample: Option<String>,
        /// Comma-separated distances.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        rho: Vec<f64>,
    },
    /// Volume, W-volume and renormalized-volume report.
    Volume,
    /// Variation formulas against finite differences.
    Schlafli,
    /// Constrained maximization of W over conformal factors.
    Extremize {
        /// Initial Liouville field CSV (default: cosine bump from the config).
        #[arg(long)]
        field: Option<PathBuf>,
    },
}

/// Error in the invocation or configuration (exit code 2).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            Config::parse(&text).map_err(|e| usage(e.to_string()))?
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.set("seed", seed);
    }
    Ok(config)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn cfg<V: std::str::FromStr>(config: &Config, key: &str, default: V) -> anyhow::Result<V> {
    config.get(key, default).map_err(|e| usage(e.to_string()))
}

fn cfg_list<V: std::str::FromStr + Clone>(config: &Config, key: &str, default: &[V]) -> anyhow::Result<Vec<V>> {
    config.list(key, default).map_err(|e| usage(e.to_string()))
}

fn cmd_verify(config: &Config, suite: &str, out: &Path) -> anyhow::Result<bool> {
    if !renvol::verify::SUITES.contains(&suite) {
        return Err(usage(format!("unknown suite {suite}; expected one of {}", renvol::verify::SUITES.join("|"))));
    }
    let checks = run_suite(suite, config)?;
    for c in &checks {
        println!("{} [{}] {}: {:.3e} (tolerance {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.value, c.tolerance);
    }
    write_checks_csv(&checks, create(out, "verify.csv")?)?;
    serde_json::to_writer_pretty(create(out, "verify.json")?, &checks)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(failed == 0)
}

fn sample_field(name: &str) -> anyhow::Result<LiouvilleField<f64>> {
    let (w1, w2) = (Complex::new(1.0, 0.0), Complex::new(0.0, 1.0));
    Ok(match name {
        "constant" => LiouvilleField::torus(w1, w2, 32, 32, |_| 0.3)?,
        "cosine" => LiouvilleField::torus(w1, w2, 32, 32, |z| 0.3 + 0.1 * (TAU * z.re).cos())?,
        "fuchsian" => LiouvilleField::patch(Complex::new(-0.5, 1.0), w1, w2, 41, 41, |z: Complex<f64>| -2.0 * z.im.ln())?,
        other => return Err(usage(format!("unknown sample field {other}; expected constant, cosine or fuchsian"))),
    })
}

fn read_field(path: &Path) -> anyhow::Result<LiouvilleField<f64>> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open field {}: {e}", path.display())))?;
    LiouvilleField::read_csv(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_epstein(field: &LiouvilleField<f64>, rhos: &[f64], out: &Path) -> anyhow::Result<bool> {
    if let Convexity::Fail { nodes } = field.convexity_test()? {
        let head: Vec<String> = nodes.iter().take(8).map(|k| k.to_string()).collect();
        eprintln!("warning: convexity test fails at {} nodes ({}{})", nodes.len(), head.join(", "), if nodes.len() > 8 { ", ..." } else { "" });
    }
    let inf = field.infinity_data()?;
    let mut csv = create(out, "epstein_metric.csv")?;
    use std::io::Write;
    writeln!(csv, "rho,max_metric_residual,relative_residual")?;
    for &rho in rhos {
        let patch = field.epstein_embedding(rho)?;
        patch.write_obj(create(out, &format!("epstein_rho_{rho}.obj"))?)?;
        let forms = patch.compute_forms()?;
        let predicted = metric_from_infinity_at_rho(&inf, rho);
        let residual = forms.grid.interior_nodes().map(|k| (forms.first[k] - predicted[k]).max_abs()).fold(0.0, f64::max);
        let relative = residual / (0.5 * (2.0 * rho).exp());
        writeln!(csv, "{rho},{residual:e},{relative:e}")?;
        println!("rho = {rho}: metric residual {residual:.3e} (relative {relative:.3e})");
    }
    Ok(true)
}

fn cmd_volume(config: &Config, out: &Path) -> anyhow::Result<bool> {
    let surface: String = cfg(config, "surface", "ball".to_string())?;
    let n = cfg(config, "n", 16usize)?;
    let rhos = cfg_list(config, "rhos", &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])?;
    let intervals = cfg(config, "intervals", 4096usize)?;
    let (mut report, leaf, core, genus) = match surface.as_str() {
        "ball" => {
            let r = cfg(config, "radius", 1.0f64)?;
            let (_, leaf) = analytic_family(AnalyticKind::GeodesicSphere(r), n, n)?;
            let spec = SlabSpec::Foliation { leaf: &leaf, from: -r, to: 0.0 };
            let mut report = w_volume(&spec)?;
            report.residual = Some((w_volume_quadrature(&spec, intervals)?.w - report.w).abs());
            (report, leaf, ball_volume(r), 0)
        }
        "horotorus" => {
            let c = cfg(config, "height", 0.5f64)?;
            let (_, leaf) = analytic_family(AnalyticKind::Horosphere(c), n, n)?;
            let report = w_volume(&SlabSpec::Foliation { leaf: &leaf, from: 0.0, to: cfg(config, "thickness", 1.0f64)? })?;
            (report, leaf, 0.0, 1)
        }
        "graph" => {
            let c = cfg(config, "height", 0.25f64)?;
            let g = GraphSurface::new(c, TrigSeries::single(1, 1, cfg(config, "amplitude", 0.05f64)?, 0.02));
            let patch = g.patch(n.max(32), DiffScheme::Spectral)?;
            let forms = patch.compute_forms()?;
            let report = w_volume(&SlabSpec::Capped { patch: &patch, forms: &forms, depth: 2.0 * g.max_height() })?;
            (report, forms, 0.0, 1)
        }
        other => return Err(usage(format!("unknown surface {other}; expected ball, horotorus or graph"))),
    };
    let ren = renormalized_volume(&leaf, &rhos, core, Some(genus))?;
    report.euler_characteristic = Some(2.0 - 2.0 * genus as f64);
    report.renormalized = Some(if surface == "horotorus" { ren.expected } else { report.w - PI * (genus as f64 - 1.0) });
    report.write_json(create(out, "volume.json")?)?;
    ren.write_csv(create(out, "renormalized.csv")?)?;
    serde_json::to_writer_pretty(create(out, "renormalized.json")?, &ren)?;
    println!("V = {:.12}  W = {:.12}  V_R = {:.12}", report.volume, report.w, report.renormalized.unwrap());
    println!("renormalized identity error {:.3e}, decay exponent {:.4}", ren.max_identity_error, ren.decay_exponent);
    Ok(true)
}

fn cmd_schlafli(config: &Config, out: &Path) -> anyhow::Result<bool> {
    let family: String = cfg(config, "family", "ball".to_string())?;
    let n = cfg(config, "n", 32usize)?;
    let eps: Vec<f64> = cfg_list(config, "eps", &eps_schedule::<f64>())?;
    let fam: Box<dyn DeformationFamily<f64>> = match family.as_str() {
        "ball" => Box::new(BallFamily { radius: cfg(config, "radius", 1.0f64)?, n }),
        "graph" => Box::new(GraphFamily::new(
            GraphSurface::new(0.25, TrigSeries::single(1, 1, 0.05, 0.02)),
            GraphDirection::Vertical(TrigSeries::single(1, 1, 0.3, 0.2)),
            n,
        )),
        "tangential" => Box::new(GraphFamily::new(
            GraphSurface::new(0.25, TrigSeries::single(1, 1, 0.05, 0.02)),
            GraphDirection::Tangential(TrigSeries::single(0, 1, 0.1, 0.0), TrigSeries::single(1, 0, 0.0, 0.1)),
            n,
        )),
        "epstein" => {
            let field = LiouvilleField::torus(Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), n, n, |z| 0.1 * (TAU * z.re).cos())?;
            let u = (0..field.phi.len()).map(|k| 0.2 * (TAU * field.node(k).re).cos() + 0.1 * (TAU * field.node(k).im).sin()).collect();
            Box::new(EpsteinFamily::new(field, u, cfg(config, "rho", 1.0f64)?)?)
        }
        other => return Err(usage(format!("unknown family {other}; expected ball, graph, tangential or epstein"))),
    };
    let dv = schlafli_dv(fam.as_ref(), &eps)?;
    let dw = w_variation(fam.as_ref(), &eps)?;
    VariationCheck::write_csv(&[dv.clone(), dw.check.clone()], create(out, "schlafli.csv")?)?;
    serde_json::to_writer_pretty(create(out, "schlafli.json")?, &serde_json::json!({ "dV": dv, "dW": dw }))?;
    println!("{}: dV = {:.12} (order {:.3}), dW = {:.12} (order {:.3})", fam.label(), dv.formula, dv.order, dw.boundary, dw.check.order);
    println!("dW routes: boundary {:.15}, infinity {:.15}, traceless {:.15}", dw.boundary, dw.infinity, dw.traceless);
    Ok(true)
}

fn cmd_extremize(config: &Config, field: Option<&Path>, out: &Path) -> anyhow::Result<bool> {
    let field = match field {
        Some(p) => read_field(p)?,
        None => {
            let n = cfg(config, "n", 64usize)?;
            let (mean, amp) = (cfg(config, "mean", 0.3f64)?, cfg(config, "amplitude", 0.1f64)?);
            LiouvilleField::torus(Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), n, n, |z| mean + amp * (TAU * z.re).cos())?
        }
    };
    let opts = ExtremizeOptions {
        tol: cfg(config, "tol", 1e-6)?,
        max_iterations: cfg(config, "max_iterations", 200usize)?,
        precondition_shift: cfg(config, "precondition_shift", 1.0f64)?,
        ..ExtremizeOptions::default()
    };
    let mut state = ConformalState::new(field, cfg(config, "rho_ref", 1.0f64)?)?;
    if let Some(area) = config.get::<f64>("area", f64::NAN).ok().filter(|a| a.is_finite()) {
        state = state.with_area_target(area)?;
    }
    let (state, report) = run_extremization(state, &opts)?;
    report.write_json(create(out, "extremize_log.json")?)?;
    state.field().write_csv(create(out, "phi_final.csv")?)?;
    for l in &report.log {
        println!("iter {:3}  F = {:.15}  max|K*+λ| = {:.3e}  step = {:.3e}", l.iteration, l.objective, l.residual, l.step);
    }
    println!("converged: {}  stddev(K*) = {:.3e}  λ = {:.3e}", report.converged, report.curvature_stddev, report.lambda);
    Ok(report.converged)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let config = load_config(cli)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("cannot create {}", cli.out.display()))?;
    match &cli.command {
        Command::Verify { suite } => cmd_verify(&config, suite, &cli.out),
        Command::Epstein { field, sample, rho } => {
            let f = match (field, sample) {
                (Some(p), _) => read_field(p)?,
                (None, Some(s)) => sample_field(s)?,
                (None, None) => return Err(usage("epstein needs --field or --sample")),
            };
            cmd_epstein(&f, rho, &cli.out)
        }
        Command::Volume => cmd_volume(&config, &cli.out),
        Command::Schlafli => cmd_schlafli(&config, &cli.out),
        Command::Extremize { field } => cmd_extremize(&config, field.as_deref(), &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let is_usage = e.downcast_ref::<Usage>().is_some() || matches!(e.downcast_ref::<renvol::Error>(), Some(renvol::Error::Parse(_)));
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}
