use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use weierdiv::dcseq::{DCSequence, LogGrid, DEFAULT_J_MAX};
use weierdiv::io::{parse_poly, parse_sequence, parse_series, AnySeries, SeriesJson};
use weierdiv::lojafit::{
    check_assumptions_with_cloud, collect_sigma_samples, decompose_branches, derivative_growth, fit_collected, Sample,
    SigmaEstimate, SigmaSpec,
};
use weierdiv::parampoly::ParamPoly;
use weierdiv::rootgeom::{calibrate_domain, fiber, sample_gamma, CloudSpec, Domain, GammaCloud};
use weierdiv::series::{Coefficient, PowerSeries2};
use weierdiv::wdiv::{extremal_series, formal_divide, gevrey_fit_ln, ln_derivatives, DivisionResult, DEFAULT_ORDER};

use crate::svg::Plot;
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "weierdiv", version, about = "Root-locus geometry, Łojasiewicz exponents and formal Weierstrass division")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "WEIERDIV_THREADS")]
    pub threads: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight sequence values, regularity constants and Legendre recovery.
    Seq(SeqArgs),
    /// Sample the root locus Γ; CSV and SVG of the cloud.
    Gamma(GammaArgs),
    /// Estimate the Łojasiewicz exponent σ.
    Sigma(SigmaArgs),
    /// Formal Weierstrass division of a series by a polynomial.
    Divide(DivideArgs),
    /// Run the worked-example verification matrix.
    Verify(VerifyArgs),
    /// Full analysis of one polynomial into a directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Polynomial JSON file.
    #[arg(long)]
    pub poly: PathBuf,
    /// Parameter box half-width.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Skip calibration and use this disc radius.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeqArgs {
    /// Sequence JSON file.
    #[arg(long, conflicts_with_all = ["gevrey", "gevrey_log"])]
    pub spec: Option<PathBuf>,
    /// Gevrey sequence (j!)^α.
    #[arg(long)]
    pub gevrey: Option<f64>,
    /// (j!)^α (log(e + j))^{βj}, given as α β.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
    pub gevrey_log: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_J_MAX)]
    pub j_max: usize,
    /// Also report the power sequence M^s.
    #[arg(long)]
    pub power: Option<f64>,
    /// Highest index for Legendre recovery.
    #[arg(long, default_value_t = 12)]
    pub legendre_max: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 64)]
    pub radial: usize,
    #[arg(long, default_value_t = 96)]
    pub angular: usize,
    /// Evaluate the fiber at `re,im` (repeatable).
    #[arg(long, value_parser = parse_complex)]
    pub fiber: Vec<Complex64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 24)]
    pub radii: usize,
    #[arg(long, default_value_t = 96)]
    pub angles: usize,
    #[arg(long, default_value_t = 32)]
    pub bins: usize,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    /// Raw `(z, d, ρ)` samples.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// log ρ against log d with the fitted envelope.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DivideArgs {
    #[arg(long)]
    pub poly: PathBuf,
    /// Series JSON file.
    #[arg(long, required_unless_present = "extremal_gevrey", conflicts_with = "extremal_gevrey")]
    pub series: Option<PathBuf>,
    /// Use the extremal series with Taylor coefficients (k!)^α.
    #[arg(long)]
    pub extremal_gevrey: Option<f64>,
    /// Truncation order (defaults to the series order, or 24).
    #[arg(long)]
    pub order: Option<usize>,
    /// Floating-point coefficients instead of exact rationals.
    #[arg(long)]
    pub float: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Output directory (created if missing).
    #[arg(long)]
    pub dir: PathBuf,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or("expected re,im")?;
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part {re:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part {im:?}"))?;
    Ok(Complex64::new(re, im))
}

/// Failure of a subcommand; all map to exit code 2.
#[derive(Debug)]
pub enum CliError {
    Input { field: Option<String>, message: String },
    Io { path: PathBuf, message: String },
    Compute(String),
}

impl CliError {
    pub fn to_json(&self) -> Value {
        match self {
            Self::Input { field, message } => json!({"error": {"kind": "input", "field": field, "message": message}}),
            Self::Io { path, message } => {
                json!({"error": {"kind": "io", "path": path.display().to_string(), "message": message}})
            }
            Self::Compute(message) => json!({"error": {"kind": "computation", "message": message}}),
        }
    }
}

impl From<weierdiv::Error> for CliError {
    fn from(e: weierdiv::Error) -> Self {
        use weierdiv::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidPoly { field, .. } | E::InvalidSeries { field, .. } => Self::Input {
                field: Some(field),
                message,
            },
            E::InvalidSequence(_) | E::Json(_) | E::Range { .. } => Self::Input { field: None, message },
            _ => Self::Compute(message),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What `main` should do after a successful run.
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// JSON to `out` when given, otherwise to stdout.
fn emit<T: Serialize>(v: &T, out: &Option<PathBuf>) -> CliResult<Outcome> {
    let text = pretty(v);
    match out {
        Some(p) => {
            write(p, &text)?;
            Ok(Outcome {
                stdout: String::new(),
                exit_code: 0,
            })
        }
        None => Ok(Outcome {
            stdout: text,
            exit_code: 0,
        }),
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input {
            field: Some(name.into()),
            message: format!("--{name} must be a positive finite number, got {v}"),
        })
    }
}

fn load_domain(args: &DomainArgs) -> CliResult<(ParamPoly, Domain)> {
    let p = parse_poly(&read(&args.poly)?)?;
    positive("eta", args.eta)?;
    let dom = match args.delta {
        Some(delta) => {
            positive("delta", delta)?;
            let mut dom = Domain::assumed(args.eta, delta);
            dom.trivial = p.is_trivial();
            dom
        }
        None => calibrate_domain(&p, args.eta)?,
    };
    Ok((p, dom))
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    let seed = cli.seed;
    match cli.command {
        Command::Seq(a) => run_seq(a),
        Command::Gamma(a) => run_gamma(a),
        Command::Sigma(a) => run_sigma(a),
        Command::Divide(a) => run_divide(a),
        Command::Verify(a) => run_verify(a, seed),
        Command::Report(a) => run_report(a),
    }
}

fn run_seq(a: SeqArgs) -> CliResult<Outcome> {
    let seq = if let Some(path) = &a.spec {
        parse_sequence(&read(path)?)?
    } else if let Some(alpha) = a.gevrey {
        DCSequence::gevrey(alpha, a.j_max)?
    } else if let Some(ab) = &a.gevrey_log {
        DCSequence::gevrey_log(ab[0], ab[1], a.j_max)?
    } else {
        return Err(CliError::Input {
            field: Some("spec".into()),
            message: "one of --spec, --gevrey, --gevrey-log is required".into(),
        });
    };
    let legendre_max = a.legendre_max.min(seq.j_max().saturating_sub(1));
    let mut rows = Vec::new();
    let mut csv = String::from("j,ln_m,legendre_ln_m,rel_err\n");
    for j in 0..=seq.j_max() {
        let ln_m = seq.ln_value(j)?;
        let rec = if j <= legendre_max {
            Some(seq.legendre_recover(j, &LogGrid::covering(&seq, j, 20_000))?)
        } else {
            None
        };
        let rel = rec.map(|r| (r.ln_value - ln_m).exp_m1().abs());
        let _ = writeln!(
            csv,
            "{j},{ln_m},{},{}",
            rec.map_or(String::new(), |r| r.ln_value.to_string()),
            rel.map_or(String::new(), |v| v.to_string())
        );
        rows.push(json!({
            "j": j,
            "ln_m": ln_m,
            "legendre_ln_m": rec.map(|r| r.ln_value),
            "legendre_rel_err": rel,
            "legendre_at_endpoint": rec.map(|r| r.at_endpoint),
        }));
    }
    let power = match a.power {
        Some(s) => {
            let ps = seq.power_sequence(s)?;
            Some(json!({
                "s": s,
                "a1": ps.a1,
                "a2": ps.a2,
                "checked_through": ps.checked_through,
                "limited": ps.limited,
                "regularity": ps.seq.check_regularity(),
            }))
        }
        None => None,
    };
    if let Some(path) = &a.csv {
        write(path, &csv)?;
    }
    let report = json!({
        "sequence": seq.spec(),
        "regularity": seq.check_regularity(),
        "legendre_grid_points": 20_000,
        "values": rows,
        "power": power,
    });
    emit(&report, &a.out)
}

fn cloud_csv(cloud: &GammaCloud) -> String {
    let m = cloud.poly().param_dim();
    let mut out = String::from("re,im");
    for i in 1..=m {
        let _ = write!(out, ",t{i}");
    }
    out.push_str(",branch_id\n");
    for pt in cloud.points() {
        let _ = write!(out, "{},{}", pt.z.re, pt.z.im);
        for t in &pt.t_source {
            let _ = write!(out, ",{t}");
        }
        let _ = writeln!(out, ",{}", pt.branch_id.map_or(String::new(), |b| b.to_string()));
    }
    out
}

fn cloud_svg(cloud: &GammaCloud, title: &str) -> String {
    let pts = cloud.points().iter().map(|p| (p.z.re, p.z.im)).collect();
    Plot::new(title, "Re x", "Im x").scatter(pts, "steelblue").render()
}

fn cloud_spec(radial: usize, angular: usize) -> CliResult<CloudSpec> {
    if radial == 0 || angular == 0 || radial > 100_000 || angular > 100_000 {
        return Err(CliError::Input {
            field: Some("radial".into()),
            message: "--radial and --angular must be in 1..=100000".into(),
        });
    }
    Ok(CloudSpec {
        n_radial: radial,
        n_angular: angular,
        ..CloudSpec::default()
    })
}

/// Γ with branch labels when they can be tracked.
fn labelled_cloud(p: &ParamPoly, dom: &Domain, spec: &CloudSpec) -> CliResult<(GammaCloud, Value)> {
    let cloud = sample_gamma(p, dom, spec)?;
    Ok(match decompose_branches(&cloud) {
        Ok((labelled, branches)) => (labelled, serde_json::to_value(branches).expect("serializes")),
        Err(e) => (cloud, json!({"unavailable": e.to_string()})),
    })
}

fn run_gamma(a: GammaArgs) -> CliResult<Outcome> {
    let (p, dom) = load_domain(&a.domain)?;
    if dom.trivial {
        return Err(CliError::Input {
            field: Some("poly".into()),
            message: "P = x^d has Γ = {0}; nothing to sample".into(),
        });
    }
    let spec = cloud_spec(a.radial, a.angular)?;
    let (cloud, branches) = labelled_cloud(&p, &dom, &spec)?;
    if let Some(path) = &a.csv {
        write(path, &cloud_csv(&cloud))?;
    }
    if let Some(path) = &a.svg {
        write(path, &cloud_svg(&cloud, &format!("Γ of {p}")))?;
    }
    let fibers: Vec<Value> = a
        .fiber
        .iter()
        .map(|&z| match fiber(&p, &dom, z) {
            Ok(f) => json!({"z": z, "result": f}),
            Err(e) => json!({"z": z, "error": e.to_string()}),
        })
        .collect();
    let report = json!({
        "polynomial": p.to_string(),
        "domain": dom,
        "cloud_spec": spec,
        "n_points": cloud.len(),
        "hyperbolic": cloud.is_real(),
        "branches": branches,
        "fibers": fibers,
    });
    emit(&report, &a.out)
}

fn sigma_spec(a: &SigmaArgs) -> CliResult<SigmaSpec> {
    let bad = |field: &str, message: &str| CliError::Input {
        field: Some(field.into()),
        message: message.into(),
    };
    if a.radii < 2 || a.radii > 10_000 {
        return Err(bad("radii", "--radii must be in 2..=10000"));
    }
    if a.angles < 4 || a.angles > 100_000 {
        return Err(bad("angles", "--angles must be in 4..=100000"));
    }
    if a.bins < 6 || a.bins > 10_000 {
        return Err(bad("bins", "--bins must be in 6..=10000"));
    }
    if a.window < 6 || a.window > a.bins {
        return Err(bad("window", "--window must be in 6..=bins"));
    }
    Ok(SigmaSpec {
        n_radii: a.radii,
        n_angles: a.angles,
        bins: a.bins,
        window: a.window,
        ..SigmaSpec::default()
    })
}

fn samples_csv(samples: &[Sample]) -> String {
    let mut out = String::from("re,im,dist,rho\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{},{}", s.z.re, s.z.im, s.dist, s.rho);
    }
    out
}

fn sigma_svg(samples: &[Sample], est: &SigmaEstimate) -> String {
    let pts = samples
        .iter()
        .filter(|s| s.dist > 0.0 && s.rho > 0.0)
        .map(|s| (s.dist.ln(), s.rho.ln()))
        .collect();
    let envelope: Vec<(f64, f64)> = est.bin_stats.iter().filter_map(|b| Some((b.x_at_min?, b.min_y?))).collect();
    let fit: Vec<(f64, f64)> = match (envelope.first(), envelope.get(est.spec.window.min(envelope.len()).saturating_sub(1))) {
        (Some(a), Some(b)) => [a.0, b.0]
            .iter()
            .map(|&x| (x, est.intercept_log_c + est.sigma_hat * x))
            .collect(),
        _ => Vec::new(),
    };
    Plot::new(&format!("σ̂ = {:.4}", est.sigma_hat), "log d(z, Γ)", "log ρ(z)")
        .scatter(pts, "#9ab")
        .scatter(envelope, "black")
        .polyline(fit, "crimson")
        .render()
}

fn sigma_run(p: &ParamPoly, dom: &Domain, spec: &SigmaSpec) -> CliResult<(GammaCloud, Vec<Sample>, SigmaEstimate)> {
    if dom.trivial {
        return Err(CliError::Input {
            field: Some("poly".into()),
            message: "σ is undefined for P = x^d".into(),
        });
    }
    let cloud = sample_gamma(p, dom, &CloudSpec::default())?;
    let samples = collect_sigma_samples(&cloud, dom, spec);
    let est = fit_collected(&cloud, dom, spec, &samples)?;
    Ok((cloud, samples, est))
}

fn run_sigma(a: SigmaArgs) -> CliResult<Outcome> {
    let spec = sigma_spec(&a)?;
    let (p, dom) = load_domain(&a.domain)?;
    let (_, samples, est) = sigma_run(&p, &dom, &spec)?;
    if let Some(path) = &a.csv {
        write(path, &samples_csv(&samples))?;
    }
    if let Some(path) = &a.svg {
        write(path, &sigma_svg(&samples, &est))?;
    }
    let report = json!({
        "polynomial": p.to_string(),
        "domain": dom,
        "sigma_hat": est.sigma_hat,
        "ci": est.ci,
        "valid": est.valid,
        "one_sided": est.one_sided,
        "intercept_log_c": est.intercept_log_c,
        "residual_rms": est.residual_rms,
        "n_samples": est.n_samples,
        "spec": est.spec,
        "bins": est.bin_stats,
    });
    emit(&report, &a.out)
}

fn stream_fit<C: Coefficient>(taylor: &[C]) -> Value
where
    for<'a> C: std::ops::Add<&'a C, Output = C> + std::ops::Sub<&'a C, Output = C>,
{
    match gevrey_fit_ln(&ln_derivatives(taylor)) {
        Ok(f) => serde_json::to_value(f).expect("serializes"),
        Err(e) => json!({"unavailable": e.to_string()}),
    }
}

fn fit_summary<C: Coefficient>(res: &DivisionResult<C>) -> Value
where
    for<'a> C: std::ops::Add<&'a C, Output = C> + std::ops::Sub<&'a C, Output = C>,
{
    let r: Vec<Value> = res.r.iter().map(|rj| stream_fit(&rj.t_stream(0, 0))).collect();
    json!({
        "q_x": stream_fit(&res.q.x_stream()),
        "q_t": stream_fit(&res.q.t_stream(0, 0)),
        "r_t": r,
    })
}

fn run_divide(a: DivideArgs) -> CliResult<Outcome> {
    let p = parse_poly(&read(&a.poly)?)?;
    let input_error = |field: &str, message: String| CliError::Input {
        field: Some(field.into()),
        message,
    };
    let series: AnySeries = match (&a.series, a.extremal_gevrey) {
        (Some(path), _) => parse_series(&read(path)?)?,
        (None, Some(alpha)) => {
            let n = a.order.unwrap_or(DEFAULT_ORDER);
            let seq = DCSequence::gevrey(alpha, n.max(8))?;
            AnySeries::Exact(extremal_series(&seq, p.param_dim(), n)?)
        }
        (None, None) => return Err(input_error("series", "--series or --extremal-gevrey is required".into())),
    };
    let order_of = |s: &AnySeries| match s {
        AnySeries::Exact(s) => s.order(),
        AnySeries::Float(s) => s.order(),
    };
    let n = a.order.unwrap_or(order_of(&series));
    if n > order_of(&series) {
        return Err(input_error(
            "order",
            format!("--order {n} exceeds the series truncation order {}", order_of(&series)),
        ));
    }
    let series = match (series, a.float) {
        (AnySeries::Exact(s), true) => AnySeries::Float(s.to_float()),
        (s, _) => s,
    };
    let report = match series {
        AnySeries::Exact(f) => {
            let res = formal_divide::<BigRational>(&f, &p, n)?;
            division_json(&res, "exact", SeriesJson::from_exact)
        }
        AnySeries::Float(f) => {
            let res = formal_divide::<f64>(&f, &p, n)?;
            division_json(&res, "float", SeriesJson::from_float)
        }
    };
    emit(&report, &a.out)
}

fn division_json<C: Coefficient>(res: &DivisionResult<C>, mode: &str, to_json: fn(&PowerSeries2<C>) -> SeriesJson) -> Value
where
    for<'a> C: std::ops::Add<&'a C, Output = C> + std::ops::Sub<&'a C, Output = C>,
{
    json!({
        "polynomial": res.divisor.to_string(),
        "mode": mode,
        "N": res.n,
        "iterations": res.iterations,
        "residual_max": res.residual_max,
        "q": to_json(&res.q),
        "r": res.r.iter().map(to_json).collect::<Vec<_>>(),
        "gevrey_fits": fit_summary(res),
    })
}

fn run_verify(a: VerifyArgs, seed: u64) -> CliResult<Outcome> {
    let report = verify::run(seed);
    let text = pretty(&report);
    if let Some(path) = &a.json {
        write(path, &text)?;
    }
    Ok(Outcome {
        stdout: match a.format {
            Format::Json => text,
            Format::Table => verify::table(&report),
        },
        exit_code: if report.all_pass { 0 } else { 1 },
    })
}

fn run_report(a: ReportArgs) -> CliResult<Outcome> {
    let (p, dom) = load_domain(&a.domain)?;
    fs::create_dir_all(&a.dir).map_err(|e| CliError::Io {
        path: a.dir.clone(),
        message: e.to_string(),
    })?;
    let spec = SigmaSpec::default();
    let (cloud, samples, est) = sigma_run(&p, &dom, &spec)?;
    let assumptions = match check_assumptions_with_cloud(&cloud, &dom) {
        Ok(r) => serde_json::to_value(r).expect("serializes"),
        Err(e) => json!({"unavailable": e.to_string()}),
    };
    let growth = match derivative_growth(&cloud, &dom, 6) {
        Ok(g) => serde_json::to_value(g).expect("serializes"),
        Err(e) => json!({"unavailable": e.to_string()}),
    };
    let (labelled, branches) = match decompose_branches(&cloud) {
        Ok((c, b)) => (c, serde_json::to_value(b).expect("serializes")),
        Err(e) => (cloud.clone(), json!({"unavailable": e.to_string()})),
    };
    write(&a.dir.join("gamma.csv"), &cloud_csv(&labelled))?;
    write(&a.dir.join("gamma.svg"), &cloud_svg(&labelled, &format!("Γ of {p}")))?;
    write(&a.dir.join("sigma_samples.csv"), &samples_csv(&samples))?;
    write(&a.dir.join("sigma.svg"), &sigma_svg(&samples, &est))?;
    let report = json!({
        "polynomial": p.to_string(),
        "domain": dom,
        "n_gamma_points": labelled.len(),
        "hyperbolic": labelled.is_real(),
        "branches": branches,
        "assumptions": assumptions,
        "sigma": est,
        "inverse_derivative_growth": growth,
        "files": ["gamma.csv", "gamma.svg", "sigma_samples.csv", "sigma.svg"],
    });
    write(&a.dir.join("report.json"), &pretty(&report))?;
    Ok(Outcome {
        stdout: pretty(&json!({"dir": a.dir.display().to_string(), "sigma_hat": est.sigma_hat})),
        exit_code: 0,
    })
}
