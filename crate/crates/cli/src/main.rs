use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use homoflow::fd_oracle::{self, Check};
use homoflow::io::{self, Document, ProfileFile, Provenance, SolutionFile, SolutionKind, Table};
use homoflow::landau3d::{self, LandauParams};
use homoflow::sphere_solver::{self, NewtonOptions, SphereProfile};
use homoflow::suite::{self, SuiteOptions};
use homoflow::verify::{self, VerifyOptions, VerifyReport};
use homoflow::{elliptic, hamel2d, Error};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "homoflow", version, about = "Homogeneous steady Navier-Stokes solutions: construction, solving and verification")]
struct Cli {
    /// Emit JSON instead of CSV or text on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Random seed; overrides HOMOFLOW_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complete elliptic integrals in the +κ convention.
    Elliptic {
        #[command(subcommand)]
        cmd: EllipticCmd,
    },
    /// The three-dimensional Landau jets.
    Landau {
        #[command(subcommand)]
        cmd: LandauCmd,
    },
    /// Planar zero-flux Hamel flows.
    Hamel {
        #[command(subcommand)]
        cmd: HamelCmd,
    },
    /// Newton solve of the axisymmetric sphere system.
    Solve(SolveArgs),
    /// Finite-difference verification of a field or a saved file.
    Verify(VerifyArgs),
    /// Run the acceptance matrix.
    Suite(SuiteArgs),
}

#[derive(Subcommand, Debug)]
enum EllipticCmd {
    /// Table of F, E, their derivatives and H.
    Table {
        #[arg(long, default_value_t = 0.0)]
        kappa_min: f64,
        #[arg(long, default_value_t = 10.0)]
        kappa_max: f64,
        #[arg(long, default_value_t = 51)]
        points: usize,
        /// Logarithmic spacing (needs kappa-min > 0).
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum LandauCmd {
    /// Velocity and pressure at one point of the unit sphere.
    Eval {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        psi: f64,
    },
    /// Profile samples (theta, v, f, p, phi) on θ_j = (j + ½)π/N.
    Profile {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a self-describing solution file.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Net point force of the jet.
    Force {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = landau3d::NET_FORCE_TOL)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
enum HamelCmd {
    /// Mode-k profile: summary JSON on stdout, samples (theta, f, p) as CSV.
    Solve {
        #[arg(long)]
        k: i64,
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long, default_value_t = hamel2d::DEFAULT_PROFILE_STEPS)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Amplitude/k² convergence table, or the classification sweep with --classify.
    Sweep {
        #[arg(long, default_value_t = 12)]
        kmax: u32,
        #[arg(long)]
        classify: bool,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 15_000.0)]
        b_max: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stokes Green function G_{·ij} at (x, y); indices are 1 or 2.
    Green {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, conflicts_with = "seed")]
    init_file: Option<PathBuf>,
    /// Sup norm of the random start.
    #[arg(long, default_value_t = 0.1)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FieldKind {
    Landau,
    Hamel,
    Green,
    ProfileFile,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    field: FieldKind,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Green-function indices (1 or 2).
    #[arg(long, default_value_t = 1)]
    i: usize,
    #[arg(long, default_value_t = 1)]
    j: usize,
    /// File to re-verify with --field profile-file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    #[arg(long, default_value_t = 1e-8)]
    intrinsic_tolerance: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Replace every residual threshold by this value.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Run only these criteria (comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: anyhow::anyhow!(msg.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Format(_)) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn seed(cli: &Cli) -> std::result::Result<u64, Failure> {
    if let Some(s) = cli.seed {
        return Ok(s);
    }
    match std::env::var("HOMOFLOW_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("HOMOFLOW_SEED='{v}' is not an unsigned integer"))),
        Err(_) => Ok(fd_oracle::DEFAULT_SEED),
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn emit_table(table: &Table, json_out: bool, path: Option<&Path>) -> anyhow::Result<()> {
    if let Some(p) = path {
        table.write_path(p).with_context(|| format!("writing {}", p.display()))?;
    }
    if json_out {
        let obj: serde_json::Map<String, serde_json::Value> = table
            .headers
            .iter()
            .zip(&table.columns)
            .map(|(h, c)| (h.clone(), json!(c)))
            .collect();
        print_json(&obj)?;
    } else if path.is_none() {
        table.write(std::io::stdout().lock())?;
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> std::result::Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::usage(format!("--{name} must be positive, got {v}")))
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Elliptic { cmd } => elliptic_cmd(cli, cmd),
        Command::Landau { cmd } => landau_cmd(cli, cmd),
        Command::Hamel { cmd } => hamel_cmd(cli, cmd),
        Command::Solve(a) => solve_cmd(cli, a),
        Command::Verify(a) => verify_cmd(cli, a),
        Command::Suite(a) => suite_cmd(cli, a),
    }
}

fn elliptic_cmd(cli: &Cli, cmd: &EllipticCmd) -> Outcome {
    let EllipticCmd::Table {
        kappa_min,
        kappa_max,
        points,
        log,
        out,
    } = cmd;
    if *kappa_min < 0.0 || kappa_max < kappa_min || *points == 0 {
        return Err(Failure::usage("need 0 <= kappa-min <= kappa-max and points >= 1"));
    }
    let rows = elliptic::table(*kappa_min, *kappa_max, *points, *log)?;
    let mut t = Table::new(&["kappa", "F", "E", "dF", "dE", "H"]);
    for r in rows {
        t.push(&[r.kappa, r.f, r.e, r.df, r.de, r.h]);
    }
    emit_table(&t, cli.json, out.as_deref())?;
    Ok(0)
}

fn landau_cmd(cli: &Cli, cmd: &LandauCmd) -> Outcome {
    match cmd {
        LandauCmd::Eval { kappa, theta, psi } => {
            positive("kappa", *kappa)?;
            let params = LandauParams::new(*kappa)?;
            let (st, sp) = theta.sin_cos();
            let (sps, cps) = psi.sin_cos();
            let (u, p) = landau3d::eval_cartesian([st * cps, st * sps, sp], &params)?;
            let s = landau3d::sphere_state(*theta, &params);
            print_json(&json!({
                "kappa": kappa, "theta": theta, "psi": psi,
                "u": u, "p": p,
                "v_theta": s.v_theta, "f": s.f, "p_sphere": s.p, "phi": s.phi,
            }))?;
            Ok(0)
        }
        LandauCmd::Profile {
            kappa,
            points,
            out,
            solution,
        } => {
            positive("kappa", *kappa)?;
            if *points < 4 {
                return Err(Failure::usage("--points must be at least 4"));
            }
            let params = LandauParams::new(*kappa)?;
            let grid = sphere_solver::uniform_grid(*points);
            let mut t = Table::new(&["theta", "v", "f", "p", "phi"]);
            for &th in &grid {
                let s = landau3d::sphere_state(th, &params);
                t.push(&[th, s.v_theta, s.f, s.p, s.phi]);
            }
            if let Some(path) = solution {
                let prof = SphereProfile::new(
                    3,
                    grid.clone(),
                    t.columns[1].clone(),
                    t.columns[2].clone(),
                    t.columns[3].clone(),
                )?;
                let residual = sphere_solver::residual_axisym(&prof)?;
                let file = SolutionFile {
                    schema_version: io::SCHEMA_VERSION,
                    kind: SolutionKind::Landau,
                    n: 3,
                    params: [("kappa".to_string(), *kappa)].into_iter().collect(),
                    grid,
                    fields: ["v", "f", "p", "phi"]
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (n.to_string(), t.columns[i + 1].clone()))
                        .collect(),
                    residual_summary: [
                        ("eq1".to_string(), residual.eq1_norm),
                        ("eq2".to_string(), residual.eq2_norm),
                        ("eq3".to_string(), residual.eq3_norm),
                    ]
                    .into_iter()
                    .collect(),
                    provenance: Provenance::new(None, timestamp()),
                };
                io::write_json(path, &file)?;
            }
            emit_table(&t, cli.json, out.as_deref())?;
            Ok(0)
        }
        LandauCmd::Force { kappa, tol } => {
            positive("kappa", *kappa)?;
            positive("tol", *tol)?;
            let params = LandauParams::new(*kappa)?;
            let q = landau3d::net_force_at(&params, 1.0, *tol)?;
            let a = params.coth();
            print_json(&json!({ "kappa": kappa, "b": q.b, "A": a, "c": a - 1.0 }))?;
            Ok(0)
        }
    }
}

fn hamel_cmd(cli: &Cli, cmd: &HamelCmd) -> Outcome {
    match cmd {
        HamelCmd::Solve {
            k,
            points,
            theta0,
            steps,
            csv,
            solution,
        } => {
            if *k < 1 {
                return Err(Failure::usage(format!("--k must be a positive integer, got {k}")));
            }
            if *points < 8 {
                return Err(Failure::usage("--points must be at least 8"));
            }
            let k = u32::try_from(*k).map_err(|_| Failure::usage("--k is too large"))?;
            let prof = hamel2d::mode_profile(k, *theta0, *steps)?;
            let consts = hamel2d::derived_constants(&prof.roots)?;
            let samples = hamel2d::PeriodicProfile::from_hamel(&prof, *points)?;
            let summary = json!({
                "k": k,
                "kappa": prof.kappa,
                "delta": prof.delta,
                "roots": prof.roots,
                "b": consts.b,
                "E": consts.energy,
                "c_pressure": prof.c_pressure,
                "amplitude": prof.roots.amplitude(),
                "diagnostics": prof.diagnostics,
            });
            let mut t = Table::new(&["theta", "f", "p"]);
            for i in 0..samples.len() {
                t.push(&[samples.thetas[i], samples.f[i], samples.p[i]]);
            }
            if let Some(path) = csv {
                t.write_path(path)?;
            }
            if let Some(path) = solution {
                let file = SolutionFile {
                    schema_version: io::SCHEMA_VERSION,
                    kind: SolutionKind::Hamel,
                    n: 2,
                    params: [
                        ("k".to_string(), f64::from(k)),
                        ("kappa".to_string(), prof.kappa),
                        ("theta0".to_string(), *theta0),
                        ("b".to_string(), consts.b),
                        ("c_pressure".to_string(), prof.c_pressure),
                    ]
                    .into_iter()
                    .collect(),
                    grid: samples.thetas.clone(),
                    fields: [("f".to_string(), samples.f.clone()), ("p".to_string(), samples.p.clone())]
                        .into_iter()
                        .collect(),
                    residual_summary: [("circle_relative".to_string(), samples.circle_residual_relative())]
                        .into_iter()
                        .collect(),
                    provenance: Provenance::new(None, timestamp()),
                };
                io::write_json(path, &file)?;
            }
            print_json(&summary)?;
            Ok(0)
        }
        HamelCmd::Sweep {
            kmax,
            classify,
            grid,
            b_max,
            tol,
            out,
        } => {
            if *classify {
                positive("tol", *tol)?;
                positive("b-max", *b_max)?;
                let cfg = hamel2d::SweepConfig {
                    n_b: *grid,
                    n_s: *grid,
                    b_max: *b_max,
                    tol: *tol,
                    ..hamel2d::SweepConfig::default()
                };
                let r = hamel2d::classification_sweep(&cfg)?;
                if let Some(p) = out {
                    io::write_json(p, &r)?;
                }
                print_json(&r)?;
                return Ok(if r.complete { 0 } else { EXIT_VERIFY });
            }
            if *kmax < 3 {
                return Err(Failure::usage("--kmax must be at least 3"));
            }
            let rows = hamel2d::amplitude_table(*kmax)?;
            let mut t = Table::new(&["k", "kappa", "delta", "amplitude", "scaled", "limit", "relative_gap"]);
            for r in rows {
                t.push(&[f64::from(r.k), r.kappa, r.delta, r.amplitude, r.scaled, r.limit, r.relative_gap]);
            }
            emit_table(&t, cli.json, out.as_deref())?;
            Ok(0)
        }
        HamelCmd::Green { i, j, x, y } => {
            if !(1..=2).contains(i) || !(1..=2).contains(j) {
                return Err(Failure::usage("--i and --j must be 1 or 2"));
            }
            let pt = [*x, *y];
            let g1 = hamel2d::stokes_green(0, i - 1, j - 1, pt)?;
            let g2 = hamel2d::stokes_green(1, i - 1, j - 1, pt)?;
            let p = hamel2d::stokes_green_pressure(i - 1, j - 1, pt)?;
            print_json(&json!({ "i": i, "j": j, "x": x, "y": y, "G": [g1, g2], "pressure": p }))?;
            Ok(0)
        }
    }
}

fn solve_cmd(cli: &Cli, a: &SolveArgs) -> Outcome {
    if !(3..=5).contains(&a.n) {
        return Err(Failure::usage(format!("--n must be 3, 4 or 5, got {}", a.n)));
    }
    if a.grid < 8 {
        return Err(Failure::usage("--grid must be at least 8"));
    }
    positive("tol", a.tol)?;
    positive("amplitude", a.amplitude)?;
    if !(a.damping > 0.0 && a.damping <= 1.0) {
        return Err(Failure::usage("--damping must lie in (0, 1]"));
    }
    let seed = seed(cli)?;
    let (init, seed_used) = match &a.init_file {
        Some(path) => {
            let prof = match io::load_document(path)? {
                Document::Profile(p) => p.profile()?,
                Document::Solution(s) => s.sphere_profile()?,
                Document::Table(_) => return Err(Failure::usage("--init-file must be a JSON profile or solution file")),
            };
            (SphereProfile::new(a.n, prof.thetas, prof.g, prof.f, prof.p)?, None)
        }
        None => (sphere_solver::random_profile(a.n, a.grid, seed, a.amplitude, 4)?, Some(seed)),
    };
    let opts = NewtonOptions {
        damping: a.damping,
        max_iterations: a.max_iterations,
        tolerance: a.tol,
        ..NewtonOptions::default()
    };
    let out = sphere_solver::newton_solve_with(a.n, &init, &opts)?;
    let matched = if a.n == 3 {
        let m = sphere_solver::match_landau(&out.profile)?;
        (!m.degenerate && m.error < 1e-6).then_some(m.kappa)
    } else {
        None
    };
    let doc = ProfileFile::from_profile(&out.profile, matched, Some(Provenance::new(seed_used, timestamp())));
    io::write_json(&a.out, &doc)?;
    print_json(&json!({
        "n": a.n,
        "grid": out.profile.len(),
        "iterations": out.iterations,
        "residual": out.residual.max_norm(),
        "sup_norm": out.profile.sup_norm(),
        "matched_kappa": matched,
        "condition": out.condition,
        "out": a.out,
    }))?;
    Ok(0)
}

fn verify_cmd(cli: &Cli, a: &VerifyArgs) -> Outcome {
    positive("tolerance", a.tolerance)?;
    positive("intrinsic-tolerance", a.intrinsic_tolerance)?;
    if a.points == 0 {
        return Err(Failure::usage("--points must be positive"));
    }
    let opts = VerifyOptions {
        points: a.points,
        seed: seed(cli)?,
        tolerance: a.tolerance,
        intrinsic_tolerance: a.intrinsic_tolerance,
        ..VerifyOptions::default()
    };
    let report: VerifyReport = match a.field {
        FieldKind::Landau => {
            positive("kappa", a.kappa)?;
            let f = landau3d::landau_field(LandauParams::new(a.kappa)?);
            verify::verify_field("landau", &f, Check::NavierStokes, &opts)?
        }
        FieldKind::Hamel => {
            let prof = hamel2d::mode_profile(a.k, 0.0, hamel2d::DEFAULT_PROFILE_STEPS)?;
            verify::verify_field("hamel", &prof.field(), Check::NavierStokes, &opts)?
        }
        FieldKind::Green => {
            if !(1..=2).contains(&a.i) || !(1..=2).contains(&a.j) {
                return Err(Failure::usage("--i and --j must be 1 or 2"));
            }
            let f = hamel2d::green_field(a.i - 1, a.j - 1)?;
            verify::verify_field("green", &f, Check::Stokes, &opts)?
        }
        FieldKind::ProfileFile => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| Failure::usage("--field profile-file needs --input"))?;
            let doc = io::load_document(path).with_context(|| format!("loading {}", path.display()))?;
            verify::verify_document(&doc, &opts)?
        }
    };
    if let Some(p) = &a.report {
        io::write_json(p, &report)?;
    }
    print_json(&report)?;
    Ok(if report.pass { 0 } else { EXIT_VERIFY })
}

fn suite_cmd(cli: &Cli, a: &SuiteArgs) -> Outcome {
    if let Some(t) = a.tolerance {
        positive("tolerance", t)?;
    }
    if let Some(bad) = a.only.iter().find(|&&id| id == 0 || id > suite::CRITERIA) {
        return Err(Failure::usage(format!("no criterion {bad}; criteria are 1..={}", suite::CRITERIA)));
    }
    let opts = SuiteOptions {
        tolerance_override: a.tolerance,
    };
    let ids: Vec<u32> = if a.only.is_empty() {
        (1..=suite::CRITERIA).collect()
    } else {
        a.only.clone()
    };
    let mut results = Vec::new();
    for id in ids {
        let r = suite::run_criterion(id, &opts);
        if !cli.json {
            println!(
                "criterion {:>2} {}  {} ({:.2} s){}",
                r.id,
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.runtime_s,
                if r.detail.is_empty() { String::new() } else { format!(": {}", r.detail) }
            );
        }
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let report = suite::SuiteReport {
        failed: results.len() - passed,
        passed,
        criteria: results,
    };
    if let Some(p) = &a.out {
        io::write_json(p, &report)?;
    }
    if cli.json {
        print_json(&report)?;
    } else {
        println!("{} passed, {} failed", report.passed, report.failed);
    }
    Ok(if report.all_pass() { 0 } else { EXIT_VERIFY })
}

fn diagnostic(code: u8, message: &str) {
    let line = json!({ "level": "error", "exit_code": code, "message": message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(if code == 0 { 0 } else { EXIT_USAGE });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            diagnostic(f.code, &format!("{:#}", f.error));
            ExitCode::from(f.code)
        }
    }
}
