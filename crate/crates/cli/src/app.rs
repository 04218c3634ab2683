//! Scenario execution and the command-line surface.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use casimir_lab::fluid::{euler_evolve, FluidState};
use casimir_lab::foliation::{FoliatedState, GraphFoliation, Tolerances};
use casimir_lab::forms3::io::FieldRecord;
use casimir_lab::rattleback::{integrate, Method, RattlebackState, Trajectory};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checks::Recorder;
use crate::config::{load_config, Kind, MethodChoice, Scenario};
use crate::error::CliError;
use crate::fields::{self, parse_expr, parse_profile, DEFAULT_PROFILE, DEFAULT_SCALE};
use crate::report::{Header, Report};
use crate::suites::{self, Params, Suite, GV_GAP_NOTE};

pub const SEED_ENV: &str = "CASIMIR_LAB_SEED";

/// Artifacts of one scenario run. The CSV body is kept when the scenario
/// names no CSV path.
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
}

fn header(sc: &Scenario) -> Header {
    Header {
        grid: sc.grid,
        foliation_grid: sc.foliation_grid,
        dt: sc.dt,
        seed: sc.seed,
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut s = String::from("t,p,r,s,H,C\n");
    for i in 0..tr.len() {
        let x = tr.states[i];
        let c = tr.casimir[i].map_or(String::new(), |c| c.to_string());
        s.push_str(&format!("{},{},{},{},{},{}\n", tr.times[i], x.p, x.r, x.s, tr.energy[i], c));
    }
    s
}

/// Execute a scenario, writing the CSV and field dumps it names.
pub fn run(sc: &Scenario) -> Result<Outcome, CliError> {
    sc.validate()?;
    let mut report = Report::new(sc.kind.name(), header(sc));
    let mut rec = Recorder::new(sc.tolerances.clone());
    let mut dumps = Vec::new();
    let mut csv = None;
    match sc.kind {
        Kind::Rattleback => {
            if sc.h >= -1.0 {
                log::warn!("h = {} is outside the rattleback range h < -1", sc.h);
            }
            let xi0 = RattlebackState::try_new(sc.ic[0], sc.ic[1], sc.ic[2]).map_err(CliError::numerical)?;
            let (method, tag) = match sc.method {
                MethodChoice::Rk4 => (Method::Rk4, "rk4"),
                MethodChoice::Rk45 => (Method::Rk45 { tol: sc.rk45_tol }, "rk45"),
            };
            let tr = integrate(xi0, sc.h, sc.dt, sc.t_final(), method).map_err(CliError::numerical)?;
            rec.record(&format!("rattleback.{tag}_energy_drift"), tr.max_energy_drift());
            rec.check(&format!("rattleback.{tag}_casimir_drift"), || {
                Ok(tr.max_casimir_drift().ok_or("trajectory left the chart r > 0")?)
            });
            report.values.insert("samples".into(), tr.len() as f64);
            csv = Some(trajectory_csv(&tr));
        }
        Kind::FluidHelicity | Kind::FluidEuler => {
            let g = fields::grid(sc.grid)?;
            let spec = sc.field.as_deref().expect("validated");
            let state = FluidState::new(fields::one_form("field", spec, g)?).map_err(CliError::numerical)?;
            report.values.insert("helicity".into(), state.helicity());
            report.values.insert("energy".into(), state.energy());
            if sc.kind == Kind::FluidEuler {
                let (out, diag) = euler_evolve(&state, sc.dt, sc.t_final()).map_err(CliError::numerical)?;
                rec.record("fluid.euler_energy_drift", diag.energy_drift());
                rec.record("fluid.euler_helicity_drift", diag.helicity_drift());
                report.values.insert("final_helicity".into(), out.helicity());
                report.values.insert("final_energy".into(), out.energy());
                let mut body = String::from("t,energy,helicity\n");
                for i in 0..diag.times.len() {
                    body.push_str(&format!("{},{},{}\n", diag.times[i], diag.energy[i], diag.helicity[i]));
                }
                csv = Some(body);
                dumps.push(FieldRecord::Form(out.into_alpha()));
            } else {
                dumps.push(FieldRecord::Form(state.into_alpha()));
            }
        }
        Kind::FoliationGv => {
            let g = fields::grid(sc.foliation_grid)?;
            let a = fields::sample("profile", &parse_profile("profile", &sc.profile)?, g)?;
            let f = fields::sample("scale", &parse_expr("scale", &sc.scale)?, g)?;
            let st = FoliatedState::solve_lenient(GraphFoliation::new(a, f).alpha(), Tolerances::default())
                .map_err(CliError::numerical)?;
            let gv = st.godbillon_vey().map_err(CliError::numerical)?;
            let r = st.residuals();
            for (name, v) in [
                ("foliation.integrability", r.integrability),
                ("foliation.chain_eta", r.eta),
                ("foliation.chain_gamma", r.gamma),
                ("foliation.chain_solvability", r.solvability),
                ("foliation.chi_tangency", r.chi_tangency),
                ("foliation.chi_closure", r.chi_closure),
            ] {
                rec.record(name, v);
            }
            report.values.insert("godbillon_vey".into(), gv);
            report.values.insert("reference_residual".into(), r.reference);
            rec.notes.push(GV_GAP_NOTE.to_string());
            for form in [st.alpha(), st.eta(), st.gamma(), st.chi()] {
                dumps.push(FieldRecord::Form(form.clone()));
            }
        }
        Kind::VerifyAll => {
            verify_into(sc, Suite::All, &mut rec, &mut dumps)?;
        }
    }
    report.extend(rec.records, rec.notes);
    if let Some(path) = &sc.outputs.dump_fields {
        fields::dump(path, &dumps)?;
    }
    if let (Some(path), Some(body)) = (&sc.outputs.csv, &csv) {
        write_file(path, body)?;
        csv = None;
    }
    Ok(Outcome { report, csv })
}

fn verify_into(sc: &Scenario, suite: Suite, rec: &mut Recorder, dumps: &mut Vec<FieldRecord>) -> Result<(), CliError> {
    let params = Params {
        grid: sc.grid,
        foliation_grid: sc.foliation_grid,
        dt: sc.dt,
        seed: sc.seed,
        h: sc.h,
        ic: sc.ic,
        rk45_tol: sc.rk45_tol,
        profile: parse_profile("profile", &sc.profile)?,
        scale: parse_expr("scale", &sc.scale)?,
        dump: sc.outputs.dump_fields.is_some(),
    };
    eprintln!("seed = {} (set {SEED_ENV} to replay)", sc.seed);
    suites::run_suite(suite, &params, rec, dumps).map_err(CliError::numerical)
}

/// Run one suite and return its report.
pub fn verify(sc: &Scenario, suite: Suite) -> Result<Report, CliError> {
    sc.validate()?;
    let mut rec = Recorder::new(sc.tolerances.clone());
    let mut dumps = Vec::new();
    verify_into(sc, suite, &mut rec, &mut dumps)?;
    let mut report = Report::new(suite.name(), header(sc));
    report.extend(rec.records, rec.notes);
    if let Some(path) = &sc.outputs.dump_fields {
        fields::dump(path, &dumps)?;
    }
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(name = "casimir-lab", version, about = "Casimir and Godbillon-Vey verification for Lie-Poisson systems")]
pub struct Cli {
    /// Seed for random test fields (overridden by CASIMIR_LAB_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rattleback Lie-Poisson system.
    #[command(subcommand)]
    Rattleback(RattlebackCmd),
    /// Ideal fluids and foliations on the 3-torus.
    #[command(subcommand)]
    Fluid(FluidCmd),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Execute a JSON scenario file.
    Run { config: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    All,
    Rattleback,
    LiePoisson,
    GodbillonVey,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Rattleback => Suite::Rattleback,
            SuiteArg::LiePoisson => Suite::LiePoisson,
            SuiteArg::GodbillonVey => Suite::GodbillonVey,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FluidSuiteArg {
    LiePoisson,
    GodbillonVey,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Graph,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected p,r,s, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}

#[derive(Debug, Subcommand)]
pub enum RattlebackCmd {
    /// Integrate and write a t,p,r,s,H,C trajectory.
    Simulate {
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        h: f64,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0.1,0.2,1.0")]
        ic: [f64; 3],
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100.0)]
        t_final: f64,
        #[arg(long, value_enum, default_value = "rk4")]
        method: MethodArg,
        /// Relative tolerance for rk45.
        #[arg(long, default_value_t = 1e-10)]
        rk45_tol: f64,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the invariant suite and print {check: {residual, tolerance, pass}}.
    Verify {
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        h: f64,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0.1,0.2,1.0")]
        ic: [f64; 3],
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum FluidCmd {
    /// Helicity and energy of a velocity 1-form.
    Helicity {
        /// "ex, ey, ez" expressions or a .f3rm file.
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long)]
        dump_fields: Option<PathBuf>,
    },
    /// Evolve under the Euler equations; CSV columns t,energy,helicity.
    Evolve {
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.5)]
        t_final: f64,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the final 1-form to a .f3rm container.
        #[arg(long)]
        dump_fields: Option<PathBuf>,
    },
    /// Godbillon-Vey invariant and chain residuals of a graph foliation.
    Gv {
        #[arg(long, value_enum, default_value = "graph")]
        preset: Preset,
        /// a(z) in α = f·(dz + a(z) dx).
        #[arg(long, allow_hyphen_values = true, default_value = DEFAULT_PROFILE)]
        profile: String,
        /// f(x, y, z).
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        scale: String,
        #[arg(long, default_value_t = 48)]
        grid: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write α, η, γ, χ to a .f3rm container.
        #[arg(long)]
        dump_fields: Option<PathBuf>,
    },
    /// Run a fluid verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: FluidSuiteArg,
        #[command(flatten)]
        common: SuiteOptions,
    },
}

#[derive(Debug, Args)]
pub struct SuiteOptions {
    /// Grid for fluid checks and transport.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Grid for the foliation identity checks.
    #[arg(long, default_value_t = 48)]
    pub foliation_grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, allow_hyphen_values = true, default_value = DEFAULT_PROFILE)]
    pub profile: String,
    #[arg(long, allow_hyphen_values = true, default_value = DEFAULT_SCALE)]
    pub scale: String,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub dump_fields: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
    pub h: f64,
    #[command(flatten)]
    pub common: SuiteOptions,
}

/// `CASIMIR_LAB_SEED`, then the flag, then the scenario value.
fn resolve_seed(flag: Option<u64>, base: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{SEED_ENV}=`{v}`: {e}"))),
        Err(_) => Ok(flag.unwrap_or(base)),
    }
}

/// Parse expression flags up front so errors carry a caret into the flag text.
fn check_expr_flags(profile: &str, scale: &str) -> Result<(), CliError> {
    parse_profile("--profile", profile)?;
    parse_expr("--scale", scale)?;
    Ok(())
}

fn suite_scenario(opts: &SuiteOptions, seed: u64) -> Result<Scenario, CliError> {
    check_expr_flags(&opts.profile, &opts.scale)?;
    let mut sc = Scenario::new(Kind::VerifyAll);
    sc.grid = opts.grid;
    sc.foliation_grid = opts.foliation_grid;
    sc.dt = opts.dt;
    sc.seed = seed;
    sc.profile = opts.profile.clone();
    sc.scale = opts.scale.clone();
    sc.outputs.dump_fields = opts.dump_fields.clone();
    Ok(sc)
}

fn emit_report(report: &Report, path: Option<&Path>) -> Result<i32, CliError> {
    match path {
        Some(p) => write_file(p, &report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    Ok(finish(report))
}

fn finish(report: &Report) -> i32 {
    if report.pass {
        0
    } else {
        eprintln!("failing checks: {}", report.failing().join(", "));
        1
    }
}

/// Print the CSV (stdout) or the report, keeping stdout a single document.
fn emit_run(out: Outcome, report_path: Option<&Path>) -> Result<i32, CliError> {
    match out.csv {
        Some(body) => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
            if let Some(p) = report_path {
                write_file(p, &out.report.to_json())?;
            }
            Ok(finish(&out.report))
        }
        None => emit_report(&out.report, report_path),
    }
}

/// Convert clap's `--grid`-style options into their scenario, run, and
/// return the process exit code.
pub fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config } => {
            let mut sc = load_config(&config)?;
            sc.seed = resolve_seed(cli.seed, sc.seed)?;
            let report_path = sc.outputs.report.clone();
            let out = run(&sc)?;
            emit_run(out, report_path.as_deref())
        }
        Command::Verify(args) => {
            let mut sc = suite_scenario(&args.common, resolve_seed(cli.seed, crate::config::DEFAULT_SEED)?)?;
            sc.h = args.h;
            let report = verify(&sc, args.suite.into())?;
            emit_report(&report, args.common.report.as_deref())
        }
        Command::Rattleback(cmd) => match cmd {
            RattlebackCmd::Simulate {
                h,
                ic,
                dt,
                t_final,
                method,
                rk45_tol,
                out,
                report,
            } => {
                let mut sc = Scenario::new(Kind::Rattleback);
                sc.h = h;
                sc.ic = ic;
                sc.dt = dt;
                sc.t_final = Some(t_final);
                sc.rk45_tol = rk45_tol;
                sc.method = match method {
                    MethodArg::Rk4 => MethodChoice::Rk4,
                    MethodArg::Rk45 => MethodChoice::Rk45,
                };
                sc.outputs.csv = out;
                let outcome = run(&sc)?;
                if outcome.csv.is_none() && report.is_none() {
                    for c in &outcome.report.checks {
                        eprintln!("{}: {:e} (tolerance {:e})", c.check, c.value, c.tolerance);
                    }
                    return Ok(finish(&outcome.report));
                }
                emit_run(outcome, report.as_deref())
            }
            RattlebackCmd::Verify { h, ic, dt } => {
                let mut sc = Scenario::new(Kind::Rattleback);
                sc.h = h;
                sc.ic = ic;
                sc.dt = dt;
                sc.seed = resolve_seed(cli.seed, sc.seed)?;
                let report = verify(&sc, Suite::Rattleback)?;
                print!("{}", report.to_keyed_json());
                Ok(finish(&report))
            }
        },
        Command::Fluid(cmd) => match cmd {
            FluidCmd::Helicity { field, grid, dump_fields } => {
                let mut sc = Scenario::new(Kind::FluidHelicity);
                sc.grid = grid;
                sc.field = Some(field);
                sc.outputs.dump_fields = dump_fields;
                emit_report(&run(&sc)?.report, None)
            }
            FluidCmd::Evolve {
                field,
                grid,
                dt,
                t_final,
                out,
                report,
                dump_fields,
            } => {
                let mut sc = Scenario::new(Kind::FluidEuler);
                sc.grid = grid;
                sc.dt = dt;
                sc.t_final = Some(t_final);
                sc.field = Some(field);
                sc.outputs.csv = out;
                sc.outputs.dump_fields = dump_fields;
                emit_run(run(&sc)?, report.as_deref())
            }
            FluidCmd::Gv {
                preset: Preset::Graph,
                profile,
                scale,
                grid,
                report,
                dump_fields,
            } => {
                check_expr_flags(&profile, &scale)?;
                let mut sc = Scenario::new(Kind::FoliationGv);
                sc.foliation_grid = grid;
                sc.profile = profile;
                sc.scale = scale;
                sc.outputs.dump_fields = dump_fields;
                let rep = run(&sc)?.report;
                print_gv_table(&rep);
                if let Some(p) = &report {
                    write_file(p, &rep.to_json())?;
                }
                Ok(finish(&rep))
            }
            FluidCmd::Verify { suite, common } => {
                let sc = suite_scenario(&common, resolve_seed(cli.seed, crate::config::DEFAULT_SEED)?)?;
                let suite = match suite {
                    FluidSuiteArg::LiePoisson => Suite::LiePoisson,
                    FluidSuiteArg::GodbillonVey => Suite::GodbillonVey,
                };
                let report = verify(&sc, suite)?;
                emit_report(&report, common.report.as_deref())
            }
        },
    }
}

fn print_gv_table(rep: &Report) {
    println!("GV = {:e}", rep.values.get("godbillon_vey").copied().unwrap_or(f64::NAN));
    println!("{:<30} {:>12} {:>12}  pass", "residual", "value", "tolerance");
    for c in &rep.checks {
        println!("{:<30} {:>12.3e} {:>12.1e}  {}", c.check, c.value, c.tolerance, c.pass);
    }
}
