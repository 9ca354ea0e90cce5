//! `daiod`: simulate radar passes, solve them into orbit sets, query orbit
//! sets and run campaigns.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 domain error
//! (no visible pass, point outside the unit box), 3 solver failure. Errors
//! are also written to stderr as one JSON object.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use daiod::astro::ClassicalElements;
use daiod::measproc::{read_track_csv, read_track_json, write_track_csv, write_track_json, ProcessingMode};
use daiod::pipeline::{evaluate_orbit_set, orbit_set_bounds, solve_track, OrbitSet, PipelineConfig};
use daiod::sim::{
    campaign_pipeline, generate_pass, plan_campaign, run_campaign, success_comparison, CampaignConfig,
    NoiseLevel, PassSpec, PassTruth, SimError,
};

const TRUTH_SCHEMA: &str = "daiod.truth/1";
const CAMPAIGN_SCHEMA: &str = "daiod.campaign/1";
const FAILURE_SCHEMA: &str = "daiod.failure/1";

#[derive(Parser)]
#[command(name = "daiod", version, about = "Doppler radar initial orbit determination with orbit-set uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one pass and write the track and its truth record.
    Simulate(SimulateArgs),
    /// Solve a track into an orbit set.
    Solve(SolveArgs),
    /// Evaluate an orbit set at a point of the deviation box.
    Evaluate(EvaluateArgs),
    /// Print the per-element bounds of an orbit set.
    Bounds(BoundsArgs),
    /// Run a simulated campaign and write result tables.
    Campaign(CampaignArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Raw,
    Regress,
}

impl From<Mode> for ProcessingMode {
    fn from(m: Mode) -> ProcessingMode {
        match m {
            Mode::Raw => ProcessingMode::Raw,
            Mode::Regress => ProcessingMode::Regress,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Track output path; `.csv` writes rows only.
    #[arg(long, env = "DAIOD_OUTPUT")]
    output: PathBuf,
    /// Truth record path; defaults to `<output stem>.truth.json`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Osculating elements a,e,i,raan,argp,nu (km, -, deg).
    #[arg(long, value_delimiter = ',', num_args = 6, default_values_t = [7000.0, 0.001, 75.0, 30.0, 10.0, 20.0])]
    elements: Vec<f64>,
    /// Observed arc as a fraction of the period; whole pass when omitted.
    #[arg(long)]
    arc_fraction: Option<f64>,
    #[arg(long, env = "DAIOD_TS", default_value_t = 5.0)]
    ts: f64,
    #[arg(long, env = "DAIOD_NOISE_LEVEL", default_value = "k1")]
    noise_level: String,
    /// Keep the declared noise but inject none.
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value_t = 10.0)]
    mask: f64,
    #[arg(long, env = "DAIOD_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, env = "DAIOD_MODE", value_enum, default_value = "regress")]
    mode: Mode,
    /// DA expansion order of the orbit set.
    #[arg(long, env = "DAIOD_ORDER", default_value_t = 4)]
    order: usize,
    #[arg(long, env = "DAIOD_MAX_SPLITS", default_value_t = 5)]
    max_splits: u32,
    /// Cap on manifold entries; unlimited when omitted.
    #[arg(long, env = "DAIOD_MAX_ENTRIES")]
    max_entries: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    tol_a: f64,
    #[arg(long, default_value_t = 0.01)]
    tol_e: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_i: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_raan: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_u: f64,
    #[arg(long, env = "DAIOD_IOTA", default_value_t = 0.997)]
    iota: f64,
    #[arg(long, env = "DAIOD_NMC", default_value_t = 1000)]
    nmc: usize,
    /// Lowest regression degree.
    #[arg(long, env = "DAIOD_REGRESSION_ORDER", default_value_t = 2)]
    regression_order: usize,
    /// Highest regression degree; equal to --regression-order fixes it.
    #[arg(long, env = "DAIOD_MAX_REGRESSION_ORDER", default_value_t = 6)]
    max_regression_order: usize,
    /// Solve from the nominal angles only.
    #[arg(long)]
    no_corner_scan: bool,
    /// Fit the raw observables instead of their residuals about a
    /// preliminary orbit.
    #[arg(long)]
    no_detrend: bool,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> Result<PipelineConfig, CliError> {
        if !(self.iota > 0.0 && self.iota < 1.0) {
            return Err(CliError::config(format!("--iota {} outside (0, 1)", self.iota)));
        }
        if self.order == 0 {
            return Err(CliError::config("--order must be at least 1"));
        }
        if self.max_regression_order < self.regression_order {
            return Err(CliError::config("--max-regression-order below --regression-order"));
        }
        let mut cfg = PipelineConfig::default();
        cfg.meas.mode = self.mode.into();
        cfg.meas.iota = self.iota;
        cfg.meas.n_mc = self.nmc;
        cfg.meas.regression_order = self.regression_order;
        cfg.meas.max_regression_order = self.max_regression_order;
        cfg.meas.detrend = !self.no_detrend;
        cfg.meas.seed = seed;
        cfg.phase2.corner_scan = !self.no_corner_scan;
        cfg.ads.order = self.order;
        cfg.ads.max_splits_per_direction = self.max_splits;
        cfg.ads.max_entries = self.max_entries;
        cfg.ads.tolerances = vec![self.tol_a, self.tol_e, self.tol_i, self.tol_raan, self.tol_u];
        cfg.ads.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Track file (`.json`, or `.csv` with the default geometry).
    #[arg(long, env = "DAIOD_INPUT")]
    input: PathBuf,
    /// Orbit-set output path.
    #[arg(long, env = "DAIOD_OUTPUT")]
    output: PathBuf,
    /// Truth record; adds element errors to the summary.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, env = "DAIOD_SEED", default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, env = "DAIOD_INPUT")]
    input: PathBuf,
    /// Six normalized deviations in [-1, 1].
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    deviations: Vec<f64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, env = "DAIOD_INPUT")]
    input: PathBuf,
}

#[derive(Args)]
struct CampaignArgs {
    /// Campaign configuration JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the result tables.
    #[arg(long, env = "DAIOD_OUTPUT")]
    output: PathBuf,
    #[arg(long)]
    passes: Option<usize>,
    /// Noise rungs, e.g. k1,k5,k10.
    #[arg(long, value_delimiter = ',')]
    noise_levels: Option<Vec<String>>,
    #[arg(long, env = "DAIOD_MODE", value_enum)]
    mode: Option<Mode>,
    #[arg(long, env = "DAIOD_TS")]
    ts: Option<f64>,
    #[arg(long, env = "DAIOD_MAX_ENTRIES")]
    max_entries: Option<usize>,
    #[arg(long, env = "DAIOD_SEED")]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "DAIOD_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Also run the centre-only versus corner-scan comparison.
    #[arg(long)]
    compare_centre: bool,
    /// Regress without the preliminary-orbit detrending.
    #[arg(long)]
    no_detrend: bool,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    fn config(m: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            kind: "config",
            message: m.into(),
        }
    }
    fn domain(m: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            kind: "domain",
            message: m.into(),
        }
    }
    fn solver(m: impl Into<String>) -> CliError {
        CliError {
            code: 3,
            kind: "solver",
            message: m.into(),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv"))
}

#[derive(Serialize, Deserialize)]
struct TruthFile {
    schema: String,
    #[serde(flatten)]
    truth: PassTruth,
}

fn read_truth(path: &Path) -> Result<PassTruth, CliError> {
    let s = read_file(path)?;
    let v: serde_json::Value = serde_json::from_str(&s).map_err(|e| io_err(path, e))?;
    let schema = v.get("schema").and_then(|x| x.as_str()).unwrap_or("");
    if schema != TRUTH_SCHEMA {
        return Err(CliError::config(format!("unsupported truth schema {schema:?}")));
    }
    let f: TruthFile = serde_json::from_value(v).map_err(|e| io_err(path, e))?;
    Ok(f.truth)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let noise = NoiseLevel::from_label(&a.noise_level).map_err(|e| CliError::config(e.to_string()))?;
    let e = &a.elements;
    let elements = ClassicalElements {
        a: e[0],
        e: e[1],
        i: e[2],
        raan: e[3],
        argp: e[4],
        nu: e[5],
    };
    let mut spec = PassSpec::new(elements, noise, a.seed);
    spec.ts = a.ts;
    spec.mask_deg = a.mask;
    spec.noiseless = a.noiseless;
    spec.arc_fraction = a.arc_fraction;
    let (track, truth) = generate_pass(&spec).map_err(|e| match e {
        SimError::NoVisibility => CliError::domain(e.to_string()),
        other => CliError::config(other.to_string()),
    })?;
    if let Some(dir) = a.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    if is_csv(&a.output) {
        write_track_csv(&a.output, &track)
    } else {
        write_track_json(&a.output, &track)
    }
    .map_err(|e| io_err(&a.output, e))?;
    let truth_path = a.truth.clone().unwrap_or_else(|| a.output.with_extension("truth.json"));
    let f = TruthFile {
        schema: TRUTH_SCHEMA.into(),
        truth,
    };
    write_file(&truth_path, &serde_json::to_string_pretty(&f).unwrap())?;
    println!(
        "simulated {} observations over {:.1} s ({:.4} of the period)",
        f.truth.n_obs,
        track.duration(),
        f.truth.arc_fraction
    );
    println!("track: {}\ntruth: {}", a.output.display(), truth_path.display());
    Ok(())
}

const NAMES: [&str; 5] = ["a [km]", "e [-]", "i [deg]", "raan [deg]", "u [deg]"];

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let cfg = a.solver.config(a.seed)?;
    let track = if is_csv(&a.input) {
        read_track_csv(&a.input, daiod::astro::RadarGeometry::graves_like())
    } else {
        read_track_json(&a.input)
    }
    .map_err(|e| io_err(&a.input, e))?;
    let truth = a.truth.as_deref().map(read_truth).transpose()?;
    let os = match solve_track(&track, &cfg) {
        Ok(os) => os,
        Err(e) => {
            let report = serde_json::json!({
                "schema": FAILURE_SCHEMA,
                "input": a.input.display().to_string(),
                "error": e.to_string(),
            });
            let path = a.output.with_extension("failure.json");
            write_file(&path, &serde_json::to_string_pretty(&report).unwrap())?;
            return Err(CliError::solver(format!("{e} (report in {})", path.display())));
        }
    };
    write_file(&a.output, &os.to_json().map_err(|e| CliError::solver(e.to_string()))?)?;
    let nominal = os.nominal.to_array();
    let eps = truth.as_ref().map(|t| os.nominal.abs_error(&t.elements));
    println!("orbit set: {}", a.output.display());
    println!("{:<12} {:>16} {:>14} {:>14}", "element", "nominal", "bound b", "error");
    for q in 0..5 {
        let err = eps.map_or(String::from("-"), |e| format!("{:.6e}", e[q]));
        println!("{:<12} {:>16.8} {:>14.6e} {:>14}", NAMES[q], nominal[q], os.bounds.half_widths[q], err);
    }
    let d = &os.diagnostics;
    let rj = d
        .outcomes
        .iter()
        .find(|o| o.corner == d.selected_corner)
        .and_then(|o| o.residual);
    println!("sets N_s: {}", os.n_s());
    println!(
        "selected corner: {} (R = {}), ranges {:.6} / {:.6} km",
        d.selected_corner,
        rj.map_or("-".into(), |r| format!("{r:.6e}")),
        os.ranges.rho1,
        os.ranges.rho_n
    );
    println!(
        "timing [s]: phase 1 {:.3}, phase 2 {:.3}, phase 3 {:.3}",
        os.timing_s[0], os.timing_s[1], os.timing_s[2]
    );
    Ok(())
}

fn read_orbit_set(path: &Path) -> Result<OrbitSet, CliError> {
    OrbitSet::from_json(&read_file(path)?).map_err(|e| io_err(path, e))
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let os = read_orbit_set(&a.input)?;
    let d: [f64; 6] = a.deviations.clone().try_into().map_err(|_| CliError::config("need six deviations"))?;
    if d.iter().any(|x| !(x.abs() <= 1.0)) {
        return Err(CliError::domain("deviations must lie in [-1, 1]"));
    }
    let el = evaluate_orbit_set(&os, &d).map_err(|e| CliError::domain(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&el).unwrap());
    Ok(())
}

fn cmd_bounds(a: &BoundsArgs) -> Result<(), CliError> {
    let os = read_orbit_set(&a.input)?;
    let b = orbit_set_bounds(&os);
    let out: Vec<serde_json::Value> = (0..5)
        .map(|q| {
            serde_json::json!({
                "element": NAMES[q],
                "lo": b.intervals[q].lo,
                "hi": b.intervals[q].hi,
                "half_width": b.half_widths[q],
            })
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}

#[derive(Deserialize)]
struct CampaignFile {
    schema: String,
    #[serde(flatten)]
    config: CampaignConfig,
}

fn cmd_campaign(a: &CampaignArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => {
            let f: CampaignFile = serde_json::from_str(&read_file(p)?).map_err(|e| io_err(p, e))?;
            if f.schema != CAMPAIGN_SCHEMA {
                return Err(CliError::config(format!("unsupported campaign schema {:?}", f.schema)));
            }
            f.config
        }
        None => CampaignConfig {
            pipeline: campaign_pipeline(),
            ..CampaignConfig::default()
        },
    };
    if let Some(n) = a.passes {
        cfg.n_passes = n;
    }
    if let Some(levels) = &a.noise_levels {
        cfg.noise_rungs = levels
            .iter()
            .map(|l| {
                l.trim()
                    .strip_prefix('k')
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| CliError::config(format!("bad noise level {l:?}")))
            })
            .collect::<Result<_, _>>()?;
    }
    if a.no_detrend {
        cfg.pipeline.meas.detrend = false;
    }
    if let Some(m) = a.mode {
        cfg.pipeline.meas.mode = m.into();
    }
    if let Some(ts) = a.ts {
        cfg.ts = ts;
    }
    if a.max_entries.is_some() {
        cfg.pipeline.ads.max_entries = a.max_entries;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let specs = plan_campaign(&cfg).map_err(|e| match e {
        SimError::NoVisibility => CliError::domain(e.to_string()),
        other => CliError::config(other.to_string()),
    })?;
    let result = run_campaign(&specs, &cfg.pipeline, a.jobs);
    let dir = &a.output;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let canonical = result.canonical();
    write_file(&dir.join("campaign.json"), &canonical.to_json().map_err(|e| CliError::config(e.to_string()))?)?;
    write_file(&dir.join("table.csv"), &result.to_csv_table())?;
    let timing: Vec<f64> = result.passes.iter().map(|p| p.wall_time_s).collect();
    write_file(&dir.join("timing.json"), &serde_json::to_string(&timing).unwrap())?;
    println!(
        "{} passes, success rate {:.4}; tables in {}",
        result.passes.len(),
        result.success_rate,
        dir.display()
    );
    if a.compare_centre {
        let cmp = success_comparison(&specs, &cfg.pipeline, a.jobs);
        write_file(&dir.join("success.csv"), &cmp.to_csv())?;
        println!(
            "success rate: centre only {:.4}, corner scan {:.4}",
            cmp.centre_only_rate, cmp.corner_scan_rate
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Campaign(a) => cmd_campaign(a),
    }
}

fn report(e: &CliError) {
    let v = serde_json::json!({"error": {"kind": e.kind, "code": e.code, "message": e.message}});
    eprintln!("{v}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            report(&CliError::config(e.to_string()));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.code)
        }
    }
}
