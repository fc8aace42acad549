//! `iddm`: command-line access to the impurity-doped Dicke model toolkit.
//!
//! Exit codes: 0 success, 1 invalid or missing parameters (stderr names the
//! flag), 2 convergence failure. `IDDM_THREADS` caps worker threads.

mod config;
mod error;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use iddm::ed::{ground_state, EdConfig, ImpurityMode, DEFAULT_MAX_DIMENSION};
use iddm::fluctuations::excitation_spectrum;
use iddm::meanfield::{
    critical_delta, critical_lambda, derivative_scan, equilibrium_closed_form, equilibrium_numeric,
    observables, ScanParameter,
};
use iddm::measurement::{
    angle_for_target_delta, measure, Outcome, ProjectiveMeasurement, WernerState,
};
use iddm::sweep::{
    format_float, run_grid, trace_critical_curve, write_critical_curve_csv, write_csv,
    write_derivative_csv, write_json_lines, AxisRange, GridSpec,
};
use iddm::{ImpurityPopulation, ModelParams};

use config::{pick, RunConfig};
use error::{CliError, EXIT_CONVERGENCE, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "iddm", version, about = "Impurity-doped Dicke model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical population δ_c (given --lambda) or coupling λ_c (given --delta).
    Critical(CriticalArgs),
    /// Mean-field ground state at one (δ, λ).
    Meanfield(MeanfieldArgs),
    /// Phase-diagram grid over (δ, λ).
    Sweep(SweepArgs),
    /// Critical coupling λ_c along a δ axis.
    Curve(CurveArgs),
    /// E₀ and its first two derivatives along δ or λ.
    Deriv(DerivArgs),
    /// Excitation energies (ε₋, ε₊) around the mean-field ground state.
    Spectrum(SpectrumArgs),
    /// Exact-diagonalization ground state, one record per N.
    Ed(EdArgs),
    /// Impurity population after measuring the auxiliary atom.
    Measure(MeasureArgs),
}

#[derive(Args)]
struct Common {
    /// JSON file with default values for any flag (keys use underscores).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xi1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xi2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_q_prime: Option<f64>,
}

impl ModelArgs {
    /// Model coefficients with flag > config > default precedence; λ falls
    /// back to `lambda_default`.
    fn resolve(&self, cfg: &RunConfig, lambda_default: f64) -> ModelParams {
        let d = ModelParams::default();
        ModelParams {
            omega: pick(self.omega, &cfg.omega).unwrap_or(d.omega),
            omega0: pick(self.omega0, &cfg.omega0).unwrap_or(d.omega0),
            lambda: pick(self.lambda, &cfg.lambda).unwrap_or(lambda_default),
            kappa: pick(self.kappa, &cfg.kappa).unwrap_or(d.kappa),
            chi: pick(self.chi, &cfg.chi).unwrap_or(d.chi),
            xi1: pick(self.xi1, &cfg.xi1).unwrap_or(d.xi1),
            xi2: pick(self.xi2, &cfg.xi2).unwrap_or(d.xi2),
            omega_q_prime: pick(self.omega_q_prime, &cfg.omega_q_prime).unwrap_or(d.omega_q_prime),
            n_atoms: d.n_atoms,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

fn parse_format(flag: Option<Format>, cfg: &RunConfig) -> Result<Format, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match cfg.format.as_deref() {
        None | Some("csv") => Ok(Format::Csv),
        Some("json-lines") => Ok(Format::JsonLines),
        Some(other) => Err(CliError::invalid(
            "--format",
            format!("unknown format `{other}`"),
        )),
    }
}

/// Like [`parse_format`], but `None` (plain `key = value` text) when neither
/// the flag nor the config chooses a format.
fn optional_format(flag: Option<Format>, cfg: &RunConfig) -> Result<Option<Format>, CliError> {
    if flag.is_none() && cfg.format.is_none() {
        return Ok(None);
    }
    parse_format(flag, cfg).map(Some)
}

#[derive(Args)]
struct CriticalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Numeric,
}

#[derive(Args)]
struct MeanfieldArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Closed-form branch selection or multi-start minimization.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Number of minimizer starting points (numeric method).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct AxisArgs {
    #[arg(long, allow_negative_numbers = true)]
    delta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_max: Option<f64>,
    #[arg(long)]
    delta_count: Option<usize>,
}

impl AxisArgs {
    fn resolve(&self, cfg: &RunConfig) -> Result<AxisRange, CliError> {
        let min = pick(self.delta_min, &cfg.delta_min).unwrap_or(-1.0);
        let max = pick(self.delta_max, &cfg.delta_max).unwrap_or(1.0);
        let count = pick(self.delta_count, &cfg.delta_count).unwrap_or(201);
        AxisRange::new(min, max, count)
            .map_err(|e| CliError::invalid("--delta-min/--delta-max/--delta-count", e))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    delta_axis: AxisArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_count: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    delta_axis: AxisArgs,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Wrt {
    Delta,
    Lambda,
}

#[derive(Args)]
struct DerivArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Scan variable.
    #[arg(long, value_enum)]
    wrt: Option<Wrt>,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Fixed population for a λ scan.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct EdArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Atom numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Fixed impurity population (omit with --full-qubit).
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Keep the impurity as a dynamical qubit.
    #[arg(long)]
    full_qubit: bool,
    /// Initial photon cutoff; raised automatically to a safe floor.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Include the (χ/N) Jz² term.
    #[arg(long)]
    include_chi: bool,
    /// Largest Hilbert-space dimension allowed.
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sign {
    Plus,
    Minus,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    common: Common,
    /// Werner correlation parameter z ∈ [0, 1].
    #[arg(long)]
    z: Option<f64>,
    /// Measurement angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    sign: Option<Sign>,
    /// Target population; chooses θ and the outcome instead of --theta/--sign.
    #[arg(long, allow_negative_numbers = true)]
    target: Option<f64>,
}

/// Human-readable number: at most 12 decimals, trailing zeros dropped.
fn human(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn open_output(common: &Common, cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    let path = common
        .output
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from));
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(&p).map_err(|e| {
            CliError::invalid("--output", format!("{}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn population(delta: f64) -> Result<ImpurityPopulation, CliError> {
    Ok(ImpurityPopulation::new(delta)?)
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::invalid(flag, "is required"))
}

fn write_record<W: Write + ?Sized>(out: &mut W, format: Format, record: &Value) -> io::Result<()> {
    let map = record.as_object().expect("records are JSON objects");
    match format {
        Format::JsonLines => writeln!(out, "{record}"),
        Format::Csv => {
            let keys: Vec<&str> = map.keys().map(String::as_str).collect();
            writeln!(out, "{}", keys.join(","))?;
            let values: Vec<String> = map.values().map(csv_cell).collect();
            writeln!(out, "{}", values.join(","))
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n
            .as_f64()
            .map(format_float)
            .unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn cmd_critical(args: CriticalArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let lambda = pick(args.model.lambda, &cfg.lambda);
    let delta = pick(args.delta, &cfg.delta);
    let params = args.model.resolve(&cfg, lambda.unwrap_or(0.0));
    let mut out = open_output(&args.common, &cfg)?;
    match (lambda, delta) {
        (Some(_), None) => match critical_delta(&params)? {
            Some(d) => writeln!(out, "delta_c = {}", human(d))?,
            None => writeln!(out, "no-transition")?,
        },
        (None, Some(d)) => match critical_lambda(&params, population(d)?)? {
            Some(l) => writeln!(out, "lambda_c = {}", human(l))?,
            None => writeln!(out, "no-transition")?,
        },
        _ => {
            return Err(CliError::invalid(
                "--lambda/--delta",
                "give exactly one of --lambda (solve for delta_c) or --delta (solve for lambda_c)",
            ))
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_meanfield(args: MeanfieldArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let params = args.model.resolve(&cfg, ModelParams::default().lambda);
    let delta = population(required(pick(args.delta, &cfg.delta), "--delta")?)?;
    let method = match (args.method, cfg.method.as_deref()) {
        (Some(m), _) => m,
        (None, None | Some("closed")) => Method::Closed,
        (None, Some("numeric")) => Method::Numeric,
        (None, Some(other)) => {
            return Err(CliError::invalid(
                "--method",
                format!("unknown method `{other}`"),
            ))
        }
    };
    let seeds = pick(args.seeds, &cfg.seeds).unwrap_or(64);
    let solution = match method {
        Method::Closed => equilibrium_closed_form(&params, delta)?,
        Method::Numeric => equilibrium_numeric(&params, delta, seeds)?,
    };
    let (jz, i) = observables(&solution);
    let record = json!({
        "delta": delta.value(),
        "lambda": params.lambda,
        "alpha2": solution.alpha * solution.alpha,
        "beta2": solution.beta * solution.beta,
        "e0": solution.e0,
        "jz_over_n": jz,
        "i_over_n": i,
        "nu": solution.nu,
        "phase": solution.phase.label(),
    });
    let mut out = open_output(&args.common, &cfg)?;
    match optional_format(args.format, &cfg)? {
        Some(format) => write_record(&mut out, format, &record)?,
        None => write_text(&mut out, &record)?,
    }
    out.flush()?;
    Ok(())
}

fn write_text<W: Write + ?Sized>(out: &mut W, record: &Value) -> io::Result<()> {
    for (key, value) in record.as_object().expect("records are JSON objects") {
        let shown = match value {
            Value::Number(n) => human(n.as_f64().unwrap_or(f64::NAN)),
            Value::String(s) => s.clone(),
            Value::Null => "none".into(),
            other => other.to_string(),
        };
        writeln!(out, "{key} = {shown}")?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let params = args.model.resolve(&cfg, ModelParams::default().lambda);
    let delta_range = args.delta_axis.resolve(&cfg)?;
    let lambda_range = AxisRange::new(
        pick(args.lambda_min, &cfg.lambda_min).unwrap_or(0.0),
        pick(args.lambda_max, &cfg.lambda_max).unwrap_or(12.0),
        pick(args.lambda_count, &cfg.lambda_count).unwrap_or(121),
    )
    .map_err(|e| CliError::invalid("--lambda-min/--lambda-max/--lambda-count", e))?;
    params.validate()?;
    let format = parse_format(args.format, &cfg)?;
    let rows = run_grid(&GridSpec {
        delta_range,
        lambda_range,
        params,
    })?;
    let mut out = open_output(&args.common, &cfg)?;
    match format {
        Format::Csv => write_csv(&rows, &mut out)?,
        Format::JsonLines => write_json_lines(&rows, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_curve(args: CurveArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let params = args.model.resolve(&cfg, ModelParams::default().lambda);
    let axis = args.delta_axis.resolve(&cfg)?;
    let format = parse_format(args.format, &cfg)?;
    let points = trace_critical_curve(&params, &axis)?;
    let mut out = open_output(&args.common, &cfg)?;
    match format {
        Format::Csv => write_critical_curve_csv(&points, &mut out)?,
        Format::JsonLines => write_json_lines(&points, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DerivativeRow {
    param: &'static str,
    value: f64,
    e0: f64,
    d1: f64,
    d2: Option<f64>,
}

fn cmd_deriv(args: DerivArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let params = args.model.resolve(&cfg, ModelParams::default().lambda);
    let wrt = match (args.wrt, cfg.wrt.as_deref()) {
        (Some(w), _) => w,
        (None, None | Some("delta")) => Wrt::Delta,
        (None, Some("lambda")) => Wrt::Lambda,
        (None, Some(other)) => {
            return Err(CliError::invalid(
                "--wrt",
                format!("unknown scan variable `{other}`"),
            ))
        }
    };
    let (parameter, default_range) = match wrt {
        Wrt::Delta => (ScanParameter::Delta, (0.0, 1.0)),
        Wrt::Lambda => (ScanParameter::Lambda, (0.0, 12.0)),
    };
    let from = pick(args.from, &cfg.from).unwrap_or(default_range.0);
    let to = pick(args.to, &cfg.to).unwrap_or(default_range.1);
    let step = pick(args.step, &cfg.step).unwrap_or(1e-3);
    let fixed = population(pick(args.delta, &cfg.delta).unwrap_or(0.0))?;
    let format = parse_format(args.format, &cfg)?;
    let scan = derivative_scan(&params, fixed, parameter, from, to, step)?;
    let mut out = open_output(&args.common, &cfg)?;
    match format {
        Format::Csv => write_derivative_csv(&scan, &mut out)?,
        Format::JsonLines => {
            let n = scan.grid.len();
            let rows: Vec<DerivativeRow> = (0..n)
                .map(|i| DerivativeRow {
                    param: scan.parameter.name(),
                    value: scan.grid[i],
                    e0: scan.e0_values[i],
                    d1: scan.d1_values[i],
                    d2: (i > 0 && i + 1 < n).then(|| scan.d2_values[i - 1]),
                })
                .collect();
            write_json_lines(&rows, &mut out)?
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let params = args.model.resolve(&cfg, ModelParams::default().lambda);
    let delta = population(required(pick(args.delta, &cfg.delta), "--delta")?)?;
    let spectrum = excitation_spectrum(&params, delta)?;
    let record = json!({
        "delta": delta.value(),
        "lambda": params.lambda,
        "eps_minus": spectrum.eps_minus,
        "eps_plus": spectrum.eps_plus,
        "stable": spectrum.stable,
    });
    let mut out = open_output(&args.common, &cfg)?;
    match optional_format(args.format, &cfg)? {
        Some(format) => write_record(&mut out, format, &record)?,
        None => write_text(&mut out, &record)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_ed(args: EdArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let params = args.model.resolve(&cfg, ModelParams::default().lambda);
    let n_list = pick(args.n, &cfg.n).unwrap_or_else(|| vec![params.n_atoms]);
    if n_list.is_empty() {
        return Err(CliError::invalid("--n", "needs at least one atom number"));
    }
    let full_qubit = args.full_qubit || cfg.full_qubit.unwrap_or(false);
    let delta = pick(args.delta, &cfg.delta);
    let mode = match (full_qubit, delta) {
        (true, None) => ImpurityMode::FullQubit,
        (false, Some(d)) => ImpurityMode::FixedDelta(population(d)?),
        (true, Some(_)) => {
            return Err(CliError::invalid(
                "--delta/--full-qubit",
                "give only one of them",
            ))
        }
        (false, None) => {
            return Err(CliError::invalid(
                "--delta",
                "is required without --full-qubit",
            ))
        }
    };
    let include_chi = args.include_chi || cfg.include_chi.unwrap_or(false);
    let cutoff = pick(args.cutoff, &cfg.cutoff).unwrap_or(1);
    let max_dimension = pick(args.max_dim, &cfg.max_dim).unwrap_or(DEFAULT_MAX_DIMENSION);

    // Mean-field reference for a fixed population, when the closed form applies.
    let reference = match mode {
        ImpurityMode::FixedDelta(d) if !include_chi || params.chi == 0.0 => {
            let f = iddm::model::effective_frequencies(&params, d).ok();
            equilibrium_closed_form(&ModelParams { chi: 0.0, ..params }, d)
                .ok()
                .zip(f)
                .map(|(s, f)| s.e0 - 0.5 * f.f2)
        }
        _ => None,
    };

    let mut out = open_output(&args.common, &cfg)?;
    let mut unconverged = Vec::new();
    for n in n_list {
        let config = EdConfig {
            include_chi,
            max_dimension,
            ..EdConfig::new(n, mode).with_cutoff(cutoff)
        };
        let result = ground_state(&params, &config)?;
        if !result.converged {
            unconverged.push(n);
        }
        let mut record = serde_json::to_value(result).map_err(io::Error::other)?;
        let map = record
            .as_object_mut()
            .expect("EdResult serializes to an object");
        map.insert("delta".into(), json!(delta));
        map.insert("mean_field_energy".into(), json!(reference));
        map.insert(
            "deviation".into(),
            json!(reference.map(|e| (result.energy_per_atom - e).abs())),
        );
        writeln!(out, "{record}")?;
    }
    out.flush()?;
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::convergence(format!(
            "photon cutoff not converged for N = {unconverged:?}"
        )))
    }
}

fn cmd_measure(args: MeasureArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let z = required(pick(args.z, &cfg.z), "--z")?;
    let state = WernerState::new(z)?;
    let theta = pick(args.theta, &cfg.theta);
    let target = pick(args.target, &cfg.target);
    let sign = match (args.sign, cfg.sign.as_deref()) {
        (Some(s), _) => Some(s),
        (None, None) => None,
        (None, Some("plus")) => Some(Sign::Plus),
        (None, Some("minus")) => Some(Sign::Minus),
        (None, Some(other)) => {
            return Err(CliError::invalid(
                "--sign",
                format!("unknown outcome `{other}`"),
            ))
        }
    };
    let measurement = match (theta, sign, target) {
        (Some(theta), Some(sign), None) => {
            let outcome = match sign {
                Sign::Plus => Outcome::Plus,
                Sign::Minus => Outcome::Minus,
            };
            ProjectiveMeasurement::new(theta, outcome)
        }
        (None, None, Some(t)) => angle_for_target_delta(z, t)?,
        (_, _, Some(_)) => {
            return Err(CliError::invalid(
                "--target",
                "cannot be combined with --theta/--sign",
            ))
        }
        (None, _, None) => {
            return Err(CliError::invalid(
                "--theta",
                "is required (or give --target)",
            ))
        }
        (Some(_), None, None) => {
            return Err(CliError::invalid("--sign", "is required with --theta"))
        }
    };
    let collapsed = measure(&state, &measurement)?;
    let mut out = open_output(&args.common, &cfg)?;
    writeln!(out, "delta = {}", human(collapsed.delta))?;
    writeln!(out, "probability = {}", human(collapsed.probability))?;
    writeln!(out, "theta = {}", human(measurement.theta))?;
    writeln!(
        out,
        "sign = {}",
        match measurement.outcome {
            Outcome::Plus => "plus",
            Outcome::Minus => "minus",
        }
    )?;
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let entry = collapsed.density_matrix[(i, j)];
        let shown = if entry.im == 0.0 {
            human(entry.re)
        } else {
            format!("{}{:+}i", human(entry.re), entry.im)
        };
        writeln!(out, "rho_{i}{j} = {shown}")?;
    }
    out.flush()?;
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("IDDM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::invalid("IDDM_THREADS", format!("`{raw}` is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::invalid("IDDM_THREADS", e))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Critical(a) => cmd_critical(a),
        Command::Meanfield(a) => cmd_meanfield(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Deriv(a) => cmd_deriv(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Ed(a) => cmd_ed(a),
        Command::Measure(a) => cmd_measure(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            debug_assert!(e.code == EXIT_INVALID || e.code == EXIT_CONVERGENCE);
            ExitCode::from(e.code)
        }
    }
}
