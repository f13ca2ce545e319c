//! Command-line front end: `eigen`, `sweep`, `check`, `evolve`, `tables`.
//!
//! Every numeric flag may also come from a flat `key=value` config file given
//! with `--config`; flags on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::f64::consts::{FRAC_PI_3, TAU};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adiabatic::{self, AdiabaticSchedule};
use crate::check::{self, CheckConfig, CheckTolerances};
use crate::observables::RatioAxis;
use crate::sweep::{self, Grid, GridKind, OutputRecord, Preset, SweepSpec};
use crate::tables;
use crate::{spectrum, wrap_angle, Error, ModelParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_ADIABATICITY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "xxz-berry", version, about = "Eigensystem, Berry phases and concurrence of two XXZ-coupled qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long)]
    jx: Option<f64>,
    #[arg(long)]
    jz: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    /// Polar angle of the field axis, radians.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Field azimuth, radians.
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write data to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Turn degeneracy / adiabaticity / table warnings into exit codes.
    #[arg(long)]
    strict: bool,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// All four levels at one parameter point.
    Eigen {
        #[command(flatten)]
        common: Common,
    },
    /// Grid scan of one coupling ratio.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// xx (ω-plane), ising (λ-plane), xxz-vary-jz, custom.
        #[arg(long)]
        preset: Option<String>,
        /// Scanned ratio for the custom preset: jx or jz (in units of b0).
        #[arg(long)]
        axis: Option<String>,
        /// log or linear.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        /// Comma-separated polar angles.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        thetas: Option<Vec<f64>>,
    },
    /// Randomized oracle and symmetry cross-check.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tol_root: Option<f64>,
        #[arg(long)]
        tol_eig: Option<f64>,
        #[arg(long)]
        tol_berry: Option<f64>,
        #[arg(long)]
        tol_conc: Option<f64>,
        #[arg(long)]
        tol_residual: Option<f64>,
        #[arg(long)]
        tol_sym: Option<f64>,
    },
    /// Integrate one slow rotation and extract the geometric phase.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Level index 0..=3.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Limit-regime tables, computed vs expected.
    Tables {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Failure carrying the process exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn io(err: io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("I/O error: {err}") }
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateInput | Error::DegenerateSpectrum { .. } => Self { code: EXIT_DEGENERATE, message: e.to_string() },
            Error::AdiabaticityViolation { .. } => Self { code: EXIT_ADIABATICITY, message: e.to_string() },
            _ => Exit::usage(e.to_string()),
        }
    }
}

/// Flags merged over an optional config file.
struct Settings {
    common: Common,
    file: BTreeMap<String, String>,
}

fn parse_config(path: &Path) -> Result<BTreeMap<String, String>, Exit> {
    let text = std::fs::read_to_string(path).map_err(Exit::io)?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Exit::usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    fn new(common: Common) -> Result<Self, Exit> {
        let file = match &common.config {
            Some(path) => parse_config(path)?,
            None => BTreeMap::new(),
        };
        Ok(Self { common, file })
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Exit> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v.parse().map(Some).map_err(|_| Exit::usage(format!("config: bad value for {key}: {v}"))),
            None => Ok(None),
        }
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Exit> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    fn params(&self, jx: f64, jz: f64, b0: f64) -> Result<ModelParams, Exit> {
        let c = &self.common;
        Ok(ModelParams::new(
            self.get(c.jx, "jx", jx)?,
            self.get(c.jz, "jz", jz)?,
            self.get(c.b0, "b0", b0)?,
            self.get(c.theta, "theta", FRAC_PI_3)?,
        )?)
    }

    fn strict(&self) -> Result<bool, Exit> {
        Ok(self.common.strict || self.get(None, "strict", false)?)
    }

    fn format(&self) -> Result<Option<Format>, Exit> {
        if self.common.format.is_some() {
            return Ok(self.common.format);
        }
        match self.file.get("format").map(String::as_str) {
            None => Ok(None),
            Some("csv") => Ok(Some(Format::Csv)),
            Some("json") => Ok(Some(Format::Json)),
            Some(other) => Err(Exit::usage(format!("config: unknown format '{other}'"))),
        }
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.common.out.clone().or_else(|| self.file.get("out").map(PathBuf::from))
    }

    /// Runs `write` against `--out` or the given stdout.
    fn emit(&self, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Exit> {
        match self.out_path() {
            Some(path) => {
                let mut f = BufWriter::new(File::create(&path).map_err(Exit::io)?);
                write(&mut f).and_then(|_| f.flush()).map_err(Exit::io)
            }
            None => write(stdout).map_err(Exit::io),
        }
    }
}

fn emit_records(settings: &Settings, records: &[OutputRecord], format: Format, stdout: &mut dyn Write) -> Result<(), Exit> {
    settings.emit(stdout, |w| match format {
        Format::Csv => sweep::write_csv(records, w),
        Format::Json => sweep::write_json(records, w),
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Eigen { common } => cmd_eigen(Settings::new(common), stdout, stderr),
        Command::Sweep { common, preset, axis, grid, lo, hi, count, thetas } => {
            let opts = SweepOptions { preset, axis, grid, lo, hi, count, thetas };
            Settings::new(common).and_then(|s| cmd_sweep(&s, opts, stdout))
        }
        Command::Check { common, samples, tol_root, tol_eig, tol_berry, tol_conc, tol_residual, tol_sym } => {
            let opts = CheckOptions { samples, tol_root, tol_eig, tol_berry, tol_conc, tol_residual, tol_sym };
            Settings::new(common).and_then(|s| cmd_check(&s, opts, stdout, stderr))
        }
        Command::Evolve { common, omega, steps, level } => {
            Settings::new(common).and_then(|s| cmd_evolve(&s, omega, steps, level, stdout, stderr))
        }
        Command::Tables { common, tol } => Settings::new(common).and_then(|s| cmd_tables(&s, tol, stdout)),
    };
    match result {
        Ok(code) => code,
        Err(exit) => {
            let _ = writeln!(stderr, "error: {}", exit.message);
            exit.code
        }
    }
}

fn cmd_eigen(settings: Result<Settings, Exit>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Exit> {
    let settings = settings?;
    let params = settings.params(0.0, 0.0, 1.0)?;
    let phi = settings.get(settings.common.phi, "phi", 0.0)?;
    let spec = match spectrum::solve(&params) {
        Ok(s) => s,
        Err(Error::DegenerateInput) => {
            let e = spectrum::eigenvalues(&params);
            writeln!(stderr, "error: {}", Error::DegenerateInput).map_err(Exit::io)?;
            writeln!(stderr, "eigenvalues: E_0 = {}, E_1 = E_2 = E_3 = {}", e[0], e[1]).map_err(Exit::io)?;
            return Ok(EXIT_DEGENERATE);
        }
        Err(e) => return Err(e.into()),
    };
    let records = OutputRecord::all_levels(&spec);
    let degenerate = records.iter().any(|r| r.degenerate);
    if degenerate {
        writeln!(stderr, "note: degenerate triplet levels; their Berry phases depend on the chosen basis").map_err(Exit::io)?;
    }

    match settings.format()? {
        Some(format) => emit_records(&settings, &records, format, stdout)?,
        None => settings.emit(stdout, |w| render_eigen(&params, phi, &spec, &records, w))?,
    }
    Ok(if degenerate && settings.strict()? { EXIT_DEGENERATE } else { EXIT_OK })
}

fn render_eigen(
    params: &ModelParams,
    phi: f64,
    spec: &spectrum::Spectrum,
    records: &[OutputRecord],
    w: &mut dyn Write,
) -> io::Result<()> {
    writeln!(
        w,
        "j_x = {}, j_z = {}, b0 = {}, theta = {}, phi = {}",
        params.j_x(),
        params.j_z(),
        params.b0(),
        params.theta(),
        phi
    )?;
    writeln!(w, "{:>2} {:>14} {:>11} {:>11} {:>11} {:>15} {:>12}  flags", "n", "E_n", "a", "b", "c", "berry_over_2pi", "concurrence")?;
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    for r in records {
        let mut flags = Vec::new();
        if r.degenerate {
            flags.push("degenerate");
        }
        if r.fallback_used {
            flags.push("fallback");
        }
        writeln!(
            w,
            "{:>2} {:>14.8} {:>11} {:>11} {:>11} {:>15.6} {:>12.6}  {}",
            r.n,
            r.energy,
            fmt(r.a),
            fmt(r.b),
            fmt(r.c),
            r.berry_over_2pi,
            r.concurrence,
            flags.join(",")
        )?;
    }
    writeln!(w, "amplitudes (↑↑, ↑↓, ↓↑, ↓↓) at phi:")?;
    for n in 0..4 {
        let v = if n == 0 { crate::StateVector::singlet() } else { spec.triplets[n - 1].state(phi) };
        let amps: Vec<String> = v.0.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
        writeln!(w, "{:>2} {}", n, amps.join("  "))?;
    }
    Ok(())
}

struct SweepOptions {
    preset: Option<String>,
    axis: Option<String>,
    grid: Option<String>,
    lo: Option<f64>,
    hi: Option<f64>,
    count: Option<usize>,
    thetas: Option<Vec<f64>>,
}

fn parse_axis(s: &str) -> Result<RatioAxis, Exit> {
    match s {
        "jx" | "jx/b0" => Ok(RatioAxis::JxOverB0),
        "jz" | "jz/b0" => Ok(RatioAxis::JzOverB0),
        other => Err(Exit::usage(format!("unknown axis '{other}' (expected jx or jz)"))),
    }
}

fn cmd_sweep(settings: &Settings, opts: SweepOptions, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let preset: Preset = settings.get(opts.preset, "preset", "xx".to_string())?.parse()?;
    let default_jx = if preset == Preset::XxzVaryJz { 1e3 } else { 0.0 };
    let mut base = settings.params(default_jx, 0.0, 1.0)?;
    if preset == Preset::XxzVaryJz && settings.pick(settings.common.jx, "jx")?.is_none() {
        base = base.with_j_x(1e3 * base.b0())?;
    }
    let axis = settings.pick(opts.axis, "axis")?.map(|a: String| parse_axis(&a)).transpose()?;
    let mut spec = SweepSpec::preset(preset, base, axis)?;

    let kind: GridKind = match settings.pick(opts.grid, "grid")? {
        Some(g) => g.parse::<GridKind>()?,
        None => spec.grid.kind,
    };
    spec.grid = Grid::new(
        kind,
        settings.get(opts.lo, "lo", spec.grid.lo)?,
        settings.get(opts.hi, "hi", spec.grid.hi)?,
        settings.get(opts.count, "count", spec.grid.count)?,
    )?;
    spec.thetas = match opts.thetas {
        Some(t) => t,
        None => match settings.file.get("thetas") {
            Some(list) => list
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Exit::usage(format!("config: bad theta '{x}'"))))
                .collect::<Result<_, _>>()?,
            None => vec![base.theta()],
        },
    };

    let records = sweep::run_sweep(&spec)?;
    emit_records(settings, &records, settings.format()?.unwrap_or(Format::Csv), stdout)?;
    let degenerate = records.iter().any(|r| r.degenerate);
    Ok(if degenerate && settings.strict()? { EXIT_DEGENERATE } else { EXIT_OK })
}

struct CheckOptions {
    samples: Option<usize>,
    tol_root: Option<f64>,
    tol_eig: Option<f64>,
    tol_berry: Option<f64>,
    tol_conc: Option<f64>,
    tol_residual: Option<f64>,
    tol_sym: Option<f64>,
}

fn cmd_check(settings: &Settings, opts: CheckOptions, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Exit> {
    let samples = settings.get(opts.samples, "samples", 1000)?;
    if samples == 0 {
        return Err(Exit::usage("--samples must be positive"));
    }
    let d = CheckTolerances::default();
    let tolerances = CheckTolerances {
        root: settings.get(opts.tol_root, "tol-root", d.root)?,
        eig: settings.get(opts.tol_eig, "tol-eig", d.eig)?,
        berry: settings.get(opts.tol_berry, "tol-berry", d.berry)?,
        conc: settings.get(opts.tol_conc, "tol-conc", d.conc)?,
        residual: settings.get(opts.tol_residual, "tol-residual", d.residual)?,
        symmetry: settings.get(opts.tol_sym, "tol-sym", d.symmetry)?,
    };
    let config = CheckConfig {
        samples,
        seed: settings.get(settings.common.seed, "seed", 42)?,
        tolerances,
        ..CheckConfig::default()
    };
    run_check(settings, &config, stdout, stderr)
}

fn run_check(settings: &Settings, config: &CheckConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Exit> {
    let summary = check::run(config)?;
    settings.emit(stdout, |w| sweep::write_json(&summary, w))?;
    if summary.passed {
        return Ok(EXIT_OK);
    }
    for v in &summary.violations {
        writeln!(
            stderr,
            "violation: {} level={:?} value={:e} at j_x={} j_z={} b0={} theta={}",
            v.kind, v.level, v.value, v.j_x, v.j_z, v.b0, v.theta
        )
        .map_err(Exit::io)?;
    }
    Ok(EXIT_CHECK_FAILED)
}

/// Runs the check command with a caller-supplied configuration, including
/// its Berry formula. Returns the exit code.
pub fn check_with_config(config: &CheckConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let settings = Settings { common: empty_common(), file: BTreeMap::new() };
    match run_check(&settings, config, stdout, stderr) {
        Ok(code) => code,
        Err(exit) => {
            let _ = writeln!(stderr, "error: {}", exit.message);
            exit.code
        }
    }
}

fn empty_common() -> Common {
    Common { jx: None, jz: None, b0: None, theta: None, phi: None, format: None, out: None, seed: None, strict: false, config: None }
}

#[derive(Debug, Serialize)]
struct EvolveReport {
    level: usize,
    omega: f64,
    steps: usize,
    period: f64,
    fidelity: f64,
    dynamical_phase: f64,
    total_phase: f64,
    geometric_phase: Option<f64>,
    analytic_berry: f64,
    analytic_berry_mod_2pi: f64,
    min_gap: f64,
    norm_correction: f64,
    adiabatic: bool,
}

fn cmd_evolve(
    settings: &Settings,
    omega: Option<f64>,
    steps: Option<usize>,
    level: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Exit> {
    let params = settings.params(1.0, 1.0, 1.0)?;
    let level = settings.get(level, "level", 1)?;
    let omega = settings.get(omega, "omega", AdiabaticSchedule::default_omega(&params))?;
    let sched = match settings.pick(steps, "steps")? {
        Some(s) => AdiabaticSchedule::new(omega, s)?,
        None => AdiabaticSchedule::for_params(&params, omega)?,
    };
    let result = adiabatic::evolve(&params, &sched, level)?;
    let geometric = adiabatic::geometric_phase(&result).ok();
    let analytic = match level {
        0 => 0.0,
        n => crate::observables::berry_phase(spectrum::solve(&params)?.triplet(n)?)?,
    };
    let report = EvolveReport {
        level,
        omega,
        steps: sched.steps(),
        period: sched.period(),
        fidelity: result.fidelity,
        dynamical_phase: result.dynamical_phase,
        total_phase: result.total_phase,
        geometric_phase: geometric,
        analytic_berry: analytic,
        analytic_berry_mod_2pi: wrap_angle(analytic),
        min_gap: result.min_gap,
        norm_correction: result.norm_correction,
        adiabatic: result.is_adiabatic() && !result.gap_warning,
    };

    settings.emit(stdout, |w| match settings.format() {
        Ok(Some(Format::Json)) => sweep::write_json(&report, w),
        _ => {
            writeln!(w, "level            {}", report.level)?;
            writeln!(w, "omega            {}", report.omega)?;
            writeln!(w, "steps            {}", report.steps)?;
            writeln!(w, "fidelity         {:.9}", report.fidelity)?;
            writeln!(w, "dynamical_phase  {:.9}", report.dynamical_phase)?;
            writeln!(w, "total_phase      {:.9}", report.total_phase)?;
            match report.geometric_phase {
                Some(g) => writeln!(w, "geometric_phase  {g:.9}")?,
                None => writeln!(w, "geometric_phase  n/a")?,
            }
            writeln!(w, "analytic_berry   {:.9} (mod 2π: {:.9})", report.analytic_berry, report.analytic_berry_mod_2pi)?;
            writeln!(w, "berry_over_2pi   {:.9}", report.analytic_berry / TAU)
        }
    })?;

    if report.adiabatic {
        return Ok(EXIT_OK);
    }
    let warning = if result.is_adiabatic() {
        format!("omega = {} exceeds 1% of the smallest gap {}", omega, result.min_gap)
    } else {
        Error::AdiabaticityViolation { fidelity: result.fidelity }.to_string()
    };
    writeln!(stderr, "warning: AdiabaticityViolation: {warning}").map_err(Exit::io)?;
    Ok(if settings.strict()? { EXIT_ADIABATICITY } else { EXIT_OK })
}

fn cmd_tables(settings: &Settings, tol: Option<f64>, stdout: &mut dyn Write) -> Result<i32, Exit> {
    let theta = settings.get(settings.common.theta, "theta", FRAC_PI_3)?;
    let tol = settings.get(tol, "tol", tables::DEFAULT_TOL)?;
    let cells = tables::limit_tables(theta, tol)?;
    settings.emit(stdout, |w| match settings.format() {
        Ok(Some(Format::Json)) => sweep::write_json(&cells, w),
        Ok(Some(Format::Csv)) => {
            let mut cw = csv::Writer::from_writer(w);
            for c in &cells {
                cw.serialize(c)?;
            }
            cw.flush()
        }
        _ => {
            writeln!(w, "theta = {theta}, tolerance = {tol}")?;
            writeln!(w, "{:<5} {:<20} {:>2} {:>9} {:>9} {:>9} {:>9}  result", "table", "column", "n", "C", "C_exp", "γ/2π", "γ/2π_exp")?;
            for c in &cells {
                writeln!(
                    w,
                    "{:<5} {:<20} {:>2} {:>9.5} {:>9.5} {:>9.5} {:>9.5}  {}",
                    c.table,
                    c.column,
                    c.n,
                    c.conc,
                    c.expected_conc,
                    c.berry_over_2pi,
                    c.expected_berry_over_2pi,
                    if c.pass { "PASS" } else { "FAIL" }
                )?;
            }
            Ok(())
        }
    })?;
    let failed = cells.iter().any(|c| !c.pass);
    Ok(if failed && settings.strict()? { EXIT_CHECK_FAILED } else { EXIT_OK })
}
