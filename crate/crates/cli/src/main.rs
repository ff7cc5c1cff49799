//! Command-line runner: marches the lattice solver or its references,
//! runs refinement studies, tabulates dispersion spectra, and reproduces
//! the propagation demonstration, writing CSV to a file or to standard
//! output.
//!
//! Exit codes: 0 on success, 1 for invalid parameters or usage (the
//! message names the violated constraint), 2 for I/O failures.

use std::collections::HashMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use lbdiff_core::dispersion::sweep;
use lbdiff_core::harness::{
    convergence_plot_script, dispersion_plot_script, emit_text, exact_profile, haway_profile,
    lbm_profile, profile_plot_script, propagation_demo, run_experiment, CsvDocument,
    ExperimentSpec, ReferenceSet,
};
use lbdiff_core::params::SchemeParams;
use lbdiff_core::reference::ProfileKind;
use lbdiff_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lbdiff",
    version,
    about = "Lattice Boltzmann diffusion runs, acoustic references, and convergence studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March the lattice solver and write the final density profile.
    Lbm(PhysicsArgs),
    /// March the staggered acoustic solver and write its final profile.
    Haway(PhysicsArgs),
    /// Sample the diffusion solution on the grid and write it as a profile.
    Exact(PhysicsArgs),
    /// Run a refinement study and write the convergence table.
    Converge(ConvergeArgs),
    /// Tabulate the per-wavenumber spectrum of the scheme.
    Dispersion(DispersionArgs),
    /// Reproduce the propagation demonstration at a chosen diffusivity.
    Demo(DemoArgs),
}

#[derive(Args, Clone)]
struct PhysicsArgs {
    /// Cells in the periodic grid [default: 64]
    #[arg(long)]
    n: Option<usize>,
    /// Diffusivity of the target heat equation [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Equilibrium energy coefficient, stable in (-4, 2) [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Lattice speed dx/dt [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Energy relaxation rate, stable in (0, 2) [default: 1.5]
    #[arg(long, allow_negative_numbers = true)]
    se: Option<f64>,
    /// Final time; must be an integer number of steps [default: 5]
    #[arg(long, allow_negative_numbers = true)]
    tfinal: Option<f64>,
    /// Initial condition: sine or gaussian [default: sine]
    #[arg(long)]
    ic: Option<String>,
    /// Domain bounds as "x_min,x_max" [default: -1,1]
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Output path; "-" or omitted writes to standard output
    #[arg(long)]
    out: Option<String>,
    /// Also write a gnuplot script for the CSV (requires a file --out)
    #[arg(long)]
    plot_script: Option<PathBuf>,
    /// Line-oriented key=value file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Comma-separated cell counts, strictly increasing [default: 8,16,32,64]
    #[arg(long)]
    levels: Option<String>,
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Number of wavenumber samples across [0, pi] [default: 256]
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct DemoArgs {
    /// Diffusivity, the demonstration's only free parameter [default: 0.15]
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Output path; "-" or omitted writes to standard output
    #[arg(long)]
    out: Option<String>,
    /// Also write a gnuplot script for the CSV (requires a file --out)
    #[arg(long)]
    plot_script: Option<PathBuf>,
    /// Line-oriented key=value file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 11] = [
    "n", "mu", "alpha", "lambda", "se", "tfinal", "ic", "domain", "out", "levels", "points",
];

/// Values from a `key=value` config file; flags take precedence over it.
#[derive(Debug)]
struct ConfigMap(HashMap<String, String>);

impl ConfigMap {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        let Some(path) = path else {
            return Ok(ConfigMap(map));
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "config line {} is not key=value: {line:?}",
                    idx + 1
                )));
            };
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::invalid(format!("unknown config key: {key:?}")));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigMap(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::invalid(format!("config value for {key} is invalid: {e}"))),
        }
    }
}

fn resolve<T: FromStr>(flag: Option<T>, cfg: &ConfigMap, key: &str, default: T) -> Result<T>
where
    T::Err: Display,
{
    Ok(flag.or(cfg.get(key)?).unwrap_or(default))
}

fn parse_ic(raw: &str) -> Result<ProfileKind> {
    match raw {
        "sine" => Ok(ProfileKind::Sine),
        "gaussian" => Ok(ProfileKind::Gaussian),
        other => Err(Error::invalid(format!(
            "ic must be sine or gaussian: got {other:?}"
        ))),
    }
}

fn parse_domain(raw: &str) -> Result<(f64, f64)> {
    let invalid = || Error::invalid(format!("domain must be \"x_min,x_max\": got {raw:?}"));
    let (a, b) = raw.split_once(',').ok_or_else(invalid)?;
    let x_min: f64 = a.trim().parse().map_err(|_| invalid())?;
    let x_max: f64 = b.trim().parse().map_err(|_| invalid())?;
    Ok((x_min, x_max))
}

fn parse_levels(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|part| {
            part.trim().parse().map_err(|_| {
                Error::invalid(format!(
                    "levels must be comma-separated cell counts: got {raw:?}"
                ))
            })
        })
        .collect()
}

/// Fully resolved run parameters: flag, then config file, then default.
struct Physics {
    n: usize,
    mu: f64,
    alpha: f64,
    lambda: f64,
    se: f64,
    tfinal: f64,
    ic: ProfileKind,
    x_min: f64,
    x_max: f64,
    out: String,
    plot_script: Option<PathBuf>,
    cfg: ConfigMap,
}

impl Physics {
    fn resolve(args: PhysicsArgs) -> Result<Self> {
        let cfg = ConfigMap::load(args.config.as_deref())?;
        let ic = parse_ic(&resolve(args.ic, &cfg, "ic", "sine".into())?)?;
        let (x_min, x_max) = parse_domain(&resolve(args.domain, &cfg, "domain", "-1,1".into())?)?;
        Ok(Physics {
            n: resolve(args.n, &cfg, "n", 64)?,
            mu: resolve(args.mu, &cfg, "mu", 0.01)?,
            alpha: resolve(args.alpha, &cfg, "alpha", 1.0)?,
            lambda: resolve(args.lambda, &cfg, "lambda", 1.0)?,
            se: resolve(args.se, &cfg, "se", 1.5)?,
            tfinal: resolve(args.tfinal, &cfg, "tfinal", 5.0)?,
            ic,
            x_min,
            x_max,
            out: resolve(args.out, &cfg, "out", "-".into())?,
            plot_script: args.plot_script,
            cfg,
        })
    }

    fn spec(&self, levels: Vec<usize>) -> Result<ExperimentSpec> {
        ExperimentSpec::new(
            self.ic,
            self.x_min,
            self.x_max,
            self.mu,
            self.alpha,
            self.lambda,
            self.se,
            self.tfinal,
            levels,
            ReferenceSet::both(),
        )
    }
}

fn write_output(csv: &str, out: &str) -> Result<()> {
    if out == "-" {
        std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Error::io(PathBuf::from("-"), e))
    } else {
        emit_text(csv, Path::new(out))
    }
}

fn write_plot_script(
    script_path: Option<&Path>,
    out: &str,
    script_for: impl Fn(&str) -> String,
) -> Result<()> {
    let Some(path) = script_path else {
        return Ok(());
    };
    if out == "-" {
        return Err(Error::invalid(
            "--plot-script needs a file --out for the script to reference",
        ));
    }
    emit_text(&script_for(out), path)
}

fn run_profile(
    which: fn(&ExperimentSpec, usize) -> Result<lbdiff_core::harness::Profile>,
    args: PhysicsArgs,
) -> Result<()> {
    let p = Physics::resolve(args)?;
    let profile = which(&p.spec(vec![p.n])?, p.n)?;
    write_output(&profile.to_csv(), &p.out)?;
    write_plot_script(p.plot_script.as_deref(), &p.out, profile_plot_script)
}

fn run_converge(args: ConvergeArgs) -> Result<()> {
    let p = Physics::resolve(args.physics)?;
    let levels = parse_levels(&resolve(
        args.levels,
        &p.cfg,
        "levels",
        "8,16,32,64".into(),
    )?)?;
    let table = run_experiment(&p.spec(levels)?);
    for (n, reason) in &table.skipped {
        eprintln!("level {n} skipped: {reason}");
    }
    if table.rows.is_empty() {
        let reason = table
            .skipped
            .first()
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| "no levels requested".into());
        return Err(Error::invalid(format!("every level was skipped: {reason}")));
    }
    write_output(&table.to_csv(), &p.out)?;
    write_plot_script(p.plot_script.as_deref(), &p.out, convergence_plot_script)
}

fn run_dispersion(args: DispersionArgs) -> Result<()> {
    let p = Physics::resolve(args.physics)?;
    let points = resolve(args.points, &p.cfg, "points", 256)?;
    if points < 2 {
        return Err(Error::invalid(format!(
            "points must be at least 2 to span [0, pi]: got {points}"
        )));
    }
    let dx = (p.x_max - p.x_min) / p.n as f64;
    let params = SchemeParams::from_diffusivity(p.lambda, dx, p.alpha, p.mu, p.se)?;
    let xis: Vec<f64> = (0..points)
        .map(|i| std::f64::consts::PI * i as f64 / (points - 1) as f64)
        .collect();
    let results = sweep(&params, &xis)?;
    write_output(&results.to_csv(), &p.out)?;
    write_plot_script(p.plot_script.as_deref(), &p.out, dispersion_plot_script)
}

fn run_demo(args: DemoArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let mu = resolve(args.mu, &cfg, "mu", 0.15)?;
    let out = resolve(args.out, &cfg, "out", "-".into())?;
    let (profile, peaks) = propagation_demo(mu)?;
    let described: Vec<String> = peaks
        .peaks
        .iter()
        .map(|peak| format!("rho({:.6}) = {:.6}", peak.x, peak.value))
        .collect();
    eprintln!(
        "peaks: {}; center value {:.6} ({:.1}% of max {:.6})",
        described.join(", "),
        peaks.center_value,
        100.0 * peaks.center_value / peaks.max_value,
        peaks.max_value,
    );
    write_output(&profile.to_csv(), &out)?;
    write_plot_script(args.plot_script.as_deref(), &out, profile_plot_script)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Lbm(args) => run_profile(lbm_profile, args),
        Command::Haway(args) => run_profile(haway_profile, args),
        Command::Exact(args) => run_profile(exact_profile, args),
        Command::Converge(args) => run_converge(args),
        Command::Dispersion(args) => run_dispersion(args),
        Command::Demo(args) => run_demo(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Io { .. }) { 2 } else { 1 })
        }
    }
}
