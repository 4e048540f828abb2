//! `cloak`: validate, solve and sweep cloaking scenarios from JSON configs.
//!
//! Exit status: 0 when every check passes, 1 when a check or a run fails,
//! 2 for usage errors and unreadable or malformed configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cloak_core::{
    aperture_scan, convergence_sweep, mie_farfield, run_scenario, run_selftest, validate_scenario, write_farfield_csv, write_run, DiskKind, HarnessError,
    ScenarioConfig,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cloak", version, about = "Approximate acoustic cloaks: scenario validation, solves, ε sweeps and aperture scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility, lossy-layer conditions and grid plan, without solving.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// ε values for the layer conditions (default ε, ε/2, ε/4).
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// One run: far field per incident direction, report and optional field dumps.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Incident angles in degrees, replacing the config's.
        #[arg(long, value_delimiter = ',')]
        angles: Vec<f64>,
    },
    /// ε-convergence sweep with a log-log rate fit.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        angles: Vec<f64>,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Far-field norms for incidence tilted off the cloak axis.
    Aperture {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Tilt angles in degrees.
        #[arg(long, value_delimiter = ',', default_value = "0,5,10,20")]
        angles: Vec<f64>,
        /// Observation apertures τ in degrees around the axis.
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,45,90")]
        taus: Vec<f64>,
    },
    /// Analytic far field of a centred disk.
    Mie {
        #[arg(long, value_enum, default_value_t = Boundary::Hard)]
        kind: Boundary,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Wavelength; k = 2π/wavelength.
        #[arg(long, default_value_t = 2.0)]
        wavelength: f64,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        angles: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        dirs: usize,
        /// Directory for farfield.csv; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-consistency checks that need no PDE solve.
    Selftest,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; only the JSON report on stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Points per wavelength, replacing the config's.
    #[arg(long)]
    resolution: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Hard,
    Soft,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Json(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

fn load(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| Failure::Usage(format!("{}: {e}", args.config.display())))?;
    let mut cfg = ScenarioConfig::from_json(&text)?;
    if let Some(ppw) = args.resolution {
        cfg.grid.ppw = ppw;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, file: &str) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))? + "\n";
    if let Some(dir) = out {
        fs::create_dir_all(dir).and_then(|_| fs::write(dir.join(file), &text)).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
    }
    print!("{text}");
    Ok(())
}

fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cmd: Command) -> Result<ExitCode, Failure> {
    match cmd {
        Command::Validate { scenario, eps } => {
            let cfg = load(&scenario)?;
            let rep = validate_scenario(&cfg, &eps)?;
            emit(&rep, scenario.out.as_deref(), "validation.json")?;
            Ok(verdict(rep.pass))
        }
        Command::Solve { scenario, angles } => {
            let mut cfg = load(&scenario)?;
            if !angles.is_empty() {
                cfg.wave.incident_deg = angles;
            }
            let out = run_scenario(&cfg)?;
            if let Some(dir) = &scenario.out {
                write_run(dir, &cfg, &out)?;
            }
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
            emit(&out.summary, None, "")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { scenario, eps, angles, parallel } => {
            let mut cfg = load(&scenario)?;
            if !angles.is_empty() {
                cfg.wave.incident_deg = angles;
            }
            if parallel == 0 {
                return Err(Failure::Usage("--parallel must be at least 1".into()));
            }
            let rep = convergence_sweep(&cfg, &eps, parallel)?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(f) = &rep.fit {
                eprintln!("slope {:.3} (95% band [{:.3}, {:.3}]) over {} points", f.slope, f.band[0], f.band[1], f.points);
            }
            emit(&rep, scenario.out.as_deref(), "report.json")?;
            Ok(verdict(rep.fit.is_some()))
        }
        Command::Aperture { scenario, angles, taus } => {
            let cfg = load(&scenario)?;
            let rep = aperture_scan(&cfg, &angles, &taus)?;
            for r in &rep.rows {
                eprintln!("tilt {:>6.2}°  sup {:>8.2} dB", r.tilt_deg, r.sup_norm_db);
            }
            emit(&rep, scenario.out.as_deref(), "report.json")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mie { kind, radius, wavelength, angles, dirs, out } => {
            if !(wavelength > 0.0) {
                return Err(Failure::Usage("--wavelength must be positive".into()));
            }
            let k = 2.0 * std::f64::consts::PI / wavelength;
            let kind = match kind {
                Boundary::Hard => DiskKind::Hard,
                Boundary::Soft => DiskKind::Soft,
            };
            let patterns = angles
                .iter()
                .map(|a| mie_farfield(kind, radius, k, [a.to_radians().cos(), a.to_radians().sin()], dirs))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| Failure::Run(e.to_string()))?;
                    let f = fs::File::create(dir.join("farfield.csv")).map_err(|e| Failure::Run(e.to_string()))?;
                    write_farfield_csv(&patterns, std::io::BufWriter::new(f))?;
                }
                None => write_farfield_csv(&patterns, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let rep = run_selftest();
            for c in &rep.checks {
                eprintln!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            emit(&rep, None, "")?;
            Ok(verdict(rep.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
