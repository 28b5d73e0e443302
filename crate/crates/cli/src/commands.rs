//! Subcommand dispatch, output-file handling and the exit-code contract.
//!
//! Exit codes: 0 on success; 1 on configuration, validation or I/O
//! failures; 2 on numerical failures (tan-domain violations, integrator
//! instability, spectral preconditions). Output files are written only
//! after a command's computation has fully succeeded, and any files already
//! written by a failing command are removed.

use crate::config::{parse_config, RunConfig, DEFAULT_CONFIG};
use crate::figures;
use clap::{Parser, Subcommand, ValueEnum};
use earlysim::analysis::{power_spectrum, thd};
use earlysim::sweep::{beta_scan, thd_surface, SweepGrid};
use earlysim::transient::{simulate_rc, simulate_resistive, steady_state_window};
use earlysim::{Error as CoreError, Trace};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parameter { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "earlysim",
    version,
    about = "Common-emitter amplifier simulation and distortion analysis"
)]
pub struct Cli {
    /// TOML configuration file (defaults to the built-in reference setup)
    #[arg(long, global = true, env = "EARLYSIM_CONFIG")]
    pub config: Option<PathBuf>,

    /// Directory for output CSV files
    #[arg(long, global = true, default_value = ".", env = "EARLYSIM_OUT")]
    pub out: PathBuf,

    /// Override the configured sample count
    #[arg(long, global = true, env = "EARLYSIM_NT")]
    pub nt: Option<usize>,

    /// Override the configured integration scheme (euler | trapezoidal)
    #[arg(long, global = true, env = "EARLYSIM_SCHEME")]
    pub scheme: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignalKind {
    /// Collector current
    I,
    /// Base current
    Ib,
    /// Collector voltage
    Vc,
    /// Load voltage
    Vp,
}

impl SignalKind {
    fn select(self, tr: &Trace) -> &[f64] {
        match self {
            SignalKind::I => &tr.i,
            SignalKind::Ib => &tr.i_b,
            SignalKind::Vc => &tr.v_c,
            SignalKind::Vp => &tr.v_p,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the resistive operating point for a base current
    OpPoint {
        /// Base current in amperes (defaults to the stimulus offset)
        #[arg(long)]
        ib: Option<f64>,
    },
    /// Simulate and write the sampled trace to trace.csv
    Transient {
        /// Export only the steady-state window
        #[arg(long)]
        steady: bool,
    },
    /// THD of a steady-state signal, written to thd.csv
    Thd {
        #[arg(long, value_enum, default_value_t = SignalKind::I)]
        signal: SignalKind,
    },
    /// Power spectrum of a steady-state signal, written to spectrum.csv
    Spectrum {
        #[arg(long, value_enum, default_value_t = SignalKind::I)]
        signal: SignalKind,
    },
    /// THD surface over the (V_a, s) rectangle, written to surface.csv
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        va_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        va_max: Option<f64>,
        #[arg(long)]
        s_min: Option<f64>,
        #[arg(long)]
        s_max: Option<f64>,
        #[arg(long)]
        n_va: Option<usize>,
        #[arg(long)]
        n_s: Option<usize>,
    },
    /// Current-gain scan along the load line, written to beta_scan.csv
    BetaScan {
        /// Upper end of the scanned base-current interval (0, ib_max]
        #[arg(long)]
        ib_max: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
    },
    /// Bundled reproduction recipes (all of them if no name is given)
    Figures {
        /// One of: load-lines, transfer, spectra, rc-loops, phase-lag,
        /// thd-surface, gain-ratio, beta-scan
        recipe: Option<String>,
    },
}

/// Load the configuration, apply overrides and dispatch the subcommand.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(nt) = cli.nt {
        cfg.sim = cfg.sim.with_n_steps(nt)?;
    }
    if let Some(scheme) = &cli.scheme {
        cfg.sim = cfg.sim.with_scheme(scheme.parse()?);
    }

    let outputs = dispatch(&cli.command, &cfg, cli.nt)?;
    write_outputs(&cli.out, outputs)
}

type Outputs = Vec<(PathBuf, Vec<u8>)>;

fn dispatch(
    command: &Command,
    cfg: &RunConfig,
    nt_override: Option<usize>,
) -> Result<Outputs, CliError> {
    match command {
        Command::OpPoint { ib } => op_point(cfg, ib.unwrap_or_else(|| cfg.stimulus.offset())),
        Command::Transient { steady } => transient(cfg, *steady),
        Command::Thd { signal } => run_thd(cfg, *signal),
        Command::Spectrum { signal } => run_spectrum(cfg, *signal),
        Command::Sweep {
            va_min,
            va_max,
            s_min,
            s_max,
            n_va,
            n_s,
        } => {
            let base = cfg.sweep;
            let grid = SweepGrid::new(
                va_min.unwrap_or_else(|| base.va_values()[0]),
                va_max.unwrap_or_else(|| *base.va_values().last().unwrap()),
                s_min.unwrap_or_else(|| base.s_values()[0]),
                s_max.unwrap_or_else(|| *base.s_values().last().unwrap()),
                n_va.unwrap_or_else(|| base.n_va()),
                n_s.unwrap_or_else(|| base.n_s()),
            )?;
            sweep(cfg, &grid)
        }
        Command::BetaScan { ib_max, n_points } => {
            let ib_max = ib_max.unwrap_or(cfg.scan.ib_max);
            let n_points = n_points.unwrap_or(cfg.scan.n_points);
            run_beta_scan(cfg, ib_max, n_points)
        }
        Command::Figures { recipe } => figures::run(recipe.as_deref(), nt_override),
    }
}

fn simulate(cfg: &RunConfig) -> Result<Trace, CliError> {
    let tr = if cfg.circuit.is_resistive() {
        simulate_resistive(&cfg.early, &cfg.circuit, &cfg.stimulus, &cfg.sim)?
    } else {
        simulate_rc(&cfg.early, &cfg.circuit, &cfg.stimulus, &cfg.sim)?
    };
    Ok(tr)
}

fn steady(cfg: &RunConfig) -> Result<Trace, CliError> {
    let tr = simulate(cfg)?;
    Ok(steady_state_window(&tr, &cfg.stimulus, &cfg.sim)?)
}

fn op_point(cfg: &RunConfig, ib: f64) -> Result<Outputs, CliError> {
    let c = if cfg.circuit.is_resistive() {
        cfg.circuit
    } else {
        // The DC operating point of the RC stage coincides with the
        // resistive one (the capacitor carries no steady current).
        earlysim::CircuitConfig::new(cfg.circuit.vcc(), cfg.circuit.r_load(), 0.0)?
    };
    let op = earlysim::model::solve_resistive(&cfg.early, &c, ib)?;
    println!("i_b,i,v_c,v_p");
    println!(
        "{:.16e},{:.16e},{:.16e},{:.16e}",
        op.i_b, op.i, op.v_c, op.v_p
    );
    Ok(Vec::new())
}

fn transient(cfg: &RunConfig, steady_only: bool) -> Result<Outputs, CliError> {
    let tr = if steady_only {
        steady(cfg)?
    } else {
        simulate(cfg)?
    };
    let mut buf = Vec::new();
    tr.write_csv(&mut buf)?;
    println!("trace.csv: {} samples, dt = {:.6e} s", tr.len(), tr.dt);
    Ok(vec![(PathBuf::from("trace.csv"), buf)])
}

fn run_thd(cfg: &RunConfig, signal: SignalKind) -> Result<Outputs, CliError> {
    let w = steady(cfg)?;
    let result = thd(signal.select(&w), w.dt, cfg.stimulus.frequency())?;
    let mut buf = Vec::new();
    result.write_csv(&mut buf)?;
    println!(
        "thd = {:.9e} ({} harmonics above cutoff)",
        result.thd, result.n_harmonics_used
    );
    Ok(vec![(PathBuf::from("thd.csv"), buf)])
}

fn run_spectrum(cfg: &RunConfig, signal: SignalKind) -> Result<Outputs, CliError> {
    let w = steady(cfg)?;
    let sp = power_spectrum(signal.select(&w), w.dt)?;
    // Validate fundamental alignment before serializing.
    sp.bin_of(cfg.stimulus.frequency())?;
    let mut buf = Vec::new();
    sp.write_csv(&mut buf, cfg.stimulus.frequency())?;
    println!(
        "spectrum.csv: {} bins, bin width {:.6e} Hz",
        sp.power.len(),
        sp.bin_width
    );
    Ok(vec![(PathBuf::from("spectrum.csv"), buf)])
}

fn sweep(cfg: &RunConfig, grid: &SweepGrid) -> Result<Outputs, CliError> {
    let surf = thd_surface(grid, &cfg.circuit, &cfg.stimulus, &cfg.sim)?;
    for f in &surf.failures {
        eprintln!(
            "sweep: cell (va index {}, s index {}) skipped: {}",
            f.i_va, f.i_s, f.message
        );
    }
    let mut buf = Vec::new();
    surf.write_csv(&mut buf)?;
    println!(
        "surface.csv: {} x {} cells, {} skipped",
        grid.n_va(),
        grid.n_s(),
        surf.failures.len()
    );
    Ok(vec![(PathBuf::from("surface.csv"), buf)])
}

fn run_beta_scan(cfg: &RunConfig, ib_max: f64, n_points: usize) -> Result<Outputs, CliError> {
    if !(ib_max.is_finite() && ib_max > 0.0) {
        return Err(CliError::Validation("ib_max must be positive".into()));
    }
    if n_points < 2 {
        return Err(CliError::Validation("n_points must be at least 2".into()));
    }
    let grid: Vec<f64> = (1..=n_points)
        .map(|k| k as f64 * ib_max / n_points as f64)
        .collect();
    let scan = beta_scan(&cfg.early, &cfg.circuit, &grid)?;
    let mut buf = Vec::new();
    scan.write_csv(&mut buf)?;
    println!(
        "beta_scan.csv: {} points, fit slope {:.6e}, R^2 {:.6}",
        scan.points.len(),
        scan.fit.slope,
        scan.fit.r_squared
    );
    Ok(vec![(PathBuf::from("beta_scan.csv"), buf)])
}

/// Write every output under the target directory; if any write fails,
/// remove the files this command already created.
fn write_outputs(out_dir: &Path, outputs: Outputs) -> Result<(), CliError> {
    let mut written: Vec<PathBuf> = Vec::new();
    for (rel, bytes) in &outputs {
        let path = out_dir.join(rel);
        let attempt = (|| -> std::io::Result<()> {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let mut file = fs::File::create(&path)?;
            file.write_all(bytes)?;
            Ok(())
        })();
        match attempt {
            Ok(()) => written.push(path),
            Err(e) => {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
                return Err(CliError::Validation(format!(
                    "writing {}: {e}",
                    path.display()
                )));
            }
        }
    }
    Ok(())
}
