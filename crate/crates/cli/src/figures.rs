//! Bundled reproduction recipes: fixed parameter sets exercising each
//! analysis pipeline, emitted as CSV files under `figures/`.

use crate::commands::CliError;
use earlysim::analysis::{phase_lag, power_spectrum, trajectory_metrics};
use earlysim::model::gain_ratio_rho;
use earlysim::sweep::{beta_scan, thd_surface, SweepGrid};
use earlysim::transient::{
    generate_stimulus, simulate_rc, simulate_resistive, steady_state_window, IntegrationScheme,
    SimConfig, Stimulus,
};
use earlysim::{CircuitConfig, EarlyParams, Trace};
use std::io::Write as _;
use std::path::PathBuf;

pub const RECIPES: &[&str] = &[
    "load-lines",
    "transfer",
    "spectra",
    "rc-loops",
    "phase-lag",
    "thd-surface",
    "gain-ratio",
    "beta-scan",
];

const VCC: f64 = 10.0;
const DRIVE: f64 = 60e-6;

/// The strongly fanned transistor (PNP-like parameter range).
fn bent() -> EarlyParams {
    EarlyParams::new(-50.0, 10.0).unwrap()
}

/// Same average gain with a large Early voltage (NPN-like range).
fn mild() -> EarlyParams {
    EarlyParams::new(-200.0, 2.5).unwrap()
}

fn stimulus(frequency: f64) -> Stimulus {
    Stimulus::new(DRIVE, DRIVE, frequency).unwrap()
}

fn sim_config(nt: Option<usize>) -> Result<SimConfig, CliError> {
    Ok(SimConfig::new(
        nt.unwrap_or(200_000),
        6,
        3,
        IntegrationScheme::Euler,
    )?)
}

type Outputs = Vec<(PathBuf, Vec<u8>)>;
type RecipeFiles = Vec<(String, Vec<u8>)>;

pub fn run(recipe: Option<&str>, nt: Option<usize>) -> Result<Outputs, CliError> {
    let selected: Vec<&str> = match recipe {
        Some(name) => {
            if !RECIPES.contains(&name) {
                return Err(CliError::Validation(format!(
                    "unknown recipe {name:?}; available: {}",
                    RECIPES.join(", ")
                )));
            }
            vec![name]
        }
        None => RECIPES.to_vec(),
    };

    let mut outputs = Vec::new();
    for name in selected {
        let files = match name {
            "load-lines" => load_lines(nt)?,
            "transfer" => transfer()?,
            "spectra" => spectra(nt)?,
            "rc-loops" => rc_loops(nt)?,
            "phase-lag" => phase_lags(nt)?,
            "thd-surface" => surface(nt)?,
            "gain-ratio" => gain_ratio()?,
            "beta-scan" => beta_scans()?,
            _ => unreachable!(),
        };
        for (file, bytes) in files {
            outputs.push((PathBuf::from("figures").join(file), bytes));
        }
        println!("figures: {name} done");
    }
    Ok(outputs)
}

fn steady_resistive(
    p: &EarlyParams,
    r: f64,
    frequency: f64,
    nt: Option<usize>,
) -> Result<Trace, CliError> {
    let c = CircuitConfig::new(VCC, r, 0.0)?;
    let st = stimulus(frequency);
    let cfg = sim_config(nt)?;
    let tr = simulate_resistive(p, &c, &st, &cfg)?;
    Ok(steady_state_window(&tr, &st, &cfg)?)
}

fn steady_rc(
    p: &EarlyParams,
    r: f64,
    c_load: f64,
    frequency: f64,
    nt: Option<usize>,
) -> Result<(Trace, usize), CliError> {
    let c = CircuitConfig::new(VCC, r, c_load)?;
    let st = stimulus(frequency);
    let cfg = sim_config(nt)?;
    let tr = simulate_rc(p, &c, &st, &cfg)?;
    Ok((
        steady_state_window(&tr, &st, &cfg)?,
        cfg.samples_per_cycle(),
    ))
}

/// Straight operating-space trajectories for three purely resistive loads.
fn load_lines(nt: Option<usize>) -> Result<RecipeFiles, CliError> {
    let mut out = Vec::new();
    for r in [30.0, 60.0, 150.0] {
        let w = steady_resistive(&bent(), r, 1000.0, nt)?;
        let mut buf = Vec::new();
        w.write_csv(&mut buf)?;
        out.push((format!("load_line_r{r:.0}.csv"), buf));
    }
    Ok(out)
}

/// Static transfer functions of the two same-gain transistors.
fn transfer() -> Result<RecipeFiles, CliError> {
    let c = CircuitConfig::new(VCC, 150.0, 0.0)?;
    let grid: Vec<f64> = (0..=256).map(|k| k as f64 * 2.0 * DRIVE / 256.0).collect();
    let mut out = Vec::new();
    for (p, tag) in [(bent(), "va-50_s10"), (mild(), "va-200_s2p5")] {
        let pts = earlysim::analysis::transfer_function(&p, &c, &grid)?;
        let mut buf = Vec::new();
        writeln!(buf, "i_b,i")?;
        for (ib, i) in pts {
            writeln!(buf, "{ib:.16e},{i:.16e}")?;
        }
        out.push((format!("transfer_{tag}.csv"), buf));
    }
    Ok(out)
}

/// Power spectra of the drive and of both amplified output currents.
fn spectra(nt: Option<usize>) -> Result<RecipeFiles, CliError> {
    let st = stimulus(1000.0);
    let cfg = sim_config(nt)?;
    let mut out = Vec::new();

    let input = generate_stimulus(&st, &cfg);
    let spc = cfg.samples_per_cycle();
    let window = &input[3 * spc..6 * spc];
    let sp = power_spectrum(window, cfg.dt(st.frequency()))?;
    let mut buf = Vec::new();
    sp.write_csv(&mut buf, st.frequency())?;
    out.push(("spectrum_input.csv".to_string(), buf));

    for (p, tag) in [(bent(), "va-50_s10"), (mild(), "va-200_s2p5")] {
        let w = steady_resistive(&p, 150.0, 1000.0, nt)?;
        let sp = power_spectrum(&w.i, w.dt)?;
        let mut buf = Vec::new();
        sp.write_csv(&mut buf, st.frequency())?;
        out.push((format!("spectrum_{tag}.csv"), buf));
    }
    Ok(out)
}

/// Ellipsoidal operating-space loops of the RC-loaded stage, plus their
/// detachment metrics.
fn rc_loops(nt: Option<usize>) -> Result<RecipeFiles, CliError> {
    let c = CircuitConfig::new(VCC, 150.0, 250e-9)?;
    let mut out = Vec::new();
    let mut metrics = Vec::new();
    writeln!(metrics, "f_hz,detachment,closed")?;
    for f in [20.0, 70.0, 300.0, 1000.0] {
        let (w, spc) = steady_rc(&bent(), 150.0, 250e-9, f, nt)?;
        let m = trajectory_metrics(&w, &c, spc);
        writeln!(
            metrics,
            "{f:.16e},{:.16e},{}",
            m.loop_detachment, m.is_closed
        )?;
        let mut buf = Vec::new();
        w.write_csv(&mut buf)?;
        out.push((format!("rc_loop_f{f:.0}.csv"), buf));
    }
    out.push(("rc_loop_metrics.csv".to_string(), metrics));
    Ok(out)
}

/// Phase lag between the inverted collector voltage and the drive, for both
/// transistors across the studied frequencies.
fn phase_lags(nt: Option<usize>) -> Result<RecipeFiles, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "va,s,f_hz,lag_rad")?;
    for p in [bent(), EarlyParams::new(-10.0, 50.0).unwrap()] {
        for f in [20.0, 70.0, 300.0, 1000.0] {
            let (w, _) = steady_rc(&p, 150.0, 250e-9, f, nt)?;
            let inverted: Vec<f64> = w.v_c.iter().map(|v| -v).collect();
            let lag = phase_lag(&inverted, &w.i_b, w.dt, f)?;
            writeln!(
                buf,
                "{:.16e},{:.16e},{f:.16e},{:.16e}",
                p.va(),
                p.s(),
                lag.lag
            )?;
        }
    }
    Ok(vec![("phase_lag.csv".to_string(), buf)])
}

/// THD of the output current over the (V_a, s) rectangle.
fn surface(nt: Option<usize>) -> Result<RecipeFiles, CliError> {
    let grid = SweepGrid::new(-200.0, -10.0, 0.5, 10.0, 20, 20)?;
    let c = CircuitConfig::new(VCC, 150.0, 0.0)?;
    let surf = thd_surface(&grid, &c, &stimulus(1000.0), &sim_config(nt)?)?;
    let mut buf = Vec::new();
    surf.write_csv(&mut buf)?;
    Ok(vec![("thd_surface.csv".to_string(), buf)])
}

/// The supply-scaling gain ratio across a range of supplies.
fn gain_ratio() -> Result<RecipeFiles, CliError> {
    let p = mild();
    let mut buf = Vec::new();
    writeln!(buf, "vcc,xi,rho")?;
    for k in 1..=10 {
        let vcc = 5.0 * k as f64;
        let rho = gain_ratio_rho(&p, vcc, 1.1)?;
        writeln!(buf, "{vcc:.16e},1.1000000000000001e0,{rho:.16e}")?;
    }
    Ok(vec![("gain_ratio.csv".to_string(), buf)])
}

/// Current-gain scans over the low-drive interval for three loads.
fn beta_scans() -> Result<RecipeFiles, CliError> {
    let p = mild();
    let grid: Vec<f64> = (1..=100).map(|k| k as f64 * 15e-6 / 100.0).collect();
    let mut out = Vec::new();
    for r in [50.0, 500.0, 5000.0] {
        let c = CircuitConfig::new(VCC, r, 0.0)?;
        let scan = beta_scan(&p, &c, &grid)?;
        let mut buf = Vec::new();
        scan.write_csv(&mut buf)?;
        out.push((format!("beta_scan_r{r:.0}.csv"), buf));
    }
    Ok(out)
}
