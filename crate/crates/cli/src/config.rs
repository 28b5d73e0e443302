//! Sectioned key-value run configuration.
//!
//! A run is described by a flat TOML document with `[early]`, `[circuit]`,
//! `[stimulus]` and `[sim]` sections (plus optional `[sweep]` and `[scan]`
//! sections for the respective subcommands). All quantities are SI base
//! units — amperes, volts, farads, hertz — with no suffix parsing. Unknown
//! keys are hard errors.

use crate::commands::CliError;
use earlysim::sweep::SweepGrid;
use earlysim::{CircuitConfig, EarlyParams, InputPort, IntegrationScheme, SimConfig, Stimulus};
use serde::{Deserialize, Serialize};

/// Built-in configuration: the reference stage (V_a = -50 V, s = 10 1/A,
/// V_CC = 10 V, R = 150 ohm) driven by a 1 kHz, 60 uA biased sinusoid.
pub const DEFAULT_CONFIG: &str = "\
[early]
va = -50.0
s = 10.0

[circuit]
vcc = 10.0
r = 150.0
c = 0.0

[stimulus]
offset = 60e-6
amplitude = 60e-6
f = 1000.0

[sim]
nt = 200000
n_cycles = 6
discard_cycles = 3
scheme = \"euler\"
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub early: EarlySection,
    pub circuit: CircuitSection,
    pub stimulus: StimulusSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlySection {
    pub va: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub vcc: f64,
    pub r: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusSection {
    pub offset: f64,
    pub amplitude: f64,
    pub f: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub nt: usize,
    pub n_cycles: usize,
    pub discard_cycles: usize,
    pub scheme: String,
    pub start_at_dc: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            nt: 200_000,
            n_cycles: 6,
            discard_cycles: 3,
            scheme: "euler".to_string(),
            start_at_dc: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub va_min: f64,
    pub va_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub n_va: usize,
    pub n_s: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        // Open rectangle excluding the degenerate s = 0 and V_a = 0 edges:
        // the first sampled point sits one grid step inside.
        Self {
            va_min: -200.0,
            va_max: -10.0,
            s_min: 0.5,
            s_max: 10.0,
            n_va: 20,
            n_s: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub ib_max: f64,
    pub n_points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            ib_max: 15e-6,
            n_points: 100,
        }
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub early: EarlyParams,
    pub circuit: CircuitConfig,
    pub stimulus: Stimulus,
    pub sim: SimConfig,
    pub sweep: SweepGrid,
    pub scan: ScanSettings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub ib_max: f64,
    pub n_points: usize,
}

/// Parse the raw document. Syntax and unknown-key errors carry the TOML
/// line/column diagnostics.
pub fn parse_config_file(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
}

/// Validate a parsed document into domain types. Invariant violations name
/// the violated invariant.
pub fn build_run_config(file: &ConfigFile) -> Result<RunConfig, CliError> {
    let early = EarlyParams::new(file.early.va, file.early.s)?;
    let mut circuit = CircuitConfig::new(file.circuit.vcc, file.circuit.r, file.circuit.c)?;
    match (file.circuit.r_b, file.circuit.r_i, file.circuit.v_r) {
        (None, None, None) => {}
        (Some(r_b), Some(r_i), Some(v_r)) => {
            circuit = circuit.with_input_port(InputPort::new(r_b, r_i, v_r)?);
        }
        _ => {
            return Err(CliError::Validation(
                "config: r_b, r_i and v_r must be given together".into(),
            ));
        }
    }
    let stimulus = Stimulus::new(
        file.stimulus.offset,
        file.stimulus.amplitude,
        file.stimulus.f,
    )?
    .with_phase(file.stimulus.phase);
    let scheme: IntegrationScheme = file.sim.scheme.parse()?;
    let sim = SimConfig::new(
        file.sim.nt,
        file.sim.n_cycles,
        file.sim.discard_cycles,
        scheme,
    )?
    .with_start_at_dc(file.sim.start_at_dc);
    let sw = file.sweep.clone().unwrap_or_default();
    let sweep = SweepGrid::new(sw.va_min, sw.va_max, sw.s_min, sw.s_max, sw.n_va, sw.n_s)?;
    let sc = file.scan.clone().unwrap_or_default();
    if !(sc.ib_max.is_finite() && sc.ib_max > 0.0) {
        return Err(CliError::Validation(
            "config: scan.ib_max must be positive".into(),
        ));
    }
    if sc.n_points < 2 {
        return Err(CliError::Validation(
            "config: scan.n_points must be at least 2".into(),
        ));
    }
    Ok(RunConfig {
        early,
        circuit,
        stimulus,
        sim,
        sweep,
        scan: ScanSettings {
            ib_max: sc.ib_max,
            n_points: sc.n_points,
        },
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    build_run_config(&parse_config_file(text)?)
}

/// Render a document back to TOML. `parse_config(serialize_config(f))`
/// yields the same run configuration.
pub fn serialize_config(file: &ConfigFile) -> String {
    toml::to_string_pretty(file).expect("config sections serialize")
}
