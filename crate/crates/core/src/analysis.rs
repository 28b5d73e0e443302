//! Spectral and geometric analysis of traces: power spectra, total harmonic
//! distortion, phase lag between fundamentals, static transfer functions and
//! operating-space trajectory metrics.
//!
//! All spectral operations assume a rectangular window holding an exact
//! integer number of stimulus cycles (the framing produced by
//! [`crate::transient::steady_state_window`]); harmonics then land exactly
//! on DFT bins and no leakage correction is needed.

use crate::error::{Error, Result};
use crate::model::{solve_resistive, CircuitConfig, EarlyParams};
use crate::transient::Trace;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::io::{self, Write};

/// Relative-power cutoff below which a harmonic is treated as numerical
/// residue and excluded from THD sums.
pub const HARMONIC_POWER_CUTOFF: f64 = 1e-9;

/// One-sided power spectrum. `power[j]` is the linear signal power in the
/// bin at frequency `j * bin_width`; the bins sum to the mean square of the
/// windowed signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_width: f64,
    pub power: Vec<f64>,
}

impl Spectrum {
    /// Bin index of a frequency, validated to lie on the grid.
    pub fn bin_of(&self, f0: f64) -> Result<usize> {
        let exact = f0 / self.bin_width;
        let k = exact.round();
        if !k.is_finite() || k < 1.0 || (exact - k).abs() > 1e-6 * k.max(1.0) {
            return Err(Error::BinMisaligned { f0, cycles: exact });
        }
        Ok(k as usize)
    }

    /// CSV export: `freq_hz,power_db_rel_fundamental` with the fundamental
    /// taken at `f0`.
    pub fn write_csv<W: Write>(&self, w: &mut W, f0: f64) -> io::Result<()> {
        let k0 = self.bin_of(f0).map_err(io::Error::other)?;
        let p_ref = self.power[k0];
        writeln!(w, "freq_hz,power_db_rel_fundamental")?;
        for (j, &p) in self.power.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e}",
                j as f64 * self.bin_width,
                10.0 * (p / p_ref).log10()
            )?;
        }
        Ok(())
    }
}

/// Total harmonic distortion result: `thd = sqrt(sum_{i>=2} V_i^2) / V_1`
/// over RMS harmonic amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ThdResult {
    pub thd: f64,
    pub fundamental_rms: f64,
    /// RMS of each harmonic that cleared the relative-power cutoff,
    /// in ascending harmonic order.
    pub harmonic_rms: Vec<f64>,
    pub n_harmonics_used: usize,
}

impl ThdResult {
    /// CSV export: `thd,n_harmonics,fundamental_rms`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "thd,n_harmonics,fundamental_rms")?;
        writeln!(
            w,
            "{:.16e},{},{:.16e}",
            self.thd, self.n_harmonics_used, self.fundamental_rms
        )
    }
}

/// Phase of signal B's fundamental minus signal A's, wrapped to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLag {
    pub lag: f64,
    pub frequency: f64,
}

/// Shape metrics of a steady-state `(V_C, I)` trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryMetrics {
    /// Maximum perpendicular distance of the trajectory from the resistive
    /// load line `V_C = V_CC - R*I`, normalized by the load-line length.
    pub loop_detachment: f64,
    /// Whether points one cycle apart coincide within 1e-3 of the loop size.
    pub is_closed: bool,
}

/// Discrete one-sided power spectrum of a uniformly sampled signal.
pub fn power_spectrum(x: &[f64], dt: f64) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let n_bins = n / 2 + 1;
    let norm = 1.0 / (n as f64 * n as f64);
    let mut power = Vec::with_capacity(n_bins);
    for (j, c) in buf.iter().take(n_bins).enumerate() {
        let mut p = c.norm_sqr() * norm;
        // One-sided doubling; DC and (for even n) Nyquist appear once.
        if j != 0 && !(n.is_multiple_of(2) && j == n / 2) {
            p *= 2.0;
        }
        power.push(p);
    }
    Ok(Spectrum {
        bin_width: 1.0 / (n as f64 * dt),
        power,
    })
}

/// THD of a whole-cycle window with fundamental `f0`.
///
/// `f0` must land on a DFT bin (integer cycles in the window); the DC bin is
/// excluded and harmonics below [`HARMONIC_POWER_CUTOFF`] relative power do
/// not contribute.
pub fn thd(x: &[f64], dt: f64, f0: f64) -> Result<ThdResult> {
    let spectrum = power_spectrum(x, dt)?;
    let k0 = spectrum.bin_of(f0)?;
    let p1 = spectrum.power[k0];
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let variance = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let relative = if variance > 0.0 { p1 / variance } else { 0.0 };
    if !relative.is_finite() || relative < HARMONIC_POWER_CUTOFF {
        return Err(Error::WeakFundamental {
            relative_power: relative,
        });
    }
    let mut sum = 0.0;
    let mut harmonic_rms = Vec::new();
    let mut harmonic = 2usize;
    while harmonic * k0 < spectrum.power.len() {
        let p = spectrum.power[harmonic * k0];
        if p / p1 > HARMONIC_POWER_CUTOFF {
            sum += p;
            harmonic_rms.push(p.sqrt());
        }
        harmonic += 1;
    }
    Ok(ThdResult {
        thd: (sum / p1).sqrt(),
        fundamental_rms: p1.sqrt(),
        n_harmonics_used: harmonic_rms.len(),
        harmonic_rms,
    })
}

/// Single-bin DFT coefficient at bin `k0`.
fn dft_bin(x: &[f64], k0: usize) -> Complex<f64> {
    let n = x.len() as f64;
    let w = -2.0 * std::f64::consts::PI * k0 as f64 / n;
    let mut acc = Complex::new(0.0, 0.0);
    for (j, &v) in x.iter().enumerate() {
        let ang = w * j as f64;
        acc += Complex::new(v * ang.cos(), v * ang.sin());
    }
    acc
}

/// Phase difference of the fundamentals of two equally framed signals.
pub fn phase_lag(a: &[f64], b: &[f64], dt: f64, f0: f64) -> Result<PhaseLag> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySignal);
    }
    if a.len() != b.len() {
        return Err(Error::parameter(
            "signals",
            format!("length mismatch: {} vs {}", a.len(), b.len()),
        ));
    }
    let n = a.len();
    let exact = f0 * n as f64 * dt;
    let k = exact.round();
    if !k.is_finite() || k < 1.0 || (exact - k).abs() > 1e-6 * k.max(1.0) {
        return Err(Error::BinMisaligned { f0, cycles: exact });
    }
    let k0 = k as usize;

    let mut phases = [0.0f64; 2];
    for (slot, x) in [a, b].into_iter().enumerate() {
        let coeff = dft_bin(x, k0);
        let mean = x.iter().sum::<f64>() / n as f64;
        let variance = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let fund_power = 2.0 * coeff.norm_sqr() / (n as f64 * n as f64);
        let relative = if variance > 0.0 {
            fund_power / variance
        } else {
            0.0
        };
        if relative < HARMONIC_POWER_CUTOFF {
            return Err(Error::WeakFundamental {
                relative_power: relative,
            });
        }
        phases[slot] = coeff.im.atan2(coeff.re);
    }

    let mut lag = phases[1] - phases[0];
    while lag <= -std::f64::consts::PI {
        lag += 2.0 * std::f64::consts::PI;
    }
    while lag > std::f64::consts::PI {
        lag -= 2.0 * std::f64::consts::PI;
    }
    Ok(PhaseLag { lag, frequency: f0 })
}

/// Static transfer function `i_b -> I` of the resistive stage over a grid of
/// base currents. The curvature of this map is the distortion source.
pub fn transfer_function(
    p: &EarlyParams,
    c: &CircuitConfig,
    i_b_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    i_b_grid
        .iter()
        .map(|&ib| solve_resistive(p, c, ib).map(|op| (ib, op.i)))
        .collect()
}

/// Detachment and closure of a steady-state trajectory.
///
/// `samples_per_cycle` identifies the cycle length inside the windowed
/// trace; closure compares the first sample against the sample one cycle
/// before the end (the same stimulus phase).
pub fn trajectory_metrics(
    tr: &Trace,
    c: &CircuitConfig,
    samples_per_cycle: usize,
) -> TrajectoryMetrics {
    let r = c.r_load();
    let vcc = c.vcc();
    let n = tr.len();
    if n == 0 {
        return TrajectoryMetrics {
            loop_detachment: 0.0,
            is_closed: true,
        };
    }

    let (max_dist, line_len) = if r > 0.0 {
        let mut max_dist = 0.0f64;
        let scale = (1.0 + r * r).sqrt();
        for k in 0..n {
            let d = (tr.v_c[k] + r * tr.i[k] - vcc).abs() / scale;
            max_dist = max_dist.max(d);
        }
        (max_dist, (vcc * vcc + (vcc / r) * (vcc / r)).sqrt())
    } else {
        // Vertical load line V_C = V_CC; normalize by the supply.
        let mut max_dist = 0.0f64;
        for k in 0..n {
            max_dist = max_dist.max((tr.v_c[k] - vcc).abs());
        }
        (max_dist, vcc)
    };

    let is_closed = if samples_per_cycle == 0 || n <= samples_per_cycle {
        false
    } else {
        let last = ((n / samples_per_cycle) - 1) * samples_per_cycle;
        // Floor the normalization so a loop degenerated to a point (DC
        // drive) still counts as closed.
        let span = |v: &[f64]| -> f64 {
            let max = v.iter().cloned().fold(f64::MIN, f64::max);
            let min = v.iter().cloned().fold(f64::MAX, f64::min);
            let mag = max.abs().max(min.abs()).max(1e-300);
            (max - min).max(1e-12 * mag)
        };
        let dv = (tr.v_c[last] - tr.v_c[0]) / span(&tr.v_c);
        let di = (tr.i[last] - tr.i[0]) / span(&tr.i);
        dv.hypot(di) <= 1e-3
    };

    TrajectoryMetrics {
        loop_detachment: max_dist / line_len,
        is_closed,
    }
}

/// Largest violation of the load-mesh current balance
/// `I = V_p/R + C * dV_p/dt` over a trace, normalized by the current peak.
///
/// Uses forward differences, matching the explicit update rule; returns 0
/// for traces shorter than two samples.
pub fn kcl_residual(tr: &Trace, c: &CircuitConfig) -> f64 {
    let n = tr.len();
    if n < 2 {
        return 0.0;
    }
    let i_max = tr.i.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if i_max == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for k in 0..n - 1 {
        let dvp = (tr.v_p[k + 1] - tr.v_p[k]) / tr.dt;
        let residual = tr.i[k] - tr.v_p[k] / c.r_load() - c.c_load() * dvp;
        worst = worst.max(residual.abs());
    }
    worst / i_max
}
