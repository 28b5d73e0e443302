//! Time-domain simulation of the stage: stimulus generation, exact sampling
//! of the resistive case, and forward time-stepping of the RC load.
//!
//! The RC stage is advanced by the update loop
//!
//! ```text
//! V_p <- 0
//! for each sample k:
//!     I[k]   = (V_CC - V_a - V_p) * tan(s * i_b[k])
//!     V_C[k] = V_CC - V_p
//!     I_c    = I[k] - V_p / R
//!     V_p    <- V_p + (I_c / C) * dt
//! ```
//!
//! which is forward Euler in `V_p`. An A-stable trapezoidal variant that
//! averages consecutive capacitor-current estimates is available for
//! convergence studies and for stiff configurations (very small `C`, where
//! the explicit update is unconditionally divergent at practical step
//! sizes). Note the tan form of the current: `i_b = 0` samples are valid and
//! the literal division by `R_o` is never computed.

use crate::error::{Error, Result};
use crate::model::{CircuitConfig, EarlyParams};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

/// Time-stepping scheme for [`simulate_rc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationScheme {
    /// The explicit update loop as written (first order).
    #[default]
    Euler,
    /// Implicit trapezoidal average of consecutive capacitor currents
    /// (second order, A-stable).
    Trapezoidal,
}

impl FromStr for IntegrationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Self::Euler),
            "trapezoidal" => Ok(Self::Trapezoidal),
            other => Err(Error::parameter(
                "scheme",
                format!("unknown scheme {other:?}; expected euler or trapezoidal"),
            )),
        }
    }
}

impl fmt::Display for IntegrationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euler => "euler",
            Self::Trapezoidal => "trapezoidal",
        })
    }
}

/// Sinusoidal base-current drive `i_b(t) = offset + amplitude*sin(2*pi*f*t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stimulus {
    offset: f64,
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

impl Stimulus {
    pub fn new(offset: f64, amplitude: f64, frequency: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::parameter("amplitude", "must be >= 0"));
        }
        if !offset.is_finite() || offset - amplitude < 0.0 {
            return Err(Error::parameter(
                "offset",
                format!(
                    "offset - amplitude >= 0 violated (base current must stay \
                     non-negative): offset = {offset}, amplitude = {amplitude}"
                ),
            ));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::parameter("frequency", "must be positive"));
        }
        Ok(Self {
            offset,
            amplitude,
            frequency,
            phase: 0.0,
        })
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Discretization of a simulation run.
///
/// `n_steps` samples cover `n_cycles` full stimulus cycles with resolution
/// `dt = t_end / (n_steps - 1)`. The requested step count is rounded up so
/// that every cycle spans the same integer number of samples; this keeps the
/// stimulus frequency exactly on a DFT bin of any whole-cycle window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    n_steps: usize,
    n_cycles: usize,
    discard_cycles: usize,
    scheme: IntegrationScheme,
    start_at_dc: bool,
}

/// Minimum sampling density per stimulus cycle; coarser runs are rejected to
/// keep harmonic bins meaningful.
pub const MIN_SAMPLES_PER_CYCLE: usize = 1000;

impl SimConfig {
    pub fn new(
        n_steps: usize,
        n_cycles: usize,
        discard_cycles: usize,
        scheme: IntegrationScheme,
    ) -> Result<Self> {
        if n_cycles == 0 {
            return Err(Error::parameter("n_cycles", "must be >= 1"));
        }
        if discard_cycles >= n_cycles {
            return Err(Error::parameter(
                "discard_cycles",
                format!("must be < n_cycles = {n_cycles}"),
            ));
        }
        if n_steps < 2 {
            return Err(Error::parameter("n_steps", "must be >= 2"));
        }
        let mut intervals = n_steps - 1;
        let rem = intervals % n_cycles;
        if rem != 0 {
            intervals += n_cycles - rem;
        }
        if intervals / n_cycles < MIN_SAMPLES_PER_CYCLE {
            return Err(Error::parameter(
                "n_steps",
                format!(
                    "{} samples per cycle; at least {MIN_SAMPLES_PER_CYCLE} required",
                    intervals / n_cycles
                ),
            ));
        }
        Ok(Self {
            n_steps: intervals + 1,
            n_cycles,
            discard_cycles,
            scheme,
            start_at_dc: false,
        })
    }

    /// Start the capacitor at the DC operating point of the bias current
    /// instead of fully discharged, shortening the startup transient.
    pub fn with_start_at_dc(mut self, start_at_dc: bool) -> Self {
        self.start_at_dc = start_at_dc;
        self
    }

    pub fn with_n_steps(self, n_steps: usize) -> Result<Self> {
        let cfg = Self::new(n_steps, self.n_cycles, self.discard_cycles, self.scheme)?;
        Ok(cfg.with_start_at_dc(self.start_at_dc))
    }

    pub fn with_scheme(mut self, scheme: IntegrationScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_cycles(&self) -> usize {
        self.n_cycles
    }

    pub fn discard_cycles(&self) -> usize {
        self.discard_cycles
    }

    pub fn scheme(&self) -> IntegrationScheme {
        self.scheme
    }

    pub fn start_at_dc(&self) -> bool {
        self.start_at_dc
    }

    pub fn samples_per_cycle(&self) -> usize {
        (self.n_steps - 1) / self.n_cycles
    }

    /// Step size for a stimulus of the given frequency.
    pub fn dt(&self, frequency: f64) -> f64 {
        let t_end = self.n_cycles as f64 / frequency;
        t_end / (self.n_steps - 1) as f64
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::new(200_000, 6, 3, IntegrationScheme::Euler).expect("default config is valid")
    }
}

/// Uniformly sampled time series of the stage signals.
///
/// All four sequences have identical length and `v_p[k] = vcc - v_c[k]` on
/// every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub t0: f64,
    pub i_b: Vec<f64>,
    pub i: Vec<f64>,
    pub v_c: Vec<f64>,
    pub v_p: Vec<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    /// Time of sample `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    fn slice(&self, start: usize, len: usize) -> Trace {
        Trace {
            dt: self.dt,
            t0: self.time(start),
            i_b: self.i_b[start..start + len].to_vec(),
            i: self.i[start..start + len].to_vec(),
            v_c: self.v_c[start..start + len].to_vec(),
            v_p: self.v_p[start..start + len].to_vec(),
        }
    }

    /// CSV export: header `t,i_b,i,v_c,v_p`, one row per sample, full double
    /// precision.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,i_b,i,v_c,v_p")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.time(k),
                self.i_b[k],
                self.i[k],
                self.v_c[k],
                self.v_p[k]
            )?;
        }
        Ok(())
    }
}

/// Sample the sinusoidal drive on the simulation grid.
pub fn generate_stimulus(st: &Stimulus, cfg: &SimConfig) -> Vec<f64> {
    let dt = cfg.dt(st.frequency());
    let omega = 2.0 * std::f64::consts::PI * st.frequency();
    (0..cfg.n_steps())
        .map(|k| st.offset() + st.amplitude() * (omega * (k as f64 * dt) + st.phase()).sin())
        .collect()
}

/// Memoryless simulation of the purely resistive stage: every sample is the
/// time-independent operating point of the instantaneous base current.
pub fn simulate_resistive(
    p: &EarlyParams,
    c: &CircuitConfig,
    st: &Stimulus,
    cfg: &SimConfig,
) -> Result<Trace> {
    c.require_resistive("c_load")?;
    let i_b = generate_stimulus(st, cfg);
    let n = i_b.len();
    let mut i = Vec::with_capacity(n);
    let mut v_c = Vec::with_capacity(n);
    let mut v_p = Vec::with_capacity(n);
    for (k, &ib) in i_b.iter().enumerate() {
        let op = crate::model::solve_resistive(p, c, ib).map_err(|e| e.at_sample(k))?;
        i.push(op.i);
        v_c.push(op.v_c);
        v_p.push(op.v_p);
    }
    Ok(Trace {
        dt: cfg.dt(st.frequency()),
        t0: 0.0,
        i_b,
        i,
        v_c,
        v_p,
    })
}

/// Time-step the stage driving a parallel RC load.
///
/// The capacitor starts discharged (`v_p(0) = 0`) unless
/// [`SimConfig::with_start_at_dc`] was set. Fails with
/// [`Error::Instability`] if `|v_p|` exceeds `10 * vcc`, which indicates a
/// step size too coarse for the load time constant.
pub fn simulate_rc(
    p: &EarlyParams,
    c: &CircuitConfig,
    st: &Stimulus,
    cfg: &SimConfig,
) -> Result<Trace> {
    if c.c_load() <= 0.0 {
        return Err(Error::parameter(
            "c_load",
            "simulate_rc requires c_load > 0; use simulate_resistive otherwise",
        ));
    }
    let i_b = generate_stimulus(st, cfg);
    let n = i_b.len();
    let w = c.vcc() - p.va();
    let r = c.r_load();
    let cap = c.c_load();
    let dt = cfg.dt(st.frequency());
    let vp_limit = 10.0 * c.vcc();

    let fan = |k: usize, ib: f64| -> Result<f64> {
        let x = p.s() * ib;
        if !x.is_finite() || !(0.0..std::f64::consts::FRAC_PI_2).contains(&x) {
            return Err(Error::TanDomain {
                s_ib: x,
                sample: Some(k),
            });
        }
        Ok(x.tan())
    };

    let mut vp = if cfg.start_at_dc() {
        let t = fan(0, st.offset())?;
        r * w * t / (r * t + 1.0)
    } else {
        0.0
    };

    let mut i = Vec::with_capacity(n);
    let mut v_c = Vec::with_capacity(n);
    let mut v_p = Vec::with_capacity(n);

    match cfg.scheme() {
        IntegrationScheme::Euler => {
            for (k, &ib) in i_b.iter().enumerate() {
                let t = fan(k, ib)?;
                let ik = (w - vp) * t;
                i.push(ik);
                v_c.push(c.vcc() - vp);
                v_p.push(vp);
                let ic = ik - vp / r;
                vp += ic / cap * dt;
                if !vp.is_finite() || vp.abs() > vp_limit {
                    return Err(Error::Instability { sample: k, v_p: vp });
                }
            }
        }
        IntegrationScheme::Trapezoidal => {
            // dV_p/dt = (a(t) - b(t) V_p) / C with a = (V_CC - V_a) tan,
            // b = tan + 1/R; the update solves the linear implicit average
            // of the capacitor current at both ends of the step.
            let mut t_prev = fan(0, i_b[0])?;
            for (k, &ib) in i_b.iter().enumerate() {
                if k > 0 {
                    let t_k = fan(k, ib)?;
                    let h = dt / (2.0 * cap);
                    let a_prev = w * t_prev;
                    let b_prev = t_prev + 1.0 / r;
                    let a_k = w * t_k;
                    let b_k = t_k + 1.0 / r;
                    vp = (vp + h * (a_prev - b_prev * vp + a_k)) / (1.0 + h * b_k);
                    if !vp.is_finite() || vp.abs() > vp_limit {
                        return Err(Error::Instability { sample: k, v_p: vp });
                    }
                    t_prev = t_k;
                }
                let ik = (w - vp) * t_prev;
                i.push(ik);
                v_c.push(c.vcc() - vp);
                v_p.push(vp);
            }
        }
    }

    Ok(Trace {
        dt,
        t0: 0.0,
        i_b,
        i,
        v_c,
        v_p,
    })
}

/// Extract an exact integer number of complete cycles after discarding the
/// configured startup cycles.
pub fn steady_state_window(tr: &Trace, st: &Stimulus, cfg: &SimConfig) -> Result<Trace> {
    let spc = (1.0 / (st.frequency() * tr.dt)).round();
    if !(spc.is_finite() && spc >= 1.0) {
        return Err(Error::Window(format!(
            "cycle of {} Hz is not resolved by dt = {}",
            st.frequency(),
            tr.dt
        )));
    }
    let spc = spc as usize;
    let start = cfg.discard_cycles() * spc;
    if start >= tr.len() {
        return Err(Error::Window(format!(
            "trace has {} samples, fewer than the {} discarded",
            tr.len(),
            start
        )));
    }
    let cycles = (tr.len() - start) / spc;
    if cycles == 0 {
        return Err(Error::Window(
            "fewer than one full cycle remains after discarding".into(),
        ));
    }
    Ok(tr.slice(start, cycles * spc))
}
