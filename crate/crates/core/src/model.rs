//! Early transistor model and the closed-form circuit equations.
//!
//! The output port of the transistor is a Thevenin pair: a fixed negative
//! source `V_a` in series with `R_o(I_B) = 1/tan(s*I_B)`. With a resistive
//! load `R` and supply `V_CC` the stage obeys
//!
//! ```text
//! I   = (V_CC - V_a) / (R + R_o(I_B))
//!     = (V_CC - V_a) * tan(s*I_B) / (R * tan(s*I_B) + 1)
//! V_p = R * I
//! V_C = V_CC - V_p
//! ```
//!
//! All operations here use the tan form, which is finite at `I_B = 0`; the
//! literal `1/tan` composition is only exposed through
//! [`output_resistance`], where zero base current is a genuine singularity.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// The two invariant Early parameters of a transistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyParams {
    va: f64,
    s: f64,
}

impl EarlyParams {
    /// `va` is the Early voltage in volts (strictly negative), `s` the
    /// fanning proportionality parameter in 1/A (strictly positive).
    pub fn new(va: f64, s: f64) -> Result<Self> {
        if !va.is_finite() || va >= 0.0 {
            return Err(Error::parameter(
                "va",
                format!("Early voltage must be strictly negative, got {va}"),
            ));
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::parameter(
                "s",
                format!("fanning parameter must be strictly positive, got {s}"),
            ));
        }
        Ok(Self { va, s })
    }

    pub fn va(&self) -> f64 {
        self.va
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `s * i_b`, validated against the tan domain. Zero is accepted only
    /// when `allow_zero` is set; values at or beyond `pi/2` always fail.
    fn fan_angle(&self, i_b: f64, allow_zero: bool) -> Result<f64> {
        let x = self.s * i_b;
        if !x.is_finite() || !(0.0..FRAC_PI_2).contains(&x) || (x == 0.0 && !allow_zero) {
            return Err(Error::TanDomain {
                s_ib: x,
                sample: None,
            });
        }
        Ok(x)
    }
}

/// Base-side diode model: series resistance, incremental resistance and
/// threshold voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputPort {
    r_b: f64,
    r_i: f64,
    v_r: f64,
}

impl InputPort {
    pub fn new(r_b: f64, r_i: f64, v_r: f64) -> Result<Self> {
        if !(r_b.is_finite() && r_b >= 0.0) {
            return Err(Error::parameter("r_b", "base resistance must be >= 0"));
        }
        if !(r_i.is_finite() && r_i >= 0.0) {
            return Err(Error::parameter("r_i", "diode resistance must be >= 0"));
        }
        if r_b + r_i <= 0.0 {
            return Err(Error::parameter("r_b", "r_b + r_i must be positive"));
        }
        if !v_r.is_finite() {
            return Err(Error::parameter("v_r", "threshold must be finite"));
        }
        Ok(Self { r_b, r_i, v_r })
    }

    pub fn r_b(&self) -> f64 {
        self.r_b
    }

    pub fn r_i(&self) -> f64 {
        self.r_i
    }

    pub fn v_r(&self) -> f64 {
        self.v_r
    }
}

/// Supply and load description. `c_load = 0` means a purely resistive load;
/// a positive `c_load` is a capacitor in parallel with `r_load`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitConfig {
    vcc: f64,
    r_load: f64,
    c_load: f64,
    input: Option<InputPort>,
}

impl CircuitConfig {
    pub fn new(vcc: f64, r_load: f64, c_load: f64) -> Result<Self> {
        if !(vcc.is_finite() && vcc > 0.0) {
            return Err(Error::parameter("vcc", "supply voltage must be positive"));
        }
        if !(r_load.is_finite() && r_load >= 0.0) {
            return Err(Error::parameter("r_load", "load resistance must be >= 0"));
        }
        if !(c_load.is_finite() && c_load >= 0.0) {
            return Err(Error::parameter("c_load", "load capacitance must be >= 0"));
        }
        // The RC load is a parallel pair; R = 0 with C > 0 would
        // short-circuit the definition of I_R = V_p / R.
        if c_load > 0.0 && r_load <= 0.0 {
            return Err(Error::parameter(
                "r_load",
                "a capacitive load requires r_load > 0 (parallel pair)",
            ));
        }
        Ok(Self {
            vcc,
            r_load,
            c_load,
            input: None,
        })
    }

    pub fn with_input_port(mut self, port: InputPort) -> Self {
        self.input = Some(port);
        self
    }

    pub fn vcc(&self) -> f64 {
        self.vcc
    }

    pub fn r_load(&self) -> f64 {
        self.r_load
    }

    pub fn c_load(&self) -> f64 {
        self.c_load
    }

    pub fn input_port(&self) -> Option<&InputPort> {
        self.input.as_ref()
    }

    pub fn is_resistive(&self) -> bool {
        self.c_load == 0.0
    }

    pub(crate) fn require_resistive(&self, name: &'static str) -> Result<()> {
        if self.is_resistive() {
            Ok(())
        } else {
            Err(Error::parameter(
                name,
                "operation requires a purely resistive load (c_load = 0)",
            ))
        }
    }
}

/// One point of the stage in the `(V_C, I)` operating space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub i_b: f64,
    pub i: f64,
    pub v_c: f64,
    pub v_p: f64,
}

/// Output resistance `R_o(I_B) = 1/tan(s*i_b)`, strictly decreasing in `i_b`.
///
/// Errors when `s*i_b` is zero or leaves `(0, pi/2)`; zero base current is a
/// pole of this expression, and the closed forms below handle that limit.
pub fn output_resistance(p: &EarlyParams, i_b: f64) -> Result<f64> {
    let x = p.fan_angle(i_b, false)?;
    Ok(1.0 / x.tan())
}

/// Resistive-load operating point for a given base current.
///
/// Uses the tan form of the load-line equations, so `i_b = 0` is an ordinary
/// point (cutoff: `I = 0`, `V_C = V_CC`).
pub fn solve_resistive(p: &EarlyParams, c: &CircuitConfig, i_b: f64) -> Result<OperatingPoint> {
    c.require_resistive("c_load")?;
    let x = p.fan_angle(i_b, true)?;
    let t = x.tan();
    let i = (c.vcc - p.va) * t / (c.r_load * t + 1.0);
    let v_p = c.r_load * i;
    Ok(OperatingPoint {
        i_b,
        i,
        v_c: c.vcc - v_p,
        v_p,
    })
}

/// Solve the base diode port for an input voltage.
///
/// Returns `(i_b, v_b)`. Below the threshold the diode is open: no current
/// flows and the full input appears at the base.
pub fn solve_input_port(c: &CircuitConfig, v_i: f64) -> Result<(f64, f64)> {
    let port = c
        .input
        .ok_or_else(|| Error::parameter("input", "circuit has no input port configured"))?;
    if v_i < port.v_r {
        return Ok((0.0, v_i));
    }
    let i_b = (v_i - port.v_r) / (port.r_b + port.r_i);
    let v_b = port.v_r + i_b * port.r_i;
    Ok((i_b, v_b))
}

/// Current gain `beta(I_B) = dI/dI_B` along the resistive load line:
///
/// ```text
/// beta = s * (V_CC - V_a) * csc^2(s*i_b) / (cot(s*i_b) + R)^2
///      = s * (V_CC - V_a) / (cos(s*i_b) + R * sin(s*i_b))^2
/// ```
///
/// The second form is used; it is numerically stable as `i_b -> 0+`, where
/// the gain tends to `s * (V_CC - V_a)`. Zero base current itself is
/// rejected to match the cot-form domain.
pub fn beta_gain(p: &EarlyParams, c: &CircuitConfig, i_b: f64) -> Result<f64> {
    let x = p.fan_angle(i_b, false)?;
    let d = x.cos() + c.r_load * x.sin();
    Ok(p.s * (c.vcc - p.va) / (d * d))
}

/// Ratio of current gains along two parallel load lines whose supplies
/// differ by the factor `xi`:
///
/// ```text
/// rho = (xi * V_CC - V_a) / (V_CC - V_a)
/// ```
///
/// Independent of `i_b`, `s` and `R`.
pub fn gain_ratio_rho(p: &EarlyParams, vcc: f64, xi: f64) -> Result<f64> {
    if !(vcc.is_finite() && vcc > 0.0) {
        return Err(Error::parameter("vcc", "supply voltage must be positive"));
    }
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::parameter("xi", "supply factor must be positive"));
    }
    Ok((xi * vcc - p.va) / (vcc - p.va))
}

/// Effective average current gain of the fanned structure, `s * |V_a|`.
pub fn average_gain_estimate(p: &EarlyParams) -> f64 {
    p.s * p.va.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> EarlyParams {
        EarlyParams::new(-50.0, 10.0).unwrap()
    }

    fn circuit(r: f64) -> CircuitConfig {
        CircuitConfig::new(10.0, r, 0.0).unwrap()
    }

    #[test]
    fn early_params_validate() {
        assert!(EarlyParams::new(50.0, 10.0).is_err());
        assert!(EarlyParams::new(0.0, 10.0).is_err());
        assert!(EarlyParams::new(-50.0, 0.0).is_err());
        assert!(EarlyParams::new(-50.0, -1.0).is_err());
        assert!(EarlyParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn circuit_config_validates() {
        assert!(CircuitConfig::new(0.0, 150.0, 0.0).is_err());
        assert!(CircuitConfig::new(10.0, -1.0, 0.0).is_err());
        assert!(CircuitConfig::new(10.0, 0.0, 250e-9).is_err());
        assert!(CircuitConfig::new(10.0, 150.0, 250e-9).is_ok());
    }

    #[test]
    fn output_resistance_example() {
        // 1/tan(6e-4), evaluated with 40-digit arithmetic.
        let ro = output_resistance(&params(), 60e-6).unwrap();
        assert_relative_eq!(ro, 1666.6664666666618, max_relative = 1e-12);
    }

    #[test]
    fn output_resistance_quarter_pi() {
        let p = EarlyParams::new(-50.0, 1.0).unwrap();
        let ro = output_resistance(&p, std::f64::consts::FRAC_PI_4).unwrap();
        assert_relative_eq!(ro, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn output_resistance_domain_errors() {
        let p = params();
        assert!(matches!(
            output_resistance(&p, 0.0),
            Err(Error::TanDomain { .. })
        ));
        assert!(matches!(
            output_resistance(&p, -1e-6),
            Err(Error::TanDomain { .. })
        ));
        // s*i_b = pi/2
        assert!(matches!(
            output_resistance(&p, FRAC_PI_2 / 10.0),
            Err(Error::TanDomain { .. })
        ));
    }

    #[test]
    fn output_resistance_decreases() {
        let p = params();
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let ro = output_resistance(&p, k as f64 * 5e-6).unwrap();
            assert!(ro < prev);
            prev = ro;
        }
    }

    #[test]
    fn resistive_point_example() {
        // Direct high-precision evaluation of the load-line equations at
        // (va=-50, s=10, vcc=10, r=150, i_b=60uA).
        let op = solve_resistive(&params(), &circuit(150.0), 60e-6).unwrap();
        assert_relative_eq!(op.i, 0.03302752657183788, max_relative = 1e-12);
        assert_relative_eq!(op.v_p, 4.954128985775681, max_relative = 1e-12);
        assert_relative_eq!(op.v_c, 5.045871014224319, max_relative = 1e-12);
    }

    #[test]
    fn resistive_cutoff() {
        let op = solve_resistive(&params(), &circuit(150.0), 0.0).unwrap();
        assert_eq!(op.i, 0.0);
        assert_eq!(op.v_p, 0.0);
        assert_eq!(op.v_c, 10.0);
    }

    #[test]
    fn resistive_zero_load() {
        let op = solve_resistive(&params(), &circuit(0.0), 60e-6).unwrap();
        assert_eq!(op.v_c, 10.0);
        assert_relative_eq!(op.i, 60.0 * (6e-4_f64).tan(), max_relative = 1e-15);
    }

    #[test]
    fn resistive_rejects_capacitive_config() {
        let c = CircuitConfig::new(10.0, 150.0, 250e-9).unwrap();
        assert!(solve_resistive(&params(), &c, 60e-6).is_err());
    }

    #[test]
    fn input_port_example() {
        let c = circuit(150.0).with_input_port(InputPort::new(9e3, 1e3, 0.7).unwrap());
        let (i_b, v_b) = solve_input_port(&c, 1.7).unwrap();
        assert_relative_eq!(i_b, 100e-6, max_relative = 1e-12);
        assert_relative_eq!(v_b, 0.8, max_relative = 1e-12);
    }

    #[test]
    fn input_port_threshold_and_cutoff() {
        let c = circuit(150.0).with_input_port(InputPort::new(9e3, 1e3, 0.7).unwrap());
        let (i_b, v_b) = solve_input_port(&c, 0.7).unwrap();
        assert_eq!(i_b, 0.0);
        assert_eq!(v_b, 0.7);
        let (i_b, v_b) = solve_input_port(&c, 0.3).unwrap();
        assert_eq!(i_b, 0.0);
        assert_eq!(v_b, 0.3);
    }

    #[test]
    fn input_port_zero_incremental_resistance() {
        let c = circuit(150.0).with_input_port(InputPort::new(10e3, 0.0, 0.7).unwrap());
        let (_, v_b) = solve_input_port(&c, 2.5).unwrap();
        assert_eq!(v_b, 0.7);
    }

    #[test]
    fn input_port_unconfigured() {
        assert!(solve_input_port(&circuit(150.0), 1.7).is_err());
    }

    #[test]
    fn beta_example() {
        let b = beta_gain(&params(), &circuit(150.0), 60e-6).unwrap();
        assert_relative_eq!(b, 505.00816775535543, max_relative = 1e-12);
    }

    #[test]
    fn beta_small_current_limit() {
        // beta -> s * (vcc - va) = 600 as i_b -> 0+.
        let b = beta_gain(&params(), &circuit(150.0), 1e-9).unwrap();
        assert_relative_eq!(b, 600.0, max_relative = 1e-5);
        assert!(matches!(
            beta_gain(&params(), &circuit(150.0), 0.0),
            Err(Error::TanDomain { .. })
        ));
    }

    /// Central finite difference of the load-line current.
    fn beta_fd(p: &EarlyParams, c: &CircuitConfig, i_b: f64, h: f64) -> f64 {
        let hi = solve_resistive(p, c, i_b + h).unwrap().i;
        let lo = solve_resistive(p, c, i_b - h).unwrap().i;
        (hi - lo) / (2.0 * h)
    }

    #[test]
    fn beta_matches_finite_difference() {
        let p = params();
        for r in [0.0, 30.0, 150.0, 5000.0] {
            let c = circuit(r);
            let mut i_b = 1e-6;
            while i_b <= 100e-6 {
                let analytic = beta_gain(&p, &c, i_b).unwrap();
                let fd = beta_fd(&p, &c, i_b, 1e-9);
                assert_relative_eq!(analytic, fd, max_relative = 1e-6);
                i_b += 3e-6;
            }
        }
    }

    #[test]
    fn beta_fd_cross_check_at_tiny_bias() {
        let fd = beta_fd(&params(), &circuit(150.0), 1e-9, 1e-9);
        assert_relative_eq!(fd, 600.0, max_relative = 1e-5);
    }

    #[test]
    fn beta_strictly_decreasing_for_positive_load() {
        let p = params();
        for r in [50.0, 150.0, 5000.0] {
            let c = circuit(r);
            let mut prev = f64::INFINITY;
            for k in 1..=30 {
                let b = beta_gain(&p, &c, k as f64 * 0.5e-6).unwrap();
                assert!(b < prev, "beta not decreasing at R={r}");
                prev = b;
            }
        }
    }

    #[test]
    fn beta_flat_at_zero_load() {
        // Relative gain variation below 1e-6 over (0, 15uA] when R = 0.
        let p = params();
        let c = circuit(0.0);
        let betas: Vec<f64> = (1..=30)
            .map(|k| beta_gain(&p, &c, k as f64 * 0.5e-6).unwrap())
            .collect();
        let max = betas.iter().cloned().fold(f64::MIN, f64::max);
        let min = betas.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min) / min < 1e-6);
    }

    #[test]
    fn rho_examples() {
        let p = EarlyParams::new(-200.0, 2.5).unwrap();
        let rho = gain_ratio_rho(&p, 10.0, 1.1).unwrap();
        assert_relative_eq!(rho, 211.0 / 210.0, max_relative = 1e-15);
        assert!((rho - 1.004762).abs() < 1e-6);

        let p = params();
        assert_relative_eq!(
            gain_ratio_rho(&p, 10.0, 1.1).unwrap(),
            61.0 / 60.0,
            max_relative = 1e-15
        );
        assert_eq!(gain_ratio_rho(&p, 10.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rho_validates_inputs() {
        let p = params();
        assert!(gain_ratio_rho(&p, 0.0, 1.1).is_err());
        assert!(gain_ratio_rho(&p, 10.0, 0.0).is_err());
    }

    #[test]
    fn average_gain_examples() {
        for (va, s) in [(-50.0, 10.0), (-200.0, 2.5), (-10.0, 50.0)] {
            let p = EarlyParams::new(va, s).unwrap();
            assert_eq!(average_gain_estimate(&p), 500.0);
        }
    }

    #[test]
    fn load_line_collinearity() {
        let p = params();
        let c = circuit(150.0);
        for k in 0..=100 {
            let op = solve_resistive(&p, &c, k as f64 * 1e-6).unwrap();
            assert_relative_eq!(op.v_c, 10.0 - 150.0 * op.i, max_relative = 1e-12);
            assert_relative_eq!(op.v_p, 10.0 - op.v_c, max_relative = 1e-12);
        }
    }

    proptest! {
        /// The output current factorizes as (V_CC - V_a) * g(i_b; s, R):
        /// swapping V_a only rescales it.
        #[test]
        fn current_scales_with_supply_minus_va(
            va in -400.0f64..-1.0,
            va2 in -400.0f64..-1.0,
            s in 0.5f64..50.0,
            r in 0.0f64..5000.0,
            i_b in 1e-9f64..20e-6,
        ) {
            let c = CircuitConfig::new(10.0, r, 0.0).unwrap();
            let p1 = EarlyParams::new(va, s).unwrap();
            let p2 = EarlyParams::new(va2, s).unwrap();
            let i1 = solve_resistive(&p1, &c, i_b).unwrap().i;
            let i2 = solve_resistive(&p2, &c, i_b).unwrap().i;
            let expected = (10.0 - va) / (10.0 - va2);
            prop_assert!((i1 / i2 - expected).abs() <= 1e-12 * expected.abs());
        }

        /// rho equals the numerically computed beta ratio for any
        /// (i_b, R, xi), to near machine precision.
        #[test]
        fn rho_matches_beta_ratio(
            i_b in 1e-7f64..100e-6,
            r in 0.0f64..5000.0,
            xi in 0.1f64..5.0,
        ) {
            let p = EarlyParams::new(-200.0, 2.5).unwrap();
            let c1 = CircuitConfig::new(10.0, r, 0.0).unwrap();
            let c2 = CircuitConfig::new(xi * 10.0, r, 0.0).unwrap();
            let b1 = beta_gain(&p, &c1, i_b).unwrap();
            let b2 = beta_gain(&p, &c2, i_b).unwrap();
            let rho = gain_ratio_rho(&p, 10.0, xi).unwrap();
            prop_assert!((b2 / b1 - rho).abs() <= 1e-12 * rho);
        }
    }
}
