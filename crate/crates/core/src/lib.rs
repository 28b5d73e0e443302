//! Simulation and analysis toolkit for a common-emitter amplifier stage
//! driving resistive and parallel-RC loads.
//!
//! The transistor is represented by the two-parameter Early model: a fixed
//! voltage source `V_a` (negative) in series with a base-current-controlled
//! output resistance `R_o(I_B) = 1/tan(s*I_B)`. Both parameters are invariant
//! with respect to the operating point, which makes closed-form load-line
//! equations and gain expressions available alongside the time-domain solver.
//!
//! Module map:
//!
//! - [`model`] — parameter types, operating-point solutions, analytic gains.
//! - [`transient`] — stimulus generation and time-domain integration of the
//!   RC-loaded stage (forward Euler per the reference update rule, plus an
//!   A-stable trapezoidal option).
//! - [`analysis`] — power spectra, total harmonic distortion, phase lag, and
//!   operating-space trajectory metrics.
//! - [`sweep`] — parameter-space exploration: THD surfaces over `(V_a, s)`,
//!   THD-vs-R curves, and gain-linearity scans.

pub mod analysis;
pub mod error;
pub mod model;
pub mod sweep;
pub mod transient;

pub use error::{Error, Result};
pub use model::{CircuitConfig, EarlyParams, InputPort, OperatingPoint};
pub use transient::{IntegrationScheme, SimConfig, Stimulus, Trace};
