//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor argument or operation input violated a stated invariant.
    #[error("invalid {name}: {message}")]
    Parameter { name: &'static str, message: String },

    /// `s*i_b` left the interval where the fanned output resistance is
    /// defined. Signals that the stimulus drove the transistor outside the
    /// validity region of the model.
    #[error("tan domain violation{}: s*i_b = {s_ib} outside [0, pi/2)",
            .sample.map(|k| format!(" at sample {k}")).unwrap_or_default())]
    TanDomain { s_ib: f64, sample: Option<usize> },

    /// The integrator diverged; the time step is too coarse for the load.
    #[error("integration unstable at sample {sample}: |v_p| = {v_p:.3e} V exceeds 10*vcc")]
    Instability { sample: usize, v_p: f64 },

    /// Steady-state windowing could not produce a full cycle.
    #[error("steady-state window: {0}")]
    Window(String),

    /// The requested fundamental does not land on a DFT bin of the window.
    #[error("frequency {f0} Hz spans {cycles} cycles of the window; an integer count is required")]
    BinMisaligned { f0: f64, cycles: f64 },

    /// The fundamental is too weak for a meaningful phase or THD estimate.
    #[error("fundamental carries relative power {relative_power:.3e} (< 1e-9)")]
    WeakFundamental { relative_power: f64 },

    /// A spectral operation received an empty window.
    #[error("empty signal window")]
    EmptySignal,
}

impl Error {
    pub(crate) fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            message: message.into(),
        }
    }

    /// Attach the offending sample index to a domain error raised while
    /// sweeping a stimulus.
    pub(crate) fn at_sample(self, k: usize) -> Self {
        match self {
            Error::TanDomain { s_ib, .. } => Error::TanDomain {
                s_ib,
                sample: Some(k),
            },
            other => other,
        }
    }
}
