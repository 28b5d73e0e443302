//! Parameter-space exploration: THD surfaces over the `(V_a, s)` rectangle,
//! THD-versus-R curves and gain-linearity scans.
//!
//! Grid cells are pure functions of their inputs and are evaluated in
//! parallel; results are assembled by index, so any scheduling yields
//! identical output.

use crate::analysis::thd;
use crate::error::{Error, Result};
use crate::model::{beta_gain, CircuitConfig, EarlyParams};
use crate::transient::{simulate_resistive, steady_state_window, SimConfig, Stimulus};
use rayon::prelude::*;
use std::io::{self, Write};

/// Rectangle in the `(V_a, s)` parameter plane. Both axes are sampled
/// uniformly; `va_max` may approach but not reach zero and `s_min` must be
/// positive (both endpoints are degenerate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    va_min: f64,
    va_max: f64,
    s_min: f64,
    s_max: f64,
    n_va: usize,
    n_s: usize,
}

impl SweepGrid {
    pub fn new(
        va_min: f64,
        va_max: f64,
        s_min: f64,
        s_max: f64,
        n_va: usize,
        n_s: usize,
    ) -> Result<Self> {
        if !(va_min.is_finite() && va_max.is_finite() && va_min <= va_max && va_max < 0.0) {
            return Err(Error::parameter(
                "va_axis",
                format!("need va_min <= va_max < 0, got [{va_min}, {va_max}]"),
            ));
        }
        if !(s_min.is_finite() && s_max.is_finite() && 0.0 < s_min && s_min <= s_max) {
            return Err(Error::parameter(
                "s_axis",
                format!("need 0 < s_min <= s_max, got [{s_min}, {s_max}]"),
            ));
        }
        if n_va < 2 || n_s < 2 {
            return Err(Error::parameter(
                "counts",
                "need at least 2 points per axis",
            ));
        }
        Ok(Self {
            va_min,
            va_max,
            s_min,
            s_max,
            n_va,
            n_s,
        })
    }

    pub fn va_values(&self) -> Vec<f64> {
        linspace(self.va_min, self.va_max, self.n_va)
    }

    pub fn s_values(&self) -> Vec<f64> {
        linspace(self.s_min, self.s_max, self.n_s)
    }

    pub fn n_va(&self) -> usize {
        self.n_va
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|k| a + k as f64 * step).collect()
}

/// A grid cell whose pipeline failed; the surface stores no value there.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub i_va: usize,
    pub i_s: usize,
    pub message: String,
}

/// THD over the sweep rectangle, indexed `thd[i_va][i_s]`. Cells that
/// violated the tan domain (or failed otherwise) hold `None` and are listed
/// in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThdSurface {
    pub grid: SweepGrid,
    pub thd: Vec<Vec<Option<f64>>>,
    pub failures: Vec<CellFailure>,
}

impl ThdSurface {
    /// Row-major CSV with explicit axis header rows:
    ///
    /// ```text
    /// # s_axis: s1,...,sn
    /// # va_axis: v1,...,vm
    /// <m rows of n THD values>
    /// ```
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let fmt_axis = |vals: &[f64]| {
            vals.iter()
                .map(|v| format!("{v:.16e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(w, "# s_axis: {}", fmt_axis(&self.grid.s_values()))?;
        writeln!(w, "# va_axis: {}", fmt_axis(&self.grid.va_values()))?;
        for row in &self.thd {
            let line = row
                .iter()
                .map(|cell| match cell {
                    Some(v) => format!("{v:.16e}"),
                    None => "nan".to_string(),
                })
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// THD of the steady-state output current at every grid point.
///
/// Each cell runs the resistive pipeline independently; failed cells are
/// recorded as absent values with a diagnostic instead of aborting the
/// sweep.
pub fn thd_surface(
    grid: &SweepGrid,
    c: &CircuitConfig,
    st: &Stimulus,
    cfg: &SimConfig,
) -> Result<ThdSurface> {
    c.require_resistive("c_load")?;
    let va_values = grid.va_values();
    let s_values = grid.s_values();

    let cells: Vec<(usize, usize)> = (0..va_values.len())
        .flat_map(|i| (0..s_values.len()).map(move |j| (i, j)))
        .collect();

    let results: Vec<std::result::Result<f64, String>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = EarlyParams::new(va_values[i], s_values[j]).map_err(|e| e.to_string())?;
            cell_thd(&p, c, st, cfg).map_err(|e| e.to_string())
        })
        .collect();

    let mut thd_matrix = vec![vec![None; s_values.len()]; va_values.len()];
    let mut failures = Vec::new();
    for (&(i, j), res) in cells.iter().zip(results) {
        match res {
            Ok(v) => thd_matrix[i][j] = Some(v),
            Err(message) => failures.push(CellFailure {
                i_va: i,
                i_s: j,
                message,
            }),
        }
    }
    Ok(ThdSurface {
        grid: *grid,
        thd: thd_matrix,
        failures,
    })
}

fn cell_thd(p: &EarlyParams, c: &CircuitConfig, st: &Stimulus, cfg: &SimConfig) -> Result<f64> {
    let tr = simulate_resistive(p, c, st, cfg)?;
    let w = steady_state_window(&tr, st, cfg)?;
    Ok(thd(&w.i, w.dt, st.frequency())?.thd)
}

/// Least-squares line through scan points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn fit_line(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = points
        .iter()
        .map(|&(_, y)| (y - mean_y) * (y - mean_y))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Current gain along a grid of base currents, with a linearity report.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaScan {
    pub points: Vec<(f64, f64)>,
    pub fit: LinearFit,
}

impl BetaScan {
    /// CSV export: `i_b,beta,fit_slope,fit_intercept,fit_r2`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "i_b,beta,fit_slope,fit_intercept,fit_r2")?;
        for &(ib, beta) in &self.points {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                ib, beta, self.fit.slope, self.fit.intercept, self.fit.r_squared
            )?;
        }
        Ok(())
    }
}

/// Evaluate `beta(i_b)` over a grid on the resistive load line.
pub fn beta_scan(p: &EarlyParams, c: &CircuitConfig, i_b_grid: &[f64]) -> Result<BetaScan> {
    c.require_resistive("c_load")?;
    if i_b_grid.len() < 2 {
        return Err(Error::parameter("i_b_grid", "need at least 2 points"));
    }
    let points = i_b_grid
        .iter()
        .map(|&ib| beta_gain(p, c, ib).map(|b| (ib, b)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_line(&points);
    Ok(BetaScan { points, fit })
}

/// THD of the output current for each load resistance.
pub fn thd_vs_r(
    p: &EarlyParams,
    r_values: &[f64],
    st: &Stimulus,
    cfg: &SimConfig,
    vcc: f64,
) -> Result<Vec<(f64, f64)>> {
    r_values
        .iter()
        .map(|&r| {
            let c = CircuitConfig::new(vcc, r, 0.0)?;
            cell_thd(p, &c, st, cfg).map(|t| (r, t))
        })
        .collect()
}

/// CSV export for [`thd_vs_r`]: `r_ohms,thd`.
pub fn write_thd_vs_r_csv<W: Write>(pairs: &[(f64, f64)], w: &mut W) -> io::Result<()> {
    writeln!(w, "r_ohms,thd")?;
    for &(r, t) in pairs {
        writeln!(w, "{r:.16e},{t:.16e}")?;
    }
    Ok(())
}
