//! Figure-data sweeps written as CSV.
//!
//! Column names carry their unit. Angle columns hold closed-form values:
//! α unwrapped (it is linear in `T` or θ), θ and φ wrapped into `(−π, π]`.
//!
//! | figure | columns |
//! |--------|---------|
//! | fig3 | `ratio, theta_rad, alpha_rad` |
//! | fig5 | `label, T_us, alpha_rad, theta_rad, phi_rad, sin_theta, cos_theta` |
//! | fig6 | `protocol, T_us, alpha_rad, theta_rad, phi_rad, e_decay, e_blockade, e_leakage, total` |

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::{BlockadeSpec, NoncollinearV};
use crate::config::Preset;
use crate::error::{contract, Error, Result};
use crate::error_budget::{total_budget, BudgetInputs};
use crate::protocols::{
    protocol1_angles, protocol2_angles_with_trig, wrap_angle, Protocol, ProtocolParams,
};
use crate::units::two_pi_mhz;

pub const FIG3_HEADER: [&str; 3] = ["ratio", "theta_rad", "alpha_rad"];
pub const FIG5_HEADER: [&str; 7] =
    ["label", "T_us", "alpha_rad", "theta_rad", "phi_rad", "sin_theta", "cos_theta"];
pub const FIG6_HEADER: [&str; 9] = [
    "protocol",
    "T_us",
    "alpha_rad",
    "theta_rad",
    "phi_rad",
    "e_decay",
    "e_blockade",
    "e_leakage",
    "total",
];

/// `b01/b02` values of the α-versus-θ lines.
pub const FIG3_RATIOS: [f64; 3] = [3.0, 2.0, 1.5];

/// `(V₁, V₂, V_e)` sets in units of 2π × 0.1 MHz.
pub const FIG5_SETS: [(f64, f64, f64); 6] = [
    (3.0, 1.0, 2.0),
    (1.0, 3.0, 2.0),
    (2.0, 1.0, 3.0),
    (1.0, 2.0, 3.0),
    (3.0, 2.0, 1.0),
    (2.0, 3.0, 1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Figure {
    Fig3,
    Fig5,
    Fig6,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            other => Err(Error::Config(format!("unknown figure {other:?} (fig3, fig5, fig6)"))),
        }
    }
}

/// Grid of a sweep. `max` and `step` refer to θ (rad) for fig3 and to `T`
/// (μs) otherwise; the grid is `0, step, 2·step, …` up to `max` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub figure: Figure,
    pub max: f64,
    pub step: f64,
    /// fig3 ratios.
    pub ratios: Vec<f64>,
    /// fig6 Rabi frequency, rad·μs⁻¹.
    pub omega: f64,
}

impl SweepSpec {
    pub fn default_for(figure: Figure) -> Self {
        let (max, step) = match figure {
            Figure::Fig3 => (FRAC_PI_2, FRAC_PI_2 / 100.0),
            Figure::Fig5 => (2.5, 0.01),
            Figure::Fig6 => (1.5, 0.01),
        };
        Self {
            figure,
            max,
            step,
            ratios: FIG3_RATIOS.to_vec(),
            omega: two_pi_mhz(30.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(contract(format!("sweep step must be positive, got {}", self.step)));
        }
        if !(self.max >= 0.0) || !self.max.is_finite() {
            return Err(contract(format!("sweep range must be non-negative, got {}", self.max)));
        }
        if self.figure == Figure::Fig3 && self.ratios.is_empty() {
            return Err(contract("fig3 needs at least one ratio"));
        }
        if self.figure == Figure::Fig6 && !(self.omega > 0.0) {
            return Err(contract("fig6 needs a positive omega"));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = (self.max / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub ratio: f64,
    pub theta_rad: f64,
    pub alpha_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig5Row {
    pub label: String,
    #[serde(rename = "T_us")]
    pub t_us: f64,
    pub alpha_rad: f64,
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig6Row {
    pub protocol: Protocol,
    #[serde(rename = "T_us")]
    pub t_us: f64,
    pub alpha_rad: f64,
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub e_decay: f64,
    pub e_blockade: f64,
    pub e_leakage: f64,
    pub total: f64,
}

/// α versus θ for Protocol I at each `b01/b02` ratio (with `b02` = 2π × 0.1 MHz).
pub fn fig3_rows(ratios: &[f64], theta_grid: &[f64]) -> Result<Vec<Fig3Row>> {
    let b02 = two_pi_mhz(0.1);
    let mut rows = Vec::with_capacity(ratios.len() * theta_grid.len());
    for &ratio in ratios {
        let b = BlockadeSpec::new(ratio * b02, b02);
        let db = b.b01 - b.b02;
        if db == 0.0 {
            return Err(contract("fig3 ratio 1 gives no entangling line"));
        }
        for &theta in theta_grid {
            let r = protocol1_angles(&b, 2.0 * theta / db.abs(), 0.0)?;
            rows.push(Fig3Row {
                ratio,
                theta_rad: r.raw.theta.abs(),
                alpha_rad: r.raw.alpha,
            });
        }
    }
    Ok(rows)
}

/// Protocol II angles over `T` for each `(V₁:V₂:V_e)` set.
pub fn fig5_rows(sets: &[(f64, f64, f64)], t_grid: &[f64]) -> Result<Vec<Fig5Row>> {
    let unit = two_pi_mhz(0.1);
    let mut rows = Vec::new();
    for &(v1, v2, ve) in sets {
        let label = format!("{v1}:{v2}:{ve}");
        let v = NoncollinearV::new(v1 * unit, v2 * unit, ve * unit, 0.0);
        let chunk: Vec<Fig5Row> = t_grid
            .par_iter()
            .map(|&t| {
                let (r, trig) = protocol2_angles_with_trig(&v, t)?;
                Ok(Fig5Row {
                    label: label.clone(),
                    t_us: t,
                    alpha_rad: r.raw.alpha,
                    theta_rad: wrap_angle(r.raw.theta),
                    phi_rad: wrap_angle(r.raw.phi),
                    sin_theta: trig.sin_theta,
                    cos_theta: trig.cos_theta,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

/// Angles and error budget over `T`: Protocol I at `β₁ = π/4`, Protocol II at `β₁ = 3π/8`.
pub fn fig6_rows(preset: &Preset, omega: f64, t_grid: &[f64]) -> Result<Vec<Fig6Row>> {
    let b = preset.blockade();
    let mut rows = Vec::new();
    for (protocol, beta1) in [(Protocol::I, FRAC_PI_4), (Protocol::II, 3.0 * PI / 8.0)] {
        let chunk: Vec<Fig6Row> = t_grid
            .par_iter()
            .map(|&t| {
                let p = match protocol {
                    Protocol::I => ProtocolParams::protocol1(&b, 0.0, t),
                    Protocol::II => ProtocolParams::protocol2(&b, beta1, t),
                };
                let raw = p.angles()?.raw;
                let budget = total_budget(&BudgetInputs {
                    protocol,
                    wait: t,
                    omega,
                    interaction: p.interaction,
                    beta1,
                    lifetimes: preset.lifetimes,
                    delta1: preset.delta1,
                    delta2: preset.delta2,
                })?;
                Ok(Fig6Row {
                    protocol,
                    t_us: t,
                    alpha_rad: raw.alpha,
                    theta_rad: wrap_angle(raw.theta),
                    phi_rad: wrap_angle(raw.phi),
                    e_decay: budget.e_decay,
                    e_blockade: budget.e_blockade,
                    e_leakage: budget.e_leakage,
                    total: budget.total,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

fn write_rows<W: Write, R: Serialize>(out: W, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a sweep and writes its CSV. Returns the number of data rows.
pub fn run_sweep<W: Write>(spec: &SweepSpec, preset: &Preset, out: W) -> Result<usize> {
    spec.validate()?;
    let grid = spec.grid();
    match spec.figure {
        Figure::Fig3 => {
            let rows = fig3_rows(&spec.ratios, &grid)?;
            write_rows(out, &FIG3_HEADER, &rows)?;
            Ok(rows.len())
        }
        Figure::Fig5 => {
            let rows = fig5_rows(&FIG5_SETS, &grid)?;
            write_rows(out, &FIG5_HEADER, &rows)?;
            Ok(rows.len())
        }
        Figure::Fig6 => {
            let rows = fig6_rows(preset, spec.omega, &grid)?;
            write_rows(out, &FIG6_HEADER, &rows)?;
            Ok(rows.len())
        }
    }
}
