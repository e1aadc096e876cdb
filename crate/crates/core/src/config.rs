//! Bundled presets and the flat `key=value` interaction config format.
//!
//! ```text
//! # comments and blank lines are ignored
//! c6_01_2pi_THz_um6 = 35.71
//! c6_02_2pi_THz_um6 = -10.07
//! l_um = 20
//! beta0_rad = 0
//! beta1_rad = 0.7853981633974483
//! ```
//!
//! Optional keys: `c6_03_2pi_THz_um6`, `beta2_rad`.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::atoms::{blockade_from_c6, BlockadeSpec, RotatedBasis, VdwSpec};
use crate::error::{Error, Result};
use crate::units::{two_pi_ghz, two_pi_thz_um6};

/// Mass of ⁸⁷Rb in kg (86.909180520 u).
pub const RB87_MASS_KG: f64 = 86.909_180_520 * 1.660_539_067e-27;

/// Lifetime used by the `appendixA` preset. Not a measured value.
pub const ASSUMED_LIFETIME_US: f64 = 540.0;

pub const ASSUMED_LIFETIME_NOTE: &str =
    "Rydberg lifetimes are assumed (540 us), not taken from a measurement";

/// Optical tweezer parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapSpec {
    /// Beam waist (μm).
    pub waist_um: f64,
    /// Trap laser wavelength (μm).
    pub wavelength_um: f64,
    /// Trap depth (mK).
    pub depth_mk: f64,
    /// Effective atom temperature (μK).
    pub temperature_uk: f64,
}

/// Rydberg lifetimes (μs) of the target's `|R₁⟩`, `|R₂⟩` and the control's `|r₁⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lifetimes {
    pub tau1: f64,
    pub tau2: f64,
    pub tau_r1: f64,
}

/// Everything needed for one-command reproduction runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub vdw: VdwSpec,
    /// Leakage detunings in rad·μs⁻¹.
    pub delta1: f64,
    pub delta2: f64,
    pub lifetimes: Lifetimes,
    pub lifetimes_assumed: bool,
    pub trap: TrapSpec,
    pub atom_mass_kg: f64,
}

impl Preset {
    /// Two ⁸⁷Rb atoms 20 μm apart with the `n = 96 / 102` s-state pair.
    pub fn appendix_a() -> Self {
        Self {
            name: "appendixA",
            vdw: VdwSpec {
                c6_01: two_pi_thz_um6(35.71),
                c6_02: two_pi_thz_um6(-10.07),
                c6_03: None,
                l: 20.0,
                c6_exchange: Some(two_pi_thz_um6(-5e-3)),
            },
            delta1: two_pi_ghz(1.8),
            delta2: two_pi_ghz(1.5),
            lifetimes: Lifetimes {
                tau1: ASSUMED_LIFETIME_US,
                tau2: ASSUMED_LIFETIME_US,
                tau_r1: ASSUMED_LIFETIME_US,
            },
            lifetimes_assumed: true,
            trap: TrapSpec {
                waist_um: 3.0,
                wavelength_um: 1.1,
                depth_mk: 20.0,
                temperature_uk: 100.0,
            },
            atom_mass_kg: RB87_MASS_KG,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "appendixA" | "appendix-a" | "appendix_a" => Some(Self::appendix_a()),
            _ => None,
        }
    }

    pub fn blockade(&self) -> BlockadeSpec {
        blockade_from_c6(&self.vdw).expect("preset distance is positive")
    }
}

/// Parsed contents of an interaction config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionConfig {
    pub vdw: VdwSpec,
    pub basis: RotatedBasis,
}

impl InteractionConfig {
    pub fn blockade(&self) -> Result<BlockadeSpec> {
        let b = blockade_from_c6(&self.vdw)?;
        match self.basis.beta2 {
            Some(beta2) => b.with_beta2(beta2),
            None => Ok(b),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }
}

impl std::str::FromStr for InteractionConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut c6_01 = None;
        let mut c6_02 = None;
        let mut c6_03 = None;
        let mut l = None;
        let mut beta0 = 0.0;
        let mut beta1 = PI / 4.0;
        let mut beta2 = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!("line {}: {key} is not a number", lineno + 1))
            })?;
            match key {
                "c6_01_2pi_THz_um6" => c6_01 = Some(two_pi_thz_um6(value)),
                "c6_02_2pi_THz_um6" => c6_02 = Some(two_pi_thz_um6(value)),
                "c6_03_2pi_THz_um6" => c6_03 = Some(two_pi_thz_um6(value)),
                "l_um" => l = Some(value),
                "beta0_rad" => beta0 = value,
                "beta1_rad" => beta1 = value,
                "beta2_rad" => beta2 = Some(value),
                other => {
                    return Err(Error::Config(format!("line {}: unknown key {other}", lineno + 1)))
                }
            }
        }

        let missing = |k: &str| Error::Config(format!("missing required key {k}"));
        let vdw = VdwSpec {
            c6_01: c6_01.ok_or_else(|| missing("c6_01_2pi_THz_um6"))?,
            c6_02: c6_02.ok_or_else(|| missing("c6_02_2pi_THz_um6"))?,
            c6_03,
            l: l.ok_or_else(|| missing("l_um"))?,
            c6_exchange: None,
        };
        if !(vdw.l > 0.0) {
            return Err(Error::Config(format!("l_um must be positive, got {}", vdw.l)));
        }
        if beta2.is_some() && c6_03.is_none() {
            return Err(Error::Config("beta2_rad requires c6_03_2pi_THz_um6".into()));
        }
        Ok(Self {
            vdw,
            basis: RotatedBasis { beta0, beta1, beta2 },
        })
    }
}
