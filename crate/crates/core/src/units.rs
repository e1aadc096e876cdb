//! Unit conversions at the library boundary.
//!
//! Everything inside the crate is an angular frequency in rad·μs⁻¹ with
//! ħ = 1, and every duration is in μs. Quoted values of the form
//! "X × 2π MHz" therefore become `2π·X` internally.

use std::f64::consts::PI;

/// `x × 2π MHz` → rad·μs⁻¹.
pub fn two_pi_mhz(x: f64) -> f64 {
    2.0 * PI * x
}

/// `x × 2π kHz` → rad·μs⁻¹.
pub fn two_pi_khz(x: f64) -> f64 {
    2.0 * PI * x * 1e-3
}

/// `x × 2π GHz` → rad·μs⁻¹.
pub fn two_pi_ghz(x: f64) -> f64 {
    2.0 * PI * x * 1e3
}

/// `x × 2π THz·μm⁶` → rad·μs⁻¹·μm⁶.
pub fn two_pi_thz_um6(x: f64) -> f64 {
    2.0 * PI * x * 1e6
}

/// rad·μs⁻¹ → multiples of 2π MHz.
pub fn to_two_pi_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// rad·μs⁻¹ → multiples of 2π kHz.
pub fn to_two_pi_khz(omega: f64) -> f64 {
    omega / (2.0 * PI) * 1e3
}

/// Parses an angle in radians, or in multiples of π with a `pi` suffix
/// (`"0.25pi"`, `"-pi"`, `"3/8pi"`).
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.strip_suffix("pi").or_else(|| s.strip_suffix('π')) {
        Some(head) => {
            let head = head.trim().trim_end_matches('*');
            let factor = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => parse_ratio(h)?,
            };
            Some(factor * PI)
        }
        None => s.parse().ok(),
    }
}

fn parse_ratio(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = match num.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                n => n.parse().ok()?,
            };
            let den: f64 = den.trim().parse().ok()?;
            Some(num / den)
        }
        None => s.parse().ok(),
    }
}
