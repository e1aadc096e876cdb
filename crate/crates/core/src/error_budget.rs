//! Analytic error budget and the Monte Carlo position-fluctuation estimate.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::{blockade_from_c6, NoncollinearV, VdwSpec, VDW_MIN_DISTANCE_UM};
use crate::config::{Lifetimes, TrapSpec};
use crate::error::{contract, Result};
use crate::numerics::avg_gate_fidelity;
use crate::protocols::{barenco_matrix, Protocol, ProtocolParams};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Totals above this are outside the perturbative regime of the formulas.
pub const VALIDITY_LIMIT: f64 = 0.1;

/// Minimum Monte Carlo sample count.
pub const MC_MIN_SAMPLES: usize = 1000;

/// Decay error of Protocol I:
///
/// ```text
/// E_de = [(π/Ω + T)(τ₁+τ₂)/2] / [τ₁τ₂ + sin²β₁ cos²β₁ (τ₁−τ₂)²] + (π/(2Ω) + T/2)/τ₁
/// ```
pub fn decay_error(wait: f64, omega: f64, tau1: f64, tau2: f64, beta1: f64) -> Result<f64> {
    if !(tau1 > 0.0 && tau2 > 0.0) {
        return Err(contract(format!("lifetimes must be positive, got {tau1}, {tau2}")));
    }
    let dwell = PI / omega + wait;
    Ok(target_term(dwell, tau1, tau2, beta1) + 0.5 * dwell / tau1)
}

fn target_term(dwell: f64, tau1: f64, tau2: f64, beta1: f64) -> f64 {
    let (s, c) = beta1.sin_cos();
    let mix = s * s * c * c * (tau1 - tau2).powi(2);
    dwell * 0.5 * (tau1 + tau2) / (tau1 * tau2 + mix)
}

/// Decay error for either protocol. Protocol I is [`decay_error`] with the
/// control term on `τ₁`; Protocol II uses a target Rydberg dwell of
/// `2(π/Ω + T)` and a control dwell of `2T + 5π/Ω` with the control term on
/// `tau_r1`.
pub fn decay_error_for(
    protocol: Protocol,
    wait: f64,
    omega: f64,
    l: &Lifetimes,
    beta1: f64,
) -> Result<f64> {
    match protocol {
        Protocol::I => decay_error(wait, omega, l.tau1, l.tau2, beta1),
        Protocol::II => {
            if !(l.tau1 > 0.0 && l.tau2 > 0.0 && l.tau_r1 > 0.0) {
                return Err(contract("lifetimes must be positive"));
            }
            let tp = PI / omega;
            let target = target_term(2.0 * (tp + wait), l.tau1, l.tau2, beta1);
            Ok(target + 0.5 * (2.0 * wait + 5.0 * tp) / l.tau_r1)
        }
    }
}

/// `2(V₁²+V₂²)/Ω²` for Protocol I, twice that for Protocol II.
pub fn blockade_error(v: &NoncollinearV, omega: f64, protocol: Protocol) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(contract(format!("omega must be positive, got {omega}")));
    }
    let rounds = match protocol {
        Protocol::I => 2.0,
        Protocol::II => 4.0,
    };
    Ok(rounds * (v.v1 * v.v1 + v.v2 * v.v2) / (omega * omega))
}

/// `Ω²/Δ₁² + Ω²/(2Δ₂²)`.
pub fn leakage_error(omega: f64, delta1: f64, delta2: f64) -> Result<f64> {
    if delta1 == 0.0 || delta2 == 0.0 {
        return Err(contract("leakage detunings must be nonzero"));
    }
    let o2 = omega * omega;
    Ok(o2 / (delta1 * delta1) + o2 / (2.0 * delta2 * delta2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceDrift {
    /// Newtons.
    pub force: f64,
    /// m/s.
    pub delta_v: f64,
    /// μm.
    pub delta_x: f64,
}

/// Drift from the pair force `6C₆/l⁷` acting for `t_ry` from rest.
///
/// `c6` in rad·μs⁻¹·μm⁶, `l` in μm, `t_ry` in μs, `mass` in kg.
pub fn force_drift(c6: f64, l: f64, t_ry: f64, mass: f64) -> Result<ForceDrift> {
    if !(l > 0.0) {
        return Err(contract(format!("distance must be positive, got {l}")));
    }
    if !(mass > 0.0) {
        return Err(contract(format!("mass must be positive, got {mass}")));
    }
    let c6_si = HBAR * c6 * 1e6 * 1e-36;
    let l_si = l * 1e-6;
    let t_si = t_ry * 1e-6;
    let force = 6.0 * c6_si / l_si.powi(7);
    let delta_v = force * t_si / mass;
    let delta_x = 0.5 * delta_v * t_si * 1e6;
    Ok(ForceDrift { force, delta_v, delta_x })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapSigmas {
    /// μm.
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    /// Axial anisotropy `√2 π w/λ`.
    pub xi: f64,
}

/// Thermal position spreads: `σ_x² = σ_y² = (w²/4)(T_a/U)`, `σ_z = ξσ_x`.
pub fn trap_sigmas(t: &TrapSpec) -> Result<TrapSigmas> {
    if !(t.waist_um > 0.0 && t.wavelength_um > 0.0 && t.depth_mk > 0.0) {
        return Err(contract("trap waist, wavelength and depth must be positive"));
    }
    if !(t.temperature_uk >= 0.0) {
        return Err(contract("temperature must be non-negative"));
    }
    let ratio = t.temperature_uk * 1e-3 / t.depth_mk;
    let sx = (t.waist_um * t.waist_um / 4.0 * ratio).sqrt();
    let xi = 2f64.sqrt() * PI * t.waist_um / t.wavelength_um;
    Ok(TrapSigmas {
        sigma_x: sx,
        sigma_y: sx,
        sigma_z: xi * sx,
        xi,
    })
}

/// Radial trap angular frequency (rad/s) of a Gaussian tweezer.
pub fn radial_trap_frequency(t: &TrapSpec, mass: f64) -> f64 {
    let depth_j = K_B * t.depth_mk * 1e-3;
    let w = t.waist_um * 1e-6;
    (4.0 * depth_j / (mass * w * w)).sqrt()
}

/// True when `k_B T_a / 2 < ħω`, where a thermal treatment of the position spread is doubtful.
pub fn below_thermal_regime(t: &TrapSpec, mass: f64) -> bool {
    K_B * t.temperature_uk * 1e-6 / 2.0 < HBAR * radial_trap_frequency(t, mass)
}

/// What the Monte Carlo rebuilds at every sampled distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateTemplate {
    pub protocol: Protocol,
    /// Protocol I phase.
    pub beta0: f64,
    /// Protocol II mixing angle.
    pub beta1: f64,
    /// μs.
    pub wait: f64,
}

impl GateTemplate {
    pub fn params(&self, b: &crate::atoms::BlockadeSpec) -> ProtocolParams {
        match self.protocol {
            Protocol::I => ProtocolParams::protocol1(b, self.beta0, self.wait),
            Protocol::II => ProtocolParams::protocol2(b, self.beta1, self.wait),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCResult {
    pub mean_error: f64,
    pub std_error_of_mean: f64,
    /// Samples that entered the mean.
    pub samples: usize,
    /// Samples closer than the van der Waals limit, excluded from the mean.
    pub invalid_samples: usize,
    pub seed: u64,
}

/// Infidelity from thermal position spread.
///
/// Each sample displaces both atoms by independent Gaussians with the trap's
/// `(σ_x, σ_y, σ_z)`; the atoms sit on the x axis and the beams run along z.
/// The closed-form gate at the sampled distance is compared with the
/// nominal one by average gate fidelity. Sample `i` draws from the ChaCha
/// stream `i` of `seed`, so the result does not depend on the thread count.
pub fn mc_position_error(
    template: &GateTemplate,
    vdw: &VdwSpec,
    trap: &TrapSpec,
    samples: usize,
    seed: u64,
) -> Result<MCResult> {
    if samples < MC_MIN_SAMPLES {
        return Err(contract(format!("need at least {MC_MIN_SAMPLES} samples, got {samples}")));
    }
    let sig = trap_sigmas(trap)?;
    let nominal = barenco_matrix(&template.params(&blockade_from_c6(vdw)?).angles()?.angles);
    let sigmas = [sig.sigma_x, sig.sigma_y, sig.sigma_z];

    let draws: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut d = [0.0; 6];
            for x in d.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let dx = vdw.l + sigmas[0] * (d[3] - d[0]);
            let dy = sigmas[1] * (d[4] - d[1]);
            let dz = sigmas[2] * (d[5] - d[2]);
            let r = (dx * dx + dy * dy + dz * dz).sqrt();
            if r < VDW_MIN_DISTANCE_UM {
                return Ok(None);
            }
            let b = blockade_from_c6(&vdw.with_distance(r))?;
            let gate = barenco_matrix(&template.params(&b).angles()?.angles);
            let f = avg_gate_fidelity(&gate, &nominal, &[0, 1, 2, 3])?;
            Ok(Some(1.0 - f))
        })
        .collect::<Result<_>>()?;

    let valid: Vec<f64> = draws.iter().flatten().copied().collect();
    let n = valid.len();
    let invalid = samples - n;
    if n < 2 {
        return Err(contract("too few valid Monte Carlo samples"));
    }
    let mean = valid.iter().sum::<f64>() / n as f64;
    let var = valid.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(MCResult {
        mean_error: mean,
        std_error_of_mean: (var / n as f64).sqrt(),
        samples: n,
        invalid_samples: invalid,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub e_decay: f64,
    pub e_blockade: f64,
    pub e_leakage: f64,
    pub total: f64,
    pub warning: Option<String>,
}

impl ErrorBudget {
    pub fn new(e_decay: f64, e_blockade: f64, e_leakage: f64) -> Self {
        let total = e_decay + e_blockade + e_leakage;
        let warning = (total > VALIDITY_LIMIT).then(|| {
            format!("total error {total:.3e} exceeds {VALIDITY_LIMIT}; the estimates are no longer perturbative")
        });
        Self {
            e_decay,
            e_blockade,
            e_leakage,
            total,
            warning,
        }
    }
}

/// Inputs to [`total_budget`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetInputs {
    pub protocol: Protocol,
    /// μs.
    pub wait: f64,
    /// rad·μs⁻¹.
    pub omega: f64,
    pub interaction: NoncollinearV,
    pub beta1: f64,
    pub lifetimes: Lifetimes,
    /// rad·μs⁻¹.
    pub delta1: f64,
    pub delta2: f64,
}

/// Decay + blockade + leakage.
///
/// ```
/// use barenco::config::Preset;
/// use barenco::error_budget::{total_budget, BudgetInputs};
/// use barenco::protocols::{Protocol, ProtocolParams};
/// use barenco::units::two_pi_mhz;
/// let pre = Preset::appendix_a();
/// let p = ProtocolParams::protocol1(&pre.blockade(), 0.0, 0.5);
/// let budget = total_budget(&BudgetInputs {
///     protocol: Protocol::I,
///     wait: 0.5,
///     omega: two_pi_mhz(30.0),
///     interaction: p.interaction,
///     beta1: std::f64::consts::FRAC_PI_4,
///     lifetimes: pre.lifetimes,
///     delta1: pre.delta1,
///     delta2: pre.delta2,
/// }).unwrap();
/// assert!((budget.total - 2.1e-3).abs() < 0.1e-3);
/// ```
pub fn total_budget(inp: &BudgetInputs) -> Result<ErrorBudget> {
    let e_decay = decay_error_for(inp.protocol, inp.wait, inp.omega, &inp.lifetimes, inp.beta1)?;
    let e_blockade = blockade_error(&inp.interaction, inp.omega, inp.protocol)?;
    let e_leakage = leakage_error(inp.omega, inp.delta1, inp.delta2)?;
    Ok(ErrorBudget::new(e_decay, e_blockade, e_leakage))
}
