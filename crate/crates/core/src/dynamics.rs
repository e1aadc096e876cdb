//! Finite-Ω pulse-level simulation on the 12-dimensional two-atom space.
//!
//! Control levels `{|0⟩, |1⟩, |r₁⟩}`, target levels `{|0⟩, |1⟩, |R₁⟩, |R₂⟩}`,
//! index `4·control + target`. Lasers are resonant with square envelopes in
//! the rotating frame, so every level energy is zero and only the couplings
//! and the blockade shifts `b01` (on `|r₁R₁⟩`) and `b02` (on `|r₁R₂⟩`) remain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::atoms::{BlockadeSpec, RotatedBasis};
use crate::config::Lifetimes;
use crate::error::{contract, Result};
use crate::numerics::{avg_gate_fidelity, propagate, propagate_general, CMatrix};
use crate::protocols::{
    barenco_matrix, extract_angles, ExtractedAngles, GateAngles, Protocol, ProtocolParams,
    COMPUTATIONAL,
};

/// Dimension of the two-atom space.
pub const DIM: usize = 12;

const CONTROL_LEVELS: usize = 3;
const TARGET_LEVELS: usize = 4;
const R1R1: usize = 4 * 2 + 2;
const R1R2: usize = 4 * 2 + 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Pulse,
    Wait,
}

/// One piecewise-constant step.
///
/// Couplings are `(A/2)|e⟩⟨g| + h.c.` with complex amplitude `A` (rad·μs⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    /// μs.
    pub duration: f64,
    /// `|1⟩ ↔ |r₁⟩` on the control atom.
    pub control_rabi: Complex64,
    /// Target couplings `0↔R₁`, `0↔R₂`, `1↔R₁`, `1↔R₂`.
    pub target_rabi: [Complex64; 4],
}

impl PulseSegment {
    pub fn wait(duration: f64) -> Self {
        Self {
            kind: SegmentKind::Wait,
            duration,
            control_rabi: Complex64::new(0.0, 0.0),
            target_rabi: [Complex64::new(0.0, 0.0); 4],
        }
    }
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Rabi frequency Ω in rad·μs⁻¹.
    pub omega: f64,
    pub include_interaction_during_pulses: bool,
    /// Adds `−i/(2τ)` on each Rydberg level when present.
    pub decay: Option<Lifetimes>,
    /// Runs Protocol II's first two and last two pulses simultaneously.
    pub merge_pulses: bool,
}

impl SimConfig {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            include_interaction_during_pulses: true,
            decay: None,
            merge_pulses: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(contract(format!("omega must be positive, got {}", self.omega)));
        }
        if let Some(l) = self.decay {
            if !(l.tau1 > 0.0 && l.tau2 > 0.0 && l.tau_r1 > 0.0) {
                return Err(contract("lifetimes must be positive"));
            }
        }
        Ok(())
    }
}

/// Target amplitudes driving `|0⟩ ↔ |r₂⟩` and `|1⟩ ↔ |r₃⟩` (or the swapped
/// pairs) at Rabi frequency `rabi`, written in the `|R₁⟩, |R₂⟩` basis.
fn target_amplitudes(basis: &RotatedBasis, rabi: f64, swapped: bool) -> [Complex64; 4] {
    let (s, c) = basis.beta1.sin_cos();
    let e = Complex64::from_polar(1.0, basis.beta0);
    let r2 = [Complex64::new(c, 0.0), e * s];
    let r3 = [e.conj() * s, Complex64::new(-c, 0.0)];
    let (for0, for1) = if swapped { (r3, r2) } else { (r2, r3) };
    [for0[0] * rabi, for0[1] * rabi, for1[0] * rabi, for1[1] * rabi]
}

fn pulse(duration: f64, control: f64, target: [Complex64; 4]) -> PulseSegment {
    PulseSegment {
        kind: SegmentKind::Pulse,
        duration,
        control_rabi: Complex64::new(control, 0.0),
        target_rabi: target,
    }
}

/// The segment list for a protocol.
///
/// The target's rotated basis is recovered from `b` and the interaction block.
pub fn build_sequence(
    p: &ProtocolParams,
    b: &BlockadeSpec,
    cfg: &SimConfig,
) -> Result<Vec<PulseSegment>> {
    p.validate()?;
    cfg.validate()?;
    let basis = RotatedBasis::recover(b, &p.interaction)?;
    let om = cfg.omega;
    let tp = PI / om;
    let none = [Complex64::new(0.0, 0.0); 4];
    let tgt = |sign: f64, swapped| target_amplitudes(&basis, sign * om, swapped);

    let seq = match p.protocol {
        Protocol::I => vec![
            pulse(tp, om, tgt(1.0, false)),
            PulseSegment::wait(p.wait),
            pulse(tp, om, tgt(-1.0, false)),
        ],
        Protocol::II if cfg.merge_pulses => vec![
            pulse(tp, om, tgt(1.0, false)),
            PulseSegment::wait(p.wait),
            pulse(tp, 0.0, tgt(1.0, false)),
            pulse(tp, 0.0, tgt(1.0, true)),
            PulseSegment::wait(p.wait),
            pulse(tp, -om, tgt(1.0, true)),
        ],
        Protocol::II => vec![
            pulse(tp, om, none),
            pulse(tp, 0.0, tgt(1.0, false)),
            PulseSegment::wait(p.wait),
            pulse(tp, 0.0, tgt(1.0, false)),
            pulse(tp, 0.0, tgt(1.0, true)),
            PulseSegment::wait(p.wait),
            pulse(tp, 0.0, tgt(1.0, true)),
            pulse(tp, -om, none),
        ],
    };
    Ok(seq)
}

/// Hermitian generator of one segment. The blockade diagonal is present in
/// wait segments always and in pulses when `interaction_during_pulses`.
pub fn build_hamiltonian(
    seg: &PulseSegment,
    b: &BlockadeSpec,
    interaction_during_pulses: bool,
) -> CMatrix {
    let mut h = CMatrix::zeros(DIM);
    let half = 0.5;
    for t in 0..TARGET_LEVELS {
        let (g, e) = (4 + t, 8 + t);
        h[(e, g)] += seg.control_rabi * half;
        h[(g, e)] += seg.control_rabi.conj() * half;
    }
    let pairs = [(0, 2), (0, 3), (1, 2), (1, 3)];
    for c in 0..CONTROL_LEVELS {
        for (&(g, e), &amp) in pairs.iter().zip(&seg.target_rabi) {
            let (g, e) = (4 * c + g, 4 * c + e);
            h[(e, g)] += amp * half;
            h[(g, e)] += amp.conj() * half;
        }
    }
    if seg.kind == SegmentKind::Wait || interaction_during_pulses {
        h[(R1R1, R1R1)] += Complex64::new(b.b01, 0.0);
        h[(R1R2, R1R2)] += Complex64::new(b.b02, 0.0);
    }
    h
}

/// `−i/(2τ)` on every Rydberg level.
fn decay_term(l: &Lifetimes) -> CMatrix {
    let mut rates = [0.0; DIM];
    for c in 0..CONTROL_LEVELS {
        for t in 0..TARGET_LEVELS {
            let mut g = 0.0;
            if c == 2 {
                g += 1.0 / l.tau_r1;
            }
            if t == 2 {
                g += 1.0 / l.tau1;
            }
            if t == 3 {
                g += 1.0 / l.tau2;
            }
            rates[4 * c + t] = g;
        }
    }
    let diag: Vec<Complex64> = rates.iter().map(|&g| Complex64::new(0.0, -0.5 * g)).collect();
    CMatrix::diagonal(&diag)
}

/// Result of a pulse-level run.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub segments: Vec<PulseSegment>,
    pub u_sim: CMatrix,
    /// `u_sim` on `{|00⟩, |01⟩, |10⟩, |11⟩}`.
    pub u_qubit: CMatrix,
    /// Closed-form angles the run is compared against.
    pub angles: GateAngles,
    pub fidelity: f64,
    /// Angles fitted to `u_qubit`.
    pub extracted: ExtractedAngles,
    /// Mean population left in the computational subspace, `Tr(U†U)/4`.
    pub population: f64,
}

impl SimResult {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Runs the segment list and compares against the closed-form gate.
///
/// ```
/// use barenco::atoms::BlockadeSpec;
/// use barenco::dynamics::{simulate, SimConfig};
/// use barenco::protocols::ProtocolParams;
/// use barenco::units::two_pi_mhz;
/// let b = BlockadeSpec::new(two_pi_mhz(0.558), two_pi_mhz(-0.157));
/// let p = ProtocolParams::protocol1(&b, 0.0, 0.5);
/// let r = simulate(&p, &b, &SimConfig::new(two_pi_mhz(30.0))).unwrap();
/// assert!(r.infidelity() > 1e-5 && r.infidelity() < 1e-3);
/// ```
pub fn simulate(p: &ProtocolParams, b: &BlockadeSpec, cfg: &SimConfig) -> Result<SimResult> {
    let segments = build_sequence(p, b, cfg)?;
    let decay = cfg.decay.as_ref().map(decay_term);
    let mut u = CMatrix::identity(DIM);
    for seg in &segments {
        let h = build_hamiltonian(seg, b, cfg.include_interaction_during_pulses);
        let step = match &decay {
            Some(d) => propagate_general(&(&h + d), seg.duration)?,
            None => propagate(&h, seg.duration)?,
        };
        u = &step * &u;
    }
    let u_qubit = u.restrict(&COMPUTATIONAL);
    let angles = p.angles()?.angles;
    let fidelity = avg_gate_fidelity(&u_qubit, &barenco_matrix(&angles), &[0, 1, 2, 3])?;
    let extracted = extract_angles(&u_qubit)?;
    let population = (&u_qubit.adjoint() * &u_qubit).trace().re / 4.0;
    Ok(SimResult {
        segments,
        u_sim: u,
        u_qubit,
        angles,
        fidelity,
        extracted,
        population,
    })
}
