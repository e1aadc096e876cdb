//! Closed-form gate construction.
//!
//! The Barenco gate on `{|00⟩, |01⟩, |10⟩, |11⟩}` is the identity on the
//! first two states and
//!
//! ```text
//! [ e^{iα} cos θ              −i e^{i(α−φ)} sin θ ]
//! [ −i e^{i(α+φ)} sin θ       e^{iα} cos θ        ]
//! ```
//!
//! on `|10⟩, |11⟩`. Two pulse protocols realize it from a non-collinear
//! interaction: Protocol I (three segments, `V₁ = V₂`) and Protocol II
//! (six pulses and two waits, `β₀ = 0`). [`compose_ideal`] multiplies the
//! ideal pulse maps and wait propagators on the full two-atom space and is
//! the reference every closed form here is tested against.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::atoms::{noncollinear_from_blockade, BlockadeSpec, NoncollinearV, RotatedBasis};
use crate::error::{contract, Error, Result};
use crate::numerics::{frobenius_distance_mod_phase, propagate, CMatrix};

/// Angles closer than this to a range boundary are snapped onto it.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Relative tolerance for the `V₁ = V₂` precondition of Protocol I.
pub const PROTOCOL1_SYMMETRY_TOL: f64 = 1e-9;

/// Computational states inside the 12-dimensional two-atom space.
pub const COMPUTATIONAL: [usize; 4] = [0, 1, 4, 5];

const TWO_PI: f64 = 2.0 * PI;

/// Reduces an angle into `(−π, π]`. Values already in range are returned unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angle_residual(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// `(α, θ, φ)` of the Barenco gate, in radians.
///
/// Canonical form: `θ ∈ [0, π/2]`, `α, φ ∈ (−π, π]`; at `θ = π/2` also
/// `α ∈ (−π/2, π/2]`; at `θ = 0`, `φ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateAngles {
    pub alpha: f64,
    pub theta: f64,
    pub phi: f64,
}

impl GateAngles {
    pub fn new(alpha: f64, theta: f64, phi: f64) -> Self {
        Self { alpha, theta, phi }
    }

    /// The canonical representative of the same gate.
    ///
    /// ```
    /// use barenco::protocols::GateAngles;
    /// use std::f64::consts::PI;
    /// let a = GateAngles::new(0.3, -0.4, 0.1).canonical();
    /// assert!((a.theta - 0.4).abs() < 1e-15);
    /// assert!((a.phi - (0.1 + PI - 2.0 * PI)).abs() < 1e-15);
    /// ```
    pub fn canonical(&self) -> Self {
        let mut alpha = self.alpha;
        let mut theta = wrap_angle(self.theta);
        let mut phi = self.phi;
        if theta < 0.0 {
            theta = -theta;
            phi += PI;
        }
        if theta > FRAC_PI_2 {
            theta = PI - theta;
            alpha += PI;
            phi += PI;
        }
        alpha = wrap_angle(alpha);
        phi = wrap_angle(phi);
        if theta <= BOUNDARY_TOL {
            theta = 0.0;
            phi = 0.0;
        } else if FRAC_PI_2 - theta <= BOUNDARY_TOL {
            theta = FRAC_PI_2;
            if alpha > FRAC_PI_2 {
                alpha -= PI;
                phi = wrap_angle(phi + PI);
            } else if alpha <= -FRAC_PI_2 {
                alpha += PI;
                phi = wrap_angle(phi + PI);
            }
        }
        Self { alpha: alpha + 0.0, theta: theta + 0.0, phi: phi + 0.0 }
    }

    /// True when `θ = 0`, where φ carries no information.
    pub fn phi_undefined(&self) -> bool {
        self.canonical().theta == 0.0
    }

    /// The four triples in `(−π, π]³` related by `(θ, φ) ~ (−θ, φ+π)` and
    /// `(α, θ, φ) ~ (α+π, π−θ, φ+π)`, all giving the same matrix.
    pub fn representations(&self) -> [Self; 4] {
        let Self { alpha, theta, phi } = *self;
        [
            Self::new(wrap_angle(alpha), wrap_angle(theta), wrap_angle(phi)),
            Self::new(wrap_angle(alpha), wrap_angle(-theta), wrap_angle(phi + PI)),
            Self::new(wrap_angle(alpha + PI), wrap_angle(PI - theta), wrap_angle(phi + PI)),
            Self::new(wrap_angle(alpha + PI), wrap_angle(theta - PI), wrap_angle(phi)),
        ]
    }

    /// Largest componentwise angular distance between the canonical forms.
    /// φ is ignored when either side has `θ = 0`.
    pub fn max_residual(&self, other: &GateAngles) -> f64 {
        let (a, b) = (self.canonical(), other.canonical());
        let mut r = angle_residual(a.alpha, b.alpha).max((a.theta - b.theta).abs());
        if a.theta != 0.0 && b.theta != 0.0 {
            r = r.max(angle_residual(a.phi, b.phi));
        }
        r
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The 4×4 Barenco gate.
pub fn barenco_matrix(a: &GateAngles) -> CMatrix {
    let (s, cs) = a.theta.sin_cos();
    let minus_i = c(0.0, -1.0);
    let mut u = CMatrix::identity(4);
    let diag = Complex64::from_polar(cs, a.alpha);
    u[(2, 2)] = diag;
    u[(3, 3)] = diag;
    u[(2, 3)] = minus_i * Complex64::from_polar(s, a.alpha - a.phi);
    u[(3, 2)] = minus_i * Complex64::from_polar(s, a.alpha + a.phi);
    u
}

/// The `(α, φ) = (π/4, π/2)` specialization.
pub fn b1_matrix(theta: f64) -> CMatrix {
    barenco_matrix(&GateAngles::new(FRAC_PI_4, theta, FRAC_PI_2))
}

pub fn cnot_matrix() -> CMatrix {
    CMatrix::from_real_rows(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}

/// Controlled-Y as `|10⟩ ↦ −i|11⟩`, `|11⟩ ↦ i|10⟩`.
pub fn controlled_y_matrix() -> CMatrix {
    let mut u = CMatrix::identity(4);
    u[(2, 2)] = c(0.0, 0.0);
    u[(3, 3)] = c(0.0, 0.0);
    u[(3, 2)] = c(0.0, -1.0);
    u[(2, 3)] = c(0.0, 1.0);
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Protocol {
    I,
    II,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::I => "I",
            Protocol::II => "II",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "I" | "i" => Ok(Protocol::I),
            "2" | "II" | "ii" => Ok(Protocol::II),
            other => Err(Error::Config(format!("unknown protocol {other:?} (expected 1 or 2)"))),
        }
    }
}

/// A protocol, its interaction block and the wait time `T` (μs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub protocol: Protocol,
    pub interaction: NoncollinearV,
    pub wait: f64,
}

impl ProtocolParams {
    /// Protocol I uses the `β₁ = π/4` basis, which makes `V₁ = V₂`.
    pub fn protocol1(b: &BlockadeSpec, beta0: f64, wait: f64) -> Self {
        Self {
            protocol: Protocol::I,
            interaction: noncollinear_from_blockade(b, &RotatedBasis::new(beta0, FRAC_PI_4)),
            wait,
        }
    }

    pub fn protocol2(b: &BlockadeSpec, beta1: f64, wait: f64) -> Self {
        Self {
            protocol: Protocol::II,
            interaction: noncollinear_from_blockade(b, &RotatedBasis::new(0.0, beta1)),
            wait,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.interaction;
        if !(self.wait >= 0.0) || !self.wait.is_finite() {
            return Err(contract(format!("wait time must be finite and >= 0, got {}", self.wait)));
        }
        if ![v.v1, v.v2, v.ve, v.beta0].iter().all(|x| x.is_finite()) {
            return Err(contract("interaction has non-finite entries"));
        }
        match self.protocol {
            Protocol::I => {
                let scale = v.v1.abs().max(v.v2.abs()).max(v.ve.abs());
                if (v.v1 - v.v2).abs() > PROTOCOL1_SYMMETRY_TOL * scale {
                    return Err(contract(format!(
                        "protocol I needs V1 = V2, got V1 = {}, V2 = {}",
                        v.v1, v.v2
                    )));
                }
            }
            Protocol::II => {
                if v.beta0.abs() > BOUNDARY_TOL {
                    return Err(contract(format!("protocol II needs beta0 = 0, got {}", v.beta0)));
                }
            }
        }
        Ok(())
    }

    /// Closed-form angles for this protocol.
    pub fn angles(&self) -> Result<AngleReport> {
        self.validate()?;
        match self.protocol {
            Protocol::I => Ok(protocol1_angles_from_v(&self.interaction, self.wait)),
            Protocol::II => protocol2_angles(&self.interaction, self.wait),
        }
    }
}

/// Closed-form angles, before and after canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleReport {
    /// Values as the closed form produces them.
    pub raw: GateAngles,
    /// Canonical representative.
    pub angles: GateAngles,
    pub phi_undefined: bool,
    /// The gate cannot entangle for any wait time.
    pub non_entangling: bool,
    /// `(b01 + b02)/(b01 − b02)` in `α = π − slope·θ` (Protocol I only).
    pub slope: Option<f64>,
}

impl AngleReport {
    fn from_raw(raw: GateAngles, non_entangling: bool, slope: Option<f64>) -> Self {
        let angles = raw.canonical();
        Self {
            raw,
            angles,
            phi_undefined: angles.theta == 0.0,
            non_entangling,
            slope,
        }
    }
}

/// Protocol I angles from the blockade shifts:
/// `α = π − (b01+b02)T/2`, `θ = (b01−b02)T/2`, `φ = β₀`.
///
/// ```
/// use barenco::atoms::BlockadeSpec;
/// use barenco::protocols::protocol1_angles;
/// use std::f64::consts::PI;
/// let b = BlockadeSpec::new(1.0, 0.0);
/// let r = protocol1_angles(&b, PI, 0.0).unwrap();
/// assert!((r.angles.alpha - PI / 2.0).abs() < 1e-12);
/// assert!((r.angles.theta - PI / 2.0).abs() < 1e-12);
/// ```
pub fn protocol1_angles(b: &BlockadeSpec, wait: f64, beta0: f64) -> Result<AngleReport> {
    if !(wait >= 0.0) || !wait.is_finite() {
        return Err(contract(format!("wait time must be finite and >= 0, got {wait}")));
    }
    let db = b.b01 - b.b02;
    let theta = 0.5 * db * wait;
    let alpha = PI - 0.5 * (b.b01 + b.b02) * wait;
    let slope = if db != 0.0 { Some((b.b01 + b.b02) / db) } else { None };
    Ok(AngleReport::from_raw(GateAngles::new(alpha, theta, beta0), db == 0.0, slope))
}

/// Protocol I angles from an interaction block with `V₁ = V₂ = V`:
/// `α = π − V·T`, `θ = V_e·T`, `φ = β₀`.
pub fn protocol1_angles_from_v(v: &NoncollinearV, wait: f64) -> AngleReport {
    let vmean = 0.5 * (v.v1 + v.v2);
    let raw = GateAngles::new(PI - vmean * wait, v.ve * wait, v.beta0);
    let slope = if v.ve != 0.0 { Some(vmean / v.ve) } else { None };
    AngleReport::from_raw(raw, v.ve == 0.0, slope)
}

/// The sin/cos values Protocol II's closed form produces, kept for consistency checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Protocol2Trig {
    pub sin_theta: f64,
    pub cos_theta: f64,
    pub sin_phi: f64,
    pub cos_phi: f64,
}

/// Protocol II angles from the spectral data of the block:
///
/// ```text
/// α = −T(V₁+V₂)
/// sin θ = 2η₁η₂ sqrt((η₁²−η₂²)²(cos 2TV̄ − 1)² + sin² 2TV̄)
/// cos θ = 1 + 4η₁²η₂²(cos 2TV̄ − 1)
/// sin φ = 2η₁η₂(η₁²−η₂²)(cos 2TV̄ − 1)/|sin θ|
/// cos φ = 2η₁η₂ sin 2TV̄ / |sin θ|
/// ```
///
/// The φ expressions do not see the sign of `V_e`; for `V_e < 0` the gate
/// has φ shifted by π, which is applied here.
pub fn protocol2_angles(v: &NoncollinearV, wait: f64) -> Result<AngleReport> {
    Ok(protocol2_angles_with_trig(v, wait)?.0)
}

pub fn protocol2_angles_with_trig(
    v: &NoncollinearV,
    wait: f64,
) -> Result<(AngleReport, Protocol2Trig)> {
    if !(wait >= 0.0) || !wait.is_finite() {
        return Err(contract(format!("wait time must be finite and >= 0, got {wait}")));
    }
    if v.beta0.abs() > BOUNDARY_TOL {
        return Err(contract(format!("protocol II needs beta0 = 0, got {}", v.beta0)));
    }
    let s = v.spectral();
    let (e1, e2) = (s.eta1, s.eta2);
    let (sn, cs) = (2.0 * wait * s.vbar).sin_cos();
    let cm1 = cs - 1.0;
    let d = e1 * e1 - e2 * e2;
    let sin_theta = 2.0 * e1 * e2 * ((d * cm1).powi(2) + sn * sn).sqrt();
    let cos_theta = 1.0 + 4.0 * e1 * e1 * e2 * e2 * cm1;
    let alpha = -wait * (v.v1 + v.v2);
    let theta = sin_theta.atan2(cos_theta);

    let (sin_phi, cos_phi, phi) = if sin_theta.abs() <= BOUNDARY_TOL {
        (0.0, 1.0, 0.0)
    } else {
        let sp = 2.0 * e1 * e2 * d * cm1 / sin_theta.abs();
        let cp = 2.0 * e1 * e2 * sn / sin_theta.abs();
        let mut phi = sp.atan2(cp);
        if e1 * e2 < 0.0 {
            phi += PI;
        }
        (sp, cp, phi)
    };

    let raw = GateAngles::new(alpha, theta, phi);
    let mut report = AngleReport::from_raw(raw, v.ve == 0.0, None);
    if sin_theta.abs() <= BOUNDARY_TOL {
        report.phi_undefined = true;
    }
    let trig = Protocol2Trig {
        sin_theta,
        cos_theta,
        sin_phi,
        cos_phi,
    };
    Ok((report, trig))
}

/// Single-atom π-pulse map on the listed level pairs: `|a⟩ ↦ f|b⟩`, `|b⟩ ↦ f|a⟩`,
/// identity elsewhere. `f = −i` for `+Ω`, `+i` for `−Ω`.
fn pi_map(dim: usize, pairs: &[(usize, usize)], f: Complex64) -> CMatrix {
    let mut m = CMatrix::identity(dim);
    for &(a, b) in pairs {
        m[(a, a)] = c(0.0, 0.0);
        m[(b, b)] = c(0.0, 0.0);
        m[(a, b)] = f;
        m[(b, a)] = f;
    }
    m
}

/// Ideal gate on the computational basis from exact π-pulse maps and wait
/// propagators. Control levels `{|0⟩, |1⟩, |r₁⟩}`, target levels
/// `{|0⟩, |1⟩, |r₂⟩, |r₃⟩}`; a two-atom index is `4·control + target`.
pub fn compose_ideal(p: &ProtocolParams) -> Result<CMatrix> {
    p.validate()?;
    let plus = c(0.0, -1.0);
    let minus = c(0.0, 1.0);
    let id_c = CMatrix::identity(3);
    let id_t = CMatrix::identity(4);
    let ctrl = |f| pi_map(3, &[(1, 2)], f);
    let tgt = |f| pi_map(4, &[(0, 2), (1, 3)], f);
    let tgt_swapped = |f| pi_map(4, &[(0, 3), (1, 2)], f);

    let mut h = CMatrix::zeros(12);
    let block = p.interaction.block();
    for i in 0..2 {
        for j in 0..2 {
            h[(10 + i, 10 + j)] = block[(i, j)];
        }
    }
    let w = propagate(&h, p.wait)?;

    let steps: Vec<CMatrix> = match p.protocol {
        Protocol::I => vec![
            ctrl(plus).kron(&tgt(plus)),
            w,
            ctrl(plus).kron(&tgt(minus)),
        ],
        Protocol::II => {
            let p2 = id_c.kron(&tgt(plus));
            let p4 = id_c.kron(&tgt_swapped(plus));
            vec![
                ctrl(plus).kron(&id_t),
                p2.clone(),
                w.clone(),
                p2,
                p4.clone(),
                w,
                p4,
                ctrl(minus).kron(&id_t),
            ]
        }
    };
    let total = steps.iter().fold(CMatrix::identity(12), |acc, s| s * &acc);
    Ok(total.restrict(&COMPUTATIONAL))
}

/// Gates with a dedicated constructor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpecialKind {
    Cnot,
    ControlledY,
    /// Protocol II route; `beta1` stays free under the ratio condition.
    B1 { beta1: f64 },
}

impl SpecialKind {
    pub const DEFAULT_B1_BETA1: f64 = 0.3;
}

impl FromStr for SpecialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cnot" => Ok(SpecialKind::Cnot),
            "cy" | "controlled-y" => Ok(SpecialKind::ControlledY),
            "b1" => Ok(SpecialKind::B1 {
                beta1: Self::DEFAULT_B1_BETA1,
            }),
            other => Err(Error::Config(format!("unknown special gate {other:?}"))),
        }
    }
}

/// Parameters realizing a named gate with the given blockade shifts.
///
/// CNOT and Controlled-Y need `b02 = 0 < b01` and use `T = π/b01`. B₁ needs
/// `b01 + b02 = −|b01 − b02|/4` and uses `T = π/(2V̄)`.
pub fn special_gate(kind: SpecialKind, b: &BlockadeSpec) -> Result<ProtocolParams> {
    if !b.is_finite() {
        return Err(contract("blockade shifts must be finite"));
    }
    match kind {
        SpecialKind::Cnot | SpecialKind::ControlledY => {
            if !(b.b01 > 0.0) {
                return Err(Error::Infeasible(format!("CNOT/CY need b01 > 0, got {}", b.b01)));
            }
            if b.b02.abs() > 1e-12 * b.b01 {
                return Err(Error::Infeasible(format!("CNOT/CY need b02 = 0, got {}", b.b02)));
            }
            let beta0 = if kind == SpecialKind::Cnot { 0.0 } else { -FRAC_PI_2 };
            Ok(ProtocolParams::protocol1(b, beta0, PI / b.b01))
        }
        SpecialKind::B1 { beta1 } => {
            let d = (b.b01 - b.b02).abs();
            if d == 0.0 {
                return Err(Error::Infeasible("B1 needs b01 != b02".into()));
            }
            let sum = b.b01 + b.b02;
            if (sum + 0.25 * d).abs() > 1e-9 * d {
                return Err(Error::Infeasible(format!(
                    "B1 needs b01 + b02 = -|b01 - b02|/4 (-b01/b02 = 5/3 with b01 < 0, \
                     or 3/5 with b01 > 0); got -b01/b02 = {}",
                    -b.b01 / b.b02
                )));
            }
            let (canon, _) = RotatedBasis::new(0.0, beta1).canonical();
            let edge = canon.beta1.min(FRAC_PI_2 - canon.beta1).min((canon.beta1 - FRAC_PI_4).abs());
            if edge <= 1e-9 {
                return Err(Error::Infeasible(format!(
                    "B1 needs beta1 away from multiples of pi/4, got {beta1}"
                )));
            }
            let p = ProtocolParams::protocol2(b, beta1, PI / d);
            Ok(p)
        }
    }
}

/// Angles fitted to a 4×4 gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractedAngles {
    pub angles: GateAngles,
    /// Frobenius distance to the Barenco gate of `angles`, minimized over a global phase.
    pub residual: f64,
    pub phi_undefined: bool,
}

/// Inverse of [`barenco_matrix`].
///
/// ```
/// use barenco::protocols::{barenco_matrix, extract_angles, GateAngles};
/// let a = GateAngles::new(0.7, 0.4, -1.1);
/// let e = extract_angles(&barenco_matrix(&a)).unwrap();
/// assert!(e.residual < 1e-12);
/// assert!(e.angles.max_residual(&a) < 1e-12);
/// ```
pub fn extract_angles(u: &CMatrix) -> Result<ExtractedAngles> {
    if u.dim() != 4 {
        return Err(contract(format!("extract_angles expects a 4x4 gate, got {}", u.dim())));
    }
    if !u.is_finite() {
        return Err(contract("gate has non-finite entries"));
    }
    let g = u[(0, 0)] + u[(1, 1)];
    let phase = if g.norm() > 0.0 { g.conj() / g.norm() } else { c(1.0, 0.0) };
    let v = u.scale(phase);

    let cos_part = 0.5 * (v[(2, 2)].norm() + v[(3, 3)].norm());
    let sin_part = 0.5 * (v[(2, 3)].norm() + v[(3, 2)].norm());
    let theta = sin_part.atan2(cos_part);

    let alpha = if cos_part > 1e-9 {
        (v[(2, 2)] + v[(3, 3)]).arg()
    } else {
        let det = v[(2, 2)] * v[(3, 3)] - v[(2, 3)] * v[(3, 2)];
        0.5 * det.arg()
    };
    let phi = if sin_part > BOUNDARY_TOL {
        v[(3, 2)].arg() - alpha + FRAC_PI_2
    } else {
        0.0
    };

    let angles = GateAngles::new(alpha, theta, phi).canonical();
    let residual = frobenius_distance_mod_phase(u, &barenco_matrix(&angles));
    Ok(ExtractedAngles {
        angles,
        residual,
        phi_undefined: angles.theta == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_deviation_mod_phase;
    use crate::units::two_pi_mhz;
    use proptest::prelude::*;

    fn appendix_b() -> BlockadeSpec {
        BlockadeSpec::new(two_pi_mhz(0.558), two_pi_mhz(-0.157))
    }

    #[test]
    fn barenco_examples() {
        let id = barenco_matrix(&GateAngles::new(0.0, 0.0, 0.0));
        assert!(id.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
        let cnot = barenco_matrix(&GateAngles::new(FRAC_PI_2, FRAC_PI_2, 0.0));
        assert!(cnot.max_abs_diff(&cnot_matrix()) < 1e-15);
        let th = 0.37;
        let b1 = b1_matrix(th);
        let expect = Complex64::new(0.0, 1.0) * Complex64::from_polar(th.sin(), -FRAC_PI_4);
        assert!((b1[(3, 2)] - expect).norm() < 1e-15);
        assert!(barenco_matrix(&GateAngles::new(1.0, 2.0, 3.0)).is_unitary(1e-14));
    }

    #[test]
    fn cy_angles() {
        let e = extract_angles(&controlled_y_matrix()).unwrap();
        assert!(e.residual < 1e-14);
        assert!(e.angles.max_residual(&GateAngles::new(FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2)) < 1e-14);
    }

    #[test]
    fn canonical_edges() {
        let a = GateAngles::new(-3.0, 0.0, 2.0).canonical();
        assert_eq!(a, GateAngles::new(-3.0, 0.0, 0.0));
        let a = GateAngles::new(3.0, FRAC_PI_2, 0.5).canonical();
        assert!((a.alpha - (3.0 - PI)).abs() < 1e-15);
        assert!((a.phi - (0.5 - PI)).abs() < 1e-15);
        let a = GateAngles::new(0.2, 2.5, 0.0).canonical();
        assert!((a.theta - (PI - 2.5)).abs() < 1e-15);
        assert!((a.alpha - (0.2 + PI - 2.0 * PI)).abs() < 1e-15);
        assert!((a.phi - PI).abs() < 1e-15);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn extract_examples() {
        let e = extract_angles(&cnot_matrix()).unwrap();
        assert!(e.angles.max_residual(&GateAngles::new(FRAC_PI_2, FRAC_PI_2, 0.0)) < 1e-15);
        let z = CMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)]);
        let e = extract_angles(&z).unwrap();
        assert_eq!(e.angles, GateAngles::new(PI, 0.0, 0.0));
        assert!(e.phi_undefined);
        let phased = cnot_matrix().scale(Complex64::from_polar(1.0, 2.1));
        let e = extract_angles(&phased).unwrap();
        assert!(e.residual < 1e-14);
    }

    #[test]
    fn protocol1_examples() {
        let b = BlockadeSpec::new(2.0, 0.0);
        let r = protocol1_angles(&b, PI / 2.0, 0.0).unwrap();
        assert!(r.angles.max_residual(&GateAngles::new(FRAC_PI_2, FRAC_PI_2, 0.0)) < 1e-14);
        let r = protocol1_angles(&appendix_b(), 0.0, 0.0).unwrap();
        assert_eq!((r.angles.alpha, r.angles.theta), (PI, 0.0));
        let r = protocol1_angles(&appendix_b(), 0.5, 0.0).unwrap();
        assert!((r.angles.alpha - PI * (1.0 - 0.2005)).abs() < 1e-12);
        assert!((r.angles.theta - 0.3575 * PI).abs() < 1e-12);
        assert!((r.angles.alpha - 2.5121).abs() < 1e-3);
        assert!((r.angles.theta - 1.1231).abs() < 1e-4);
        assert!(protocol1_angles(&BlockadeSpec::new(1.0, 1.0), 2.0, 0.0).unwrap().non_entangling);
        assert!(protocol1_angles(&b, -1.0, 0.0).is_err());
    }

    #[test]
    fn protocol1_from_v_agrees() {
        let b = appendix_b();
        for &(beta0, t) in &[(0.0, 0.5), (1.2, 0.9), (-2.0, 3.3)] {
            let p = ProtocolParams::protocol1(&b, beta0, t);
            let a = p.angles().unwrap();
            let r = protocol1_angles(&b, t, beta0).unwrap();
            assert!(a.angles.max_residual(&r.angles) < 1e-12);
        }
    }

    #[test]
    fn protocol2_examples() {
        let v = noncollinear_from_blockade(&appendix_b(), &RotatedBasis::new(0.0, 0.7));
        let r = protocol2_angles(&v, 0.0).unwrap();
        assert_eq!((r.angles.alpha, r.angles.theta), (0.0, 0.0));
        assert!(r.phi_undefined);

        let v = noncollinear_from_blockade(&appendix_b(), &RotatedBasis::new(0.0, FRAC_PI_4));
        for &t in &[0.1, 0.4, 0.77, 1.3] {
            let r = protocol2_angles(&v, t).unwrap();
            let phi = r.angles.phi;
            assert!(phi.abs() < 1e-12 || (phi.abs() - PI).abs() < 1e-12, "phi = {phi}");
        }

        let v = NoncollinearV::new(1.0, 1.0, 0.5, 0.3);
        assert!(protocol2_angles(&v, 1.0).is_err());
    }

    #[test]
    fn b1_condition_from_closed_form() {
        // V1 + V2 = -Vbar/2 with T = pi/(2 Vbar)
        for &(b01, b02) in &[(-5.0, 3.0), (3.0, -5.0)] {
            let b = BlockadeSpec::new(b01, b02);
            let p = special_gate(SpecialKind::B1 { beta1: 0.3 }, &b).unwrap();
            let r = p.angles().unwrap();
            assert!((wrap_angle(r.raw.alpha) - FRAC_PI_4).abs() < 1e-12);
            assert!((wrap_angle(r.raw.phi).abs() - FRAC_PI_2).abs() < 1e-12);
        }
    }

    fn b1_fit_residual(u: &CMatrix) -> f64 {
        // U22 ∝ e^{iπ/4} cos θ, U32 ∝ −i e^{i3π/4} sin θ with a shared phase
        let g = u[(0, 0)] + u[(1, 1)];
        let v = u.scale(g.conj() / g.norm());
        let cs = (v[(2, 2)] * Complex64::from_polar(1.0, -FRAC_PI_4)).re;
        let sn = (v[(3, 2)] / (c(0.0, -1.0) * Complex64::from_polar(1.0, 3.0 * FRAC_PI_4))).re;
        max_deviation_mod_phase(u, &b1_matrix(sn.atan2(cs)))
    }

    #[test]
    fn b1_special_gate_composes_to_b1() {
        for &(b01, b02) in &[(-5.0, 3.0), (3.0, -5.0)] {
            let b = BlockadeSpec::new(b01, b02);
            for &beta1 in &[0.1, 0.3, 0.5, 1.0, 1.4] {
                let p = special_gate(SpecialKind::B1 { beta1 }, &b).unwrap();
                let u = compose_ideal(&p).unwrap();
                assert!(b1_fit_residual(&u) < 1e-10, "b = {b:?}, beta1 = {beta1}");
            }
        }
    }

    #[test]
    fn special_gate_errors() {
        let bad = BlockadeSpec::new(1.0, 0.2);
        assert!(matches!(special_gate(SpecialKind::Cnot, &bad), Err(Error::Infeasible(_))));
        assert!(matches!(
            special_gate(SpecialKind::Cnot, &BlockadeSpec::new(-1.0, 0.0)),
            Err(Error::Infeasible(_))
        ));
        let wrong_sign = BlockadeSpec::new(5.0, -3.0);
        assert!(matches!(
            special_gate(SpecialKind::B1 { beta1: 0.3 }, &wrong_sign),
            Err(Error::Infeasible(_))
        ));
        let ok = BlockadeSpec::new(-5.0, 3.0);
        assert!(special_gate(SpecialKind::B1 { beta1: FRAC_PI_4 }, &ok).is_err());
        assert!(special_gate(SpecialKind::B1 { beta1: 0.0 }, &ok).is_err());
    }

    #[test]
    fn special_gates_compose() {
        let b = BlockadeSpec::new(two_pi_mhz(0.558), 0.0);
        let u = compose_ideal(&special_gate(SpecialKind::Cnot, &b).unwrap()).unwrap();
        assert!(max_deviation_mod_phase(&u, &cnot_matrix()) < 1e-10);
        let u = compose_ideal(&special_gate(SpecialKind::ControlledY, &b).unwrap()).unwrap();
        assert!(max_deviation_mod_phase(&u, &controlled_y_matrix()) < 1e-10);
    }

    #[test]
    fn protocol1_zero_wait_composes_to_z() {
        let p = ProtocolParams::protocol1(&appendix_b(), 0.4, 0.0);
        let u = compose_ideal(&p).unwrap();
        let z = CMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert!(u.max_abs_diff(&z) < 1e-15);
    }

    #[test]
    fn protocol2_negative_ve_matches_composition() {
        for &(b01, b02) in &[(-1.0, 3.5), (2.0, 5.0), (3.5, -1.0)] {
            let b = BlockadeSpec::new(b01, b02);
            for &beta1 in &[0.2, 0.9, 1.3] {
                for &t in &[0.3, 1.1, 1.9] {
                    let p = ProtocolParams::protocol2(&b, beta1, t);
                    let u = compose_ideal(&p).unwrap();
                    let a = p.angles().unwrap().angles;
                    assert!(max_deviation_mod_phase(&u, &barenco_matrix(&a)) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn computational_block_structure() {
        let p = ProtocolParams::protocol2(&appendix_b(), 1.0, 0.8);
        let u = compose_ideal(&p).unwrap();
        assert!(u.is_unitary(1e-10));
        assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(u[(0, 2)], c(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn representations_share_matrix(a in -PI..PI, t in -PI..PI, f in -PI..PI) {
            let base = barenco_matrix(&GateAngles::new(a, t, f));
            for r in GateAngles::new(a, t, f).representations() {
                prop_assert!(barenco_matrix(&r).max_abs_diff(&base) < 1e-12);
            }
            let canon = GateAngles::new(a, t, f).canonical();
            prop_assert!(barenco_matrix(&canon).max_abs_diff(&base) < 1e-12);
            prop_assert!((0.0..=FRAC_PI_2).contains(&canon.theta));
        }

        #[test]
        fn canonical_is_idempotent(a in -10.0f64..10.0, t in -10.0f64..10.0, f in -10.0f64..10.0) {
            let c1 = GateAngles::new(a, t, f).canonical();
            prop_assert_eq!(c1, c1.canonical());
        }

        #[test]
        fn protocol2_trig_consistency(beta1 in 0.01f64..1.56, t in 0.0f64..3.0) {
            let v = noncollinear_from_blockade(&appendix_b(), &RotatedBasis::new(0.0, beta1));
            let (r, trig) = protocol2_angles_with_trig(&v, t).unwrap();
            prop_assert!((trig.sin_theta.powi(2) + trig.cos_theta.powi(2) - 1.0).abs() < 1e-9);
            if !r.phi_undefined {
                prop_assert!((trig.sin_phi.powi(2) + trig.cos_phi.powi(2) - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn protocol1_linear_relation(b01 in -5.0f64..5.0, b02 in -5.0f64..5.0, t in 0.0f64..3.0) {
            prop_assume!((b01 - b02).abs() > 1e-3);
            let r = protocol1_angles(&BlockadeSpec::new(b01, b02), t, 0.0).unwrap();
            let slope = r.slope.unwrap();
            prop_assert!((r.raw.alpha - (PI - slope * r.raw.theta)).abs() < 1e-12);
        }
    }
}
