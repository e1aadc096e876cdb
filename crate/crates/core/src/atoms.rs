//! Interaction specifications: van der Waals blockade shifts from geometry,
//! the rotated Rydberg basis on the target atom, and the resulting
//! non-collinear 2×2 interaction block.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{contract, Result};
use crate::numerics::{CMatrix, SpectralData};

/// Below this separation (μm) the pair interaction is no longer van der Waals-like.
pub const VDW_MIN_DISTANCE_UM: f64 = 5.0;

/// Van der Waals coefficients (rad·μs⁻¹·μm⁶) and the interatomic distance (μm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VdwSpec {
    /// `|R₀R₁⟩` pair.
    pub c6_01: f64,
    /// `|R₀R₂⟩` pair.
    pub c6_02: f64,
    /// `|R₀R₃⟩` pair, only needed when `|R₂⟩` is itself mixed with `|R₃⟩`.
    pub c6_03: Option<f64>,
    pub l: f64,
    /// Exchange coefficient between `|R₀R₂⟩` and `|R₂R₀⟩`. Informational only; it
    /// never enters a Hamiltonian.
    pub c6_exchange: Option<f64>,
}

impl VdwSpec {
    /// Warnings about the validity of the van der Waals picture.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.l < VDW_MIN_DISTANCE_UM {
            out.push(format!(
                "l = {} um is below {} um; resonant dipole-dipole coupling dominates there",
                self.l, VDW_MIN_DISTANCE_UM
            ));
        }
        out
    }

    pub fn with_distance(&self, l: f64) -> Self {
        Self { l, ..*self }
    }
}

/// Diagonal blockade shifts `b₀ₖ` in rad·μs⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockadeSpec {
    pub b01: f64,
    pub b02: f64,
    pub b03: Option<f64>,
}

impl BlockadeSpec {
    pub fn new(b01: f64, b02: f64) -> Self {
        Self { b01, b02, b03: None }
    }

    /// Replaces `b02` by the β₂-tuned mixture with `b03`.
    pub fn with_beta2(&self, beta2: f64) -> Result<Self> {
        let b03 = self
            .b03
            .ok_or_else(|| contract("beta2 tuning needs a b03 coefficient"))?;
        Ok(Self {
            b02: b02_tuned(self.b02, b03, beta2),
            ..*self
        })
    }

    pub fn is_finite(&self) -> bool {
        self.b01.is_finite() && self.b02.is_finite() && self.b03.is_none_or(f64::is_finite)
    }
}

/// `b₀ₖ = C₆(R₀Rₖ) / l⁶`.
pub fn blockade_from_c6(spec: &VdwSpec) -> Result<BlockadeSpec> {
    if !(spec.l > 0.0) || !spec.l.is_finite() {
        return Err(contract(format!("interatomic distance must be positive, got {}", spec.l)));
    }
    let l6 = spec.l.powi(6);
    Ok(BlockadeSpec {
        b01: spec.c6_01 / l6,
        b02: spec.c6_02 / l6,
        b03: spec.c6_03.map(|c| c / l6),
    })
}

/// `b02·cos²β₂ + b03·sin²β₂`: the effective `b02` when `|R₂⟩` is replaced by
/// `cos β₂|R₂⟩ + sin β₂|R₃⟩`.
pub fn b02_tuned(b02: f64, b03: f64, beta2: f64) -> f64 {
    let (s, c) = beta2.sin_cos();
    b02 * c * c + b03 * s * s
}

/// Mixing angles of the target's rotated Rydberg states
///
/// ```text
/// |r₂⟩ = cos β₁ |R₁⟩ + sin β₁ e^{iβ₀} |R₂⟩
/// |r₃⟩ = sin β₁ e^{−iβ₀} |R₁⟩ − cos β₁ |R₂⟩
/// ```
///
/// The relative phase between `|R₁⟩` and `|R₂⟩` is fixed by this form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatedBasis {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: Option<f64>,
}

impl RotatedBasis {
    pub fn new(beta0: f64, beta1: f64) -> Self {
        Self { beta0, beta1, beta2: None }
    }

    /// Reduces β₁ into `[0, π/2]`. The returned sign multiplies `V_e`:
    /// β₁ → β₁ + π leaves the interaction unchanged and β₁ → −β₁ flips `V_e`.
    pub fn canonical(&self) -> (Self, f64) {
        let mut b = self.beta1.rem_euclid(PI);
        let mut sign = 1.0;
        if b > FRAC_PI_2 {
            b = PI - b;
            sign = -1.0;
        }
        (Self { beta1: b, ..*self }, sign)
    }

    /// Columns are `|r₂⟩` and `|r₃⟩` in the `(|R₁⟩, |R₂⟩)` basis.
    pub fn change_of_basis(&self) -> CMatrix {
        let (s, c) = self.beta1.sin_cos();
        let e = Complex64::from_polar(1.0, self.beta0);
        CMatrix::from_rows(
            2,
            vec![
                Complex64::new(c, 0.0),
                e.conj() * s,
                e * s,
                Complex64::new(-c, 0.0),
            ],
        )
    }

    /// Recovers β₁ from a blockade pair and the interaction block it produced.
    /// Falls back to π/4 when `b01 = b02`, where any angle gives the same block.
    pub fn recover(b: &BlockadeSpec, v: &NoncollinearV) -> Result<Self> {
        let db = b.b01 - b.b02;
        let scale = b.b01.abs().max(b.b02.abs()).max(1e-300);
        if (v.v1 + v.v2 - b.b01 - b.b02).abs() > 1e-9 * scale {
            return Err(contract("interaction trace does not match the blockade shifts"));
        }
        if db.abs() <= 1e-12 * scale {
            return Ok(Self::new(v.beta0, PI / 4.0));
        }
        let beta1 = 0.5 * (2.0 * v.ve / db).atan2((v.v1 - v.v2) / db);
        let rebuilt = noncollinear_from_blockade(b, &Self::new(v.beta0, beta1));
        let err = (rebuilt.v1 - v.v1)
            .abs()
            .max((rebuilt.v2 - v.v2).abs())
            .max((rebuilt.ve - v.ve).abs());
        if err > 1e-9 * scale {
            return Err(contract("interaction block is not reachable from these blockade shifts"));
        }
        Ok(Self::new(v.beta0, beta1))
    }
}

/// The non-collinear interaction
/// `[[V₁, V_e e^{−iβ₀}], [V_e e^{iβ₀}, V₂]]` on `(|r₁r₂⟩, |r₁r₃⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoncollinearV {
    pub v1: f64,
    pub v2: f64,
    pub ve: f64,
    pub beta0: f64,
}

impl NoncollinearV {
    pub fn new(v1: f64, v2: f64, ve: f64, beta0: f64) -> Self {
        Self { v1, v2, ve, beta0 }
    }

    pub fn block(&self) -> CMatrix {
        let off = Complex64::from_polar(self.ve, -self.beta0);
        CMatrix::from_rows(
            2,
            vec![Complex64::new(self.v1, 0.0), off, off.conj(), Complex64::new(self.v2, 0.0)],
        )
    }

    pub fn spectral(&self) -> SpectralData {
        SpectralData::from_parts(self.v1, self.v2, self.ve, self.beta0)
    }

    pub fn vbar(&self) -> f64 {
        self.ve.hypot(0.5 * (self.v1 - self.v2))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            v1: self.v1 * s,
            v2: self.v2 * s,
            ve: self.ve * s,
            beta0: self.beta0,
        }
    }
}

/// Projects the diagonal blockade interaction onto the rotated pair states.
pub fn noncollinear_from_blockade(b: &BlockadeSpec, basis: &RotatedBasis) -> NoncollinearV {
    let (s, c) = basis.beta1.sin_cos();
    NoncollinearV {
        v1: b.b01 * c * c + b.b02 * s * s,
        v2: b.b01 * s * s + b.b02 * c * c,
        ve: (b.b01 - b.b02) * s * c,
        beta0: basis.beta0,
    }
}
