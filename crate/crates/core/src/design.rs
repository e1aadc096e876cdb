//! Inverse problem: protocol parameters from target angles, and
//! continued-fraction diagnostics for the irrationality condition.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::BlockadeSpec;
use crate::error::{contract, Error, Result};
use crate::protocols::{
    angle_residual, protocol2_angles, wrap_angle, GateAngles, ProtocolParams,
};

/// Angular tolerance for an exact Protocol I match.
pub const P1_TOL: f64 = 1e-9;
/// Largest branch index tried by the Protocol I enumeration.
pub const P1_MAX_BRANCH: u32 = 256;

/// Grid size of the Protocol II scan along each axis.
pub const P2_GRID: usize = 64;
/// Protocol II convergence threshold (rad).
pub const P2_CONVERGED: f64 = 1e-8;
/// Best residual above this means no solution for the blockade pair.
pub const P2_INFEASIBLE: f64 = 1e-3;

const P2_MAX_STARTS: usize = 48;
const P2_MAX_ITER: usize = 100;
const EDGE: f64 = 1e-9;

/// How Protocol I treats the blockade shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum P1Mode {
    Fixed(BlockadeSpec),
    /// Keep `b01` and choose `b02`.
    FreeRatio { b01: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSolution {
    pub params: ProtocolParams,
    pub blockade: BlockadeSpec,
    /// Mixing angle of the target basis the parameters assume.
    pub beta1: f64,
    /// Canonical angles from forward evaluation of `params`.
    pub achieved: GateAngles,
    /// Largest angular deviation from the target over the matched angles (rad).
    pub residual: f64,
    pub feasible: bool,
    /// `b01/b02` required in free-ratio mode.
    pub required_ratio: Option<f64>,
    /// Period in `T` of the matched angles, when one exists.
    pub period: Option<f64>,
    /// Protocol II leaves α as an output of the solve.
    pub alpha_free: bool,
    pub non_entangling: bool,
    /// Distinct Protocol II solutions, ordered by `(β₁, T)`.
    pub basins: Vec<Basin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Basin {
    pub beta1: f64,
    pub wait: f64,
    pub residual: f64,
    pub alpha: f64,
}

/// Protocol I parameters for a target gate.
///
/// Raw angles are `α = π − (b01+b02)T/2`, `θ = (b01−b02)T/2`, `φ = β₀`, so
/// the wait is fixed by θ up to the branches `θ_raw = ±θ + nπ`; a branch
/// matches when α agrees modulo 2π. The smallest matching `T` wins.
///
/// ```
/// use barenco::design::{solve_protocol1, P1Mode};
/// use barenco::protocols::GateAngles;
/// use std::f64::consts::{FRAC_PI_2, PI};
/// let cnot = GateAngles::new(FRAC_PI_2, FRAC_PI_2, 0.0);
/// let s = solve_protocol1(&cnot, P1Mode::FreeRatio { b01: 1.0 }).unwrap();
/// assert_eq!(s.blockade.b02, 0.0);
/// assert!((s.params.wait - PI).abs() < 1e-12);
/// ```
pub fn solve_protocol1(target: &GateAngles, mode: P1Mode) -> Result<DesignSolution> {
    let t = target.canonical();
    let b = match mode {
        P1Mode::Fixed(b) => b,
        P1Mode::FreeRatio { b01 } => free_ratio_blockade(&t, b01)?,
    };
    if !b.is_finite() {
        return Err(contract("blockade shifts must be finite"));
    }
    let db = b.b01 - b.b02;
    if db == 0.0 {
        if t.theta == 0.0 && angle_residual(t.alpha, PI) <= P1_TOL {
            return finish_p1(&t, &b, 0.0, 0.0, mode);
        }
        return Err(Error::Infeasible("protocol I needs b01 != b02".into()));
    }
    let sum_over = (b.b01 + b.b02) / db.abs();
    let flip = if db < 0.0 { PI } else { 0.0 };

    let mut best: Option<(f64, f64)> = None;
    for n in 0..=P1_MAX_BRANCH {
        let np = n as f64 * PI;
        let branches = [(np + t.theta, 0.0), (np - t.theta, PI)];
        for (m, shift) in branches {
            if m < 0.0 {
                continue;
            }
            let alpha_raw = PI - sum_over * m;
            if angle_residual(alpha_raw, t.alpha + np) > P1_TOL {
                continue;
            }
            let wait = 2.0 * m / db.abs();
            if best.is_none_or(|(w, _)| wait < w) {
                best = Some((wait, wrap_angle(t.phi + flip + shift)));
            }
        }
        if best.is_some() {
            break;
        }
    }
    match best {
        Some((wait, beta0)) => finish_p1(&t, &b, wait, beta0, mode),
        None => Err(Error::Infeasible(format!(
            "no wait time reaches alpha = {:.6} with slope {:.6}; the Protocol I line is alpha = pi - slope*theta",
            t.alpha,
            (b.b01 + b.b02) / db
        ))),
    }
}

fn free_ratio_blockade(t: &GateAngles, b01: f64) -> Result<BlockadeSpec> {
    if !(b01.is_finite() && b01 != 0.0) {
        return Err(contract("free-ratio mode needs a nonzero b01"));
    }
    if t.theta == 0.0 {
        if angle_residual(t.alpha, PI) <= P1_TOL {
            return Ok(BlockadeSpec::new(b01, 0.0));
        }
        return Err(Error::Infeasible("theta = 0 is only reachable with alpha = pi".into()));
    }
    let slope = (PI - t.alpha) / t.theta;
    if (slope + 1.0).abs() < 1e-12 {
        return Err(Error::Infeasible("slope -1 needs b01 = 0".into()));
    }
    let b02 = b01 * (slope - 1.0) / (slope + 1.0);
    Ok(BlockadeSpec::new(b01, if b02 == 0.0 { 0.0 } else { b02 }))
}

fn finish_p1(
    t: &GateAngles,
    b: &BlockadeSpec,
    wait: f64,
    beta0: f64,
    mode: P1Mode,
) -> Result<DesignSolution> {
    let params = ProtocolParams::protocol1(b, beta0, wait);
    let report = params.angles()?;
    let residual = t.max_residual(&report.angles);
    let required_ratio = match mode {
        P1Mode::FreeRatio { .. } if b.b02 != 0.0 => Some(b.b01 / b.b02),
        P1Mode::FreeRatio { .. } => Some(f64::INFINITY),
        P1Mode::Fixed(_) => None,
    };
    Ok(DesignSolution {
        params,
        blockade: *b,
        beta1: PI / 4.0,
        achieved: report.angles,
        residual,
        feasible: residual <= P1_TOL,
        required_ratio,
        period: None,
        alpha_free: false,
        non_entangling: t.theta == 0.0,
        basins: Vec::new(),
    })
}

/// Raw `(θ, φ)` from the closed form, or `None` outside the domain.
fn p2_forward(b: &BlockadeSpec, beta1: f64, wait: f64) -> Option<(GateAngles, bool)> {
    let p = ProtocolParams::protocol2(b, beta1, wait);
    protocol2_angles(&p.interaction, wait)
        .ok()
        .map(|r| (r.raw, r.phi_undefined))
}

/// The four `(θ, φ)` pairs equivalent to the target once α is free.
fn target_pairs(t: &GateAngles) -> [(f64, f64); 4] {
    [
        (t.theta, t.phi),
        (-t.theta, t.phi + PI),
        (PI - t.theta, t.phi + PI),
        (t.theta - PI, t.phi),
    ]
}

fn pair_residual(raw: &GateAngles, phi_undefined: bool, pair: (f64, f64), ignore_phi: bool) -> [f64; 2] {
    let dt = wrap_angle(raw.theta - pair.0);
    let dp = if ignore_phi || phi_undefined {
        0.0
    } else {
        wrap_angle(raw.phi - pair.1)
    };
    [dt, dp]
}

fn p2_residual(b: &BlockadeSpec, t: &GateAngles, beta1: f64, wait: f64) -> (f64, usize) {
    let Some((raw, undefined)) = p2_forward(b, beta1, wait) else {
        return (f64::INFINITY, 0);
    };
    let ignore_phi = t.theta == 0.0;
    target_pairs(t)
        .iter()
        .enumerate()
        .map(|(k, &pair)| {
            let [a, c] = pair_residual(&raw, undefined, pair, ignore_phi);
            (a.abs().max(c.abs()), k)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .unwrap()
}

/// Damped Gauss-Newton on `(β₁, T)` for one equivalent target pair.
fn refine(b: &BlockadeSpec, t: &GateAngles, start: (f64, f64), pair: usize, t_max: f64) -> (f64, f64) {
    let pair = target_pairs(t)[pair];
    let ignore_phi = t.theta == 0.0;
    let clamp = |x: f64, y: f64| (x.clamp(EDGE, FRAC_PI_2 - EDGE), y.clamp(0.0, t_max));
    let eval = |x: f64, y: f64| -> Option<[f64; 2]> {
        let (raw, undef) = p2_forward(b, x, y)?;
        Some(pair_residual(&raw, undef, pair, ignore_phi))
    };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());

    let (mut x, mut y) = start;
    let Some(mut r) = eval(x, y) else { return start };
    let mut lambda = 1e-3;
    for _ in 0..P2_MAX_ITER {
        if norm(r) < 1e-13 {
            break;
        }
        let hx = 1e-7;
        let hy = 1e-7 * t_max.max(1e-9);
        let (Some(rxp), Some(rxm), Some(ryp), Some(rym)) =
            (eval(x + hx, y), eval(x - hx, y), eval(x, y + hy), eval(x, (y - hy).max(0.0)))
        else {
            break;
        };
        let dy_used = y + hy - (y - hy).max(0.0);
        let j = [
            [(rxp[0] - rxm[0]) / (2.0 * hx), (ryp[0] - rym[0]) / dy_used],
            [(rxp[1] - rxm[1]) / (2.0 * hx), (ryp[1] - rym[1]) / dy_used],
        ];
        // (JᵀJ + λ diag(JᵀJ)) δ = −Jᵀr
        let a11 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
        let a12 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
        let a22 = j[0][1] * j[0][1] + j[1][1] * j[1][1];
        let g1 = j[0][0] * r[0] + j[1][0] * r[1];
        let g2 = j[0][1] * r[0] + j[1][1] * r[1];
        let mut improved = false;
        for _ in 0..12 {
            let m11 = a11 * (1.0 + lambda) + 1e-30;
            let m22 = a22 * (1.0 + lambda) + 1e-30;
            let det = m11 * m22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let dx = -(m22 * g1 - a12 * g2) / det;
            let dy = -(m11 * g2 - a12 * g1) / det;
            let (nx, ny) = clamp(x + dx, y + dy);
            if let Some(nr) = eval(nx, ny) {
                if norm(nr) < norm(r) {
                    x = nx;
                    y = ny;
                    r = nr;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, y)
}

/// Protocol II parameters for a target `(θ, φ)`; α follows from the solution.
///
/// Scans a 64×64 grid over `β₁ ∈ (0, π/2)` and one period of `T`, refines
/// every local minimum, and returns the solution with the smallest `T`
/// together with all distinct basins.
pub fn solve_protocol2(target: &GateAngles, b: &BlockadeSpec) -> Result<DesignSolution> {
    let t = target.canonical();
    if !b.is_finite() {
        return Err(contract("blockade shifts must be finite"));
    }
    let db = (b.b01 - b.b02).abs();
    if db == 0.0 {
        return Err(Error::Infeasible("protocol II needs b01 != b02".into()));
    }
    let period = 2.0 * PI / db;

    if t.theta == 0.0 {
        let params = ProtocolParams::protocol2(b, 0.0, 0.0);
        let achieved = params.angles()?.angles;
        return Ok(DesignSolution {
            params,
            blockade: *b,
            beta1: 0.0,
            achieved,
            residual: 0.0,
            feasible: true,
            required_ratio: None,
            period: Some(period),
            alpha_free: true,
            non_entangling: true,
            basins: vec![Basin { beta1: 0.0, wait: 0.0, residual: 0.0, alpha: achieved.alpha }],
        });
    }

    let n = P2_GRID;
    let step_b = FRAC_PI_2 / n as f64;
    let step_t = period / n as f64;
    let grid: Vec<(f64, usize)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            p2_residual(b, &t, (i as f64 + 0.5) * step_b, (j as f64 + 0.5) * step_t)
        })
        .collect();

    let mut starts: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i * n + j].0;
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let (a, c) = (i as i64 + di, j as i64 + dj);
                    if (di == 0 && dj == 0) || a < 0 || c < 0 || a >= n as i64 || c >= n as i64 {
                        return true;
                    }
                    v <= grid[a as usize * n + c as usize].0
                })
            });
            if is_min && v.is_finite() {
                starts.push((v, i, j));
            }
        }
    }
    starts.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    starts.truncate(P2_MAX_STARTS);

    let t_max = 2.0 * period;
    let refined: Vec<Basin> = starts
        .par_iter()
        .map(|&(_, i, j)| {
            let start = ((i as f64 + 0.5) * step_b, (j as f64 + 0.5) * step_t);
            let pair = grid[i * n + j].1;
            let (x, y) = refine(b, &t, start, pair, t_max);
            let (res, _) = p2_residual(b, &t, x, y);
            let alpha = wrap_angle(-y * (b.b01 + b.b02));
            Basin { beta1: x, wait: y, residual: res, alpha }
        })
        .collect();

    let mut basins: Vec<Basin> = Vec::new();
    for cand in refined {
        let dup = basins
            .iter_mut()
            .find(|bs| (bs.beta1 - cand.beta1).abs() < 1e-6 && (bs.wait - cand.wait).abs() < 1e-6 * period.max(1.0));
        match dup {
            Some(bs) if cand.residual < bs.residual => *bs = cand,
            Some(_) => {}
            None => basins.push(cand),
        }
    }
    basins.sort_by(|x, y| x.beta1.total_cmp(&y.beta1).then(x.wait.total_cmp(&y.wait)));

    let best_res = basins.iter().map(|bs| bs.residual).fold(f64::INFINITY, f64::min);
    if !(best_res < P2_INFEASIBLE) {
        return Err(Error::Infeasible(format!(
            "no protocol II basin reaches theta = {:.6}, phi = {:.6} for these blockade shifts (best residual {best_res:.3e})",
            t.theta, t.phi
        )));
    }
    let converged: Vec<&Basin> = basins.iter().filter(|bs| bs.residual < P2_CONVERGED).collect();
    let chosen = if converged.is_empty() {
        *basins.iter().min_by(|x, y| x.residual.total_cmp(&y.residual)).unwrap()
    } else {
        **converged.iter().min_by(|x, y| x.wait.total_cmp(&y.wait)).unwrap()
    };

    let params = ProtocolParams::protocol2(b, chosen.beta1, chosen.wait);
    let achieved = params.angles()?.angles;
    let (residual, _) = p2_residual(b, &t, chosen.beta1, chosen.wait);
    Ok(DesignSolution {
        params,
        blockade: *b,
        beta1: chosen.beta1,
        achieved,
        residual,
        feasible: residual < P2_CONVERGED,
        required_ratio: None,
        period: Some(period),
        alpha_free: true,
        non_entangling: false,
        basins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergent {
    pub p: i64,
    pub q: i64,
    pub error: f64,
}

/// Continued-fraction view of a number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalityReport {
    /// The expanded number (`angle/π` for [`rationality_diagnostic`]).
    pub value: f64,
    /// Convergents in increasing `q`.
    pub convergents: Vec<Convergent>,
    /// A convergent with `q ≤ 100` lies within `1e−9`.
    pub flagged_rational: bool,
}

pub const RATIONAL_MAX_Q: i64 = 100;
pub const RATIONAL_TOL: f64 = 1e-9;
const CONVERGENT_MAX_Q: i64 = 1_000_000;

/// Convergents of `x` up to denominator `10⁶`.
pub fn convergents(x: f64) -> Vec<Convergent> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut h0, mut h1) = (1i64, x.floor() as i64);
    let (mut k0, mut k1) = (0i64, 1i64);
    let mut rest = x - x.floor();
    out.push(Convergent { p: h1, q: k1, error: (x - h1 as f64).abs() });
    while rest > 1e-15 {
        let inv = 1.0 / rest;
        let a = inv.floor();
        if a > CONVERGENT_MAX_Q as f64 {
            break;
        }
        let a = a as i64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > CONVERGENT_MAX_Q {
            break;
        }
        let c = Convergent { p: h2, q: k2, error: (x - h2 as f64 / k2 as f64).abs() };
        if out.last().is_some_and(|l| l.q == k2) {
            out.pop();
        }
        out.push(c);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        rest = inv - a as f64;
        if out.last().unwrap().error == 0.0 {
            break;
        }
    }
    out
}

fn report(value: f64) -> RationalityReport {
    let convergents = convergents(value);
    let flagged_rational = convergents
        .iter()
        .any(|c| c.q <= RATIONAL_MAX_Q && c.error <= RATIONAL_TOL);
    RationalityReport {
        value,
        convergents,
        flagged_rational,
    }
}

/// Heuristic check of whether `angle` is a rational multiple of π.
///
/// ```
/// use barenco::design::rationality_diagnostic;
/// let r = rationality_diagnostic(std::f64::consts::FRAC_PI_2);
/// assert!(r.flagged_rational);
/// assert!(r.convergents.iter().any(|c| (c.p, c.q) == (1, 2)));
/// ```
pub fn rationality_diagnostic(angle: f64) -> RationalityReport {
    report(angle / PI)
}

/// Convergents of the three pairwise angle ratios `α/θ`, `α/φ`, `θ/φ`.
/// Pairs with a zero denominator are skipped.
pub fn pairwise_ratio_diagnostic(a: &GateAngles) -> Vec<(String, RationalityReport)> {
    [("alpha/theta", a.alpha, a.theta), ("alpha/phi", a.alpha, a.phi), ("theta/phi", a.theta, a.phi)]
        .into_iter()
        .filter(|(_, _, den)| *den != 0.0)
        .map(|(name, num, den)| (name.to_string(), report(num / den)))
        .collect()
}
