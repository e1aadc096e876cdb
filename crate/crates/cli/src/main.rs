//! `barenco` command-line front end.
//!
//! Every command prints a JSON report to stdout, except `sweep`, which writes
//! CSV. Exit codes: 0 ok, 2 usage, 3 infeasible, 4 I/O.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use barenco::atoms::{BlockadeSpec, RotatedBasis};
use barenco::config::{InteractionConfig, Preset, ASSUMED_LIFETIME_NOTE};
use barenco::design::{pairwise_ratio_diagnostic, solve_protocol1, solve_protocol2, P1Mode};
use barenco::dynamics::{simulate, SimConfig};
use barenco::error_budget::{
    below_thermal_regime, force_drift, mc_position_error, radial_trap_frequency, total_budget,
    trap_sigmas, BudgetInputs, GateTemplate,
};
use barenco::numerics::max_deviation_mod_phase;
use barenco::protocols::{
    barenco_matrix, compose_ideal, special_gate, GateAngles, Protocol, ProtocolParams,
    SpecialKind, PROTOCOL1_SYMMETRY_TOL,
};
use barenco::sweep::{run_sweep, Figure, SweepSpec};
use barenco::units::{parse_angle, to_two_pi_mhz, two_pi_mhz};
use barenco::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 4;

const PROTOCOL2_DEFAULT_BETA1: f64 = 3.0 * PI / 8.0;
/// μs; used by `errors budget` and `errors mc` when `--T` is omitted.
const DEFAULT_WAIT: f64 = 0.5;

#[derive(Parser)]
#[command(name = "barenco", version, about = "Two-qubit Rydberg gates in a non-collinear blockade basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form gate angles and matrix, checked against pulse composition.
    Gate(GateArgs),
    /// Pulse-level simulation on the 12-state space.
    Simulate(SimulateArgs),
    /// Error budget terms.
    #[command(subcommand)]
    Errors(ErrorsCommand),
    /// Solve for protocol parameters that realize a target gate.
    Design(DesignArgs),
    /// Write figure data as CSV.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum ErrorsCommand {
    /// Decay, blockade and leakage errors and their sum.
    Budget(BudgetArgs),
    /// Van der Waals force drift during the Rydberg dwell.
    Force(ForceArgs),
    /// Thermal position spread in the trap.
    Trap(TrapArgs),
    /// Monte Carlo gate error from thermal position fluctuations.
    Mc(McArgs),
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).ok_or_else(|| format!("cannot parse angle {s:?}; use radians, `0.25pi` or `3pi/8`"))
}

#[derive(Args, Clone)]
struct Interaction {
    /// Named parameter preset.
    #[arg(long, default_value = "appendixA")]
    preset: String,
    /// Interaction config file (C6 values, distance, basis angles); overrides the preset blockade.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Blockade shift b01, in units of 2pi MHz.
    #[arg(long = "b01-2pi-mhz")]
    b01: Option<f64>,
    /// Blockade shift b02, in units of 2pi MHz.
    #[arg(long = "b02-2pi-mhz")]
    b02: Option<f64>,
}

struct Resolved {
    preset: Preset,
    blockade: BlockadeSpec,
    basis: Option<RotatedBasis>,
}

impl Interaction {
    fn resolve(&self) -> Result<Resolved, Error> {
        let preset = Preset::by_name(&self.preset)
            .ok_or_else(|| Error::Config(format!("unknown preset {:?}", self.preset)))?;
        let (mut blockade, basis) = match &self.config {
            Some(path) => {
                let cfg = InteractionConfig::load(path)?;
                (cfg.blockade()?, Some(cfg.basis))
            }
            None => (preset.blockade(), None),
        };
        if let Some(b01) = self.b01 {
            blockade.b01 = two_pi_mhz(b01);
        }
        if let Some(b02) = self.b02 {
            blockade.b02 = two_pi_mhz(b02);
        }
        Ok(Resolved { preset, blockade, basis })
    }
}

#[derive(Args, Clone)]
struct GateSpec {
    /// Protocol: 1 or 2.
    #[arg(long, default_value = "1")]
    protocol: Protocol,
    /// Waiting time T, in μs (defaults to 0.5 for `errors budget` and `errors mc`).
    #[arg(long = "T")]
    wait: Option<f64>,
    /// Phase β0 of the exchange term, in radians (`0.5pi` accepted).
    #[arg(long, value_parser = angle)]
    beta0: Option<f64>,
    /// Mixing angle β1, in radians (`0.25pi` accepted). Protocol I requires π/4.
    #[arg(long, value_parser = angle)]
    beta1: Option<f64>,
    /// Special gate: cnot, cy or b1. Overrides --protocol and --T.
    #[arg(long)]
    special: Option<SpecialKind>,
    #[command(flatten)]
    interaction: Interaction,
}

struct Gate {
    params: ProtocolParams,
    blockade: BlockadeSpec,
    preset: Preset,
    beta1: f64,
}

impl GateSpec {
    fn build(&self, default_wait: Option<f64>) -> Result<Gate, Error> {
        let r = self.interaction.resolve()?;
        let beta0 = self.beta0.or(r.basis.map(|b| b.beta0)).unwrap_or(0.0);
        let default_beta1 = match self.protocol {
            Protocol::I => FRAC_PI_4,
            Protocol::II => r.basis.map(|b| b.beta1).unwrap_or(PROTOCOL2_DEFAULT_BETA1),
        };
        let beta1 = self.beta1.unwrap_or(default_beta1);
        let params = match self.special {
            Some(kind) => special_gate(kind, &r.blockade)?,
            None => {
                let wait = self
                    .wait
                    .or(default_wait)
                    .ok_or_else(|| Error::Contract("--T is required unless --special is given".into()))?;
                match self.protocol {
                    Protocol::I => {
                        if (beta1 - FRAC_PI_4).abs() > PROTOCOL1_SYMMETRY_TOL {
                            return Err(Error::Contract(format!(
                                "protocol I needs beta1 = pi/4, got {beta1}"
                            )));
                        }
                        ProtocolParams::protocol1(&r.blockade, beta0, wait)
                    }
                    Protocol::II => ProtocolParams::protocol2(&r.blockade, beta1, wait),
                }
            }
        };
        params.validate()?;
        let beta1 = match params.protocol {
            Protocol::I => FRAC_PI_4,
            Protocol::II => beta1,
        };
        Ok(Gate { params, blockade: r.blockade, preset: r.preset, beta1 })
    }
}

#[derive(Args)]
struct GateArgs {
    #[command(flatten)]
    gate: GateSpec,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    gate: GateSpec,
    /// Rabi frequency Ω, in units of 2pi MHz.
    #[arg(long = "omega-2pi-mhz", default_value_t = 30.0)]
    omega: f64,
    /// Include spontaneous decay with the preset lifetimes (μs).
    #[arg(long)]
    decay: bool,
    /// Switch off the interaction while the lasers are on.
    #[arg(long)]
    no_pulse_interaction: bool,
    /// Merge back-to-back pulses into single segments (protocol II).
    #[arg(long)]
    merge_pulses: bool,
}

#[derive(Args)]
struct BudgetArgs {
    #[command(flatten)]
    gate: GateSpec,
    /// Rabi frequency Ω, in units of 2pi MHz.
    #[arg(long = "omega-2pi-mhz", default_value_t = 30.0)]
    omega: f64,
}

#[derive(Args)]
struct ForceArgs {
    #[arg(long, default_value = "appendixA")]
    preset: String,
    /// Rydberg dwell time, in μs.
    #[arg(long = "t-ry", default_value_t = 1.0)]
    t_ry: f64,
    /// Interatomic distance, in μm. Defaults to the preset distance.
    #[arg(long = "l-um")]
    l: Option<f64>,
}

#[derive(Args)]
struct TrapArgs {
    #[arg(long, default_value = "appendixA")]
    preset: String,
    /// Atom temperature, in μK.
    #[arg(long = "Ta-uK")]
    ta: Option<f64>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    gate: GateSpec,
    /// Atom temperature, in μK.
    #[arg(long = "Ta-uK")]
    ta: Option<f64>,
    /// Number of Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct DesignArgs {
    /// Protocol: 1 or 2.
    #[arg(long, default_value = "1")]
    protocol: Protocol,
    /// Target α, in radians (`0.25pi` accepted).
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Target θ, in radians.
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Target φ, in radians.
    #[arg(long, value_parser = angle, allow_hyphen_values = true, default_value = "0")]
    phi: f64,
    /// Target a special gate instead of explicit angles: cnot, cy or b1.
    #[arg(long)]
    special: Option<SpecialKind>,
    /// Protocol I only: keep b01 and choose b02 freely.
    #[arg(long)]
    free_ratio: bool,
    #[command(flatten)]
    interaction: Interaction,
}

#[derive(Args)]
struct SweepArgs {
    /// Figure: fig3, fig5 or fig6.
    #[arg(long)]
    figure: Figure,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid end: θ in radians for fig3, T in μs otherwise.
    #[arg(long)]
    max: Option<f64>,
    /// Grid step, same unit as --max.
    #[arg(long)]
    step: Option<f64>,
    /// fig3 ratios b01/b02, comma separated.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// fig6 Rabi frequency Ω, in units of 2pi MHz.
    #[arg(long = "omega-2pi-mhz")]
    omega: Option<f64>,
    #[arg(long, default_value = "appendixA")]
    preset: String,
}

fn preset(name: &str) -> Result<Preset, Error> {
    Preset::by_name(name).ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
}

fn blockade_json(b: &BlockadeSpec) -> Value {
    json!({
        "b01_2pi_mhz": to_two_pi_mhz(b.b01),
        "b02_2pi_mhz": to_two_pi_mhz(b.b02),
    })
}

fn cmd_gate(a: &GateArgs) -> Result<Value, Error> {
    let g = a.gate.build(None)?;
    let report = g.params.angles()?;
    let composed = compose_ideal(&g.params)?;
    let closed = barenco_matrix(&report.angles);
    Ok(json!({
        "protocol": g.params.protocol.to_string(),
        "special": a.gate.special,
        "blockade": blockade_json(&g.blockade),
        "T_us": g.params.wait,
        "beta1": g.beta1,
        "interaction": g.params.interaction,
        "angles": report.angles,
        "raw_angles": report.raw,
        "phi_undefined": report.phi_undefined,
        "non_entangling": report.non_entangling,
        "matrix": closed,
        "oracle_residual": max_deviation_mod_phase(&composed, &closed),
    }))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Value, Error> {
    let g = a.gate.build(None)?;
    let mut cfg = SimConfig::new(two_pi_mhz(a.omega));
    cfg.include_interaction_during_pulses = !a.no_pulse_interaction;
    cfg.merge_pulses = a.merge_pulses;
    if a.decay {
        cfg.decay = Some(g.preset.lifetimes);
    }
    let r = simulate(&g.params, &g.blockade, &cfg)?;
    let mut out = json!({
        "protocol": g.params.protocol.to_string(),
        "omega_2pi_mhz": a.omega,
        "T_us": g.params.wait,
        "fidelity": r.fidelity,
        "infidelity": r.infidelity(),
        "population": r.population,
        "angles": r.angles,
        "extracted": r.extracted,
        "segments": r.segments.len(),
        "u_qubit": r.u_qubit,
    });
    if a.decay && g.preset.lifetimes_assumed {
        out["note"] = json!(ASSUMED_LIFETIME_NOTE);
    }
    Ok(out)
}

fn cmd_budget(a: &BudgetArgs) -> Result<Value, Error> {
    let g = a.gate.build(Some(DEFAULT_WAIT))?;
    let inputs = BudgetInputs {
        protocol: g.params.protocol,
        wait: g.params.wait,
        omega: two_pi_mhz(a.omega),
        interaction: g.params.interaction,
        beta1: g.beta1,
        lifetimes: g.preset.lifetimes,
        delta1: g.preset.delta1,
        delta2: g.preset.delta2,
    };
    let budget = total_budget(&inputs)?;
    let mut out = json!({
        "protocol": g.params.protocol.to_string(),
        "omega_2pi_mhz": a.omega,
        "T_us": g.params.wait,
        "beta1": g.beta1,
        "budget": budget,
        "lifetimes_us": g.preset.lifetimes,
    });
    if g.preset.lifetimes_assumed {
        out["note"] = json!(ASSUMED_LIFETIME_NOTE);
    }
    Ok(out)
}

fn cmd_force(a: &ForceArgs) -> Result<Value, Error> {
    let p = preset(&a.preset)?;
    let l = a.l.unwrap_or(p.vdw.l);
    let f = force_drift(p.vdw.c6_01, l, a.t_ry, p.atom_mass_kg)?;
    Ok(json!({
        "l_um": l,
        "t_ry_us": a.t_ry,
        "force_N": f.force,
        "delta_v_m_per_s": f.delta_v,
        "delta_x_um": f.delta_x,
    }))
}

fn cmd_trap(a: &TrapArgs) -> Result<Value, Error> {
    let p = preset(&a.preset)?;
    let mut trap = p.trap;
    if let Some(ta) = a.ta {
        trap.temperature_uk = ta;
    }
    let s = trap_sigmas(&trap)?;
    Ok(json!({
        "trap": trap,
        "sigmas_um": s,
        "radial_trap_frequency_rad_per_us": radial_trap_frequency(&trap, p.atom_mass_kg),
        "below_thermal_regime": below_thermal_regime(&trap, p.atom_mass_kg),
    }))
}

fn cmd_mc(a: &McArgs) -> Result<Value, Error> {
    let g = a.gate.build(Some(DEFAULT_WAIT))?;
    if a.gate.special.is_some() || a.gate.interaction.b01.is_some() || a.gate.interaction.b02.is_some() {
        return Err(Error::Contract(
            "Monte Carlo samples distances from C6 values; use --preset or --config".into(),
        ));
    }
    let vdw = match &a.gate.interaction.config {
        Some(path) => InteractionConfig::load(path)?.vdw,
        None => g.preset.vdw,
    };
    let mut trap = g.preset.trap;
    if let Some(ta) = a.ta {
        trap.temperature_uk = ta;
    }
    let template = GateTemplate {
        protocol: g.params.protocol,
        beta0: g.params.interaction.beta0,
        beta1: g.beta1,
        wait: g.params.wait,
    };
    let r = mc_position_error(&template, &vdw, &trap, a.samples, a.seed)?;
    Ok(json!({
        "protocol": template.protocol.to_string(),
        "T_us": template.wait,
        "Ta_uK": trap.temperature_uk,
        "result": r,
    }))
}

fn cmd_design(a: &DesignArgs) -> Result<Value, Error> {
    let r = a.interaction.resolve()?;
    let target = match (a.special, a.alpha, a.theta) {
        (Some(kind), None, None) => {
            let p = special_gate(kind, &r.blockade)?;
            p.angles()?.angles
        }
        (None, Some(alpha), Some(theta)) => GateAngles::new(alpha, theta, a.phi),
        _ => {
            return Err(Error::Contract(
                "give either --special or both --alpha and --theta".into(),
            ))
        }
    };
    let solution = match a.protocol {
        Protocol::I => {
            let mode = if a.free_ratio {
                P1Mode::FreeRatio { b01: r.blockade.b01 }
            } else {
                P1Mode::Fixed(r.blockade)
            };
            solve_protocol1(&target, mode)?
        }
        Protocol::II => {
            if a.free_ratio {
                return Err(Error::Contract("--free-ratio applies to protocol 1 only".into()));
            }
            solve_protocol2(&target, &r.blockade)?
        }
    };
    let rationality: Vec<Value> = pairwise_ratio_diagnostic(&target)
        .into_iter()
        .map(|(name, rep)| json!({ "pair": name, "report": rep }))
        .collect();
    Ok(json!({
        "protocol": a.protocol.to_string(),
        "target": target.canonical(),
        "blockade": blockade_json(&solution.blockade),
        "solution": solution,
        "rationality": rationality,
    }))
}

fn cmd_sweep(a: &SweepArgs) -> Result<usize, Error> {
    let p = preset(&a.preset)?;
    let mut spec = SweepSpec::default_for(a.figure);
    if let Some(max) = a.max {
        spec.max = max;
    }
    if let Some(step) = a.step {
        spec.step = step;
    }
    if let Some(r) = &a.ratios {
        spec.ratios = r.clone();
    }
    if let Some(o) = a.omega {
        spec.omega = two_pi_mhz(o);
    }
    spec.validate()?;
    match &a.out {
        Some(path) => {
            let file = File::create(path)?;
            let mut w = BufWriter::new(file);
            let n = run_sweep(&spec, &p, &mut w)?;
            w.flush()?;
            Ok(n)
        }
        None => run_sweep(&spec, &p, io::stdout().lock()),
    }
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("BARENCO_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("BARENCO_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Contract(_) | Error::Config(_) => EXIT_USAGE,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
    }
}

fn run(cli: Cli) -> Result<Option<Value>, Error> {
    configure_threads()?;
    let v = match cli.command {
        Command::Gate(a) => cmd_gate(&a)?,
        Command::Simulate(a) => cmd_simulate(&a)?,
        Command::Errors(ErrorsCommand::Budget(a)) => cmd_budget(&a)?,
        Command::Errors(ErrorsCommand::Force(a)) => cmd_force(&a)?,
        Command::Errors(ErrorsCommand::Trap(a)) => cmd_trap(&a)?,
        Command::Errors(ErrorsCommand::Mc(a)) => cmd_mc(&a)?,
        Command::Design(a) => cmd_design(&a)?,
        Command::Sweep(a) => {
            let n = cmd_sweep(&a)?;
            if a.out.is_none() {
                return Ok(None);
            }
            json!({ "figure": a.figure, "rows": n, "out": a.out })
        }
    };
    Ok(Some(v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Some(v)) => {
            let text = serde_json::to_string_pretty(&v).expect("reports serialize");
            if writeln!(io::stdout().lock(), "{text}").is_err() {
                return ExitCode::from(EXIT_IO);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
