//! Command-line front end: tabulate generator spectra, repair trajectories,
//! and the spin-cavity design, and run the repairability checks.
//!
//! Every subcommand emits a deterministic table (CSV with `#` metadata, or
//! JSON for `check`) to stdout or `--out`. Exit codes: 0 success, 1 a
//! requested condition check failed, 2 input error.

mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use aqec_core::conditions::{
    check_dfs, check_drainage, check_funnel_partition, check_kl, check_symmetry, ConditionId,
    ConditionReport, DRAINAGE_DEFAULT_TOL,
};
use aqec_core::jump::{jump_expand_pure, REGISTER_BUDGET};
use aqec_core::metrics::{linear_entropy, metrics_trajectory};
use aqec_core::models::{corrupted_state, toy_model_flip, AqecModel, ModelConfig};
use aqec_core::ops::{Operator, C64};
use aqec_core::spin_cavity::{
    aqec_feasibility, cavity_modes, design_report, dipole_spectrum, Polarization, SpinSystem,
};

use inputs::LoadedConfig;
use output::{fsci, Sink, RATE_UNITS, ZETA_UNITS};

#[derive(Parser)]
#[command(
    name = "aqec",
    version,
    about = "Dissipative quantum error correction: generators, repair trajectories, \
             condition checks, and the three-spin cavity design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Real parts of the 16 generator eigenvalues for the flip model.
    ///
    /// Without --config, sweeps the documented grid: baseline d=r=c=1 and
    /// each parameter doubled separately.
    SpectrumGamma(SpectrumGammaArgs),
    /// Linear entropy along a repair trajectory.
    Entropy(EntropyArgs),
    /// Codeword populations and coherence along a repair trajectory.
    Repair(RepairArgs),
    /// Every basis-state population along a repair trajectory.
    FunnelPopulations(FunnelPopulationsArgs),
    /// Run the repairability condition checkers (exit 1 on any failure).
    Check(CheckArgs),
    /// Dipole transition spectrum of the three-spin chain.
    Spins(SpinsArgs),
    /// Rectangular-cavity mode table, or the full design summary.
    Cavity(CavityArgs),
    /// Discrete jump expansion versus the exact propagator.
    JumpOracle(JumpOracleArgs),
}

#[derive(Args)]
struct SpectrumGammaArgs {
    /// Flip-model config file (model = "toy_flip"); omit to sweep the grid.
    #[arg(long)]
    config: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Model config: bundled set name or JSON file. Default: baseline flip
    /// model at unit rates.
    #[arg(long)]
    config: Option<String>,
    /// Which flip error strikes first (1-based).
    #[arg(long, default_value = "1")]
    error: String,
    #[arg(long, default_value_t = 250.0)]
    tmax: f64,
    #[arg(long, default_value_t = 2500)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RepairArgs {
    /// Model config: bundled set name or JSON file.
    #[arg(long, default_value = "setA")]
    config: String,
    /// Flip error(s) to repair: 1-based index or "all".
    #[arg(long, conflicts_with = "overlaps")]
    error: Option<String>,
    /// Start from an overlap-weighted mixture instead of a single flip:
    /// "example" (bundled example), "random" (seeded), or a JSON file.
    #[arg(long)]
    overlaps: Option<String>,
    /// Seed for --overlaps random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 40.0)]
    tmax: f64,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FunnelPopulationsArgs {
    /// Model config: bundled set name or JSON file.
    #[arg(long, default_value = "setB")]
    config: String,
    /// Flip error(s) to repair: 1-based index or "all".
    #[arg(long, default_value = "1")]
    error: String,
    #[arg(long, default_value_t = 40.0)]
    tmax: f64,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Model config: bundled set name or JSON file.
    #[arg(long, default_value = "setA")]
    config: String,
    /// Comma-separated subset of KL, DFS, FUNNEL_PARTITION, DRAINAGE,
    /// SYMMETRY. Default: all five.
    #[arg(long, value_delimiter = ',')]
    conditions: Option<Vec<String>>,
    /// Numerical tolerance for KL/DFS/FUNNEL_PARTITION/SYMMETRY.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Support threshold for DRAINAGE.
    #[arg(long, default_value_t = DRAINAGE_DEFAULT_TOL)]
    drainage_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CouplingArgs {
    /// Nearest-neighbour dipolar coupling (spins 1-2), in units of zeta.
    #[arg(long, default_value_t = 1.0)]
    d12: f64,
    /// Nearest-neighbour dipolar coupling (spins 2-3).
    #[arg(long, default_value_t = 1.0)]
    d23: f64,
    /// Next-nearest dipolar coupling (spins 1-3).
    #[arg(long, default_value_t = 0.125)]
    d13: f64,
    /// Exchange coupling between spins 2 and 3.
    #[arg(long, default_value_t = 0.2)]
    j23: f64,
}

impl CouplingArgs {
    fn system(&self) -> SpinSystem {
        SpinSystem { d12: self.d12, d23: self.d23, d13: self.d13, j23: self.j23 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolarizationArg {
    X,
    Y,
    Both,
}

#[derive(Args)]
struct SpinsArgs {
    #[command(flatten)]
    couplings: CouplingArgs,
    /// Drive polarization to tabulate.
    #[arg(long, value_enum, default_value_t = PolarizationArg::X)]
    polarization: PolarizationArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CavityArgs {
    /// Box dimensions a,b,d in units of 1/zeta.
    #[arg(long, value_delimiter = ',', num_args = 1..=3, default_values_t = [2.32, 0.87, 4.28])]
    dims: Vec<f64>,
    /// Highest mode frequency to enumerate, in units of zeta.
    #[arg(long, default_value_t = 2.5)]
    omega_max: f64,
    /// Emit the design summary (line-to-mode matching) instead of the mode
    /// table.
    #[arg(long)]
    design: bool,
    /// Largest line-to-mode offset that counts as resonant (design only).
    #[arg(long, default_value_t = 0.01)]
    match_tol: f64,
    /// Value of zeta in inverse centimeters; adds the operating-temperature
    /// line to the design summary.
    #[arg(long)]
    zeta_inverse_cm: Option<f64>,
    #[command(flatten)]
    couplings: CouplingArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JumpOracleArgs {
    /// Model config: bundled set name or JSON file. Default: baseline flip
    /// model at unit rates.
    #[arg(long)]
    config: Option<String>,
    /// Which flip error strikes first (1-based).
    #[arg(long, default_value = "1")]
    error: String,
    /// Fixed comparison time.
    #[arg(long, default_value_t = 1.6)]
    tmax: f64,
    /// Steps at the coarsest level; each level doubles them.
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Number of step-halving levels.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            // A downstream pipe closing early (e.g. `aqec ... | head`) is not
            // an error.
            let broken_pipe = err.chain().any(|cause| {
                cause
                    .downcast_ref::<std::io::Error>()
                    .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            });
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::SpectrumGamma(args) => spectrum_gamma(args),
        Command::Entropy(args) => entropy(args),
        Command::Repair(args) => repair(args),
        Command::FunnelPopulations(args) => funnel_populations(args),
        Command::Check(args) => check(args),
        Command::Spins(args) => spins(args),
        Command::Cavity(args) => cavity(args),
        Command::JumpOracle(args) => jump_oracle(args),
    }
}

/// Time grid plus states, with the initial state prepended at t = 0.
fn propagate_from(
    model: &AqecModel,
    rho0: &Operator,
    tmax: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<Operator>)> {
    if tmax.is_nan() || tmax <= 0.0 {
        bail!("--tmax must be positive, got {tmax}");
    }
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    let dt = tmax / steps as f64;
    let times: Vec<f64> = (1..=steps).map(|k| k as f64 * dt).collect();
    let states = model.generator()?.propagate(rho0, &times)?;
    let mut all_times = Vec::with_capacity(steps + 1);
    all_times.push(0.0);
    all_times.extend(times);
    let mut all_states = Vec::with_capacity(steps + 1);
    all_states.push(rho0.clone());
    all_states.extend(states);
    Ok((all_times, all_states))
}

/// Initial projector after one flip error.
fn flipped_start(model: &AqecModel, config: &ModelConfig, error: usize) -> Result<Operator> {
    let psi = inputs::initial_state(model, config)?;
    Ok(model.error_set[error].apply(&psi)?.normalized()?.projector())
}

fn spectrum_gamma(args: SpectrumGammaArgs) -> Result<ExitCode> {
    let loaded = args.config.as_deref().map(inputs::load_model_config).transpose()?;
    let points: Vec<(f64, f64, f64)> = match &loaded {
        Some(lc) => match &lc.config {
            ModelConfig::ToyFlip { d, r, c: cool } => vec![(*d, *r, *cool)],
            _ => bail!("spectrum-gamma sweeps the flip-model family; use a toy_flip config"),
        },
        None => vec![(1.0, 1.0, 1.0), (2.0, 1.0, 1.0), (1.0, 2.0, 1.0), (1.0, 1.0, 2.0)],
    };

    let mut sink = Sink::create(&args.out)?;
    sink.provenance(loaded.as_ref().map(LoadedConfig::provenance), RATE_UNITS)?;
    if loaded.is_none() {
        sink.meta("grid", "baseline (1,1,1) and each parameter doubled separately")?;
    }
    sink.meta("ordering", "eigenvalues sorted by descending real part, then imaginary part")?;
    sink.header(&["d", "r", "c", "index", "re_lambda"])?;
    for (d, r, cool) in points {
        let decomp = toy_model_flip(d, r, cool)?.generator()?.spectral_decompose()?;
        for (index, lambda) in decomp.eigenvalues.iter().enumerate() {
            sink.row(&[
                d.to_string(),
                r.to_string(),
                cool.to_string(),
                index.to_string(),
                fsci(lambda.re),
            ])?;
        }
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn entropy(args: EntropyArgs) -> Result<ExitCode> {
    let loaded = inputs::load_or_baseline(&args.config)?;
    let model = loaded.config.build()?;
    let errors = inputs::parse_error_spec(&args.error, model.error_set.len())?;
    if errors.len() != 1 {
        bail!("entropy traces one trajectory; pick a single --error");
    }
    let rho0 = flipped_start(&model, &loaded.config, errors[0])?;
    let (times, states) = propagate_from(&model, &rho0, args.tmax, args.steps)?;

    let mut sink = Sink::create(&args.out)?;
    sink.provenance(Some(loaded.provenance()), RATE_UNITS)?;
    sink.meta("start", format_args!("flip {} applied to the codeword state", errors[0] + 1))?;
    sink.header(&["t", "linear_entropy"])?;
    for (t, rho) in times.iter().zip(states.iter()) {
        sink.row(&[fsci(*t), fsci(linear_entropy(rho)?)])?;
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn repair(args: RepairArgs) -> Result<ExitCode> {
    let loaded = inputs::load_model_config(&args.config)?;
    let model = loaded.config.build()?;
    if model.codewords.len() != 2 {
        bail!("repair reports codeword pairs; use a two-codeword config");
    }
    let psi = inputs::initial_state(&model, &loaded.config)?;

    let mut sink = Sink::create(&args.out)?;
    sink.provenance(Some(loaded.provenance()), RATE_UNITS)?;
    sink.meta(
        "coherence",
        "<psi_0|rho|psi_1>; an initial phase e^{i phi} on psi_1 appears as coh_arg = -phi",
    )?;

    // Starts: one overlap-weighted mixture (error column 0), or one row
    // block per flip. An explicit --error always means single-flip starts.
    let overlaps = if args.error.is_some() {
        None
    } else {
        inputs::resolve_overlaps(
            &args.overlaps,
            &loaded.config,
            model.error_set.len() + 1,
            args.seed,
        )?
    };
    let starts: Vec<(usize, Operator)> = match &overlaps {
        Some((matrix, origin)) => {
            let corrupted = corrupted_state(&psi, &inputs::overlap_branches(&model), matrix)?;
            sink.meta("start", format_args!("overlap-weighted mixture over (none, flip 1..{}) from {origin}", model.error_set.len()))?;
            sink.meta(
                "overlap_projection_distance",
                fsci(corrupted.projection_distance),
            )?;
            if corrupted.projection_distance > 1e-12 {
                sink.note(
                    "declared overlaps were not realizable; Gram matrix projected to the \
                     nearest consistent one (distance above)",
                )?;
            }
            vec![(0, corrupted.rho)]
        }
        None => {
            let spec = args.error.as_deref().unwrap_or("1");
            inputs::parse_error_spec(spec, model.error_set.len())?
                .into_iter()
                .map(|k| Ok((k + 1, flipped_start(&model, &loaded.config, k)?)))
                .collect::<Result<_>>()?
        }
    };

    sink.header(&[
        "error", "t", "s_lin", "pop_cw0", "pop_cw1", "coh_re", "coh_im", "coh_abs", "coh_arg",
    ])?;
    for (tag, rho0) in starts {
        let (times, states) = propagate_from(&model, &rho0, args.tmax, args.steps)?;
        let rows =
            metrics_trajectory(&times, &states, &model.codewords[0], &model.codewords[1])?;
        for row in rows {
            let coh: C64 = row.coherence;
            sink.row(&[
                tag.to_string(),
                fsci(row.t),
                fsci(row.s_lin),
                fsci(row.pop_cw0),
                fsci(row.pop_cw1),
                fsci(coh.re),
                fsci(coh.im),
                fsci(coh.norm()),
                fsci(coh.arg()),
            ])?;
        }
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn funnel_populations(args: FunnelPopulationsArgs) -> Result<ExitCode> {
    let loaded = inputs::load_model_config(&args.config)?;
    let model = loaded.config.build()?;
    let errors = inputs::parse_error_spec(&args.error, model.error_set.len())?;

    let mut sink = Sink::create(&args.out)?;
    sink.provenance(Some(loaded.provenance()), RATE_UNITS)?;
    let mut columns = vec!["error".to_string(), "t".to_string()];
    columns.extend(model.basis.labels().iter().map(|l| format!("pop_{}", l.replace(',', "_"))));
    sink.header(&columns.iter().map(String::as_str).collect::<Vec<_>>())?;
    for error in errors {
        let rho0 = flipped_start(&model, &loaded.config, error)?;
        let (times, states) = propagate_from(&model, &rho0, args.tmax, args.steps)?;
        for (t, rho) in times.iter().zip(states.iter()) {
            let mut fields = vec![(error + 1).to_string(), fsci(*t)];
            fields.extend((0..model.basis.dim()).map(|k| fsci(rho.matrix[(k, k)].re)));
            sink.row(&fields)?;
        }
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn run_condition(
    model: &AqecModel,
    id: ConditionId,
    tol: f64,
    drainage_tol: f64,
) -> Result<ConditionReport> {
    let report = match id {
        ConditionId::Kl => {
            let mut errors = vec![Operator::identity(model.basis.clone())];
            errors.extend(model.error_set.iter().cloned());
            check_kl(&model.codewords, &errors, tol)?
        }
        ConditionId::Dfs => check_dfs(model, tol)?,
        ConditionId::FunnelPartition => check_funnel_partition(model, tol)?,
        ConditionId::Drainage => check_drainage(model, drainage_tol)?,
        ConditionId::Symmetry => check_symmetry(model, tol)?,
    };
    Ok(report)
}

fn parse_condition(token: &str) -> Result<ConditionId> {
    Ok(match token.to_ascii_uppercase().as_str() {
        "KL" => ConditionId::Kl,
        "DFS" => ConditionId::Dfs,
        "FUNNEL_PARTITION" => ConditionId::FunnelPartition,
        "DRAINAGE" => ConditionId::Drainage,
        "SYMMETRY" => ConditionId::Symmetry,
        other => bail!(
            "unknown condition {other:?}; choose from KL, DFS, FUNNEL_PARTITION, DRAINAGE, SYMMETRY"
        ),
    })
}

fn check(args: CheckArgs) -> Result<ExitCode> {
    let loaded = inputs::load_model_config(&args.config)?;
    let model = loaded.config.build()?;
    let ids: Vec<ConditionId> = match &args.conditions {
        Some(tokens) => {
            let mut ids = Vec::new();
            for token in tokens {
                let id = parse_condition(token)?;
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            ids
        }
        None => vec![
            ConditionId::Kl,
            ConditionId::Dfs,
            ConditionId::FunnelPartition,
            ConditionId::Drainage,
            ConditionId::Symmetry,
        ],
    };

    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        reports.push(run_condition(&model, id, args.tol, args.drainage_tol)?);
    }
    let all_passed = reports.iter().all(ConditionReport::passed);

    let invocation: Vec<String> = std::env::args().skip(1).collect();
    let document = json!({
        "tool": format!("aqec {}", env!("CARGO_PKG_VERSION")),
        "invocation": invocation.join(" "),
        "config": loaded.origin,
        "config_sha256": format!("{:x}", Sha256::digest(loaded.text.as_bytes())),
        "tolerance": args.tol,
        "drainage_tolerance": args.drainage_tol,
        "reports": reports,
    });
    let mut sink = Sink::create(&args.out)?;
    sink.raw(&serde_json::to_string_pretty(&document).context("serializing check reports")?)?;
    sink.raw("\n")?;
    sink.finish()?;
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn spins(args: SpinsArgs) -> Result<ExitCode> {
    let sys = args.couplings.system();
    let polarizations: &[Polarization] = match args.polarization {
        PolarizationArg::X => &[Polarization::X],
        PolarizationArg::Y => &[Polarization::Y],
        PolarizationArg::Both => &[Polarization::X, Polarization::Y],
    };

    let mut sink = Sink::create(&args.out)?;
    sink.provenance(None, ZETA_UNITS)?;
    sink.meta(
        "couplings",
        format_args!("d12={} d23={} d13={} j23={}", sys.d12, sys.d23, sys.d13, sys.j23),
    )?;
    let feasibility = aqec_feasibility(&sys, 1e-9)?;
    sink.meta("feasibility", feasibility.verdict)?;
    if let Some(gap) = feasibility.details["min_starred_unstarred_gap"].as_f64() {
        sink.meta("min_starred_unstarred_gap", fsci(gap))?;
    }
    sink.header(&["freq_zeta", "strength", "polarization", "from", "to", "starred"])?;
    for &polarization in polarizations {
        for line in dipole_spectrum(&sys, polarization)? {
            sink.row(&[
                fsci(line.freq_zeta),
                fsci(line.strength),
                line.polarization.to_string(),
                line.from.clone(),
                line.to.clone(),
                line.starred.to_string(),
            ])?;
        }
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn cavity(args: CavityArgs) -> Result<ExitCode> {
    if args.dims.len() != 3 {
        bail!("--dims takes exactly three lengths a,b,d (got {})", args.dims.len());
    }
    let dims = [args.dims[0], args.dims[1], args.dims[2]];
    let mut sink = Sink::create(&args.out)?;
    sink.provenance(None, ZETA_UNITS)?;
    sink.meta("dims", format_args!("{},{},{}", dims[0], dims[1], dims[2]))?;
    sink.meta("omega_max", args.omega_max)?;

    if !args.design {
        sink.header(&["family", "m", "n", "p", "freq_zeta", "center_field"])?;
        for mode in cavity_modes(dims[0], dims[1], dims[2], args.omega_max)? {
            sink.row(&[
                mode.family.to_string(),
                mode.m.to_string(),
                mode.n.to_string(),
                mode.p.to_string(),
                fsci(mode.freq_zeta),
                mode.center_field.to_string(),
            ])?;
        }
        sink.finish()?;
        return Ok(ExitCode::SUCCESS);
    }

    let sys = args.couplings.system();
    let report =
        design_report(&sys, dims, args.omega_max, args.match_tol, args.zeta_inverse_cm)?;
    sink.meta(
        "couplings",
        format_args!("d12={} d23={} d13={} j23={}", sys.d12, sys.d23, sys.d13, sys.j23),
    )?;
    sink.meta("match_tol", args.match_tol)?;
    sink.meta("required_q", fsci(report.required_q))?;
    sink.meta("q_ceiling", fsci(report.q_ceiling))?;
    sink.meta("raw_mode_count", report.raw_mode_count)?;
    sink.meta("transverse_mode_count", report.transverse_mode_count)?;
    sink.meta("matched_mode_count", report.matched_mode_count)?;
    sink.meta("spurious_mode_count", report.spurious_mode_count)?;
    if let Some(kelvin) = report.temperature_threshold_kelvin {
        sink.meta("temperature_threshold_kelvin", fsci(kelvin))?;
    }
    for note in &report.notes {
        sink.note(note)?;
    }
    sink.header(&[
        "role",
        "line_freq_zeta",
        "mode",
        "center_field",
        "offset_zeta",
        "line_over_offset",
        "matched",
    ])?;
    for m in &report.starred {
        sink.row(&[
            "starred".into(),
            fsci(m.line.freq_zeta),
            m.mode.as_ref().map(|x| x.name()).unwrap_or_else(|| "none".into()),
            m.mode.as_ref().map(|x| x.center_field.to_string()).unwrap_or_else(|| "none".into()),
            fsci(m.offset),
            fsci(m.line.freq_zeta / m.offset),
            m.matched.to_string(),
        ])?;
    }
    for g in &report.unstarred {
        sink.row(&[
            "unstarred".into(),
            fsci(g.line.freq_zeta),
            g.nearest.as_ref().map(|x| x.name()).unwrap_or_else(|| "none".into()),
            g.nearest
                .as_ref()
                .map(|x| x.center_field.to_string())
                .unwrap_or_else(|| "none".into()),
            fsci(g.offset),
            fsci(g.required_q),
            String::new(),
        ])?;
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn jump_oracle(args: JumpOracleArgs) -> Result<ExitCode> {
    let loaded = inputs::load_or_baseline(&args.config)?;
    let model = loaded.config.build()?;
    let errors = inputs::parse_error_spec(&args.error, model.error_set.len())?;
    if errors.len() != 1 {
        bail!("jump-oracle traces one trajectory; pick a single --error");
    }
    if args.steps == 0 || args.levels == 0 {
        bail!("--steps and --levels must be at least 1");
    }
    let finest = args
        .steps
        .checked_shl(args.levels as u32 - 1)
        .filter(|n| n * model.collapse_terms.len() <= REGISTER_BUDGET)
        .ok_or_else(|| {
            anyhow::anyhow!(
                "finest level would need more than {REGISTER_BUDGET} bath registers \
                 (steps x collapse channels); lower --steps or --levels"
            )
        })?;

    let psi0 = inputs::initial_state(&model, &loaded.config)?;
    let psi0 = model.error_set[errors[0]].apply(&psi0)?.normalized()?;
    let exact = model
        .generator()?
        .propagate(&psi0.projector(), &[args.tmax])?
        .pop()
        .expect("one requested time");

    let mut sink = Sink::create(&args.out)?;
    sink.provenance(Some(loaded.provenance()), RATE_UNITS)?;
    sink.meta("comparison", "Frobenius distance of the reduced expansion state to exp(Gamma t)")?;
    sink.meta("register_budget", format_args!("{REGISTER_BUDGET} (finest level uses {finest})"))?;
    sink.header(&["level", "dt", "steps", "t", "frobenius_error", "ratio"])?;
    let mut previous: Option<f64> = None;
    for level in 0..args.levels {
        let n_steps = args.steps << level;
        let dt = args.tmax / n_steps as f64;
        let expansion =
            jump_expand_pure(&model.hamiltonian, &model.collapse_terms, &psi0, dt, n_steps)?;
        let error = expansion.reduce_to_system()?.sub(&exact)?.norm_fro();
        let ratio = previous.map(|p| fsci(p / error)).unwrap_or_default();
        sink.row(&[
            level.to_string(),
            fsci(dt),
            n_steps.to_string(),
            fsci(args.tmax),
            fsci(error),
            ratio,
        ])?;
        previous = Some(error);
    }
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}
