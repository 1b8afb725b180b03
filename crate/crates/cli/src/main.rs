//! `nlwave`: command-line driver for the nonlocal predator-prey
//! traveling-wave toolkit.
//!
//! Every command reads a single JSON run configuration, writes
//! machine-readable outputs (17-significant-digit JSON / CSV) into an output
//! directory, and echoes the resolved configuration next to them. Exit
//! codes: 0 success, 2 configuration error, 3 mathematical precondition
//! violated, 4 numerical failure.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{InitialCfg, RunConfig};
use nlwave_core::{bounds, dispersion, io, simulate, wave, Error, Kernel, ModelParams};

#[derive(Parser)]
#[command(name = "nlwave", version, about = "Traveling waves for a predator-prey system with nonlocal dispersal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration's `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress messages
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal wave speed s* and its minimizer
    Speed(Common),
    /// Decay-rate roots of the characteristic function at a given speed
    Roots(Common),
    /// Construct and verify the upper/lower solution bundle
    Bounds(Common),
    /// Solve for a wave profile between verified bounds
    Wave(Common),
    /// Time-step the full system and measure the invasion speed
    Simulate(Common),
    /// Check the kernel hypotheses
    #[command(name = "validate-kernel")]
    ValidateKernel(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&Ctx) -> Result<(), Error>) = match &cli.command {
        Command::Speed(c) => (c, cmd_speed),
        Command::Roots(c) => (c, cmd_roots),
        Command::Bounds(c) => (c, cmd_bounds),
        Command::Wave(c) => (c, cmd_wave),
        Command::Simulate(c) => (c, cmd_simulate),
        Command::ValidateKernel(c) => (c, cmd_validate_kernel),
    };
    let ctx = match Ctx::prepare(common) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Invalid(_) | Error::Io(_) => 2,
                Error::Domain(_) | Error::Hypothesis(_) => 3,
                Error::NonConvergence { .. } | Error::SimAbort { .. } => 4,
            };
            ExitCode::from(code)
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out_dir: PathBuf,
    config_dir: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn prepare(common: &Common) -> Result<Self, Error> {
        let cfg = RunConfig::load(&common.config)?;
        let config_dir = common
            .config
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let out_dir = common
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out_dir)?;
        let ctx = Ctx { cfg, out_dir, config_dir, quiet: common.quiet };
        // Echo the resolved configuration for reproducibility.
        ctx.write("config.json", &io::to_json(&ctx.cfg)?)?;
        Ok(ctx)
    }

    fn write(&self, name: &str, content: &str) -> Result<(), Error> {
        std::fs::write(self.out_dir.join(name), content)?;
        Ok(())
    }

    fn say(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }

    fn params(&self) -> Result<ModelParams, Error> {
        self.cfg.model_params()
    }

    fn kernels(&self) -> Result<(Kernel, Kernel), Error> {
        Ok((self.cfg.kernel(1, &self.config_dir)?, self.cfg.kernel(2, &self.config_dir)?))
    }
}

fn cmd_speed(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.params()?;
    let (_, k2) = ctx.kernels()?;
    let report = dispersion::minimal_speed(&params, &k2)?;
    ctx.write("speed.json", &io::to_json(&report)?)?;
    ctx.say(&format!(
        "s* = {:.12} at lambda* = {:.12} ({})",
        report.s_star,
        report.lambda_star,
        if report.attained { "attained" } else { "infimum not attained on probe range" }
    ));
    if !report.attained {
        return Err(Error::Domain(
            "minimal-speed infimum not attained on the probe range".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct RootsOut {
    s: f64,
    s_star: f64,
    lambda1: f64,
    lambda2: f64,
}

fn cmd_roots(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.params()?;
    let (_, k2) = ctx.kernels()?;
    let spec = ctx
        .cfg
        .roots
        .as_ref()
        .ok_or_else(|| Error::Invalid("config is missing the `roots` block".into()))?;
    let report = dispersion::minimal_speed(&params, &k2)?;
    let pair = dispersion::a_roots(&params, &k2, spec.s)?;
    let out = RootsOut { s: spec.s, s_star: report.s_star, lambda1: pair.lambda1, lambda2: pair.lambda2 };
    ctx.write("roots.json", &io::to_json(&out)?)?;
    ctx.say(&format!("lambda1 = {:.12}, lambda2 = {:.12}", pair.lambda1, pair.lambda2));
    Ok(())
}

fn build_bundle(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    spec: &config::SpeedSpec,
) -> Result<bounds::BoundsBundle, Error> {
    match spec.resolve()? {
        Some(s) => bounds::construct_supercritical(params, k1, k2, s),
        None => bounds::construct_critical(params, k1, k2),
    }
}

fn cmd_bounds(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.params()?;
    let (k1, k2) = ctx.kernels()?;
    let spec = ctx
        .cfg
        .bounds
        .as_ref()
        .ok_or_else(|| Error::Invalid("config is missing the `bounds` block".into()))?;
    let bundle = build_bundle(&params, &k1, &k2, &spec.s)?;
    ctx.write("bundle.json", &io::to_json(&bundle)?)?;
    let report = bounds::verify(&bundle, &k1, &k2, spec.grid_span, spec.grid_n, spec.kink_radius);
    ctx.write("verification.json", &io::to_json(&report)?)?;
    ctx.say(&format!(
        "bundle at s = {:.12} ({:?}): verification {}",
        bundle.s,
        bundle.regime,
        if report.pass { "PASS" } else { "FAIL" }
    ));
    if !report.pass {
        return Err(Error::Domain(format!(
            "bundle failed verification: U1 max {:.3e}, U2 max {:.3e}, L1 min {:.3e}, L2 min {:.3e}",
            report.u1_max, report.u2_max, report.l1_min, report.l2_min
        )));
    }
    Ok(())
}

fn cmd_wave(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.params()?;
    let (k1, k2) = ctx.kernels()?;
    let spec = ctx
        .cfg
        .wave
        .as_ref()
        .ok_or_else(|| Error::Invalid("config is missing the `wave` block".into()))?;

    let bundle = match &spec.bundle {
        Some(path) => {
            let resolved = if path.is_absolute() { path.clone() } else { ctx.config_dir.join(path) };
            let text = std::fs::read_to_string(&resolved).map_err(|e| {
                Error::Invalid(format!("cannot read bundle {}: {e}", resolved.display()))
            })?;
            let bundle: bounds::BoundsBundle = io::from_json(&text)?;
            if let Some(s) = spec.s.resolve()? {
                if (bundle.s - s).abs() > 1e-12 * s {
                    return Err(Error::Invalid(format!(
                        "bundle speed {} does not match requested s = {s}",
                        bundle.s
                    )));
                }
            }
            bundle
        }
        None => build_bundle(&params, &k1, &k2, &spec.s)?,
    };

    // The solver's precondition is a verified bundle.
    let span = 50.0_f64.max(bundle.kinks().iter().fold(0.0_f64, |m, &k| m.max(k.abs())) + 10.0);
    let check = bounds::verify(&bundle, &k1, &k2, span, 4001, 1e-3);
    if !check.pass {
        return Err(Error::Domain(format!(
            "bundle failed verification before solving: U1 max {:.3e}, U2 max {:.3e}, L1 min {:.3e}, L2 min {:.3e}",
            check.u1_max, check.u2_max, check.l1_min, check.l2_min
        )));
    }

    let opts = wave::SolveOptions {
        half_width: spec.half_width,
        intervals: spec.n,
        tol: spec.tol,
        max_iter: spec.max_iter,
        shift: 0.0,
    };
    let write_profile = |profile: &wave::WaveProfile| -> Result<(), Error> {
        ctx.write("profile.csv", &io::profile_to_csv(profile))?;
        ctx.write("profile.json", &io::to_json(&io::ProfileSidecar::of(profile, "bundle.json"))?)?;
        ctx.write("tail_report.json", &io::to_json(&wave::tail_check(profile))?)?;
        Ok(())
    };
    ctx.write("bundle.json", &io::to_json(&bundle)?)?;
    match wave::solve(&params, &k1, &k2, &bundle, &opts) {
        Ok(profile) => {
            write_profile(&profile)?;
            ctx.say(&format!(
                "wave at s = {:.12}: residual ({:.3e}, {:.3e}) after {} sweeps",
                profile.s, profile.residual.0, profile.residual.1, profile.iterations
            ));
            Ok(())
        }
        Err(Error::NonConvergence { context, iterations, residual, best }) => {
            if let Some(best) = &best {
                write_profile(best)?;
                ctx.say("nonconverged best iterate written to profile.csv");
            }
            Err(Error::NonConvergence { context, iterations, residual, best })
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    params: &'a config::ParamsCfg,
    kernel1: &'a config::KernelCfg,
    kernel2: &'a config::KernelCfg,
    x_max: f64,
    h: f64,
    t_end: f64,
    dt: f64,
    dt_bound: f64,
    level: f64,
    coarse_grid: bool,
    guard_activated: bool,
    snapshot_times: Vec<f64>,
    snapshot_files: Vec<String>,
}

#[derive(Serialize)]
struct SpeedSummary {
    s_star: f64,
    fit: Option<simulate::SpeedFit>,
    relative_gap: Option<f64>,
    note: Option<String>,
}

fn cmd_simulate(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.params()?;
    let (k1, k2) = ctx.kernels()?;
    let spec = ctx
        .cfg
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Invalid("config is missing the `simulate` block".into()))?;

    let loaded_profile = match &spec.initial {
        InitialCfg::Invasion => None,
        InitialCfg::Wave { profile, sidecar, offset } => {
            let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { ctx.config_dir.join(p) };
            let csv = std::fs::read_to_string(resolve(profile)).map_err(|e| {
                Error::Invalid(format!("cannot read profile {}: {e}", profile.display()))
            })?;
            let side: io::ProfileSidecar = io::from_json(
                &std::fs::read_to_string(resolve(sidecar)).map_err(|e| {
                    Error::Invalid(format!("cannot read sidecar {}: {e}", sidecar.display()))
                })?,
            )?;
            let profile = io::profile_from_csv(&csv, &side)?;
            let offset = offset.unwrap_or(-profile.grid[0] + 20.0);
            Some((profile, offset))
        }
    };

    let opts = simulate::RunOptions {
        x_max: spec.x_max,
        h: spec.h,
        t_end: spec.t_end,
        dt: spec.dt,
        snapshot_every: spec.snapshot_every,
        level: spec.level,
        extra_levels: Vec::new(),
    };
    let initial = match &loaded_profile {
        None => simulate::InitialData::Invasion,
        Some((profile, offset)) => simulate::InitialData::Wave { profile, offset: *offset },
    };
    let traj = simulate::run(&params, &k1, &k2, initial, &opts)?;

    let mut snapshot_times = Vec::new();
    let mut snapshot_files = Vec::new();
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:04}.csv");
        ctx.write(&name, &io::snapshot_to_csv(snap))?;
        snapshot_times.push(snap.t);
        snapshot_files.push(name);
    }
    ctx.write("front_trace.csv", &io::trace_to_csv(&traj.trace))?;

    let guard = traj.snapshots.last().map(|s| s.guard_activated).unwrap_or(false);
    let manifest = Manifest {
        params: &ctx.cfg.params,
        kernel1: &ctx.cfg.kernel1,
        kernel2: &ctx.cfg.kernel2,
        x_max: spec.x_max,
        h: spec.h,
        t_end: spec.t_end,
        dt: traj.dt,
        dt_bound: traj.dt_bound,
        level: traj.trace.level,
        coarse_grid: traj.coarse_grid,
        guard_activated: guard,
        snapshot_times,
        snapshot_files,
    };
    ctx.write("manifest.json", &io::to_json(&manifest)?)?;

    let s_star = dispersion::minimal_speed(&params, &k2)?.s_star;
    let summary = match simulate::spreading_speed(&traj.trace) {
        Ok(fit) => {
            ctx.say(&format!(
                "measured front speed {:.6} vs s* = {:.6} ({:+.2}%)",
                fit.speed,
                s_star,
                100.0 * (fit.speed - s_star) / s_star
            ));
            SpeedSummary {
                s_star,
                relative_gap: Some((fit.speed - s_star) / s_star),
                fit: Some(fit),
                note: None,
            }
        }
        Err(e) => SpeedSummary {
            s_star,
            fit: None,
            relative_gap: None,
            note: Some(format!("speed fit unavailable: {e}")),
        },
    };
    ctx.write("speed_summary.json", &io::to_json(&summary)?)?;

    if let Some((profile, offset)) = &loaded_profile {
        let last = traj.snapshots.last().expect("run records the final state");
        let drift =
            simulate::drift_against_translation(last, profile, *offset, profile.s * last.t);
        ctx.write("drift_report.json", &io::to_json(&drift)?)?;
        ctx.say(&format!("wave drift over T = {}: {:.4e}", last.t, drift.drift));
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationOut {
    kernel1: nlwave_core::kernels::ValidationReport,
    kernel2: nlwave_core::kernels::ValidationReport,
}

fn cmd_validate_kernel(ctx: &Ctx) -> Result<(), Error> {
    let (k1, k2) = ctx.kernels()?;
    let out = ValidationOut { kernel1: k1.validate(), kernel2: k2.validate() };
    ctx.write("validation.json", &io::to_json(&out)?)?;
    ctx.say(&format!(
        "kernel1: {} | kernel2: {}",
        if out.kernel1.pass { "PASS" } else { "FAIL" },
        if out.kernel2.pass { "PASS" } else { "FAIL" }
    ));
    Ok(())
}
