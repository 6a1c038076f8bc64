//! Subcommands and their exit codes.

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use vetra::experiments::{
    coherence_experiment, config_hash, disorder_ensemble, sweep_beta0, unit_bridge, BetaGrid,
    PhysicalParams, UnitBridge,
};
use vetra::full::{adiabatic_check, pure_dephasing_fit, FullModelConfig};
use vetra::reduced::integrate;
use vetra::resonance::{analyze, ResonanceOptions};

use crate::config::{parse_config, ConfigError, ConfigFile, RunConfig};
use crate::output::{self, write_atomic, RunManifest, Series};

/// Realizations used by `--quick`.
pub const QUICK_REALIZATIONS: usize = 100;
/// Largest population RMS deviation `validate` accepts.
pub const ADIABATIC_RMS_LIMIT: f64 = 0.05;
/// Largest relative dephasing-rate error `validate` accepts.
pub const DEPHASING_REL_LIMIT: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "vetra", version, about = "Excitation transport along a driven two-level chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory.
    Simulate(Common),
    /// Final efficiency over a grid of drive strengths.
    Sweep(SweepArgs),
    /// Disorder-averaged sweep.
    Ensemble(EnsembleArgs),
    /// |σ_0N(t)| from the donor superposition, with and without the resonator.
    Coherence(Common),
    /// Sideband resonances and predicted suppression points.
    Resonance(ResonanceArgs),
    /// Compare the full resonator model with the reduced dynamics.
    Validate(Common),
    /// Convert device parameters to model units.
    ConvertUnits(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Also write SVG charts.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as MIN:MAX:STEPS.
    #[arg(long, value_parser = parse_grid)]
    pub beta0: Option<BetaGrid<f64>>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    /// 100 realizations unless --realizations is given.
    #[arg(long)]
    pub quick: bool,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct ResonanceArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub max_order: u32,
    #[arg(long, default_value_t = 2)]
    pub n_zeros: usize,
    /// Detuning tolerance; defaults to 1e-6·ν.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Configuration with a `physical` block; the GaAs beam values otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

pub fn parse_grid(s: &str) -> Result<BetaGrid<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected MIN:MAX:STEPS, got `{s}`"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    let steps = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("`{}`: {e}", parts[2]))?;
    BetaGrid::new(num(parts[0])?, num(parts[1])?, steps).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] vetra::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => 2,
            CliError::Config(ConfigError::Model(e)) if e.is_numerical() => 2,
            CliError::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

fn report_error(e: &CliError) {
    let color = std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal();
    let tag = if color { "\x1b[31merror\x1b[0m" } else { "error" };
    let mut msg = e.to_string();
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        let text = s.to_string();
        if !msg.contains(&text) {
            msg.push_str(": ");
            msg.push_str(&text);
        }
        src = s.source();
    }
    eprintln!("{tag}: {msg}");
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    let started = Instant::now();
    let (out, mut manifest) = match cmd {
        Command::Simulate(a) => simulate(a)?,
        Command::Sweep(a) => sweep(a)?,
        Command::Ensemble(a) => ensemble(a)?,
        Command::Coherence(a) => coherence(a)?,
        Command::Resonance(a) => resonance(a)?,
        Command::Validate(a) => validate(a)?,
        Command::ConvertUnits(a) => convert_units(a)?,
    };
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let name = format!("{}.manifest.json", manifest.subcommand);
    write(&out, &name, &manifest.to_json())?;
    Ok(())
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(dir, name, bytes).map_err(|source| CliError::Io {
        path: dir.join(name).display().to_string(),
        source,
    })?;
    Ok(())
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut rc = parse_config(&common.config)?;
    if let Some(h) = common.horizon {
        rc.integration.horizon = h;
    }
    if let Some(r) = common.rel_tol {
        rc.integration.tol.rel = r;
    }
    if let Some(a) = common.abs_tol {
        rc.integration.tol.abs = a;
    }
    rc.integration.validate()?;
    Ok(rc)
}

fn manifest_for(sub: &str, rc: &RunConfig) -> RunManifest {
    let mut m = RunManifest::new(sub);
    m.config = Some(rc.effective_file());
    m.config_hash = Some(config_hash(&rc.chain));
    m.tolerances = Some(output::Tolerances {
        rel: rc.integration.tol.rel,
        abs: rc.integration.tol.abs,
    });
    m.horizon = Some(rc.integration.horizon);
    m.seed = rc.disorder.as_ref().map(|d| d.master_seed);
    m
}

fn emit(
    out: &Path,
    manifest: &mut RunManifest,
    name: &str,
    bytes: &[u8],
) -> Result<(), CliError> {
    write(out, name, bytes)?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

fn simulate(a: &Common) -> Result<(PathBuf, RunManifest), CliError> {
    let rc = load(a)?;
    let traj = integrate(&rc.init, &rc.chain, &rc.integration)?;
    let mut m = manifest_for("simulate", &rc);
    emit(&a.out, &mut m, "trajectory.csv", &output::trajectory_csv(&traj))?;
    if a.svg {
        let n = traj.n_sites();
        let pn: Vec<f64> = traj.populations.iter().map(|p| p[n]).collect();
        let label = format!("population of site {n}");
        let svg = output::line_chart(
            "Trajectory",
            "t",
            "weight",
            &[
                Series { label: "efficiency", x: &traj.times, y: &traj.efficiency },
                Series { label: &label, x: &traj.times, y: &pn },
            ],
        );
        emit(&a.out, &mut m, "trajectory.svg", svg.as_bytes())?;
    }
    for w in &traj.psd_warnings {
        eprintln!("warning: state left the positive cone at t = {}", w.t);
    }
    println!("efficiency {}", output::fmt_f64(vetra::reduced::efficiency(&traj)));
    Ok((a.out.clone(), m))
}

fn sweep_setup(a: &SweepArgs) -> Result<RunConfig, CliError> {
    let mut rc = load(&a.common)?;
    // Only the final efficiency is needed; keep two samples unless the file asks otherwise.
    if rc.file.integration.and_then(|i| i.samples).is_none() {
        rc.integration.samples = 2;
    }
    rc.grid = Some(
        a.beta0
            .or(rc.grid)
            .unwrap_or_else(vetra::presets::detuned_grid),
    );
    Ok(rc)
}

fn sweep_chart(res: &vetra::SweepResult64, title: &str) -> String {
    let base = vec![res.baseline; res.beta0.len()];
    output::line_chart(
        title,
        "beta0",
        "efficiency",
        &[
            Series { label: "efficiency", x: &res.beta0, y: &res.efficiency },
            Series { label: "no resonator", x: &res.beta0, y: &base },
        ],
    )
}

fn sweep(a: &SweepArgs) -> Result<(PathBuf, RunManifest), CliError> {
    let rc = sweep_setup(a)?;
    let grid = rc.grid.expect("set above");
    let res = sweep_beta0(&rc.chain, &grid, &rc.init, &rc.integration)?;
    let mut m = manifest_for("sweep", &rc);
    m.seed = None;
    let out = &a.common.out;
    emit(out, &mut m, "sweep.csv", &output::sweep_csv(&res))?;
    if a.common.svg {
        emit(out, &mut m, "sweep.svg", sweep_chart(&res, "Efficiency").as_bytes())?;
    }
    let (b, e) = res.peak();
    println!("peak efficiency {e:.6} at beta0 = {b}; baseline {:.6}", res.baseline);
    Ok((out.clone(), m))
}

fn ensemble(a: &EnsembleArgs) -> Result<(PathBuf, RunManifest), CliError> {
    let mut rc = sweep_setup(&a.sweep)?;
    let spec = rc
        .disorder
        .as_mut()
        .ok_or_else(|| CliError::Usage("ensemble needs a `disorder` block in the config".into()))?;
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    if let Some(r) = a.realizations {
        spec.n_realizations = r;
    } else if a.quick {
        spec.n_realizations = QUICK_REALIZATIONS;
    }
    spec.validate(rc.chain.n_sites())?;
    let spec = spec.clone();
    let grid = rc.grid.expect("set in sweep_setup");
    let res = disorder_ensemble(&rc.chain, &spec, &grid, &rc.init, &rc.integration, a.workers)?;
    let mut m = manifest_for("ensemble", &rc);
    m.workers = Some(a.workers);
    let out = &a.sweep.common.out;
    emit(out, &mut m, "ensemble.csv", &output::sweep_csv(&res))?;
    if a.sweep.common.svg {
        let title = format!("Mean efficiency, {} realizations", spec.n_realizations);
        emit(out, &mut m, "ensemble.svg", sweep_chart(&res, &title).as_bytes())?;
    }
    let (b, e) = res.peak();
    println!("peak mean efficiency {e:.6} at beta0 = {b}; baseline {:.6}", res.baseline);
    Ok((out.clone(), m))
}

fn coherence(a: &Common) -> Result<(PathBuf, RunManifest), CliError> {
    let rc = load(a)?;
    let reference = rc.coherence_reference()?;
    let c = coherence_experiment(&rc.chain, &reference, &rc.integration)?;
    let mut m = manifest_for("coherence", &rc);
    emit(&a.out, &mut m, "coherence.csv", &output::coherence_csv(&c))?;
    if a.svg {
        let svg = output::line_chart(
            "Coherence with the ground state",
            "t",
            "|sigma_0N|",
            &[
                Series { label: "with resonator", x: &c.times, y: &c.with_vibration },
                Series { label: "reference", x: &c.times, y: &c.without_vibration },
            ],
        );
        emit(&a.out, &mut m, "coherence.svg", svg.as_bytes())?;
    }
    let (v, b) = c.max_until(rc.integration.horizon);
    println!("max |sigma_0N|: {v:.6} with resonator, {b:.6} reference");
    Ok((a.out.clone(), m))
}

fn resonance(a: &ResonanceArgs) -> Result<(PathBuf, RunManifest), CliError> {
    let rc = parse_config(&a.config)?;
    let opts = ResonanceOptions {
        max_order: a.max_order,
        n_zeros: a.n_zeros,
        tol: a.tol,
        ..Default::default()
    };
    let rep = analyze(&rc.chain, &opts);
    let text = output::resonance_text(&rep);
    let mut m = RunManifest::new("resonance");
    m.config = Some(rc.file.clone());
    m.config_hash = Some(config_hash(&rc.chain));
    emit(&a.out, &mut m, "resonance.txt", text.as_bytes())?;
    emit(&a.out, &mut m, "resonance.csv", &output::resonance_csv(&rep))?;
    print!("{text}");
    Ok((a.out.clone(), m))
}

fn validate(a: &Common) -> Result<(PathBuf, RunManifest), CliError> {
    let rc = load(a)?;
    let full = FullModelConfig::new(rc.chain.clone(), rc.n_fock())?;
    let report = adiabatic_check(&full, &rc.init, &rc.integration)?;
    let mut text = format!(
        "full model: {} sites, {} Fock levels\npopulation RMS deviation {:.3e} (limit {ADIABATIC_RMS_LIMIT})\nmax |sigma_0N| deviation {:.3e}\n",
        rc.chain.n_sites(),
        full.n_fock(),
        report.rms_population_deviation,
        report.max_coherence_deviation,
    );
    if let Some(w) = &report.warning {
        text.push_str(&format!("warning: {w}\n"));
        eprintln!("warning: {w}");
    }
    let mut ok = report.rms_population_deviation <= ADIABATIC_RMS_LIMIT;
    let g = rc.chain.g();
    if rc.chain.n_sites() >= 2 && g[0] != g[1] {
        let fit = pure_dephasing_fit(&full, (1, 2), &rc.integration)?;
        text.push_str(&format!(
            "dephasing rate sites 1-2: measured {:.6e}, predicted {:.6e}, relative error {:.3e} (limit {DEPHASING_REL_LIMIT})\n",
            fit.measured,
            fit.predicted,
            fit.relative_error()
        ));
        ok &= fit.relative_error() <= DEPHASING_REL_LIMIT;
    }
    text.push_str(if ok { "result: within tolerance\n" } else { "result: outside tolerance\n" });
    let mut m = manifest_for("validate", &rc);
    emit(&a.out, &mut m, "validate.txt", text.as_bytes())?;
    print!("{text}");
    if !ok {
        // The manifest still records the failed run.
        m.wall_clock_seconds = 0.0;
        write(&a.out, "validate.manifest.json", &m.to_json())?;
        return Err(CliError::CheckFailed("reduced dynamics outside tolerance".into()));
    }
    Ok((a.out.clone(), m))
}

fn bridge_text(p: &PhysicalParams, b: &UnitBridge) -> String {
    format!(
        "eta {}\nmass {:e} kg\nnu {:e} 1/s\nQ {}\n\
         q0 = sqrt(hbar/2 m nu) = {:.4e} m\n\
         g = nu eta/(2 q0) = {:.4e} 1/(s m)\n\
         g q0 = {:.4e} 1/s\n\
         gamma = nu/Q = {:.4e} 1/s\n\
         model units (nu = 1): g = {}, gamma = {}, omega = {:.4}, lambda = {:.4}\n\
         g q0/gamma = {:.4} ({:?})\n",
        p.eta,
        p.mass,
        p.nu,
        p.quality,
        b.q0_si,
        b.g_si,
        b.g_rate_si,
        b.gamma_si,
        b.g_model,
        b.gamma_model,
        b.omega_model,
        b.lambda_model,
        b.adiabaticity,
        b.regime,
    )
}

fn convert_units(a: &ConvertArgs) -> Result<(PathBuf, RunManifest), CliError> {
    let mut m = RunManifest::new("convert-units");
    let phys = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let file: ConfigFile = serde_json::from_str(&text).map_err(ConfigError::from)?;
            let p = file
                .physical
                .ok_or_else(|| CliError::Usage("config has no `physical` block".into()))?;
            m.config = Some(file);
            p.into()
        }
        None => PhysicalParams::gaas_beam(),
    };
    let b = unit_bridge(&phys)?;
    let text = bridge_text(&phys, &b);
    let json = serde_json::json!({
        "q0_m": b.q0_si,
        "g_per_s_per_m": b.g_si,
        "g_q0_per_s": b.g_rate_si,
        "gamma_per_s": b.gamma_si,
        "g_model": b.g_model,
        "gamma_model": b.gamma_model,
        "omega_model": b.omega_model,
        "lambda_model": b.lambda_model,
        "adiabaticity": b.adiabaticity,
        "regime": format!("{:?}", b.regime),
    });
    let mut bytes = serde_json::to_vec_pretty(&json).expect("json");
    bytes.push(b'\n');
    emit(&a.out, &mut m, "units.json", &bytes)?;
    print!("{text}");
    Ok((a.out.clone(), m))
}
