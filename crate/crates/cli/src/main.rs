use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pilotlink::channel::{ChannelProfile, Fading};
use pilotlink::framing::{parse_modulation, FrameConfig};
use pilotlink::harness::{
    emit_sigmf, parse_sigmf, run_id, run_sweep, run_trial, write_cf32_le, Environment, SigmfSource, SimSettings,
    SweepSpec, TrialOutput, TrialSpec,
};
use pilotlink::metrics::{
    aggregate_log, improvement_table, read_frame_log, write_frame_log, write_improvement_csv, write_trials_csv,
    FrameRecord, TrialResult,
};
use pilotlink::seed;
use pilotlink::sync::DetectorConfig;

#[derive(Parser)]
#[command(name = "pilotlink", version, about = "Pilot-aided burst link simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run trials of a single (modulation, pilot repetitions) cell.
    Sim(SimArgs),
    /// Run a λ_p × modulation × channel grid from a config file.
    Sweep(SweepArgs),
    /// Recompute per-trial results from a frame log.
    Report(ReportArgs),
    /// Check SigMF metadata files.
    ValidateSigmf(ValidateArgs),
}

#[derive(Args)]
struct EnvArgs {
    /// Scenario label written to SigMF metadata.
    #[arg(long, default_value = "")]
    environment: String,
    /// Node altitude in metres (omitted means null).
    #[arg(long)]
    altitude_m: Option<f64>,
    /// Link distance in metres (omitted means null).
    #[arg(long)]
    link_distance_m: Option<f64>,
}

#[derive(Args)]
struct DetectorArgs {
    /// Training detection threshold on the normalized autocorrelation.
    #[arg(long, default_value_t = DetectorConfig::default().rho_threshold)]
    rho_threshold: f64,
    /// Golay peak threshold as a fraction of the ideal peak 2·N_g.
    #[arg(long, default_value_t = DetectorConfig::default().mf_threshold_factor)]
    mf_threshold_factor: f64,
}

impl DetectorArgs {
    fn settings(&self) -> Result<SimSettings> {
        let s = SimSettings {
            detector: DetectorConfig {
                rho_threshold: self.rho_threshold,
                mf_threshold_factor: self.mf_threshold_factor,
            },
            ..SimSettings::default()
        };
        s.validate()?;
        Ok(s)
    }
}

impl EnvArgs {
    fn to_env(&self) -> Environment {
        Environment {
            environment: self.environment.clone(),
            altitude_m: self.altitude_m,
            link_distance_m: self.link_distance_m,
        }
    }
}

#[derive(Args)]
struct SimArgs {
    /// Modulation: 4, 8, 16 or 64 (a `qam` suffix is accepted).
    #[arg(long = "mod", default_value = "16qam", value_parser = parse_mod)]
    modulation: u32,
    /// Pilot repetitions per frame: 1, 2, 4, 6 or 8.
    #[arg(long, default_value_t = 4)]
    pilot_reps: usize,
    /// Frame format file (`key = value`); replaces --mod and --pilot-reps.
    #[arg(long, conflicts_with_all = ["modulation", "pilot_reps"])]
    frame_config: Option<PathBuf>,
    /// Per-sample SNR in dB, or `inf`.
    #[arg(long, default_value = "inf", value_parser = parse_inf_f64)]
    snr_db: Finite<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    cfo_hz: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    drift_hz_per_s: f64,
    /// Standard deviation of the per-epoch frequency random walk, Hz.
    #[arg(long, default_value_t = 0.0)]
    drift_walk_hz: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_in_rad: f64,
    /// Coherence epoch in symbols, or `inf`.
    #[arg(long, default_value = "inf", value_parser = parse_inf_usize)]
    coherence_symbols: Finite<usize>,
    /// none, block-rayleigh or block-rician(K).
    #[arg(long, default_value = "none", value_parser = parse_fading)]
    fading: Fading,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Results CSV (one row per trial); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frame log CSV.
    #[arg(long)]
    frame_log: Option<PathBuf>,
    /// Directory for `<run-id>.sigmf-meta` files.
    #[arg(long)]
    sigmf_out: Option<PathBuf>,
    /// Directory for `<run-id>.sigmf-data` raw I/Q dumps.
    #[arg(long)]
    iq_out: Option<PathBuf>,
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    detector: DetectorArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `frames_per_trial`.
    #[arg(long)]
    frames: Option<usize>,
    /// Overrides `trials_per_cell`.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    frame_log: Option<PathBuf>,
    #[arg(long)]
    sigmf_out: Option<PathBuf>,
    /// Goodput improvement table CSV.
    #[arg(long)]
    improvement: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    detector: DetectorArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Frame log written by `sim` or `sweep`.
    #[arg(long)]
    log: PathBuf,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    improvement: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

fn parse_mod(s: &str) -> Result<u32, String> {
    parse_modulation(s).map_err(|e| e.to_string())
}

/// A value that may be given as `inf`, held as `None`.
#[derive(Debug, Clone, Copy)]
struct Finite<T>(Option<T>);

fn parse_inf_f64(s: &str) -> Result<Finite<f64>, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Finite(None));
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Finite(Some(v))),
        _ => Err(format!("expected a number or `inf`, got `{s}`")),
    }
}

fn parse_inf_usize(s: &str) -> Result<Finite<usize>, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Finite(None));
    }
    s.parse::<usize>()
        .map(|v| Finite(Some(v)))
        .map_err(|_| format!("expected an integer or `inf`, got `{s}`"))
}

fn parse_fading(s: &str) -> Result<Fading, String> {
    Fading::parse(s).map_err(|e| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_results(out: Option<&Path>, rows: &[TrialResult]) -> Result<()> {
    match out {
        Some(p) => write_trials_csv(create(p)?, rows)?,
        None => write_trials_csv(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn print_summary(rows: &[TrialResult]) {
    for r in rows {
        eprintln!(
            "{:>6} {:>3}QAM λp={} trial {}: {}/{}/{} sent/detected/crc, goodput {:.1} kbps, throughput {:.1} kbps, EVM {:.2}%, SINR {:.1} dB, residual phase {:.2}°",
            r.profile,
            r.modulation,
            r.lambda_p,
            r.trial,
            r.frames_sent,
            r.frames_detected,
            r.crc_pass,
            r.goodput_bps / 1e3,
            r.throughput_bps / 1e3,
            r.evm_percent,
            r.sinr_db,
            r.mean_residual_phase_deg
        );
    }
}

fn print_improvement(rows: &[TrialResult]) {
    for i in improvement_table(rows) {
        eprintln!(
            "{:>6} {:>3}QAM: λp=1 {:.1} kbps -> best λp={} {:.1} kbps ({:+.0}%)",
            i.profile,
            i.modulation,
            i.baseline_goodput_bps / 1e3,
            i.best_lambda_p,
            i.best_goodput_bps / 1e3,
            i.gain_percent
        );
    }
}

fn write_sigmf(
    dir: &Path,
    out: &TrialOutput,
    frame: &FrameConfig,
    profile: &ChannelProfile,
    env: &Environment,
    settings: &SimSettings,
) -> Result<()> {
    let doc = emit_sigmf(&SigmfSource {
        result: &out.result,
        frame,
        profile,
        environment: env,
        sample_rate: settings.sample_rate(),
        sample_count: out.sample_count,
    })?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{}.sigmf-meta", run_id(&out.result)));
    fs::write(&path, doc.to_json()?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_sim(a: &SimArgs) -> Result<()> {
    let frame = match &a.frame_config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            FrameConfig::from_kv_str(&text).with_context(|| format!("frame config {}", p.display()))?
        }
        None => FrameConfig::new(a.pilot_reps, a.modulation)?,
    };
    let profile = ChannelProfile {
        delta_f: a.cfo_hz,
        drift_rate: a.drift_hz_per_s,
        drift_walk_hz: a.drift_walk_hz,
        theta_in: a.theta_in_rad,
        snr_db: a.snr_db.0,
        coherence_symbols: a.coherence_symbols.0,
        fading: a.fading,
        ..ChannelProfile::ideal()
    };
    let settings = SimSettings {
        keep_iq: a.iq_out.is_some(),
        ..a.detector.settings()?
    };
    profile.validate(settings.sample_period())?;
    if a.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let env = a.env.to_env();
    let mut rows = Vec::new();
    let mut log: Vec<FrameRecord> = Vec::new();
    for t in 0..a.trials {
        let spec = TrialSpec {
            frame,
            profile_name: "sim".into(),
            profile: profile.clone(),
            frames: a.frames,
            trial: t,
            seed: seed::derive(a.seed, &[t as u64]),
        };
        let out = run_trial(&spec, &settings)?;
        if let Some(dir) = &a.sigmf_out {
            write_sigmf(dir, &out, &frame, &profile, &env, &settings)?;
        }
        if let (Some(dir), Some(rx)) = (&a.iq_out, &out.rx) {
            fs::create_dir_all(dir)?;
            write_cf32_le(
                create(&dir.join(format!("{}.sigmf-data", run_id(&out.result))))?,
                &rx.samples,
            )?;
        }
        rows.push(out.result);
        log.extend(out.frames);
    }
    if let Some(p) = &a.frame_log {
        write_frame_log(create(p)?, &log)?;
    }
    write_results(a.out.as_deref(), &rows)?;
    print_summary(&rows);
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut spec = SweepSpec::from_kv_str(&text, &a.config.display().to_string())?;
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    if let Some(f) = a.frames {
        spec.frames_per_trial = f;
    }
    if let Some(t) = a.trials {
        spec.trials_per_cell = t;
    }
    let settings = a.detector.settings()?;
    for p in &spec.profiles {
        p.profile
            .validate(settings.sample_period())
            .with_context(|| format!("profile `{}`", p.name))?;
    }
    let outputs = run_sweep(&spec, &settings, a.workers)?;
    let rows: Vec<TrialResult> = outputs.iter().map(|(_, o)| o.result.clone()).collect();
    write_results(Some(&a.out), &rows)?;
    if let Some(p) = &a.frame_log {
        let log: Vec<FrameRecord> = outputs.iter().flat_map(|(_, o)| o.frames.iter().cloned()).collect();
        write_frame_log(create(p)?, &log)?;
    }
    if let Some(dir) = &a.sigmf_out {
        for (task, out) in &outputs {
            let profile = &spec.profiles[task.profile_index].profile;
            write_sigmf(dir, out, &task.spec.frame, profile, &spec.environment, &settings)?;
        }
    }
    if let Some(p) = &a.improvement {
        write_improvement_csv(create(p)?, &improvement_table(&rows))?;
    }
    eprintln!("{} trials written to {}", rows.len(), a.out.display());
    print_improvement(&rows);
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let log = read_frame_log(File::open(&a.log).with_context(|| format!("opening {}", a.log.display()))?)?;
    let rows = aggregate_log(&log)?;
    write_results(a.out.as_deref(), &rows)?;
    if let Some(p) = &a.improvement {
        write_improvement_csv(create(p)?, &improvement_table(&rows))?;
    }
    print_summary(&rows);
    print_improvement(&rows);
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<()> {
    let mut failed = 0;
    for f in &a.files {
        let res = fs::read_to_string(f)
            .map_err(anyhow::Error::from)
            .and_then(|t| Ok(parse_sigmf(&t)?));
        match res {
            Ok(_) => println!("ok {}", f.display()),
            Err(e) => {
                println!("FAIL {}: {e}", f.display());
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} files failed validation", a.files.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Sim(a) => cmd_sim(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Report(a) => cmd_report(a),
        Cmd::ValidateSigmf(a) => cmd_validate(a),
    };
    match res {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
