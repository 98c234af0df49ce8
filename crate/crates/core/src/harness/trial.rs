use num_complex::Complex64;

use super::generate_payload;
use crate::channel::{apply_channel, ChannelProfile};
use crate::error::{Error, Result};
use crate::framing::{assemble_frame, compute_layout, crc_attach, FrameConfig, FrameTables};
use crate::metrics::{aggregate, error_and_reference_energy, FrameRecord, TrialResult};
use crate::seed;
use crate::sync::{DetectorConfig, Receiver};
use crate::waveform::{design_srrc, shape_and_upsample, AgcConfig, ComplexBuffer, PulseShapeConfig};

/// Transmitter, receiver and burst-schedule settings shared by all trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub symbol_period: f64,
    pub pulse: PulseShapeConfig,
    pub agc: AgcConfig,
    pub detector: DetectorConfig,
    /// Silent symbols between consecutive bursts. Each capture window takes
    /// half the guard on either side of its frame.
    pub guard_symbols: usize,
    /// Keep the received sample stream in the trial output.
    pub keep_iq: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            symbol_period: 1e-6,
            pulse: PulseShapeConfig::default(),
            agc: AgcConfig::default(),
            detector: DetectorConfig::default(),
            guard_symbols: 32,
            keep_iq: false,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        self.agc.validate()?;
        self.detector.validate()?;
        if !(self.symbol_period > 0.0 && self.symbol_period.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bad symbol period {}",
                self.symbol_period
            )));
        }
        if self.guard_symbols < self.pulse.span_symbols {
            return Err(Error::InvalidConfig(format!(
                "guard of {} symbols is shorter than the pulse span of {}",
                self.guard_symbols, self.pulse.span_symbols
            )));
        }
        Ok(())
    }

    pub fn sample_period(&self) -> f64 {
        self.symbol_period / self.pulse.interpolation as f64
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_period()
    }
}

/// Builds and pulse-shapes one frame carrying `data_bytes` plus its CRC.
pub fn transmit_frame(
    data_bytes: &[u8],
    cfg: &FrameConfig,
    tables: &FrameTables,
    settings: &SimSettings,
) -> Result<ComplexBuffer> {
    let symbols = assemble_frame(&crc_attach(data_bytes), cfg, tables)?;
    shape_and_upsample(&symbols, &settings.pulse, settings.symbol_period)
}

/// One cell trial: frame format, channel, frame count and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub frame: FrameConfig,
    pub profile_name: String,
    pub profile: ChannelProfile,
    pub frames: usize,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub result: TrialResult,
    pub frames: Vec<FrameRecord>,
    /// Length of the received burst sequence in samples.
    pub sample_count: u64,
    /// Received samples of the whole burst sequence, when requested.
    pub rx: Option<ComplexBuffer>,
}

/// Air time of one frame: its symbol count times the symbol period.
pub fn frame_airtime(cfg: &FrameConfig, symbol_period: f64) -> f64 {
    cfg.total_symbols() as f64 * symbol_period
}

/// Sends `frames` bursts back to back through one channel realisation and
/// receives each in its own capture window.
pub fn run_trial(spec: &TrialSpec, settings: &SimSettings) -> Result<TrialOutput> {
    settings.validate()?;
    spec.frame.validate()?;
    if spec.frames == 0 {
        return Err(Error::InvalidConfig("a trial needs at least one frame".into()));
    }
    let cfg = &spec.frame;
    let l = settings.pulse.interpolation;
    let tables = FrameTables::new(cfg)?;
    let layout = compute_layout(cfg)?;
    let constellation = cfg.constellation()?;
    let rx = Receiver::new(
        *cfg,
        settings.detector,
        settings.pulse,
        settings.agc,
        settings.symbol_period,
    )?;

    let n_sym = cfg.total_symbols();
    let g = settings.guard_symbols;
    let pitch = n_sym + g;
    let mut stream_symbols = vec![Complex64::new(0.0, 0.0); g + spec.frames * pitch];
    let mut sent_bytes = Vec::with_capacity(spec.frames);
    let mut sent_data = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let bytes = generate_payload(
            cfg.data_bytes(),
            seed::derive(spec.seed, &[seed::tag("frame"), f as u64]),
        );
        let symbols = assemble_frame(&crc_attach(&bytes), cfg, &tables)?;
        let data: Vec<Complex64> = layout
            .data_spans
            .iter()
            .flat_map(|r| symbols[r.clone()].iter().copied())
            .collect();
        let start = g + f * pitch;
        stream_symbols[start..start + n_sym].copy_from_slice(&symbols);
        sent_bytes.push(bytes);
        sent_data.push(data);
    }
    let tx = shape_and_upsample(&stream_symbols, &settings.pulse, settings.symbol_period)?;
    let delay = (design_srrc(&settings.pulse)?.len() - 1) / 2;
    let frame_samples = |f: usize| {
        let s = (g + f * pitch) * l + delay;
        s..s + n_sym * l
    };
    let occupied: f64 = (0..spec.frames)
        .map(|f| tx.samples[frame_samples(f)].iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        / (spec.frames * n_sym * l) as f64;

    let profile = ChannelProfile {
        seed: seed::derive(spec.seed, &[seed::tag("channel"), spec.profile.seed]),
        ..spec.profile.clone()
    };
    let (received, _truth) = apply_channel(&tx, &profile, l, Some(occupied))?;

    let airtime = frame_airtime(cfg, settings.symbol_period);
    let mut records = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let span = frame_samples(f);
        let lo = span.start.saturating_sub(g / 2 * l);
        let hi = (span.end + g / 2 * l).min(received.len());
        let window = received.with_samples(received.samples[lo..hi].to_vec());
        let out = rx.receive(&window);

        let mut rec = FrameRecord {
            lambda_p: cfg.lambda_p,
            modulation: cfg.modulation,
            profile: spec.profile_name.clone(),
            trial: spec.trial,
            seed: spec.seed,
            frame: f,
            airtime_s: airtime,
            data_bytes: cfg.data_bytes(),
            frame_bytes: cfg.frame_bytes(),
            detected: out.detected(),
            crc_ok: out.crc_ok() && out.payload.as_ref().is_some_and(|p| p.data_bytes == sent_bytes[f]),
            failure: out.failure.map_or(String::new(), |e| e.as_str().to_string()),
            symbols: 0,
            err_truth: 0.0,
            ref_energy: 0.0,
            err_decision: 0.0,
            decision_energy: 0.0,
            residual_phase_deg: out.mean_residual_phase_deg.unwrap_or(f64::NAN),
            coarse_cfo_hz: out.coarse.map_or(f64::NAN, |c| c.delta_f_est),
            residual_freq_hz: out.channel.as_ref().map_or(f64::NAN, |c| c.residual_freq_hz),
        };
        if out.equalized.len() == sent_data[f].len() {
            let decisions: Vec<Complex64> = out.equalized.iter().map(|&s| constellation.decide(s)).collect();
            let (et, rt) = error_and_reference_energy(&out.equalized, &sent_data[f]);
            let (ed, rd) = error_and_reference_energy(&out.equalized, &decisions);
            rec.symbols = out.equalized.len();
            rec.err_truth = et;
            rec.ref_energy = rt;
            rec.err_decision = ed;
            rec.decision_energy = rd;
        }
        records.push(rec);
    }
    Ok(TrialOutput {
        result: aggregate(&records)?,
        frames: records,
        sample_count: received.len() as u64,
        rx: settings.keep_iq.then_some(received),
    })
}
