use std::fmt;

use num_complex::Complex64;

use super::{
    autocorrelation_metric, detect_training, equalize_block, estimate_channel, golay_frame_detect, nco_rotate,
    residual_offset, ChannelEstimate, CoarseSyncResult, DetectorConfig, GolayDetection,
};
use crate::error::{Error, Result};
use crate::framing::{
    compute_layout, crc_check, decode_payload, parse_frame, FrameConfig, FrameLayout, FrameTables, PacketPayload,
};
use crate::waveform::{decimate, matched_filter, AgcConfig, ComplexBuffer, Constellation, PulseShapeConfig};

/// Why a frame was not delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RxFailure {
    NoTraining,
    NoFrame,
    Truncated,
    Unequalizable,
    CrcFail,
}

impl RxFailure {
    pub fn as_str(&self) -> &'static str {
        match self {
            RxFailure::NoTraining => "no-training",
            RxFailure::NoFrame => "no-frame",
            RxFailure::Truncated => "truncated",
            RxFailure::Unequalizable => "unequalizable",
            RxFailure::CrcFail => "crc-fail",
        }
    }
}

impl fmt::Display for RxFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the receiver learned about one capture.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RxOutcome {
    /// `None` when the payload passed its CRC.
    pub failure: Option<RxFailure>,
    /// Decoded payload, present whenever demapping ran (even if the CRC failed).
    pub payload: Option<PacketPayload>,
    pub coarse: Option<CoarseSyncResult>,
    pub golay: Option<GolayDetection>,
    /// Sampling phase, in samples, that gave the strongest preamble.
    pub sampling_phase: Option<usize>,
    pub channel: Option<ChannelEstimate>,
    /// Equalized data symbols in frame order.
    pub equalized: Vec<Complex64>,
    pub mean_residual_phase_deg: Option<f64>,
}

impl RxOutcome {
    pub fn crc_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// True once a frame has been found, whatever happened afterwards.
    pub fn detected(&self) -> bool {
        self.golay.is_some()
    }

    fn fail(mut self, f: RxFailure) -> Self {
        self.failure = Some(f);
        self
    }
}

/// Burst receiver: AGC, matched filter, per-phase training detection and
/// coarse CFO correction, Golay frame detection, pilot-aided equalization,
/// demapping and CRC.
#[derive(Debug, Clone)]
pub struct Receiver {
    pub frame: FrameConfig,
    pub detector: DetectorConfig,
    pub pulse: PulseShapeConfig,
    pub agc: AgcConfig,
    pub symbol_period: f64,
    tables: FrameTables,
    layout: FrameLayout,
    constellation: Constellation,
}

struct PhaseCandidate {
    phase: usize,
    coarse: CoarseSyncResult,
    golay: GolayDetection,
    symbols: Vec<Complex64>,
}

impl Receiver {
    pub fn new(
        frame: FrameConfig,
        detector: DetectorConfig,
        pulse: PulseShapeConfig,
        agc: AgcConfig,
        symbol_period: f64,
    ) -> Result<Self> {
        detector.validate()?;
        pulse.validate()?;
        agc.validate()?;
        if !(symbol_period > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "symbol period must be positive, got {symbol_period}"
            )));
        }
        Ok(Self {
            tables: FrameTables::new(&frame)?,
            layout: compute_layout(&frame)?,
            constellation: frame.constellation()?,
            frame,
            detector,
            pulse,
            agc,
            symbol_period,
        })
    }

    pub fn tables(&self) -> &FrameTables {
        &self.tables
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    fn try_phase(&self, mf: &[Complex64], phase: usize) -> (Option<CoarseSyncResult>, Option<PhaseCandidate>) {
        let m = self.frame.training_rep_len;
        let stream = decimate(mf, self.pulse.interpolation, phase);
        let Ok(metric) = autocorrelation_metric(&stream, m) else {
            return (None, None);
        };
        let delta_t = m as f64 * self.symbol_period;
        let Some(coarse) = detect_training(&metric, &self.detector, delta_t) else {
            return (None, None);
        };
        let y = nco_rotate(&stream, coarse.delta_f_est, self.symbol_period);
        let expected = coarse.detect_index + 1;
        let lo = expected.saturating_sub(m);
        let hi = (expected + m + self.frame.preamble_symbols()).min(y.len());
        let golay = if lo < hi {
            golay_frame_detect(&y[lo..hi], &self.tables.golay, &self.detector)
        } else {
            None
        };
        let cand = golay.map(|g| PhaseCandidate {
            phase,
            coarse,
            golay: GolayDetection {
                preamble_start: g.preamble_start + lo,
                payload_start: g.payload_start + lo,
                peak: g.peak,
            },
            symbols: y,
        });
        (Some(coarse), cand)
    }

    pub fn receive(&self, buf: &ComplexBuffer) -> RxOutcome {
        let mut out = RxOutcome::default();
        let Ok(gained) = self.agc.lock(buf) else {
            return out.fail(RxFailure::NoTraining);
        };
        let Ok(mf) = matched_filter(&gained, &self.pulse) else {
            return out.fail(RxFailure::NoTraining);
        };

        let mut best: Option<PhaseCandidate> = None;
        for phase in 0..self.pulse.interpolation {
            let (coarse, cand) = self.try_phase(&mf, phase);
            if out.coarse.is_none() {
                out.coarse = coarse;
            }
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.golay.peak.norm() > b.golay.peak.norm()) {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best else {
            let f = if out.coarse.is_some() {
                RxFailure::NoFrame
            } else {
                RxFailure::NoTraining
            };
            return out.fail(f);
        };
        out.coarse = Some(best.coarse);
        out.golay = Some(best.golay);
        out.sampling_phase = Some(best.phase);

        let parsed = match parse_frame(&best.symbols, &self.frame, best.golay.payload_start) {
            Ok(p) => p,
            Err(_) => return out.fail(RxFailure::Truncated),
        };

        let mut est = ChannelEstimate {
            block_positions: (0..self.frame.lambda_p).map(|i| self.layout.pilot_centre(i)).collect(),
            preamble: Some((self.layout.preamble_centre(), best.golay.gain(self.frame.golay_len))),
            block_spacing: self.frame.payload_symbols as f64 / self.frame.lambda_p as f64,
            ..Default::default()
        };
        let mut unequalizable = false;
        for (pilot, data) in parsed.pilots.iter().zip(&parsed.data) {
            let h = estimate_channel(pilot, &self.tables.pilot).unwrap_or_default();
            est.h_blocks.push(h);
            match equalize_block(data, h) {
                Ok(eq) => {
                    est.residual_phase_per_block_deg.push(self.mean_decision_phase_deg(&eq));
                    out.equalized.extend(eq);
                }
                Err(_) => {
                    unequalizable = true;
                    est.residual_phase_per_block_deg.push(f64::NAN);
                    out.equalized
                        .extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), data.len()));
                }
            }
        }
        let (f_res, phase) = residual_offset(&est, self.symbol_period);
        est.residual_freq_hz = f_res;
        out.mean_residual_phase_deg = Some(phase);
        out.channel = Some(est);
        if unequalizable {
            return out.fail(RxFailure::Unequalizable);
        }

        match decode_payload(&out.equalized, &self.frame) {
            Ok(p) => {
                let ok = crc_check(&p);
                out.payload = Some(p);
                if ok {
                    out
                } else {
                    out.fail(RxFailure::CrcFail)
                }
            }
            Err(_) => out.fail(RxFailure::CrcFail),
        }
    }

    fn mean_decision_phase_deg(&self, eq: &[Complex64]) -> f64 {
        if eq.is_empty() {
            return 0.0;
        }
        let sum: f64 = eq
            .iter()
            .map(|&s| (s * self.constellation.decide(s).conj()).arg())
            .sum();
        (sum / eq.len() as f64).to_degrees()
    }
}

/// One-shot receive with default pulse shaping and AGC; the symbol period is
/// the buffer's sample period times the interpolation factor.
pub fn receive_frame(buf: &ComplexBuffer, cfg: &FrameConfig, det: &DetectorConfig) -> Result<RxOutcome> {
    let pulse = PulseShapeConfig::default();
    let rx = Receiver::new(
        *cfg,
        *det,
        pulse,
        AgcConfig::default(),
        buf.sample_period * pulse.interpolation as f64,
    )?;
    Ok(rx.receive(buf))
}
