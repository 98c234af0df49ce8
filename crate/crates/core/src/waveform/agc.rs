use super::ComplexBuffer;
use crate::error::{Error, Result};

/// Largest gain the loop may reach, in natural-log units (≈ 100 dB).
const MAX_LOG_GAIN: f64 = 11.5;

/// Square-law AGC loop.
///
/// The loop keeps a log-domain gain accumulator. Each sample it adds
/// `loop_gain · e`, where `e = (target − |y|²) / target` is the normalized
/// power error of the current output clipped to [−1, 1]. A real positive
/// gain never alters signal phase.
///
/// `hold_after` freezes the gain after that many samples, which is how a
/// burst receiver locks its gain once the acquisition fields have passed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcConfig {
    pub target_power: f64,
    pub loop_gain: f64,
    pub hold_after: Option<usize>,
}

impl Default for AgcConfig {
    fn default() -> Self {
        Self {
            target_power: 1.0,
            loop_gain: 0.05,
            hold_after: Some(Self::SETTLING_SAMPLES),
        }
    }
}

impl AgcConfig {
    /// Samples after which a constant-envelope input at any level within
    /// ±40 dB of the target is settled to 1% with the default loop gain.
    pub const SETTLING_SAMPLES: usize = 512;

    pub fn validate(&self) -> Result<()> {
        if !(self.target_power > 0.0) || !self.target_power.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "AGC target power must be positive, got {}",
                self.target_power
            )));
        }
        if !(self.loop_gain > 0.0 && self.loop_gain < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "AGC loop gain must be in (0, 1), got {}",
                self.loop_gain
            )));
        }
        Ok(())
    }

    pub fn apply(&self, buf: &ComplexBuffer) -> Result<ComplexBuffer> {
        self.validate()?;
        let mut log_gain = 0.0f64;
        let mut out = Vec::with_capacity(buf.len());
        for (n, &x) in buf.samples.iter().enumerate() {
            let y = x * log_gain.exp();
            out.push(y);
            if self.hold_after.is_some_and(|h| n + 1 >= h) {
                continue;
            }
            let err = ((self.target_power - y.norm_sqr()) / self.target_power).clamp(-1.0, 1.0);
            log_gain = (log_gain + self.loop_gain * err).clamp(-MAX_LOG_GAIN, MAX_LOG_GAIN);
        }
        Ok(buf.with_samples(out))
    }

    /// Gain the loop reaches over the first `hold_after` samples, or over the
    /// whole buffer when it never holds.
    pub fn acquired_gain(&self, buf: &ComplexBuffer) -> Result<f64> {
        self.validate()?;
        let n = self.hold_after.unwrap_or(buf.len()).min(buf.len());
        let mut log_gain = 0.0f64;
        for &x in &buf.samples[..n] {
            let y = x * log_gain.exp();
            let err = ((self.target_power - y.norm_sqr()) / self.target_power).clamp(-1.0, 1.0);
            log_gain = (log_gain + self.loop_gain * err).clamp(-MAX_LOG_GAIN, MAX_LOG_GAIN);
        }
        Ok(log_gain.exp())
    }

    /// Scales a buffered capture by the gain acquired over its first
    /// `hold_after` samples.
    ///
    /// The loop winds up on the silence ahead of a burst and is still slewing
    /// through the training field. A gain that varies from sample to sample
    /// ahead of the matched filter spoils its Nyquist property and biases the
    /// coarse CFO estimate, so a receiver that holds the whole burst applies
    /// the locked gain throughout.
    pub fn lock(&self, buf: &ComplexBuffer) -> Result<ComplexBuffer> {
        let g = self.acquired_gain(buf)?;
        Ok(buf.with_samples(buf.samples.iter().map(|x| x * g).collect()))
    }
}

/// Free-running AGC (never holds).
pub fn agc(buf: &ComplexBuffer, target_power: f64, loop_gain: f64) -> Result<ComplexBuffer> {
    AgcConfig {
        target_power,
        loop_gain,
        hold_after: None,
    }
    .apply(buf)
}
