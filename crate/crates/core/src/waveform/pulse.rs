use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use super::ComplexBuffer;
use crate::error::{Error, Result};

/// Square-root raised-cosine pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShapeConfig {
    pub roll_off: f64,
    pub span_symbols: usize,
    /// Samples per symbol.
    pub interpolation: usize,
}

impl Default for PulseShapeConfig {
    fn default() -> Self {
        Self {
            roll_off: 0.25,
            span_symbols: 24,
            interpolation: 4,
        }
    }
}

impl PulseShapeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.roll_off > 0.0 && self.roll_off <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "roll-off must be in (0, 1], got {}",
                self.roll_off
            )));
        }
        if self.interpolation < 2 {
            return Err(Error::InvalidConfig(format!(
                "interpolation factor must be at least 2, got {}",
                self.interpolation
            )));
        }
        if self.span_symbols == 0 || !self.span_symbols.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "filter span must be a positive even number of symbols, got {}",
                self.span_symbols
            )));
        }
        Ok(())
    }

    pub fn num_taps(&self) -> usize {
        self.span_symbols * self.interpolation + 1
    }

    /// Delay, in symbols, of a transmit/receive filter cascade.
    pub fn cascade_delay_symbols(&self) -> usize {
        self.span_symbols
    }
}

/// Continuous SRRC impulse response at `t` symbol periods, unnormalized.
fn srrc_at(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let x = 4.0 * beta * t;
    if (x.abs() - 1.0).abs() < 1e-12 {
        // Limit at t = ±1/(4β).
        let arg = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    ((PI * t * (1.0 - beta)).sin() + x * (PI * t * (1.0 + beta)).cos()) / (PI * t * (1.0 - x * x))
}

/// Symmetric, unit-energy SRRC taps sampled at `interpolation` samples per symbol.
pub fn design_srrc(cfg: &PulseShapeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.num_taps();
    let center = (n - 1) / 2;
    let l = cfg.interpolation as f64;
    // Evaluate one half and mirror it so the taps are exactly symmetric.
    let mut taps = vec![0.0; n];
    for k in 0..=center {
        let t = (center - k) as f64 / l;
        let v = srrc_at(t, cfg.roll_off);
        taps[k] = v;
        taps[n - 1 - k] = v;
    }
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let norm = energy.sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    Ok(taps)
}

/// Zero-stuffs by `l` and filters with the SRRC taps.
///
/// The output is scaled by √l so that unit-energy symbols produce unit
/// average sample power. Output length is `l·n + taps − 1`; an empty input
/// gives an empty buffer. `symbol_period` sets the output sample period to
/// `symbol_period / l`.
pub fn shape_and_upsample(symbols: &[Complex64], cfg: &PulseShapeConfig, symbol_period: f64) -> Result<ComplexBuffer> {
    let taps = design_srrc(cfg)?;
    let l = cfg.interpolation;
    let sample_period = symbol_period / l as f64;
    if symbols.is_empty() {
        return ComplexBuffer::new(Vec::new(), sample_period);
    }
    let gain = (l as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); l * symbols.len() + taps.len() - 1];
    for (i, &s) in symbols.iter().enumerate() {
        if s == Complex64::new(0.0, 0.0) {
            continue;
        }
        let s = s * gain;
        for (k, &h) in taps.iter().enumerate() {
            out[i * l + k] += s * h;
        }
    }
    ComplexBuffer::new(out, sample_period)
}

/// Full-rate matched filter: convolution with the SRRC taps scaled by 1/√l,
/// undoing the transmit gain. Output length is `len + taps − 1`.
pub fn matched_filter(buf: &ComplexBuffer, cfg: &PulseShapeConfig) -> Result<Vec<Complex64>> {
    let taps = design_srrc(cfg)?;
    if buf.is_empty() {
        return Ok(Vec::new());
    }
    let g = 1.0 / (cfg.interpolation as f64).sqrt();
    let scaled: Vec<f64> = taps.iter().map(|t| t * g).collect();
    let x = &buf.samples;
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + taps.len() - 1];
    for (n, &v) in x.iter().enumerate() {
        for (k, &h) in scaled.iter().enumerate() {
            out[n + k] += v * h;
        }
    }
    Ok(out)
}

/// Keeps every `factor`-th sample starting at `phase`.
pub fn decimate(x: &[Complex64], factor: usize, phase: usize) -> Vec<Complex64> {
    x.iter().skip(phase).step_by(factor.max(1)).copied().collect()
}

/// Matched filter followed by decimation at the given sampling phase.
///
/// The raw decimated stream is returned. For a signal produced by
/// [`shape_and_upsample`], symbol `i` appears at output index
/// `i + cascade_delay_symbols()` when `phase_offset` is 0.
pub fn matched_filter_downsample(
    buf: &ComplexBuffer,
    cfg: &PulseShapeConfig,
    phase_offset: usize,
) -> Result<Vec<Complex64>> {
    if phase_offset >= cfg.interpolation {
        return Err(Error::InvalidConfig(format!(
            "sampling phase {phase_offset} must be below the interpolation factor {}",
            cfg.interpolation
        )));
    }
    let full = matched_filter(buf, cfg)?;
    Ok(decimate(&full, cfg.interpolation, phase_offset))
}
