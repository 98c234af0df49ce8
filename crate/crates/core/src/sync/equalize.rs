use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Blocks whose channel estimate is this small or smaller are not equalized.
pub const H_MIN: f64 = 1e-6;

/// `Ĥ = (1/N_p)·Σ rx[n]·conj(ref[n])`.
pub fn estimate_channel(rx_pilot: &[Complex64], ref_pilot: &[Complex64]) -> Result<Complex64> {
    if rx_pilot.len() != ref_pilot.len() {
        return Err(Error::LengthMismatch {
            left: rx_pilot.len(),
            right: ref_pilot.len(),
        });
    }
    if rx_pilot.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: Complex64 = rx_pilot.iter().zip(ref_pilot).map(|(r, p)| r * p.conj()).sum();
    Ok(sum / rx_pilot.len() as f64)
}

/// Single-tap equalization: every symbol divided by `h`.
pub fn equalize_block(data: &[Complex64], h: Complex64) -> Result<Vec<Complex64>> {
    if !(h.norm() > H_MIN) {
        return Err(Error::Unequalizable(h.norm()));
    }
    let inv = h.inv();
    Ok(data.iter().map(|s| s * inv).collect())
}

/// Per-frame channel estimates and the residual offset derived from them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelEstimate {
    /// One `Ĥ` per pilot block.
    pub h_blocks: Vec<Complex64>,
    /// Centre of each pilot block, in symbols from frame start.
    pub block_positions: Vec<f64>,
    /// Gain seen by the preamble and its centre, when a preamble was detected.
    pub preamble: Option<(f64, Complex64)>,
    /// Symbols between consecutive correction points (`L/λ_p`).
    pub block_spacing: f64,
    pub residual_freq_hz: f64,
    /// Mean phase of equalized symbols against their decisions, per block.
    pub residual_phase_per_block_deg: Vec<f64>,
}

/// Least-squares slope of `y` on `x`; 0 with fewer than two distinct `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    sxy / sxx
}

/// Sequential phase unwrapping.
fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(phases.len());
    let mut offset = 0.0f64;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let d = p + offset - out[i - 1];
            offset -= 2.0 * PI * (d / (2.0 * PI)).round();
        }
        out.push(p + offset);
    }
    out
}

/// Correction points sorted by position, with unwrapped phases: each pilot
/// block plus, when present, the preamble.
fn correction_points(est: &ChannelEstimate) -> (Vec<f64>, Vec<f64>) {
    let mut pts: Vec<(f64, f64)> = est
        .block_positions
        .iter()
        .zip(&est.h_blocks)
        .map(|(&x, h)| (x, h.arg()))
        .collect();
    if let Some((x, h)) = est.preamble {
        pts.push((x, h.arg()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs = pts.iter().map(|p| p.0).collect();
    let ys = unwrap(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    (xs, ys)
}

/// Residual frequency of the channel phase, in Hz.
///
/// Least-squares slope of the unwrapped phase over every correction point.
/// With a single point it is 0.
pub fn residual_frequency(est: &ChannelEstimate, symbol_period: f64) -> f64 {
    let (xs, ys) = correction_points(est);
    ls_slope(&xs, &ys) / (2.0 * PI * symbol_period)
}

/// `(residual frequency in Hz, mean residual phase in degrees)`.
///
/// The phase is the drift `|2π·f·spacing·T|` that accumulates between
/// consecutive correction points before the next pilot block resets it.
pub fn residual_offset(est: &ChannelEstimate, symbol_period: f64) -> (f64, f64) {
    let f = residual_frequency(est, symbol_period);
    let phase = (2.0 * PI * f * est.block_spacing * symbol_period).abs().to_degrees();
    (f, phase)
}
