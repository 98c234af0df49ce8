use num_complex::Complex64;

use super::DetectorConfig;
use crate::waveform::GolayPair;

/// Coherent complementary correlation `R(s) = Σ x[s+k]·a[k] + Σ x[s+N+k]·b[k]`
/// for every start `s` at which the whole `a‖b` window fits.
pub fn golay_correlation(x: &[Complex64], pair: &GolayPair) -> Vec<Complex64> {
    let n = pair.len();
    if x.len() < 2 * n {
        return Vec::new();
    }
    (0..=x.len() - 2 * n)
        .map(|s| {
            let ra: Complex64 = pair.a.iter().zip(&x[s..s + n]).map(|(&a, v)| v * a as f64).sum();
            let rb: Complex64 = pair
                .b
                .iter()
                .zip(&x[s + n..s + 2 * n])
                .map(|(&b, v)| v * b as f64)
                .sum();
            ra + rb
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GolayDetection {
    /// Index of the first preamble symbol.
    pub preamble_start: usize,
    /// Index of the first symbol after the preamble.
    pub payload_start: usize,
    /// Correlator output at the peak; `2N·H` for a channel gain `H`.
    pub peak: Complex64,
}

impl GolayDetection {
    /// Channel gain seen by the preamble.
    pub fn gain(&self, golay_len: usize) -> Complex64 {
        self.peak / (2 * golay_len) as f64
    }
}

/// Frame detection on the Golay preamble.
///
/// Takes the first start whose `|R|` exceeds `mf_threshold_factor·2N`, then
/// the largest `|R|` within the following `2N` starts.
pub fn golay_frame_detect(x: &[Complex64], pair: &GolayPair, cfg: &DetectorConfig) -> Option<GolayDetection> {
    let r = golay_correlation(x, pair);
    let n = pair.len();
    let threshold = cfg.mf_threshold_factor * (2 * n) as f64;
    let first = r.iter().position(|v| v.norm() > threshold)?;
    let end = (first + 2 * n).min(r.len());
    let best = (first..end).fold(first, |b, i| if r[i].norm() > r[b].norm() { i } else { b });
    Some(GolayDetection {
        preamble_start: best,
        payload_start: best + 2 * n,
        peak: r[best],
    })
}
