use std::f64::consts::PI;

use num_complex::Complex64;

use super::DetectorConfig;
use crate::error::{Error, Result};
use crate::waveform::ComplexBuffer;

/// Lag-`M` autocorrelation `C`, window energy `P` and decision metric `ρ = |C|/P`.
///
/// All three are indexed like the input. Indices before `2M − 1`, where the
/// lagged window is incomplete, hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrMetric {
    pub c: Vec<Complex64>,
    pub p: Vec<f64>,
    pub rho: Vec<f64>,
    pub lag: usize,
}

/// `C[n] = Σ x[k]·x*[k−M]` and `P[n] = Σ |x[k]|²` over `k = n−M+1 ..= n`.
///
/// Both sums are evaluated directly for every `n`, so there is no running-sum
/// drift. `ρ` is 0 where `P` is 0.
pub fn autocorrelation_metric(x: &[Complex64], m: usize) -> Result<AutocorrMetric> {
    if m == 0 || x.len() < 2 * m {
        return Err(Error::InputTooShort {
            len: x.len(),
            min: 2 * m.max(1),
        });
    }
    let n_out = x.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n_out];
    let mut p = vec![0.0; n_out];
    let mut rho = vec![0.0; n_out];
    for n in 2 * m - 1..n_out {
        let mut cn = Complex64::new(0.0, 0.0);
        let mut pn = 0.0;
        for k in n + 1 - m..=n {
            cn += x[k] * x[k - m].conj();
            pn += x[k].norm_sqr();
        }
        c[n] = cn;
        p[n] = pn;
        rho[n] = if pn > 0.0 { cn.norm() / pn } else { 0.0 };
    }
    Ok(AutocorrMetric { c, p, rho, lag: m })
}

/// Outcome of training-field detection and coarse CFO estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseSyncResult {
    /// First index where `ρ` reached the threshold.
    pub crossing_index: usize,
    /// Refined index: end of the second training repetition.
    pub detect_index: usize,
    pub c_peak: Complex64,
    pub rho_peak: f64,
    /// Frequency of the observed rotation, in Hz. Correcting with
    /// [`nco_correct`] at this frequency removes it.
    pub delta_f_est: f64,
    /// Lag between the repetitions, in seconds.
    pub delta_t: f64,
}

/// Tolerance under which two `ρ` values count as the same plateau level.
const PLATEAU_EPS: f64 = 1e-9;

/// Finds the first `ρ ≥ threshold` (with `P > 0`), then refines to the
/// largest `ρ` within the next `M` samples. On a plateau the last index wins,
/// with larger `|C|` breaking ties.
///
/// Returns `None` when nothing crosses or when `C` is zero at the peak.
pub fn detect_training(metric: &AutocorrMetric, cfg: &DetectorConfig, delta_t: f64) -> Option<CoarseSyncResult> {
    let crossing = metric
        .rho
        .iter()
        .zip(&metric.p)
        .position(|(&r, &p)| p > 0.0 && r >= cfg.rho_threshold)?;
    let end = (crossing + metric.lag).min(metric.rho.len() - 1);
    let mut best = crossing;
    for i in crossing + 1..=end {
        let (r, rb) = (metric.rho[i], metric.rho[best]);
        if r > rb + PLATEAU_EPS || ((r - rb).abs() <= PLATEAU_EPS && metric.c[i].norm() >= metric.c[best].norm()) {
            best = i;
        }
    }
    let c_peak = metric.c[best];
    let delta_f_est = estimate_coarse_cfo(c_peak, delta_t).ok()?;
    Some(CoarseSyncResult {
        crossing_index: crossing,
        detect_index: best,
        c_peak,
        rho_peak: metric.rho[best],
        delta_f_est,
        delta_t,
    })
}

/// `∠C / (2π·Δt)` with the principal angle in (−π, π].
pub fn estimate_coarse_cfo(c_peak: Complex64, delta_t: f64) -> Result<f64> {
    if !(delta_t > 0.0) {
        return Err(Error::InvalidConfig(format!("Δt must be positive, got {delta_t}")));
    }
    if c_peak.norm_sqr() == 0.0 || !c_peak.norm_sqr().is_finite() {
        return Err(Error::UndefinedAngle);
    }
    let mut angle = c_peak.arg();
    if angle <= -PI {
        angle = PI;
    }
    Ok(angle / (2.0 * PI * delta_t))
}

/// Rotates sample `n` by `e^{−j2π·f·n·period}`, `n` counted from 0.
pub fn nco_rotate(x: &[Complex64], f: f64, period: f64) -> Vec<Complex64> {
    if f == 0.0 {
        return x.to_vec();
    }
    let w = -2.0 * PI * f * period;
    x.iter()
        .enumerate()
        .map(|(n, &v)| v * Complex64::from_polar(1.0, w * n as f64))
        .collect()
}

/// NCO correction of a buffer at its own sampling period.
pub fn nco_correct(x: &ComplexBuffer, f: f64) -> ComplexBuffer {
    x.with_samples(nco_rotate(&x.samples, f, x.sample_period))
}
