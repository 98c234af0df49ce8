//! Symbol- and sample-level signal primitives.
//!
//! Constellations with Gray labeling, Golay complementary pairs for frame
//! detection, square-root raised-cosine pulse shaping with its matched
//! filter, and a square-law AGC loop.

mod agc;
mod constellation;
mod golay;
mod pulse;

pub use agc::{agc, AgcConfig};
pub use constellation::{bits_to_bytes, bytes_to_bits, demap_symbols, map_bits, Constellation};
pub use golay::{aperiodic_autocorrelation, generate_golay_pair, GolayPair};
pub use pulse::{
    decimate, design_srrc, matched_filter, matched_filter_downsample, shape_and_upsample, PulseShapeConfig,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex baseband samples together with their sampling period in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBuffer {
    pub samples: Vec<Complex64>,
    pub sample_period: f64,
}

impl ComplexBuffer {
    pub fn new(samples: Vec<Complex64>, sample_period: f64) -> Result<Self> {
        if !(sample_period > 0.0) || !sample_period.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sample period must be positive, got {sample_period}"
            )));
        }
        Ok(Self { samples, sample_period })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_period
    }

    /// Mean of |x|² over the buffer, 0 for an empty buffer.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_period: self.sample_period,
        }
    }
}

pub(crate) fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64
}
