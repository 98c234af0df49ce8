use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Writes samples as interleaved little-endian `f32` I/Q pairs (`cf32_le`).
pub fn write_cf32_le<W: Write>(mut w: W, samples: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_cf32_le<R: Read>(mut r: R) -> Result<Vec<Complex64>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % 8 != 0 {
        return Err(Error::Truncated {
            needed: buf.len().div_ceil(8) * 8,
            available: buf.len(),
        });
    }
    Ok(buf
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}
