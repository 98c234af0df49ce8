use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_pair(a: &[Complex64], b: &[Complex64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// `Σ|rx − ref|²` and `Σ|ref|²`.
pub fn error_and_reference_energy(rx: &[Complex64], reference: &[Complex64]) -> (f64, f64) {
    rx.iter()
        .zip(reference)
        .fold((0.0, 0.0), |(e, r), (x, y)| (e + (x - y).norm_sqr(), r + y.norm_sqr()))
}

/// EVM in percent from accumulated energies.
pub fn evm_from_energy(error_energy: f64, reference_energy: f64) -> f64 {
    100.0 * (error_energy / reference_energy).sqrt()
}

/// SINR in dB from accumulated energies; `+∞` when the error is zero.
pub fn sinr_from_energy(error_energy: f64, signal_energy: f64) -> f64 {
    if error_energy == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal_energy / error_energy).log10()
    }
}

/// `100·RMS(rx − ref)/RMS(ref)`.
pub fn evm(rx: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    check_pair(rx, reference)?;
    let (e, r) = error_and_reference_energy(rx, reference);
    Ok(evm_from_energy(e, r))
}

/// Decision-aided SINR: `10·log10(mean|d|² / mean|rx − d|²)`.
/// Exact agreement with the decisions gives `f64::INFINITY`.
pub fn sinr_estimate(rx: &[Complex64], decisions: &[Complex64]) -> Result<f64> {
    check_pair(rx, decisions)?;
    let (e, s) = error_and_reference_energy(rx, decisions);
    Ok(sinr_from_energy(e, s))
}

fn check_duration(duration_s: f64) -> Result<()> {
    if duration_s > 0.0 && duration_s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "duration must be positive, got {duration_s}"
        )))
    }
}

/// User-data rate of CRC-valid frames: `passes·bytes·8/duration`.
pub fn goodput(crc_pass: u64, data_bytes_per_frame: usize, duration_s: f64) -> Result<f64> {
    check_duration(duration_s)?;
    Ok(crc_pass as f64 * data_bytes_per_frame as f64 * 8.0 / duration_s)
}

/// Data-field rate of every detected frame, CRC included, whatever its CRC
/// outcome.
pub fn throughput(frames_detected: u64, frame_bytes_with_crc: usize, duration_s: f64) -> Result<f64> {
    check_duration(duration_s)?;
    Ok(frames_detected as f64 * frame_bytes_with_crc as f64 * 8.0 / duration_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qpsk_plus_noise(n: usize, snr_db: f64, seed: u64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let tx: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(if rng.random() { h } else { -h }, if rng.random() { h } else { -h }))
            .collect();
        let rx = tx
            .iter()
            .map(|t| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                t + Complex64::new(re, im) * s
            })
            .collect();
        (rx, tx)
    }

    #[test]
    fn evm_examples() {
        assert_eq!(evm(&[c(1.0), c(-1.0)], &[c(1.0), c(-1.0)]).unwrap(), 0.0);
        assert!((evm(&[c(1.1)], &[c(1.0)]).unwrap() - 10.0).abs() < 1e-9);
        assert!(matches!(evm(&[], &[]), Err(Error::EmptyInput)));
        assert!(evm(&[c(1.0)], &[]).is_err());
    }

    #[test]
    fn evm_at_20db_is_ten_percent() {
        // Oracle: EVM = 100/√SNR.
        let (rx, tx) = qpsk_plus_noise(100_000, 20.0, 1);
        let e = evm(&rx, &tx).unwrap();
        assert!((e / 10.0 - 1.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn sinr_examples() {
        let d = [c(1.0), Complex64::new(0.0, -1.0)];
        assert_eq!(sinr_estimate(&d, &d).unwrap(), f64::INFINITY);
        let (rx, tx) = qpsk_plus_noise(100_000, 15.0, 2);
        let s = sinr_estimate(&rx, &tx).unwrap();
        assert!((s - 15.0).abs() < 0.3, "{s}");
        let e = evm(&rx, &tx).unwrap();
        assert!((s + 20.0 * (e / 100.0).log10()).abs() < 0.2);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(goodput(1000, 120, 2.0).unwrap(), 480_000.0);
        assert_eq!(goodput(0, 120, 2.0).unwrap(), 0.0);
        assert!(goodput(1, 1, 0.0).is_err());
        assert_eq!(throughput(0, 124, 1.0).unwrap(), 0.0);
        let (data, frame) = (120usize, 124usize);
        let g = goodput(10, data, 1.0).unwrap();
        let t = throughput(10, frame, 1.0).unwrap();
        assert!((t - g * frame as f64 / data as f64).abs() < 1e-9);
        let g_half = goodput(5, data, 1.0).unwrap();
        assert!((g_half - t * data as f64 / frame as f64 * 0.5).abs() < 1e-9);
    }
}
