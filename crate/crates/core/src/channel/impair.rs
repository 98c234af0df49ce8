use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChannelProfile, Fading};
use crate::error::{Error, Result};
use crate::seed;
use crate::waveform::ComplexBuffer;

const TAG_EPOCH: &str = "channel/epoch-offset";
const TAG_WALK: &str = "channel/frequency-walk";
const TAG_FADING: &str = "channel/fading";
const TAG_NOISE: &str = "channel/noise";

/// Partition of a sample stream into coherence epochs.
///
/// Epoch boundaries fall on symbol boundaries. The first epoch is shortened
/// by a random whole number of symbols so that frames do not always start
/// on a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochGrid {
    /// Epoch length in samples; `None` means one epoch covers everything.
    pub epoch_samples: Option<usize>,
    pub offset_samples: usize,
}

impl EpochGrid {
    pub fn single() -> Self {
        Self {
            epoch_samples: None,
            offset_samples: 0,
        }
    }

    pub fn new(p: &ChannelProfile, samples_per_symbol: usize) -> Result<Self> {
        if samples_per_symbol == 0 {
            return Err(Error::InvalidConfig("samples per symbol must be positive".into()));
        }
        Ok(match p.coherence_symbols {
            None => Self::single(),
            Some(0) => return Err(Error::InvalidConfig("coherence_symbols must be at least 1".into())),
            Some(c) => {
                let mut rng = seed::stream(p.seed, &[seed::tag(TAG_EPOCH)]);
                Self {
                    epoch_samples: Some(c * samples_per_symbol),
                    offset_samples: rng.random_range(0..c) * samples_per_symbol,
                }
            }
        })
    }

    pub fn epoch_of(&self, n: usize) -> usize {
        match self.epoch_samples {
            None => 0,
            Some(e) => (n + self.offset_samples) / e,
        }
    }

    pub fn num_epochs(&self, len: usize) -> usize {
        if len == 0 {
            0
        } else {
            self.epoch_of(len - 1) + 1
        }
    }
}

/// Frequency offset added by the random walk in each epoch, in Hz.
/// Epoch 0 has no offset; each later epoch adds `N(0, drift_walk_hz²)`.
pub fn frequency_walk(p: &ChannelProfile, num_epochs: usize) -> Vec<f64> {
    let mut rng = seed::stream(p.seed, &[seed::tag(TAG_WALK)]);
    let mut f = 0.0;
    (0..num_epochs)
        .map(|e| {
            if e > 0 && p.drift_walk_hz > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                f += p.drift_walk_hz * z;
            }
            f
        })
        .collect()
}

/// Carrier phase at every sample: `2π(Δf·t + ½·drift·t²) + θ_in` plus the
/// integrated random walk, with `t = n·T_sp`.
pub fn carrier_phase(len: usize, sample_period: f64, p: &ChannelProfile, grid: &EpochGrid) -> Vec<f64> {
    let walk = frequency_walk(p, grid.num_epochs(len));
    let mut acc = 0.0;
    (0..len)
        .map(|n| {
            let t = n as f64 * sample_period;
            let det = 2.0 * PI * (p.delta_f * t + 0.5 * p.drift_rate * t * t) + p.theta_in;
            let phase = det + acc;
            acc += 2.0 * PI * walk[grid.epoch_of(n)] * sample_period;
            phase
        })
        .collect()
}

/// Multiplies every sample by `e^{−jφ[n]}` with `φ` from [`carrier_phase`].
pub fn apply_cfo_phase(x: &ComplexBuffer, p: &ChannelProfile, grid: &EpochGrid) -> ComplexBuffer {
    let phi = carrier_phase(x.len(), x.sample_period, p, grid);
    x.with_samples(
        x.samples
            .iter()
            .zip(phi)
            .map(|(s, ph)| s * Complex64::from_polar(1.0, -ph))
            .collect(),
    )
}

/// Unit-mean-power gain for one epoch.
fn draw_gain<R: Rng>(fading: Fading, rng: &mut R) -> Complex64 {
    let cn = |rng: &mut R| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    };
    match fading {
        Fading::None => Complex64::new(1.0, 0.0),
        Fading::BlockRayleigh => cn(rng),
        Fading::BlockRician { k } => {
            let los = (k / (k + 1.0)).sqrt();
            let scat = (1.0 / (k + 1.0)).sqrt();
            Complex64::new(los, 0.0) + cn(rng) * scat
        }
    }
}

/// Per-epoch gains for `num_epochs` epochs.
pub fn fading_gains(p: &ChannelProfile, num_epochs: usize) -> Vec<Complex64> {
    let mut rng = seed::stream(p.seed, &[seed::tag(TAG_FADING)]);
    (0..num_epochs).map(|_| draw_gain(p.fading, &mut rng)).collect()
}

/// Scales every sample by its epoch's gain; returns the buffer and the gains.
pub fn apply_block_fading(x: &ComplexBuffer, p: &ChannelProfile, grid: &EpochGrid) -> (ComplexBuffer, Vec<Complex64>) {
    let gains = fading_gains(p, grid.num_epochs(x.len()));
    let out = x
        .samples
        .iter()
        .enumerate()
        .map(|(n, s)| s * gains[grid.epoch_of(n)])
        .collect();
    (x.with_samples(out), gains)
}

/// Adds complex white Gaussian noise of power `signal_power / 10^(snr_db/10)`.
/// `None` returns the input unchanged.
pub fn apply_awgn_at_power(x: &ComplexBuffer, snr_db: Option<f64>, signal_power: f64, seed: u64) -> ComplexBuffer {
    let Some(snr) = snr_db else {
        return x.clone();
    };
    let sigma = (signal_power / 10f64.powf(snr / 10.0) / 2.0).sqrt();
    let mut rng = crate::seed::stream(seed, &[crate::seed::tag(TAG_NOISE)]);
    x.with_samples(
        x.samples
            .iter()
            .map(|s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                s + Complex64::new(re, im) * sigma
            })
            .collect(),
    )
}

/// [`apply_awgn_at_power`] with the signal power measured over the whole buffer.
pub fn apply_awgn(x: &ComplexBuffer, snr_db: Option<f64>, seed: u64) -> ComplexBuffer {
    apply_awgn_at_power(x, snr_db, x.mean_power(), seed)
}

/// What the channel did, for scoring against receiver estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTruth {
    pub grid: EpochGrid,
    pub gains: Vec<Complex64>,
    pub walk_hz: Vec<f64>,
    pub noise_power: f64,
}

/// Fading, then carrier offset, then noise.
///
/// `signal_power` sets the noise reference; when `None` it is the mean power
/// of the input.
pub fn apply_channel(
    x: &ComplexBuffer,
    p: &ChannelProfile,
    samples_per_symbol: usize,
    signal_power: Option<f64>,
) -> Result<(ComplexBuffer, ChannelTruth)> {
    p.validate(x.sample_period)?;
    let grid = EpochGrid::new(p, samples_per_symbol)?;
    let (faded, gains) = apply_block_fading(x, p, &grid);
    let rotated = apply_cfo_phase(&faded, p, &grid);
    let ps = signal_power.unwrap_or_else(|| x.mean_power());
    let noisy = apply_awgn_at_power(&rotated, p.snr_db, ps, p.seed);
    let noise_power = p.snr_db.map_or(0.0, |s| ps / 10f64.powf(s / 10.0));
    Ok((
        noisy,
        ChannelTruth {
            grid,
            walk_hz: frequency_walk(p, grid.num_epochs(x.len())),
            gains,
            noise_power,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sync::nco_correct;
    use proptest::prelude::*;

    fn tone(len: usize, period: f64) -> ComplexBuffer {
        let s = (0..len).map(|n| Complex64::from_polar(1.0, 0.01 * n as f64)).collect();
        ComplexBuffer::new(s, period).unwrap()
    }

    fn profile() -> ChannelProfile {
        ChannelProfile {
            seed: 17,
            ..ChannelProfile::ideal()
        }
    }

    #[test]
    fn ideal_channel_is_identity() {
        let x = tone(1000, 1e-6);
        let (y, truth) = apply_channel(&x, &profile(), 4, None).unwrap();
        assert_eq!(y, x);
        assert_eq!(truth.gains, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(truth.noise_power, 0.0);
    }

    #[test]
    fn cfo_matches_closed_form() {
        let p = ChannelProfile {
            delta_f: 1500.0,
            theta_in: 0.4,
            ..profile()
        };
        let x = tone(200, 1e-6);
        let y = apply_cfo_phase(&x, &p, &EpochGrid::single());
        for n in 0..200 {
            let want = x.samples[n] * Complex64::from_polar(1.0, -(2.0 * PI * 1500.0 * n as f64 * 1e-6 + 0.4));
            assert!((y.samples[n] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn half_turn_initial_phase_negates() {
        let p = ChannelProfile {
            theta_in: PI,
            ..profile()
        };
        let x = tone(64, 1e-6);
        let y = apply_cfo_phase(&x, &p, &EpochGrid::single());
        for (a, b) in y.samples.iter().zip(&x.samples) {
            assert!((a + b).norm() < 1e-12);
        }
    }

    #[test]
    fn drift_over_one_second() {
        // 100 Hz/s for 1 s: the finite-difference frequency ramps 50 → 150 Hz.
        let t = 1e-5;
        let n = 100_000;
        let p = ChannelProfile {
            delta_f: 50.0,
            drift_rate: 100.0,
            ..profile()
        };
        let phi = carrier_phase(n + 1, t, &p, &EpochGrid::single());
        for k in (0..n).step_by(9_973) {
            let f = (phi[k + 1] - phi[k]) / (2.0 * PI * t);
            assert!((f - (50.0 + 100.0 * (k as f64 + 0.5) * t)).abs() < 1e-6, "{f}");
        }
        let last = (phi[n] - phi[n - 1]) / (2.0 * PI * t);
        assert!((last - 150.0).abs() < 1e-2);
    }

    #[test]
    fn drift_instantaneous_frequency_is_linear() {
        // Oracle: finite difference of the applied phase.
        let t = 1e-6;
        let p = ChannelProfile {
            delta_f: 200.0,
            drift_rate: 5e4,
            ..profile()
        };
        let phi = carrier_phase(20_000, t, &p, &EpochGrid::single());
        for n in [0usize, 5000, 19_998] {
            let f = (phi[n + 1] - phi[n]) / (2.0 * PI * t);
            let mid = (n as f64 + 0.5) * t;
            assert!((f - (200.0 + 5e4 * mid)).abs() < 1e-6, "{f}");
        }
    }

    #[test]
    fn walk_holds_frequency_within_epochs() {
        let t = 1e-6;
        let p = ChannelProfile {
            drift_walk_hz: 50.0,
            coherence_symbols: Some(16),
            seed: 3,
            ..profile()
        };
        let grid = EpochGrid::new(&p, 1).unwrap();
        let phi = carrier_phase(1000, t, &p, &grid);
        let walk = frequency_walk(&p, grid.num_epochs(1000));
        assert_eq!(walk[0], 0.0);
        assert!(walk.iter().any(|w| w.abs() > 1.0));
        for n in 0..999 {
            let f = (phi[n + 1] - phi[n]) / (2.0 * PI * t);
            assert!((f - walk[grid.epoch_of(n)]).abs() < 1e-6);
        }
    }

    #[test]
    fn walk_step_variance() {
        let p = ChannelProfile {
            drift_walk_hz: 30.0,
            seed: 8,
            ..profile()
        };
        let w = frequency_walk(&p, 100_001);
        let var = w.windows(2).map(|d| (d[1] - d[0]).powi(2)).sum::<f64>() / 100_000.0;
        assert!((var / 900.0 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn epochs_align_to_symbols() {
        let p = ChannelProfile {
            coherence_symbols: Some(10),
            seed: 5,
            ..profile()
        };
        let grid = EpochGrid::new(&p, 4).unwrap();
        assert_eq!(grid.epoch_samples, Some(40));
        assert_eq!(grid.offset_samples % 4, 0);
        assert!(grid.offset_samples < 40);
        for n in 1..400 {
            if grid.epoch_of(n) != grid.epoch_of(n - 1) {
                assert_eq!(n % 4, 0);
            }
        }
    }

    #[test]
    fn fading_power_is_unity() {
        for fading in [Fading::BlockRayleigh, Fading::BlockRician { k: 4.0 }] {
            let p = ChannelProfile {
                fading,
                seed: 11,
                ..profile()
            };
            let g = fading_gains(&p, 100_000);
            let m = g.iter().map(|v| v.norm_sqr()).sum::<f64>() / g.len() as f64;
            assert!((m - 1.0).abs() < 0.02, "{fading}: {m}");
        }
        let p = ChannelProfile {
            fading: Fading::BlockRician { k: 4.0 },
            seed: 11,
            ..profile()
        };
        let g = fading_gains(&p, 100_000);
        let mean = g.iter().sum::<Complex64>() / g.len() as f64;
        assert!((mean.re - 0.8f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn fading_is_constant_within_epochs() {
        let p = ChannelProfile {
            fading: Fading::BlockRayleigh,
            coherence_symbols: Some(8),
            seed: 2,
            ..profile()
        };
        let grid = EpochGrid::new(&p, 2).unwrap();
        let x = ComplexBuffer::new(vec![Complex64::new(1.0, 0.0); 300], 1e-6).unwrap();
        let (y, gains) = apply_block_fading(&x, &p, &grid);
        assert_eq!(gains.len(), grid.num_epochs(300));
        for n in 0..300 {
            assert_eq!(y.samples[n], gains[grid.epoch_of(n)]);
        }
    }

    #[test]
    fn noise_power_matches_snr() {
        let x = ComplexBuffer::new(vec![Complex64::new(0.0, 0.0); 200_000], 1e-6).unwrap();
        let y = apply_awgn_at_power(&x, Some(10.0), 2.0, 4);
        assert!((y.mean_power() / 0.2 - 1.0).abs() < 0.02, "{}", y.mean_power());
        let z = apply_awgn(&tone(100, 1e-6), None, 4);
        assert_eq!(z, tone(100, 1e-6));
    }

    #[test]
    fn same_seed_same_realisation() {
        let p = ChannelProfile {
            delta_f: 300.0,
            drift_walk_hz: 10.0,
            snr_db: Some(5.0),
            coherence_symbols: Some(32),
            fading: Fading::BlockRayleigh,
            seed: 77,
            ..profile()
        };
        let x = tone(2000, 1e-6);
        let a = apply_channel(&x, &p, 4, None).unwrap();
        let b = apply_channel(&x, &p, 4, None).unwrap();
        assert_eq!(a, b);
        let c = apply_channel(&x, &ChannelProfile { seed: 78, ..p.clone() }, 4, None).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn rejects_wideband_delay_spread() {
        let p = ChannelProfile {
            delay_spread: 1e-6,
            ..profile()
        };
        assert!(apply_channel(&tone(10, 1e-6), &p, 4, None).is_err());
    }

    proptest! {
        #[test]
        fn cfo_commutes_with_gain(f in -5e3f64..5e3, th in -PI..PI, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let p = ChannelProfile { delta_f: f, theta_in: th, ..profile() };
            let g = Complex64::new(re, im);
            let x = tone(64, 1e-6);
            let gx = x.with_samples(x.samples.iter().map(|v| v * g).collect());
            let a = apply_cfo_phase(&gx, &p, &EpochGrid::single());
            let b = apply_cfo_phase(&x, &p, &EpochGrid::single());
            for (u, v) in a.samples.iter().zip(&b.samples) {
                prop_assert!((u - v * g).norm() < 1e-9);
            }
        }

        #[test]
        fn nco_inverts_cfo(f in -5e3f64..5e3) {
            let p = ChannelProfile { delta_f: f, ..profile() };
            let x = tone(256, 1e-6);
            let y = apply_cfo_phase(&x, &p, &EpochGrid::single());
            let z = nco_correct(&y, -f);
            for (u, v) in z.samples.iter().zip(&x.samples) {
                prop_assert!((u - v).norm() < 1e-9);
            }
        }
    }
}
