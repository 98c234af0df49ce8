use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compute_layout, FrameConfig};
use crate::error::{Error, Result};
use crate::waveform::{bits_to_bytes, bytes_to_bits, demap_symbols, generate_golay_pair, map_bits, GolayPair};

const PILOT_SEED: u64 = 0x5049_4c4f_5453_4551;
const TRAINING_SEED: u64 = 0x5452_4149_4e49_4e47;

/// Unit-magnitude QPSK sequence drawn from a fixed-seed generator.
fn qpsk_sequence(len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let re = if rng.random::<bool>() {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            let im = if rng.random::<bool>() {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            Complex64::new(re, im)
        })
        .collect()
}

/// Known sequences shared by transmitter and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTables {
    pub pilot: Vec<Complex64>,
    /// One training repetition; the frame carries `training_reps` copies.
    pub training: Vec<Complex64>,
    pub golay: GolayPair,
    /// `a ‖ b` as complex symbols.
    pub preamble: Vec<Complex64>,
}

impl FrameTables {
    pub fn new(cfg: &FrameConfig) -> Result<Self> {
        cfg.validate()?;
        let golay = generate_golay_pair(cfg.golay_len)?;
        let preamble = golay
            .a
            .iter()
            .chain(&golay.b)
            .map(|&v| Complex64::new(v as f64, 0.0))
            .collect();
        Ok(Self {
            pilot: qpsk_sequence(cfg.pilot_block_len, PILOT_SEED),
            training: qpsk_sequence(cfg.training_rep_len, TRAINING_SEED),
            golay,
            preamble,
        })
    }
}

/// Data bytes plus their CRC-32 (reflected, polynomial 0x04C11DB7).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketPayload {
    pub data_bytes: Vec<u8>,
    pub crc: u32,
}

pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

pub fn crc_attach(data_bytes: &[u8]) -> PacketPayload {
    PacketPayload {
        data_bytes: data_bytes.to_vec(),
        crc: crc32(data_bytes),
    }
}

pub fn crc_check(p: &PacketPayload) -> bool {
    crc32(&p.data_bytes) == p.crc
}

impl PacketPayload {
    /// Data bytes followed by the CRC, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = self.data_bytes.clone();
        v.extend_from_slice(&self.crc.to_le_bytes());
        v
    }

    /// Splits the trailing four CRC bytes off `bytes`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::InputTooShort {
                len: bytes.len(),
                min: 4,
            });
        }
        let (data, crc) = bytes.split_at(bytes.len() - 4);
        Ok(Self {
            data_bytes: data.to_vec(),
            crc: u32::from_le_bytes([crc[0], crc[1], crc[2], crc[3]]),
        })
    }
}

/// Pilot and data blocks sliced out of a received payload section.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedFrame {
    pub pilots: Vec<Vec<Complex64>>,
    pub data: Vec<Vec<Complex64>>,
}

/// Builds the symbol sequence of one frame.
///
/// Bits past the CRC, when the data budget is not a whole number of bytes,
/// are zero.
pub fn assemble_frame(payload: &PacketPayload, cfg: &FrameConfig, tables: &FrameTables) -> Result<Vec<Complex64>> {
    let layout = compute_layout(cfg)?;
    if payload.data_bytes.len() != cfg.data_bytes() {
        return Err(Error::PayloadSize {
            expected: cfg.data_bytes(),
            got: payload.data_bytes.len(),
        });
    }
    let mut bits = bytes_to_bits(&payload.to_bytes());
    bits.resize(cfg.data_bit_budget(), false);
    let data = map_bits(&bits, &cfg.constellation()?)?;

    let mut frame = Vec::with_capacity(layout.total_symbols);
    for _ in 0..cfg.training_reps {
        frame.extend_from_slice(&tables.training);
    }
    frame.extend_from_slice(&tables.preamble);
    let mut next = 0;
    for span in &layout.data_spans {
        frame.extend_from_slice(&tables.pilot);
        frame.extend_from_slice(&data[next..next + span.len()]);
        next += span.len();
    }
    debug_assert_eq!(frame.len(), layout.total_symbols);
    Ok(frame)
}

/// Slices the payload section that starts at `start_index` into its pilot
/// and data blocks.
pub fn parse_frame(symbols: &[Complex64], cfg: &FrameConfig, start_index: usize) -> Result<ParsedFrame> {
    let layout = compute_layout(cfg)?;
    let available = symbols.len().saturating_sub(start_index);
    if available < cfg.payload_symbols {
        return Err(Error::Truncated {
            needed: cfg.payload_symbols,
            available,
        });
    }
    let p0 = layout.payload_start();
    let slice = |r: &std::ops::Range<usize>| {
        let s = start_index + r.start - p0;
        symbols[s..s + r.len()].to_vec()
    };
    Ok(ParsedFrame {
        pilots: layout.pilot_spans.iter().map(slice).collect(),
        data: layout.data_spans.iter().map(slice).collect(),
    })
}

/// Hard-decision demaps concatenated data symbols back to a payload.
pub fn decode_payload(data_symbols: &[Complex64], cfg: &FrameConfig) -> Result<PacketPayload> {
    if data_symbols.len() != cfg.data_symbols() {
        return Err(Error::LengthMismatch {
            left: data_symbols.len(),
            right: cfg.data_symbols(),
        });
    }
    let bits = demap_symbols(data_symbols, &cfg.constellation()?);
    let bytes = bits_to_bytes(&bits[..cfg.frame_bytes() * 8]);
    PacketPayload::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::config::{LAMBDA_CHOICES, MODULATION_CHOICES};
    use proptest::prelude::*;

    /// Bit-at-a-time reflected CRC-32.
    fn crc32_bitwise(data: &[u8]) -> u32 {
        let mut crc = 0xFFFF_FFFFu32;
        for &byte in data {
            crc ^= byte as u32;
            for _ in 0..8 {
                let lsb = crc & 1;
                crc >>= 1;
                if lsb == 1 {
                    crc ^= 0xEDB8_8320;
                }
            }
        }
        !crc
    }

    fn bytes(n: usize, k: u32) -> Vec<u8> {
        (0..n)
            .map(|i| (i as u32).wrapping_mul(2654435761).wrapping_add(k) as u8)
            .collect()
    }

    #[test]
    fn crc_check_vector() {
        assert_eq!(crc32_bitwise(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32(b""), crc32_bitwise(b""));
    }

    #[test]
    fn tables_are_fixed_and_unit_magnitude() {
        let cfg = FrameConfig::default();
        let t1 = FrameTables::new(&cfg).unwrap();
        let t2 = FrameTables::new(&cfg).unwrap();
        assert_eq!(t1, t2);
        assert!(t1
            .pilot
            .iter()
            .chain(&t1.training)
            .all(|s| (s.norm() - 1.0).abs() < 1e-15));
        assert_eq!(t1.pilot.len(), 16);
        assert_eq!(t1.training.len(), 32);
        assert_eq!(t1.preamble.len(), 128);
    }

    #[test]
    fn rejects_wrong_payload_size() {
        let cfg = FrameConfig::new(4, 16).unwrap();
        let t = FrameTables::new(&cfg).unwrap();
        let err = assemble_frame(&crc_attach(&[0u8; 91]), &cfg, &t).unwrap_err();
        assert!(matches!(err, Error::PayloadSize { expected: 92, got: 91 }));
        assert!(err.to_string().contains("92"));
    }

    #[test]
    fn frame_contains_tables_verbatim() {
        let cfg = FrameConfig::new(6, 8).unwrap();
        let t = FrameTables::new(&cfg).unwrap();
        let f = assemble_frame(&crc_attach(&bytes(cfg.data_bytes(), 1)), &cfg, &t).unwrap();
        let l = compute_layout(&cfg).unwrap();
        assert_eq!(&f[0..32], &t.training[..]);
        assert_eq!(&f[32..64], &t.training[..]);
        assert_eq!(&f[l.preamble_span.clone()], &t.preamble[..]);
        for s in &l.pilot_spans {
            assert_eq!(&f[s.clone()], &t.pilot[..]);
        }
    }

    #[test]
    fn truncated_frame_is_an_error() {
        let cfg = FrameConfig::new(2, 4).unwrap();
        let t = FrameTables::new(&cfg).unwrap();
        let f = assemble_frame(&crc_attach(&bytes(cfg.data_bytes(), 2)), &cfg, &t).unwrap();
        let start = compute_layout(&cfg).unwrap().payload_start();
        assert!(matches!(
            parse_frame(&f[..f.len() - 10], &cfg, start),
            Err(Error::Truncated {
                needed: 256,
                available: 246
            })
        ));
    }

    proptest! {
        #[test]
        fn crc_round_trip_and_single_bit_flip(data in prop::collection::vec(any::<u8>(), 0..200), flip in any::<prop::sample::Index>()) {
            let p = crc_attach(&data);
            prop_assert!(crc_check(&p));
            prop_assert_eq!(p.crc, crc32_bitwise(&data));
            prop_assert_eq!(PacketPayload::from_bytes(&p.to_bytes()).unwrap(), p.clone());
            if !data.is_empty() {
                let bit = flip.index(data.len() * 8);
                let mut q = p.clone();
                q.data_bytes[bit / 8] ^= 1 << (bit % 8);
                prop_assert!(!crc_check(&q));
            }
        }

        #[test]
        fn assemble_parse_round_trip(
            lp in prop::sample::select(LAMBDA_CHOICES.to_vec()),
            m in prop::sample::select(MODULATION_CHOICES.to_vec()),
            seed in any::<u32>(),
            lead in 0usize..20,
        ) {
            let cfg = FrameConfig::new(lp, m).unwrap();
            let t = FrameTables::new(&cfg).unwrap();
            let p = crc_attach(&bytes(cfg.data_bytes(), seed));
            let f = assemble_frame(&p, &cfg, &t).unwrap();
            let mut stream = vec![Complex64::new(0.0, 0.0); lead];
            stream.extend_from_slice(&f);
            let start = lead + compute_layout(&cfg).unwrap().payload_start();
            let parsed = parse_frame(&stream, &cfg, start).unwrap();
            prop_assert_eq!(parsed.pilots.len(), lp);
            prop_assert!(parsed.pilots.iter().all(|b| b == &t.pilot));
            let data: Vec<Complex64> = parsed.data.concat();
            let back = decode_payload(&data, &cfg).unwrap();
            prop_assert!(crc_check(&back));
            prop_assert_eq!(back, p);
        }
    }
}
