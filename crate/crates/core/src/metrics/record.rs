use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::link::{evm_from_energy, goodput, sinr_from_energy, throughput};
use crate::error::{Error, Result};

/// One transmitted frame as seen by the receiver. A frame log is a CSV of
/// these rows with the columns in field order:
///
/// `lambda_p, modulation, profile, trial, seed, frame, airtime_s, data_bytes,
/// frame_bytes, detected, crc_ok, failure, symbols, err_truth, ref_energy,
/// err_decision, decision_energy, residual_phase_deg, coarse_cfo_hz,
/// residual_freq_hz`
///
/// Energies are sums over the frame's equalized data symbols: against the
/// transmitted symbols (`err_truth`, `ref_energy`) and against the hard
/// decisions (`err_decision`, `decision_energy`). Undetected frames carry
/// zeros and NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub lambda_p: usize,
    pub modulation: u32,
    pub profile: String,
    pub trial: usize,
    pub seed: u64,
    pub frame: usize,
    pub airtime_s: f64,
    pub data_bytes: usize,
    pub frame_bytes: usize,
    pub detected: bool,
    pub crc_ok: bool,
    pub failure: String,
    pub symbols: usize,
    pub err_truth: f64,
    pub ref_energy: f64,
    pub err_decision: f64,
    pub decision_energy: f64,
    pub residual_phase_deg: f64,
    pub coarse_cfo_hz: f64,
    pub residual_freq_hz: f64,
}

/// Per-trial summary. Results CSV columns, in order:
///
/// `lambda_p, modulation, profile, trial, seed, frames_sent,
/// frames_detected, crc_pass, duration_s, goodput_bps, throughput_bps,
/// evm_percent, evm_decision_percent, sinr_db, mean_residual_phase_deg`
///
/// `evm_percent` is measured against the transmitted symbols,
/// `evm_decision_percent` and `sinr_db` against hard decisions. Quantities
/// with no detected frame to measure are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub lambda_p: usize,
    pub modulation: u32,
    pub profile: String,
    pub trial: usize,
    pub seed: u64,
    pub frames_sent: u64,
    pub frames_detected: u64,
    pub crc_pass: u64,
    pub duration_s: f64,
    pub goodput_bps: f64,
    pub throughput_bps: f64,
    pub evm_percent: f64,
    pub evm_decision_percent: f64,
    pub sinr_db: f64,
    pub mean_residual_phase_deg: f64,
}

impl TrialResult {
    /// Equality that treats NaN as equal to NaN.
    pub fn same_as(&self, other: &Self) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.lambda_p == other.lambda_p
            && self.modulation == other.modulation
            && self.profile == other.profile
            && self.trial == other.trial
            && self.seed == other.seed
            && self.frames_sent == other.frames_sent
            && self.frames_detected == other.frames_detected
            && self.crc_pass == other.crc_pass
            && f(self.duration_s, other.duration_s)
            && f(self.goodput_bps, other.goodput_bps)
            && f(self.throughput_bps, other.throughput_bps)
            && f(self.evm_percent, other.evm_percent)
            && f(self.evm_decision_percent, other.evm_decision_percent)
            && f(self.sinr_db, other.sinr_db)
            && f(self.mean_residual_phase_deg, other.mean_residual_phase_deg)
    }
}

type TrialKey = (usize, u32, String, usize, u64);

fn key(r: &FrameRecord) -> TrialKey {
    (r.lambda_p, r.modulation, r.profile.clone(), r.trial, r.seed)
}

/// Summarises the frames of one trial, in the order given.
pub fn aggregate(frames: &[FrameRecord]) -> Result<TrialResult> {
    let first = frames.first().ok_or(Error::EmptyInput)?;
    let k = key(first);
    if frames.iter().any(|r| key(r) != k) {
        return Err(Error::InvalidConfig("frames from more than one trial".into()));
    }
    let mut detected = 0u64;
    let mut passed = 0u64;
    let mut duration = 0.0;
    let (mut et, mut rt, mut ed, mut rd) = (0.0, 0.0, 0.0, 0.0);
    let (mut phase_sum, mut phase_n) = (0.0, 0u64);
    for r in frames {
        duration += r.airtime_s;
        if r.detected {
            detected += 1;
        }
        if r.crc_ok {
            passed += 1;
        }
        if r.symbols > 0 {
            et += r.err_truth;
            rt += r.ref_energy;
            ed += r.err_decision;
            rd += r.decision_energy;
        }
        if r.detected && r.residual_phase_deg.is_finite() {
            phase_sum += r.residual_phase_deg;
            phase_n += 1;
        }
    }
    let measured = rt > 0.0;
    Ok(TrialResult {
        lambda_p: first.lambda_p,
        modulation: first.modulation,
        profile: first.profile.clone(),
        trial: first.trial,
        seed: first.seed,
        frames_sent: frames.len() as u64,
        frames_detected: detected,
        crc_pass: passed,
        duration_s: duration,
        goodput_bps: goodput(passed, first.data_bytes, duration)?,
        throughput_bps: throughput(detected, first.frame_bytes, duration)?,
        evm_percent: if measured { evm_from_energy(et, rt) } else { f64::NAN },
        evm_decision_percent: if measured { evm_from_energy(ed, rd) } else { f64::NAN },
        sinr_db: if measured { sinr_from_energy(ed, rd) } else { f64::NAN },
        mean_residual_phase_deg: if phase_n > 0 {
            phase_sum / phase_n as f64
        } else {
            f64::NAN
        },
    })
}

/// Splits a frame log into trials, in order of first appearance, and
/// aggregates each.
pub fn aggregate_log(frames: &[FrameRecord]) -> Result<Vec<TrialResult>> {
    let mut order: Vec<TrialKey> = Vec::new();
    let mut groups: BTreeMap<TrialKey, Vec<FrameRecord>> = BTreeMap::new();
    for r in frames {
        let k = key(r);
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(r.clone());
    }
    order.iter().map(|k| aggregate(&groups[k])).collect()
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_trials_csv<W: Write>(w: W, rows: &[TrialResult]) -> Result<()> {
    write_rows(w, rows)
}

pub fn read_trials_csv<R: Read>(r: R) -> Result<Vec<TrialResult>> {
    read_rows(r)
}

pub fn write_frame_log<W: Write>(w: W, rows: &[FrameRecord]) -> Result<()> {
    write_rows(w, rows)
}

pub fn read_frame_log<R: Read>(r: R) -> Result<Vec<FrameRecord>> {
    read_rows(r)
}

/// Goodput gain from `λ_p = 1` to the best `λ_p`, for one modulation and
/// channel profile, using goodput averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub modulation: u32,
    pub profile: String,
    pub baseline_goodput_bps: f64,
    pub best_lambda_p: usize,
    pub best_goodput_bps: f64,
    pub gain_percent: f64,
}

/// Mean goodput per `(modulation, profile, λ_p)`.
pub fn mean_goodput(results: &[TrialResult]) -> BTreeMap<(u32, String, usize), f64> {
    let mut acc: BTreeMap<(u32, String, usize), (f64, usize)> = BTreeMap::new();
    for r in results {
        let e = acc
            .entry((r.modulation, r.profile.clone(), r.lambda_p))
            .or_insert((0.0, 0));
        e.0 += r.goodput_bps;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// One row per `(modulation, profile)` that has a `λ_p = 1` baseline.
pub fn improvement_table(results: &[TrialResult]) -> Vec<Improvement> {
    let means = mean_goodput(results);
    let mut groups: BTreeMap<(u32, String), Vec<(usize, f64)>> = BTreeMap::new();
    for ((m, p, l), g) in means {
        groups.entry((m, p)).or_default().push((l, g));
    }
    groups
        .into_iter()
        .filter_map(|((modulation, profile), cells)| {
            let base = cells.iter().find(|c| c.0 == 1)?.1;
            let best = cells
                .iter()
                .copied()
                .fold((0usize, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
            Some(Improvement {
                modulation,
                profile,
                baseline_goodput_bps: base,
                best_lambda_p: best.0,
                best_goodput_bps: best.1,
                gain_percent: if base > 0.0 {
                    100.0 * (best.1 - base) / base
                } else {
                    f64::INFINITY
                },
            })
        })
        .collect()
}

pub fn write_improvement_csv<W: Write>(w: W, rows: &[Improvement]) -> Result<()> {
    write_rows(w, rows)
}
