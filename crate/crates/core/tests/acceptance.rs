//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero when any criterion fails.

use std::time::Instant;

use num_complex::Complex64;
use pilotlink::channel::{apply_awgn_at_power, ChannelProfile};
use pilotlink::framing::{compute_layout, FrameConfig, FrameTables, LAMBDA_CHOICES, MODULATION_CHOICES};
use pilotlink::harness::{
    emit_sigmf, parse_sigmf, run_sweep, run_trial, SigmfSource, SimSettings, SweepSpec, TrialOutput, TrialSpec,
    REQUIRED_GLOBAL,
};
use pilotlink::metrics::{sinr_estimate, write_frame_log, write_trials_csv};
use pilotlink::seed;
use pilotlink::sync::{autocorrelation_metric, estimate_channel, estimate_coarse_cfo, nco_rotate};
use pilotlink::waveform::{demap_symbols, generate_golay_pair, ComplexBuffer, Constellation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const T_SYM: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * sigma
}

fn trial(frame: FrameConfig, profile: ChannelProfile, frames: usize, seed: u64) -> TrialOutput {
    let spec = TrialSpec {
        frame,
        profile_name: "acceptance".into(),
        profile,
        frames,
        trial: 0,
        seed,
    };
    run_trial(&spec, &SimSettings::default()).expect("trial runs")
}

fn loopback_identity() -> Verdict {
    let mut worst_evm = 0.0f64;
    let mut worst_time = 0.0f64;
    let mut bad = Vec::new();
    for &m in &MODULATION_CHOICES {
        for &l in &LAMBDA_CHOICES {
            let start = Instant::now();
            let out = trial(
                FrameConfig::new(l, m).unwrap(),
                ChannelProfile::ideal(),
                20,
                1000 + l as u64 * 100 + m as u64,
            );
            let secs = start.elapsed().as_secs_f64();
            let r = &out.result;
            worst_evm = worst_evm.max(r.evm_percent);
            worst_time = worst_time.max(secs);
            // crc_ok is only set when the decoded bytes equal the sent bytes.
            if r.crc_pass != 20 || !(r.evm_percent < 0.1) || secs >= 10.0 {
                bad.push(format!("({l},{m})"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("20 cells x 20 frames, worst EVM {worst_evm:.4}%, slowest cell {worst_time:.2} s, failing {bad:?}"),
    )
}

fn coarse_cfo_accuracy() -> Verdict {
    let cfg = FrameConfig::default();
    let tables = FrameTables::new(&cfg).unwrap();
    let m = cfg.training_rep_len;
    let dt = m as f64 * T_SYM;
    let unamb = 1.0 / (2.0 * dt);
    let training: Vec<Complex64> = tables.training.iter().chain(&tables.training).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let mut worst_rel = 0.0f64;
    for _ in 0..1000 {
        let df = rng.random_range(-0.8..0.8) * unamb;
        let y = nco_rotate(&training, df, T_SYM);
        let c = autocorrelation_metric(&y, m).unwrap().c[2 * m - 1];
        let est = estimate_coarse_cfo(c, dt).unwrap();
        // The channel rotates by e^{-j2πΔf t}, so the estimate is -Δf.
        worst_rel = worst_rel.max((est + df).abs() / df.abs());
    }

    let mut sq = 0.0;
    let cases = 1000;
    for k in 0..cases {
        let df = rng.random_range(-0.8..0.8) * unamb;
        let y = nco_rotate(&training, df, T_SYM);
        let buf = ComplexBuffer::new(y, T_SYM).unwrap();
        let noisy = apply_awgn_at_power(&buf, Some(10.0), 1.0, seed::derive(2, &[k]));
        let c = autocorrelation_metric(&noisy.samples, m).unwrap().c[2 * m - 1];
        let est = estimate_coarse_cfo(c, dt).unwrap();
        sq += (est + df).powi(2);
    }
    let rms = (sq / cases as f64).sqrt();
    let limit = 0.02 * unamb;
    verdict(
        worst_rel < 1e-6 && rms < limit,
        format!("noiseless worst relative error {worst_rel:.2e} (< 1e-6); 10 dB RMS {rms:.1} Hz (< {limit:.1} Hz)"),
    )
}

fn golay_exactness() -> Verdict {
    let mut bad = Vec::new();
    let mut n = 2;
    while n <= 512 {
        let p = generate_golay_pair(n).unwrap();
        let ok = (0..n).all(|lag| {
            let s: i64 = (0..n - lag)
                .map(|k| p.a[k + lag] as i64 * p.a[k] as i64 + p.b[k + lag] as i64 * p.b[k] as i64)
                .sum();
            s == if lag == 0 { 2 * n as i64 } else { 0 }
        });
        if !ok {
            bad.push(n);
        }
        n *= 2;
    }
    verdict(bad.is_empty(), format!("N_g = 2..512, failing {bad:?}"))
}

fn table_one() -> Verdict {
    let pairs: Vec<(usize, usize)> = LAMBDA_CHOICES
        .iter()
        .map(|&l| {
            let lay = compute_layout(&FrameConfig::new(l, 16).unwrap()).unwrap();
            (
                lay.pilot_spans.iter().map(|s| s.len()).sum(),
                lay.data_spans.iter().map(|s| s.len()).sum(),
            )
        })
        .collect();
    let expect = vec![(16, 240), (32, 224), (64, 192), (96, 160), (128, 128)];
    verdict(pairs == expect, format!("{pairs:?}"))
}

fn residual_phase_trend() -> Verdict {
    let profile = ChannelProfile {
        drift_rate: 8.5e5,
        snr_db: Some(30.0),
        ..ChannelProfile::ideal()
    };
    let trials = 30;
    let means: Vec<f64> = [1usize, 2, 4, 8]
        .iter()
        .map(|&l| {
            let v: Vec<f64> = (0..trials)
                .map(|t| {
                    trial(FrameConfig::new(l, 16).unwrap(), profile.clone(), 10, 5000 + t)
                        .result
                        .mean_residual_phase_deg
                })
                .filter(|p| p.is_finite())
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let in_band = (5.0..=15.0).contains(&means[0]);
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let small = means[3] < 1.0;
    verdict(
        in_band && decreasing && small,
        format!(
            "drift 8.5e5 Hz/s, 30 trials: λ_p 1,2,4,8 → {:.2}°, {:.2}°, {:.2}°, {:.2}° \
             (λ_p=1 in [5,15]: {in_band}, decreasing: {decreasing}, λ_p=8 < 1°: {small})",
            means[0], means[1], means[2], means[3]
        ),
    )
}

fn goodput_tradeoff() -> Verdict {
    let profile = ChannelProfile {
        snr_db: Some(20.0),
        coherence_symbols: Some(128),
        drift_walk_hz: 250.0,
        ..ChannelProfile::ideal()
    };
    let (frames, trials) = (20, 100u64);
    let cells: Vec<(u32, usize)> = MODULATION_CHOICES
        .iter()
        .flat_map(|&m| LAMBDA_CHOICES.iter().map(move |&l| (m, l)))
        .collect();
    let goodput: Vec<f64> = cells
        .par_iter()
        .enumerate()
        .map(|(cell, &(m, l))| {
            (0..trials)
                .map(|t| {
                    let s = seed::derive(6, &[cell as u64, t]);
                    trial(FrameConfig::new(l, m).unwrap(), profile.clone(), frames, s)
                        .result
                        .goodput_bps
                })
                .sum::<f64>()
                / trials as f64
        })
        .collect();
    let g = |m: u32, l: usize| goodput[cells.iter().position(|&c| c == (m, l)).unwrap()];

    let gain = |m: u32| g(m, 4).max(g(m, 6)) / g(m, 1);
    let a = gain(16) >= 2.0 && gain(64) >= 2.0;
    let qpsk: Vec<f64> = LAMBDA_CHOICES.iter().map(|&l| g(4, l)).collect();
    let (lo, hi) = qpsk
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let spread = (hi - lo) / hi;
    let b = spread <= 0.25;
    let peak64 = LAMBDA_CHOICES.iter().map(|&l| g(64, l)).fold(0.0, f64::max);
    let c = g(64, 8) < peak64;

    let row = |m: u32| {
        LAMBDA_CHOICES
            .iter()
            .map(|&l| format!("{:.0}", g(m, l) / 1e3))
            .collect::<Vec<_>>()
            .join("/")
    };
    verdict(
        a && b && c,
        format!(
            "walk σ 250 Hz, coherence 128, 20 dB, {trials}x{frames} frames; kbps over λ_p 1/2/4/6/8: \
             4QAM {} 8QAM {} 16QAM {} 64QAM {}; (a) gains 16QAM {:.2}x 64QAM {:.2}x: {a}; \
             (b) 4QAM spread {:.0}%: {b}; (c) 64QAM λ_p=8 below peak: {c}",
            row(4),
            row(8),
            row(16),
            row(64),
            gain(16),
            gain(64),
            spread * 100.0
        ),
    )
}

fn evm_sinr_identity() -> Verdict {
    let profile = ChannelProfile {
        snr_db: Some(20.0),
        delta_f: 2500.0,
        theta_in: 0.4,
        ..ChannelProfile::ideal()
    };
    let mut checked = 0;
    let mut worst = 0.0f64;
    for t in 0..20 {
        let out = trial(FrameConfig::new(4, 16).unwrap(), profile.clone(), 10, 7000 + t);
        let error_free = out
            .frames
            .iter()
            .all(|f| f.symbols > 0 && f.err_truth == f.err_decision);
        if error_free && out.result.sinr_db.is_finite() {
            let implied = -20.0 * (out.result.evm_percent / 100.0).log10();
            worst = worst.max((out.result.sinr_db - implied).abs());
            checked += 1;
        }
    }
    let identity = checked > 0 && worst <= 0.2;

    let c = Constellation::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let tx: Vec<Complex64> = (0..100_000).map(|_| c.points()[rng.random_range(0..4)]).collect();
    let buf = ComplexBuffer::new(tx, T_SYM).unwrap();
    let mut errs = Vec::new();
    for s in [10.0, 15.0, 20.0, 25.0] {
        let rx = apply_awgn_at_power(&buf, Some(s), 1.0, seed::derive(77, &[s as u64]));
        let decisions: Vec<Complex64> = rx.samples.iter().map(|&v| c.decide(v)).collect();
        errs.push(sinr_estimate(&rx.samples, &decisions).unwrap() - s);
    }
    let injected = errs.iter().all(|e| e.abs() <= 0.3);
    verdict(
        identity && injected,
        format!(
            "identity on {checked} error-free trials, worst {worst:.2e} dB (<= 0.2); \
             SINR - s at 10/15/20/25 dB: {:+.3}/{:+.3}/{:+.3}/{:+.3} dB (|.| <= 0.3)",
            errs[0], errs[1], errs[2], errs[3]
        ),
    )
}

/// Trial CSV, frame log and every SigMF document of one sweep.
fn sweep_artifacts(spec: &SweepSpec, workers: usize) -> (Vec<u8>, Vec<u8>, Vec<String>) {
    let settings = SimSettings::default();
    let outs = run_sweep(spec, &settings, workers).unwrap();
    let results: Vec<_> = outs.iter().map(|(_, o)| o.result.clone()).collect();
    let frames: Vec<_> = outs.iter().flat_map(|(_, o)| o.frames.clone()).collect();
    let mut csv = Vec::new();
    write_trials_csv(&mut csv, &results).unwrap();
    let mut log = Vec::new();
    write_frame_log(&mut log, &frames).unwrap();
    let docs = outs
        .iter()
        .map(|(task, o)| {
            emit_sigmf(&SigmfSource {
                result: &o.result,
                frame: &task.spec.frame,
                profile: &task.spec.profile,
                environment: &spec.environment,
                sample_rate: settings.sample_rate(),
                sample_count: o.sample_count,
            })
            .unwrap()
            .to_json()
            .unwrap()
        })
        .collect();
    (csv, log, docs)
}

fn sweep_spec() -> SweepSpec {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/g2g.cfg")).unwrap();
    let mut spec = SweepSpec::from_kv_str(&text, "g2g.cfg").unwrap();
    spec.frames_per_trial = 4;
    spec.trials_per_cell = 2;
    spec
}

fn determinism(spec: &SweepSpec) -> (Verdict, Vec<String>) {
    let a = sweep_artifacts(spec, 1);
    let b = sweep_artifacts(spec, 1);
    let c = sweep_artifacts(spec, 8);
    let pass = a == b && a == c;
    let v = verdict(
        pass,
        format!(
            "{} trials, {} CSV bytes, {} SigMF documents; repeat identical: {}, workers 1 vs 8 identical: {}",
            a.2.len(),
            a.0.len(),
            a.2.len(),
            a == b,
            a == c
        ),
    );
    (v, a.2)
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for &m in &MODULATION_CHOICES {
        let c = Constellation::new(m).unwrap();
        let sigma = c.min_distance() * 0.5;
        for _ in 0..10_000 {
            let s = c.points()[rng.random_range(0..m as usize)] + gaussian(&mut rng, sigma);
            // Exhaustive search; ties go to the lowest index.
            let mut best = 0;
            for (i, p) in c.points().iter().enumerate() {
                if (s - p).norm_sqr() < (s - c.points()[best]).norm_sqr() {
                    best = i;
                }
            }
            let k = c.bits_per_symbol();
            let label = c.label(best);
            let want: Vec<bool> = (0..k).rev().map(|b| (label >> b) & 1 == 1).collect();
            if c.nearest_index(s) != best || demap_symbols(&[s], &c) != want {
                mismatches += 1;
            }
        }
    }

    let tables = FrameTables::new(&FrameConfig::default()).unwrap();
    let pilot = &tables.pilot;
    let h = Complex64::from_polar(0.8, 1.1);
    let sigma2 = 0.05;
    let trials = 10_000;
    let mut acc = 0.0;
    for _ in 0..trials {
        let rx: Vec<Complex64> = pilot
            .iter()
            .map(|p| p * h + gaussian(&mut rng, (sigma2 / 2.0f64).sqrt()))
            .collect();
        acc += (estimate_channel(&rx, pilot).unwrap() - h).norm_sqr();
    }
    let var = acc / trials as f64;
    let expect = sigma2 / pilot.len() as f64;
    let ratio = var / expect;
    verdict(
        mismatches == 0 && (ratio - 1.0).abs() <= 0.1,
        format!("demapper mismatches {mismatches} of 40000; estimator variance / (σ²/N_p) = {ratio:.4}"),
    )
}

fn sigmf_validity(docs: &[String]) -> Verdict {
    let mut bad = 0;
    for text in docs {
        let ok = serde_json::from_str::<serde_json::Value>(text)
            .is_ok_and(|v| REQUIRED_GLOBAL.iter().all(|k| v["global"].get(*k).is_some()))
            && parse_sigmf(text).is_ok_and(|rec| rec.to_json().is_ok_and(|t| &t == text));
        if !ok {
            bad += 1;
        }
    }
    verdict(
        !docs.is_empty() && bad == 0,
        format!("{} documents, {bad} invalid", docs.len()),
    )
}

fn report(failed: &mut usize, n: usize, name: &str, run: impl FnOnce() -> Verdict) {
    let start = Instant::now();
    let v = run();
    if !v.pass {
        *failed += 1;
    }
    println!(
        "criterion {n:>2} {name:<36} {} ({:.1} s) {}",
        if v.pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        v.detail
    );
}

fn main() {
    let mut failed = 0;
    report(&mut failed, 1, "loopback identity", loopback_identity);
    report(&mut failed, 2, "coarse CFO accuracy", coarse_cfo_accuracy);
    report(&mut failed, 3, "Golay exactness", golay_exactness);
    report(&mut failed, 4, "pilot/data table", table_one);
    report(
        &mut failed,
        5,
        "residual phase vs pilot repetitions",
        residual_phase_trend,
    );
    report(&mut failed, 6, "goodput trade-off shape", goodput_tradeoff);
    report(&mut failed, 7, "EVM-SINR identity", evm_sinr_identity);
    let mut docs = Vec::new();
    report(&mut failed, 8, "determinism", || {
        let (v, d) = determinism(&sweep_spec());
        docs = d;
        v
    });
    report(&mut failed, 9, "oracle equivalence", oracle_equivalence);
    report(&mut failed, 10, "SigMF validity", || sigmf_validity(&docs));
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
