use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Environment;
use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::framing::FrameConfig;
use crate::metrics::TrialResult;

pub const SIGMF_VERSION: &str = "1.0.0";
pub const DATATYPE: &str = "cf32_le";

/// Global keys every document must carry. Altitude and link distance may be
/// null but not absent.
pub const REQUIRED_GLOBAL: [&str; 8] = [
    "core:datatype",
    "core:sample_rate",
    "core:version",
    "pilotlink:modulation",
    "pilotlink:pilot_repetitions",
    "pilotlink:altitude",
    "pilotlink:link_distance",
    "pilotlink:environment",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmfGlobal {
    #[serde(rename = "core:datatype")]
    pub datatype: String,
    #[serde(rename = "core:sample_rate")]
    pub sample_rate: f64,
    #[serde(rename = "core:version")]
    pub version: String,
    #[serde(rename = "core:description")]
    pub description: String,
    #[serde(rename = "pilotlink:modulation")]
    pub modulation: String,
    #[serde(rename = "pilotlink:pilot_repetitions")]
    pub pilot_repetitions: usize,
    /// Metres.
    #[serde(rename = "pilotlink:altitude")]
    pub altitude: Option<f64>,
    /// Metres.
    #[serde(rename = "pilotlink:link_distance")]
    pub link_distance: Option<f64>,
    #[serde(rename = "pilotlink:environment")]
    pub environment: String,
    #[serde(rename = "pilotlink:channel_profile")]
    pub channel_profile: String,
    #[serde(rename = "pilotlink:snr_db")]
    pub snr_db: Option<f64>,
    #[serde(rename = "pilotlink:coherence_symbols")]
    pub coherence_symbols: Option<usize>,
    #[serde(rename = "pilotlink:seed")]
    pub seed: u64,
    #[serde(rename = "pilotlink:trial")]
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmfCapture {
    #[serde(rename = "core:sample_start")]
    pub sample_start: u64,
}

/// Trial summary attached to the whole recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmfAnnotation {
    #[serde(rename = "core:sample_start")]
    pub sample_start: u64,
    #[serde(rename = "core:sample_count")]
    pub sample_count: u64,
    #[serde(rename = "core:label")]
    pub label: String,
    #[serde(rename = "pilotlink:frames_sent")]
    pub frames_sent: u64,
    #[serde(rename = "pilotlink:frames_detected")]
    pub frames_detected: u64,
    #[serde(rename = "pilotlink:crc_pass")]
    pub crc_pass: u64,
    #[serde(rename = "pilotlink:goodput_bps")]
    pub goodput_bps: f64,
    #[serde(rename = "pilotlink:throughput_bps")]
    pub throughput_bps: f64,
    #[serde(rename = "pilotlink:evm_percent")]
    pub evm_percent: Option<f64>,
    #[serde(rename = "pilotlink:sinr_db")]
    pub sinr_db: Option<f64>,
    #[serde(rename = "pilotlink:mean_residual_phase_deg")]
    pub mean_residual_phase_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmfRecord {
    pub global: SigmfGlobal,
    pub captures: Vec<SigmfCapture>,
    pub annotations: Vec<SigmfAnnotation>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl SigmfRecord {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Inputs that describe one recorded trial.
#[derive(Debug, Clone, Copy)]
pub struct SigmfSource<'a> {
    pub result: &'a TrialResult,
    pub frame: &'a FrameConfig,
    pub profile: &'a ChannelProfile,
    pub environment: &'a Environment,
    pub sample_rate: f64,
    pub sample_count: u64,
}

/// Builds the metadata document of one trial.
pub fn emit_sigmf(src: &SigmfSource<'_>) -> Result<SigmfRecord> {
    let r = src.result;
    let modulation = src.frame.constellation()?.name();
    let env = if src.environment.environment.is_empty() {
        r.profile.clone()
    } else {
        src.environment.environment.clone()
    };
    Ok(SigmfRecord {
        global: SigmfGlobal {
            datatype: DATATYPE.into(),
            sample_rate: src.sample_rate,
            version: SIGMF_VERSION.into(),
            description: format!(
                "{modulation}, {} pilot repetitions, profile {}, trial {}",
                src.frame.lambda_p, r.profile, r.trial
            ),
            modulation,
            pilot_repetitions: src.frame.lambda_p,
            altitude: src.environment.altitude_m,
            link_distance: src.environment.link_distance_m,
            environment: env,
            channel_profile: r.profile.clone(),
            snr_db: src.profile.snr_db,
            coherence_symbols: src.profile.coherence_symbols,
            seed: r.seed,
            trial: r.trial,
        },
        captures: vec![SigmfCapture { sample_start: 0 }],
        annotations: vec![SigmfAnnotation {
            sample_start: 0,
            sample_count: src.sample_count,
            label: "trial".into(),
            frames_sent: r.frames_sent,
            frames_detected: r.frames_detected,
            crc_pass: r.crc_pass,
            goodput_bps: r.goodput_bps,
            throughput_bps: r.throughput_bps,
            evm_percent: finite(r.evm_percent),
            sinr_db: finite(r.sinr_db),
            mean_residual_phase_deg: finite(r.mean_residual_phase_deg),
        }],
    })
}

/// Parses a metadata document, naming the first missing required field.
pub fn parse_sigmf(text: &str) -> Result<SigmfRecord> {
    let v: Value = serde_json::from_str(text)?;
    let global = v
        .get("global")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::SigmfMissingField("global".into()))?;
    if let Some(k) = REQUIRED_GLOBAL.iter().find(|k| !global.contains_key(**k)) {
        return Err(Error::SigmfMissingField(k.to_string()));
    }
    for k in ["captures", "annotations"] {
        if !v.get(k).is_some_and(Value::is_array) {
            return Err(Error::SigmfMissingField(k.into()));
        }
    }
    let rec: SigmfRecord = serde_json::from_value(v)?;
    if rec.global.datatype != DATATYPE {
        return Err(Error::InvalidConfig(format!(
            "datatype `{}`, expected `{DATATYPE}`",
            rec.global.datatype
        )));
    }
    Ok(rec)
}

/// `<run-id>.sigmf-meta` file name for a trial.
pub fn run_id(r: &TrialResult) -> String {
    format!("{}-m{}-l{}-t{}", r.profile, r.modulation, r.lambda_p, r.trial)
}
