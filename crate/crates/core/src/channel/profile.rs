use std::fmt;

use crate::error::{Error, Result};
use crate::kv::KvFile;

/// Per-epoch block fading model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    None,
    BlockRayleigh,
    /// Rician with line-of-sight to scattered power ratio `k` (linear).
    BlockRician {
        k: f64,
    },
}

impl fmt::Display for Fading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fading::None => f.write_str("none"),
            Fading::BlockRayleigh => f.write_str("block-rayleigh"),
            Fading::BlockRician { k } => write!(f, "block-rician({k})"),
        }
    }
}

impl Fading {
    /// Parses `none`, `block-rayleigh` or `block-rician(K)`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "none" => return Ok(Fading::None),
            "block-rayleigh" | "rayleigh" => return Ok(Fading::BlockRayleigh),
            _ => {}
        }
        let inner = t
            .strip_prefix("block-rician(")
            .or_else(|| t.strip_prefix("rician("))
            .and_then(|r| r.strip_suffix(')'));
        match inner.map(|v| v.trim().parse::<f64>()) {
            Some(Ok(k)) if k >= 0.0 && k.is_finite() => Ok(Fading::BlockRician { k }),
            _ => Err(Error::InvalidConfig(format!(
                "bad fading `{s}` (expected none, block-rayleigh or block-rician(K))"
            ))),
        }
    }
}

fn fmt_opt<T: fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "inf".into(),
    }
}

fn parse_inf_or<T: std::str::FromStr>(s: &str) -> Option<Option<T>> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
        Some(None)
    } else {
        t.parse().ok().map(Some)
    }
}

const KEYS: [&str; 10] = [
    "delta_f_hz",
    "drift_hz_per_s",
    "drift_walk_hz",
    "theta_in_rad",
    "snr_db",
    "coherence_symbols",
    "fading",
    "delay_spread_s",
    "seed",
    "description",
];

/// Impairments applied between transmitter and receiver.
///
/// The carrier rotation is `e^{−j(2π∫f(τ)dτ + θ_in)}` with
/// `f(t) = Δf + drift_rate·t` plus a Gaussian random-walk step of standard
/// deviation `drift_walk_hz` at every coherence-epoch boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    pub delta_f: f64,
    pub drift_rate: f64,
    pub drift_walk_hz: f64,
    pub theta_in: f64,
    /// Per-sample SNR in dB over the occupied signal; `None` is noiseless.
    pub snr_db: Option<f64>,
    /// Coherence epoch length in symbols; `None` is a single epoch.
    pub coherence_symbols: Option<usize>,
    pub fading: Fading,
    pub delay_spread: f64,
    pub seed: u64,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ChannelProfile {
    pub fn ideal() -> Self {
        Self {
            delta_f: 0.0,
            drift_rate: 0.0,
            drift_walk_hz: 0.0,
            theta_in: 0.0,
            snr_db: None,
            coherence_symbols: None,
            fading: Fading::None,
            delay_spread: 0.0,
            seed: 0,
        }
    }

    /// Checks the profile against the sampling period it will be used at.
    pub fn validate(&self, sample_period: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        for (name, v) in [
            ("delta_f_hz", self.delta_f),
            ("drift_hz_per_s", self.drift_rate),
            ("theta_in_rad", self.theta_in),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.drift_walk_hz >= 0.0 && self.drift_walk_hz.is_finite()) {
            return bad(format!(
                "drift_walk_hz must be non-negative, got {}",
                self.drift_walk_hz
            ));
        }
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                return bad("snr_db must be finite or `inf`".into());
            }
        }
        if self.coherence_symbols == Some(0) {
            return bad("coherence_symbols must be at least 1".into());
        }
        if !(self.delay_spread >= 0.0) {
            return bad(format!("delay spread must be non-negative, got {}", self.delay_spread));
        }
        if self.delay_spread >= sample_period / 10.0 {
            return bad(format!(
                "delay spread {:e} s breaks the single-tap model (must be below T_sp/10 = {:e} s)",
                self.delay_spread,
                sample_period / 10.0
            ));
        }
        Ok(())
    }

    pub fn to_kv_string(&self) -> String {
        self.to_kv_lines("")
    }

    /// `key = value` lines with every key prefixed by `prefix`.
    pub fn to_kv_lines(&self, prefix: &str) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{prefix}{k} = {v}\n"));
        put("delta_f_hz", self.delta_f.to_string());
        put("drift_hz_per_s", self.drift_rate.to_string());
        put("drift_walk_hz", self.drift_walk_hz.to_string());
        put("theta_in_rad", self.theta_in.to_string());
        put("snr_db", fmt_opt(&self.snr_db));
        put("coherence_symbols", fmt_opt(&self.coherence_symbols));
        put("fading", self.fading.to_string());
        put("delay_spread_s", self.delay_spread.to_string());
        put("seed", self.seed.to_string());
        s
    }

    /// Reads profile keys, defaulting absent ones to the ideal channel.
    /// A `description` key is accepted and ignored.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        kv.reject_unknown(&KEYS)?;
        let d = Self::ideal();
        let snr_db = match kv.get("snr_db") {
            None => d.snr_db,
            Some(e) => parse_inf_or::<f64>(&e.value)
                .ok_or_else(|| kv.error_at("snr_db", format!("bad snr_db `{}`", e.value)))?,
        };
        let coherence_symbols = match kv.get("coherence_symbols") {
            None => d.coherence_symbols,
            Some(e) => parse_inf_or::<usize>(&e.value)
                .ok_or_else(|| kv.error_at("coherence_symbols", format!("bad coherence_symbols `{}`", e.value)))?,
        };
        let fading = match kv.get("fading") {
            None => d.fading,
            Some(e) => Fading::parse(&e.value).map_err(|err| kv.error_at("fading", err.to_string()))?,
        };
        Ok(Self {
            delta_f: kv.parse_opt("delta_f_hz")?.unwrap_or(d.delta_f),
            drift_rate: kv.parse_opt("drift_hz_per_s")?.unwrap_or(d.drift_rate),
            drift_walk_hz: kv.parse_opt("drift_walk_hz")?.unwrap_or(d.drift_walk_hz),
            theta_in: kv.parse_opt("theta_in_rad")?.unwrap_or(d.theta_in),
            snr_db,
            coherence_symbols,
            fading,
            delay_spread: kv.parse_opt("delay_spread_s")?.unwrap_or(d.delay_spread),
            seed: kv.parse_opt("seed")?.unwrap_or(d.seed),
        })
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        Self::from_kv(&KvFile::parse(text, "<channel profile>")?)
    }
}
