use rayon::prelude::*;

use super::{run_trial, SimSettings, TrialOutput, TrialSpec};
use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::framing::{parse_modulation, FrameConfig, LAMBDA_CHOICES, MODULATION_CHOICES};
use crate::kv::KvFile;
use crate::seed;

/// Where a dataset was taken; carried into SigMF metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Environment {
    /// Free-text scenario label; the profile name when empty.
    pub environment: String,
    pub altitude_m: Option<f64>,
    pub link_distance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedProfile {
    pub name: String,
    pub profile: ChannelProfile,
}

/// Experiment grid: `λ_p × modulation × channel profile × trial`.
///
/// Config file keys:
///
/// ```text
/// lambda_list = 1, 2, 4, 6, 8
/// modulations = 4, 8, 16qam, 64
/// frames_per_trial = 200
/// trials_per_cell = 3
/// master_seed = 42
/// profiles = g2g, a2a
/// profile.g2g.snr_db = 25        # any channel profile key
/// environment = campus           # optional
/// altitude_m = null              # optional, null or metres
/// link_distance_m = 60           # optional
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambda_list: Vec<usize>,
    pub modulations: Vec<u32>,
    pub profiles: Vec<NamedProfile>,
    pub frames_per_trial: usize,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    pub environment: Environment,
}

/// One grid point and trial, with the seed it runs under.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTask {
    pub cell: usize,
    pub profile_index: usize,
    pub spec: TrialSpec,
}

fn parse_list<T>(kv: &KvFile, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>> {
    let Some(e) = kv.get(key) else {
        return Ok(None);
    };
    e.value
        .split(',')
        .map(|s| parse(s.trim()).ok_or_else(|| kv.error_at(key, format!("bad entry `{}` in `{key}`", s.trim()))))
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

fn parse_opt_null(kv: &KvFile, key: &str) -> Result<Option<f64>> {
    match kv.get(key) {
        None => Ok(None),
        Some(e) if e.value.eq_ignore_ascii_case("null") || e.value.is_empty() => Ok(None),
        Some(_) => kv.parse_opt(key),
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.lambda_list.is_empty() || self.modulations.is_empty() || self.profiles.is_empty() {
            return bad("lambda_list, modulations and profiles must be nonempty".into());
        }
        if let Some(l) = self.lambda_list.iter().find(|l| !LAMBDA_CHOICES.contains(l)) {
            return bad(format!("pilot repetitions {l} not in {LAMBDA_CHOICES:?}"));
        }
        if let Some(m) = self.modulations.iter().find(|m| !MODULATION_CHOICES.contains(m)) {
            return bad(format!("modulation {m} not in {MODULATION_CHOICES:?}"));
        }
        if self.frames_per_trial == 0 || self.trials_per_cell == 0 {
            return bad("frames_per_trial and trials_per_cell must be at least 1".into());
        }
        for (i, p) in self.profiles.iter().enumerate() {
            if p.name.is_empty() || p.name.contains(',') {
                return bad(format!("bad profile name `{}`", p.name));
            }
            if self.profiles[..i].iter().any(|q| q.name == p.name) {
                return bad(format!("duplicate profile `{}`", p.name));
            }
        }
        Ok(())
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        const TOP: [&str; 9] = [
            "lambda_list",
            "modulations",
            "frames_per_trial",
            "trials_per_cell",
            "master_seed",
            "profiles",
            "environment",
            "altitude_m",
            "link_distance_m",
        ];
        if let Some(e) = kv
            .entries
            .iter()
            .find(|e| !TOP.contains(&e.key.as_str()) && !e.key.starts_with("profile."))
        {
            return Err(kv.error_at(&e.key, format!("unknown key `{}`", e.key)));
        }
        let names: Vec<String> = parse_list(kv, "profiles", |s| (!s.is_empty()).then(|| s.to_string()))?
            .ok_or_else(|| kv.error_at("profiles", "missing `profiles`"))?;
        for e in kv.entries.iter().filter(|e| e.key.starts_with("profile.")) {
            let rest = &e.key["profile.".len()..];
            if !names.iter().any(|n| rest.starts_with(&format!("{n}."))) {
                return Err(kv.error_at(&e.key, format!("`{}` names no listed profile", e.key)));
            }
        }
        let profiles = names
            .iter()
            .map(|n| {
                Ok(NamedProfile {
                    name: n.clone(),
                    profile: ChannelProfile::from_kv(&kv.with_prefix(&format!("profile.{n}.")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = Self {
            lambda_list: parse_list(kv, "lambda_list", |s| s.parse().ok())?.unwrap_or(LAMBDA_CHOICES.to_vec()),
            modulations: parse_list(kv, "modulations", |s| parse_modulation(s).ok())?
                .unwrap_or(MODULATION_CHOICES.to_vec()),
            profiles,
            frames_per_trial: kv.parse_opt("frames_per_trial")?.unwrap_or(100),
            trials_per_cell: kv.parse_opt("trials_per_cell")?.unwrap_or(3),
            master_seed: kv.parse_opt("master_seed")?.unwrap_or(0),
            environment: Environment {
                environment: kv.get("environment").map(|e| e.value.clone()).unwrap_or_default(),
                altitude_m: parse_opt_null(kv, "altitude_m")?,
                link_distance_m: parse_opt_null(kv, "link_distance_m")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_kv_str(text: &str, path: &str) -> Result<Self> {
        Self::from_kv(&KvFile::parse(text, path)?)
    }

    /// Tasks in grid order: profile, then modulation, then `λ_p`, then trial.
    /// The cell index counts `(profile, modulation, λ_p)` triples in that order.
    pub fn tasks(&self) -> Result<Vec<SweepTask>> {
        self.validate()?;
        let mut out = Vec::new();
        let mut cell = 0usize;
        for (pi, p) in self.profiles.iter().enumerate() {
            for &m in &self.modulations {
                for &l in &self.lambda_list {
                    let frame = FrameConfig::new(l, m)?;
                    for t in 0..self.trials_per_cell {
                        out.push(SweepTask {
                            cell,
                            profile_index: pi,
                            spec: TrialSpec {
                                frame,
                                profile_name: p.name.clone(),
                                profile: p.profile.clone(),
                                frames: self.frames_per_trial,
                                trial: t,
                                seed: seed::derive(self.master_seed, &[cell as u64, t as u64]),
                            },
                        });
                    }
                    cell += 1;
                }
            }
        }
        Ok(out)
    }
}

/// Runs every task on a pool of `workers` threads (0 picks the machine's
/// parallelism). Output order is task order whatever the scheduling.
pub fn run_sweep(spec: &SweepSpec, settings: &SimSettings, workers: usize) -> Result<Vec<(SweepTask, TrialOutput)>> {
    let tasks = spec.tasks()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let outputs: Vec<Result<TrialOutput>> =
        pool.install(|| tasks.par_iter().map(|t| run_trial(&t.spec, settings)).collect());
    tasks.into_iter().zip(outputs).map(|(t, o)| o.map(|o| (t, o))).collect()
}
