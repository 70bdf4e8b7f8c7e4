use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum StragglerModel {
    None,
    /// Listed servers (1-based) are late by `delay`; `f64::INFINITY` means never.
    FixedSlowSet {
        indices: Vec<usize>,
        delay: f64,
    },
    /// Independent exponential delays; each trial reads its own stream.
    Exponential {
        mean: f64,
        seed: u64,
    },
    /// One delay per server.
    Delays(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StragglerConfig {
    pub model: StragglerModel,
}

impl Default for StragglerConfig {
    fn default() -> Self {
        StragglerConfig::none()
    }
}

/// A nonnegative tick count, or `inf` for never.
pub fn parse_delay(s: &str) -> Result<f64> {
    let s = s.trim();
    let d = match s {
        "inf" | "infinity" | "never" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|_| Error::Parse(format!("bad delay `{s}`")))?,
    };
    if d.is_nan() || d < 0.0 {
        return Err(Error::Parse(format!("delay `{s}` must be nonnegative")));
    }
    Ok(d)
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(item)
        .collect()
}

pub(crate) fn parse_indices(s: &str) -> Result<Vec<usize>> {
    parse_list(s, |t| {
        t.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad server index `{t}`")))
    })
}

impl StragglerConfig {
    pub fn new(model: StragglerModel) -> Self {
        StragglerConfig { model }
    }

    pub fn none() -> Self {
        StragglerConfig::new(StragglerModel::None)
    }

    pub fn slow_set(indices: Vec<usize>, delay: f64) -> Self {
        StragglerConfig::new(StragglerModel::FixedSlowSet { indices, delay })
    }

    /// Parses `key = value` lines. `#` starts a comment.
    ///
    /// ```text
    /// model = slow        # none | slow | exponential | delays
    /// slow = 1, 4
    /// delay = inf         # for `slow`, default inf
    /// mean = 2.5          # for `exponential`
    /// seed = 7            # for `exponential`, default 0
    /// delays = 0, 1.5, inf
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!(
                    "line {}: duplicate key `{}`",
                    lineno + 1,
                    k.trim()
                )));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let allowed: &[&str] = match get("model").unwrap_or("none") {
            "none" => &["model"],
            "slow" => &["model", "slow", "delay"],
            "exponential" => &["model", "mean", "seed"],
            "delays" => &["model", "delays"],
            other => return Err(Error::Parse(format!("unknown straggler model `{other}`"))),
        };
        if let Some(k) = kv.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("key `{k}` does not apply to this model")));
        }
        let missing = |k: &str| Error::Parse(format!("missing key `{k}`"));
        let model = match get("model").unwrap_or("none") {
            "slow" => StragglerModel::FixedSlowSet {
                indices: parse_indices(get("slow").ok_or_else(|| missing("slow"))?)?,
                delay: get("delay").map(parse_delay).transpose()?.unwrap_or(f64::INFINITY),
            },
            "exponential" => {
                let mean = get("mean").ok_or_else(|| missing("mean"))?;
                let mean: f64 = mean.parse().map_err(|_| Error::Parse(format!("bad mean `{mean}`")))?;
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(Error::Parse(format!("mean {mean} must be positive")));
                }
                let seed = get("seed")
                    .map(|s| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad seed `{s}`"))))
                    .transpose()?
                    .unwrap_or(0);
                StragglerModel::Exponential { mean, seed }
            }
            "delays" => StragglerModel::Delays(parse_list(
                get("delays").ok_or_else(|| missing("delays"))?,
                parse_delay,
            )?),
            _ => StragglerModel::None,
        };
        Ok(StragglerConfig { model })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        StragglerConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Per-server delays for trial number `trial`.
    pub fn draw(&self, n: usize, trial: u64) -> Result<Vec<f64>> {
        match &self.model {
            StragglerModel::None => Ok(vec![0.0; n]),
            StragglerModel::FixedSlowSet { indices, delay } => {
                if delay.is_nan() || *delay < 0.0 {
                    return Err(Error::InvalidParams(format!("delay {delay} must be nonnegative")));
                }
                let mut d = vec![0.0; n];
                for &i in indices {
                    if i == 0 || i > n {
                        return Err(Error::InvalidParams(format!("slow server {i} is outside [1, {n}]")));
                    }
                    d[i - 1] = *delay;
                }
                Ok(d)
            }
            StragglerModel::Exponential { mean, seed } => {
                let exp =
                    Exp::new(1.0 / mean).map_err(|_| Error::InvalidParams(format!("mean {mean} must be positive")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(trial);
                Ok((0..n).map(|_| exp.sample(&mut rng)).collect())
            }
            StragglerModel::Delays(d) => {
                if d.len() != n {
                    return Err(Error::InvalidParams(format!(
                        "{} delays given for N={n} servers",
                        d.len()
                    )));
                }
                if d.iter().any(|x| x.is_nan() || *x < 0.0) {
                    return Err(Error::InvalidParams("delays must be nonnegative".into()));
                }
                Ok(d.clone())
            }
        }
    }
}
