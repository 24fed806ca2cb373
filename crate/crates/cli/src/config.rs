//! Flag parsing helpers and config-file merging.

use std::path::Path;

use clap::Args;
use condensate::trajectory::{Observable, SimConfig};
use serde::Deserialize;

use crate::CliError;

/// Simulation flags shared by `trajectory` and `ensemble`. Every flag
/// overrides the same-named key of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Config file (TOML, or JSON by extension) with SimConfig keys
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Single-atom decay rate (default 1)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Collision rate; a trailing `g` means units of gamma, e.g. `0.5g`
    #[arg(long)]
    pub kappa: Option<String>,
    /// Detector efficiency in [0, 1]
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_detections: Option<usize>,
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Detection counts to record at, e.g. `1..20,50`
    #[arg(long)]
    pub record_k: Option<String>,
    /// Times to record at, e.g. `0.1,0.5` or `0..1:0.25`
    #[arg(long)]
    pub record_t: Option<String>,
    /// Observables: beta, max_overlap, remaining, snapshot
    #[arg(long, value_delimiter = ',')]
    pub obs: Option<Vec<String>>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn read_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        toml::Table::deserialize(v).map_err(|e| config_err(format!("{}: {e}", path.display())))
    } else {
        text.parse::<toml::Table>()
            .map_err(|e| config_err(format!("{}: {e}", path.display())))
    }
}

impl SimArgs {
    /// File values, then flags, then validation.
    pub fn resolve(&self) -> Result<SimConfig, CliError> {
        let mut t = match &self.config {
            Some(p) => read_table(p)?,
            None => toml::Table::new(),
        };
        let mut set = |k: &str, v: toml::Value| {
            t.insert(k.to_string(), v);
        };
        if let Some(v) = self.n1 {
            set("n1", toml::Value::Integer(to_i64(v, "n1")?));
        }
        if let Some(v) = self.n2 {
            set("n2", toml::Value::Integer(to_i64(v, "n2")?));
        }
        if let Some(v) = self.gamma {
            set("gamma", toml::Value::Float(v));
        }
        if let Some(v) = self.eta {
            set("eta", toml::Value::Float(v));
        }
        if let Some(v) = self.seed {
            // seeds above i64::MAX do not fit a TOML integer; go through a string
            set("seed", toml::Value::String(v.to_string()));
        }
        if let Some(v) = self.max_detections {
            set("max_detections", toml::Value::Integer(to_i64(v, "max_detections")?));
        }
        if let Some(v) = self.max_time {
            set("max_time", toml::Value::Float(v));
        }
        if let Some(s) = &self.record_k {
            let ks = parse_counts(s).map_err(|e| config_err(format!("record_k: {e}")))?;
            let arr = ks
                .into_iter()
                .map(|k| to_i64(k, "record_k").map(toml::Value::Integer))
                .collect::<Result<Vec<_>, _>>()?;
            set("record_k", toml::Value::Array(arr));
        }
        if let Some(s) = &self.record_t {
            let ts = parse_reals(s).map_err(|e| config_err(format!("record_t: {e}")))?;
            set("record_t", toml::Value::Array(ts.into_iter().map(toml::Value::Float).collect()));
        }
        if let Some(obs) = &self.obs {
            let names = obs
                .iter()
                .map(|o| {
                    o.parse::<Observable>()
                        .map(|v| toml::Value::String(v.name().to_string()))
                        .map_err(config_err)
                })
                .collect::<Result<Vec<_>, _>>()?;
            set("observables", toml::Value::Array(names));
        }
        // seed may be a string (from the flag) or an integer (from a file)
        if let Some(toml::Value::String(s)) = t.get("seed") {
            let seed: u64 = s
                .parse()
                .map_err(|_| config_err(format!("seed: `{s}` is not an unsigned integer")))?;
            t.remove("seed");
            return finish(t, self.kappa.as_deref(), Some(seed));
        }
        finish(t, self.kappa.as_deref(), None)
    }
}

fn finish(
    mut t: toml::Table,
    kappa_flag: Option<&str>,
    seed: Option<u64>,
) -> Result<SimConfig, CliError> {
    let kappa_text = match (kappa_flag, t.remove("kappa")) {
        (Some(s), _) => Some(s.to_string()),
        (None, Some(toml::Value::String(s))) => Some(s),
        (None, Some(toml::Value::Float(f))) => Some(f.to_string()),
        (None, Some(toml::Value::Integer(i))) => Some(i.to_string()),
        (None, Some(other)) => return Err(config_err(format!("kappa: unexpected value {other}"))),
        (None, None) => None,
    };
    let mut cfg: SimConfig = SimConfig::deserialize(toml::Value::Table(t))
        .map_err(|e| config_err(format!("config: {e}")))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(k) = kappa_text {
        cfg.kappa = parse_rate(&k, cfg.gamma).map_err(|e| config_err(format!("kappa: {e}")))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_i64(v: usize, field: &str) -> Result<i64, CliError> {
    i64::try_from(v).map_err(|_| config_err(format!("{field}: {v} is too large")))
}

/// `2.5`, or `0.5g` meaning half of `gamma`.
pub fn parse_rate(s: &str, gamma: f64) -> Result<f64, String> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix('g').or_else(|| s.strip_suffix('γ')) {
        Some(rest) => (rest.trim(), gamma),
        None => (s, 1.0),
    };
    let v: f64 = if num.is_empty() && scale != 1.0 {
        1.0
    } else {
        num.parse().map_err(|_| format!("`{s}` is not a rate"))?
    };
    Ok(v * scale)
}

/// Comma list of integers and inclusive ranges `a..b` or `a..b:step`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match item.split_once("..") {
            Some((a, rest)) => {
                let (b, step) = match rest.split_once(':') {
                    Some((b, st)) => (b, st.trim().parse::<usize>().map_err(|_| bad(item))?),
                    None => (rest, 1),
                };
                let a: usize = a.trim().parse().map_err(|_| bad(item))?;
                let b: usize = b.trim().parse().map_err(|_| bad(item))?;
                if step == 0 || b < a {
                    return Err(bad(item));
                }
                out.extend((a..=b).step_by(step));
            }
            None => out.push(item.parse().map_err(|_| bad(item))?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Comma list of reals and inclusive ranges `a..b:step` (step 1 if omitted).
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match item.split_once("..") {
            Some((a, rest)) => {
                let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
                let a: f64 = a.trim().parse().map_err(|_| bad(item))?;
                let b: f64 = b.trim().parse().map_err(|_| bad(item))?;
                let step: f64 = step.trim().parse().map_err(|_| bad(item))?;
                if !(step > 0.0) || b < a {
                    return Err(bad(item));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * step));
            }
            None => out.push(item.parse().map_err(|_| bad(item))?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn bad(item: &str) -> String {
    format!("cannot parse `{item}`")
}
