//! Flat `key = value` run configurations.
//!
//! One entry per line, `#` starts a comment. Channels use the text forms of
//! [`ChannelSpec`], e.g. `dephasing:0.0025` or `rotation:z:0.5236`.

use std::collections::BTreeMap;
use std::path::Path;

use concatqec::mc::ScanConfig;
use concatqec::{bit_flip_code, five_qubit_code, CCPConfig, ChannelSpec, CodeSpec, NoiseMode, NoiseModel, PauliFamily};

use crate::CliError;

#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::usage(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(CliError::usage(format!("line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn get<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            Some((line, v)) => v
                .parse()
                .map_err(|e| CliError::usage(format!("line {line}: `{key}`: {e}"))),
            None => default.ok_or_else(|| CliError::usage(format!("missing required key `{key}`"))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.entries.into_iter().next() {
            Some((key, (line, _))) => Err(CliError::usage(format!("line {line}: unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

fn code_by_name(name: &str) -> Result<CodeSpec, CliError> {
    match name {
        "five_qubit" => Ok(five_qubit_code()),
        "bit_flip" => Ok(bit_flip_code()),
        other => Err(CliError::usage(format!("unknown code `{other}` (expected five_qubit or bit_flip)"))),
    }
}

fn noise_mode(name: &str) -> Result<NoiseMode, CliError> {
    match name {
        "ideal" => Ok(NoiseMode::Ideal),
        "lumped" => Ok(NoiseMode::Lumped),
        "gate_level" => Ok(NoiseMode::GateLevel),
        other => Err(CliError::usage(format!("unknown noise `{other}` (expected ideal, lumped or gate_level)"))),
    }
}

/// Keys: `code`, `r`, `levels`, `channel`, `noise`, `op_error`,
/// `gate_count_recovery`, `extra_wait`, `allow_classical_code`.
pub fn simulate_config(mut kv: KeyValues) -> Result<CCPConfig, CliError> {
    let code = code_by_name(&kv.get::<String>("code", Some("five_qubit".into()))?)?;
    let r = kv.get("r", Some(2usize))?;
    let levels = kv.get::<usize>("levels", None)?;
    let channel = kv.get::<ChannelSpec>("channel", None)?;
    let mode = noise_mode(&kv.get::<String>("noise", Some("ideal".into()))?)?;
    let op_error = kv.get("op_error", Some(ChannelSpec::identity()))?;
    let gates = kv.get("gate_count_recovery", Some(concatqec::ccp::MAX_RECOVERY_GATES))?;
    let extra_wait = kv.get("extra_wait", Some(ChannelSpec::identity()))?;
    let allow = kv.get("allow_classical_code", Some(false))?;
    kv.finish()?;

    let mut cfg = CCPConfig::new(code, r, levels, channel);
    cfg.noise = NoiseModel::new(mode, op_error, gates)?;
    cfg.extra_wait = (!extra_wait.is_identity()).then_some(extra_wait);
    cfg.allow_classical_code = allow;
    cfg.validate()?;
    Ok(cfg)
}

/// Grid forms: `0.01, 0.02, 0.05` or `log:0.01:0.3:8` (8 log-spaced points).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::usage(format!("grid `{text}`: {m}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
    let grid = if let Some(rest) = text.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad("expected log:<low>:<high>:<points>".into()));
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        let n: usize = n.trim().parse().map_err(|_| bad(format!("`{n}` is not a point count")))?;
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(bad("need 0 < low < high and at least 2 points".into()));
        }
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty".into()));
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(bad("points must lie in [0, 1]".into()));
    }
    Ok(grid)
}

/// Keys: `code`, `family`, `grid`, `gate_error_prob`, `r`, `levels`,
/// `trials`, `seed`.
pub fn mc_config(mut kv: KeyValues) -> Result<(CodeSpec, ScanConfig), CliError> {
    let code = code_by_name(&kv.get::<String>("code", Some("five_qubit".into()))?)?;
    let family = PauliFamily::parse(&kv.get::<String>("family", Some("depolarizing".into()))?)?;
    let grid = parse_grid(&kv.get::<String>("grid", None)?)?;
    let cfg = ScanConfig {
        family,
        grid,
        gate_error_prob: kv.get("gate_error_prob", Some(0.0))?,
        r: kv.get("r", Some(2))?,
        levels: kv.get("levels", Some(2))?,
        trials: kv.get("trials", Some(100_000))?,
        seed: kv.get("seed", Some(1))?,
    };
    kv.finish()?;
    Ok((code, cfg))
}
