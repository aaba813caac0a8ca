//! Layered run configuration: defaults, then the `--config` file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    /// Configuration or runtime error, exit code 2.
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<msqg_wn::Error> for CliError {
    fn from(e: msqg_wn::Error) -> Self {
        CliError::invalid(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parameters of one subcommand.
pub trait Params: Serialize + DeserializeOwned + Default {
    /// Stochastic commands refuse to run on a default seed.
    const STOCHASTIC: bool;

    fn validate(&self) -> CliResult<()>;

    /// Whether these particular parameters draw random numbers.
    fn needs_seed(&self) -> bool {
        Self::STOCHASTIC
    }
}

/// The file read by `--config` and written next to every output.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

pub struct Resolved<P> {
    pub command: String,
    pub out: PathBuf,
    pub params: P,
}

impl<P: Params> Resolved<P> {
    /// The echo written next to the outputs; feeding it back through `--config` reproduces
    /// the run.
    pub fn echo(&self) -> CliResult<Vec<u8>> {
        let params = match serde_json::to_value(&self.params) {
            Ok(Value::Object(m)) => m,
            _ => return Err(CliError::invalid("parameters do not serialize to an object")),
        };
        let cfg = RunConfig {
            schema_version: Some(SCHEMA_VERSION),
            command: Some(self.command.clone()),
            out: Some(self.out.clone()),
            params,
        };
        let mut bytes = serde_json::to_vec_pretty(&cfg).map_err(|e| CliError::invalid(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

fn object(v: Value, what: &str) -> CliResult<Map<String, Value>> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::invalid(format!("{what} is not a JSON object"))),
    }
}

pub fn read_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("invalid config {}: {e}", path.display())))
}

/// Merge defaults, the config file and the flags, in increasing precedence, and validate.
///
/// `flags` serializes to an object whose `null` entries are flags that were not given.
pub fn resolve<P: Params>(
    command: &str,
    config: Option<&Path>,
    out: Option<PathBuf>,
    flags: &impl Serialize,
) -> CliResult<Resolved<P>> {
    let mut merged = object(
        serde_json::to_value(P::default()).map_err(|e| CliError::invalid(e.to_string()))?,
        "defaults",
    )?;
    let mut seed_given = false;
    let mut out_path = None;
    if let Some(path) = config {
        let cfg = read_config(path)?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(CliError::invalid(format!(
                    "config schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                )));
            }
        }
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(CliError::invalid(format!(
                    "config is for `{c}`, not `{command}`"
                )));
            }
        }
        out_path = cfg.out;
        for (k, v) in cfg.params {
            if !merged.contains_key(&k) {
                return Err(CliError::invalid(format!("unknown parameter `{k}` for `{command}`")));
            }
            seed_given |= k == "seed";
            merged.insert(k, v);
        }
    }
    let flags = object(
        serde_json::to_value(flags).map_err(|e| CliError::invalid(e.to_string()))?,
        "flags",
    )?;
    for (k, v) in flags {
        if v.is_null() {
            continue;
        }
        debug_assert!(merged.contains_key(&k), "flag {k} has no parameter");
        seed_given |= k == "seed";
        merged.insert(k, v);
    }
    let params: P = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::invalid(format!("invalid parameters for `{command}`: {e}")))?;
    if params.needs_seed() && !seed_given {
        return Err(CliError::invalid(format!(
            "`{command}` is stochastic: give a seed with --seed or in the config"
        )));
    }
    params.validate()?;
    let out = out
        .or(out_path)
        .ok_or_else(|| CliError::invalid(format!("`{command}` needs an output path (--out)")))?;
    Ok(Resolved {
        command: command.to_string(),
        out,
        params,
    })
}

pub fn check_epsilon(v: f64) -> CliResult<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::invalid(format!(
            "epsilon = {v} is outside the valid range (0, 1)"
        )))
    }
}

pub fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(format!(
            "{name} = {v} is outside the valid range (0, inf)"
        )))
    }
}

pub fn check_at_least(name: &str, v: usize, min: usize) -> CliResult<()> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::invalid(format!("{name} = {v} must be at least {min}")))
    }
}

pub fn check_increasing(name: &str, v: &[f64]) -> CliResult<()> {
    if v.is_empty() || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::invalid(format!(
            "{name} = {v:?} must be a non-empty increasing list"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Default, Serialize, Deserialize)]
    struct P {
        epsilon: f64,
        seed: u64,
        n: usize,
    }

    impl Params for P {
        const STOCHASTIC: bool = true;
        fn validate(&self) -> CliResult<()> {
            check_epsilon(self.epsilon)
        }
    }

    #[derive(Serialize)]
    struct Flags {
        epsilon: Option<f64>,
        seed: Option<u64>,
        n: Option<usize>,
    }

    #[test]
    fn flags_override_config_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"params": {"epsilon": 0.25, "n": 3, "seed": 1}}"#).unwrap();
        let flags = Flags { epsilon: Some(0.5), seed: None, n: None };
        let r: Resolved<P> = resolve("x", Some(&cfg), Some("o.csv".into()), &flags).unwrap();
        assert_eq!((r.params.epsilon, r.params.n, r.params.seed), (0.5, 3, 1));
    }

    #[test]
    fn validation_names_the_field() {
        let flags = Flags { epsilon: Some(1.2), seed: Some(1), n: None };
        let e = resolve::<P>("x", None, Some("o.csv".into()), &flags).err().unwrap();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("epsilon") && e.message.contains("(0, 1)"));
    }

    #[test]
    fn seed_is_mandatory() {
        let flags = Flags { epsilon: Some(0.5), seed: None, n: None };
        assert!(resolve::<P>("x", None, Some("o.csv".into()), &flags).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"params": {"epsilonn": 0.25}}"#).unwrap();
        let flags = Flags { epsilon: None, seed: Some(1), n: None };
        assert!(resolve::<P>("x", Some(&cfg), Some("o.csv".into()), &flags).is_err());
    }
}
