//! Named parameters with layered sources: command-line flags override
//! environment variables, which override a parameter file, which overrides
//! the defaults.
//!
//! A parameter `a.b` is read from the environment variable `PRESOLVE_A_B`;
//! the `presolve.` prefix is not repeated, so `presolve.threads` is
//! `PRESOLVE_THREADS`.

use std::fmt::Write as _;
use std::str::FromStr;

use super::IoError;
use crate::numerics::NumericMode;
use crate::presolvers::presolver_names;
use crate::scheduler::PresolveOptions;

pub const THREADS: &str = "presolve.threads";
pub const ABORTFAC: &str = "presolve.abortfac";
pub const APPLY_IMMEDIATELY: &str = "presolve.apply_results_immediately_if_run_sequentially";
pub const RANDOM_SEED: &str = "presolve.randomseed";
pub const MAX_ROUNDS: &str = "presolve.maxrounds";
pub const VERBOSITY: &str = "message.verbosity";
pub const MODE: &str = "numerics.mode";
pub const EPSILON: &str = "numerics.epsilon";
pub const FEASTOL: &str = "numerics.feastol";
pub const HUGEVAL: &str = "numerics.hugeval";
pub const LEGACY_INTEGER_BOUNDS: &str = "mps.legacy_integer_bounds";

/// Fixed parameters and their descriptions; every presolver `p` also has
/// `p.enabled`.
pub const PARAMETERS: &[(&str, &str)] = &[
    (THREADS, "worker threads, 0 for one per core"),
    (ABORTFAC, "fraction of the problem that must change to restart the fast presolvers"),
    (APPLY_IMMEDIATELY, "with one thread, apply each presolver's reductions before the next one runs"),
    (RANDOM_SEED, "seed recorded with the run"),
    (MAX_ROUNDS, "upper limit on presolve rounds"),
    (VERBOSITY, "0 silent, 1 summary, 2 rounds, 3 presolver calls, 4 every transaction"),
    (MODE, "arithmetic: float or rational"),
    (EPSILON, "zero tolerance in float mode"),
    (FEASTOL, "feasibility tolerance in float mode"),
    (HUGEVAL, "bounds beyond this magnitude are not used to derive others"),
    (LEGACY_INTEGER_BOUNDS, "integral MPS columns without bounds are binary"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub options: PresolveOptions,
    pub mode: NumericMode,
    pub legacy_integer_bounds: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            options: PresolveOptions::default(),
            mode: NumericMode::Float64,
            legacy_integer_bounds: false,
        }
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        other => Err(format!("expected a boolean, found `{other}`")),
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value `{value}`"))
}

fn positive(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, found `{value}`"))
    }
}

/// Environment variable holding parameter `key`.
pub fn env_name(key: &str) -> String {
    let key = key.strip_prefix("presolve.").unwrap_or(key);
    format!("PRESOLVE_{}", key.to_ascii_uppercase().replace('.', "_"))
}

/// All parameter names, fixed ones first.
pub fn parameter_names() -> Vec<String> {
    PARAMETERS
        .iter()
        .map(|(k, _)| k.to_string())
        .chain(presolver_names().map(|n| format!("{n}.enabled")))
        .collect()
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let o = &mut self.options;
        match key {
            THREADS => o.threads = parse(value)?,
            ABORTFAC => o.abortfac = positive(value)?,
            APPLY_IMMEDIATELY => o.apply_immediately = parse_bool(value)?,
            RANDOM_SEED => o.random_seed = parse(value)?,
            MAX_ROUNDS => o.max_rounds = parse(value)?,
            VERBOSITY => {
                let v: u8 = parse(value)?;
                if v > 4 {
                    return Err(format!("verbosity must be between 0 and 4, found {v}"));
                }
                o.verbosity = v;
            }
            MODE => self.mode = value.parse()?,
            EPSILON => o.epsilon = positive(value)?,
            FEASTOL => o.feastol = positive(value)?,
            HUGEVAL => o.hugeval = positive(value)?,
            LEGACY_INTEGER_BOUNDS => self.legacy_integer_bounds = parse_bool(value)?,
            _ => {
                let name = key
                    .strip_suffix(".enabled")
                    .and_then(|n| presolver_names().find(|p| *p == n))
                    .ok_or_else(|| format!("unknown parameter `{key}`"))?;
                if parse_bool(value)? {
                    o.disabled.remove(name);
                } else {
                    o.disabled.insert(name.to_string());
                }
            }
        }
        Ok(())
    }

    /// Current value of parameter `key` in the form [`Settings::set`] reads.
    pub fn get(&self, key: &str) -> Option<String> {
        let o = &self.options;
        Some(match key {
            THREADS => o.threads.to_string(),
            ABORTFAC => o.abortfac.to_string(),
            APPLY_IMMEDIATELY => o.apply_immediately.to_string(),
            RANDOM_SEED => o.random_seed.to_string(),
            MAX_ROUNDS => o.max_rounds.to_string(),
            VERBOSITY => o.verbosity.to_string(),
            MODE => self.mode.name().to_string(),
            EPSILON => o.epsilon.to_string(),
            FEASTOL => o.feastol.to_string(),
            HUGEVAL => o.hugeval.to_string(),
            LEGACY_INTEGER_BOUNDS => self.legacy_integer_bounds.to_string(),
            _ => {
                let name = key.strip_suffix(".enabled")?;
                presolver_names().find(|p| *p == name)?;
                o.is_enabled(name).to_string()
            }
        })
    }

    /// Every parameter as a file [`Settings::parse_file`] accepts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in parameter_names() {
            let _ = writeln!(out, "{key} = {}", self.get(&key).expect("known parameter"));
        }
        out
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, IoError> {
        let mut out = Vec::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| IoError::parse(number + 1, "expected key = value"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    /// Parameters found among environment variables.
    pub fn from_env(vars: impl IntoIterator<Item = (String, String)>) -> Vec<(String, String)> {
        let vars: Vec<(String, String)> = vars.into_iter().collect();
        parameter_names()
            .into_iter()
            .filter_map(|key| {
                let name = env_name(&key);
                vars.iter().find(|(k, _)| *k == name).map(|(_, v)| (key, v.clone()))
            })
            .collect()
    }

    /// Applies the layers from lowest to highest precedence.
    pub fn resolve(
        file: &[(String, String)],
        env: &[(String, String)],
        flags: &[(String, String)],
    ) -> Result<Settings, String> {
        let mut s = Settings::default();
        for (source, layer) in [("parameter file", file), ("environment", env), ("command line", flags)] {
            for (k, v) in layer {
                s.set(k, v).map_err(|e| format!("{source}: {k}: {e}"))?;
            }
        }
        Ok(s)
    }
}
