//! `key = value` run configuration with optional `[section]` headers.
//!
//! ```text
//! scenario = explosion
//! N = 200
//! k = 2
//! rk = 3
//!
//! [limiter]
//! beta = 1.75
//! ```
//!
//! Keys may also be written as `section.key` outside any section. Scenario parameters
//! (`n`, `t_end`, `amplitude`, ...) are accepted at top level or under `[scenario]`.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::operator::Scheme;
use crate::problems::{make_scenario, Scenario, OVERRIDE_KEYS};
use crate::stepper::TimeScheme;

#[derive(Debug, Clone, PartialEq)]
pub struct LimiterSettings {
    /// `None` keeps the scenario's default.
    pub enabled: Option<bool>,
    pub beta: f64,
    pub m: f64,
}

impl Default for LimiterSettings {
    fn default() -> Self {
        LimiterSettings {
            enabled: None,
            beta: 1.75,
            m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    /// Scenario overrides in file order.
    pub overrides: Vec<(String, String)>,
    pub scheme: Scheme,
    pub limiter: LimiterSettings,
    /// Worker threads for cell-parallel assembly; 0 lets the pool decide.
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
    /// Write a ledger row every this many steps (the final step is always written).
    pub ledger_every: usize,
    pub max_steps: Option<usize>,
    /// Mesh of the self-reference used by convergence sweeps without an exact solution.
    pub reference_n: Option<usize>,
}

impl RunConfig {
    pub fn new(scenario: &str) -> Self {
        RunConfig {
            scenario: scenario.to_string(),
            overrides: Vec::new(),
            scheme: Scheme::WellBalanced,
            limiter: LimiterSettings::default(),
            threads: 0,
            output_dir: None,
            ledger_every: 1,
            max_steps: None,
            reference_n: None,
        }
    }

    /// Adds or replaces a scenario override.
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let key = key.to_ascii_lowercase();
        self.overrides.retain(|(k, _)| *k != key);
        self.overrides.push((key, value.to_string()));
        self
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let ov: Vec<(&str, &str)> = self
            .overrides
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        make_scenario(&self.scenario, &ov)
    }

    pub fn time_scheme(&self) -> Result<TimeScheme> {
        TimeScheme::from_order(self.scenario()?.rk_order)
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(s) = self.scenario() {
            if s.rk_order < s.k + 1 {
                out.push(format!(
                    "RK order {} is below k + 1 = {}; the time error will dominate",
                    s.rk_order,
                    s.k + 1
                ));
            }
        }
        out
    }
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

const RUN_KEYS: [&str; 9] = [
    "scenario",
    "scheme",
    "threads",
    "precision",
    "output.dir",
    "output.ledger_every",
    "max_steps",
    "reference_n",
    "limiter.enabled",
];

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str, what: &str) -> Result<T> {
    v.parse()
        .map_err(|_| cfg_err(line, format!("{key} expects {what}, got {v:?}")))
}

/// Parses the configuration text. A scenario name is required.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut section = String::new();
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line_no, format!("malformed section header {line:?}")))?;
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(line_no, format!("expected key = value, got {line:?}")))?;
        let k = k.trim().to_ascii_lowercase();
        if k.is_empty() {
            return Err(cfg_err(line_no, "empty key"));
        }
        let key = match section.as_str() {
            "" | "run" | "scenario" => k,
            s => format!("{s}.{k}"),
        };
        let key = key
            .strip_prefix("scenario.")
            .map(str::to_string)
            .unwrap_or(key);
        entries.push((line_no, key, v.trim().to_string()));
    }

    let scenario = entries
        .iter()
        .rev()
        .find(|(_, k, _)| k == "scenario")
        .map(|(_, _, v)| v.clone())
        .ok_or_else(|| cfg_err(0, "missing required key `scenario`"))?;
    make_scenario(&scenario, &[]).map_err(|e| cfg_err(0, e.to_string()))?;

    let mut cfg = RunConfig::new(&scenario);
    let mut unknown = Vec::new();
    for (line, key, v) in &entries {
        let (line, v) = (*line, v.as_str());
        let key = if key == "output.snapshot_dt" {
            "snapshot_dt"
        } else {
            key.as_str()
        };
        match key {
            "scenario" => {}
            "scheme" => {
                cfg.scheme = Scheme::parse(v).ok_or_else(|| {
                    cfg_err(
                        line,
                        format!("unknown scheme {v:?}; expected wb, standard or standard_tec"),
                    )
                })?
            }
            "threads" => cfg.threads = parse_value(line, key, v, "a non-negative integer")?,
            "precision" => {
                if v != "double" {
                    return Err(cfg_err(
                        line,
                        format!("precision {v:?} is not available; only double is built"),
                    ));
                }
            }
            "output.dir" => cfg.output_dir = Some(PathBuf::from(v)),
            "output.ledger_every" => {
                let n: usize = parse_value(line, key, v, "a positive integer")?;
                if n == 0 {
                    return Err(cfg_err(line, "output.ledger_every must be positive"));
                }
                cfg.ledger_every = n;
            }
            "max_steps" => cfg.max_steps = Some(parse_value(line, key, v, "a positive integer")?),
            "reference_n" => {
                cfg.reference_n = Some(parse_value(line, key, v, "a positive integer")?)
            }
            "limiter.enabled" => {
                cfg.limiter.enabled = Some(parse_value(line, key, v, "true or false")?)
            }
            "limiter.beta" => {
                cfg.limiter.beta = parse_value(line, key, v, "a number")?;
                if !(cfg.limiter.beta > 0.0) {
                    return Err(cfg_err(line, "limiter.beta must be positive"));
                }
            }
            "limiter.m" => {
                cfg.limiter.m = parse_value(line, key, v, "a number")?;
                if !(cfg.limiter.m >= 0.0) {
                    return Err(cfg_err(line, "limiter.m must be non-negative"));
                }
            }
            k => {
                // Scenario parameter: validate it on its own line.
                let mut probe = cfg.clone();
                probe.set(k, v);
                match probe.scenario() {
                    Ok(_) => cfg = probe,
                    Err(Error::InvalidArgument(msg))
                        if msg.starts_with("unknown scenario parameter") =>
                    {
                        unknown.push((line, k.to_string()))
                    }
                    Err(e) => return Err(cfg_err(line, e.to_string())),
                }
            }
        }
    }
    if let Some((line, _)) = unknown.first() {
        let names: Vec<&str> = unknown.iter().map(|(_, k)| k.as_str()).collect();
        let mut known: Vec<&str> = RUN_KEYS.to_vec();
        known.extend(["limiter.beta", "limiter.m", "output.snapshot_dt"]);
        return Err(cfg_err(
            *line,
            format!(
                "unknown keys: {}; run keys are {}; scenario parameters are {}",
                names.join(", "),
                known.join(", "),
                OVERRIDE_KEYS.join(", ")
            ),
        ));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_requires_scenario() {
        assert!(matches!(parse_config(""), Err(Error::Config { .. })));
        assert!(matches!(
            parse_config("# only a comment\n"),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn explosion_setup() {
        let c = parse_config("scenario=explosion\nN=200\nk=2\nrk=3\n").unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.mesh.n(), 200);
        assert_eq!((s.k, s.rk_order), (2, 3));
        assert_eq!(c.time_scheme().unwrap(), TimeScheme::Rk3);
        assert_eq!(c.scheme, Scheme::WellBalanced);
    }

    #[test]
    fn limiter_beta_echo() {
        let c = parse_config("scenario = explosion\nlimiter.beta=1.75\n").unwrap();
        assert_eq!(c.limiter.beta, 1.75);
        let c =
            parse_config("scenario = explosion\n[limiter]\nbeta = 1.5\nenabled = false\n").unwrap();
        assert_eq!(c.limiter.beta, 1.5);
        assert_eq!(c.limiter.enabled, Some(false));
    }

    #[test]
    fn unknown_keys_listed_with_line() {
        let e = parse_config("scenario = explosion\nfoo = 1\nbar = 2\n").unwrap_err();
        match e {
            Error::Config { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("foo") && msg.contains("bar"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_reports_line() {
        let e = parse_config("scenario = explosion\n\nk = two\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }), "{e:?}");
        let e = parse_config("scenario = explosion\n[limiter]\nbeta = x\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }), "{e:?}");
    }

    #[test]
    fn sections_and_scheme() {
        let c = parse_config(
            "[run]\nscenario = toy_collapse\nscheme = standard\nthreads = 2\n[scenario]\nn = 64\n[output]\ndir = out\n",
        )
        .unwrap();
        assert_eq!(c.scheme, Scheme::Standard);
        assert_eq!(c.threads, 2);
        assert_eq!(c.output_dir, Some(PathBuf::from("out")));
        assert_eq!(c.scenario().unwrap().mesh.n(), 64);
    }

    #[test]
    fn bad_scenario_name() {
        assert!(matches!(
            parse_config("scenario = nope\n"),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn rk2_with_k2_warns() {
        let mut c = RunConfig::new("manufactured");
        c.set("rk", 2);
        assert_eq!(c.warnings().len(), 1);
        c.set("k", 1);
        assert!(c.warnings().is_empty());
    }
}
