//! Flat `key = value` experiment configuration.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored. Every
//! key can be overridden from the command line with `--set key=value`.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `kind` | (from CLI) | must match the CLI kind when present |
//! | `sequence` | `regular` | `regular`, `out_regular`, `uniform_range` or `file` |
//! | `n` | `1000` | number of vertices |
//! | `d` | `3` | degree for `regular`, out-degree for `out_regular` |
//! | `lo`, `hi` | `2`, `5` | degree range for `uniform_range` |
//! | `in_law` | `2:0.5,4:0.5` | in-degree law `k:weight,...` for `out_regular` |
//! | `sequence_file` | — | CSV `vertex,in_deg,out_deg` for `file` |
//! | `u` | `0.5` | initial Bernoulli density |
//! | `times` | — | explicit comma-separated observation times |
//! | `grid_points` | `25` | points per regime of the default grid |
//! | `short_max` | `10` | end of the short (geometric) regime |
//! | `ell` | `0.25,0.5,1,2` | long-regime multiples of `n` |
//! | `t_max` | `2 n` | horizon of the `figure1` trajectory |
//! | `replicas` | `10` | voter runs per graph |
//! | `graphs` | `5` | independent DCM samples |
//! | `master_seed` | `1` | root of every random stream |
//! | `samples` | `1000` | stationary meeting samples |
//! | `cap_factor` | `20` (`meeting`), `100` (`consensus`) | censoring cap in units of `theta n` |
//! | `runs` | `100000` | chase runs |
//! | `s_max` | `4` | largest Catalan index in the chase table |
//! | `t_max_steps` | `1000` | chase step cap |
//! | `chase_mode` | `tree` | `tree` or `annealed` |
//! | `dx`, `dy` | `d` | out-degrees of the chase endpoints |
//! | `window_lo`, `window_hi` | `30`, `50` | plateau averaging window |
//! | `tol` | `1e-12` | truncation tolerance of the prediction |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Figure1,
    Plateau,
    Longtime,
    Meeting,
    Chase,
    Predict,
    Consensus,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Figure1,
        Self::Plateau,
        Self::Longtime,
        Self::Meeting,
        Self::Chase,
        Self::Predict,
        Self::Consensus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Figure1 => "figure1",
            Self::Plateau => "plateau",
            Self::Longtime => "longtime",
            Self::Meeting => "meeting",
            Self::Chase => "chase",
            Self::Predict => "predict",
            Self::Consensus => "consensus",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(None, format!("unknown experiment kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SequenceSpec {
    Regular { n: usize, d: usize },
    OutRegular { n: usize, d: usize, in_law: Vec<(usize, f64)> },
    UniformRange { n: usize, lo: usize, hi: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaseMode {
    Tree,
    Annealed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub sequence: SequenceSpec,
    pub n: usize,
    pub d: usize,
    pub u: f64,
    pub times: Option<Vec<f64>>,
    pub grid_points: usize,
    pub short_max: f64,
    pub ell: Vec<f64>,
    pub t_max: Option<f64>,
    pub replicas: usize,
    pub graphs: usize,
    pub master_seed: u64,
    pub samples: usize,
    pub cap_factor: f64,
    pub runs: usize,
    pub s_max: u32,
    pub t_max_steps: u64,
    pub chase_mode: ChaseMode,
    pub dx: usize,
    pub dy: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub tol: f64,
    /// Effective `key = value` pairs after overrides, for provenance.
    pub echo: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "kind",
    "sequence",
    "n",
    "d",
    "lo",
    "hi",
    "in_law",
    "sequence_file",
    "u",
    "times",
    "grid_points",
    "short_max",
    "ell",
    "t_max",
    "replicas",
    "graphs",
    "master_seed",
    "samples",
    "cap_factor",
    "runs",
    "s_max",
    "t_max_steps",
    "chase_mode",
    "dx",
    "dy",
    "window_lo",
    "window_hi",
    "tol",
];

/// Raw settings with the line each came from (`None` for overrides).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                Error::config(Some(lineno), format!("expected 'key = value', found '{content}'"))
            })?;
            let key = key.trim();
            if raw.entries.contains_key(key) {
                return Err(Error::config(Some(lineno), format!("duplicate key '{key}'")));
            }
            raw.insert(key, value.trim(), Some(lineno))?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(None, format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::config(line, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(Error::config(line, format!("empty value for '{key}'")));
        }
        self.entries.insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(None, format!("override '{assignment}' is not key=value")))?;
        self.insert(key.trim(), value.trim(), None)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(*line, format!("invalid value '{v}' for '{key}'"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| Error::config(*line, format!("invalid number list '{v}' for '{key}'"))),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|(_, l)| *l)
    }

    /// Typed configuration for `kind`, with defaults and validation.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        if let Some(k) = self.get::<String>("kind")? {
            if k != kind.as_str() {
                return Err(Error::config(
                    self.line("kind"),
                    format!("config is for kind '{k}' but '{kind}' was requested"),
                ));
            }
        }
        let n: usize = self.get_or("n", 1000)?;
        let d: usize = self.get_or("d", 3)?;
        let sequence = match self.get_or("sequence", "regular".to_string())?.as_str() {
            "regular" => SequenceSpec::Regular { n, d },
            "out_regular" => SequenceSpec::OutRegular {
                n,
                d,
                in_law: self.law("in_law", "2:0.5,4:0.5")?,
            },
            "uniform_range" => SequenceSpec::UniformRange {
                n,
                lo: self.get_or("lo", 2)?,
                hi: self.get_or("hi", 5)?,
            },
            "file" => SequenceSpec::File {
                path: self.get::<PathBuf>("sequence_file")?.ok_or_else(|| {
                    Error::config(self.line("sequence"), "sequence = file needs sequence_file")
                })?,
            },
            other => {
                return Err(Error::config(
                    self.line("sequence"),
                    format!("unknown sequence type '{other}'"),
                ))
            }
        };
        let chase_mode = match self.get_or("chase_mode", "tree".to_string())?.as_str() {
            "tree" => ChaseMode::Tree,
            "annealed" => ChaseMode::Annealed,
            other => {
                return Err(Error::config(
                    self.line("chase_mode"),
                    format!("unknown chase_mode '{other}'"),
                ))
            }
        };
        let default_cap = if kind == ExperimentKind::Consensus { 100.0 } else { 20.0 };
        let cfg = ExperimentConfig {
            kind,
            sequence,
            n,
            d,
            u: self.get_or("u", 0.5)?,
            times: self.list("times")?,
            grid_points: self.get_or("grid_points", 25)?,
            short_max: self.get_or("short_max", 10.0)?,
            ell: self.list("ell")?.unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0]),
            t_max: self.get("t_max")?,
            replicas: self.get_or("replicas", 10)?,
            graphs: self.get_or("graphs", 5)?,
            master_seed: self.get_or("master_seed", 1)?,
            samples: self.get_or("samples", 1000)?,
            cap_factor: self.get_or("cap_factor", default_cap)?,
            runs: self.get_or("runs", 100_000)?,
            s_max: self.get_or("s_max", 4)?,
            t_max_steps: self.get_or("t_max_steps", 1000)?,
            chase_mode,
            dx: self.get_or("dx", d)?,
            dy: self.get_or("dy", d)?,
            window_lo: self.get_or("window_lo", 30.0)?,
            window_hi: self.get_or("window_hi", 50.0)?,
            tol: self.get_or("tol", 1e-12)?,
            echo: self
                .entries
                .iter()
                .map(|(k, (v, _))| (k.clone(), v.clone()))
                .collect(),
        };
        self.validate(&cfg)?;
        Ok(cfg)
    }

    fn law(&self, key: &str, default: &str) -> Result<Vec<(usize, f64)>> {
        let text = self.get_or(key, default.to_string())?;
        let bad = || Error::config(self.line(key), format!("invalid law '{text}', expected k:w,..."));
        text.split(',')
            .map(|pair| {
                let (k, w) = pair.split_once(':').ok_or_else(bad)?;
                Ok((
                    k.trim().parse().map_err(|_| bad())?,
                    w.trim().parse().map_err(|_| bad())?,
                ))
            })
            .collect()
    }

    fn validate(&self, c: &ExperimentConfig) -> Result<()> {
        let fail = |key: &str, msg: &str| Err(Error::config(self.line(key), format!("{key}: {msg}")));
        if !(c.u > 0.0 && c.u < 1.0) {
            return fail("u", "must lie in (0, 1)");
        }
        if c.replicas < 1 {
            return fail("replicas", "must be >= 1");
        }
        if c.graphs < 1 {
            return fail("graphs", "must be >= 1");
        }
        if c.n < 1 {
            return fail("n", "must be >= 1");
        }
        if let Some(times) = &c.times {
            if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
                return fail("times", "must be finite and >= 0");
            }
        }
        if c.ell.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return fail("ell", "must be positive");
        }
        if c.grid_points < 2 {
            return fail("grid_points", "must be >= 2");
        }
        if !(c.short_max > 0.0) {
            return fail("short_max", "must be positive");
        }
        if let Some(t) = c.t_max {
            if !(t > 0.0) {
                return fail("t_max", "must be positive");
            }
        }
        if !(c.cap_factor > 0.0) {
            return fail("cap_factor", "must be positive");
        }
        if !(c.window_lo >= 0.0 && c.window_hi > c.window_lo) {
            return fail("window_hi", "window must satisfy 0 <= window_lo < window_hi");
        }
        if !(c.tol > 0.0) {
            return fail("tol", "must be positive");
        }
        if c.dx < 1 || c.dy < 1 {
            return fail("dx", "dx and dy must be >= 1");
        }
        Ok(())
    }
}
