//! Flat `key = value` experiment configuration.
//!
//! One pair per line; `#` starts a comment. Keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `kind` | `sle-sample`, `ising-connectivity`, `fk-connectivity`, `resample-chain`, `verify-partition`, `driver-qv` | required |
//! | `kappa` | SLE parameter | 3 |
//! | `q` | cluster weight | 2 |
//! | `ell` | rectangle aspect ratio | 1 |
//! | `delta` | lattice mesh | 0.0625 |
//! | `marks` | comma-separated boundary fractions | `0.125,0.625` |
//! | `n` | number of links | 2 |
//! | `pattern` | link pattern `N;a-b,...` for chains | first pattern of `N = marks / 2` |
//! | `replicas` | independent samples | 100 |
//! | `sweeps` | Monte Carlo sweeps per replica | 200 |
//! | `cluster_moves` | interleave cluster updates | true |
//! | `steps` | chain steps | 200 |
//! | `stride` | chain recording stride | 1 |
//! | `burn_in` | discarded chain steps | 0 |
//! | `dt` | Loewner time step | 1e-3 |
//! | `time` | Loewner total capacity time | 1 |
//! | `trials` | random configurations | 1000 |
//! | `seed` | master seed | 1 |
//! | `output` | output directory | `$MSLE_OUTPUT_DIR` or `.` |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::combinatorics::LinkPattern;
use crate::error::{Error, Result};
use crate::lattice::PolygonSpec;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MSLE_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SleSample,
    IsingConnectivity,
    FkConnectivity,
    ResampleChain,
    VerifyPartition,
    DriverQv,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sle-sample" => ExperimentKind::SleSample,
            "ising-connectivity" => ExperimentKind::IsingConnectivity,
            "fk-connectivity" => ExperimentKind::FkConnectivity,
            "resample-chain" => ExperimentKind::ResampleChain,
            "verify-partition" => ExperimentKind::VerifyPartition,
            "driver-qv" => ExperimentKind::DriverQv,
            _ => return Err(Error::Config(format!("unknown kind {s:?}"))),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::SleSample => "sle-sample",
            ExperimentKind::IsingConnectivity => "ising-connectivity",
            ExperimentKind::FkConnectivity => "fk-connectivity",
            ExperimentKind::ResampleChain => "resample-chain",
            ExperimentKind::VerifyPartition => "verify-partition",
            ExperimentKind::DriverQv => "driver-qv",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub kappa: f64,
    pub q: f64,
    pub ell: f64,
    pub delta: f64,
    pub marks: Vec<f64>,
    pub n: usize,
    pub pattern: Option<String>,
    pub replicas: usize,
    pub sweeps: usize,
    pub cluster_moves: bool,
    pub steps: usize,
    pub stride: usize,
    pub burn_in: usize,
    pub dt: f64,
    pub time: f64,
    pub trials: usize,
    pub seed: u64,
    pub output: PathBuf,
}

/// Output directory from [`OUTPUT_DIR_ENV`], else the working directory.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            kappa: 3.0,
            q: 2.0,
            ell: 1.0,
            delta: 0.0625,
            marks: vec![0.125, 0.625],
            n: 2,
            pattern: None,
            replicas: 100,
            sweeps: 200,
            cluster_moves: true,
            steps: 200,
            stride: 1,
            burn_in: 0,
            dt: 1e-3,
            time: 1.0,
            trials: 1000,
            seed: 1,
            output: default_output_dir(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(k, _)| k == "kind")
            .ok_or_else(|| Error::Config("missing key `kind`".into()))?
            .1
            .parse()?;
        let mut cfg = ExperimentConfig::new(kind);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value {v:?} for `{key}`")))
        }
        match key {
            "kind" => self.kind = value.parse()?,
            "kappa" => self.kappa = num(key, value)?,
            "q" => self.q = num(key, value)?,
            "ell" => self.ell = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "marks" => {
                self.marks = value
                    .split(',')
                    .map(|s| num(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "n" => self.n = num(key, value)?,
            "pattern" => self.pattern = Some(value.to_string()),
            "replicas" => self.replicas = num(key, value)?,
            "sweeps" => self.sweeps = num(key, value)?,
            "cluster_moves" => self.cluster_moves = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "stride" => self.stride = num(key, value)?,
            "burn_in" => self.burn_in = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "time" => self.time = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Range checks shared by all kinds.
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 8.0) {
            return Err(Error::bounds("kappa", self.kappa, "(0, 8)"));
        }
        if !(1.0..4.0).contains(&self.q) {
            return Err(Error::bounds("q", self.q, "[1, 4)"));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::bounds("ell", self.ell, "(0, inf)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::bounds("delta", self.delta, "(0, 1)"));
        }
        if self.marks.is_empty() || self.marks.len() % 2 != 0 || self.marks.iter().any(|m| !(0.0..1.0).contains(m)) {
            return Err(Error::Config("marks must be an even number of fractions in [0, 1)".into()));
        }
        if self.n == 0 || self.replicas == 0 || self.stride == 0 || self.trials == 0 {
            return Err(Error::Config("n, replicas, stride and trials must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt <= self.time && self.time.is_finite()) {
            return Err(Error::bounds("dt", self.dt, "(0, time]"));
        }
        if let Some(p) = &self.pattern {
            p.parse::<LinkPattern>().map_err(|e| Error::Config(format!("pattern {p:?}: {e}")))?;
        }
        Ok(())
    }

    pub fn polygon(&self) -> PolygonSpec {
        PolygonSpec { ell: self.ell, delta: self.delta, marks: self.marks.clone() }
    }
}
