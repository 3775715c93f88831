//! Experiment configuration and per-case result records.

use crate::{Error, ExtendedReal, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: OutputFormat,
}

/// Settings read from `--config FILE`; any field present overrides the flag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<String>,
    pub kinds: Option<Vec<String>>,
    pub alpha: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub n: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grids present must be nonempty and finite; tolerances must be positive.
    pub fn validate(&self) -> Result<()> {
        let grids: [(&str, Option<&Vec<f64>>); 3] =
            [("alpha", self.alpha.as_ref()), ("z", self.z.as_ref()), ("eps", self.eps.as_ref())];
        for (name, grid) in grids {
            if let Some(g) = grid {
                if g.is_empty() || g.iter().any(|x| !x.is_finite()) {
                    return Err(Error::BadParams(format!("grid `{name}` must be nonempty and finite")));
                }
            }
        }
        if matches!(&self.n, Some(n) if n.is_empty()) {
            return Err(Error::BadParams("grid `n` must be nonempty".into()));
        }
        if matches!(&self.kinds, Some(k) if k.is_empty()) {
            return Err(Error::BadParams("`kinds` must be nonempty".into()));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::BadParams(format!("tolerance `{k}` must be positive, got {v}")));
        }
        if self.trials == Some(0) {
            return Err(Error::BadParams("trials must be positive".into()));
        }
        Ok(())
    }

    /// Stochastic runs need an explicit seed, either here or on the command line.
    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64> {
        self.seed.or(flag).ok_or_else(|| Error::BadParams("a seed is required for stochastic runs".into()))
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    /// Name of the invariant, as `module.property`.
    pub invariant: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub suite: String,
    pub case_id: String,
    pub inputs_digest: String,
    pub values: BTreeMap<String, ExtendedReal>,
    pub assertions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl ResultRecord {
    pub fn new(suite: &str, case_id: impl Into<String>, digest: u64) -> Self {
        ResultRecord {
            suite: suite.to_string(),
            case_id: case_id.into(),
            inputs_digest: format!("{digest:016x}"),
            values: BTreeMap::new(),
            assertions: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn value(&mut self, name: &str, v: ExtendedReal) -> &mut Self {
        self.values.insert(name.to_string(), v);
        self
    }

    pub fn check(&mut self, invariant: &str, passed: bool, detail: impl FnOnce() -> String) -> &mut Self {
        let detail = if passed { String::new() } else { detail() };
        self.assertions.push(Assertion { invariant: invariant.to_string(), passed, detail });
        self
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// 64-bit FNV-1a, used to fingerprint the inputs of a case.
#[derive(Debug, Clone, Copy)]
pub struct Digest(u64);

impl Default for Digest {
    fn default() -> Self {
        Digest(0xcbf2_9ce4_8422_2325)
    }
}

impl Digest {
    pub fn bytes(mut self, data: &[u8]) -> Self {
        for &b in data {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self
    }

    pub fn f64s(self, xs: &[f64]) -> Self {
        xs.iter().fold(self, |d, x| d.bytes(&x.to_le_bytes()))
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes()).bytes(&[0])
    }

    pub fn matrix(self, m: &crate::CMat) -> Self {
        m.iter().fold(self, |d, z| d.f64s(&[z.re, z.im]))
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}
