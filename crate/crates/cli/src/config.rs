use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Inclusive range of chain lengths, written `5` or `2..6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self, String> {
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(NRange { lo, hi })
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    /// The part of the range at or above `min`, if any.
    pub fn clamp_lo(&self, min: usize) -> Option<NRange> {
        (self.hi >= min).then(|| NRange { lo: self.lo.max(min), hi: self.hi })
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad chain length {t:?}: {e}"));
        match s.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                NRange::new(parse(a)?, parse(b)?)
            }
            None => {
                let n = parse(s)?;
                NRange::new(n, n)
            }
        }
    }
}

impl TryFrom<String> for NRange {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<NRange> for String {
    fn from(r: NRange) -> String {
        r.to_string()
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n_range: NRange,
    pub samples: usize,
    pub seed: u64,
    /// Per-check tolerance overrides keyed by check name.
    pub tol: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { n_range: NRange { lo: 2, hi: 6 }, samples: 10, seed: 42, tol: BTreeMap::new(), output_path: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.samples < 1 {
            return Err("samples must be >= 1".into());
        }
        if let Some((k, v)) = self.tol.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(format!("tolerance override for {k} must be finite and non-negative, got {v}"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("2..6".parse::<NRange>().unwrap(), NRange { lo: 2, hi: 6 });
        assert_eq!("2..=6".parse::<NRange>().unwrap(), NRange { lo: 2, hi: 6 });
        assert_eq!("5".parse::<NRange>().unwrap(), NRange { lo: 5, hi: 5 });
        assert!("6..2".parse::<NRange>().is_err());
        assert!("x".parse::<NRange>().is_err());
        assert_eq!(NRange { lo: 1, hi: 3 }.clamp_lo(2), Some(NRange { lo: 2, hi: 3 }));
        assert_eq!(NRange { lo: 1, hi: 1 }.clamp_lo(2), None);
    }

    #[test]
    fn config_roundtrip() {
        let cfg = RunConfig::from_json(r#"{"n_range": "3..4", "samples": 2, "tol": {"susy.q_split": 1e-9}}"#).unwrap();
        assert_eq!(cfg.n_range, NRange { lo: 3, hi: 4 });
        assert_eq!(cfg.seed, 42);
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(RunConfig::from_json(r#"{"samples": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
