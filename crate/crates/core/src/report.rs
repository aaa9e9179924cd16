//! The unit of verification output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::C64;

/// Outcome of a single numerical check. `pass` holds iff `residual <= tolerance`;
/// a NaN residual never passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub params: BTreeMap<String, Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check_name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckReport {
            check_name: check_name.into(),
            params: BTreeMap::new(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn complex_param(self, key: &str, z: C64) -> Self {
        self.param(key, complex_json(z))
    }

    pub fn roots_param(self, key: &str, roots: &[C64]) -> Self {
        let v: Vec<Value> = roots.iter().map(|&z| complex_json(z)).collect();
        self.param(key, v)
    }

    /// Marks the report failed regardless of the residual.
    pub fn fail(mut self, reason: &str) -> Self {
        self.pass = false;
        self.params.insert("failure".into(), reason.into());
        self
    }
}

/// Complex numbers are always serialised as `[re, im]`.
pub fn complex_json(z: C64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_tracks_residual() {
        assert!(CheckReport::new("a", 1e-13, 1e-12).pass);
        assert!(CheckReport::new("a", 1e-12, 1e-12).pass);
        assert!(!CheckReport::new("a", 2e-12, 1e-12).pass);
        assert!(!CheckReport::new("a", f64::NAN, 1e-12).pass);
    }

    #[test]
    fn complex_encoding() {
        let r = CheckReport::new("a", 0.0, 1.0).complex_param("u", C64::new(0.5, -0.25));
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains(r#""u":[0.5,-0.25]"#), "{s}");
    }
}
