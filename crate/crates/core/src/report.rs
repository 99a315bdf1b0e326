use serde::Serialize;
use std::collections::BTreeMap;

/// Outcome of one oracle or identity check.
///
/// `passed` is derived from `max_deviation <= tolerance` at construction; a
/// NaN deviation never passes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub check_name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: BTreeMap<String, f64>,
}

impl VerifyReport {
    pub fn new(check_name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        VerifyReport {
            check_name: check_name.into(),
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
            details: BTreeMap::new(),
        }
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.get(key).copied()
    }
}

/// Running maximum that lets NaN win, so a NaN deviation is never hidden.
pub(crate) fn worst(acc: f64, x: f64) -> f64 {
    if x.is_nan() || acc.is_nan() {
        f64::NAN
    } else {
        acc.max(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_deviation() {
        assert!(VerifyReport::new("a", 1e-9, 1e-8).passed);
        assert!(VerifyReport::new("a", 1e-8, 1e-8).passed);
        assert!(!VerifyReport::new("a", 2e-8, 1e-8).passed);
        assert!(!VerifyReport::new("a", f64::NAN, 1e-8).passed);
        assert!(worst(0.0, f64::NAN).is_nan());
    }
}
