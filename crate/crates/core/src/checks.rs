//! Runtime invariant bookkeeping shared by every stage.

use std::collections::BTreeMap;

use serde::Serialize;

/// How much self-verification the pipeline performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CheckLevel {
    Off,
    Fast,
    Full,
}

impl CheckLevel {
    /// Reads `PLANAR_FLP_DEBUG_ASSERT` (0, 1 or 2), defaulting to `Fast`.
    pub fn from_env() -> CheckLevel {
        match std::env::var("PLANAR_FLP_DEBUG_ASSERT")
            .ok()
            .as_deref()
            .map(str::trim)
        {
            Some("0") => CheckLevel::Off,
            Some("2") => CheckLevel::Full,
            _ => CheckLevel::Fast,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Checks {
    pub tally: BTreeMap<String, Tally>,
    pub failures: Vec<String>,
}

impl Checks {
    pub fn record(&mut self, tag: &str, ok: bool, detail: impl FnOnce() -> String) {
        let t = self.tally.entry(tag.to_string()).or_default();
        if ok {
            t.passed += 1;
        } else {
            t.failed += 1;
            if self.failures.len() < 200 {
                self.failures.push(format!("[{tag}] {}", detail()));
            }
        }
    }

    pub fn merge(&mut self, other: Checks) {
        for (k, v) in other.tally {
            let t = self.tally.entry(k).or_default();
            t.passed += v.passed;
            t.failed += v.failed;
        }
        for f in other.failures {
            if self.failures.len() < 200 {
                self.failures.push(f);
            }
        }
    }

    pub fn failed(&self) -> u64 {
        self.tally.values().map(|t| t.failed).sum()
    }

    pub fn count(&self, tag: &str) -> Tally {
        self.tally.get(tag).copied().unwrap_or_default()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_and_merge() {
        let mut a = Checks::default();
        a.record("x", true, String::new);
        a.record("x", false, || "bad".into());
        let mut b = Checks::default();
        b.record("x", true, String::new);
        a.merge(b);
        assert_eq!(
            a.count("x"),
            Tally {
                passed: 2,
                failed: 1
            }
        );
        assert_eq!(a.failures, vec!["[x] bad".to_string()]);
        assert!(!a.all_passed());
    }
}
