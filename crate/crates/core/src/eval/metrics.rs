use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::plan::{Label, VerdictKind};

/// How unknown verdicts enter the confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPolicy {
    Exclude,
    AsValid,
    AsInvalid,
}

impl UnknownPolicy {
    pub const ALL: [UnknownPolicy; 3] = [Self::Exclude, Self::AsValid, Self::AsInvalid];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exclude => "exclude",
            Self::AsValid => "as_valid",
            Self::AsInvalid => "as_invalid",
        }
    }
}

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnknownPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected exclude, as_valid or as_invalid)"))
    }
}

/// Confusion counts with Valid as the positive class. `unknown` is the
/// number of unknown predictions whatever the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub policy: UnknownPolicy,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub unknown: usize,
}

impl Counts {
    pub fn new(policy: UnknownPolicy) -> Self {
        Self {
            policy,
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
            unknown: 0,
        }
    }

    /// Cases that entered the confusion matrix.
    pub fn adjudicated(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// All predictions, including excluded unknowns.
    pub fn total(&self) -> usize {
        match self.policy {
            UnknownPolicy::Exclude => self.adjudicated() + self.unknown,
            _ => self.adjudicated(),
        }
    }

    pub fn predicted_valid(&self) -> usize {
        let mapped = if self.policy == UnknownPolicy::AsValid { self.unknown } else { 0 };
        self.tp + self.fp - mapped
    }

    pub fn predicted_invalid(&self) -> usize {
        let mapped = if self.policy == UnknownPolicy::AsInvalid { self.unknown } else { 0 };
        self.tn + self.fn_ - mapped
    }
}

pub fn apply_unknown_policy(
    verdicts: &[VerdictKind],
    labels: &[Label],
    policy: UnknownPolicy,
) -> Counts {
    assert_eq!(verdicts.len(), labels.len(), "one label per verdict");
    let mut c = Counts::new(policy);
    for (&v, &label) in verdicts.iter().zip(labels) {
        let predicted = if v.is_unknown() {
            c.unknown += 1;
            match policy {
                UnknownPolicy::Exclude => continue,
                UnknownPolicy::AsValid => true,
                UnknownPolicy::AsInvalid => false,
            }
        } else {
            v == VerdictKind::Valid
        };
        match (predicted, label) {
            (true, Label::Valid) => c.tp += 1,
            (true, Label::Invalid) => c.fp += 1,
            (false, Label::Invalid) => c.tn += 1,
            (false, Label::Valid) => c.fn_ += 1,
        }
    }
    c
}

/// Harmonic mean of precision and recall, undefined when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Rates are fractions in [0, 1]; `None` marks an undefined value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: Counts,
    pub valid_rate: Option<f64>,
    pub invalid_rate: Option<f64>,
    pub unknown_rate: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// Mean wall-clock seconds per case.
    pub mean_time_secs: Option<f64>,
}

pub fn compute_metrics(counts: &Counts, mean_time_secs: Option<f64>) -> MetricsReport {
    let c = counts;
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => f1_score(p, r),
        _ => None,
    };
    MetricsReport {
        counts: *c,
        valid_rate: ratio(c.predicted_valid(), c.total()),
        invalid_rate: ratio(c.predicted_invalid(), c.total()),
        unknown_rate: ratio(c.unknown, c.total()),
        accuracy: ratio(c.tp + c.tn, c.adjudicated()),
        precision,
        recall,
        f1,
        mean_time_secs,
    }
}
