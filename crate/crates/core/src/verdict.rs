use serde::{Deserialize, Serialize};

/// Outcome of a numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// The defining quantity grows under window growth (or a fixed bound is
    /// exceeded).
    FailDivergent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::FailDivergent => "fail-divergent",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Worst of two verdicts (fail-divergent dominates inconclusive).
    pub fn worst(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (FailDivergent, _) | (_, FailDivergent) => FailDivergent,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
