//! Triple verdicts. A triple is only interpretable when the unperturbed
//! baseline finished the mission and the perturbations were severe enough
//! to break the reactive baseline; the Challenge stage is then graded
//! against the reactive score.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Validity {
    Valid,
    Invalid,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Degraded,
    Fail,
    Inconclusive,
    NotApplicable,
}

/// The per-stage scores and error flags a verdict is computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleScores {
    pub score_a: f64,
    pub score_b: f64,
    pub score_c: f64,
    pub error_a: bool,
    pub error_b: bool,
    pub error_c: bool,
}

/// Pure, total verdict function.
///
/// - A or B infrastructure error: (Error, NotApplicable).
/// - A under 1.0 or B at 1.0: (Invalid, NotApplicable) — the baseline
///   failed on its own, or the perturbations were not severe enough.
/// - Challenge error with clean baselines: (Valid, Inconclusive).
/// - Challenge 1.0: Pass. More than B but under 1.0: Degraded. Less than
///   B: Fail. Equal to B under 1.0: Inconclusive.
pub fn verdict(s: &TripleScores) -> (Validity, Verdict) {
    if s.error_a || s.error_b {
        return (Validity::Error, Verdict::NotApplicable);
    }
    if s.score_a < 1.0 || s.score_b >= 1.0 {
        return (Validity::Invalid, Verdict::NotApplicable);
    }
    if s.error_c {
        return (Validity::Valid, Verdict::Inconclusive);
    }
    if s.score_c >= 1.0 {
        (Validity::Valid, Verdict::Pass)
    } else if s.score_c > s.score_b {
        (Validity::Valid, Verdict::Degraded)
    } else if s.score_c < s.score_b {
        (Validity::Valid, Verdict::Fail)
    } else {
        (Validity::Valid, Verdict::Inconclusive)
    }
}
