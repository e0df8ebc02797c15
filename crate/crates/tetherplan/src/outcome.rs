//! Outcome labels for benchmark cells.

use std::fmt;
use std::str::FromStr;

use tetherplan_core::audit::{AuditReport, AuditViolation};
use tetherplan_core::planner::{PlanResult, PlanStatus};

/// Benchmark label. The grid symbols stand for ○, ×, ★ and ⊗.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// `o`: planned, and the plan passes the re-check.
    Success,
    /// `x`: the cable bends past the threshold somewhere along the plan.
    BendViolation,
    /// `*`: the robot touches the hanging cable before the first grasp.
    CableCollision,
    /// `F`: the planner found nothing within its budget.
    NoPlan,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Success, Label::BendViolation, Label::CableCollision, Label::NoPlan];

    pub fn symbol(self) -> char {
        match self {
            Label::Success => 'o',
            Label::BendViolation => 'x',
            Label::CableCollision => '*',
            Label::NoPlan => 'F',
        }
    }

    pub fn from_symbol(c: char) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.symbol() == c)
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Success => "Success",
            Label::BendViolation => "BendViolation",
            Label::CableCollision => "CableCollision",
            Label::NoPlan => "NoPlan",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown outcome label {s:?}"))
    }
}

/// A classified planning result.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: Label,
    /// The planner itself reported success (before re-classification).
    pub planned: bool,
    /// First waypoint that triggered the label, for `x` and `*`.
    pub first_violation: Option<usize>,
    /// Largest bend angle along the plan, rad.
    pub max_theta: Option<f64>,
    /// Re-check findings other than bend and cable contact (robot collisions,
    /// step size, holding consistency). Always zero for a sound planner.
    pub other_violations: usize,
}

/// Labels a planning result using its post-hoc re-check.
///
/// Bend violations take precedence over cable contact when both occur. `audit`
/// is ignored for a `NoPlan` result and required otherwise.
pub fn classify(result: &PlanResult, audit: Option<&AuditReport>) -> Outcome {
    let PlanStatus::Success(plan) = &result.status else {
        return Outcome {
            label: Label::NoPlan,
            planned: false,
            first_violation: None,
            max_theta: None,
            other_violations: 0,
        };
    };
    let mut first_bend = None;
    let mut first_cable = None;
    let mut other = 0;
    for v in audit.map(|a| a.violations.as_slice()).unwrap_or_default() {
        match v {
            AuditViolation::Bend { waypoint, .. } => {
                first_bend = first_bend.or(Some(*waypoint));
            }
            AuditViolation::CableCollision { waypoint, .. } => {
                first_cable = first_cable.or(Some(*waypoint));
            }
            _ => other += 1,
        }
    }
    let (label, first_violation) = match (first_bend, first_cable) {
        (Some(k), _) => (Label::BendViolation, Some(k)),
        (None, Some(k)) => (Label::CableCollision, Some(k)),
        (None, None) => (Label::Success, None),
    };
    Outcome {
        label,
        planned: true,
        first_violation,
        max_theta: Some(audit.map(|a| a.max_theta).unwrap_or_else(|| plan.max_theta())),
        other_violations: other,
    }
}
