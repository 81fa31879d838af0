//! Pivot traces and their replay.
//!
//! A trace is written as JSON Lines: the first line holds the LP and the
//! engine configuration, each following line one step. Row and column
//! numbers in the file are 1-based; rationals are `p/q` strings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Classification, EngineConfig, Phase};
use crate::lp::CanonicalLp;
use crate::rational::{self, Rational};
use crate::tableau::{EqTableau, TableauJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotPolicy {
    /// Whole tableau after every step.
    #[default]
    Full,
    /// Only the gap row and the right-hand side column.
    Elided,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Snapshot {
    Full(TableauJson),
    Elided {
        gap_row: Vec<String>,
        rhs: Vec<String>,
    },
}

impl Snapshot {
    pub fn take(t: &EqTableau, policy: &SnapshotPolicy) -> Option<Snapshot> {
        match policy {
            SnapshotPolicy::Full => Some(Snapshot::Full(t.to_json())),
            SnapshotPolicy::Elided => Some(Snapshot::Elided {
                gap_row: rational::vec_to_text(t.row(t.gap_row())),
                rhs: rational::vec_to_text(&t.q()),
            }),
            SnapshotPolicy::None => None,
        }
    }

    /// True when `t` agrees with everything this snapshot recorded.
    pub fn matches(&self, t: &EqTableau) -> bool {
        match self {
            Snapshot::Full(json) => *json == t.to_json(),
            Snapshot::Elided { gap_row, rhs } => {
                *gap_row == rational::vec_to_text(t.row(t.gap_row()))
                    && *rhs == rational::vec_to_text(&t.q())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub lp: CanonicalLp,
    pub config: EngineConfig,
}

/// One engine step. `row`/`col` are 0-based here and 1-based on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub phase: Phase,
    /// Pivot row, source row of a fix, or eliminated row.
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub classification: Option<Classification>,
    /// Multiple added to the gap row by a fix.
    pub factor: Option<Rational>,
    /// Second entry of a block pivot.
    pub partner: Option<(usize, usize)>,
    pub underdetermined: bool,
    pub snapshot: Option<Snapshot>,
}

impl TraceStep {
    pub fn new(phase: Phase) -> Self {
        TraceStep {
            step: 0,
            phase,
            row: None,
            col: None,
            classification: None,
            factor: None,
            partner: None,
            underdetermined: false,
            snapshot: None,
        }
    }

    pub fn pivot(phase: Phase, row: usize, col: usize, class: Option<Classification>) -> Self {
        TraceStep {
            row: Some(row),
            col: Some(col),
            classification: class,
            ..Self::new(phase)
        }
    }

    /// True when the step changed the tableau.
    pub fn is_operation(&self) -> bool {
        match self.phase {
            Phase::Major | Phase::Minor => self.row.is_some(),
            Phase::Normalize | Phase::Fix | Phase::Reduce => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StepLine {
    step: usize,
    phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pivot_row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pivot_col: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classification: Option<Classification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partner_row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partner_col: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    underdetermined: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snapshot: Option<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct HeaderLine {
    #[serde(flatten)]
    header: TraceHeader,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotTrace {
    pub header: TraceHeader,
    pub initial: Option<Snapshot>,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty trace")]
    Empty,
    #[error("step {step}: snapshot mismatch")]
    Mismatch { step: usize },
    #[error("initial tableau does not match the header")]
    InitialMismatch,
    #[error("step {step}: {message}")]
    Invalid { step: usize, message: String },
}

impl PivotTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&HeaderLine {
            header: self.header.clone(),
            initial: self.initial.clone(),
        })
        .expect("header serializes");
        out.push('\n');
        for s in &self.steps {
            let line = StepLine {
                step: s.step,
                phase: s.phase,
                pivot_row: s.row.map(|r| r + 1),
                pivot_col: s.col.map(|c| c + 1),
                classification: s.classification,
                factor: s.factor.as_ref().map(rational::to_text),
                partner_row: s.partner.map(|p| p.0 + 1),
                partner_col: s.partner.map(|p| p.1 + 1),
                underdetermined: s.underdetermined,
                snapshot: s.snapshot.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("step serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let head: HeaderLine = serde_json::from_str(first).map_err(|e| TraceError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut steps = Vec::new();
        for (idx, line) in lines {
            let parse_err = |message: String| TraceError::Parse {
                line: idx + 1,
                message,
            };
            let s: StepLine = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
            let one_based = |v: Option<usize>| match v {
                Some(0) => Err(parse_err("row and column numbers are 1-based".into())),
                other => Ok(other.map(|x| x - 1)),
            };
            steps.push(TraceStep {
                step: s.step,
                phase: s.phase,
                row: one_based(s.pivot_row)?,
                col: one_based(s.pivot_col)?,
                classification: s.classification,
                factor: s
                    .factor
                    .as_deref()
                    .map(rational::parse)
                    .transpose()
                    .map_err(|e| parse_err(e.to_string()))?,
                partner: match (one_based(s.partner_row)?, one_based(s.partner_col)?) {
                    (Some(r), Some(c)) => Some((r, c)),
                    (None, None) => None,
                    _ => return Err(parse_err("partnerRow and partnerCol go together".into())),
                },
                underdetermined: s.underdetermined,
                snapshot: s.snapshot,
            });
        }
        Ok(PivotTrace {
            header: head.header,
            initial: head.initial,
            steps,
        })
    }

    /// Keeps the first `steps` steps.
    pub fn truncated(&self, steps: usize) -> PivotTrace {
        PivotTrace {
            header: self.header.clone(),
            initial: self.initial.clone(),
            steps: self.steps[..steps.min(self.steps.len())].to_vec(),
        }
    }
}

/// Rebuilds the initial tableau from the header and reapplies every step,
/// checking each recorded snapshot. Returns the initial tableau followed by
/// the tableau after each step.
pub fn replay(trace: &PivotTrace) -> Result<Vec<EqTableau>, TraceError> {
    let mut t = trace.header.config.initial_tableau(&trace.header.lp);
    if let Some(snap) = &trace.initial {
        if !snap.matches(&t) {
            return Err(TraceError::InitialMismatch);
        }
    }
    let mut out = vec![t.clone()];
    for s in &trace.steps {
        let invalid = |message: String| TraceError::Invalid {
            step: s.step,
            message,
        };
        match s.phase {
            Phase::Major | Phase::Minor => {
                match (s.row, s.col, s.partner) {
                    (Some(row), Some(col), Some(second)) => t
                        .block_pivot((row, col), second)
                        .map_err(|e| invalid(e.to_string()))?,
                    (Some(row), Some(col), None) => t
                        .pivot_in_place(row, col)
                        .map_err(|e| invalid(e.to_string()))?,
                    _ => {}
                }
            }
            Phase::Normalize => {
                let gap = t.gap_row();
                t.negate_row(gap);
            }
            Phase::Fix => {
                let row = s.row.ok_or_else(|| invalid("fix without row".into()))?;
                let factor = s
                    .factor
                    .as_ref()
                    .ok_or_else(|| invalid("fix without factor".into()))?;
                if row >= t.pairs() {
                    return Err(invalid(format!("row {} out of range", row + 1)));
                }
                let gap = t.gap_row();
                t.add_row_multiple(gap, row, factor);
            }
            Phase::Reduce => {
                let row = s.row.ok_or_else(|| invalid("reduce without row".into()))?;
                t = t.without_pair(row).map_err(|e| invalid(e.to_string()))?;
            }
        }
        if let Some(snap) = &s.snapshot {
            if !snap.matches(&t) {
                return Err(TraceError::Mismatch { step: s.step });
            }
        }
        out.push(t.clone());
    }
    Ok(out)
}
