//! Complementary Gauss-Jordan pivoting on `[M q]`.
//!
//! The loop alternates two kinds of complementary pivots:
//!
//! * a **major** step fires while the gap-row right-hand side is nonzero. It
//!   picks the nonbasic column with the largest positive gap-row entry
//!   (smallest index on ties) and pivots it in at the row where its
//!   complement is basic;
//! * a **minor** step fires when the gap is zero but some `q_i < 0`. It takes
//!   rows with negative `q` in order of increasing `|q_i|` (smallest index on
//!   ties) and swaps the row's basic column for its complement.
//!
//! When every minor candidate has a zero gap-row entry in its complement
//! column, a small multiple of a row with positive right-hand side is added
//! to the gap row ([`degenerate_fix`]); if no such row exists the system is
//! shrunk by one row and one complementary pair.
//!
//! Every `Solved` result has been re-checked against the unshifted system of
//! the original LP. Runs never panic on unexpected selections: repeats of an
//! earlier major selection and major counts above `m + n` are reported as
//! [`Falsification`] evidence.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::CanonicalLp;
use crate::rational::{self, Rational};
use crate::tableau::{build_eq, build_eq_with_shifts, verify_eq_solution, EqSolution, EqTableau};
use crate::trace::{PivotTrace, Snapshot, SnapshotPolicy, TraceHeader, TraceStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Major,
    Minor,
    /// Gap row multiplied by -1.
    Normalize,
    /// Multiple of a row added to the gap row.
    Fix,
    /// Row and complementary pair removed.
    Reduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Fresh,
    /// The candidate is the complement of an earlier major selection.
    Reversal,
    /// The candidate was selected by an earlier major step.
    Repeat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub phase: Phase,
    /// Column in the numbering of the original tableau.
    pub column: usize,
    pub row: usize,
    /// Index of the tableau produced by this selection in the trace.
    pub tableau_index: usize,
}

/// Ordered record of pivot selections, in original column numbering.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SelectionHistory {
    pub pairs: usize,
    pub records: Vec<SelectionRecord>,
}

impl SelectionHistory {
    pub fn new(pairs: usize) -> Self {
        SelectionHistory {
            pairs,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn major_selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.records
            .iter()
            .filter(|r| r.phase == Phase::Major)
            .map(|r| r.column)
    }

    /// Major selections whose complement a later minor step brought back in.
    pub fn reversed(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, rec) in self.records.iter().enumerate() {
            if rec.phase != Phase::Major {
                continue;
            }
            let pair = complement_of(rec.column, self.pairs);
            if self.records[i + 1..]
                .iter()
                .any(|r| r.phase == Phase::Minor && r.column == pair)
                && !out.contains(&rec.column)
            {
                out.push(rec.column);
            }
        }
        out
    }
}

fn complement_of(j: usize, pairs: usize) -> usize {
    if j < pairs {
        j + pairs
    } else {
        j - pairs
    }
}

/// Classifies a major candidate against earlier major selections.
pub fn classify_selection(history: &SelectionHistory, candidate: usize) -> Classification {
    let pair = complement_of(candidate, history.pairs);
    let mut reversal = false;
    for j in history.major_selected() {
        if j == candidate {
            return Classification::Repeat;
        }
        if j == pair {
            reversal = true;
        }
    }
    if reversal {
        Classification::Reversal
    } else {
        Classification::Fresh
    }
}

/// Nonbasic column with the largest positive gap-row entry, smallest index
/// on ties. `None` when no nonbasic column has a positive gap-row entry.
pub fn major_select(t: &EqTableau) -> Option<usize> {
    let gap = t.gap_row();
    let mut best: Option<usize> = None;
    for j in 0..t.width() {
        let v = t.entry(gap, j);
        if !v.is_positive() || t.is_basic(j) {
            continue;
        }
        if best.is_none_or(|b| v > t.entry(gap, b)) {
            best = Some(j);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MajorPivotError {
    /// The complement of the selected column is not basic.
    ComplementNotBasic { col: usize },
    /// The complement is basic in `row` but the pivot entry there is zero.
    ZeroPivot { row: usize, col: usize },
}

/// Row for the complementary major pivot in column `col`.
pub fn major_pivot_row(t: &EqTableau, col: usize) -> Result<usize, MajorPivotError> {
    let row = t
        .basic_row_of(t.pair(col))
        .ok_or(MajorPivotError::ComplementNotBasic { col })?;
    if t.entry(row, col).is_zero() {
        return Err(MajorPivotError::ZeroPivot { row, col });
    }
    Ok(row)
}

/// Pivots `col` in where its complement is basic.
pub fn major_pivot(t: &EqTableau, col: usize) -> Result<EqTableau, MajorPivotError> {
    let row = major_pivot_row(t, col)?;
    Ok(t.gj_pivot(row, col).expect("complementary pivot on a nonzero entry"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinorSelection {
    Pivot { row: usize, col: usize },
    /// No row has `q_i < 0`.
    NoNegativeQ,
    /// Every candidate's complement column has a zero gap-row entry.
    AllBottomZero,
    /// Order-two principal pivot, used when every diagonal entry is zero:
    /// `partner_col` enters at `row`, then `col` enters at `partner_row`.
    Block {
        row: usize,
        col: usize,
        partner_row: usize,
        partner_col: usize,
    },
    /// Some candidate has a nonzero gap-row entry but neither a single nor
    /// a block pivot is available for any of them.
    ZeroPivots,
}

/// Rows with negative right-hand side in the order minor steps consider
/// them: increasing `|q_i|`, then increasing row index.
pub fn minor_candidates(t: &EqTableau) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..t.pairs()).filter(|&i| t.rhs(i).is_negative()).collect();
    rows.sort_by(|&a, &b| t.rhs(a).abs().cmp(&t.rhs(b).abs()).then(a.cmp(&b)));
    rows
}

pub fn minor_select(t: &EqTableau) -> MinorSelection {
    let candidates = minor_candidates(t);
    if candidates.is_empty() {
        return MinorSelection::NoNegativeQ;
    }
    let gap = t.gap_row();
    let mut blocked = Vec::new();
    for &row in &candidates {
        let Some(basic) = t.basis()[row] else { continue };
        let col = t.pair(basic);
        if t.entry(gap, col).is_zero() {
            continue;
        }
        if !t.entry(row, col).is_zero() {
            return MinorSelection::Pivot { row, col };
        }
        blocked.push((row, col));
    }
    for &(row, col) in &blocked {
        if let Some((partner_row, partner_col)) = block_partner(t, row, col) {
            return MinorSelection::Block {
                row,
                col,
                partner_row,
                partner_col,
            };
        }
    }
    if !blocked.is_empty() {
        MinorSelection::ZeroPivots
    } else {
        MinorSelection::AllBottomZero
    }
}

/// Partner for an order-two principal pivot when `col` should enter at
/// `row` but the entry there is zero: the first other row `r` whose
/// complement column `c` has a nonzero entry in `row`, with `(r, col)`
/// nonzero as well. Returns `(r, c)`.
pub fn block_partner(t: &EqTableau, row: usize, col: usize) -> Option<(usize, usize)> {
    (0..t.pairs()).find_map(|r| {
        let c = t.pair(t.basis()[r]?);
        (r != row && !t.entry(row, c).is_zero() && !t.entry(r, col).is_zero()).then_some((r, c))
    })
}

/// How the multiple added to the gap row by [`degenerate_fix`] is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonRule {
    /// Half the smallest ratio `gap_j / |row_j|` over columns where the gap
    /// entry is positive and the added row is negative; 1 if there is none.
    #[default]
    HalfMinRatio,
    Fixed(#[serde(with = "rational::serde_text")] Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixOutcome {
    /// `epsilon * row` was added to the gap row.
    Added {
        row: usize,
        column: usize,
        #[serde(with = "rational::serde_text")]
        epsilon: Rational,
    },
    /// No eligible row; the caller should drop `row` and its pair.
    Reduce { row: usize },
}

/// Chooses the row to add to the gap row when no minor pivot exists.
///
/// A column `k` is eligible when it is nonbasic, its gap-row entry is
/// positive and the row where its complement is basic has `q > 0`. Among
/// eligible columns the first one whose row has a nonzero entry in some
/// blocked candidate column is preferred, otherwise the first eligible one.
pub fn plan_degenerate_fix(t: &EqTableau, rule: &EpsilonRule) -> FixOutcome {
    let gap = t.gap_row();
    let blocked: Vec<usize> = minor_candidates(t)
        .into_iter()
        .filter_map(|r| t.basis()[r].map(|b| t.pair(b)))
        .collect();
    let eligible: Vec<(usize, usize)> = (0..t.width())
        .filter(|&k| t.entry(gap, k).is_positive() && !t.is_basic(k))
        .filter_map(|k| {
            let row = t.basic_row_of(t.pair(k))?;
            t.rhs(row).is_positive().then_some((k, row))
        })
        .collect();
    let chosen = eligible
        .iter()
        .find(|(_, row)| blocked.iter().any(|&c| !t.entry(*row, c).is_zero()))
        .or(eligible.first());
    let Some(&(column, row)) = chosen else {
        let row = minor_candidates(t).first().copied().unwrap_or(0);
        return FixOutcome::Reduce { row };
    };
    let epsilon = match rule {
        EpsilonRule::Fixed(e) => e.clone(),
        EpsilonRule::HalfMinRatio => (0..t.width())
            .filter(|&j| t.entry(gap, j).is_positive() && t.entry(row, j).is_negative())
            .map(|j| t.entry(gap, j) / t.entry(row, j).abs())
            .min()
            .map_or_else(Rational::one, |m| m / rational::int(2)),
    };
    FixOutcome::Added {
        row,
        column,
        epsilon,
    }
}

/// Applies [`plan_degenerate_fix`]. Returns the new tableau, or the row to
/// eliminate when the system has to be reduced instead.
pub fn degenerate_fix(t: &EqTableau, rule: &EpsilonRule) -> Result<(EqTableau, FixOutcome), usize> {
    match plan_degenerate_fix(t, rule) {
        FixOutcome::Reduce { row } => Err(row),
        outcome @ FixOutcome::Added { .. } => {
            let FixOutcome::Added { row, epsilon, .. } = &outcome else {
                unreachable!()
            };
            let mut next = t.clone();
            next.add_row_multiple(t.gap_row(), *row, epsilon);
            Ok((next, outcome))
        }
    }
}

/// Multiple of the gap row added to the other rows at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta {
    Uniform(#[serde(with = "rational::serde_text")] Rational),
    PerRow(#[serde(with = "rational::serde_text::vec")] Vec<Rational>),
}

impl Default for Theta {
    fn default() -> Self {
        Theta::Uniform(Rational::one())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub theta: Theta,
    /// Hard limit on Gauss-Jordan pivots; `None` means `4 (m + n)`. Values
    /// below `m + n` are raised to `m + n`.
    pub pivot_cap: Option<usize>,
    pub snapshots: SnapshotPolicy,
    pub epsilon: EpsilonRule,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            theta: Theta::default(),
            pivot_cap: None,
            snapshots: SnapshotPolicy::Full,
            epsilon: EpsilonRule::default(),
        }
    }
}

impl EngineConfig {
    pub fn with_theta(theta: Rational) -> Self {
        EngineConfig {
            theta: Theta::Uniform(theta),
            ..Self::default()
        }
    }

    pub fn cap_for(&self, pairs: usize) -> usize {
        self.pivot_cap.unwrap_or(4 * pairs).max(pairs)
    }

    pub fn initial_tableau(&self, lp: &CanonicalLp) -> EqTableau {
        match &self.theta {
            Theta::Uniform(theta) => build_eq(lp, theta),
            Theta::PerRow(shifts) => build_eq_with_shifts(lp, shifts),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FalsificationKind {
    /// A major step tried to select a column it had selected before.
    RepeatSelection,
    /// More than `m + n` major pivots were performed.
    IterationBoundViolated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Falsification {
    pub kind: FalsificationKind,
    /// Trace step at which the event was detected.
    pub step: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoSolutionReason {
    /// The gap row has no positive nonbasic entry while its right-hand side
    /// is positive.
    NoPositiveEntry,
    /// A major step tried to select the complement of an earlier selection
    /// and the current basic solution does not solve the system.
    Reversal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Solved {
        solution: EqSolution,
        #[serde(with = "rational::serde_text::vec")]
        x: Vec<Rational>,
        #[serde(with = "rational::serde_text::vec")]
        y: Vec<Rational>,
        #[serde(with = "rational::serde_text")]
        objective: Rational,
    },
    NoSolution {
        reason: NoSolutionReason,
    },
    /// The system was reduced and the smaller run did not produce a point
    /// that solves the original system.
    Reduced {
        /// Original-numbering rows eliminated, in order.
        eliminated_rows: Vec<usize>,
        child: Box<RunStatus>,
    },
    Falsified {
        kind: FalsificationKind,
        step: usize,
        column: usize,
        /// Step at which `column` was first selected.
        first_selected_at: usize,
    },
    PivotCapExceeded {
        cap: usize,
    },
    /// A situation the selection rules do not cover.
    Stalled {
        reason: String,
    },
}

impl RunStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Solved { .. } => "solved",
            RunStatus::NoSolution { .. } => "no_solution",
            RunStatus::Reduced { .. } => "reduced",
            RunStatus::Falsified { .. } => "falsified",
            RunStatus::PivotCapExceeded { .. } => "pivot_cap_exceeded",
            RunStatus::Stalled { .. } => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub status: RunStatus,
    pub major_count: usize,
    pub minor_count: usize,
    pub total_pivots: usize,
    /// `m + n` of the original LP.
    pub pairs: usize,
    pub fixes: usize,
    pub reductions: usize,
    /// Major steps whose complementary pivot entry was zero.
    pub underdetermined_steps: usize,
    pub falsifications: Vec<Falsification>,
    pub history: SelectionHistory,
    #[serde(skip)]
    pub trace: PivotTrace,
}

impl RunResult {
    /// `major_count <= m + n`.
    pub fn bound_holds(&self) -> bool {
        self.major_count <= self.pairs
    }

    pub fn objective(&self) -> Option<&Rational> {
        match &self.status {
            RunStatus::Solved { objective, .. } => Some(objective),
            _ => None,
        }
    }
}

struct Run<'a> {
    lp: &'a CanonicalLp,
    cfg: &'a EngineConfig,
    t: EqTableau,
    /// Original column of each current column.
    col_map: Vec<usize>,
    /// Original row of each current row (gap row excluded).
    row_map: Vec<usize>,
    orig_m: usize,
    orig_n: usize,
    history: SelectionHistory,
    trace: PivotTrace,
    major: usize,
    minor: usize,
    fixes: usize,
    eliminated: Vec<usize>,
    underdetermined: usize,
    falsifications: Vec<Falsification>,
}

impl Run<'_> {
    fn step_index(&self) -> usize {
        self.trace.steps.len() + 1
    }

    fn record(&mut self, mut step: TraceStep) {
        step.step = self.step_index();
        step.snapshot = Snapshot::take(&self.t, &self.cfg.snapshots);
        self.trace.steps.push(step);
    }

    fn lift(&self, z: &EqSolution) -> EqSolution {
        let mut full = vec![Rational::zero(); 2 * (self.orig_m + self.orig_n)];
        for (j, v) in z.z.iter().enumerate() {
            full[self.col_map[j]] = v.clone();
        }
        EqSolution::new(self.orig_m, self.orig_n, full)
    }

    /// Basic solution when it is nonnegative and satisfies every row.
    fn current_solution(&self) -> Option<EqSolution> {
        let z = self.t.basic_solution()?;
        (z.z.iter().all(|v| !v.is_negative()) && self.t.satisfies(&z.z)).then_some(z)
    }

    /// Solved when the lifted point passes the full check on the original LP.
    fn solved(&self, z: &EqSolution) -> Option<RunStatus> {
        let lifted = self.lift(z);
        let report = verify_eq_solution(self.lp, &lifted).ok()?;
        report.passed().then(|| RunStatus::Solved {
            x: lifted.x().to_vec(),
            y: lifted.y().to_vec(),
            objective: report.primal_objective.clone(),
            solution: lifted,
        })
    }

    fn finish(&self, status: RunStatus) -> RunStatus {
        match status {
            s @ RunStatus::Solved { .. } => s,
            other if !self.eliminated.is_empty() => RunStatus::Reduced {
                eliminated_rows: self.eliminated.clone(),
                child: Box::new(other),
            },
            other => other,
        }
    }

    fn execute(&mut self) -> RunStatus {
        let cap = self.cfg.cap_for(self.orig_m + self.orig_n);
        loop {
            if let Some(z) = self.current_solution() {
                return match self.solved(&z) {
                    Some(s) => s,
                    None => self.finish(RunStatus::Stalled {
                        reason: "basic solution solves the tableau but not the original system"
                            .into(),
                    }),
                };
            }
            if self.major + self.minor >= cap {
                return self.finish(RunStatus::PivotCapExceeded { cap });
            }

            if !self.t.gap_rhs().is_zero() {
                if self.t.gap_rhs().is_negative() {
                    let gap = self.t.gap_row();
                    self.t.negate_row(gap);
                    self.record(TraceStep::new(Phase::Normalize));
                }
                if let Some(status) = self.major_step() {
                    return self.finish(status);
                }
                continue;
            }

            match minor_select(&self.t) {
                MinorSelection::Pivot { row, col } => {
                    self.t
                        .pivot_in_place(row, col)
                        .expect("minor pivot entry is nonzero");
                    self.minor += 1;
                    let idx = self.step_index();
                    self.history.records.push(SelectionRecord {
                        phase: Phase::Minor,
                        column: self.col_map[col],
                        row: self.row_map[row],
                        tableau_index: idx,
                    });
                    self.record(TraceStep::pivot(Phase::Minor, row, col, None));
                }
                MinorSelection::Block {
                    row,
                    col,
                    partner_row,
                    partner_col,
                } => {
                    self.t
                        .block_pivot((row, partner_col), (partner_row, col))
                        .expect("block pivot entries are nonzero");
                    self.minor += 1;
                    let idx = self.step_index();
                    for (r, c) in [(row, partner_col), (partner_row, col)] {
                        self.history.records.push(SelectionRecord {
                            phase: Phase::Minor,
                            column: self.col_map[c],
                            row: self.row_map[r],
                            tableau_index: idx,
                        });
                    }
                    let mut step = TraceStep::pivot(Phase::Minor, row, partner_col, None);
                    step.partner = Some((partner_row, col));
                    self.record(step);
                }
                MinorSelection::NoNegativeQ => {
                    return self.finish(RunStatus::Stalled {
                        reason: "gap and negative right-hand sides are zero but the basic \
                                 solution does not satisfy the gap row"
                            .into(),
                    })
                }
                MinorSelection::ZeroPivots => {
                    return self.finish(RunStatus::Stalled {
                        reason: "every minor candidate has a zero complementary pivot entry".into(),
                    })
                }
                MinorSelection::AllBottomZero => match degenerate_fix(&self.t, &self.cfg.epsilon) {
                    Ok((next, FixOutcome::Added { row, epsilon, .. })) => {
                        self.t = next;
                        self.fixes += 1;
                        let mut step = TraceStep::new(Phase::Fix);
                        step.row = Some(row);
                        step.factor = Some(epsilon);
                        self.record(step);
                    }
                    Ok((_, FixOutcome::Reduce { .. })) => unreachable!(),
                    Err(row) => {
                        if self.eliminated.len() >= self.orig_m + self.orig_n
                            || self.t.pairs() == 0
                        {
                            return self.finish(RunStatus::Stalled {
                                reason: "reduction depth exhausted".into(),
                            });
                        }
                        let k = self.t.pairs();
                        self.t = self.t.without_pair(row).expect("row in range");
                        self.eliminated.push(self.row_map[row]);
                        self.row_map.remove(row);
                        self.col_map.remove(row + k);
                        self.col_map.remove(row);
                        let mut step = TraceStep::new(Phase::Reduce);
                        step.row = Some(row);
                        self.record(step);
                    }
                },
            }
        }
    }

    fn check_bound(&mut self, step: usize) {
        let pairs = self.orig_m + self.orig_n;
        if self.major == pairs + 1 {
            self.falsifications.push(Falsification {
                kind: FalsificationKind::IterationBoundViolated,
                step,
                detail: format!("major pivot {} exceeds m + n = {pairs}", self.major),
            });
        }
    }

    /// One major step; `Some` when the run ends here.
    fn major_step(&mut self) -> Option<RunStatus> {
        let Some(col) = major_select(&self.t) else {
            return Some(RunStatus::NoSolution {
                reason: NoSolutionReason::NoPositiveEntry,
            });
        };
        let original = self.col_map[col];
        let class = classify_selection(&self.history, original);
        match class {
            Classification::Repeat => {
                let first = self
                    .history
                    .records
                    .iter()
                    .find(|r| r.phase == Phase::Major && r.column == original)
                    .map_or(0, |r| r.tableau_index);
                let step = self.step_index();
                let mut s = TraceStep::new(Phase::Major);
                s.col = Some(col);
                s.classification = Some(class);
                self.record(s);
                self.falsifications.push(Falsification {
                    kind: FalsificationKind::RepeatSelection,
                    step,
                    detail: format!(
                        "column {} selected again (first selected at step {first})",
                        original + 1
                    ),
                });
                Some(RunStatus::Falsified {
                    kind: FalsificationKind::RepeatSelection,
                    step,
                    column: original,
                    first_selected_at: first,
                })
            }
            Classification::Reversal => {
                let mut s = TraceStep::new(Phase::Major);
                s.col = Some(col);
                s.classification = Some(class);
                self.record(s);
                let solved = self.current_solution().and_then(|z| self.solved(&z));
                Some(solved.unwrap_or(RunStatus::NoSolution {
                    reason: NoSolutionReason::Reversal,
                }))
            }
            Classification::Fresh => match major_pivot_row(&self.t, col) {
                Ok(row) => {
                    self.t
                        .pivot_in_place(row, col)
                        .expect("complementary pivot on a nonzero entry");
                    self.major += 1;
                    let idx = self.step_index();
                    self.history.records.push(SelectionRecord {
                        phase: Phase::Major,
                        column: original,
                        row: self.row_map[row],
                        tableau_index: idx,
                    });
                    self.record(TraceStep::pivot(Phase::Major, row, col, Some(class)));
                    self.check_bound(idx);
                    None
                }
                Err(MajorPivotError::ZeroPivot { row, col }) if block_partner(&self.t, row, col).is_some() => {
                    let (partner_row, partner_col) = block_partner(&self.t, row, col).unwrap();
                    self.t
                        .block_pivot((row, partner_col), (partner_row, col))
                        .expect("block pivot entries are nonzero");
                    self.major += 1;
                    self.underdetermined += 1;
                    let idx = self.step_index();
                    self.history.records.push(SelectionRecord {
                        phase: Phase::Major,
                        column: original,
                        row: self.row_map[partner_row],
                        tableau_index: idx,
                    });
                    let mut step = TraceStep::pivot(Phase::Major, row, partner_col, Some(class));
                    step.partner = Some((partner_row, col));
                    step.underdetermined = true;
                    self.record(step);
                    self.check_bound(idx);
                    None
                }
                Err(err) => {
                    self.underdetermined += 1;
                    let mut s = TraceStep::new(Phase::Major);
                    s.col = Some(col);
                    s.classification = Some(class);
                    s.underdetermined = true;
                    self.record(s);
                    Some(RunStatus::Stalled {
                        reason: match err {
                            MajorPivotError::ZeroPivot { row, col } => format!(
                                "complementary major pivot entry ({}, {}) is zero",
                                row + 1,
                                col + 1
                            ),
                            MajorPivotError::ComplementNotBasic { col } => {
                                format!("complement of column {} is not basic", col + 1)
                            }
                        },
                    })
                }
            },
        }
    }
}

/// Runs the complementary pivoting algorithm on `lp`.
pub fn run(lp: &CanonicalLp, cfg: &EngineConfig) -> RunResult {
    let t = cfg.initial_tableau(lp);
    let (m, n) = (lp.m(), lp.n());
    let k = m + n;
    let mut state = Run {
        lp,
        cfg,
        col_map: (0..2 * k).collect(),
        row_map: (0..k).collect(),
        orig_m: m,
        orig_n: n,
        history: SelectionHistory::new(k),
        trace: PivotTrace {
            header: TraceHeader {
                lp: lp.clone(),
                config: cfg.clone(),
            },
            initial: Snapshot::take(&t, &cfg.snapshots),
            steps: Vec::new(),
        },
        t,
        major: 0,
        minor: 0,
        fixes: 0,
        eliminated: Vec::new(),
        underdetermined: 0,
        falsifications: Vec::new(),
    };
    let status = state.execute();
    RunResult {
        status,
        major_count: state.major,
        minor_count: state.minor,
        total_pivots: state.major + state.minor,
        pairs: k,
        fixes: state.fixes,
        reductions: state.eliminated.len(),
        underdetermined_steps: state.underdetermined,
        falsifications: state.falsifications,
        history: state.history,
        trace: state.trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| ints(r)).collect()
    }

    fn illustration() -> CanonicalLp {
        CanonicalLp::from_ints(&[&[1, 1], &[1, 0]], &[5, 2], &[2, 1])
    }

    fn printed_first() -> EqTableau {
        let rows = mat(&[
            &[5, 2, -1, 0, 1, 0, 0, 0, 5],
            &[5, 2, -1, -1, 0, 1, 0, 0, 2],
            &[4, 1, -2, -1, 0, 0, 1, 0, -2],
            &[4, 2, -2, -1, 0, 0, 0, 1, -2],
            &[5, 2, -2, -1, 0, 0, 0, 0, 0],
        ]);
        EqTableau::from_rows(2, 2, rows, vec![Some(4), Some(5), Some(6), Some(7)]).unwrap()
    }

    fn printed_fourth() -> EqTableau {
        let rows = mat(&[
            &[1, 0, 0, 0, 0, 0, 0, -1, 1],
            &[0, 9, 0, 0, 1, 1, -7, 12, 9],
            &[0, -7, 1, 0, -1, 0, 5, -10, -5],
            &[0, 9, 0, 1, 2, 0, -7, 12, 12],
            &[0, 1, 0, 0, 0, 0, -1, 1, 1],
        ]);
        EqTableau::from_rows(2, 2, rows, vec![Some(0), Some(5), Some(2), Some(3)]).unwrap()
    }

    #[test]
    fn major_select_on_printed_tableaux() {
        assert_eq!(major_select(&printed_first()), Some(0));
        // Columns 2 and 8 tie at 1; the smaller index wins.
        assert_eq!(major_select(&printed_fourth()), Some(1));
    }

    #[test]
    fn major_select_without_positive_entry() {
        let mut rows = mat(&[&[1, 0, 1], &[-1, 0, 1]]);
        rows[0][2] = int(3);
        let t = EqTableau::from_rows(1, 0, rows, vec![Some(0)]).unwrap();
        assert_eq!(major_select(&t), None);
    }

    #[test]
    fn major_pivot_on_printed_first() {
        let t = major_pivot(&printed_first(), 0).unwrap();
        assert_eq!(t.row(4), ints(&[0, 0, -1, -1, -1, 0, 0, 0, -5]).as_slice());
        assert!(t.is_basic(0));
        assert!(!t.is_basic(4));
    }

    #[test]
    fn major_pivot_on_basic_column_is_identity() {
        // Column 4 is basic in row 0; re-pivoting there changes nothing.
        let t = printed_first();
        assert_eq!(t.gj_pivot(0, 4).unwrap(), t);
    }

    #[test]
    fn major_pivot_zero_entry() {
        let t = build_eq(&illustration(), &int(0));
        // Column 2 (x1) pairs with column 6, basic in row 2, whose x1 entry is 0.
        assert_eq!(
            major_pivot(&t, 2),
            Err(MajorPivotError::ZeroPivot { row: 2, col: 2 })
        );
    }

    #[test]
    fn minor_select_orders_by_magnitude() {
        // Four pairs; rows 0..3 with q = (3, -1, -4, 2), basic columns 4..8.
        let mut rows = vec![vec![int(0); 9]; 5];
        for i in 0..4 {
            rows[i][4 + i] = int(1);
        }
        for (i, q) in [3, -1, -4, 2].into_iter().enumerate() {
            rows[i][8] = int(q);
        }
        rows[1][1] = int(2);
        rows[2][2] = int(5);
        rows[4][1] = int(1);
        rows[4][2] = int(-3);
        let t = EqTableau::from_rows(2, 2, rows, (4..8).map(Some).collect()).unwrap();
        assert_eq!(minor_candidates(&t), vec![1, 2]);
        assert_eq!(minor_select(&t), MinorSelection::Pivot { row: 1, col: 1 });

        let mut zero_first = t.rows().to_vec();
        zero_first[1][1] = int(0);
        let t2 = EqTableau::from_rows(2, 2, zero_first, (4..8).map(Some).collect()).unwrap();
        assert_eq!(minor_select(&t2), MinorSelection::Pivot { row: 2, col: 2 });

        let mut bottomless = t.rows().to_vec();
        bottomless[4][1] = int(0);
        bottomless[4][2] = int(0);
        let t3 = EqTableau::from_rows(2, 2, bottomless, (4..8).map(Some).collect()).unwrap();
        assert_eq!(minor_select(&t3), MinorSelection::AllBottomZero);
    }

    #[test]
    fn minor_select_without_negative_q() {
        assert_eq!(minor_select(&printed_fourth()), MinorSelection::Pivot { row: 2, col: 6 });
        let t = build_eq(&CanonicalLp::from_ints(&[&[1]], &[1], &[-1]), &int(0));
        assert_eq!(minor_select(&t), MinorSelection::NoNegativeQ);
    }

    #[test]
    fn degenerate_fix_adds_scaled_row() {
        // Pairs: 2. Row 0 q = 4 with basic column 2; row 1 q = -1, basic 3.
        // Gap row positive at column 0 (pair of 2), zero at column 1.
        let rows = mat(&[&[1, 2, 1, 0, 4], &[-3, 0, 0, 1, -1], &[1, 0, 0, 0, 0]]);
        let t = EqTableau::from_rows(1, 1, rows, vec![Some(2), Some(3)]).unwrap();
        assert_eq!(minor_select(&t), MinorSelection::AllBottomZero);
        let (next, outcome) = degenerate_fix(&t, &EpsilonRule::HalfMinRatio).unwrap();
        assert_eq!(
            outcome,
            FixOutcome::Added {
                row: 0,
                column: 0,
                epsilon: int(1)
            }
        );
        assert_eq!(next.row(2), ints(&[2, 2, 1, 0, 4]).as_slice());
        // The blocked candidate (column 1) now has a nonzero gap entry.
        assert!(!next.entry(2, 1).is_zero());
    }

    #[test]
    fn degenerate_fix_keeps_positive_entries_positive() {
        let rows = mat(&[&[-4, 2, 1, 0, 4], &[0, 0, 0, 1, -1], &[1, 0, 0, 0, 0]]);
        let t = EqTableau::from_rows(1, 1, rows, vec![Some(2), Some(3)]).unwrap();
        let (next, outcome) = degenerate_fix(&t, &EpsilonRule::HalfMinRatio).unwrap();
        let FixOutcome::Added { epsilon, .. } = outcome else { panic!() };
        assert_eq!(epsilon, rational::ratio(1, 8));
        assert_eq!(next.entry(2, 0), &rational::ratio(1, 2));
        assert!(next.gap_rhs().is_positive());
    }

    #[test]
    fn degenerate_fix_requests_reduction() {
        // Only positive gap column's row has q < 0.
        let rows = mat(&[&[1, 0, 1, 0, -4], &[0, 0, 0, 1, -1], &[1, 0, 0, 0, 0]]);
        let t = EqTableau::from_rows(1, 1, rows, vec![Some(2), Some(3)]).unwrap();
        assert_eq!(degenerate_fix(&t, &EpsilonRule::HalfMinRatio).unwrap_err(), 1);
    }

    #[test]
    fn classification() {
        let mut h = SelectionHistory::new(4);
        h.records.push(SelectionRecord {
            phase: Phase::Major,
            column: 0,
            row: 0,
            tableau_index: 1,
        });
        assert_eq!(classify_selection(&h, 4), Classification::Reversal);
        assert_eq!(classify_selection(&h, 0), Classification::Repeat);
        assert_eq!(classify_selection(&h, 1), Classification::Fresh);
        h.records.push(SelectionRecord {
            phase: Phase::Minor,
            column: 4,
            row: 0,
            tableau_index: 2,
        });
        assert_eq!(h.reversed(), vec![0]);
    }

    #[test]
    fn solves_the_worked_instance() {
        let r = run(&illustration(), &EngineConfig::default());
        let RunStatus::Solved { x, y, objective, .. } = &r.status else {
            panic!("{:?}", r.status);
        };
        assert_eq!(objective, &int(7));
        assert_eq!(x, &ints(&[2, 3]));
        assert_eq!(y, &ints(&[1, 1]));
        assert!(r.major_count <= 4);
        assert!(r.bound_holds());
    }

    #[test]
    fn infeasible_instance_has_no_solution() {
        let lp = CanonicalLp::from_ints(&[&[1], &[-1]], &[1, -2], &[1]);
        let r = run(&lp, &EngineConfig::default());
        assert!(matches!(r.status, RunStatus::NoSolution { .. }), "{:?}", r.status);
    }

    #[test]
    fn unbounded_instance_has_no_solution() {
        let lp = CanonicalLp::from_ints(&[&[0]], &[1], &[1]);
        let r = run(&lp, &EngineConfig::default());
        assert!(matches!(r.status, RunStatus::NoSolution { .. }), "{:?}", r.status);
    }

    #[test]
    fn runs_are_deterministic() {
        let lp = illustration();
        let a = run(&lp, &EngineConfig::default());
        let b = run(&lp, &EngineConfig::default());
        assert_eq!(a, b);
        assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    }
}
