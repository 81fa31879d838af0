//! Differential runs of the engine against the simplex oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run, EngineConfig, FalsificationKind, RunResult, RunStatus};
use crate::format::emit_instance;
use crate::generators::{generate, GeneratorSpec};
use crate::lp::{canonicalize, Constraint, GeneralLp};
use crate::oracle::{simplex_solve, verify_certificate, OracleResult, OracleStatus};
use crate::rational::{self, Rational};
use crate::tableau::verify_eq_solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisagreeKind {
    /// Both report an optimum but the objective values differ.
    WrongOptimum,
    /// The engine's solution failed the independent re-check.
    UnverifiedSolution,
    /// The engine solved a problem the oracle found infeasible or unbounded.
    SolvedButOracleNoOptimum,
    /// The engine reported no solution for a problem with an optimum.
    MissedOptimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "kind")]
pub enum Verdict {
    Agree,
    Disagree(DisagreeKind),
    EngineInconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Agree => f.write_str("agree"),
            Verdict::Disagree(kind) => write!(
                f,
                "disagree:{}",
                serde_json::to_value(kind).unwrap().as_str().unwrap()
            ),
            Verdict::EngineInconclusive => f.write_str("engine_inconclusive"),
        }
    }
}

/// Verdict for one pair of outcomes. `engine_verified` is the result of
/// re-checking a Solved status; it is ignored otherwise.
pub fn classify(engine: &RunStatus, engine_verified: bool, oracle: &OracleStatus) -> Verdict {
    match (engine, oracle) {
        (RunStatus::Solved { .. }, _) if !engine_verified => {
            Verdict::Disagree(DisagreeKind::UnverifiedSolution)
        }
        (RunStatus::Solved { objective, .. }, OracleStatus::Optimal { objective: o, .. }) => {
            if objective == o {
                Verdict::Agree
            } else {
                Verdict::Disagree(DisagreeKind::WrongOptimum)
            }
        }
        (RunStatus::Solved { .. }, _) => Verdict::Disagree(DisagreeKind::SolvedButOracleNoOptimum),
        (RunStatus::NoSolution { .. }, OracleStatus::Optimal { .. }) => {
            Verdict::Disagree(DisagreeKind::MissedOptimum)
        }
        (RunStatus::NoSolution { .. }, _) => Verdict::Agree,
        _ => Verdict::EngineInconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRecord {
    pub id: String,
    pub m: usize,
    pub n: usize,
    pub pairs: usize,
    pub engine_status: String,
    #[serde(with = "rational::serde_text::option")]
    pub engine_objective: Option<Rational>,
    pub engine_verified: bool,
    pub major_count: usize,
    pub minor_count: usize,
    pub total_pivots: usize,
    pub falsifications: Vec<FalsificationKind>,
    pub oracle_status: String,
    #[serde(with = "rational::serde_text::option")]
    pub oracle_objective: Option<Rational>,
    pub oracle_certified: bool,
    pub oracle_pivots: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub bound_holds: bool,
    /// Path of the persisted trace, relative to the campaign directory.
    pub trace_ref: Option<String>,
}

impl ComparisonRecord {
    /// Worth persisting: anything but a clean agreement.
    pub fn is_finding(&self) -> bool {
        self.verdict != Verdict::Agree || !self.falsifications.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub record: ComparisonRecord,
    pub lp: GeneralLp,
    pub engine: RunResult,
    pub oracle: OracleResult,
}

pub fn differential_run(id: &str, lp: &GeneralLp, cfg: &EngineConfig) -> Comparison {
    let canon = canonicalize(lp);
    let engine = run(&canon, cfg);
    let oracle = simplex_solve(&canon);
    let engine_verified = match &engine.status {
        RunStatus::Solved { solution, .. } => verify_eq_solution(&canon, solution)
            .map(|r| r.passed())
            .unwrap_or(false),
        _ => false,
    };
    let verdict = classify(&engine.status, engine_verified, &oracle.status);
    let mut record = ComparisonRecord {
        id: id.to_string(),
        m: canon.m(),
        n: canon.n(),
        pairs: canon.m() + canon.n(),
        engine_status: engine.status.name().to_string(),
        engine_objective: engine.objective().cloned(),
        engine_verified,
        major_count: engine.major_count,
        minor_count: engine.minor_count,
        total_pivots: engine.total_pivots,
        falsifications: engine.falsifications.iter().map(|f| f.kind).collect(),
        oracle_status: oracle.status.name().to_string(),
        oracle_objective: oracle.status.objective().cloned(),
        oracle_certified: verify_certificate(&canon, &oracle),
        oracle_pivots: oracle.pivot_count,
        verdict,
        bound_holds: engine.bound_holds(),
        trace_ref: None,
    };
    if record.is_finding() {
        record.trace_ref = Some(format!("counterexamples/{id}/trace.jsonl"));
    }
    Comparison {
        record,
        lp: lp.clone(),
        engine,
        oracle,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictCounts {
    pub agree: usize,
    pub disagree: usize,
    pub engine_inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport {
    pub label: String,
    pub config: EngineConfig,
    pub instances: usize,
    pub verdicts: VerdictCounts,
    pub disagree_by_kind: BTreeMap<String, usize>,
    pub engine_statuses: BTreeMap<String, usize>,
    pub oracle_statuses: BTreeMap<String, usize>,
    pub bound_violations: usize,
    pub falsification_events: BTreeMap<String, usize>,
    pub instances_with_falsification: usize,
    pub oracle_certificate_failures: usize,
    pub engine_verification_failures: usize,
    pub max_major_count: usize,
    pub max_total_pivots: usize,
    pub counterexamples: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub wall_ms: u128,
    pub instances: usize,
    pub parallel: bool,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub comparisons: Vec<Comparison>,
    pub report: CampaignReport,
    pub timing: Timing,
}

impl CampaignReport {
    pub fn from_records(label: &str, config: &EngineConfig, records: &[ComparisonRecord]) -> Self {
        let mut verdicts = VerdictCounts {
            agree: 0,
            disagree: 0,
            engine_inconclusive: 0,
        };
        let mut disagree_by_kind = BTreeMap::new();
        let mut engine_statuses = BTreeMap::new();
        let mut oracle_statuses = BTreeMap::new();
        let mut falsification_events = BTreeMap::new();
        for r in records {
            match r.verdict {
                Verdict::Agree => verdicts.agree += 1,
                Verdict::Disagree(kind) => {
                    verdicts.disagree += 1;
                    let key = serde_json::to_value(kind).unwrap().as_str().unwrap().to_string();
                    *disagree_by_kind.entry(key).or_insert(0) += 1;
                }
                Verdict::EngineInconclusive => verdicts.engine_inconclusive += 1,
            }
            *engine_statuses.entry(r.engine_status.clone()).or_insert(0) += 1;
            *oracle_statuses.entry(r.oracle_status.clone()).or_insert(0) += 1;
            for f in &r.falsifications {
                let key = serde_json::to_value(f).unwrap().as_str().unwrap().to_string();
                *falsification_events.entry(key).or_insert(0) += 1;
            }
        }
        CampaignReport {
            label: label.to_string(),
            config: config.clone(),
            instances: records.len(),
            verdicts,
            disagree_by_kind,
            engine_statuses,
            oracle_statuses,
            bound_violations: records.iter().filter(|r| !r.bound_holds).count(),
            falsification_events,
            instances_with_falsification: records
                .iter()
                .filter(|r| !r.falsifications.is_empty())
                .count(),
            oracle_certificate_failures: records.iter().filter(|r| !r.oracle_certified).count(),
            engine_verification_failures: records
                .iter()
                .filter(|r| r.engine_status == "solved" && !r.engine_verified)
                .count(),
            max_major_count: records.iter().map(|r| r.major_count).max().unwrap_or(0),
            max_total_pivots: records.iter().map(|r| r.total_pivots).max().unwrap_or(0),
            counterexamples: records
                .iter()
                .filter(|r| r.is_finding())
                .map(|r| r.id.clone())
                .collect(),
        }
    }

    pub fn has_evidence(&self) -> bool {
        self.verdicts.disagree > 0 || self.instances_with_falsification > 0
    }

    /// Exit status for a campaign: 0 all agree, 2 evidence found, 3 only
    /// inconclusive engine runs.
    pub fn exit_code(&self) -> i32 {
        if self.has_evidence() {
            2
        } else if self.verdicts.engine_inconclusive > 0 {
            3
        } else {
            0
        }
    }
}

/// Runs every spec through both solvers. Results keep the order of
/// `specs` whether or not the work is spread over threads.
pub fn fuzz(label: &str, specs: &[GeneratorSpec], cfg: &EngineConfig, parallel: bool) -> Campaign {
    let start = Instant::now();
    let one = |s: &GeneratorSpec| {
        let lp = generate(s).expect("corpus specs are valid");
        differential_run(&s.id(), &lp, cfg)
    };
    let comparisons: Vec<Comparison> = if parallel {
        specs.par_iter().map(one).collect()
    } else {
        specs.iter().map(one).collect()
    };
    let records: Vec<ComparisonRecord> = comparisons.iter().map(|c| c.record.clone()).collect();
    let report = CampaignReport::from_records(label, cfg, &records);
    Campaign {
        comparisons,
        report,
        timing: Timing {
            wall_ms: start.elapsed().as_millis(),
            instances: specs.len(),
            parallel,
        },
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CsvRow<'a> {
    id: &'a str,
    m: usize,
    n: usize,
    engine_status: &'a str,
    oracle_status: &'a str,
    verdict: String,
    major_count: usize,
    minor_count: usize,
    bound_holds: bool,
}

pub fn csv_report(records: &[ComparisonRecord]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            id: &r.id,
            m: r.m,
            n: r.n,
            engine_status: &r.engine_status,
            oracle_status: &r.oracle_status,
            verdict: r.verdict.to_string(),
            major_count: r.major_count,
            minor_count: r.minor_count,
            bound_holds: r.bound_holds,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.csv`, `summary.json`, `records.jsonl`, `timing.json` and
/// one `counterexamples/<id>/` directory per finding.
pub fn write_campaign(campaign: &Campaign, dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(dir)?;
    let records: Vec<ComparisonRecord> =
        campaign.comparisons.iter().map(|c| c.record.clone()).collect();
    fs::write(dir.join("report.csv"), csv_report(&records)?)?;
    let mut summary = serde_json::to_string_pretty(&campaign.report)?;
    summary.push('\n');
    fs::write(dir.join("summary.json"), summary)?;
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    fs::write(dir.join("records.jsonl"), lines)?;
    fs::write(
        dir.join("timing.json"),
        serde_json::to_string_pretty(&campaign.timing)? + "\n",
    )?;
    for c in campaign.comparisons.iter().filter(|c| c.record.is_finding()) {
        let sub = dir.join("counterexamples").join(&c.record.id);
        fs::create_dir_all(&sub)?;
        fs::write(sub.join("instance.lp"), emit_instance(&c.lp))?;
        fs::write(sub.join("trace.jsonl"), c.engine.trace.to_jsonl())?;
        fs::write(
            sub.join("record.json"),
            serde_json::to_string_pretty(&c.record)? + "\n",
        )?;
    }
    Ok(())
}

fn without_constraint(lp: &GeneralLp, i: usize) -> GeneralLp {
    let mut out = lp.clone();
    out.constraints.remove(i);
    out
}

fn without_variable(lp: &GeneralLp, j: usize) -> GeneralLp {
    let mut out = lp.clone();
    out.objective.remove(j);
    out.bounds.remove(j);
    for c in &mut out.constraints {
        c.coeffs.remove(j);
    }
    out
}

/// Candidate one-step simplifications, in the order they are tried.
fn reductions(lp: &GeneralLp) -> Vec<GeneralLp> {
    let mut out = Vec::new();
    for i in 0..lp.constraints.len() {
        out.push(without_constraint(lp, i));
    }
    if lp.num_vars() > 1 {
        for j in 0..lp.num_vars() {
            out.push(without_variable(lp, j));
        }
    }
    for j in 0..lp.num_vars() {
        if !lp.objective[j].is_zero() {
            let mut next = lp.clone();
            next.objective[j] = Rational::zero();
            out.push(next);
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        for j in 0..c.coeffs.len() {
            if !c.coeffs[j].is_zero() {
                let mut next = lp.clone();
                next.constraints[i] = Constraint {
                    coeffs: {
                        let mut v = c.coeffs.clone();
                        v[j] = Rational::zero();
                        v
                    },
                    ..c.clone()
                };
                out.push(next);
            }
        }
    }
    out
}

/// Greedy minimization: applies the first simplification that keeps
/// `predicate` true, until none does.
pub fn shrink<P>(id: &str, lp: &GeneralLp, cfg: &EngineConfig, predicate: P) -> GeneralLp
where
    P: Fn(&ComparisonRecord) -> bool,
{
    let mut current = lp.clone();
    'outer: loop {
        for candidate in reductions(&current) {
            if predicate(&differential_run(id, &candidate, cfg).record) {
                current = candidate;
                continue 'outer;
            }
        }
        return current;
    }
}
