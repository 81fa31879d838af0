//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any failed.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqpivot::engine::{run, EngineConfig, RunStatus};
use eqpivot::generators::{corpus, generate, regenerate, GeneratorSpec};
use eqpivot::harness::{differential_run, fuzz, write_campaign, DisagreeKind, Verdict};
use eqpivot::lp::canonicalize;
use eqpivot::oracle::{
    complementary_slackness, simplex_solve, simplex_solve_with, verify_certificate, OracleStatus,
    PivotRule,
};
use eqpivot::rational::{int, ratio, Rational};
use eqpivot::reduction::{reduce_to_pr, shifted_solution, vanishing_unit_witness, PrSystem};
use eqpivot::rowspace::same_row_space;
use eqpivot::tableau::{build_eq, verify_eq_solution, EqSolution, EqTableau};
use eqpivot::trace::{replay, PivotTrace};
use eqpivot::{emit_instance, CanonicalLp};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn worked_lp() -> CanonicalLp {
    canonicalize(&generate(&GeneratorSpec::PaperIllustration).unwrap())
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    if elapsed < limit {
        Ok(String::new())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn reduction_on_fourth_tableau() -> Outcome {
    let start = Instant::now();
    let t = EqTableau::from_json_str(&fixture("mq4.json")).map_err(|e| e.to_string())?;
    let z = EqSolution::new(2, 2, ints(&[1, 1, 2, 3, 0, 0, 0, 0]));
    let pr = reduce_to_pr(&t, &z, (7, 1)).map_err(|e| e.to_string())?;
    // Columns 8, 2, 1, 6, 3, 4 of the printed tableau, 1-based.
    let expected_p = [
        [-1, 0, 1, 0, 0, 0],
        [12, 9, 0, 1, 0, 0],
        [-10, -7, 0, 0, 1, 0],
        [12, 9, 0, 0, 0, 1],
        [1, 1, 0, 0, 0, 0],
    ];
    let expected_p: Vec<Vec<Rational>> = expected_p.iter().map(|r| ints(r)).collect();
    ensure!(pr.columns == vec![7, 1, 0, 5, 2, 3], "columns {:?}", pr.columns);
    ensure!(pr.p == expected_p, "P differs: {:?}", pr.p);
    ensure!(pr.r == ints(&[1, 9, -5, 12, 1]), "r differs: {:?}", pr.r);
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("P = [C8|C2|C1|C6|C3|C4], r = (1, 9, -5, 12, 1)".into())
}

fn construction_fidelity() -> Outcome {
    let start = Instant::now();
    let built = build_eq(&worked_lp(), &int(1));
    let printed = EqTableau::from_json_str(&fixture("mq1_printed.json")).map_err(|e| e.to_string())?;
    let fourth = EqTableau::from_json_str(&fixture("mq4.json")).map_err(|e| e.to_string())?;
    for row in [0, 1, 2, 4] {
        ensure!(
            built.row(row) == printed.row(row),
            "row {} differs from the printed first tableau",
            row + 1
        );
    }
    let (b4, p4) = (built.row(3), printed.row(3));
    ensure!(b4[..8] == p4[..8], "row 4 coefficients differ");
    ensure!(
        b4[8] == int(-1) && p4[8] == int(-2),
        "row 4 right-hand sides are {} and {}",
        b4[8],
        p4[8]
    );
    ensure!(
        same_row_space(built.rows(), fourth.rows()),
        "reconstructed tableau is not row-equivalent to the printed fourth tableau"
    );
    ensure!(
        !same_row_space(printed.rows(), fourth.rows()),
        "printed first tableau is row-equivalent to the fourth; typo hypothesis unsupported"
    );
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("rows 1,2,3,5 exact; q4 = -1 (printed -2); row space equals the fourth tableau".into())
}

fn worked_instance() -> Outcome {
    let lp = worked_lp();
    let r = run(&lp, &EngineConfig::default());
    let RunStatus::Solved {
        solution,
        x,
        y,
        objective,
    } = &r.status
    else {
        return Err(format!("engine status {}", r.status.name()));
    };
    ensure!(*objective == int(7), "engine objective {objective}");
    ensure!(*x == ints(&[2, 3]), "engine x {x:?}");
    ensure!(*y == ints(&[1, 1]), "engine y {y:?}");
    let report = verify_eq_solution(&lp, solution).map_err(|e| e.to_string())?;
    ensure!(report.passed(), "verify_eq_solution failed: {report:?}");
    ensure!(report.complementary(), "complementarity violated");
    let o = simplex_solve(&lp);
    let OracleStatus::Optimal {
        x: ox,
        y: oy,
        objective: oobj,
    } = &o.status
    else {
        return Err(format!("oracle status {}", o.status.name()));
    };
    ensure!(*oobj == int(7) && *ox == ints(&[2, 3]) && *oy == ints(&[1, 1]), "oracle optimum differs");
    ensure!(complementary_slackness(&lp, x, y), "engine pair fails complementary slackness");
    ensure!(complementary_slackness(&lp, ox, oy), "oracle pair fails complementary slackness");
    Ok(format!(
        "objective 7 at x = (2, 3), y = (1, 1); major {} minor {}",
        r.major_count, r.minor_count
    ))
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    ratio(rng.random_range(lo..=hi), rng.random_range(1..=3))
}

fn random_pr(rng: &mut ChaCha8Rng) -> (PrSystem, Vec<Rational>) {
    let units = rng.random_range(1..=6);
    let mut p = Vec::with_capacity(units + 1);
    for i in 0..=units {
        let mut row = Vec::with_capacity(units + 2);
        if i < units {
            row.push(random_rational(rng, -5, 5));
            row.push(random_rational(rng, -5, 5));
        } else {
            row.push(random_rational(rng, 1, 5));
            row.push(random_rational(rng, 1, 5));
        }
        for u in 0..units {
            row.push(if u == i { int(1) } else { int(0) });
        }
        p.push(row);
    }
    let mut w: Vec<Rational> = (0..units + 2).map(|_| random_rational(rng, 0, 5)).collect();
    if (&w[0] + &w[1]).is_zero() {
        w[0] = int(1);
    }
    let r = p
        .iter()
        .map(|row| row.iter().zip(&w).fold(int(0), |acc, (a, b)| acc + a * b))
        .collect();
    (PrSystem::new(p, r).unwrap(), w)
}

fn shifted_solution_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut reported = 0;
    for case in 0..200 {
        let (pr, w) = random_pr(&mut rng);
        let s = shifted_solution(&pr, &w).map_err(|e| format!("case {case}: {e}"))?;
        for (row, rhs) in pr.p.iter().zip(&pr.r) {
            let lhs = row.iter().zip(&s.w).fold(int(0), |acc, (a, b)| acc + a * b);
            ensure!(lhs == *rhs, "case {case}: nonzero residual");
        }
        let negative: Vec<usize> = (0..pr.rows() - 1).filter(|&i| s.w[i + 2].is_negative()).collect();
        ensure!(negative == s.negative, "case {case}: negative components not reported");
        ensure!(s.w[0].is_zero(), "case {case}: first column still used");
        reported += usize::from(!s.negative.is_empty());
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "200 systems, zero residual; {reported} with reported negative components"
    ))
}

fn random_witness_case(rng: &mut ChaCha8Rng) -> (EqTableau, EqSolution, Vec<usize>) {
    let m = rng.random_range(1..=3);
    let n = rng.random_range(1..=3);
    let k = m + n;
    let width = 2 * k;
    let basis: Vec<usize> = (0..k).map(|i| if rng.random_bool(0.5) { i } else { i + k }).collect();
    let nonbasic: Vec<usize> = (0..width).filter(|j| !basis.contains(j)).collect();
    let mut z = vec![int(0); width];
    for &j in &nonbasic {
        z[j] = int(rng.random_range(0..=4));
    }
    let anchor = nonbasic[0];
    z[anchor] = int(rng.random_range(1..=4));
    for &b in &basis {
        z[b] = int(rng.random_range(1..=4));
    }
    let mut rows = vec![vec![int(0); width + 1]; k + 1];
    let mut negative = Vec::new();
    for i in 0..=k {
        for &j in &nonbasic {
            rows[i][j] = int(rng.random_range(-4..=4));
        }
        let others = nonbasic
            .iter()
            .filter(|&&j| j != anchor)
            .fold(int(0), |acc, &j| acc + &rows[i][j] * &z[j]);
        if i == k {
            // Gap row: zero right-hand side, zero on basic columns.
            rows[i][anchor] = -others / &z[anchor];
            continue;
        }
        rows[i][basis[i]] = int(1);
        let q = if rng.random_bool(0.5) {
            negative.push(i);
            int(-rng.random_range(1..=6))
        } else {
            int(rng.random_range(0..=6))
        };
        rows[i][anchor] = (&q - &z[basis[i]] - others) / &z[anchor];
        rows[i][width] = q;
    }
    if negative.is_empty() {
        let i = 0;
        let shift = &rows[i][width] + int(1) + int(rng.random_range(0..=2));
        // Lower q_0 below zero by moving weight off the basic column.
        rows[i][width] -= &shift;
        rows[i][anchor] -= shift / &z[anchor];
        negative.push(i);
    }
    if rng.random_bool(0.1) {
        // Listed component already zero: the witness must be z itself.
        let i = negative[0];
        let moved = z[basis[i]].clone();
        z[basis[i]] = int(0);
        rows[i][anchor] += moved / &z[anchor];
    }
    let t = EqTableau::from_rows(m, n, rows, basis.iter().map(|&b| Some(b)).collect()).unwrap();
    (t, EqSolution::new(m, n, z), negative)
}

fn vanishing_unit() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut unchanged = 0;
    for case in 0..200 {
        let (t, z_star, rows) = random_witness_case(&mut rng);
        ensure!(t.satisfies(&z_star.z), "case {case}: generator produced a non-solution");
        let w = vanishing_unit_witness(&t, &z_star, &rows).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(t.satisfies(&w.z), "case {case}: witness does not solve the system");
        let listed: Vec<&Rational> = rows.iter().map(|&r| &w.z[t.basis()[r].unwrap()]).collect();
        ensure!(
            listed.iter().all(|v| !v.is_negative()),
            "case {case}: negative listed component"
        );
        ensure!(listed.iter().any(|v| v.is_zero()), "case {case}: no listed component is zero");
        unchanged += usize::from(w == z_star);
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("200 triples; {unchanged} already had a zero listed component"))
}

fn oracle_soundness() -> Outcome {
    let start = Instant::now();
    let mut statuses = BTreeSet::new();
    for spec in corpus(1000, 6_000, 8, 8) {
        let lp = canonicalize(&generate(&spec).unwrap());
        let r = simplex_solve(&lp);
        ensure!(verify_certificate(&lp, &r), "{spec}: certificate rejected");
        statuses.insert(r.status.name());
    }
    ensure!(statuses.len() == 3, "statuses seen: {statuses:?}");
    let beale = canonicalize(&generate(&GeneratorSpec::Beale).unwrap());
    let bland = simplex_solve_with(&beale, PivotRule::Bland, Some(100))
        .map_err(|e| format!("Bland exceeded the budget after {} pivots", e.pivots))?;
    ensure!(verify_certificate(&beale, &bland), "Beale certificate rejected");
    ensure!(
        bland.status.objective() == Some(&ratio(5, 4)),
        "Beale optimum {:?}",
        bland.status.objective()
    );
    let naive = simplex_solve_with(&beale, PivotRule::Dantzig, Some(100));
    ensure!(naive.is_err(), "largest-coefficient rule terminated on Beale");
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "1000 certificates verified over {statuses:?}; Beale: Bland {} pivots, naive rule > 100",
        bland.pivot_count
    ))
}

fn campaign_config() -> EngineConfig {
    EngineConfig::default()
}

fn differential_campaign(dir: &Path) -> Outcome {
    let start = Instant::now();
    let cfg = campaign_config();
    let specs = corpus(1000, 7_000, 8, 8);
    let c = fuzz("random-1000", &specs, &cfg, true);
    write_campaign(&c, dir).map_err(|e| e.to_string())?;
    let rep = &c.report;
    let wrong = rep.disagree_by_kind.get("wrong_optimum").copied().unwrap_or(0);
    ensure!(wrong == 0, "{wrong} wrong optima");
    ensure!(rep.instances == 1000, "report covers {} instances", rep.instances);
    let v = &rep.verdicts;
    ensure!(v.agree + v.disagree + v.engine_inconclusive == 1000, "verdict counts do not sum");
    ensure!(rep.oracle_certificate_failures == 0, "oracle certificates rejected");
    ensure!(rep.engine_verification_failures == 0, "engine solutions rejected");
    let csv = fs::read_to_string(dir.join("report.csv")).map_err(|e| e.to_string())?;
    ensure!(csv.lines().count() == 1001, "csv has {} lines", csv.lines().count());

    for comp in c.comparisons.iter().filter(|c| c.record.is_finding()) {
        let id = &comp.record.id;
        let sub = dir.join("counterexamples").join(id);
        let lp = regenerate(id).map_err(|e| e.to_string())?;
        let stored = fs::read_to_string(sub.join("instance.lp")).map_err(|e| e.to_string())?;
        ensure!(emit_instance(&lp) == stored, "{id}: regenerated instance differs");
        let again = differential_run(id, &lp, &cfg);
        ensure!(again.record == comp.record, "{id}: rerun gives a different record");
        let text = fs::read_to_string(sub.join("trace.jsonl")).map_err(|e| e.to_string())?;
        let trace = PivotTrace::from_jsonl(&text).map_err(|e| format!("{id}: {e}"))?;
        let seq = replay(&trace).map_err(|e| format!("{id}: {e}"))?;
        ensure!(seq.len() == trace.steps.len() + 1, "{id}: short replay");
    }
    for r in c.comparisons.iter().map(|c| &c.record) {
        if let Verdict::Disagree(kind) = r.verdict {
            ensure!(r.oracle_certified, "{}: disagreement without a certified oracle", r.id);
            if kind == DisagreeKind::WrongOptimum {
                ensure!(r.engine_verified, "{}: unverified engine optimum", r.id);
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!(
        "agree {}, disagree {} {:?}, inconclusive {}; falsification events {:?}; \
         bound violations {} (max major {}); {} findings replayed",
        v.agree,
        v.disagree,
        rep.disagree_by_kind,
        v.engine_inconclusive,
        rep.falsification_events,
        rep.bound_violations,
        rep.max_major_count,
        rep.counterexamples.len()
    ))
}

fn klee_minty_specs() -> Vec<GeneratorSpec> {
    (1..=6).map(GeneratorSpec::klee_minty).collect()
}

fn klee_minty_sweep(dir: &Path) -> Outcome {
    let start = Instant::now();
    let specs = klee_minty_specs();
    let c = fuzz("klee-minty", &specs, &campaign_config(), true);
    write_campaign(&c, dir).map_err(|e| e.to_string())?;
    let mut table = Vec::new();
    for (d, comp) in (1..=6u32).zip(&c.comparisons) {
        let want = int(5).pow(d as i32);
        ensure!(
            comp.oracle.status.objective() == Some(&want),
            "d = {d}: oracle optimum {:?}",
            comp.oracle.status.objective()
        );
        ensure!(comp.record.pairs == 2 * d as usize, "d = {d}: m + n = {}", comp.record.pairs);
        table.push(format!(
            "d{d}:{}/{}/{}",
            comp.record.engine_status, comp.record.major_count, comp.record.pairs
        ));
    }
    let csv = fs::read_to_string(dir.join("report.csv")).map_err(|e| e.to_string())?;
    ensure!(csv.lines().count() == 7, "csv has {} lines", csv.lines().count());
    let summary = fs::read_to_string(dir.join("summary.json")).map_err(|e| e.to_string())?;
    serde_json::from_str::<serde_json::Value>(&summary).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "oracle optimum 5^d for d = 1..6; engine status/major/m+n {}",
        table.join(" ")
    ))
}

fn report_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "timing.json" {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism(first_random: &Path, first_km: &Path, scratch: &Path) -> Outcome {
    let cfg = campaign_config();
    let random = scratch.join("random");
    let km = scratch.join("km");
    write_campaign(&fuzz("random-1000", &corpus(1000, 7_000, 8, 8), &cfg, true), &random)
        .map_err(|e| e.to_string())?;
    write_campaign(&fuzz("klee-minty", &klee_minty_specs(), &cfg, true), &km)
        .map_err(|e| e.to_string())?;
    let mut files = 0;
    for (a, b) in [(first_random, &random), (first_km, &km)] {
        let (fa, fb) = (report_files(a), report_files(b));
        ensure!(fa.len() == fb.len(), "different file sets under {}", b.display());
        for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
            ensure!(na == nb && ba == bb, "{na} differs between runs");
        }
        files += fa.len();
    }
    Ok(format!("{files} report files byte-identical across two runs"))
}

fn main() {
    let scratch = tempfile::tempdir().expect("temp dir");
    let random = scratch.path().join("random-1");
    let km = scratch.path().join("km-1");
    let rerun = scratch.path().join("rerun");

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("reduction on the printed fourth tableau", Box::new(reduction_on_fourth_tableau)),
        ("construction fidelity", Box::new(construction_fidelity)),
        ("worked instance agreement", Box::new(worked_instance)),
        ("shifted solution identity", Box::new(shifted_solution_identity)),
        ("vanishing unit witness", Box::new(vanishing_unit)),
        ("oracle soundness", Box::new(oracle_soundness)),
        ("differential campaign", Box::new(|| differential_campaign(&random))),
        ("Klee-Minty sweep", Box::new(|| klee_minty_sweep(&km))),
        ("determinism", Box::new(|| determinism(&random, &km, &rerun))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
