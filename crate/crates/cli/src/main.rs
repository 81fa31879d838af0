use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use eqpivot::engine::{run, EngineConfig, RunResult, RunStatus, Theta};
use eqpivot::generators::{corpus, GeneratorSpec};
use eqpivot::harness::{self, Verdict};
use eqpivot::oracle::{simplex_solve, verify_certificate, OracleStatus};
use eqpivot::rational::{self, Human, Rational};
use eqpivot::reduction::reduce_to_pr;
use eqpivot::tableau::{EqSolution, EqTableau};
use eqpivot::trace::{replay, PivotTrace};
use eqpivot::{canonicalize, emit_instance, generate, parse_instance, GeneralLp};

const OK: u8 = 0;
const FAILURE: u8 = 1;
const EVIDENCE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

/// Complementary pivoting on the combined primal-dual tableau, checked
/// against an exact simplex.
#[derive(Parser)]
#[command(name = "eqpivot", version)]
struct Cli {
    /// Multiple of the gap row added to the other rows, as p/q.
    #[arg(long, global = true, value_parser = parse_rational, default_value = "1")]
    theta: Rational,
    /// Hard cap on engine pivots (default 4 (m + n)).
    #[arg(long, global = true)]
    pivot_cap: Option<usize>,
    /// Write the engine trace (JSON Lines) here.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pivoting engine on an instance file (`-` for stdin).
    Solve { file: String },
    /// Solve with the simplex oracle and print its certificate.
    Oracle { file: String },
    /// Run both solvers and compare.
    Diff { file: String },
    /// Differential campaign over a seeded random corpus.
    Fuzz(FuzzArgs),
    /// Print a generated instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Re-apply a recorded trace and check every snapshot.
    Replay {
        #[arg(value_name = "TRACE")]
        file: String,
    },
    /// Reduce a tableau and solution to the two-column system [P r].
    CheckReduction {
        #[arg(long)]
        tableau: String,
        #[arg(long)]
        solution: String,
        /// Two 1-based column numbers, e.g. `8,2`.
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
    },
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_m: usize,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenKind {
    KleeMinty {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        coef_base: u32,
        #[arg(long, default_value_t = 5)]
        rhs_base: u32,
    },
    Beale,
    /// The two-variable worked instance (optimum 7).
    Paper,
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        magnitude: u32,
        #[arg(long, default_value_t = 100)]
        density: u32,
        #[arg(long, default_value_t = 1)]
        max_den: u32,
    },
    Degenerate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Rebuild an instance from a campaign id.
    Id { id: String },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two columns, e.g. 8,2")?;
    let col = |t: &str| match t.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("{t:?} is not a 1-based column number")),
        Ok(v) => Ok(v),
    };
    Ok((col(a)?, col(b)?))
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn read_lp(path: &str) -> Result<GeneralLp> {
    parse_instance(&read_input(path)?).with_context(|| format!("parsing {path}"))
}

fn text(v: &Rational) -> String {
    rational::to_text(v)
}

fn texts(v: &[Rational]) -> Vec<String> {
    rational::vec_to_text(v)
}

fn human_vec(v: &[Rational]) -> String {
    v.iter()
        .map(|x| Human(x).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn engine_config(cli: &Cli) -> EngineConfig {
    EngineConfig {
        theta: Theta::Uniform(cli.theta.clone()),
        pivot_cap: cli.pivot_cap,
        ..EngineConfig::default()
    }
}

fn write_trace(cli: &Cli, result: &RunResult) -> Result<()> {
    if let Some(path) = &cli.trace {
        fs::write(path, result.trace.to_jsonl())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn status_code(status: &RunStatus) -> u8 {
    match status {
        RunStatus::Solved { .. } | RunStatus::NoSolution { .. } => OK,
        RunStatus::Falsified { .. } => EVIDENCE,
        _ => INCONCLUSIVE,
    }
}

fn describe(status: &RunStatus) -> String {
    match status {
        RunStatus::Solved { .. } => "solved".into(),
        RunStatus::NoSolution { reason } => format!("no solution ({reason:?})"),
        RunStatus::Reduced {
            eliminated_rows,
            child,
        } => {
            let rows: Vec<String> = eliminated_rows.iter().map(|r| (r + 1).to_string()).collect();
            format!("reduced (rows {} removed), then {}", rows.join(", "), describe(child))
        }
        RunStatus::Falsified {
            kind,
            step,
            column,
            first_selected_at,
        } => format!(
            "falsified: {kind:?} at step {step}, column {} first selected at step {first_selected_at}",
            column + 1
        ),
        RunStatus::PivotCapExceeded { cap } => format!("pivot cap {cap} reached"),
        RunStatus::Stalled { reason } => format!("stalled: {reason}"),
    }
}

fn solve(cli: &Cli, file: &str) -> Result<u8> {
    let lp = read_lp(file)?;
    let canon = canonicalize(&lp);
    let result = run(&canon, &engine_config(cli));
    write_trace(cli, &result)?;
    let original = match &result.status {
        RunStatus::Solved { x, objective, .. } => Some((
            canon.to_original(x)?,
            canon.original_objective(objective),
        )),
        _ => None,
    };
    if cli.json {
        let mut v = serde_json::to_value(&result)?;
        if let Some((x, obj)) = &original {
            v["originalX"] = json!(texts(x));
            v["originalObjective"] = json!(text(obj));
        }
        v["boundHolds"] = json!(result.bound_holds());
        print_json(&v);
    } else {
        println!("status: {}", describe(&result.status));
        if let (Some((x, obj)), RunStatus::Solved { y, .. }) = (&original, &result.status) {
            println!("objective: {}", Human(obj));
            println!("x: ({})", human_vec(x));
            println!("y: ({})", human_vec(y));
        }
        println!("major pivots: {}", result.major_count);
        println!("minor pivots: {}", result.minor_count);
        println!("total pivots: {}", result.total_pivots);
        println!(
            "m + n: {} (major count {} the bound)",
            result.pairs,
            if result.bound_holds() { "within" } else { "exceeds" }
        );
        for f in &result.falsifications {
            println!("falsification at step {}: {:?}: {}", f.step, f.kind, f.detail);
        }
    }
    Ok(status_code(&result.status))
}

fn oracle(cli: &Cli, file: &str) -> Result<u8> {
    let lp = read_lp(file)?;
    let canon = canonicalize(&lp);
    let result = simplex_solve(&canon);
    let certified = verify_certificate(&canon, &result);
    if !certified {
        bail!("oracle certificate failed verification");
    }
    if cli.json {
        let mut v = serde_json::to_value(&result)?;
        v["certified"] = json!(certified);
        if let OracleStatus::Optimal { x, objective, .. } = &result.status {
            v["originalX"] = json!(texts(&canon.to_original(x)?));
            v["originalObjective"] = json!(text(&canon.original_objective(objective)));
        }
        print_json(&v);
        return Ok(OK);
    }
    println!("status: {}", result.status.name());
    match &result.status {
        OracleStatus::Optimal { x, y, objective } => {
            println!("objective: {}", Human(&canon.original_objective(objective)));
            println!("x: ({})", human_vec(&canon.to_original(x)?));
            println!("y: ({})", human_vec(y));
        }
        OracleStatus::Infeasible { certificate } => {
            println!("farkas vector u: ({})", human_vec(certificate));
        }
        OracleStatus::Unbounded { point, ray } => {
            println!("feasible point: ({})", human_vec(&canon.to_original(point)?));
            println!("ray: ({})", human_vec(&canon.to_original(ray)?));
        }
    }
    println!("pivots: {}", result.pivot_count);
    println!("certificate: verified");
    Ok(OK)
}

fn diff(cli: &Cli, file: &str) -> Result<u8> {
    let lp = read_lp(file)?;
    let id = Path::new(file)
        .file_stem()
        .map_or_else(|| file.to_string(), |s| s.to_string_lossy().into_owned());
    let c = harness::differential_run(&id, &lp, &engine_config(cli));
    write_trace(cli, &c.engine)?;
    let r = &c.record;
    if cli.json {
        print_json(&serde_json::to_value(r)?);
    } else {
        println!("verdict: {}", r.verdict);
        println!(
            "engine: {} objective {}",
            r.engine_status,
            r.engine_objective.as_ref().map_or("-".into(), |v| Human(v).to_string())
        );
        println!(
            "oracle: {} objective {}",
            r.oracle_status,
            r.oracle_objective.as_ref().map_or("-".into(), |v| Human(v).to_string())
        );
        println!(
            "major {} minor {} total {} m + n {} bound {}",
            r.major_count,
            r.minor_count,
            r.total_pivots,
            r.pairs,
            if r.bound_holds { "holds" } else { "violated" }
        );
        for f in &r.falsifications {
            println!("falsification: {f:?}");
        }
    }
    Ok(if r.verdict == Verdict::Agree && r.falsifications.is_empty() {
        OK
    } else if matches!(r.verdict, Verdict::Disagree(_)) || !r.falsifications.is_empty() {
        EVIDENCE
    } else {
        INCONCLUSIVE
    })
}

fn fuzz(cli: &Cli, args: &FuzzArgs) -> Result<u8> {
    if args.count == 0 || args.max_m == 0 || args.max_n == 0 {
        bail!("--count, --max-m and --max-n must be at least 1");
    }
    let specs = corpus(args.count, args.seed, args.max_m, args.max_n);
    let label = format!(
        "random count={} seed={} max-m={} max-n={}",
        args.count, args.seed, args.max_m, args.max_n
    );
    let campaign = harness::fuzz(&label, &specs, &engine_config(cli), true);
    harness::write_campaign(&campaign, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let rep = &campaign.report;
    eprintln!(
        "{} instances in {} ms",
        campaign.timing.instances, campaign.timing.wall_ms
    );
    if cli.json {
        print_json(&serde_json::to_value(rep)?);
    } else {
        let v = &rep.verdicts;
        println!("instances: {}", rep.instances);
        println!(
            "agree {} / disagree {} / engine inconclusive {}",
            v.agree, v.disagree, v.engine_inconclusive
        );
        for (kind, n) in &rep.disagree_by_kind {
            println!("  disagree {kind}: {n}");
        }
        for (kind, n) in &rep.falsification_events {
            println!("falsification events {kind}: {n}");
        }
        println!(
            "bound violations: {} (max major count {})",
            rep.bound_violations, rep.max_major_count
        );
        println!("counterexamples: {}", rep.counterexamples.len());
        println!("report: {}", args.out.display());
    }
    Ok(rep.exit_code() as u8)
}

fn gen(kind: &GenKind) -> Result<u8> {
    let spec = match kind {
        GenKind::KleeMinty {
            d,
            coef_base,
            rhs_base,
        } => GeneratorSpec::KleeMinty {
            d: *d,
            coef_base: *coef_base,
            rhs_base: *rhs_base,
        },
        GenKind::Beale => GeneratorSpec::Beale,
        GenKind::Paper => GeneratorSpec::PaperIllustration,
        GenKind::Random {
            seed,
            m,
            n,
            magnitude,
            density,
            max_den,
        } => GeneratorSpec::Random {
            seed: *seed,
            m: *m,
            n: *n,
            magnitude: *magnitude,
            density_percent: *density,
            max_den: *max_den,
        },
        GenKind::Degenerate { seed, m, n } => GeneratorSpec::DegenerateRandom {
            seed: *seed,
            m: *m,
            n: *n,
        },
        GenKind::Id { id } => id.parse()?,
    };
    let lp = generate(&spec)?;
    print!("# {spec}\n{}", emit_instance(&lp));
    Ok(OK)
}

fn replay_cmd(cli: &Cli, path: &str) -> Result<u8> {
    let trace = PivotTrace::from_jsonl(&read_input(path)?)?;
    let seq = replay(&trace)?;
    let last = seq.last().expect("initial tableau");
    if cli.json {
        print_json(&json!({
            "steps": trace.steps.len(),
            "final": last.to_json(),
        }));
    } else {
        println!("replayed {} steps; every recorded snapshot matches", trace.steps.len());
        println!("final right-hand side: ({})", human_vec(&last.q()));
    }
    Ok(OK)
}

fn read_solution(path: &str, t: &EqTableau) -> Result<EqSolution> {
    let raw = read_input(path)?;
    let tokens: Vec<String> = if raw.trim_start().starts_with('[') {
        let v: Vec<Value> = serde_json::from_str(&raw).context("solution JSON")?;
        v.iter()
            .map(|x| match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect()
    } else {
        raw.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    };
    let z = rational::vec_from_text(&tokens)?;
    if z.len() != t.width() {
        bail!("solution has {} components, tableau has {} columns", z.len(), t.width());
    }
    Ok(EqSolution::new(t.m(), t.n(), z))
}

fn check_reduction(cli: &Cli, tableau: &str, solution: &str, pair: (usize, usize)) -> Result<u8> {
    let t = EqTableau::from_json_str(&read_input(tableau)?)?;
    let z = read_solution(solution, &t)?;
    let pr = reduce_to_pr(&t, &z, (pair.0 - 1, pair.1 - 1))?;
    let columns: Vec<usize> = pr.columns.iter().map(|c| c + 1).collect();
    if cli.json {
        print_json(&json!({
            "columns": columns,
            "p": pr.p.iter().map(|r| texts(r)).collect::<Vec<_>>(),
            "r": texts(&pr.r),
            "moved": pr.moved.iter().map(|c| c + 1).collect::<Vec<_>>(),
        }));
        return Ok(OK);
    }
    let labels: Vec<String> = columns.iter().map(|c| format!("C{c}")).collect();
    println!("P = [{}]", labels.join("|"));
    let cells: Vec<Vec<String>> = pr.p.iter().map(|r| texts(r)).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    for (row, r) in cells.iter().zip(&pr.r) {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        println!("  {} | {}", line.join(" "), text(r));
    }
    println!("r = ({})", texts(&pr.r).join(", "));
    Ok(OK)
}

fn execute(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Solve { file } => solve(cli, file),
        Command::Oracle { file } => oracle(cli, file),
        Command::Diff { file } => diff(cli, file),
        Command::Fuzz(args) => fuzz(cli, args),
        Command::Gen { kind } => gen(kind),
        Command::Replay { file } => replay_cmd(cli, file),
        Command::CheckReduction {
            tableau,
            solution,
            pair,
        } => check_reduction(cli, tableau, solution, *pair),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { FAILURE } else { OK });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILURE)
        }
    }
}
