//! Acceptance checks. Each test prints one `PASS`/`FAIL` line.

mod common;

use std::time::{Duration, Instant};

use common::{brute_force, check_against_oracle, implication_chains, random_large, random_mip, Outcome, SMALL_MIP};
use presolve::io::{write_mps_string, write_record, ConflictReport, RecordFormat};
use presolve::model::{ColFlags, Problem, ProblemBuilder, ProblemState};
use presolve::numerics::{NumericContext, Rational, Real};
use presolve::postsolve::PostsolveRecord;
use presolve::presolvers::{registry, PresolveView};
use presolve::scheduler::{presolve, PresolveOptions, PresolveResult, PresolveStatus};
use presolve::transaction::{apply_all, Transaction, TxStatus};

const FLOAT_COEFF_TOL: f64 = 1e-9;
const FLOAT_OBJ_TOL: f64 = 1e-6;
const KNAPSACK_TIME_LIMIT: Duration = Duration::from_secs(1);
const DETERMINISM_INSTANCES: u64 = 50;
const DETERMINISM_MAX_SIZE: usize = 2000;
const DETERMINISM_THREADS: [usize; 4] = [1, 2, 4, 8];
const DETERMINISM_TIME_LIMIT: Duration = Duration::from_secs(300);
const SOUNDNESS_INSTANCES: u64 = 1000;
const MODE_INSTANCES: u64 = 200;
const SPEEDUP_BINARIES: usize = 4000;
const SPEEDUP_RATIO: f64 = 0.75;
const OVERHEAD_RATIO: f64 = 1.1;
const SPEEDUP_THREADS: usize = 4;

fn report(number: u32, title: &str, ok: bool, detail: &str) {
    println!("criterion {number} {title}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn sequential() -> PresolveOptions {
    PresolveOptions { threads: 1, ..PresolveOptions::default() }
}

fn knapsack<R: Real>() -> Problem<R> {
    let mut b = ProblemBuilder::new();
    b.set_name("knapsack");
    let x1 = b.add_col("x1", R::from_i64(-2), Some(R::zero()), Some(R::one()), true);
    let x2 = b.add_col("x2", R::from_i64(-1), Some(R::zero()), Some(R::one()), true);
    b.add_row("c", &[(x1, R::from_i64(7)), (x2, R::from_i64(8))], None, Some(R::from_i64(13)));
    b.build()
}

/// `y + z = 1` and `x + 3y + 3z <= 4` over binaries.
fn substitution_example<R: Real>() -> Problem<R> {
    let mut b = ProblemBuilder::new();
    b.set_name("subst");
    let bin = |b: &mut ProblemBuilder<R>, name: &str, cost: i64| b.add_col(name, R::from_i64(cost), Some(R::zero()), Some(R::one()), true);
    let x = bin(&mut b, "x", -1);
    let y = bin(&mut b, "y", 1);
    let z = bin(&mut b, "z", 2);
    b.add_row("e", &[(y, R::one()), (z, R::one())], Some(R::one()), Some(R::one()));
    b.add_row("k", &[(x, R::one()), (y, R::from_i64(3)), (z, R::from_i64(3))], None, Some(R::from_i64(4)));
    b.build()
}

/// `3x + 3y <= 4`, `6x + 6y >= 4`, `3x + 3y >= 3` over binaries.
fn parallel_example() -> Problem<f64> {
    let mut b = ProblemBuilder::new();
    b.set_name("parallel");
    let x = b.add_col("x", -1.0, Some(0.0), Some(1.0), true);
    let y = b.add_col("y", -2.0, Some(0.0), Some(1.0), true);
    b.add_row("a", &[(x, 3.0), (y, 3.0)], None, Some(4.0));
    b.add_row("b", &[(x, 6.0), (y, 6.0)], Some(4.0), None);
    b.add_row("c", &[(x, 3.0), (y, 3.0)], Some(3.0), None);
    b.build()
}

/// Continuous columns `x`, `y`, `z` that each appear once in the equation `r`.
fn two_singletons() -> Problem<f64> {
    let mut b = ProblemBuilder::new();
    b.set_name("singletons");
    let x = b.add_col("x", 1.0, Some(0.0), Some(3.0), false);
    let y = b.add_col("y", 2.0, Some(0.0), Some(3.0), false);
    let z = b.add_col("z", 1.0, Some(0.0), Some(5.0), false);
    let w = b.add_col("w", 1.0, Some(0.0), Some(5.0), false);
    b.add_row("r", &[(x, 1.0), (y, 1.0), (z, 1.0)], Some(4.0), Some(4.0));
    b.add_row("s", &[(z, 1.0), (w, 1.0)], None, Some(3.0));
    b.build()
}

fn transaction_lines(log: &[String]) -> impl Iterator<Item = &String> {
    log.iter().filter(|l| l.starts_with("transaction "))
}

fn count_status(log: &[String], presolver: &str, status: TxStatus) -> usize {
    let p = format!(" presolver {presolver} ");
    let s = format!(" status {} ", status.name());
    transaction_lines(log).filter(|l| l.contains(&p) && l.contains(&s)).count()
}

/// Presolver and kind of every applied change, in order.
fn applied_kinds(log: &[String]) -> Vec<(String, String)> {
    log.iter()
        .filter(|l| !l.starts_with("transaction ") && l.ends_with("status APPLIED") && !l.contains("kind ASSERT_"))
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            let kind = t.iter().position(|&w| w == "kind").map_or("", |k| t[k + 1]);
            (t[0].to_string(), kind.to_string())
        })
        .collect()
}

fn verbose(opts: PresolveOptions) -> PresolveOptions {
    PresolveOptions { verbosity: 4, ..opts }
}

/// Checks that the single remaining row reads `x1 + x2 <= 1` after scaling.
fn knapsack_row<R: Real>(r: &PresolveResult<R>, equal: impl Fn(&R, &R) -> bool) -> Result<(), String> {
    let p = &r.reduced;
    if (p.nrows(), p.ncols()) != (1, 2) {
        return Err(format!("{} rows {} cols", p.nrows(), p.ncols()));
    }
    let a: Vec<R> = (0..2).map(|j| p.matrix.get(0, j).cloned().unwrap_or_else(R::zero)).collect();
    let (Some(rhs), None) = (p.rhs(0), p.lhs(0)) else {
        return Err("row is not a <= row".into());
    };
    if !a[0].is_positive() || !equal(&a[1], &a[0]) || !equal(rhs, &a[0]) {
        return Err(format!("row {} x1 + {} x2 <= {}", a[0], a[1], rhs));
    }
    let mut relaxed = p.clone();
    for f in &mut relaxed.col_flags {
        f.remove(ColFlags::INTEGRAL);
    }
    match brute_force(&relaxed, &NumericContext::<R>::default()) {
        Outcome::Optimal { value, x } if equal(&x[0], &R::one()) && equal(&x[1], &R::zero()) && equal(&value, &R::from_i64(-2)) => Ok(()),
        other => Err(format!("LP relaxation gives {other:?}")),
    }
}

#[test]
fn criterion_1_knapsack_coefficient_tightening() {
    let mut opts = sequential();
    opts.disabled.insert("domcol".into());
    let start = Instant::now();
    let exact = presolve(knapsack::<Rational>(), &opts, NumericContext::exact());
    let float = presolve(knapsack::<f64>(), &opts, NumericContext::default());
    let elapsed = start.elapsed();
    let exact_ok = knapsack_row(&exact, |a, b| a == b);
    let float_ok = knapsack_row(&float, |a, b| (a - b).abs() <= FLOAT_COEFF_TOL);
    let original_lp = {
        let mut p = knapsack::<Rational>();
        p.col_flags.iter_mut().for_each(|f| f.remove(ColFlags::INTEGRAL));
        brute_force(&p, &NumericContext::exact()).value().cloned()
    };
    let ok = exact_ok.is_ok() && float_ok.is_ok() && elapsed < KNAPSACK_TIME_LIMIT;
    report(
        1,
        "knapsack tightens to x1 + x2 <= 1",
        ok,
        &format!(
            "rational {:?}, float {:?}, LP bound before {}, {:.1} ms",
            exact_ok,
            float_ok,
            original_lp.map_or("-".into(), |v| v.to_string()),
            elapsed.as_secs_f64() * 1e3
        ),
    );
    assert!(ok);
}

/// Transactions of `names` computed on one snapshot of `p`.
fn snapshot_transactions(p: &Problem<f64>, names: &[&str]) -> Vec<Vec<Transaction<f64>>> {
    let state = ProblemState::new(p.clone(), NumericContext::default());
    let rows: Vec<usize> = p.active_rows().collect();
    let cols: Vec<usize> = p.active_cols().collect();
    let view = PresolveView::full(state.problem(), state.activities(), state.locks(), state.ctx(), &rows, &cols);
    let reg = registry::<f64>();
    names
        .iter()
        .map(|n| {
            let ps = reg.iter().find(|ps| ps.descriptor.name == *n).expect("known presolver");
            (ps.run)(&view).expect("no verdict")
        })
        .collect()
}

fn apply_batch(p: &Problem<f64>, batch: &[Transaction<f64>]) -> (Vec<TxStatus>, Problem<f64>) {
    let mut state = ProblemState::new(p.clone(), NumericContext::default());
    let mut record = PostsolveRecord::new(p);
    let outcomes = apply_all(&mut state, batch, &mut record).expect("no verdict");
    (outcomes.iter().map(|o| o.status).collect(), state.into_problem())
}

#[test]
fn criterion_2_conflict_examples() {
    let p = substitution_example::<f64>();
    let opts = verbose(sequential()).only(&["simplifyineq", "substitution"]);
    let run = presolve(p.clone(), &opts, NumericContext::default());
    let both_in_run = count_status(&run.log, "simplifyineq", TxStatus::Applied) >= 1
        && count_status(&run.log, "substitution", TxStatus::Applied) >= 1;

    let txs = snapshot_transactions(&p, &["simplifyineq", "substitution"]);
    let (simplify, subst) = (&txs[0], &txs[1]);
    let mandated: Vec<_> = simplify.iter().chain(subst).cloned().collect();
    let reversed: Vec<_> = subst.iter().chain(simplify).cloned().collect();
    let (in_order, _) = apply_batch(&p, &mandated);
    let (out_of_order, _) = apply_batch(&p, &reversed);
    let one_batch = !simplify.is_empty() && !subst.is_empty() && in_order.iter().all(|s| *s == TxStatus::Applied);
    let discarded = out_of_order[subst.len()..].iter().all(|s| *s == TxStatus::Discarded) && !simplify.is_empty();

    let q = parallel_example();
    let rows = snapshot_transactions(&q, &["parallelrows"]).remove(0);
    let (statuses, after) = apply_batch(&q, &rows);
    let active = after.active_rows().count();
    let scheduled = presolve(q.clone(), &verbose(sequential()).only(&["parallelrows"]), NumericContext::default());
    let parallel_ok = rows.len() == 1
        && statuses == [TxStatus::Applied]
        && active == 1
        && count_status(&scheduled.log, "parallelrows", TxStatus::Applied) == 1
        && scheduled.reduced.nrows() <= 1
        && check_against_oracle(&q, &sequential(), FLOAT_OBJ_TOL).is_ok();

    let ok = both_in_run && one_batch && discarded && parallel_ok;
    report(
        2,
        "simplifyineq before substitution, parallel rows in one transaction",
        ok,
        &format!(
            "both applied in run {both_in_run}, one batch {in_order:?}, reversed {out_of_order:?}, \
             parallelrows transactions {} leaving {active} row",
            rows.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_thread_count_determinism() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut largest = 0;
    for k in 0..DETERMINISM_INSTANCES {
        let size = (DETERMINISM_MAX_SIZE as u64 * (k + 1) / DETERMINISM_INSTANCES) as usize;
        largest = largest.max(size);
        let p = random_large(k, size, size);
        let mut reference: Option<(String, Vec<u8>, Vec<String>)> = None;
        for threads in DETERMINISM_THREADS {
            let opts = verbose(PresolveOptions { threads, ..PresolveOptions::default() });
            let r = presolve(p.clone(), &opts, NumericContext::default());
            let out = (
                write_mps_string(&r.reduced),
                write_record(&r.record, RecordFormat::Binary),
                transaction_lines(&r.log).cloned().collect::<Vec<_>>(),
            );
            match &reference {
                None => reference = Some(out),
                Some(first) if *first != out => mismatches.push(format!("instance {k} threads {threads}")),
                Some(_) => {}
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed < DETERMINISM_TIME_LIMIT;
    report(
        3,
        "identical output for 1, 2, 4 and 8 threads",
        ok,
        &format!(
            "{DETERMINISM_INSTANCES} instances up to {largest}x{largest}, mismatches {mismatches:?}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_soundness_against_brute_force() {
    let mut failures = Vec::new();
    for seed in 0..SOUNDNESS_INSTANCES {
        let p = random_mip(seed + 100_000, SMALL_MIP);
        if let Err(e) = check_against_oracle(&p, &sequential(), FLOAT_OBJ_TOL) {
            failures.push(format!("float {seed}: {e}"));
        }
        if let Err(e) = check_against_oracle(&p.convert::<Rational>(), &sequential(), 0.0) {
            failures.push(format!("rational {seed}: {e}"));
        }
    }
    let ok = failures.is_empty();
    report(
        4,
        "optimum and feasibility preserved on random small MIPs",
        ok,
        &format!("{SOUNDNESS_INSTANCES} instances in both modes, failures {:?}", &failures[..failures.len().min(5)]),
    );
    assert!(ok);
}

#[test]
fn criterion_5_float_and_rational_agree() {
    let mut differences = Vec::new();
    for seed in 0..MODE_INSTANCES {
        let size = 10 + (seed as usize % 40);
        let p = random_large(seed + 500_000, size, size);
        let opts = verbose(sequential());
        let float = presolve(p.clone(), &opts, NumericContext::default());
        let exact = presolve(p.convert::<Rational>(), &opts, NumericContext::exact());
        let dims = |q: &Problem<f64>| (q.nrows(), q.ncols(), q.matrix.nnz());
        let exact_dims = (exact.reduced.nrows(), exact.reduced.ncols(), exact.reduced.matrix.nnz());
        if float.status != exact.status
            || dims(&float.reduced) != exact_dims
            || applied_kinds(&float.log) != applied_kinds(&exact.log)
        {
            differences.push(seed);
        }
    }
    let ok = differences.is_empty();
    report(
        5,
        "float and rational apply the same reductions",
        ok,
        &format!("{MODE_INSTANCES} instances, differing seeds {differences:?}"),
    );
    assert!(ok);
}

fn median_time(p: &Problem<f64>, threads: usize) -> Duration {
    let mut times: Vec<Duration> = (0..3)
        .map(|_| {
            let start = Instant::now();
            let r = presolve(p.clone(), &PresolveOptions { threads, ..PresolveOptions::default() }, NumericContext::default());
            assert_ne!(r.status, PresolveStatus::Infeasible);
            start.elapsed()
        })
        .collect();
    times.sort();
    times[1]
}

#[test]
fn criterion_6_parallel_speedup() {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let heavy = implication_chains(7, SPEEDUP_BINARIES);
    let one = median_time(&heavy, 1);
    let four = median_time(&heavy, SPEEDUP_THREADS);
    let speedup_ok = four.as_secs_f64() < SPEEDUP_RATIO * one.as_secs_f64();
    let corpus: Vec<Problem<f64>> = (0..20).map(|k| random_large(k + 900_000, 50 + 10 * k as usize, 50 + 10 * k as usize)).collect();
    let corpus_one: Duration = corpus.iter().map(|p| median_time(p, 1)).sum();
    let corpus_four: Duration = corpus.iter().map(|p| median_time(p, SPEEDUP_THREADS)).sum();
    let overhead_ok = corpus_four.as_secs_f64() <= OVERHEAD_RATIO * corpus_one.as_secs_f64();
    let ok = speedup_ok && overhead_ok;
    report(
        6,
        "four threads speed up a probing-heavy instance",
        ok,
        &format!(
            "{cores} cores, heavy 1 thread {:.3} s, {SPEEDUP_THREADS} threads {:.3} s, corpus {:.3} s vs {:.3} s",
            one.as_secs_f64(),
            four.as_secs_f64(),
            corpus_one.as_secs_f64(),
            corpus_four.as_secs_f64()
        ),
    );
    if cores >= SPEEDUP_THREADS {
        assert!(ok);
    }
}

#[test]
fn criterion_7_apply_immediately_never_discards() {
    let opts = verbose(PresolveOptions { threads: 1, apply_immediately: true, ..PresolveOptions::default() });
    let float = presolve(substitution_example::<f64>(), &opts, NumericContext::default());
    let exact = presolve(substitution_example::<Rational>(), &opts, NumericContext::exact());
    let discarded = transaction_lines(&float.log).chain(transaction_lines(&exact.log)).filter(|l| l.contains("status DISCARDED")).count();
    let float_sound = check_against_oracle(&substitution_example::<f64>(), &opts, FLOAT_OBJ_TOL);
    let exact_sound = check_against_oracle(&substitution_example::<Rational>(), &opts, 0.0);
    let ok = discarded == 0 && float_sound.is_ok() && exact_sound.is_ok();
    report(
        7,
        "sequential apply-immediately mode has no discarded transactions",
        ok,
        &format!("discarded {discarded}, float {float_sound:?}, rational {exact_sound:?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_conflict_report() {
    let r = presolve(two_singletons(), &verbose(sequential()), NumericContext::default());
    let report_ = ConflictReport::from_log(&r.log.join("\n"));
    let pair = report_.pair("colsingleton", "colsingleton");
    let text = report_.render();
    let ok = pair.conflicts == 1
        && pair.conflicting_calls == 1
        && ["fast presolvers", "medium presolvers", "exhaustive presolvers", "conflict ledger", "c/t", "r/c"]
            .iter()
            .all(|s| text.contains(s));
    report(
        8,
        "report counts the colsingleton self-conflict",
        ok,
        &format!("colsingleton/colsingleton {pair:?}"),
    );
    assert!(ok);
}
