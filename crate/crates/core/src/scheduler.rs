//! The presolve loop: trivial presolve, tiers of presolvers run on a shared
//! snapshot, ordered application of their transactions, and escalation from
//! fast to exhaustive presolvers until a round finds too little.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Verdict;
use crate::model::{ChangeCounters, Problem, ProblemState};
use crate::numerics::{ContextError, NumericContext, NumericMode, Real};
use crate::parallel::{available_threads, map_ordered, pool};
use crate::postsolve::PostsolveRecord;
use crate::presolvers::{registry, run_trivial, PresolveView, Presolver, PresolverOutput, Tier};
use crate::transaction::{apply_all, log_lines, ApplyOutcome, Transaction, TxStatus};

pub const DEFAULT_ABORTFAC: f64 = 8e-4;
pub const MAX_ROUNDS: usize = 500;
/// Repetitions of trivial presolve after one call.
const MAX_TRIVIAL_PASSES: usize = 50;

/// Log level that records every transaction.
pub const VERBOSITY_TRANSACTIONS: u8 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct PresolveOptions {
    /// Worker threads; 0 picks the number of available cores.
    pub threads: usize,
    pub abortfac: f64,
    /// With one thread, apply each presolver's transactions before the next
    /// presolver of the tier runs.
    pub apply_immediately: bool,
    pub verbosity: u8,
    pub random_seed: u64,
    pub max_rounds: usize,
    pub epsilon: f64,
    pub feastol: f64,
    pub hugeval: f64,
    /// Presolvers switched off by name.
    pub disabled: BTreeSet<String>,
}

impl Default for PresolveOptions {
    fn default() -> Self {
        PresolveOptions {
            threads: 0,
            abortfac: DEFAULT_ABORTFAC,
            apply_immediately: false,
            verbosity: 1,
            random_seed: 0,
            max_rounds: MAX_ROUNDS,
            epsilon: 1e-9,
            feastol: 1e-6,
            hugeval: 1e8,
            disabled: BTreeSet::new(),
        }
    }
}

impl PresolveOptions {
    pub fn is_enabled(&self, presolver: &str) -> bool {
        !self.disabled.contains(presolver)
    }

    /// Disables every presolver not in `names`.
    pub fn only(mut self, names: &[&str]) -> Self {
        self.disabled = crate::presolvers::presolver_names()
            .filter(|n| !names.contains(n))
            .map(str::to_string)
            .collect();
        self
    }

    pub fn effective_threads(&self) -> usize {
        if self.threads == 0 {
            available_threads()
        } else {
            self.threads
        }
    }

    /// Comparison context for the arithmetic `R`: the configured tolerances
    /// in floating point, exact comparisons for rationals.
    pub fn context<R: Real>(&self) -> Result<NumericContext<R>, ContextError> {
        match R::MODE {
            NumericMode::Float64 => NumericContext::with_tolerances(
                R::from_f64(self.epsilon),
                R::from_f64(self.feastol),
                R::from_f64(self.hugeval),
            ),
            NumericMode::Rational => {
                let mut ctx = NumericContext::exact();
                ctx.hugeval = R::from_f64(self.hugeval);
                Ok(ctx)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresolveStatus {
    Reduced,
    Unchanged,
    Infeasible,
    Unbounded,
}

impl PresolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            PresolveStatus::Reduced => "REDUCED",
            PresolveStatus::Unchanged => "UNCHANGED",
            PresolveStatus::Infeasible => "INFEASIBLE",
            PresolveStatus::Unbounded => "UNBOUNDED",
        }
    }
}

impl fmt::Display for PresolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TxCounts {
    pub found: usize,
    pub applied: usize,
    pub discarded: usize,
    pub canceled: usize,
}

impl TxCounts {
    fn add(&mut self, outcomes: &[ApplyOutcome]) {
        self.found += outcomes.len();
        for o in outcomes {
            match o.status {
                TxStatus::Applied => self.applied += 1,
                TxStatus::Discarded => self.discarded += 1,
                TxStatus::Canceled => self.canceled += 1,
            }
        }
    }

    fn merge(&mut self, other: &TxCounts) {
        self.found += other.found;
        self.applied += other.applied;
        self.discarded += other.discarded;
        self.canceled += other.canceled;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundStats {
    /// Problem changes over the whole run.
    pub changes: ChangeCounters,
    pub rounds_fast: usize,
    pub rounds_medium: usize,
    pub rounds_exhaustive: usize,
    pub transactions: TxCounts,
    /// Per presolver, including `trivial`.
    pub by_presolver: BTreeMap<&'static str, TxCounts>,
    /// Rounds in which the presolver found at least one transaction.
    pub calls: BTreeMap<&'static str, usize>,
    /// Whether the delayed presolvers were switched on.
    pub delayed_enabled: bool,
}

impl RoundStats {
    pub fn rounds(&self) -> usize {
        self.rounds_fast + self.rounds_medium + self.rounds_exhaustive
    }

    fn count_round(&mut self, tier: Tier) {
        match tier {
            Tier::Fast => self.rounds_fast += 1,
            Tier::Medium => self.rounds_medium += 1,
            Tier::Exhaustive => self.rounds_exhaustive += 1,
        }
    }

    fn record(&mut self, presolver: &'static str, outcomes: &[ApplyOutcome]) {
        let mut counts = TxCounts::default();
        counts.add(outcomes);
        self.transactions.merge(&counts);
        self.by_presolver.entry(presolver).or_default().merge(&counts);
        if !outcomes.is_empty() {
            *self.calls.entry(presolver).or_default() += 1;
        }
    }
}

pub struct PresolveResult<R> {
    pub reduced: Problem<R>,
    pub record: PostsolveRecord<R>,
    pub status: PresolveStatus,
    pub stats: RoundStats,
    /// Message text, filtered by the verbosity level.
    pub log: Vec<String>,
}

/// Whether the changes since the last evaluation justify going back to the
/// fast presolvers.
pub fn enough_reductions(changes: &ChangeCounters, ncols: usize, nrows: usize, nnz: usize, abortfac: f64) -> bool {
    0.1 * changes.bound_changes as f64 + changes.deleted_cols as f64 > abortfac * ncols as f64
        || (changes.side_changes + changes.deleted_rows) as f64 > abortfac * nrows as f64
        || changes.coeff_changes as f64 > abortfac * nnz as f64
}

fn active_nnz<R: Real>(p: &Problem<R>) -> usize {
    p.active_rows().map(|i| p.matrix.row(i).len()).sum()
}

/// Journal positions a fast presolver saw on its previous call.
#[derive(Clone, Copy)]
struct Watermark {
    rows: usize,
    cols: usize,
}

struct Run<'o, R: Real> {
    state: ProblemState<R>,
    record: PostsolveRecord<R>,
    options: &'o PresolveOptions,
    threads: usize,
    stats: RoundStats,
    log: Vec<String>,
    next_tx_id: usize,
    watermarks: BTreeMap<&'static str, Watermark>,
}

/// Rows and columns a presolver is shown.
struct Scope {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl<'o, R: Real> Run<'o, R> {
    fn say(&mut self, level: u8, line: String) {
        if self.options.verbosity >= level {
            self.log.push(line);
        }
    }

    fn full_scope(&self) -> Scope {
        let p = self.state.problem();
        Scope {
            rows: p.active_rows().collect(),
            cols: p.active_cols().collect(),
        }
    }

    /// Changed rows and columns for fast presolvers, everything otherwise.
    fn scope_for(&mut self, presolver: &Presolver<R>) -> Scope {
        if presolver.descriptor.tier != Tier::Fast {
            return self.full_scope();
        }
        let now = Watermark {
            rows: self.state.row_journal_len(),
            cols: self.state.col_journal_len(),
        };
        match self.watermarks.insert(presolver.descriptor.name, now) {
            None => self.full_scope(),
            Some(mark) => Scope {
                rows: self.state.changed_rows_since(mark.rows),
                cols: self.state.changed_cols_since(mark.cols),
            },
        }
    }

    fn apply(&mut self, transactions: &[Transaction<R>], calls: &[(&'static str, usize)]) -> Result<(), Verdict> {
        let outcomes = apply_all(&mut self.state, transactions, &mut self.record)?;
        let mut start = 0;
        for &(name, n) in calls {
            self.say(3, format!("call {name} transactions {n}"));
            self.stats.record(name, &outcomes[start..start + n]);
            start += n;
        }
        if self.options.verbosity >= VERBOSITY_TRANSACTIONS {
            for (tx, outcome) in transactions.iter().zip(&outcomes) {
                let id = self.next_tx_id;
                self.next_tx_id += 1;
                self.log.extend(log_lines(id, tx, outcome));
            }
        }
        Ok(())
    }

    fn trivial(&mut self) -> Result<(), Verdict> {
        for _ in 0..MAX_TRIVIAL_PASSES {
            let before = self.state.counters;
            let scope = self.full_scope();
            let p = self.state.problem();
            let view = PresolveView::full(p, self.state.activities(), self.state.locks(), self.state.ctx(), &scope.rows, &scope.cols);
            let txs = run_trivial(&view)?;
            if txs.is_empty() {
                return Ok(());
            }
            let n = txs.len();
            self.apply(&txs, &[("trivial", n)])?;
            if self.state.counters == before {
                return Ok(());
            }
        }
        Ok(())
    }

    fn run_presolver(&self, presolver: &Presolver<R>, scope: &Scope, parallel: bool) -> PresolverOutput<R> {
        let view = PresolveView {
            problem: self.state.problem(),
            activities: self.state.activities(),
            locks: self.state.locks(),
            ctx: self.state.ctx(),
            changed_rows: &scope.rows,
            changed_cols: &scope.cols,
            parallel: parallel && presolver.descriptor.internal_parallel,
        };
        (presolver.run)(&view)
    }

    /// All presolvers of the tier on one snapshot; their transactions are
    /// applied together in apply order.
    fn tier_batch(&mut self, presolvers: &[Presolver<R>]) -> Result<(), Verdict> {
        let scopes: Vec<Scope> = presolvers.iter().map(|p| self.scope_for(p)).collect();
        let jobs: Vec<(&Presolver<R>, &Scope)> = presolvers.iter().zip(&scopes).collect();
        let this = &*self;
        let results: Vec<PresolverOutput<R>> = match (self.threads > 1).then(|| pool(self.threads)).flatten() {
            Some(pool) => pool.install(|| map_ordered(true, &jobs, |(p, s)| this.run_presolver(p, s, true))),
            None => jobs.iter().map(|(p, s)| this.run_presolver(p, s, false)).collect(),
        };
        let mut all = Vec::new();
        let mut calls = Vec::new();
        for (presolver, result) in presolvers.iter().zip(results) {
            let txs = result?;
            calls.push((presolver.descriptor.name, txs.len()));
            all.extend(txs);
        }
        self.apply(&all, &calls)
    }

    /// Each presolver sees the changes of the ones before it.
    fn tier_immediate(&mut self, presolvers: &[Presolver<R>]) -> Result<(), Verdict> {
        for presolver in presolvers {
            let scope = self.scope_for(presolver);
            let txs = self.run_presolver(presolver, &scope, false)?;
            let n = txs.len();
            self.apply(&txs, &[(presolver.descriptor.name, n)])?;
        }
        Ok(())
    }

    fn main_loop(&mut self) -> Result<(), Verdict> {
        let all: Vec<Presolver<R>> = registry::<R>()
            .into_iter()
            .filter(|p| self.options.is_enabled(p.descriptor.name))
            .collect();
        let immediate = self.options.apply_immediately && self.threads == 1;
        self.trivial()?;
        let mut tier = Tier::Fast;
        let mut delayed = false;
        for round in 1..=self.options.max_rounds {
            self.say(2, format!("round {round} tier {tier}"));
            self.stats.count_round(tier);
            self.state.refresh_activities();
            let before = self.state.counters;
            let active: Vec<Presolver<R>> = all
                .iter()
                .filter(|p| p.descriptor.tier == tier && (delayed || !p.descriptor.delayed))
                .cloned()
                .collect();
            if immediate {
                self.tier_immediate(&active)?;
            } else {
                self.tier_batch(&active)?;
            }
            self.trivial()?;
            let changes = self.state.counters.since(&before);
            let p = self.state.problem();
            if enough_reductions(&changes, p.num_active_cols(), p.num_active_rows(), active_nnz(p), self.options.abortfac) {
                tier = Tier::Fast;
            } else if let Some(next) = tier.next() {
                tier = next;
            } else if !delayed {
                delayed = true;
                self.stats.delayed_enabled = true;
                self.say(2, "delayed presolvers enabled".to_string());
                tier = Tier::Fast;
            } else {
                return Ok(());
            }
        }
        self.say(1, format!("stopped after {} rounds", self.options.max_rounds));
        Ok(())
    }
}

/// Presolves `problem`. With `threads = 1` and `apply_immediately` set the
/// presolvers of a tier run one after the other on the updated problem;
/// otherwise the result does not depend on the number of threads.
pub fn presolve<R: Real>(problem: Problem<R>, options: &PresolveOptions, ctx: NumericContext<R>) -> PresolveResult<R> {
    let record = PostsolveRecord::new(&problem);
    let mut run = Run {
        state: ProblemState::new(problem, ctx),
        record,
        options,
        threads: options.effective_threads(),
        stats: RoundStats::default(),
        log: Vec::new(),
        next_tx_id: 0,
        watermarks: BTreeMap::new(),
    };
    let outcome = run.main_loop();
    run.stats.changes = run.state.counters;
    let status = match &outcome {
        Err(Verdict::Infeasible(msg)) => {
            run.say(1, format!("infeasible: {msg}"));
            PresolveStatus::Infeasible
        }
        Err(Verdict::Unbounded(msg)) => {
            run.say(1, format!("unbounded: {msg}"));
            PresolveStatus::Unbounded
        }
        Ok(()) if run.stats.transactions.applied == 0 => PresolveStatus::Unchanged,
        Ok(()) => PresolveStatus::Reduced,
    };
    let (reduced, col_map, row_map) = run.state.compact();
    run.record.set_maps(col_map, row_map);
    run.say(
        1,
        format!(
            "presolve {status}: rows {} cols {} nnz {} after {} rounds",
            reduced.nrows(),
            reduced.ncols(),
            reduced.matrix.nnz(),
            run.stats.rounds()
        ),
    );
    PresolveResult {
        reduced,
        record: run.record,
        status,
        stats: run.stats,
        log: run.log,
    }
}

/// [`presolve`] in the apply-immediately mode.
pub fn presolve_sequential_immediate<R: Real>(
    problem: Problem<R>,
    options: &PresolveOptions,
    ctx: NumericContext<R>,
) -> PresolveResult<R> {
    let options = PresolveOptions {
        threads: 1,
        apply_immediately: true,
        ..options.clone()
    };
    presolve(problem, &options, ctx)
}
