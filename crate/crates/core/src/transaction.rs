//! Transactions: reductions bundled with the assumptions they were derived
//! under, and the engine that validates and applies them in order.

use std::fmt;

use crate::error::Verdict;
use crate::model::ProblemState;
use crate::numerics::Real;
use crate::postsolve::{PostsolveData, PostsolveRecord};

#[derive(Clone, Debug, PartialEq)]
pub enum ReductionStep<R> {
    /// Coefficients of the row have not changed in this batch.
    AssertRowUnmodified(usize),
    AssertRowBoundsUnmodified(usize),
    AssertColBoundsUnmodified(usize),
    /// Coefficients, cost, integrality and locks of the column have not changed.
    AssertColUnmodified(usize),
    FixColumn { col: usize, value: R },
    ChangeLower { col: usize, value: R },
    ChangeUpper { col: usize, value: R },
    ChangeLhs { row: usize, value: Option<R> },
    ChangeRhs { row: usize, value: Option<R> },
    /// A zero value deletes the entry.
    ChangeCoeff { row: usize, col: usize, value: R },
    /// Moves the cost of a column into the other columns of an equation.
    SubstituteInObjective { col: usize, row: usize },
    /// Eliminates a column from the whole problem using an equation row,
    /// which is removed afterwards.
    SubstituteColumn { col: usize, row: usize },
    MarkRowRedundant(usize),
    /// Removes a zero-cost continuous column with a single entry, relaxing
    /// the sides of its row by the column's range.
    DeleteColumn { col: usize },
    /// Replaces `keep` by `x_keep + scale * x_remove` and drops `remove`.
    AggregateParallelCols { keep: usize, remove: usize, scale: R },
    /// Substitutes `x_col = factor * x_by + offset` everywhere.
    ReplaceColumn { col: usize, by: usize, factor: R, offset: R },
    ImplyIntegral(usize),
}

impl<R: Real> ReductionStep<R> {
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            ReductionStep::AssertRowUnmodified(_)
                | ReductionStep::AssertRowBoundsUnmodified(_)
                | ReductionStep::AssertColBoundsUnmodified(_)
                | ReductionStep::AssertColUnmodified(_)
        )
    }

    pub fn kind_name(&self) -> &'static str {
        use ReductionStep::*;
        match self {
            AssertRowUnmodified(_) => "ASSERT_ROW_UNMODIFIED",
            AssertRowBoundsUnmodified(_) => "ASSERT_ROW_BOUNDS_UNMODIFIED",
            AssertColBoundsUnmodified(_) => "ASSERT_COL_BOUNDS_UNMODIFIED",
            AssertColUnmodified(_) => "ASSERT_COL_UNMODIFIED",
            FixColumn { .. } => "FIX_COLUMN",
            ChangeLower { .. } => "CHANGE_LOWER",
            ChangeUpper { .. } => "CHANGE_UPPER",
            ChangeLhs { .. } => "CHANGE_LHS",
            ChangeRhs { .. } => "CHANGE_RHS",
            ChangeCoeff { .. } => "CHANGE_COEFF",
            SubstituteInObjective { .. } => "SUBSTITUTE_IN_OBJECTIVE",
            SubstituteColumn { .. } => "SUBSTITUTE_COLUMN",
            MarkRowRedundant(_) => "MARK_ROW_REDUNDANT",
            DeleteColumn { .. } => "DELETE_COLUMN",
            AggregateParallelCols { .. } => "AGGREGATE_PARALLEL_COLS",
            ReplaceColumn { .. } => "REPLACE_COLUMN",
            ImplyIntegral(_) => "IMPLY_INTEGRAL",
        }
    }

    pub fn row(&self) -> Option<usize> {
        use ReductionStep::*;
        match self {
            AssertRowUnmodified(r) | AssertRowBoundsUnmodified(r) | MarkRowRedundant(r) => Some(*r),
            ChangeLhs { row, .. }
            | ChangeRhs { row, .. }
            | ChangeCoeff { row, .. }
            | SubstituteInObjective { row, .. }
            | SubstituteColumn { row, .. } => Some(*row),
            _ => None,
        }
    }

    pub fn col(&self) -> Option<usize> {
        use ReductionStep::*;
        match self {
            AssertColBoundsUnmodified(c) | AssertColUnmodified(c) | ImplyIntegral(c) => Some(*c),
            FixColumn { col, .. }
            | ChangeLower { col, .. }
            | ChangeUpper { col, .. }
            | ChangeCoeff { col, .. }
            | SubstituteInObjective { col, .. }
            | SubstituteColumn { col, .. }
            | DeleteColumn { col }
            | ReplaceColumn { col, .. } => Some(*col),
            AggregateParallelCols { keep, .. } => Some(*keep),
            _ => None,
        }
    }

    /// Columns the step changes or reads; all must be active when applied.
    fn referenced_cols(&self) -> Vec<usize> {
        use ReductionStep::*;
        match self {
            AggregateParallelCols { keep, remove, .. } => vec![*keep, *remove],
            ReplaceColumn { col, by, .. } => vec![*col, *by],
            _ if self.is_assertion() => Vec::new(),
            _ => self.col().into_iter().collect(),
        }
    }

    /// Text of the value field in the transaction log.
    pub fn value_text(&self) -> String {
        use ReductionStep::*;
        let opt = |v: &Option<R>, inf: &str| v.as_ref().map_or(inf.to_string(), |x| x.to_exact_string());
        match self {
            FixColumn { value, .. } | ChangeLower { value, .. } | ChangeUpper { value, .. } => value.to_exact_string(),
            ChangeCoeff { value, .. } => value.to_exact_string(),
            ChangeLhs { value, .. } => opt(value, "-inf"),
            ChangeRhs { value, .. } => opt(value, "inf"),
            AggregateParallelCols { remove, scale, .. } => format!("{}@{}", scale.to_exact_string(), remove),
            ReplaceColumn { by, factor, offset, .. } => {
                format!("{}*{}+{}", factor.to_exact_string(), by, offset.to_exact_string())
            }
            _ => "0".to_string(),
        }
    }
}

/// Reductions of one presolver call that must be applied together.
#[derive(Clone, Debug, PartialEq)]
pub struct Transaction<R> {
    pub presolver: &'static str,
    pub steps: Vec<ReductionStep<R>>,
}

impl<R: Real> Transaction<R> {
    pub fn new(presolver: &'static str) -> Self {
        Transaction {
            presolver,
            steps: Vec::new(),
        }
    }

    pub fn push(&mut self, step: ReductionStep<R>) -> &mut Self {
        self.steps.push(step);
        self
    }

    pub fn with(mut self, step: ReductionStep<R>) -> Self {
        self.steps.push(step);
        self
    }

    pub fn assertions(&self) -> impl Iterator<Item = &ReductionStep<R>> {
        self.steps.iter().filter(|s| s.is_assertion())
    }

    pub fn changes(&self) -> impl Iterator<Item = &ReductionStep<R>> {
        self.steps.iter().filter(|s| !s.is_assertion())
    }

    /// At least one change, and no assertion after a change.
    pub fn is_well_formed(&self) -> bool {
        let first_change = self.steps.iter().position(|s| !s.is_assertion());
        match first_change {
            None => false,
            Some(p) => self.steps[p..].iter().all(|s| !s.is_assertion()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TxStatus {
    Applied,
    Discarded,
    Canceled,
}

impl TxStatus {
    pub fn name(self) -> &'static str {
        match self {
            TxStatus::Applied => "APPLIED",
            TxStatus::Discarded => "DISCARDED",
            TxStatus::Canceled => "CANCELED",
        }
    }
}

impl fmt::Display for TxStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApplyOutcome {
    pub status: TxStatus,
    /// Position of the applied transaction responsible for a discard.
    pub conflict_index: Option<usize>,
    pub conflicting_presolver: Option<&'static str>,
    pub redundant: bool,
}

impl ApplyOutcome {
    fn applied() -> Self {
        ApplyOutcome {
            status: TxStatus::Applied,
            conflict_index: None,
            conflicting_presolver: None,
            redundant: false,
        }
    }
}

enum Check {
    Ok,
    Conflict(Option<usize>),
    FillIn,
}

fn lowest(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn check<R: Real>(state: &ProblemState<R>, tx: &Transaction<R>) -> Check {
    use ReductionStep::*;
    let flags = &state.flags;
    let p = state.problem();
    let mut failed = false;
    let mut setter = None;
    let mut fail = |s: Option<usize>| {
        failed = true;
        setter = lowest(setter, s);
    };
    for step in &tx.steps {
        match step {
            AssertRowUnmodified(r) => {
                if flags.row_coeffs[*r].is_some() || !p.is_row_active(*r) {
                    fail(flags.row_coeffs[*r]);
                }
            }
            AssertRowBoundsUnmodified(r) => {
                if flags.row_sides[*r].is_some() || !p.is_row_active(*r) {
                    fail(lowest(flags.row_sides[*r], flags.row_coeffs[*r]));
                }
            }
            AssertColBoundsUnmodified(c) => {
                if flags.col_bounds[*c].is_some() || !p.is_col_active(*c) {
                    fail(flags.col_bounds[*c]);
                }
            }
            AssertColUnmodified(c) => {
                if flags.col_coeffs[*c].is_some() || !p.is_col_active(*c) {
                    fail(lowest(flags.col_coeffs[*c], flags.col_bounds[*c]));
                }
            }
            _ => {
                for c in step.referenced_cols() {
                    if !p.is_col_active(c) {
                        fail(lowest(flags.col_coeffs[c], flags.col_bounds[c]));
                    } else if flags.col_redefined[c].is_some() {
                        fail(flags.col_redefined[c]);
                    }
                }
                if let Some(r) = step.row() {
                    if !p.is_row_active(r) {
                        fail(lowest(flags.row_coeffs[r], flags.row_sides[r]));
                    }
                }
                if !step_is_applicable(state, step) {
                    fail(None);
                }
            }
        }
    }
    if failed {
        return Check::Conflict(setter);
    }
    for step in tx.changes() {
        if let SubstituteColumn { col, row } = step {
            if substitution_fill_in(state, *col, *row) > 0 {
                return Check::FillIn;
            }
        }
    }
    Check::Ok
}

/// Structural preconditions a change needs beyond the flags.
fn step_is_applicable<R: Real>(state: &ProblemState<R>, step: &ReductionStep<R>) -> bool {
    use ReductionStep::*;
    let p = state.problem();
    match step {
        SubstituteInObjective { col, row } | SubstituteColumn { col, row } => {
            p.is_equation(*row) && p.matrix.get(*row, *col).is_some()
        }
        DeleteColumn { col } => p.matrix.col(*col).len() == 1 && p.objective[*col].is_zero(),
        ReplaceColumn { col, by, factor, offset } => {
            col != by
                && (!p.is_integral(*col)
                    || (p.is_integral(*by)
                        && factor.to_i64_exact().is_some()
                        && offset.to_i64_exact().is_some()))
        }
        AggregateParallelCols { keep, remove, .. } => keep != remove,
        _ => true,
    }
}

/// Net change of the matrix nonzero count caused by eliminating `col` with
/// the equation `row` (the equation itself is removed).
pub fn substitution_fill_in<R: Real>(state: &ProblemState<R>, col: usize, row: usize) -> isize {
    let p = state.problem();
    let ctx = state.ctx();
    let Some(pivot) = p.matrix.get(row, col).cloned() else {
        return 0;
    };
    let eq = p.matrix.row(row);
    let mut delta = -(eq.len() as isize);
    for e in p.matrix.col(col) {
        if e.index == row {
            continue;
        }
        let factor = e.value.clone() / pivot.clone();
        let target = p.matrix.row(e.index);
        let mut t = 0;
        let mut before = 0isize;
        let mut after = 0isize;
        for q in eq {
            if q.index == col {
                continue;
            }
            while t < target.len() && target[t].index < q.index {
                t += 1;
            }
            let existing = if t < target.len() && target[t].index == q.index {
                Some(target[t].value.clone())
            } else {
                None
            };
            let updated = existing.clone().unwrap_or_else(R::zero) - factor.clone() * q.value.clone();
            before += existing.is_some() as isize;
            after += (!ctx.is_zero(&updated)) as isize;
        }
        delta += after - before - 1;
    }
    delta
}

/// Applies every transaction whose assertions still hold, in list order.
/// Modification flags are reset first: the list is one batch computed on a
/// single snapshot of the problem.
pub fn apply_all<R: Real>(
    state: &mut ProblemState<R>,
    transactions: &[Transaction<R>],
    record: &mut PostsolveRecord<R>,
) -> Result<Vec<ApplyOutcome>, Verdict> {
    state.flags.clear();
    let mut outcomes = Vec::with_capacity(transactions.len());
    for (index, tx) in transactions.iter().enumerate() {
        let outcome = match check(state, tx) {
            Check::Ok => {
                state.begin_transaction(index);
                let changes: Vec<ReductionStep<R>> = tx.changes().cloned().collect();
                apply_steps(state, &changes, Some(record))?;
                ApplyOutcome::applied()
            }
            Check::FillIn => ApplyOutcome {
                status: TxStatus::Canceled,
                conflict_index: None,
                conflicting_presolver: None,
                redundant: false,
            },
            Check::Conflict(setter) => {
                let culprit = setter.filter(|&s| s < index);
                ApplyOutcome {
                    status: TxStatus::Discarded,
                    conflict_index: culprit,
                    conflicting_presolver: Some(culprit.map_or(tx.presolver, |s| transactions[s].presolver)),
                    redundant: classify_redundant(state, tx),
                }
            }
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// True when every change of a discarded transaction is already in effect.
/// A heuristic lower bound on redundancy.
pub fn classify_redundant<R: Real>(state: &ProblemState<R>, tx: &Transaction<R>) -> bool {
    use ReductionStep::*;
    let p = state.problem();
    let ctx = state.ctx();
    tx.changes().all(|step| match step {
        FixColumn { col, value } => {
            !p.is_col_active(*col)
                || (p.lower[*col].as_ref() == Some(value) && p.upper[*col].as_ref() == Some(value))
        }
        ChangeLower { col, value } => {
            !p.is_col_active(*col) || p.lower[*col].as_ref().is_some_and(|l| ctx.is_ge(l, value))
        }
        ChangeUpper { col, value } => {
            !p.is_col_active(*col) || p.upper[*col].as_ref().is_some_and(|u| ctx.is_le(u, value))
        }
        ChangeLhs { row, value } => {
            !p.is_row_active(*row)
                || match (p.lhs(*row), value) {
                    (Some(l), Some(v)) => ctx.is_ge(l, v),
                    (_, None) => true,
                    (None, Some(_)) => false,
                }
        }
        ChangeRhs { row, value } => {
            !p.is_row_active(*row)
                || match (p.rhs(*row), value) {
                    (Some(r), Some(v)) => ctx.is_le(r, v),
                    (_, None) => true,
                    (None, Some(_)) => false,
                }
        }
        ChangeCoeff { row, col, value } => {
            !p.is_row_active(*row)
                || !p.is_col_active(*col)
                || match p.matrix.get(*row, *col) {
                    Some(v) => ctx.approx_eq(v, value),
                    None => value.is_zero(),
                }
        }
        MarkRowRedundant(row) => !p.is_row_active(*row),
        SubstituteInObjective { col, .. } | SubstituteColumn { col, .. } | DeleteColumn { col } => {
            !p.is_col_active(*col)
        }
        ReplaceColumn { col, .. } => !p.is_col_active(*col),
        AggregateParallelCols { remove, .. } => !p.is_col_active(*remove),
        ImplyIntegral(col) => !p.is_col_active(*col) || p.is_integral(*col),
        _ => true,
    })
}

/// Applies change steps in order. A `ChangeLhs` directly followed by a
/// `ChangeRhs` of the same row sets both sides at once, so the pair may move
/// a row past its old sides.
pub fn apply_steps<R: Real>(
    state: &mut ProblemState<R>,
    steps: &[ReductionStep<R>],
    mut record: Option<&mut PostsolveRecord<R>>,
) -> Result<(), Verdict> {
    let mut k = 0;
    while k < steps.len() {
        if let (ReductionStep::ChangeLhs { row, value: lhs }, Some(ReductionStep::ChangeRhs { row: r2, value: rhs })) =
            (&steps[k], steps.get(k + 1))
        {
            if row == r2 {
                state.set_sides(*row, lhs.clone(), rhs.clone())?;
                if let Some(rec) = record.as_deref_mut() {
                    rec.push(steps[k].clone(), PostsolveData::None);
                    rec.push(steps[k + 1].clone(), PostsolveData::None);
                }
                k += 2;
                continue;
            }
        }
        apply_step(state, &steps[k], record.as_deref_mut())?;
        k += 1;
    }
    Ok(())
}

/// Applies one change step without any validity check. With a record, the
/// step and the data needed to undo it are appended.
pub fn apply_step<R: Real>(
    state: &mut ProblemState<R>,
    step: &ReductionStep<R>,
    record: Option<&mut PostsolveRecord<R>>,
) -> Result<(), Verdict> {
    use ReductionStep::*;
    let mut data = PostsolveData::None;
    match step {
        AssertRowUnmodified(_) | AssertRowBoundsUnmodified(_) | AssertColBoundsUnmodified(_) | AssertColUnmodified(_) => {
            return Ok(())
        }
        FixColumn { col, value } => {
            state.fix_column(*col, value.clone())?;
            let fixed = state.problem().lower[*col].clone().unwrap_or_else(|| value.clone());
            data = PostsolveData::Fixed { col: *col, value: fixed };
        }
        ChangeLower { col, value } => {
            state.change_lower(*col, value.clone())?;
        }
        ChangeUpper { col, value } => {
            state.change_upper(*col, value.clone())?;
        }
        ChangeLhs { row, value } => {
            state.set_lhs(*row, value.clone())?;
        }
        ChangeRhs { row, value } => {
            state.set_rhs(*row, value.clone())?;
        }
        ChangeCoeff { row, col, value } => state.set_coeff(*row, *col, value.clone()),
        MarkRowRedundant(row) => state.mark_row_redundant(*row),
        ImplyIntegral(col) => state.imply_integral(*col)?,
        SubstituteInObjective { col, row } => {
            data = substitute_in_objective(state, *col, *row);
        }
        SubstituteColumn { col, row } => {
            data = substitute_column(state, *col, *row)?;
        }
        DeleteColumn { col } => {
            data = delete_column(state, *col)?;
        }
        AggregateParallelCols { keep, remove, scale } => {
            data = aggregate(state, *keep, *remove, scale.clone());
        }
        ReplaceColumn { col, by, factor, offset } => {
            data = replace_column(state, *col, *by, factor.clone(), offset.clone())?;
        }
    }
    if let Some(record) = record {
        record.push(step.clone(), data);
    }
    Ok(())
}

fn row_without<R: Real>(state: &ProblemState<R>, row: usize, col: usize) -> Vec<(usize, R)> {
    state
        .problem()
        .matrix
        .row(row)
        .iter()
        .filter(|e| e.index != col)
        .map(|e| (e.index, e.value.clone()))
        .collect()
}

fn substitute_in_objective<R: Real>(state: &mut ProblemState<R>, col: usize, row: usize) -> PostsolveData<R> {
    let p = state.problem();
    let coef = p.matrix.get(row, col).cloned().expect("column has an entry in the row");
    let rhs = p.rhs(row).cloned().expect("equation has finite sides");
    let cost = p.objective[col].clone();
    let entries = row_without(state, row, col);
    let integral = p.is_integral(col);
    if !cost.is_zero() {
        let ratio = cost.clone() / coef.clone();
        for (k, a) in &entries {
            state.add_to_objective(*k, -(ratio.clone() * a.clone()));
        }
        state.add_to_offset(ratio * rhs.clone());
        state.add_to_objective(col, -cost);
    }
    state.mark_substituted(col);
    PostsolveData::Substituted {
        col,
        coef,
        entries,
        rhs,
        integral,
    }
}

fn substitute_column<R: Real>(state: &mut ProblemState<R>, col: usize, row: usize) -> Result<PostsolveData<R>, Verdict> {
    let p = state.problem();
    let pivot = p.matrix.get(row, col).cloned().expect("column has an entry in the row");
    let rhs = p.rhs(row).cloned().expect("equation has finite sides");
    let entries = row_without(state, row, col);
    let integral = p.is_integral(col);
    let targets: Vec<(usize, R)> = p
        .matrix
        .col(col)
        .iter()
        .filter(|e| e.index != row)
        .map(|e| (e.index, e.value.clone()))
        .collect();
    for (target, a) in targets {
        let factor = a / pivot.clone();
        for (k, ak) in &entries {
            let current = state.problem().matrix.get(target, *k).cloned().unwrap_or_else(R::zero);
            state.set_coeff(target, *k, current - factor.clone() * ak.clone());
        }
        state.set_coeff(target, col, R::zero());
        let shift = factor * rhs.clone();
        let lhs = state.problem().lhs(target).map(|l| l.clone() - shift.clone());
        let rhs_t = state.problem().rhs(target).map(|r| r.clone() - shift.clone());
        state.set_sides(target, lhs, rhs_t)?;
    }
    let cost = state.problem().objective[col].clone();
    if !cost.is_zero() {
        let ratio = cost / pivot.clone();
        for (k, a) in &entries {
            state.add_to_objective(*k, -(ratio.clone() * a.clone()));
        }
        state.add_to_offset(ratio * rhs.clone());
    }
    state.mark_row_redundant(row);
    state.deactivate_col(col);
    Ok(PostsolveData::Substituted {
        col,
        coef: pivot,
        entries,
        rhs,
        integral,
    })
}

fn delete_column<R: Real>(state: &mut ProblemState<R>, col: usize) -> Result<PostsolveData<R>, Verdict> {
    let p = state.problem();
    let e = p.matrix.col(col)[0].clone();
    let (row, coef) = (e.index, e.value);
    let entries = row_without(state, row, col);
    let lhs = p.lhs(row).cloned();
    let rhs = p.rhs(row).cloned();
    let lower = p.lower[col].clone();
    let upper = p.upper[col].clone();
    let (max_bound, min_bound) = if coef.is_positive() {
        (upper.clone(), lower.clone())
    } else {
        (lower.clone(), upper.clone())
    };
    let new_lhs = match (&lhs, &max_bound) {
        (Some(l), Some(b)) => Some(l.clone() - coef.clone() * b.clone()),
        _ => None,
    };
    let new_rhs = match (&rhs, &min_bound) {
        (Some(r), Some(b)) => Some(r.clone() - coef.clone() * b.clone()),
        _ => None,
    };
    state.set_sides(row, new_lhs, new_rhs)?;
    state.deactivate_col(col);
    Ok(PostsolveData::FreeColumn {
        col,
        coef,
        entries,
        lhs,
        rhs,
        lower,
        upper,
    })
}

fn aggregate<R: Real>(state: &mut ProblemState<R>, keep: usize, remove: usize, scale: R) -> PostsolveData<R> {
    let p = state.problem();
    let (kl, ku) = (p.lower[keep].clone(), p.upper[keep].clone());
    let (rl, ru) = (p.lower[remove].clone(), p.upper[remove].clone());
    let (lo_r, hi_r) = if scale.is_positive() { (&rl, &ru) } else { (&ru, &rl) };
    let lower = match (&kl, lo_r) {
        (Some(a), Some(b)) => Some(a.clone() + scale.clone() * b.clone()),
        _ => None,
    };
    let upper = match (&ku, hi_r) {
        (Some(a), Some(b)) => Some(a.clone() + scale.clone() * b.clone()),
        _ => None,
    };
    let integral = p.is_integral(keep);
    state.deactivate_col(remove);
    state.set_bounds(keep, lower, upper);
    state.redefine_col(keep);
    PostsolveData::Aggregated {
        keep,
        remove,
        scale,
        keep_lower: kl,
        keep_upper: ku,
        remove_lower: rl,
        remove_upper: ru,
        integral,
    }
}

fn replace_column<R: Real>(
    state: &mut ProblemState<R>,
    col: usize,
    by: usize,
    factor: R,
    offset: R,
) -> Result<PostsolveData<R>, Verdict> {
    let p = state.problem();
    let entries: Vec<(usize, R)> = p.matrix.col(col).iter().map(|e| (e.index, e.value.clone())).collect();
    let (cl, cu) = (p.lower[col].clone(), p.upper[col].clone());
    let cost = p.objective[col].clone();
    for (row, a) in entries {
        let current = state.problem().matrix.get(row, by).cloned().unwrap_or_else(R::zero);
        state.set_coeff(row, by, current + a.clone() * factor.clone());
        state.set_coeff(row, col, R::zero());
        let shift = a * offset.clone();
        let lhs = state.problem().lhs(row).map(|l| l.clone() - shift.clone());
        let rhs = state.problem().rhs(row).map(|r| r.clone() - shift.clone());
        state.set_sides(row, lhs, rhs)?;
    }
    if !cost.is_zero() {
        state.add_to_objective(by, cost.clone() * factor.clone());
        state.add_to_offset(cost * offset.clone());
    }
    state.deactivate_col(col);
    // Bounds of the replaced column become bounds on the replacing one.
    let (lo, hi) = if factor.is_positive() { (cl, cu) } else { (cu, cl) };
    if let Some(b) = lo {
        state.change_lower(by, (b - offset.clone()) / factor.clone())?;
    }
    if let Some(b) = hi {
        state.change_upper(by, (b - offset.clone()) / factor.clone())?;
    }
    Ok(PostsolveData::Replaced {
        col,
        by,
        factor,
        offset,
    })
}

/// Verbose log lines for one processed transaction.
pub fn log_lines<R: Real>(id: usize, tx: &Transaction<R>, outcome: &ApplyOutcome) -> Vec<String> {
    let mut lines = Vec::with_capacity(tx.steps.len() + 1);
    lines.push(format!(
        "transaction {} presolver {} status {} conflict {} redundant {}",
        id,
        tx.presolver,
        outcome.status,
        outcome.conflicting_presolver.unwrap_or("-"),
        outcome.redundant as u8
    ));
    let idx = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
    for step in &tx.steps {
        lines.push(format!(
            "{} row {} col {} val {} kind {} status {}",
            tx.presolver,
            idx(step.row()),
            idx(step.col()),
            step.value_text(),
            step.kind_name(),
            outcome.status
        ));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemBuilder;
    use crate::numerics::NumericContext;
    use ReductionStep::*;

    /// Column 1 is a continuous singleton in the equation `x0 + 2 x1 = 4`.
    fn singleton_state() -> ProblemState<f64> {
        let mut b = ProblemBuilder::new();
        let x0 = b.add_col("x0", 1.0, Some(0.0), Some(10.0), false);
        let x1 = b.add_col("x1", 3.0, Some(0.0), Some(1.0), false);
        b.add_row("eq", &[(x0, 1.0), (x1, 2.0)], Some(4.0), Some(4.0));
        b.add_row("other", &[(x0, 1.0)], None, Some(8.0));
        let p = b.build();
        
        ProblemState::new(p, NumericContext::default())
    }

    fn singleton_tx() -> Transaction<f64> {
        Transaction::new("colsingleton")
            .with(AssertColBoundsUnmodified(1))
            .with(AssertRowBoundsUnmodified(0))
            .with(SubstituteInObjective { col: 1, row: 0 })
            .with(ChangeCoeff { row: 0, col: 1, value: 0.0 })
            .with(ChangeLhs { row: 0, value: Some(2.0) })
            .with(ChangeRhs { row: 0, value: Some(4.0) })
    }

    #[test]
    fn singleton_transaction_applies_on_fresh_flags() {
        let mut s = singleton_state();
        let mut rec = PostsolveRecord::new(s.problem());
        let out = apply_all(&mut s, &[singleton_tx()], &mut rec).unwrap();
        assert_eq!(out[0].status, TxStatus::Applied);
        let p = s.problem();
        assert!(!p.is_col_active(1));
        // x1 = (4 - x0) / 2 so cost 3 x1 = 6 - 1.5 x0.
        assert_eq!(p.objective[0], -0.5);
        assert_eq!(p.objective_offset, 6.0);
        assert_eq!((p.lhs(0), p.rhs(0)), (Some(&2.0), Some(&4.0)));
        s.check_consistency().unwrap();
    }

    #[test]
    fn singleton_transaction_discarded_after_side_change() {
        let mut s = singleton_state();
        let mut rec = PostsolveRecord::new(s.problem());
        let first = Transaction::new("parallelrows").with(ChangeRhs { row: 0, value: Some(4.0) }).with(ChangeLhs {
            row: 0,
            value: Some(3.0),
        });
        let out = apply_all(&mut s, &[first, singleton_tx()], &mut rec).unwrap();
        assert_eq!(out[0].status, TxStatus::Applied);
        assert_eq!(out[1].status, TxStatus::Discarded);
        assert_eq!(out[1].conflicting_presolver, Some("parallelrows"));
        assert_eq!(out[1].conflict_index, Some(0));
        assert!(!out[1].redundant);
        assert!(s.problem().is_col_active(1));
    }

    #[test]
    fn empty_list_changes_nothing() {
        let mut s = singleton_state();
        let before = s.problem().clone();
        let mut rec = PostsolveRecord::new(s.problem());
        assert!(apply_all(&mut s, &[], &mut rec).unwrap().is_empty());
        assert_eq!(s.problem(), &before);
        assert!(rec.entries.is_empty());
    }

    #[test]
    fn discarded_transaction_leaves_state_untouched() {
        let mut s = singleton_state();
        let mut rec = PostsolveRecord::new(s.problem());
        let fix = Transaction::new("dualfix").with(FixColumn { col: 1, value: 0.0 });
        apply_all(&mut s, std::slice::from_ref(&fix), &mut rec).unwrap();
        let snapshot = (s.problem().clone(), rec.entries.len());
        let out = apply_all(&mut s, &[fix.clone(), fix], &mut rec).unwrap();
        assert_eq!(out[0].status, TxStatus::Discarded);
        assert!(out[0].redundant);
        assert_eq!(s.problem(), &snapshot.0);
        assert_eq!(rec.entries.len(), snapshot.1);
    }

    #[test]
    fn substitution_with_fill_in_is_canceled() {
        // x0 = 1 - x1 - x2 - x3 substituted into two rows lacking x1..x3.
        let mut b = ProblemBuilder::<f64>::new();
        let c: Vec<usize> = (0..4).map(|j| b.add_col(&format!("x{j}"), 0.0, None, None, false)).collect();
        b.add_row("eq", &[(c[0], 1.0), (c[1], 1.0), (c[2], 1.0), (c[3], 1.0)], Some(1.0), Some(1.0));
        b.add_row("r1", &[(c[0], 1.0)], None, Some(5.0));
        b.add_row("r2", &[(c[0], 2.0)], None, Some(5.0));
        b.add_row("r3", &[(c[0], 3.0)], None, Some(5.0));
        let mut s = ProblemState::new(b.build(), NumericContext::default());
        assert_eq!(substitution_fill_in(&s, 0, 0), 2);
        let mut rec = PostsolveRecord::new(s.problem());
        let tx = Transaction::new("substitution").with(AssertRowUnmodified(0)).with(SubstituteColumn { col: 0, row: 0 });
        let out = apply_all(&mut s, &[tx], &mut rec).unwrap();
        assert_eq!(out[0].status, TxStatus::Canceled);
        assert_eq!(s.problem().matrix.nnz(), 7);
    }

    #[test]
    fn log_format() {
        let tx: Transaction<f64> = Transaction::new("dualfix").with(AssertColUnmodified(2)).with(FixColumn { col: 2, value: 1.0 });
        let out = ApplyOutcome::applied();
        let lines = log_lines(7, &tx, &out);
        assert_eq!(lines[0], "transaction 7 presolver dualfix status APPLIED conflict - redundant 0");
        assert_eq!(lines[2], "dualfix row - col 2 val 1 kind FIX_COLUMN status APPLIED");
        assert!(tx.is_well_formed());
    }
}
