use super::{PresolveView, PresolverOutput};
use crate::error::Verdict;
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "trivial";

/// Cheap cleanup: integral bound rounding, fixed and empty columns, empty,
/// free, singleton and activity-redundant rows.
pub fn run_trivial<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let mut out = Vec::new();
    for j in p.active_cols() {
        let name = &p.col_names[j];
        let mut lower = p.lower[j].clone();
        let mut upper = p.upper[j].clone();
        if p.is_integral(j) {
            let mut tx = Transaction::new(NAME);
            if let Some(l) = lower.as_ref().filter(|l| **l != l.round()) {
                tx.push(ChangeLower { col: j, value: l.clone() });
                lower = Some(ctx.feas_ceil(l));
            }
            if let Some(u) = upper.as_ref().filter(|u| **u != u.round()) {
                tx.push(ChangeUpper { col: j, value: u.clone() });
                upper = Some(ctx.feas_floor(u));
            }
            if !tx.steps.is_empty() {
                out.push(tx);
            }
        }
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if !ctx.is_feas_le(l, u) {
                return Err(Verdict::infeasible(format!("column {name} has bounds [{l}, {u}]")));
            }
            if l >= u {
                out.push(Transaction::new(NAME).with(FixColumn { col: j, value: l.clone() }));
                continue;
            }
        }
        if p.matrix.col(j).is_empty() {
            let cost = &p.objective[j];
            let value = if cost.is_positive() {
                lower.ok_or_else(|| Verdict::unbounded(format!("empty column {name} has no lower bound")))?
            } else if cost.is_negative() {
                upper.ok_or_else(|| Verdict::unbounded(format!("empty column {name} has no upper bound")))?
            } else {
                lower.or(upper).unwrap_or_else(R::zero)
            };
            out.push(
                Transaction::new(NAME)
                    .with(AssertColUnmodified(j))
                    .with(FixColumn { col: j, value }),
            );
        }
    }
    for i in p.active_rows() {
        let row = p.matrix.row(i);
        let lhs = p.lhs(i);
        let rhs = p.rhs(i);
        let name = &p.row_names[i];
        if row.is_empty() {
            let zero = R::zero();
            if lhs.is_some_and(|l| !ctx.is_feas_le(l, &zero)) || rhs.is_some_and(|r| !ctx.is_feas_ge(r, &zero)) {
                return Err(Verdict::infeasible(format!("empty row {name} excludes zero")));
            }
            out.push(Transaction::new(NAME).with(MarkRowRedundant(i)));
            continue;
        }
        if lhs.is_none() && rhs.is_none() {
            out.push(Transaction::new(NAME).with(MarkRowRedundant(i)));
            continue;
        }
        if row.len() == 1 {
            let (j, a) = (row[0].index, &row[0].value);
            let by_lhs = lhs.map(|l| l.clone() / a.clone());
            let by_rhs = rhs.map(|r| r.clone() / a.clone());
            let (lo, hi) = if a.is_positive() { (by_lhs, by_rhs) } else { (by_rhs, by_lhs) };
            let mut tx = Transaction::new(NAME)
                .with(AssertRowUnmodified(i))
                .with(AssertRowBoundsUnmodified(i));
            if let Some(v) = lo {
                tx.push(ChangeLower { col: j, value: v });
            }
            if let Some(v) = hi {
                tx.push(ChangeUpper { col: j, value: v });
            }
            tx.push(MarkRowRedundant(i));
            out.push(tx);
            continue;
        }
        let act = &view.activities[i];
        let min = act.finite_min();
        let max = act.finite_max();
        if let (Some(l), Some(m)) = (lhs, max) {
            if !ctx.is_feas_ge(m, l) {
                return Err(Verdict::infeasible(format!("row {name}: maximum activity {m} below {l}")));
            }
        }
        if let (Some(r), Some(m)) = (rhs, min) {
            if !ctx.is_feas_le(m, r) {
                return Err(Verdict::infeasible(format!("row {name}: minimum activity {m} above {r}")));
            }
        }
        let lhs_redundant = lhs.is_none_or(|l| min.is_some_and(|m| ctx.is_ge(m, l)));
        let rhs_redundant = rhs.is_none_or(|r| max.is_some_and(|m| ctx.is_le(m, r)));
        if lhs_redundant && rhs_redundant {
            out.push(Transaction::new(NAME).with(MarkRowRedundant(i)));
        } else if lhs_redundant && lhs.is_some() {
            out.push(Transaction::new(NAME).with(ChangeLhs { row: i, value: None }));
        } else if rhs_redundant && rhs.is_some() {
            out.push(Transaction::new(NAME).with(ChangeRhs { row: i, value: None }));
        }
    }
    Ok(out)
}
