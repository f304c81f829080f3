use super::{PresolveView, PresolverOutput};
use crate::error::Verdict;
use crate::model::{Problem, RowActivity};
use crate::numerics::{NumericContext, Real};
use crate::transaction::{ReductionStep, ReductionStep::*, Transaction};

const NAME: &str = "propagation";

/// Relative improvement a continuous bound needs before it is worth a change.
pub(crate) const MIN_CONTINUOUS_IMPROVEMENT: f64 = 1e-3;

/// Whether `new` is a worthwhile tightening of the bound `old`.
pub(crate) fn accept_bound<R: Real>(
    ctx: &NumericContext<R>,
    integral: bool,
    new: &R,
    old: Option<&R>,
    is_lower: bool,
) -> bool {
    if ctx.is_huge(new) {
        return false;
    }
    let Some(old) = old else { return true };
    let gain = if is_lower { new.clone() - old.clone() } else { old.clone() - new.clone() };
    if integral {
        return gain.is_positive();
    }
    let scale = R::max_of(&R::one(), &old.abs());
    gain > R::from_f64(MIN_CONTINUOUS_IMPROVEMENT) * scale
}

/// Bound candidates implied on the columns of one row.
pub(crate) struct RowBounds<R> {
    pub col: usize,
    pub lower: Option<R>,
    pub upper: Option<R>,
}

/// Checks the row against its activity and derives column bounds. Only
/// bounds passing [`accept_bound`] are returned, rounded for integral columns.
pub(crate) fn propagate_row<R: Real>(
    p: &Problem<R>,
    lower: &[Option<R>],
    upper: &[Option<R>],
    act: &RowActivity<R>,
    row: usize,
    ctx: &NumericContext<R>,
) -> Result<Vec<RowBounds<R>>, Verdict> {
    let lhs = p.lhs(row);
    let rhs = p.rhs(row);
    if let (Some(r), Some(m)) = (rhs, act.finite_min()) {
        if !ctx.is_feas_le(m, r) {
            return Err(Verdict::infeasible(format!("row {}: minimum activity {m} above {r}", p.row_names[row])));
        }
    }
    if let (Some(l), Some(m)) = (lhs, act.finite_max()) {
        if !ctx.is_feas_ge(m, l) {
            return Err(Verdict::infeasible(format!("row {}: maximum activity {m} below {l}", p.row_names[row])));
        }
    }
    let mut out = Vec::new();
    for e in p.matrix.row(row) {
        let (j, a) = (e.index, &e.value);
        let (lj, uj) = (lower[j].as_ref(), upper[j].as_ref());
        let mut lo = None;
        let mut hi = None;
        // a x <= rhs - minAct(rest)
        if let (Some(r), Some(rest)) = (rhs, act.min_without(a, lj, uj)) {
            let v = (r.clone() - rest) / a.clone();
            if a.is_positive() {
                hi = Some(v);
            } else {
                lo = Some(v);
            }
        }
        // a x >= lhs - maxAct(rest)
        if let (Some(l), Some(rest)) = (lhs, act.max_without(a, lj, uj)) {
            let v = (l.clone() - rest) / a.clone();
            if a.is_positive() {
                lo = Some(v);
            } else {
                hi = Some(v);
            }
        }
        let integral = p.is_integral(j);
        let lo = lo
            .map(|v| if integral { ctx.feas_ceil(&v) } else { v })
            .filter(|v| accept_bound(ctx, integral, v, lj, true));
        let hi = hi
            .map(|v| if integral { ctx.feas_floor(&v) } else { v })
            .filter(|v| accept_bound(ctx, integral, v, uj, false));
        if lo.is_some() || hi.is_some() {
            out.push(RowBounds { col: j, lower: lo, upper: hi });
        }
    }
    Ok(out)
}

pub fn run_propagation<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    for &i in view.changed_rows {
        if !p.is_row_active(i) {
            continue;
        }
        for b in propagate_row(p, &p.lower, &p.upper, &view.activities[i], i, view.ctx)? {
            let steps: [Option<ReductionStep<R>>; 2] = [
                b.lower.map(|value| ChangeLower { col: b.col, value }),
                b.upper.map(|value| ChangeUpper { col: b.col, value }),
            ];
            for step in steps.into_iter().flatten() {
                out.push(Transaction::new(NAME).with(step));
            }
        }
    }
    Ok(out)
}
