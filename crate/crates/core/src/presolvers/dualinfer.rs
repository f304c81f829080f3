use std::collections::BTreeSet;

use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "dualinfer";

/// What a derived fact rests on.
#[derive(Clone, Debug, Default)]
struct Deps {
    rows: BTreeSet<usize>,
    cols: BTreeSet<usize>,
}

impl Deps {
    fn merge(&mut self, other: &Deps) {
        self.rows.extend(&other.rows);
        self.cols.extend(&other.cols);
    }

    fn into_transaction<R: Real>(self) -> Transaction<R> {
        let mut tx = Transaction::new(NAME);
        for i in self.rows {
            tx.push(AssertRowUnmodified(i));
            tx.push(AssertRowBoundsUnmodified(i));
        }
        for j in self.cols {
            tx.push(AssertColUnmodified(j));
            tx.push(AssertColBoundsUnmodified(j));
        }
        tx
    }
}

/// Bounds of one dual multiplier with their dependencies.
#[derive(Clone, Debug)]
struct DualBound<R> {
    lower: Option<R>,
    upper: Option<R>,
    lower_deps: Deps,
    upper_deps: Deps,
}

/// Continuous columns whose bounds are implied by a row are treated as free.
/// A row only serves one column, and the other columns of that row are then
/// kept out, so no relaxation relies on another one.
fn relax_implied_free<R: Real>(view: &PresolveView<R>) -> Vec<Option<Deps>> {
    let p = view.problem;
    let ctx = view.ctx;
    let mut relaxed: Vec<Option<Deps>> = vec![None; p.ncols()];
    let mut locked = vec![false; p.ncols()];
    for j in p.active_cols() {
        if p.is_integral(j) || locked[j] || (p.lower[j].is_none() && p.upper[j].is_none()) {
            continue;
        }
        for e in p.matrix.col(j) {
            let i = e.index;
            let row = p.matrix.row(i);
            if row.iter().any(|f| f.index != j && relaxed[f.index].is_some()) {
                continue;
            }
            let a = &e.value;
            let (lj, uj) = (p.lower[j].as_ref(), p.upper[j].as_ref());
            let act = &view.activities[i];
            let from_rhs = p.rhs(i).zip(act.min_without(a, lj, uj)).map(|(r, m)| (r.clone() - m) / a.clone());
            let from_lhs = p.lhs(i).zip(act.max_without(a, lj, uj)).map(|(l, m)| (l.clone() - m) / a.clone());
            let (lo, hi) = if a.is_positive() { (from_lhs, from_rhs) } else { (from_rhs, from_lhs) };
            let lower_ok = lj.is_none_or(|l| lo.as_ref().is_some_and(|v| ctx.is_feas_ge(v, l)));
            let upper_ok = uj.is_none_or(|u| hi.as_ref().is_some_and(|v| ctx.is_feas_le(v, u)));
            if lower_ok && upper_ok {
                let mut deps = Deps::default();
                deps.rows.insert(i);
                for f in row {
                    deps.cols.insert(f.index);
                    if f.index != j {
                        locked[f.index] = true;
                    }
                }
                relaxed[j] = Some(deps);
                break;
            }
        }
    }
    relaxed
}

/// Bounds on the multipliers of the LP over the continuous columns: a row
/// with only a finite lhs has `y >= 0`, one with only a finite rhs `y <= 0`.
/// A column free above gives `sum a_i y_i <= c`, free below `>= c`; one pass
/// of propagation over these tightens the multiplier bounds. A multiplier
/// that is strictly signed makes its row hold with equality at every optimum,
/// and a strictly signed reduced cost fixes the column at one bound.
pub fn run_dualinfer<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let relaxed = relax_implied_free(view);
    let mut duals: Vec<DualBound<R>> = (0..p.nrows())
        .map(|i| {
            let mut base = Deps::default();
            base.rows.insert(i);
            let (lower, upper) = match (p.lhs(i), p.rhs(i)) {
                (Some(_), None) => (Some(R::zero()), None),
                (None, Some(_)) => (None, Some(R::zero())),
                _ => (None, None),
            };
            DualBound { lower, upper, lower_deps: base.clone(), upper_deps: base }
        })
        .collect();
    let continuous: Vec<usize> = p.active_cols().filter(|&j| !p.is_integral(j)).collect();
    let column_deps = |j: usize| {
        let mut d = relaxed[j].clone().unwrap_or_default();
        d.cols.insert(j);
        d
    };
    for &j in &continuous {
        let free_above = p.upper[j].is_none() || relaxed[j].is_some();
        let free_below = p.lower[j].is_none() || relaxed[j].is_some();
        let col = p.matrix.col(j);
        let c = &p.objective[j];
        for (le, active) in [(true, free_above), (false, free_below)] {
            if !active {
                continue;
            }
            // Write `>= c` as `sum (-a) y <= -c`.
            let sign = if le { R::one() } else { -R::one() };
            let rhs = sign.clone() * c.clone();
            for e in col {
                let i = e.index;
                let a = sign.clone() * e.value.clone();
                let mut rest = R::zero();
                let mut deps = column_deps(j);
                let mut finite = true;
                for f in col.iter().filter(|f| f.index != i) {
                    let b = sign.clone() * f.value.clone();
                    let d = &duals[f.index];
                    let (bound, bound_deps) = if b.is_positive() { (&d.lower, &d.lower_deps) } else { (&d.upper, &d.upper_deps) };
                    match bound {
                        Some(v) => {
                            rest = rest + b * v.clone();
                            deps.merge(bound_deps);
                        }
                        None => {
                            finite = false;
                            break;
                        }
                    }
                }
                if !finite {
                    continue;
                }
                let v = (rhs.clone() - rest) / a.clone();
                let d = &mut duals[i];
                if a.is_positive() {
                    if d.upper.as_ref().is_none_or(|u| v < *u) {
                        d.upper_deps.merge(&deps);
                        d.upper = Some(v);
                    }
                } else if d.lower.as_ref().is_none_or(|l| v > *l) {
                    d.lower_deps.merge(&deps);
                    d.lower = Some(v);
                }
            }
        }
    }
    let mut out = Vec::new();
    let zero = R::zero();
    for i in p.active_rows() {
        if p.is_equation(i) {
            continue;
        }
        let d = &duals[i];
        if let (Some(l), Some(y)) = (p.lhs(i), &d.lower) {
            if ctx.is_gt(y, &zero) {
                out.push(d.lower_deps.clone().into_transaction().with(ChangeRhs { row: i, value: Some(l.clone()) }));
                continue;
            }
        }
        if let (Some(r), Some(y)) = (p.rhs(i), &d.upper) {
            if ctx.is_lt(y, &zero) {
                out.push(d.upper_deps.clone().into_transaction().with(ChangeLhs { row: i, value: Some(r.clone()) }));
            }
        }
    }
    for &j in &continuous {
        if relaxed[j].is_some() {
            continue;
        }
        // Range of the reduced cost c - sum a y.
        let mut min_rc = Some(p.objective[j].clone());
        let mut max_rc = Some(p.objective[j].clone());
        let mut min_deps = column_deps(j);
        let mut max_deps = column_deps(j);
        for e in p.matrix.col(j) {
            let d = &duals[e.index];
            let (hi, hi_deps, lo, lo_deps) = if e.value.is_positive() {
                (&d.upper, &d.upper_deps, &d.lower, &d.lower_deps)
            } else {
                (&d.lower, &d.lower_deps, &d.upper, &d.upper_deps)
            };
            min_rc = min_rc.zip(hi.as_ref()).map(|(m, y)| m - e.value.clone() * y.clone());
            max_rc = max_rc.zip(lo.as_ref()).map(|(m, y)| m - e.value.clone() * y.clone());
            min_deps.merge(hi_deps);
            max_deps.merge(lo_deps);
        }
        if let (Some(m), Some(l)) = (&min_rc, &p.lower[j]) {
            if ctx.is_gt(m, &zero) {
                out.push(min_deps.into_transaction().with(FixColumn { col: j, value: l.clone() }));
                continue;
            }
        }
        if let (Some(m), Some(u)) = (&max_rc, &p.upper[j]) {
            if ctx.is_lt(m, &zero) {
                out.push(max_deps.into_transaction().with(FixColumn { col: j, value: u.clone() }));
            }
        }
    }
    Ok(out)
}
