use super::{PresolveView, PresolverOutput};
use crate::numerics::{gcd_i64, Real};
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "simplifyineq";

fn gcd_of(values: impl Iterator<Item = i64>) -> i64 {
    values.fold(0, gcd_i64)
}

/// Inequalities over integral columns. The entry with the smallest
/// coefficient is dropped when, given that the rest of the row moves in
/// multiples of their gcd `g`, it cannot change which rest values satisfy
/// the row; the sides are then rounded to multiples of `g`.
pub fn run_simplifyineq<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let mut out = Vec::new();
    for i in p.active_rows() {
        let row = p.matrix.row(i);
        if p.is_equation(i) || row.len() < 2 {
            continue;
        }
        let (lhs, rhs) = (p.lhs(i), p.rhs(i));
        let mut tx = Transaction::new(NAME)
            .with(AssertRowUnmodified(i))
            .with(AssertRowBoundsUnmodified(i));
        let cand = row
            .iter()
            .filter(|e| p.lower[e.index].is_some() && p.upper[e.index].is_some())
            .min_by(|a, b| a.value.abs().partial_cmp(&b.value.abs()).expect("finite").then(a.index.cmp(&b.index)));
        let rest_ints = |skip: usize| -> Option<Vec<i64>> {
            row.iter()
                .filter(|e| e.index != skip)
                .map(|e| if p.is_integral(e.index) { e.value.to_i64_exact() } else { None })
                .collect()
        };
        if let Some(c) = cand {
            if let Some(ints) = rest_ints(c.index) {
                let g = R::from_i64(gcd_of(ints.into_iter()));
                let min_c = c.value.clone() * view.min_bound(c.index, &c.value).expect("finite").clone();
                let max_c = c.value.clone() * view.max_bound(c.index, &c.value).expect("finite").clone();
                let new_rhs = rhs.map(|u| {
                    let lo = ctx.feas_floor(&((u.clone() - max_c.clone()) / g.clone()));
                    let hi = ctx.feas_floor(&((u.clone() - min_c.clone()) / g.clone()));
                    (lo == hi).then(|| g.clone() * lo)
                });
                let new_lhs = lhs.map(|l| {
                    let lo = ctx.feas_ceil(&((l.clone() - max_c.clone()) / g.clone()));
                    let hi = ctx.feas_ceil(&((l.clone() - min_c.clone()) / g.clone()));
                    (lo == hi).then(|| g.clone() * lo)
                });
                if !matches!(new_rhs, Some(None)) && !matches!(new_lhs, Some(None)) {
                    tx.push(ChangeCoeff { row: i, col: c.index, value: R::zero() });
                    if let Some(Some(v)) = new_lhs.filter(|v| v.as_ref() != lhs) {
                        tx.push(ChangeLhs { row: i, value: Some(v) });
                    }
                    if let Some(Some(v)) = new_rhs.filter(|v| v.as_ref() != rhs) {
                        tx.push(ChangeRhs { row: i, value: Some(v) });
                    }
                    out.push(tx);
                    continue;
                }
            }
        }
        // No entry can go: round the sides by the gcd of the whole row.
        if let Some(ints) = rest_ints(usize::MAX) {
            let g = R::from_i64(gcd_of(ints.into_iter()));
            if let Some(l) = lhs {
                let v = g.clone() * ctx.feas_ceil(&(l.clone() / g.clone()));
                if v != *l {
                    tx.push(ChangeLhs { row: i, value: Some(v) });
                }
            }
            if let Some(u) = rhs {
                let v = g.clone() * ctx.feas_floor(&(u.clone() / g.clone()));
                if v != *u {
                    tx.push(ChangeRhs { row: i, value: Some(v) });
                }
            }
            if tx.changes().next().is_some() {
                out.push(tx);
            }
        }
    }
    Ok(out)
}
