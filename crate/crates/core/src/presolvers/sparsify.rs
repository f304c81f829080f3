use std::collections::{BTreeMap, BTreeSet};

use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::parallel::map_ordered;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "sparsify";

/// Longest equation used to cancel entries in other rows.
const MAX_SOURCE_LEN: usize = 16;

/// Adding `scale` times equation `source` to row `target`.
struct Combination<R> {
    source: usize,
    target: usize,
    scale: R,
}

/// Best multiple of `source` for `target`: the ratio that cancels the most
/// shared entries, when it cancels at least two and removes more entries
/// than it creates.
fn best_scale<R: Real>(view: &PresolveView<R>, source: usize, target: usize) -> Option<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let src = p.matrix.row(source);
    let mut ratios: Vec<R> = Vec::new();
    let mut shared = 0;
    for e in src {
        if let Some(t) = p.matrix.get(target, e.index) {
            shared += 1;
            ratios.push(-t.clone() / e.value.clone());
        }
    }
    let mut best: Option<(usize, R)> = None;
    for r in &ratios {
        let count = ratios.iter().filter(|s| ctx.approx_eq(s, r)).count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, r.clone()));
        }
    }
    let (cancelled, scale) = best?;
    let created = src.len() - shared;
    (cancelled >= 2 && cancelled > created).then_some(scale)
}

/// Adds multiples of short equations to rows sharing their support so that
/// entries cancel, keeping the problem equivalent but sparser.
pub fn run_sparsify<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let sources: Vec<usize> = p
        .active_rows()
        .filter(|&i| p.is_equation(i) && (2..=MAX_SOURCE_LEN).contains(&p.matrix.row(i).len()))
        .collect();
    let found = map_ordered(view.parallel, &sources, |&e| {
        let mut overlap: BTreeMap<usize, usize> = BTreeMap::new();
        for entry in p.matrix.row(e) {
            for c in p.matrix.col(entry.index) {
                if c.index != e && p.is_row_active(c.index) {
                    *overlap.entry(c.index).or_default() += 1;
                }
            }
        }
        overlap
            .into_iter()
            .filter(|&(_, n)| n >= 2)
            .filter_map(|(t, _)| best_scale(view, e, t).map(|scale| Combination { source: e, target: t, scale }))
            .collect::<Vec<_>>()
    });
    let mut modified = BTreeSet::new();
    let mut out = Vec::new();
    for c in found.into_iter().flatten() {
        if modified.contains(&c.source) || modified.contains(&c.target) {
            continue;
        }
        modified.insert(c.target);
        let (e, t, s) = (c.source, c.target, c.scale);
        let mut tx = Transaction::new(NAME)
            .with(AssertRowUnmodified(e))
            .with(AssertRowBoundsUnmodified(e))
            .with(AssertRowUnmodified(t))
            .with(AssertRowBoundsUnmodified(t));
        for entry in p.matrix.row(e) {
            let old = p.matrix.get(t, entry.index).cloned().unwrap_or_else(R::zero);
            let new = old + s.clone() * entry.value.clone();
            let value = if ctx.is_zero(&new) { R::zero() } else { new };
            tx.push(ChangeCoeff { row: t, col: entry.index, value });
        }
        let shift = s * p.rhs(e).expect("equation").clone();
        if let Some(l) = p.lhs(t) {
            tx.push(ChangeLhs { row: t, value: Some(l.clone() + shift.clone()) });
        }
        if let Some(r) = p.rhs(t) {
            tx.push(ChangeRhs { row: t, value: Some(r.clone() + shift) });
        }
        out.push(tx);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProblemBuilder, ProblemState};
    use crate::numerics::NumericContext;
    use crate::postsolve::PostsolveRecord;
    use crate::presolvers::testutil::Fixture;
    use crate::transaction::apply_all;

    #[test]
    fn equation_cancels_two_entries() {
        // x + y + z = 2 subtracted from x + y + w <= 3 leaves w - z <= 1.
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(5.0), false);
        let z = b.add_col("z", 1.0, Some(0.0), Some(5.0), false);
        let w = b.add_col("w", 1.0, Some(0.0), Some(5.0), false);
        b.add_row("e", &[(x, 1.0), (y, 1.0), (z, 1.0)], Some(2.0), Some(2.0));
        b.add_row("t", &[(x, 1.0), (y, 1.0), (w, 1.0)], None, Some(3.0));
        let p = b.build();
        let f = Fixture::new(p.clone());
        let txs = f.run(run_sparsify).unwrap();
        assert_eq!(txs.len(), 1);
        let mut state = ProblemState::new(p.clone(), NumericContext::default());
        let mut rec = PostsolveRecord::new(&p);
        apply_all(&mut state, &txs, &mut rec).unwrap();
        let row: Vec<(usize, f64)> = state.problem().matrix.row(1).iter().map(|e| (e.index, e.value)).collect();
        assert_eq!(row, vec![(z, -1.0), (w, 1.0)]);
        assert_eq!(state.problem().rhs(1), Some(&1.0));
        assert_eq!(state.problem().lhs(1), None);
    }

    #[test]
    fn single_shared_column_is_not_enough() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(5.0), false);
        let w = b.add_col("w", 1.0, Some(0.0), Some(5.0), false);
        b.add_row("e", &[(x, 1.0), (y, 1.0)], Some(2.0), Some(2.0));
        b.add_row("t", &[(x, 1.0), (w, 1.0)], None, Some(3.0));
        let f = Fixture::new(b.build());
        assert!(f.run(run_sparsify).unwrap().is_empty());
    }

    #[test]
    fn two_equations_do_not_both_rewrite_each_other() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(5.0), false);
        let z = b.add_col("z", 1.0, Some(0.0), Some(5.0), false);
        b.add_row("e", &[(x, 1.0), (y, 1.0), (z, 1.0)], Some(2.0), Some(2.0));
        b.add_row("f", &[(x, 2.0), (y, 2.0)], Some(3.0), Some(3.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_sparsify).unwrap();
        assert_eq!(txs.len(), 1);
    }
}
