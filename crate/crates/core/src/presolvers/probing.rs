use std::collections::BTreeSet;

use super::propagation::propagate_row;
use super::{PresolveView, PresolverOutput};
use crate::error::Verdict;
use crate::model::{update_activity, BoundSide, Problem, RowActivity};
use crate::numerics::{NumericContext, Real};
use crate::parallel::map_ordered_with;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "probing";

/// Propagation rounds run after each tentative fixing.
const PROBE_PASSES: usize = 2;

/// Result of fixing one binary tentatively.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeOutcome<R> {
    Infeasible,
    /// Final `(col, lower, upper)` of every column whose bounds moved,
    /// including the probed one.
    Feasible(Vec<(usize, Option<R>, Option<R>)>),
}

enum Undo<R> {
    Bounds { col: usize, lower: Option<R>, upper: Option<R> },
    Activity { row: usize, old: RowActivity<R> },
}

/// Bounds and activities that a probe may change, restored afterwards.
pub struct ProbingScratch<R> {
    lower: Vec<Option<R>>,
    upper: Vec<Option<R>>,
    activities: Vec<RowActivity<R>>,
    undo: Vec<Undo<R>>,
}

impl<R: Real> ProbingScratch<R> {
    pub fn new(problem: &Problem<R>, activities: &[RowActivity<R>]) -> Self {
        ProbingScratch {
            lower: problem.lower.clone(),
            upper: problem.upper.clone(),
            activities: activities.to_vec(),
            undo: Vec::new(),
        }
    }

    /// Whether every change of the last probe has been undone.
    pub fn is_clean(&self) -> bool {
        self.undo.is_empty()
    }

    fn set_bounds(&mut self, p: &Problem<R>, col: usize, lower: Option<R>, upper: Option<R>, touched: &mut BTreeSet<usize>) {
        self.undo.push(Undo::Bounds { col, lower: self.lower[col].clone(), upper: self.upper[col].clone() });
        for e in p.matrix.col(col) {
            let act = &mut self.activities[e.index];
            self.undo.push(Undo::Activity { row: e.index, old: act.clone() });
            update_activity(act, &e.value, BoundSide::Lower, self.lower[col].as_ref(), lower.as_ref());
            update_activity(act, &e.value, BoundSide::Upper, self.upper[col].as_ref(), upper.as_ref());
            touched.insert(e.index);
        }
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    fn revert(&mut self) {
        while let Some(u) = self.undo.pop() {
            match u {
                Undo::Bounds { col, lower, upper } => {
                    self.lower[col] = lower;
                    self.upper[col] = upper;
                }
                Undo::Activity { row, old } => self.activities[row] = old,
            }
        }
    }

    /// Fixes `col` to `value`, propagates, records the result and restores
    /// the scratch.
    pub fn probe(&mut self, p: &Problem<R>, col: usize, value: R, ctx: &NumericContext<R>) -> ProbeOutcome<R> {
        let outcome = self.propagate(p, col, value, ctx);
        self.revert();
        outcome
    }

    fn propagate(&mut self, p: &Problem<R>, col: usize, value: R, ctx: &NumericContext<R>) -> ProbeOutcome<R> {
        let mut changed = BTreeSet::from([col]);
        let mut queue = BTreeSet::new();
        self.set_bounds(p, col, Some(value.clone()), Some(value), &mut queue);
        for _ in 0..PROBE_PASSES {
            let mut next = BTreeSet::new();
            for i in std::mem::take(&mut queue) {
                if !p.is_row_active(i) {
                    continue;
                }
                let found = match propagate_row(p, &self.lower, &self.upper, &self.activities[i], i, ctx) {
                    Ok(found) => found,
                    Err(_) => return ProbeOutcome::Infeasible,
                };
                for b in found {
                    let lower = b.lower.or_else(|| self.lower[b.col].clone());
                    let upper = b.upper.or_else(|| self.upper[b.col].clone());
                    if let (Some(l), Some(u)) = (&lower, &upper) {
                        if !ctx.is_feas_le(l, u) {
                            return ProbeOutcome::Infeasible;
                        }
                    }
                    // Keep the box non-empty when the bounds cross within tolerance.
                    let (lower, upper) = match (lower, upper) {
                        (Some(l), Some(u)) if l > u => (Some(u.clone()), Some(u)),
                        pair => pair,
                    };
                    self.set_bounds(p, b.col, lower, upper, &mut next);
                    changed.insert(b.col);
                }
            }
            queue = next;
        }
        ProbeOutcome::Feasible(
            changed
                .into_iter()
                .map(|j| (j, self.lower[j].clone(), self.upper[j].clone()))
                .collect(),
        )
    }
}

/// Bounds of `col` after a probe, falling back to the problem's.
fn bounds_in<'a, R: Real>(
    p: &'a Problem<R>,
    changes: &'a [(usize, Option<R>, Option<R>)],
    col: usize,
) -> (Option<&'a R>, Option<&'a R>) {
    match changes.binary_search_by_key(&col, |c| c.0) {
        Ok(k) => (changes[k].1.as_ref(), changes[k].2.as_ref()),
        Err(_) => (p.lower[col].as_ref(), p.upper[col].as_ref()),
    }
}

fn weaker<'a, R: Real>(a: Option<&'a R>, b: Option<&'a R>, lower: bool) -> Option<&'a R> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if (x <= y) == lower { x } else { y }),
        _ => None,
    }
}

/// Conclusions from probing one binary.
fn conclude<R: Real>(
    p: &Problem<R>,
    ctx: &NumericContext<R>,
    j: usize,
    down: &ProbeOutcome<R>,
    up: &ProbeOutcome<R>,
) -> Result<Vec<Transaction<R>>, Verdict> {
    let (d, u) = match (down, up) {
        (ProbeOutcome::Infeasible, ProbeOutcome::Infeasible) => {
            return Err(Verdict::infeasible(format!("both values of binary {} are infeasible", p.col_names[j])))
        }
        (ProbeOutcome::Infeasible, _) => return Ok(vec![Transaction::new(NAME).with(FixColumn { col: j, value: R::one() })]),
        (_, ProbeOutcome::Infeasible) => return Ok(vec![Transaction::new(NAME).with(FixColumn { col: j, value: R::zero() })]),
        (ProbeOutcome::Feasible(d), ProbeOutcome::Feasible(u)) => (d, u),
    };
    let cols: BTreeSet<usize> = d.iter().chain(u).map(|c| c.0).filter(|&k| k != j).collect();
    let mut out = Vec::new();
    for k in cols {
        let (l0, u0) = bounds_in(p, d, k);
        let (l1, u1) = bounds_in(p, u, k);
        if let (Some(v0), Some(v1)) = (l0.filter(|l| Some(*l) == u0), l1.filter(|l| Some(*l) == u1)) {
            if !ctx.approx_eq(v0, v1) {
                out.push(Transaction::new(NAME).with(ReplaceColumn {
                    col: k,
                    by: j,
                    factor: v1.clone() - v0.clone(),
                    offset: v0.clone(),
                }));
                continue;
            }
        }
        let mut tx = Transaction::new(NAME);
        if let Some(l) = weaker(l0, l1, true).filter(|l| p.lower[k].as_ref().is_none_or(|old| *l > old)) {
            tx.push(ChangeLower { col: k, value: l.clone() });
        }
        if let Some(v) = weaker(u0, u1, false).filter(|v| p.upper[k].as_ref().is_none_or(|old| *v < old)) {
            tx.push(ChangeUpper { col: k, value: v.clone() });
        }
        if !tx.steps.is_empty() {
            out.push(tx);
        }
    }
    Ok(out)
}

/// Fixes each binary to 0 and to 1 in turn and propagates. A value that
/// leads to infeasibility is ruled out, bounds implied by both values hold
/// in general, and a column fixed by both values is an affine function of
/// the binary.
pub fn run_probing<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let binaries: Vec<usize> = p
        .active_cols()
        .filter(|&j| p.is_binary(j) && !p.matrix.col(j).is_empty())
        .collect();
    let probes = map_ordered_with(
        view.parallel,
        &binaries,
        || ProbingScratch::new(p, view.activities),
        |scratch, &j| {
            let down = scratch.probe(p, j, R::zero(), ctx);
            let up = scratch.probe(p, j, R::one(), ctx);
            (down, up)
        },
    );
    let mut out = Vec::new();
    for (&j, (down, up)) in binaries.iter().zip(&probes) {
        out.extend(conclude(p, ctx, j, down, up)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_activities, ProblemBuilder};
    use crate::presolvers::testutil::Fixture;

    #[test]
    fn one_infeasible_branch_fixes_the_binary() {
        // y - x <= 0 and x + y >= 1: x = 0 forces y <= 0 and then y >= 1.
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let y = b.add_col("y", 1.0, Some(0.0), Some(1.0), true);
        b.add_row("r", &[(y, 1.0), (x, -1.0)], None, Some(0.0));
        b.add_row("s", &[(x, 1.0), (y, 1.0)], Some(1.0), None);
        let f = Fixture::new(b.build());
        let txs = f.run(run_probing).unwrap();
        assert_eq!(txs[0].steps, vec![FixColumn { col: x, value: 1.0 }]);
    }

    #[test]
    fn implied_column_is_replaced() {
        // x + z = 1: z is 1 - x.
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let z = b.add_col("z", 1.0, Some(0.0), Some(5.0), false);
        b.add_row("r", &[(x, 1.0), (z, 1.0)], Some(1.0), Some(1.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_probing).unwrap();
        assert_eq!(txs[0].steps, vec![ReplaceColumn { col: z, by: x, factor: -1.0, offset: 1.0 }]);
    }

    #[test]
    fn common_bound_from_both_branches() {
        // z <= 2 + 2x and z <= 4 - x: either way z <= 3.
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let z = b.add_col("z", 1.0, Some(0.0), Some(10.0), false);
        b.add_row("r", &[(z, 1.0), (x, -2.0)], None, Some(2.0));
        b.add_row("s", &[(z, 1.0), (x, 1.0)], None, Some(4.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_probing).unwrap();
        let steps: Vec<_> = txs.iter().flat_map(|t| t.steps.clone()).collect();
        assert!(steps.contains(&ChangeUpper { col: z, value: 3.0 }), "{steps:?}");
    }

    #[test]
    fn both_branches_infeasible() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let y = b.add_col("y", 1.0, Some(0.0), Some(1.0), true);
        b.add_row("r", &[(x, 1.0), (y, 2.0)], Some(4.0), None);
        let f = Fixture::new(b.build());
        assert!(matches!(f.run(run_probing), Err(Verdict::Infeasible(_))));
    }

    #[test]
    fn scratch_is_restored() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let z = b.add_col("z", 1.0, Some(0.0), Some(5.0), false);
        b.add_row("r", &[(x, 1.0), (z, 1.0)], Some(1.0), Some(1.0));
        let p = b.build();
        let acts = compute_activities(&p);
        let mut s = ProbingScratch::new(&p, &acts);
        let ctx = NumericContext::default();
        let out = s.probe(&p, x, 1.0, &ctx);
        assert_eq!(out, ProbeOutcome::Feasible(vec![(x, Some(1.0), Some(1.0)), (z, Some(0.0), Some(0.0))]));
        assert!(s.is_clean());
        assert_eq!(s.activities, acts);
        assert_eq!(s.upper, p.upper);
    }
}
