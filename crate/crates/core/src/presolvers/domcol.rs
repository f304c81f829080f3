use std::collections::{BTreeMap, BTreeSet};

use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::parallel::map_ordered;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "domcol";

/// Coefficient of the column in the row written as `<=`, or `None` when the
/// row has two finite sides.
fn le_coef<R: Real>(view: &PresolveView<R>, row: usize, a: &R) -> Option<R> {
    match (view.problem.lhs(row), view.problem.rhs(row)) {
        (_, None) => Some(-a.clone()),
        (None, Some(_)) => Some(a.clone()),
        _ => None,
    }
}

/// Whether `j` dominates `k`: cheaper, and never using more of a row.
fn dominates<R: Real>(view: &PresolveView<R>, j: usize, k: usize) -> bool {
    let p = view.problem;
    if p.objective[j] > p.objective[k] {
        return false;
    }
    let mut strict = p.objective[j] < p.objective[k];
    for (ej, ek) in p.matrix.col(j).iter().zip(p.matrix.col(k)) {
        match (le_coef(view, ej.index, &ej.value), le_coef(view, ek.index, &ek.value)) {
            (Some(aj), Some(ak)) if aj <= ak => strict |= aj < ak,
            (None, None) if ej.value == ek.value => {}
            _ => return false,
        }
    }
    strict || j < k
}

/// A one-sided row where `x_j` at its upper bound leaves no room for `x_k`
/// above its lower bound.
fn forcing_row<R: Real>(view: &PresolveView<R>, j: usize, k: usize) -> Option<usize> {
    let p = view.problem;
    let (uj, lk) = (p.upper[j].as_ref()?, p.lower[k].as_ref()?);
    let step = if p.is_integral(k) { R::one() } else { R::zero() };
    for (ej, ek) in p.matrix.col(j).iter().zip(p.matrix.col(k)) {
        let i = ej.index;
        let (Some(aj), Some(ak)) = (le_coef(view, i, &ej.value), le_coef(view, i, &ek.value)) else {
            continue;
        };
        if !ak.is_positive() {
            continue;
        }
        let (side, act) = match p.rhs(i) {
            Some(r) => (r.clone(), &view.activities[i]),
            None => (-p.lhs(i).expect("one finite side").clone(), &view.activities[i]),
        };
        // Minimum of the `<=` form without j and k.
        let min_rest = if p.rhs(i).is_some() {
            let (Some(m), Some(bj), Some(bk)) = (act.finite_min(), view.min_bound(j, &ej.value), view.min_bound(k, &ek.value)) else {
                continue;
            };
            m.clone() - ej.value.clone() * bj.clone() - ek.value.clone() * bk.clone()
        } else {
            let (Some(m), Some(bj), Some(bk)) = (act.finite_max(), view.max_bound(j, &ej.value), view.max_bound(k, &ek.value)) else {
                continue;
            };
            -(m.clone() - ej.value.clone() * bj.clone() - ek.value.clone() * bk.clone())
        };
        let used = min_rest + aj * uj.clone() + ak * (lk.clone() + step.clone());
        let forced = if p.is_integral(k) { view.ctx.is_feas_gt(&used, &side) } else { used >= side };
        if forced {
            return Some(i);
        }
    }
    None
}

/// For dominated `k` (see [`dominates`]) some optimal solution has
/// `x_j = u_j` or `x_k = l_k`. When `u_j` is infinite, or a row forbids
/// `x_k > l_k` once `x_j = u_j`, the column `k` is fixed at `l_k`.
pub fn run_domcol<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut buckets: BTreeMap<(bool, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for j in p.active_cols() {
        let col = p.matrix.col(j);
        if !col.is_empty() {
            buckets
                .entry((p.is_integral(j), col.iter().map(|e| e.index).collect()))
                .or_default()
                .push(j);
        }
    }
    let groups: Vec<Vec<usize>> = buckets.into_values().filter(|g| g.len() > 1).collect();
    let found = map_ordered(view.parallel, &groups, |cols| {
        let mut pairs = Vec::new();
        for &k in cols {
            if p.lower[k].is_none() {
                continue;
            }
            for &j in cols {
                if j == k || !dominates(view, j, k) {
                    continue;
                }
                if p.upper[j].is_none() {
                    pairs.push((j, k, None));
                    break;
                }
                if let Some(i) = forcing_row(view, j, k) {
                    pairs.push((j, k, Some(i)));
                    break;
                }
            }
        }
        pairs
    });
    let mut fixed = BTreeSet::new();
    let mut out = Vec::new();
    for (j, k, row) in found.into_iter().flatten() {
        if fixed.contains(&j) || !fixed.insert(k) {
            continue;
        }
        let mut tx = Transaction::new(NAME)
            .with(AssertColUnmodified(j))
            .with(AssertColBoundsUnmodified(j))
            .with(AssertColUnmodified(k))
            .with(AssertColBoundsUnmodified(k));
        if let Some(i) = row {
            tx.push(AssertRowUnmodified(i));
            tx.push(AssertRowBoundsUnmodified(i));
        }
        tx.push(FixColumn { col: k, value: p.lower[k].clone().expect("finite lower") });
        out.push(tx);
    }
    Ok(out)
}
