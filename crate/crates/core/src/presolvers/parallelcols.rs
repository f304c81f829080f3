use std::collections::BTreeMap;

use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "parallelcols";

/// `s` with `col = s * rep` on coefficients and cost, if parallel.
fn ratio<R: Real>(view: &PresolveView<R>, rep: usize, col: usize) -> Option<R> {
    let p = view.problem;
    let a = p.matrix.col(rep);
    let b = p.matrix.col(col);
    let s = b[0].value.clone() / a[0].value.clone();
    let same = |x: &R, y: &R| view.ctx.approx_eq(&(s.clone() * x.clone()), y);
    (a.iter().zip(b).all(|(x, y)| same(&x.value, &y.value)) && same(&p.objective[rep], &p.objective[col])).then_some(s)
}

fn add_opt<R: Real>(a: &Option<R>, b: Option<R>) -> Option<R> {
    Some(a.clone()? + b?)
}

/// Columns proportional in coefficients and cost are merged into the one
/// with the smallest coefficient: `y = x_keep + s * x_remove`.
pub fn run_parallelcols<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut by_support: BTreeMap<(bool, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for j in p.active_cols() {
        let col = p.matrix.col(j);
        if !col.is_empty() {
            by_support
                .entry((p.is_integral(j), col.iter().map(|e| e.index).collect()))
                .or_default()
                .push(j);
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for cols in by_support.into_values() {
        let mut local: Vec<Vec<usize>> = Vec::new();
        for j in cols {
            match local.iter_mut().find(|c| ratio(view, c[0], j).is_some()) {
                Some(class) => class.push(j),
                None => local.push(vec![j]),
            }
        }
        classes.extend(local.into_iter().filter(|c| c.len() > 1));
    }
    classes.sort_by_key(|c| c[0]);
    let mut out = Vec::new();
    for class in classes {
        let first = |j: usize| p.matrix.col(j)[0].value.abs();
        let keep = *class
            .iter()
            .min_by(|&&a, &&b| first(a).partial_cmp(&first(b)).expect("finite").then(a.cmp(&b)))
            .expect("non-empty class");
        let integral = p.is_integral(keep);
        let mut members: Vec<(usize, R)> = class
            .iter()
            .filter(|&&j| j != keep)
            .filter_map(|&j| ratio(view, keep, j).map(|s| (j, s)))
            .collect();
        members.sort_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite").then(a.0.cmp(&b.0)));
        let (mut lower, mut upper) = (p.lower[keep].clone(), p.upper[keep].clone());
        let mut merged = Vec::new();
        for (j, s) in members {
            if integral {
                let Some(si) = s.to_i64_exact() else { continue };
                // The merged domain has no holes when the kept range covers a
                // full step of the removed column.
                if let (Some(l), Some(u)) = (&lower, &upper) {
                    if u.clone() - l.clone() + R::one() < R::from_i64(si.abs()) {
                        continue;
                    }
                }
            }
            let (lo_r, hi_r) = if s.is_positive() {
                (&p.lower[j], &p.upper[j])
            } else {
                (&p.upper[j], &p.lower[j])
            };
            lower = add_opt(&lower, lo_r.clone().map(|v| s.clone() * v));
            upper = add_opt(&upper, hi_r.clone().map(|v| s.clone() * v));
            merged.push((j, s));
        }
        if merged.is_empty() {
            continue;
        }
        let mut tx = Transaction::new(NAME)
            .with(AssertColUnmodified(keep))
            .with(AssertColBoundsUnmodified(keep));
        for (j, _) in &merged {
            tx.push(AssertColUnmodified(*j));
            tx.push(AssertColBoundsUnmodified(*j));
        }
        for (j, s) in merged {
            tx.push(AggregateParallelCols { keep, remove: j, scale: s });
        }
        out.push(tx);
    }
    Ok(out)
}
