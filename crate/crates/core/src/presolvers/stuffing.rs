use std::cmp::Ordering;

use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "stuffing";

/// A continuous singleton of a `<=` row after substituting `z = -x` where
/// needed so that its coefficient is positive.
struct Singleton<R> {
    col: usize,
    coef: R,
    cost: R,
    lower: Option<R>,
    upper: Option<R>,
    flipped: bool,
}

impl<R: Real> Singleton<R> {
    fn original(&self, z: &R) -> R {
        if self.flipped {
            -z.clone()
        } else {
            z.clone()
        }
    }
}

/// One-sided rows with continuous singleton columns. Singletons that only
/// get more expensive when increased sit at their lower end; the others are
/// filled greedily by cost per unit of row capacity, and every singleton that
/// fits even when the rest of the row takes its maximum goes to its upper end.
pub fn run_stuffing<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    for i in p.active_rows() {
        let (sign, side) = match (p.lhs(i), p.rhs(i)) {
            (None, Some(r)) => (R::one(), r.clone()),
            (Some(l), None) => (-R::one(), -l.clone()),
            _ => continue,
        };
        let mut singles = Vec::new();
        let mut rest_max = Some(R::zero());
        for e in p.matrix.row(i) {
            let j = e.index;
            let a = sign.clone() * e.value.clone();
            if !p.is_integral(j) && p.matrix.col(j).len() == 1 {
                let flipped = a.is_negative();
                let (lower, upper) = if flipped {
                    (p.upper[j].clone().map(|u| -u), p.lower[j].clone().map(|l| -l))
                } else {
                    (p.lower[j].clone(), p.upper[j].clone())
                };
                if lower.is_some() {
                    let cost = if flipped { -p.objective[j].clone() } else { p.objective[j].clone() };
                    singles.push(Singleton { col: j, coef: a.abs(), cost, lower, upper, flipped });
                    continue;
                }
            }
            let bound = if a.is_positive() { &p.upper[j] } else { &p.lower[j] };
            rest_max = match (rest_max, bound) {
                (Some(m), Some(b)) => Some(m + a * b.clone()),
                _ => None,
            };
        }
        if singles.is_empty() {
            continue;
        }
        let mut fixes: Vec<(usize, R)> = Vec::new();
        let mut costly: Vec<&Singleton<R>> = Vec::new();
        for s in &singles {
            if s.cost.is_negative() {
                costly.push(s);
            } else {
                fixes.push((s.col, s.original(s.lower.as_ref().expect("finite lower"))));
            }
        }
        if let Some(rest_max) = rest_max {
            costly.sort_by(|a, b| {
                let (ra, rb) = (a.cost.clone() / a.coef.clone(), b.cost.clone() / b.coef.clone());
                ra.partial_cmp(&rb).unwrap_or(Ordering::Equal).then(a.col.cmp(&b.col))
            });
            // Capacity left with every singleton at its lower end.
            let mut slack = side.clone() - rest_max;
            for s in &singles {
                slack = slack - s.coef.clone() * s.lower.clone().expect("finite lower");
            }
            for s in costly {
                let Some(u) = &s.upper else { break };
                let need = s.coef.clone() * (u.clone() - s.lower.clone().expect("finite lower"));
                if !view.ctx.is_feas_ge(&(slack.clone() - need.clone()), &R::zero()) {
                    break;
                }
                slack = slack - need;
                fixes.push((s.col, s.original(u)));
            }
        }
        if fixes.is_empty() {
            continue;
        }
        fixes.sort_by_key(|f| f.0);
        let mut tx = Transaction::new(NAME)
            .with(AssertRowUnmodified(i))
            .with(AssertRowBoundsUnmodified(i));
        for s in &singles {
            tx.push(AssertColUnmodified(s.col));
            tx.push(AssertColBoundsUnmodified(s.col));
        }
        for (col, value) in fixes {
            tx.push(FixColumn { col, value });
        }
        out.push(tx);
    }
    Ok(out)
}
