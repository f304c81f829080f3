use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "simpleprobing";

/// Equations where one binary column decides the row: its activity range is
/// exactly twice the binary's coefficient and the side sits in the middle,
/// so each value of the binary pushes every other column to a bound.
pub fn run_simpleprobing<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let two = R::from_i64(2);
    let mut out = Vec::new();
    for i in p.active_rows() {
        if !p.is_equation(i) || p.matrix.row(i).len() < 2 {
            continue;
        }
        let act = &view.activities[i];
        let (Some(min), Some(max)) = (act.finite_min(), act.finite_max()) else {
            continue;
        };
        let b = p.rhs(i).expect("equation");
        if !ctx.approx_eq(&(two.clone() * b.clone()), &(max.clone() + min.clone())) {
            continue;
        }
        let span = max.clone() - min.clone();
        let row = p.matrix.row(i);
        let Some(k) = row
            .iter()
            .find(|e| p.is_binary(e.index) && ctx.approx_eq(&span, &(two.clone() * e.value.abs())))
        else {
            continue;
        };
        let (xk, ak_positive) = (k.index, k.value.is_positive());
        let mut tx = Transaction::new(NAME);
        for e in row.iter().filter(|e| e.index != xk) {
            let j = e.index;
            let hi = view.max_bound(j, &e.value).expect("finite activity").clone();
            let lo = view.min_bound(j, &e.value).expect("finite activity").clone();
            // x_k = 1 leaves the rest at its minimum when a_k > 0.
            let (offset, factor) = if ak_positive {
                (hi.clone(), lo - hi)
            } else {
                (lo.clone(), hi - lo)
            };
            if factor.is_zero() {
                tx.push(FixColumn { col: j, value: offset });
            } else if !p.is_integral(j) || (factor.to_i64_exact().is_some() && offset.to_i64_exact().is_some()) {
                tx.push(ReplaceColumn { col: j, by: xk, factor, offset });
            }
        }
        if !tx.steps.is_empty() {
            out.push(tx);
        }
    }
    Ok(out)
}
