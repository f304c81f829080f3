use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "doubletoneq";

fn ratio_is_integer<R: Real>(num: &R, den: &R) -> bool {
    (num.clone() / den.clone()).to_i64_exact().is_some()
}

/// Equations `a x + c y = d`: `x` is substituted by `(d - c y) / a` when
/// integrality survives, and `y` inherits the bounds of `x`.
pub fn run_doubletoneq<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    for i in p.active_rows() {
        let row = p.matrix.row(i);
        if !p.is_equation(i) || row.len() != 2 {
            continue;
        }
        let d = p.rhs(i).expect("equation").clone();
        let (e, f) = (&row[0], &row[1]);
        let mut order = [
            (e.index, e.value.clone(), f.index, f.value.clone()),
            (f.index, f.value.clone(), e.index, e.value.clone()),
        ];
        order.sort_by_key(|o| (p.is_integral(o.0), o.0));
        let pick = order.into_iter().find(|(x, a, y, c)| {
            !p.is_integral(*x) || (p.is_integral(*y) && ratio_is_integer(c, a) && ratio_is_integer(&d, a))
        });
        let Some((x, a, y, c)) = pick else { continue };
        // y = (d - a x) / c over the range of x.
        let at = |v: &Option<R>| v.as_ref().map(|v| (d.clone() - a.clone() * v.clone()) / c.clone());
        let (from_l, from_u) = (at(&p.lower[x]), at(&p.upper[x]));
        let (lo, hi) = if (a.clone() / c.clone()).is_positive() { (from_u, from_l) } else { (from_l, from_u) };
        let mut tx = Transaction::new(NAME)
            .with(AssertRowUnmodified(i))
            .with(AssertRowBoundsUnmodified(i))
            .with(AssertColBoundsUnmodified(x))
            .with(AssertColBoundsUnmodified(y));
        if let Some(v) = lo.filter(|v| p.lower[y].as_ref().is_none_or(|l| view.ctx.is_gt(v, l))) {
            tx.push(ChangeLower { col: y, value: v });
        }
        if let Some(v) = hi.filter(|v| p.upper[y].as_ref().is_none_or(|u| view.ctx.is_lt(v, u))) {
            tx.push(ChangeUpper { col: y, value: v });
        }
        tx.push(SubstituteColumn { col: x, row: i });
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
    use crate::transaction::{apply_all, TxStatus};

    #[test]
    fn divisible_integral_pair() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), true);
        let y = b.add_col("y", 1.0, Some(0.0), Some(5.0), true);
        b.add_row("r", &[(x, 2.0), (y, 2.0)], Some(4.0), Some(4.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_doubletoneq).unwrap();
        assert_eq!(txs[0].steps.last(), Some(&SubstituteColumn { col: x, row: 0 }));
        // x in [0, 5] gives y = 2 - x in [-3, 2].
        assert!(txs[0].steps.contains(&ChangeUpper { col: y, value: 2.0 }));
    }

    #[test]
    fn indivisible_pair_is_skipped() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let y = b.add_col("y", 1.0, Some(0.0), Some(1.0), true);
        b.add_row("r", &[(x, 2.0), (y, 3.0)], Some(4.0), Some(4.0));
        let f = Fixture::new(b.build());
        assert!(f.run(run_doubletoneq).unwrap().is_empty());
    }

    #[test]
    fn shared_variable_conflicts() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(9.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(9.0), false);
        let z = b.add_col("z", 1.0, Some(0.0), Some(9.0), false);
        b.add_row("r1", &[(x, 1.0), (y, -1.0)], Some(1.0), Some(1.0));
        b.add_row("r2", &[(x, 1.0), (z, -1.0)], Some(2.0), Some(2.0));
        let p = b.build();
        let f = Fixture::new(p.clone());
        let txs = f.run(run_doubletoneq).unwrap();
        assert_eq!(txs.len(), 2);
        let mut state = ProblemState::new(p.clone(), NumericContext::default());
        let mut rec = PostsolveRecord::new(&p);
        let out = apply_all(&mut state, &txs, &mut rec).unwrap();
        assert_eq!(out[0].status, TxStatus::Applied);
        assert_eq!(out[1].status, TxStatus::Discarded);
    }
}
