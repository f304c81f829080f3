use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "colsingleton";

/// Continuous columns with a single entry. In an equation the column is
/// substituted into the objective and the row sides absorb its range; a
/// zero-cost column in an inequality is dropped together with its range.
pub fn run_colsingleton<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    for &j in view.changed_cols {
        if !p.is_col_active(j) || p.is_integral(j) {
            continue;
        }
        let col = p.matrix.col(j);
        if col.len() != 1 {
            continue;
        }
        let (i, a) = (col[0].index, &col[0].value);
        if !p.is_row_active(i) || p.matrix.row(i).len() < 2 {
            continue;
        }
        let (lower, upper) = (p.lower[j].as_ref(), p.upper[j].as_ref());
        if p.is_equation(i) {
            let b = p.rhs(i).expect("equation").clone();
            let at = |bound: Option<&R>| bound.map(|v| b.clone() - a.clone() * v.clone());
            let (lhs, rhs) = if a.is_positive() { (at(upper), at(lower)) } else { (at(lower), at(upper)) };
            out.push(
                Transaction::new(NAME)
                    .with(AssertColBoundsUnmodified(j))
                    .with(AssertRowBoundsUnmodified(i))
                    .with(SubstituteInObjective { col: j, row: i })
                    .with(ChangeCoeff { row: i, col: j, value: R::zero() })
                    .with(ChangeLhs { row: i, value: lhs })
                    .with(ChangeRhs { row: i, value: rhs }),
            );
        } else if p.objective[j].is_zero() {
            out.push(
                Transaction::new(NAME)
                    .with(AssertColUnmodified(j))
                    .with(AssertColBoundsUnmodified(j))
                    .with(AssertRowBoundsUnmodified(i))
                    .with(DeleteColumn { col: j }),
            );
        }
    }
    Ok(out)
}
