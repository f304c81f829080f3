use super::{PresolveView, PresolverOutput};
use crate::numerics::{NumericMode, Real};
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "substitution";

/// Smallest pivot magnitude relative to the largest entry of its row in
/// floating point.
const MIN_PIVOT_RATIO: f64 = 1e-2;

/// Whether the row alone keeps `x_col` within its bounds.
fn implied_free<R: Real>(view: &PresolveView<R>, row: usize, col: usize, a: &R) -> bool {
    let p = view.problem;
    let ctx = view.ctx;
    let b = p.rhs(row).expect("equation");
    let (lj, uj) = (p.lower[col].as_ref(), p.upper[col].as_ref());
    let act = &view.activities[row];
    let from_min = act.min_without(a, lj, uj).map(|m| (b.clone() - m) / a.clone());
    let from_max = act.max_without(a, lj, uj).map(|m| (b.clone() - m) / a.clone());
    let (lo, hi) = if a.is_positive() { (from_max, from_min) } else { (from_min, from_max) };
    lj.is_none_or(|l| lo.as_ref().is_some_and(|v| ctx.is_feas_ge(v, l)))
        && uj.is_none_or(|u| hi.as_ref().is_some_and(|v| ctx.is_feas_le(v, u)))
}

/// Whether substituting keeps integral columns integral: an integral pivot
/// needs an all-integral row whose coefficients and side it divides.
fn integrality_safe<R: Real>(view: &PresolveView<R>, row: usize, col: usize, a: &R) -> bool {
    let p = view.problem;
    if !p.is_integral(col) {
        return true;
    }
    let divides = |v: &R| (v.clone() / a.clone()).to_i64_exact().is_some();
    divides(p.rhs(row).expect("equation"))
        && p.matrix.row(row).iter().all(|e| p.is_integral(e.index) && divides(&e.value))
}

/// Eliminates a column that an equation keeps within its bounds, using the
/// equation to express it through the other columns of the row.
pub fn run_substitution<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    for i in p.active_rows() {
        let row = p.matrix.row(i);
        if !p.is_equation(i) || row.len() < 2 {
            continue;
        }
        let max_abs = row.iter().map(|e| e.value.abs()).fold(R::zero(), |m, v| R::max_of(&m, &v));
        let pivot = row
            .iter()
            .filter(|e| R::MODE != NumericMode::Float64 || e.value.abs() >= R::from_f64(MIN_PIVOT_RATIO) * max_abs.clone())
            .filter(|e| integrality_safe(view, i, e.index, &e.value) && implied_free(view, i, e.index, &e.value))
            .min_by_key(|e| (p.matrix.col(e.index).len(), e.index));
        let Some(e) = pivot else { continue };
        let mut tx = Transaction::new(NAME)
            .with(AssertRowUnmodified(i))
            .with(AssertRowBoundsUnmodified(i));
        for f in row {
            tx.push(AssertColBoundsUnmodified(f.index));
        }
        tx.push(SubstituteColumn { col: e.index, row: i });
        out.push(tx);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProblemBuilder, ProblemState};
    use crate::numerics::NumericContext;
    use crate::postsolve::{postsolve_primal, PostsolveRecord};
    use crate::presolvers::testutil::Fixture;
    use crate::transaction::{apply_all, TxStatus};

    fn free_pivot() -> crate::model::Problem<f64> {
        // x = 4 - y - z with y, z in [0, 1] keeps x in [2, 4] within [0, 10].
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(10.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(1.0), false);
        let z = b.add_col("z", 2.0, Some(0.0), Some(1.0), false);
        b.add_row("e", &[(x, 1.0), (y, 1.0), (z, 1.0)], Some(4.0), Some(4.0));
        b.add_row("q", &[(x, 1.0), (y, 1.0)], None, Some(5.0));
        b.add_row("w", &[(y, 1.0), (z, 1.0)], None, Some(3.0));
        b.build()
    }

    #[test]
    fn implied_free_column_is_substituted() {
        let p = free_pivot();
        let f = Fixture::new(p.clone());
        let txs = f.run(run_substitution).unwrap();
        assert_eq!(txs.len(), 1);
        assert_eq!(txs[0].steps.last(), Some(&SubstituteColumn { col: 0, row: 0 }));
        let mut state = ProblemState::new(p.clone(), NumericContext::default());
        let mut rec = PostsolveRecord::new(&p);
        let out = apply_all(&mut state, &txs, &mut rec).unwrap();
        assert_eq!(out[0].status, TxStatus::Applied);
        // q becomes 4 - z <= 5, i.e. -z <= 1.
        let q = state.problem().matrix.row(1).to_vec();
        assert_eq!(q.len(), 1);
        assert_eq!((q[0].index, q[0].value), (2, -1.0));
        let (reduced, cols, _) = state.compact();
        rec.set_maps(cols.clone(), Vec::new());
        let x: Vec<f64> = cols.iter().map(|_| 0.0).collect();
        let sol = postsolve_primal(&rec, &x, &NumericContext::default()).unwrap();
        assert_eq!(sol.values, vec![4.0, 0.0, 0.0]);
        assert_eq!(reduced.ncols(), 2);
    }

    #[test]
    fn bounded_pivot_is_left_alone() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(3.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(2.0), false);
        b.add_row("e", &[(x, 1.0), (y, 1.0)], Some(4.0), Some(4.0));
        let f = Fixture::new(b.build());
        assert!(f.run(run_substitution).unwrap().is_empty());
    }

    #[test]
    fn integral_pivot_needs_divisibility() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, None, None, true);
        let y = b.add_col("y", 1.0, Some(0.0), Some(5.0), true);
        b.add_row("e", &[(x, 2.0), (y, 1.0)], Some(4.0), Some(4.0));
        let f = Fixture::new(b.build());
        assert!(f.run(run_substitution).unwrap().is_empty());
    }
}
