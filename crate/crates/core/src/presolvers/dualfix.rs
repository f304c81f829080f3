use super::{PresolveView, PresolverOutput};
use crate::error::Verdict;
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "dualfix";

/// Columns that can move towards their cheaper bound without ever breaking
/// a row are fixed there.
pub fn run_dualfix<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let mut out = Vec::new();
    for j in p.active_cols() {
        let locks = view.locks[j];
        let cost = &p.objective[j];
        let integral = p.is_integral(j);
        let lower = p.lower[j].as_ref().map(|l| if integral { ctx.feas_ceil(l) } else { l.clone() });
        let upper = p.upper[j].as_ref().map(|u| if integral { ctx.feas_floor(u) } else { u.clone() });
        let name = &p.col_names[j];
        let value = if !cost.is_negative() && locks.down == 0 {
            match (&lower, cost.is_zero()) {
                (Some(l), _) => Some(l.clone()),
                (None, false) => return Err(Verdict::unbounded(format!("column {name} can decrease forever"))),
                (None, true) => (locks.up == 0).then(|| upper.clone()).flatten(),
            }
        } else if !cost.is_positive() && locks.up == 0 {
            match (&upper, cost.is_zero()) {
                (Some(u), _) => Some(u.clone()),
                (None, false) => return Err(Verdict::unbounded(format!("column {name} can increase forever"))),
                (None, true) => None,
            }
        } else {
            None
        };
        if let Some(value) = value {
            out.push(
                Transaction::new(NAME)
                    .with(AssertColUnmodified(j))
                    .with(AssertColBoundsUnmodified(j))
                    .with(FixColumn { col: j, value }),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemBuilder;
    use crate::presolvers::testutil::Fixture;

    #[test]
    fn column_only_in_le_rows_goes_to_lower_bound() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), false);
        let y = b.add_col("y", 0.0, Some(0.0), Some(5.0), false);
        b.add_row("r", &[(x, 1.0), (y, 1.0)], Some(1.0), Some(3.0));
        b.add_row("s", &[(x, 2.0), (y, -1.0)], None, Some(4.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_dualfix).unwrap();
        assert!(txs.is_empty());

        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), false);
        let y = b.add_col("y", -1.0, Some(0.0), Some(5.0), false);
        b.add_row("s", &[(x, 2.0), (y, 1.0)], None, Some(4.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_dualfix).unwrap();
        assert_eq!(txs.len(), 1);
        assert_eq!(txs[0].steps[2], FixColumn { col: x, value: 0.0 });
    }

    #[test]
    fn unlocked_zero_cost_column_goes_to_a_bound() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 0.0, Some(1.0), Some(5.0), false);
        b.add_row("free", &[(x, 1.0)], None, None);
        let f = Fixture::new(b.build());
        let txs = f.run(run_dualfix).unwrap();
        assert_eq!(txs[0].steps[2], FixColumn { col: x, value: 1.0 });
    }

    #[test]
    fn down_locked_column_with_cost_stays() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(5.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(5.0), false);
        b.add_row("r", &[(x, 1.0), (y, 1.0)], Some(1.0), None);
        let f = Fixture::new(b.build());
        assert!(f.run(run_dualfix).unwrap().is_empty());
    }
}
