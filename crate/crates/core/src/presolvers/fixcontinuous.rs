use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "fixcontinuous";

/// Continuous columns whose bounds are within feastol of each other.
pub fn run_fixcontinuous<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let mut out = Vec::new();
    for j in p.active_cols() {
        if p.is_integral(j) {
            continue;
        }
        let (Some(l), Some(u)) = (&p.lower[j], &p.upper[j]) else {
            continue;
        };
        let gap = u.clone() - l.clone();
        let limit = ctx.feastol.clone() * R::max_of(&R::one(), &l.abs());
        if gap > limit {
            continue;
        }
        let cost = &p.objective[j];
        let value = if cost.is_positive() {
            l.clone()
        } else if cost.is_negative() {
            u.clone()
        } else {
            (l.clone() + u.clone()) / R::from_i64(2)
        };
        out.push(
            Transaction::new(NAME)
                .with(AssertColBoundsUnmodified(j))
                .with(FixColumn { col: j, value }),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemBuilder;
    use crate::presolvers::testutil::Fixture;

    #[test]
    fn near_equal_bounds_are_fixed() {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(1.0 - 1e-9), Some(1.0), false);
        let y = b.add_col("y", 1.0, Some(0.0), Some(1.0), false);
        let z = b.add_col("z", -1.0, Some(2.0), Some(2.0), false);
        b.add_row("r", &[(x, 1.0), (y, 1.0), (z, 1.0)], None, Some(5.0));
        let f = Fixture::new(b.build());
        let txs = f.run(run_fixcontinuous).unwrap();
        assert_eq!(txs.len(), 2);
        assert_eq!(txs[0].steps[1], FixColumn { col: x, value: 1.0 - 1e-9 });
        assert_eq!(txs[1].steps[1], FixColumn { col: z, value: 2.0 });
    }
}
