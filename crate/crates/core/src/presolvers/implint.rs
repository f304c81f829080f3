use super::{PresolveView, PresolverOutput};
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "implint";

/// A continuous column of an equation whose other columns are integral is
/// integral itself when every coefficient and the side are integer multiples
/// of its own coefficient.
pub fn run_implint<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    let mut seen = vec![false; p.ncols()];
    for i in p.active_rows() {
        if !p.is_equation(i) {
            continue;
        }
        let row = p.matrix.row(i);
        let mut continuous = row.iter().filter(|e| !p.is_integral(e.index));
        let (Some(e), None) = (continuous.next(), continuous.next()) else {
            continue;
        };
        if seen[e.index] {
            continue;
        }
        let b = p.rhs(i).expect("equation");
        let divides = |v: &R| (v.clone() / e.value.clone()).to_i64_exact().is_some();
        if divides(b) && row.iter().all(|f| divides(&f.value)) {
            seen[e.index] = true;
            out.push(
                Transaction::new(NAME)
                    .with(AssertRowUnmodified(i))
                    .with(AssertRowBoundsUnmodified(i))
                    .with(ImplyIntegral(e.index)),
            );
        }
    }
    Ok(out)
}
