use std::collections::BTreeMap;

use super::{PresolveView, PresolverOutput};
use crate::error::Verdict;
use crate::numerics::Real;
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "parallelrows";

/// `lambda` with `row = lambda * rep` entrywise, if the rows are parallel.
fn ratio<R: Real>(view: &PresolveView<R>, rep: usize, row: usize) -> Option<R> {
    let a = view.problem.matrix.row(rep);
    let b = view.problem.matrix.row(row);
    let lambda = b[0].value.clone() / a[0].value.clone();
    a.iter()
        .zip(b)
        .all(|(x, y)| view.ctx.approx_eq(&(lambda.clone() * x.value.clone()), &y.value))
        .then_some(lambda)
}

/// Rows with proportional coefficients are merged into the lowest-index row
/// of their class, all in one transaction per class.
pub fn run_parallelrows<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let ctx = view.ctx;
    let mut by_support: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in p.active_rows() {
        let row = p.matrix.row(i);
        if row.len() >= 2 {
            by_support.entry(row.iter().map(|e| e.index).collect()).or_default().push(i);
        }
    }
    let mut classes: Vec<Vec<(usize, R)>> = Vec::new();
    for rows in by_support.into_values() {
        let mut local: Vec<Vec<(usize, R)>> = Vec::new();
        for i in rows {
            match local.iter_mut().find_map(|c| ratio(view, c[0].0, i).map(|l| (c, l))) {
                Some((class, lambda)) => class.push((i, lambda)),
                None => local.push(vec![(i, R::one())]),
            }
        }
        classes.extend(local.into_iter().filter(|c| c.len() > 1));
    }
    classes.sort_by_key(|c| c[0].0);
    let mut out = Vec::new();
    for class in classes {
        let rep = class[0].0;
        let mut lhs = p.lhs(rep).cloned();
        let mut rhs = p.rhs(rep).cloned();
        for (i, lambda) in &class[1..] {
            let scaled = |v: Option<&R>| v.map(|v| v.clone() / lambda.clone());
            let (l, r) = if lambda.is_positive() {
                (scaled(p.lhs(*i)), scaled(p.rhs(*i)))
            } else {
                (scaled(p.rhs(*i)), scaled(p.lhs(*i)))
            };
            if let Some(l) = l {
                lhs = Some(lhs.map_or(l.clone(), |cur| R::max_of(&cur, &l)));
            }
            if let Some(r) = r {
                rhs = Some(rhs.map_or(r.clone(), |cur| R::min_of(&cur, &r)));
            }
        }
        if let (Some(l), Some(r)) = (&lhs, &rhs) {
            if l > r {
                if !ctx.is_feas_le(l, r) {
                    return Err(Verdict::infeasible(format!(
                        "parallel rows around {} have disjoint sides",
                        p.row_names[rep]
                    )));
                }
                lhs = rhs.clone();
            }
        }
        let mut tx = Transaction::new(NAME);
        for (i, _) in &class {
            tx.push(AssertRowUnmodified(*i));
            tx.push(AssertRowBoundsUnmodified(*i));
        }
        if lhs.as_ref() != p.lhs(rep) || rhs.as_ref() != p.rhs(rep) {
            tx.push(ChangeLhs { row: rep, value: lhs });
            tx.push(ChangeRhs { row: rep, value: rhs });
        }
        for (i, _) in &class[1..] {
            tx.push(MarkRowRedundant(*i));
        }
        out.push(tx);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemBuilder;
    use crate::presolvers::testutil::Fixture;

    fn rows(specs: &[(&[f64], Option<f64>, Option<f64>)]) -> Fixture<f64> {
        let mut b = ProblemBuilder::new();
        let x = b.add_col("x", 1.0, Some(0.0), Some(1.0), true);
        let y = b.add_col("y", 1.0, Some(0.0), Some(1.0), true);
        for (k, (c, l, r)) in specs.iter().enumerate() {
            b.add_row(&format!("r{k}"), &[(x, c[0]), (y, c[1])], *l, *r);
        }
        Fixture::new(b.build())
    }

    #[test]
    fn three_rows_merge_in_one_transaction() {
        let f = rows(&[(&[3.0, 3.0], None, Some(4.0)), (&[6.0, 6.0], Some(4.0), None), (&[3.0, 3.0], Some(3.0), None)]);
        let txs = f.run(run_parallelrows).unwrap();
        assert_eq!(txs.len(), 1);
        let changes: Vec<_> = txs[0].changes().cloned().collect();
        assert_eq!(
            changes,
            vec![
                ChangeLhs { row: 0, value: Some(3.0) },
                ChangeRhs { row: 0, value: Some(4.0) },
                MarkRowRedundant(1),
                MarkRowRedundant(2),
            ]
        );
    }

    #[test]
    fn identical_rows_keep_sides() {
        let f = rows(&[(&[1.0, 2.0], None, Some(2.0)), (&[1.0, 2.0], None, Some(2.0))]);
        let txs = f.run(run_parallelrows).unwrap();
        assert_eq!(txs[0].changes().cloned().collect::<Vec<_>>(), vec![MarkRowRedundant(1)]);
    }

    #[test]
    fn nearly_parallel_rows_are_distinct() {
        let f = rows(&[(&[1.0, 2.0], None, Some(2.0)), (&[2.0, 4.0000001], None, Some(2.0))]);
        assert!(f.run(run_parallelrows).unwrap().is_empty());
    }

    #[test]
    fn negative_ratio_swaps_sides() {
        // -x - y >= -4 is x + y <= 4.
        let f = rows(&[(&[1.0, 1.0], Some(1.0), None), (&[-1.0, -1.0], Some(-4.0), None)]);
        let txs = f.run(run_parallelrows).unwrap();
        assert_eq!(txs[0].changes().nth(1), Some(&ChangeRhs { row: 0, value: Some(4.0) }));
    }

    #[test]
    fn disjoint_sides_are_infeasible() {
        let f = rows(&[(&[1.0, 1.0], None, Some(1.0)), (&[2.0, 2.0], Some(3.0), None)]);
        assert!(matches!(f.run(run_parallelrows), Err(Verdict::Infeasible(_))));
    }
}
