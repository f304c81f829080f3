use super::{PresolveView, PresolverOutput};
use crate::numerics::{gcd_i64, NumericContext, Real};
use crate::transaction::{ReductionStep::*, Transaction};

const NAME: &str = "coefftightening";

/// A row `sum coeffs <= rhs` after tightening.
#[derive(Clone, Debug, PartialEq)]
pub struct TightenedRow<R> {
    pub coeffs: Vec<(usize, R)>,
    pub rhs: R,
}

/// Tightens the coefficients of integral columns in `sum a_j x_j <= rhs`,
/// one column at a time in entry order, then divides an all-integral row by
/// its gcd. `bounds` gives `(lower, upper, integral)` per entry. Returns
/// `None` when nothing changes or the maximum activity is infinite.
pub fn tighten_row<R: Real>(
    coeffs: &[(usize, R)],
    rhs: &R,
    bounds: &[(Option<R>, Option<R>, bool)],
    ctx: &NumericContext<R>,
) -> Option<TightenedRow<R>> {
    let mut max_act = R::zero();
    for ((_, a), (l, u, _)) in coeffs.iter().zip(bounds) {
        let b = if a.is_positive() { u } else { l };
        max_act = max_act + a.clone() * b.clone()?;
    }
    let mut row: Vec<(usize, R)> = coeffs.to_vec();
    let mut rhs = rhs.clone();
    let mut changed = false;
    for (k, (l, u, integral)) in bounds.iter().enumerate() {
        if !integral {
            continue;
        }
        let a = row[k].1.clone();
        let abs = a.abs();
        // For any x_j one step away from its max-activity bound the row is
        // slack, so the coefficient can shrink by the slack `d`.
        if !(ctx.is_lt(&(max_act.clone() - abs.clone()), &rhs) && ctx.is_lt(&rhs, &max_act)) {
            continue;
        }
        let d = rhs.clone() - (max_act.clone() - abs.clone());
        if a.is_positive() {
            let u = u.clone().expect("finite max activity");
            row[k].1 = a - d.clone();
            rhs = rhs - d.clone() * u.clone();
            max_act = max_act - d * u;
        } else {
            let l = l.clone().expect("finite max activity");
            row[k].1 = a + d.clone();
            rhs = rhs + d.clone() * l.clone();
            max_act = max_act + d * l;
        }
        changed = true;
    }
    row.retain(|(_, a)| !ctx.is_zero(a));
    if bounds.iter().all(|b| b.2) {
        let ints: Option<Vec<i64>> = row.iter().map(|(_, a)| a.to_i64_exact()).collect();
        if let Some(ints) = ints {
            let g = ints.iter().fold(0, |g, &v| gcd_i64(g, v));
            if g > 1 {
                let gr = R::from_i64(g);
                for (_, a) in row.iter_mut() {
                    *a = a.clone() / gr.clone();
                }
                rhs = rhs / gr;
                changed = true;
            }
            let floored = ctx.feas_floor(&rhs);
            if floored != rhs {
                rhs = floored;
                changed = true;
            }
        }
    }
    changed.then_some(TightenedRow { coeffs: row, rhs })
}

pub fn run_coefftightening<R: Real>(view: &PresolveView<R>) -> PresolverOutput<R> {
    let p = view.problem;
    let mut out = Vec::new();
    for &i in view.changed_rows {
        if !p.is_row_active(i) || p.matrix.row(i).len() < 2 {
            continue;
        }
        // Rows with one finite side only; `>=` rows are negated.
        let (negate, side) = match (p.lhs(i), p.rhs(i)) {
            (None, Some(r)) => (false, r.clone()),
            (Some(l), None) => (true, -l.clone()),
            _ => continue,
        };
        let entries = p.matrix.row(i);
        if !entries.iter().any(|e| p.is_integral(e.index)) {
            continue;
        }
        let coeffs: Vec<(usize, R)> = entries
            .iter()
            .map(|e| (e.index, if negate { -e.value.clone() } else { e.value.clone() }))
            .collect();
        let bounds: Vec<_> = entries
            .iter()
            .map(|e| (p.lower[e.index].clone(), p.upper[e.index].clone(), p.is_integral(e.index)))
            .collect();
        let Some(t) = tighten_row(&coeffs, &side, &bounds, view.ctx) else {
            continue;
        };
        let mut tx = Transaction::new(NAME)
            .with(AssertRowUnmodified(i))
            .with(AssertRowBoundsUnmodified(i));
        let mut next = t.coeffs.iter().peekable();
        for (col, old) in &coeffs {
            let new = match next.peek() {
                Some((c, v)) if c == col => {
                    next.next();
                    v.clone()
                }
                _ => R::zero(),
            };
            if new != *old {
                let value = if negate { -new } else { new };
                tx.push(ChangeCoeff { row: i, col: *col, value });
            }
        }
        if t.rhs != side {
            tx.push(if negate {
                ChangeLhs { row: i, value: Some(-t.rhs) }
            } else {
                ChangeRhs { row: i, value: Some(t.rhs) }
            });
        }
        if tx.changes().next().is_some() {
            out.push(tx);
        }
    }
    Ok(out)
}
