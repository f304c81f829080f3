//! Minimum and maximum row activities with counters for infinite contributions.

use super::matrix::Entry;
use super::problem::Problem;
use crate::numerics::{ExtendedValue, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowActivity<R> {
    /// Sum of the finite contributions to the minimum activity.
    pub min: R,
    pub max: R,
    pub ninf_min: usize,
    pub ninf_max: usize,
}

impl<R: Real> Default for RowActivity<R> {
    fn default() -> Self {
        RowActivity {
            min: R::zero(),
            max: R::zero(),
            ninf_min: 0,
            ninf_max: 0,
        }
    }
}

/// Bound a coefficient pulls towards for the minimum activity (and the
/// opposite one for the maximum).
fn min_bound_side<R: Real>(coef: &R) -> BoundSide {
    if coef.is_positive() {
        BoundSide::Lower
    } else {
        BoundSide::Upper
    }
}

impl<R: Real> RowActivity<R> {
    pub fn min_value(&self) -> ExtendedValue<R> {
        if self.ninf_min > 0 {
            ExtendedValue::NegInf
        } else {
            ExtendedValue::Finite(self.min.clone())
        }
    }

    pub fn max_value(&self) -> ExtendedValue<R> {
        if self.ninf_max > 0 {
            ExtendedValue::PosInf
        } else {
            ExtendedValue::Finite(self.max.clone())
        }
    }

    pub fn finite_min(&self) -> Option<&R> {
        (self.ninf_min == 0).then_some(&self.min)
    }

    pub fn finite_max(&self) -> Option<&R> {
        (self.ninf_max == 0).then_some(&self.max)
    }

    /// Minimum activity of the row with the entry `coef * x` taken out, or
    /// `None` when the remainder is unbounded below.
    pub fn min_without(&self, coef: &R, lower: Option<&R>, upper: Option<&R>) -> Option<R> {
        let contrib = match min_bound_side(coef) {
            BoundSide::Lower => lower,
            BoundSide::Upper => upper,
        };
        match contrib {
            None if self.ninf_min == 1 => Some(self.min.clone()),
            None => None,
            Some(b) if self.ninf_min == 0 => Some(self.min.clone() - coef.clone() * b.clone()),
            Some(_) => None,
        }
    }

    pub fn max_without(&self, coef: &R, lower: Option<&R>, upper: Option<&R>) -> Option<R> {
        let contrib = match min_bound_side(coef) {
            BoundSide::Lower => upper,
            BoundSide::Upper => lower,
        };
        match contrib {
            None if self.ninf_max == 1 => Some(self.max.clone()),
            None => None,
            Some(b) if self.ninf_max == 0 => Some(self.max.clone() - coef.clone() * b.clone()),
            Some(_) => None,
        }
    }

    fn add_contribution(&mut self, coef: &R, bound: Option<&R>, to_min: bool, sign: i8) {
        let (sum, ninf) = if to_min {
            (&mut self.min, &mut self.ninf_min)
        } else {
            (&mut self.max, &mut self.ninf_max)
        };
        match bound {
            None => {
                if sign > 0 {
                    *ninf += 1;
                } else {
                    *ninf -= 1;
                }
            }
            Some(b) => {
                let term = coef.clone() * b.clone();
                if sign > 0 {
                    *sum = sum.clone() + term;
                } else {
                    *sum = sum.clone() - term;
                }
            }
        }
    }

    /// Adds (`sign = 1`) or removes (`sign = -1`) one entry's contributions.
    pub fn account(&mut self, coef: &R, lower: Option<&R>, upper: Option<&R>, sign: i8) {
        if coef.is_zero() {
            return;
        }
        let (for_min, for_max) = if coef.is_positive() {
            (lower, upper)
        } else {
            (upper, lower)
        };
        self.add_contribution(coef, for_min, true, sign);
        self.add_contribution(coef, for_max, false, sign);
    }
}

/// Activity of one row from scratch.
pub fn compute_row_activity<R: Real>(
    entries: &[Entry<R>],
    lower: &[Option<R>],
    upper: &[Option<R>],
) -> RowActivity<R> {
    let mut act = RowActivity::default();
    for e in entries {
        act.account(&e.value, lower[e.index].as_ref(), upper[e.index].as_ref(), 1);
    }
    act
}

pub fn compute_activities<R: Real>(problem: &Problem<R>) -> Vec<RowActivity<R>> {
    (0..problem.nrows())
        .map(|i| compute_row_activity(problem.matrix.row(i), &problem.lower, &problem.upper))
        .collect()
}

/// Differential update of a row activity after one bound of a column with
/// coefficient `coef` moved from `old` to `new`.
pub fn update_activity<R: Real>(
    act: &mut RowActivity<R>,
    coef: &R,
    side: BoundSide,
    old: Option<&R>,
    new: Option<&R>,
) {
    if old == new || coef.is_zero() {
        return;
    }
    let to_min = side == min_bound_side(coef);
    act.add_contribution(coef, old, to_min, -1);
    act.add_contribution(coef, new, to_min, 1);
}
