//! Recording applied reductions and mapping reduced solutions back to the
//! original problem.

use thiserror::Error;

use crate::error::Verdict;
use crate::model::{compact_problem, Problem, ProblemState};
use crate::numerics::{NumericContext, Real};
use crate::transaction::{apply_steps, ReductionStep};

/// What is needed to recover the value of a removed column.
#[derive(Clone, Debug, PartialEq)]
pub enum PostsolveData<R> {
    None,
    Fixed {
        col: usize,
        value: R,
    },
    /// `coef * x_col + sum(entries) = rhs`.
    Substituted {
        col: usize,
        coef: R,
        entries: Vec<(usize, R)>,
        rhs: R,
        integral: bool,
    },
    /// A zero-cost column with one entry; any value keeping the row within
    /// its sides and the column within its bounds works.
    FreeColumn {
        col: usize,
        coef: R,
        entries: Vec<(usize, R)>,
        lhs: Option<R>,
        rhs: Option<R>,
        lower: Option<R>,
        upper: Option<R>,
    },
    /// `x_keep` was replaced by `y = x_keep + scale * x_remove`.
    Aggregated {
        keep: usize,
        remove: usize,
        scale: R,
        keep_lower: Option<R>,
        keep_upper: Option<R>,
        remove_lower: Option<R>,
        remove_upper: Option<R>,
        integral: bool,
    },
    /// `x_col = factor * x_by + offset`.
    Replaced {
        col: usize,
        by: usize,
        factor: R,
        offset: R,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordEntry<R> {
    pub step: ReductionStep<R>,
    pub data: PostsolveData<R>,
}

/// Append-only list of applied reductions plus the original column data.
#[derive(Clone, Debug, PartialEq)]
pub struct PostsolveRecord<R> {
    pub orig_nrows: usize,
    pub orig_ncols: usize,
    pub objective: Vec<R>,
    pub objective_offset: R,
    pub lower: Vec<Option<R>>,
    pub upper: Vec<Option<R>>,
    pub integral: Vec<bool>,
    pub col_names: Vec<String>,
    /// Original index of every column of the reduced problem.
    pub col_map: Vec<usize>,
    pub row_map: Vec<usize>,
    pub entries: Vec<RecordEntry<R>>,
}

impl<R: Real> PostsolveRecord<R> {
    pub fn new(original: &Problem<R>) -> Self {
        PostsolveRecord {
            orig_nrows: original.nrows(),
            orig_ncols: original.ncols(),
            objective: original.objective.clone(),
            objective_offset: original.objective_offset.clone(),
            lower: original.lower.clone(),
            upper: original.upper.clone(),
            integral: (0..original.ncols()).map(|j| original.is_integral(j)).collect(),
            col_names: original.col_names.clone(),
            col_map: (0..original.ncols()).collect(),
            row_map: (0..original.nrows()).collect(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, step: ReductionStep<R>, data: PostsolveData<R>) {
        self.entries.push(RecordEntry { step, data });
    }

    pub fn set_maps(&mut self, col_map: Vec<usize>, row_map: Vec<usize>) {
        self.col_map = col_map;
        self.row_map = row_map;
    }

    /// Re-applies the recorded steps to the original problem and compacts
    /// the result, which reproduces the reduced problem.
    pub fn replay(&self, original: &Problem<R>, ctx: &NumericContext<R>) -> Result<Problem<R>, Verdict> {
        let mut state = ProblemState::new(original.clone(), ctx.clone());
        let steps: Vec<ReductionStep<R>> = self.entries.iter().map(|e| e.step.clone()).collect();
        apply_steps(&mut state, &steps, None)?;
        Ok(compact_problem(state.problem()).0)
    }

    pub fn objective_value(&self, values: &[R]) -> R {
        values
            .iter()
            .zip(&self.objective)
            .fold(self.objective_offset.clone(), |acc, (x, c)| acc + c.clone() * x.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<R> {
    pub values: Vec<R>,
    pub objective: R,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PostsolveError {
    #[error("reduced solution has {got} values, the reduced problem has {expected} columns")]
    Length { expected: usize, got: usize },
    #[error("record entry {entry} ({kind}): {reason}")]
    Infeasible {
        entry: usize,
        kind: &'static str,
        reason: String,
    },
    #[error("column {0} has no value after postsolve")]
    Missing(usize),
}

fn activity<R: Real>(entries: &[(usize, R)], x: &[Option<R>]) -> Option<R> {
    entries.iter().try_fold(R::zero(), |acc, (k, a)| Some(acc + a.clone() * x[*k].clone()?))
}

/// Picks the point of `[lo, hi]` preferred by `prefer_low` (or the one
/// nearest zero when that end is infinite), rounding inwards for integral
/// columns. `None` if the interval is empty beyond feastol.
fn choose_in<R: Real>(
    lo: Option<R>,
    hi: Option<R>,
    prefer_low: Option<bool>,
    integral: bool,
    ctx: &NumericContext<R>,
) -> Option<R> {
    let (lo, hi) = if integral {
        (lo.map(|v| ctx.feas_ceil(&v)), hi.map(|v| ctx.feas_floor(&v)))
    } else {
        (lo, hi)
    };
    if let (Some(l), Some(u)) = (&lo, &hi) {
        if l > u {
            return ctx.is_feas_le(l, u).then(|| u.clone());
        }
    }
    let clamp_zero = || {
        let mut v = R::zero();
        if let Some(l) = &lo {
            v = R::max_of(&v, l);
        }
        if let Some(u) = &hi {
            v = R::min_of(&v, u);
        }
        v
    };
    Some(match prefer_low {
        Some(true) => lo.clone().unwrap_or_else(clamp_zero),
        Some(false) => hi.clone().unwrap_or_else(clamp_zero),
        None => clamp_zero(),
    })
}

/// Maps a solution of the reduced problem to one of the original problem.
pub fn postsolve_primal<R: Real>(
    record: &PostsolveRecord<R>,
    reduced: &[R],
    ctx: &NumericContext<R>,
) -> Result<Solution<R>, PostsolveError> {
    if reduced.len() != record.col_map.len() {
        return Err(PostsolveError::Length {
            expected: record.col_map.len(),
            got: reduced.len(),
        });
    }
    let mut x: Vec<Option<R>> = vec![None; record.orig_ncols];
    for (k, &j) in record.col_map.iter().enumerate() {
        x[j] = Some(reduced[k].clone());
    }
    // From its first aggregation on, a kept column stands for a combination
    // of columns and its values are not checked against the original bounds.
    let mut aggregated_at = vec![usize::MAX; record.orig_ncols];
    for (index, entry) in record.entries.iter().enumerate() {
        if let PostsolveData::Aggregated { keep, .. } = &entry.data {
            aggregated_at[*keep] = aggregated_at[*keep].min(index);
        }
    }
    for (index, entry) in record.entries.iter().enumerate().rev() {
        let fail = |reason: String| PostsolveError::Infeasible {
            entry: index,
            kind: entry.step.kind_name(),
            reason,
        };
        let missing = || fail("depends on a column without value".to_string());
        match &entry.data {
            PostsolveData::None => {}
            PostsolveData::Fixed { col, value } => x[*col] = Some(value.clone()),
            PostsolveData::Substituted {
                col,
                coef,
                entries,
                rhs,
                integral,
            } => {
                let rest = activity(entries, &x).ok_or_else(missing)?;
                let mut v = (rhs.clone() - rest) / coef.clone();
                if *integral {
                    if !ctx.is_integral(&v) {
                        return Err(fail(format!("integral column {col} gets value {v}")));
                    }
                    v = v.round();
                }
                x[*col] = Some(v);
            }
            PostsolveData::FreeColumn {
                col,
                coef,
                entries,
                lhs,
                rhs,
                lower,
                upper,
            } => {
                let rest = activity(entries, &x).ok_or_else(missing)?;
                let from_lhs = lhs.as_ref().map(|l| (l.clone() - rest.clone()) / coef.clone());
                let from_rhs = rhs.as_ref().map(|r| (r.clone() - rest.clone()) / coef.clone());
                let (row_lo, row_hi) = if coef.is_positive() {
                    (from_lhs, from_rhs)
                } else {
                    (from_rhs, from_lhs)
                };
                let lo = tighter(lower.clone(), row_lo, true);
                let hi = tighter(upper.clone(), row_hi, false);
                let v = choose_in(lo, hi, None, false, ctx)
                    .ok_or_else(|| fail(format!("no feasible value for column {col}")))?;
                x[*col] = Some(v);
            }
            PostsolveData::Aggregated {
                keep,
                remove,
                scale,
                keep_lower,
                keep_upper,
                remove_lower,
                remove_upper,
                integral,
            } => {
                let y = x[*keep].clone().ok_or_else(missing)?;
                // keep_lower <= y - scale * x_r <= keep_upper
                let from_upper = keep_upper.as_ref().map(|u| (y.clone() - u.clone()) / scale.clone());
                let from_lower = keep_lower.as_ref().map(|l| (y.clone() - l.clone()) / scale.clone());
                let (a, b) = if scale.is_positive() {
                    (from_upper, from_lower)
                } else {
                    (from_lower, from_upper)
                };
                let lo = tighter(remove_lower.clone(), a, true);
                let hi = tighter(remove_upper.clone(), b, false);
                let xr = choose_in(lo, hi, Some(scale.is_positive()), *integral, ctx)
                    .ok_or_else(|| fail(format!("cannot split value {y} of column {keep}")))?;
                x[*keep] = Some(y - scale.clone() * xr.clone());
                x[*remove] = Some(xr);
            }
            PostsolveData::Replaced { col, by, factor, offset } => {
                let v = x[*by].clone().ok_or_else(missing)?;
                x[*col] = Some(factor.clone() * v + offset.clone());
            }
        }
        for col in changed_cols(&entry.data) {
            if aggregated_at[col] < index {
                continue;
            }
            let v = x[col].as_ref().expect("value just set");
            if !within_bounds(v, record.lower[col].as_ref(), record.upper[col].as_ref(), ctx) {
                return Err(fail(format!(
                    "column {} gets value {} outside its original bounds",
                    record.col_names[col], v
                )));
            }
        }
    }
    let values = x
        .into_iter()
        .enumerate()
        .map(|(j, v)| v.ok_or(PostsolveError::Missing(j)))
        .collect::<Result<Vec<R>, _>>()?;
    let objective = record.objective_value(&values);
    Ok(Solution { values, objective })
}

fn changed_cols<R>(data: &PostsolveData<R>) -> Vec<usize> {
    match data {
        PostsolveData::None => Vec::new(),
        PostsolveData::Fixed { col, .. }
        | PostsolveData::Substituted { col, .. }
        | PostsolveData::FreeColumn { col, .. }
        | PostsolveData::Replaced { col, .. } => vec![*col],
        PostsolveData::Aggregated { keep, remove, .. } => vec![*keep, *remove],
    }
}

fn within_bounds<R: Real>(v: &R, lower: Option<&R>, upper: Option<&R>, ctx: &NumericContext<R>) -> bool {
    lower.is_none_or(|l| ctx.is_feas_ge(v, l)) && upper.is_none_or(|u| ctx.is_feas_le(v, u))
}

fn tighter<R: Real>(a: Option<R>, b: Option<R>, lower: bool) -> Option<R> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if lower { R::max_of(&x, &y) } else { R::min_of(&x, &y) }),
        (x, None) => x,
        (None, y) => y,
    }
}
