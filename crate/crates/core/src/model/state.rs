//! Mutable presolve state: the problem plus everything derived from it that
//! has to stay in sync (activities, locks, per-round modification flags and
//! the change journal used by the fast presolvers).

use super::activity::{compute_activities, compute_row_activity, update_activity, BoundSide, RowActivity};
use super::matrix::Entry;
use super::problem::{ColFlags, Problem, RowFlags};
use crate::error::Verdict;
use crate::numerics::{NumericContext, Real};

/// Number of rows that forbid decreasing (`down`) or increasing (`up`) a column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Locks {
    pub down: u32,
    pub up: u32,
}

pub fn lock_contribution<R: Real>(coef: &R, lhs_finite: bool, rhs_finite: bool) -> (bool, bool) {
    if coef.is_positive() {
        (lhs_finite, rhs_finite)
    } else {
        (rhs_finite, lhs_finite)
    }
}

pub fn compute_locks<R: Real>(problem: &Problem<R>) -> Vec<Locks> {
    let mut locks = vec![Locks::default(); problem.ncols()];
    for i in problem.active_rows() {
        let lf = problem.lhs(i).is_some();
        let rf = problem.rhs(i).is_some();
        for e in problem.matrix.row(i) {
            let (d, u) = lock_contribution(&e.value, lf, rf);
            locks[e.index].down += d as u32;
            locks[e.index].up += u as u32;
        }
    }
    locks
}

/// Which transaction (by position in the current apply batch) last touched
/// each row and column. Cleared whenever a new batch starts.
#[derive(Clone, Debug, Default)]
pub struct ModificationFlags {
    pub row_coeffs: Vec<Option<usize>>,
    pub row_sides: Vec<Option<usize>>,
    pub col_coeffs: Vec<Option<usize>>,
    pub col_bounds: Vec<Option<usize>>,
    /// Columns whose meaning changed (aggregated into another variable).
    pub col_redefined: Vec<Option<usize>>,
    touched_rows: Vec<usize>,
    touched_cols: Vec<usize>,
}

fn mark(slot: &mut Option<usize>, tx: usize) {
    if slot.is_none() {
        *slot = Some(tx);
    }
}

impl ModificationFlags {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        ModificationFlags {
            row_coeffs: vec![None; nrows],
            row_sides: vec![None; nrows],
            col_coeffs: vec![None; ncols],
            col_bounds: vec![None; ncols],
            col_redefined: vec![None; ncols],
            touched_rows: Vec::new(),
            touched_cols: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        for &r in &self.touched_rows {
            self.row_coeffs[r] = None;
            self.row_sides[r] = None;
        }
        for &c in &self.touched_cols {
            self.col_coeffs[c] = None;
            self.col_bounds[c] = None;
            self.col_redefined[c] = None;
        }
        self.touched_rows.clear();
        self.touched_cols.clear();
    }

    pub fn is_clear(&self) -> bool {
        self.row_coeffs.iter().chain(&self.row_sides).all(Option::is_none)
            && self
                .col_coeffs
                .iter()
                .chain(&self.col_bounds)
                .chain(&self.col_redefined)
                .all(Option::is_none)
    }

    fn row_coeff(&mut self, row: usize, tx: usize) {
        mark(&mut self.row_coeffs[row], tx);
        self.touched_rows.push(row);
    }

    fn row_side(&mut self, row: usize, tx: usize) {
        mark(&mut self.row_sides[row], tx);
        self.touched_rows.push(row);
    }

    fn col_coeff(&mut self, col: usize, tx: usize) {
        mark(&mut self.col_coeffs[col], tx);
        self.touched_cols.push(col);
    }

    fn col_bound(&mut self, col: usize, tx: usize) {
        mark(&mut self.col_bounds[col], tx);
        self.touched_cols.push(col);
    }

    fn col_redefine(&mut self, col: usize, tx: usize) {
        mark(&mut self.col_redefined[col], tx);
        self.touched_cols.push(col);
    }
}

/// Reduction counters feeding the "enough reductions" test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChangeCounters {
    pub bound_changes: usize,
    pub deleted_cols: usize,
    pub side_changes: usize,
    pub deleted_rows: usize,
    pub coeff_changes: usize,
}

impl ChangeCounters {
    pub fn total(&self) -> usize {
        self.bound_changes + self.deleted_cols + self.side_changes + self.deleted_rows + self.coeff_changes
    }

    /// Changes counted after the snapshot `earlier` was taken.
    pub fn since(&self, earlier: &ChangeCounters) -> ChangeCounters {
        ChangeCounters {
            bound_changes: self.bound_changes - earlier.bound_changes,
            deleted_cols: self.deleted_cols - earlier.deleted_cols,
            side_changes: self.side_changes - earlier.side_changes,
            deleted_rows: self.deleted_rows - earlier.deleted_rows,
            coeff_changes: self.coeff_changes - earlier.coeff_changes,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemState<R> {
    problem: Problem<R>,
    activities: Vec<RowActivity<R>>,
    locks: Vec<Locks>,
    ctx: NumericContext<R>,
    pub flags: ModificationFlags,
    row_journal: Vec<usize>,
    col_journal: Vec<usize>,
    current_tx: usize,
    pub counters: ChangeCounters,
}

impl<R: Real> ProblemState<R> {
    pub fn new(problem: Problem<R>, ctx: NumericContext<R>) -> Self {
        let activities = compute_activities(&problem);
        let locks = compute_locks(&problem);
        let flags = ModificationFlags::new(problem.nrows(), problem.ncols());
        ProblemState {
            problem,
            activities,
            locks,
            ctx,
            flags,
            row_journal: Vec::new(),
            col_journal: Vec::new(),
            current_tx: 0,
            counters: ChangeCounters::default(),
        }
    }

    pub fn problem(&self) -> &Problem<R> {
        &self.problem
    }

    pub fn activities(&self) -> &[RowActivity<R>] {
        &self.activities
    }

    pub fn locks(&self) -> &[Locks] {
        &self.locks
    }

    pub fn ctx(&self) -> &NumericContext<R> {
        &self.ctx
    }

    pub fn into_problem(self) -> Problem<R> {
        self.problem
    }

    /// Sets the transaction index recorded as setter of modification flags.
    pub fn begin_transaction(&mut self, index: usize) {
        self.current_tx = index;
    }

    pub fn row_journal_len(&self) -> usize {
        self.row_journal.len()
    }

    pub fn col_journal_len(&self) -> usize {
        self.col_journal.len()
    }

    /// Active rows touched since the journal position `mark`, ascending.
    pub fn changed_rows_since(&self, mark: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self.row_journal[mark.min(self.row_journal.len())..]
            .iter()
            .copied()
            .filter(|&r| self.problem.is_row_active(r))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    pub fn changed_cols_since(&self, mark: usize) -> Vec<usize> {
        let mut cols: Vec<usize> = self.col_journal[mark.min(self.col_journal.len())..]
            .iter()
            .copied()
            .filter(|&c| self.problem.is_col_active(c))
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    /// Rebuilds activities from scratch (drops floating-point drift).
    pub fn refresh_activities(&mut self) {
        self.activities = compute_activities(&self.problem);
    }

    fn recompute_row(&mut self, row: usize) {
        self.activities[row] =
            compute_row_activity(self.problem.matrix.row(row), &self.problem.lower, &self.problem.upper);
    }

    fn touch_row(&mut self, row: usize) {
        self.row_journal.push(row);
    }

    fn touch_col(&mut self, col: usize) {
        self.col_journal.push(col);
    }

    /// Audit used by tests: derived data equals a recomputation from scratch.
    pub fn check_consistency(&self) -> Result<(), String> {
        self.problem.matrix.check_consistency()?;
        let fresh = compute_activities(&self.problem);
        for (i, (a, b)) in self.activities.iter().zip(&fresh).enumerate() {
            if !self.problem.is_row_active(i) {
                continue;
            }
            let close = |x: &R, y: &R| {
                let tol = R::from_f64(1e-6);
                if self.ctx.feastol.is_zero() {
                    x == y
                } else {
                    (x.clone() - y.clone()).abs() <= tol * R::max_of(&R::one(), &R::max_of(&x.abs(), &y.abs()))
                }
            };
            if a.ninf_min != b.ninf_min || a.ninf_max != b.ninf_max {
                return Err(format!("row {i}: infinity counters differ"));
            }
            if (a.ninf_min == 0 && !close(&a.min, &b.min)) || (a.ninf_max == 0 && !close(&a.max, &b.max)) {
                return Err(format!("row {i}: activity {a:?} differs from {b:?}"));
            }
        }
        if self.locks != compute_locks(&self.problem) {
            return Err("locks differ from recomputation".into());
        }
        for j in 0..self.problem.ncols() {
            if !self.problem.is_col_active(j) && !self.problem.matrix.col(j).is_empty() {
                return Err(format!("inactive column {j} still has entries"));
            }
        }
        for i in 0..self.problem.nrows() {
            if !self.problem.is_row_active(i) && !self.problem.matrix.row(i).is_empty() {
                return Err(format!("redundant row {i} still has entries"));
            }
        }
        Ok(())
    }

    fn bound_side_update(&mut self, col: usize, side: BoundSide, old: Option<R>) {
        let new = match side {
            BoundSide::Lower => self.problem.lower[col].clone(),
            BoundSide::Upper => self.problem.upper[col].clone(),
        };
        for k in 0..self.problem.matrix.col(col).len() {
            let Entry { index: row, value } = self.problem.matrix.col(col)[k].clone();
            update_activity(&mut self.activities[row], &value, side, old.as_ref(), new.as_ref());
            self.row_journal.push(row);
        }
        self.flags.col_bound(col, self.current_tx);
        self.touch_col(col);
        self.counters.bound_changes += 1;
    }

    /// Raises the lower bound if the (integrality-rounded) value is strictly
    /// tighter. Returns whether anything changed.
    pub fn change_lower(&mut self, col: usize, value: R) -> Result<bool, Verdict> {
        let mut v = value;
        if self.problem.is_integral(col) {
            v = self.ctx.feas_ceil(&v);
        }
        if let Some(l) = &self.problem.lower[col] {
            if v <= *l {
                return Ok(false);
            }
        }
        if let Some(u) = &self.problem.upper[col] {
            if v > *u {
                if self.ctx.is_feas_le(&v, u) {
                    v = u.clone();
                } else {
                    return Err(Verdict::infeasible(format!(
                        "lower bound {} of column {} exceeds upper bound {}",
                        v, self.problem.col_names[col], u
                    )));
                }
            }
        }
        if self.problem.lower[col].as_ref() == Some(&v) {
            return Ok(false);
        }
        let old = self.problem.lower[col].replace(v);
        self.bound_side_update(col, BoundSide::Lower, old);
        Ok(true)
    }

    pub fn change_upper(&mut self, col: usize, value: R) -> Result<bool, Verdict> {
        let mut v = value;
        if self.problem.is_integral(col) {
            v = self.ctx.feas_floor(&v);
        }
        if let Some(u) = &self.problem.upper[col] {
            if v >= *u {
                return Ok(false);
            }
        }
        if let Some(l) = &self.problem.lower[col] {
            if v < *l {
                if self.ctx.is_feas_ge(&v, l) {
                    v = l.clone();
                } else {
                    return Err(Verdict::infeasible(format!(
                        "upper bound {} of column {} is below lower bound {}",
                        v, self.problem.col_names[col], l
                    )));
                }
            }
        }
        if self.problem.upper[col].as_ref() == Some(&v) {
            return Ok(false);
        }
        let old = self.problem.upper[col].replace(v);
        self.bound_side_update(col, BoundSide::Upper, old);
        Ok(true)
    }

    /// Overwrites both bounds, possibly relaxing them (aggregation only).
    pub fn set_bounds(&mut self, col: usize, lower: Option<R>, upper: Option<R>) {
        self.problem.lower[col] = lower;
        self.problem.upper[col] = upper;
        let rows: Vec<usize> = self.problem.matrix.col(col).iter().map(|e| e.index).collect();
        for row in rows {
            self.recompute_row(row);
            self.touch_row(row);
        }
        self.flags.col_bound(col, self.current_tx);
        self.touch_col(col);
        self.counters.bound_changes += 1;
    }

    /// Marks the column as having a new meaning for the rest of the batch.
    pub fn redefine_col(&mut self, col: usize) {
        self.flags.col_redefine(col, self.current_tx);
        self.flags.col_coeff(col, self.current_tx);
        self.touch_col(col);
    }

    /// Fixes a column: moves its contribution into the sides and the
    /// objective offset and removes its entries.
    pub fn fix_column(&mut self, col: usize, value: R) -> Result<(), Verdict> {
        let mut v = value;
        let name = &self.problem.col_names[col];
        if self.problem.is_integral(col) {
            if !self.ctx.is_integral(&v) {
                return Err(Verdict::infeasible(format!("integral column {name} fixed to {v}")));
            }
            v = v.round();
        }
        if let Some(l) = &self.problem.lower[col] {
            if !self.ctx.is_feas_ge(&v, l) {
                return Err(Verdict::infeasible(format!("column {name} fixed to {v} below bound {l}")));
            }
        }
        if let Some(u) = &self.problem.upper[col] {
            if !self.ctx.is_feas_le(&v, u) {
                return Err(Verdict::infeasible(format!("column {name} fixed to {v} above bound {u}")));
            }
        }
        let entries = self.problem.matrix.clear_col(col);
        let lower = self.problem.lower[col].clone();
        let upper = self.problem.upper[col].clone();
        for e in &entries {
            let row = e.index;
            self.activities[row].account(&e.value, lower.as_ref(), upper.as_ref(), -1);
            let shift = e.value.clone() * v.clone();
            let lhs = self.problem.lhs(row).map(|l| l.clone() - shift.clone());
            let rhs = self.problem.rhs(row).map(|r| r.clone() - shift.clone());
            self.problem.set_sides(row, lhs, rhs);
            self.flags.row_coeff(row, self.current_tx);
            self.flags.row_side(row, self.current_tx);
            self.touch_row(row);
        }
        let cost = std::mem::replace(&mut self.problem.objective[col], R::zero());
        self.problem.objective_offset = self.problem.objective_offset.clone() + cost * v.clone();
        self.problem.lower[col] = Some(v.clone());
        self.problem.upper[col] = Some(v);
        self.locks[col] = Locks::default();
        self.problem.col_flags[col] |= ColFlags::FIXED | ColFlags::INACTIVE;
        self.flags.col_bound(col, self.current_tx);
        self.flags.col_coeff(col, self.current_tx);
        self.touch_col(col);
        self.counters.deleted_cols += 1;
        Ok(())
    }

    /// Removes a column that has been expressed through other columns.
    pub fn deactivate_col(&mut self, col: usize) {
        let entries = self.problem.matrix.clear_col(col);
        for e in &entries {
            self.recompute_row(e.index);
            self.flags.row_coeff(e.index, self.current_tx);
            self.touch_row(e.index);
        }
        self.problem.objective[col] = R::zero();
        self.locks[col] = Locks::default();
        self.problem.col_flags[col] |= ColFlags::SUBSTITUTED | ColFlags::INACTIVE;
        self.flags.col_bound(col, self.current_tx);
        self.flags.col_coeff(col, self.current_tx);
        self.touch_col(col);
        self.counters.deleted_cols += 1;
    }

    pub fn mark_substituted(&mut self, col: usize) {
        self.problem.col_flags[col] |= ColFlags::SUBSTITUTED;
        self.flags.col_coeff(col, self.current_tx);
        self.touch_col(col);
    }

    fn relock_row(&mut self, row: usize, old_lf: bool, old_rf: bool) {
        let lf = self.problem.lhs(row).is_some();
        let rf = self.problem.rhs(row).is_some();
        if lf == old_lf && rf == old_rf {
            return;
        }
        for k in 0..self.problem.matrix.row(row).len() {
            let Entry { index: col, value } = self.problem.matrix.row(row)[k].clone();
            let (od, ou) = lock_contribution(&value, old_lf, old_rf);
            let (nd, nu) = lock_contribution(&value, lf, rf);
            let l = &mut self.locks[col];
            l.down = l.down + nd as u32 - od as u32;
            l.up = l.up + nu as u32 - ou as u32;
            self.flags.col_coeff(col, self.current_tx);
            self.col_journal.push(col);
        }
    }

    /// Replaces both sides at once. Sides crossing by at most feastol are
    /// snapped together; a larger crossing proves infeasibility.
    pub fn set_sides(&mut self, row: usize, lhs: Option<R>, rhs: Option<R>) -> Result<bool, Verdict> {
        let (mut lhs, mut rhs) = (lhs, rhs);
        let old_l = self.problem.lhs(row).cloned();
        let old_r = self.problem.rhs(row).cloned();
        if let (Some(l), Some(r)) = (&lhs, &rhs) {
            if l > r {
                if !self.ctx.is_feas_eq(l, r) {
                    return Err(Verdict::infeasible(format!(
                        "sides of row {} cross ({} > {})",
                        self.problem.row_names[row], l, r
                    )));
                }
                if rhs != old_r && lhs == old_l {
                    rhs = lhs.clone();
                } else {
                    lhs = rhs.clone();
                }
            }
        }
        if lhs == old_l && rhs == old_r {
            return Ok(false);
        }
        self.problem.set_sides(row, lhs, rhs);
        self.relock_row(row, old_l.is_some(), old_r.is_some());
        self.flags.row_side(row, self.current_tx);
        self.touch_row(row);
        self.counters.side_changes += 1;
        Ok(true)
    }

    pub fn set_lhs(&mut self, row: usize, value: Option<R>) -> Result<bool, Verdict> {
        let rhs = self.problem.rhs(row).cloned();
        self.set_sides(row, value, rhs)
    }

    pub fn set_rhs(&mut self, row: usize, value: Option<R>) -> Result<bool, Verdict> {
        let lhs = self.problem.lhs(row).cloned();
        self.set_sides(row, lhs, value)
    }

    /// Sets one coefficient; values that compare equal to zero delete the entry.
    pub fn set_coeff(&mut self, row: usize, col: usize, value: R) {
        let value = if self.ctx.is_zero(&value) { R::zero() } else { value };
        let old = self.problem.matrix.get(row, col).cloned();
        if old.is_none() && value.is_zero() {
            return;
        }
        if old.as_ref() == Some(&value) {
            return;
        }
        let lf = self.problem.lhs(row).is_some();
        let rf = self.problem.rhs(row).is_some();
        if let Some(o) = &old {
            let (d, u) = lock_contribution(o, lf, rf);
            self.locks[col].down -= d as u32;
            self.locks[col].up -= u as u32;
        }
        if !value.is_zero() {
            let (d, u) = lock_contribution(&value, lf, rf);
            self.locks[col].down += d as u32;
            self.locks[col].up += u as u32;
        }
        self.problem.matrix.set(row, col, value);
        self.recompute_row(row);
        self.flags.row_coeff(row, self.current_tx);
        self.flags.col_coeff(col, self.current_tx);
        self.touch_row(row);
        self.touch_col(col);
        self.counters.coeff_changes += 1;
        let flags = self.problem.col_flags[col];
        if flags.contains(ColFlags::SUBSTITUTED)
            && !flags.contains(ColFlags::INACTIVE)
            && self.problem.matrix.col(col).is_empty()
        {
            self.problem.col_flags[col] |= ColFlags::INACTIVE;
            self.problem.objective[col] = R::zero();
            self.counters.deleted_cols += 1;
        }
    }

    pub fn mark_row_redundant(&mut self, row: usize) {
        if !self.problem.is_row_active(row) {
            return;
        }
        let lf = self.problem.lhs(row).is_some();
        let rf = self.problem.rhs(row).is_some();
        let entries = self.problem.matrix.clear_row(row);
        for e in &entries {
            let (d, u) = lock_contribution(&e.value, lf, rf);
            self.locks[e.index].down -= d as u32;
            self.locks[e.index].up -= u as u32;
            self.flags.col_coeff(e.index, self.current_tx);
            self.touch_col(e.index);
        }
        self.problem.mark_redundant(row);
        self.activities[row] = RowActivity::default();
        self.flags.row_coeff(row, self.current_tx);
        self.flags.row_side(row, self.current_tx);
        self.touch_row(row);
        self.counters.deleted_rows += 1;
    }

    pub fn add_to_objective(&mut self, col: usize, delta: R) {
        if delta.is_zero() {
            return;
        }
        let v = self.problem.objective[col].clone() + delta;
        self.problem.objective[col] = if self.ctx.is_zero(&v) { R::zero() } else { v };
        self.flags.col_coeff(col, self.current_tx);
        self.touch_col(col);
    }

    pub fn add_to_offset(&mut self, delta: R) {
        self.problem.objective_offset = self.problem.objective_offset.clone() + delta;
    }

    /// Declares a column integral and rounds its bounds inwards.
    pub fn imply_integral(&mut self, col: usize) -> Result<(), Verdict> {
        if self.problem.is_integral(col) {
            return Ok(());
        }
        self.problem.col_flags[col] |= ColFlags::INTEGRAL;
        self.flags.col_coeff(col, self.current_tx);
        self.touch_col(col);
        if let Some(l) = self.problem.lower[col].clone() {
            if !self.ctx.is_integral(&l) {
                self.change_lower(col, l)?;
            } else if l != l.round() {
                self.problem.lower[col] = Some(l.round());
                self.bound_side_update(col, BoundSide::Lower, Some(l));
            }
        }
        if let Some(u) = self.problem.upper[col].clone() {
            if !self.ctx.is_integral(&u) {
                self.change_upper(col, u)?;
            } else if u != u.round() {
                self.problem.upper[col] = Some(u.round());
                self.bound_side_update(col, BoundSide::Upper, Some(u));
            }
        }
        Ok(())
    }

    /// Compacts the active part into a fresh problem. Returns the problem and
    /// the original indices of its columns and rows.
    pub fn compact(&self) -> (Problem<R>, Vec<usize>, Vec<usize>) {
        compact_problem(&self.problem)
    }
}

pub fn compact_problem<R: Real>(p: &Problem<R>) -> (Problem<R>, Vec<usize>, Vec<usize>) {
    let col_map: Vec<usize> = p.active_cols().collect();
    let row_map: Vec<usize> = p.active_rows().collect();
    let mut new_col = vec![usize::MAX; p.ncols()];
    for (k, &j) in col_map.iter().enumerate() {
        new_col[j] = k;
    }
    let mut b = super::problem::ProblemBuilder::new().name(&p.name);
    b.set_offset(p.objective_offset.clone());
    for &j in &col_map {
        b.add_col(
            &p.col_names[j],
            p.objective[j].clone(),
            p.lower[j].clone(),
            p.upper[j].clone(),
            p.is_integral(j),
        );
    }
    for &i in &row_map {
        let entries: Vec<(usize, R)> = p
            .matrix
            .row(i)
            .iter()
            .map(|e| (new_col[e.index], e.value.clone()))
            .collect();
        b.add_row(&p.row_names[i], &entries, p.lhs(i).cloned(), p.rhs(i).cloned());
    }
    let reduced = b.build();
    debug_assert!(row_map.iter().all(|&i| !p.row_flags(i).contains(RowFlags::REDUNDANT)));
    (reduced, col_map, row_map)
}
