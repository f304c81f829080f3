//! The mixed-integer program `min c'x + offset, L <= Ax <= U, l <= x <= u`,
//! with integrality on a subset of the columns.

use bitflags::bitflags;

use super::matrix::SparseMatrix;
use crate::error::ModelError;
use crate::numerics::{NumericContext, Real};

bitflags! {
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
    pub struct ColFlags: u8 {
        const INTEGRAL = 1;
        const FIXED = 1 << 1;
        const SUBSTITUTED = 1 << 2;
        const INACTIVE = 1 << 3;
    }
}

bitflags! {
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
    pub struct RowFlags: u8 {
        const LHS_INF = 1;
        const RHS_INF = 1 << 1;
        const EQUATION = 1 << 2;
        const REDUNDANT = 1 << 3;
    }
}

/// Bounds and sides use `None` for the infinite value on their side:
/// `lower`/`lhs` `None` is -inf, `upper`/`rhs` `None` is +inf.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem<R> {
    pub name: String,
    pub objective: Vec<R>,
    pub objective_offset: R,
    pub lower: Vec<Option<R>>,
    pub upper: Vec<Option<R>>,
    pub col_flags: Vec<ColFlags>,
    lhs: Vec<Option<R>>,
    rhs: Vec<Option<R>>,
    row_flags: Vec<RowFlags>,
    pub matrix: SparseMatrix<R>,
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
}

fn side_flags<R: Real>(lhs: &Option<R>, rhs: &Option<R>) -> RowFlags {
    let mut flags = RowFlags::empty();
    if lhs.is_none() {
        flags |= RowFlags::LHS_INF;
    }
    if rhs.is_none() {
        flags |= RowFlags::RHS_INF;
    }
    if let (Some(l), Some(r)) = (lhs, rhs) {
        if l == r {
            flags |= RowFlags::EQUATION;
        }
    }
    flags
}

impl<R: Real> Problem<R> {
    pub fn ncols(&self) -> usize {
        self.objective.len()
    }

    pub fn nrows(&self) -> usize {
        self.lhs.len()
    }

    pub fn lhs(&self, row: usize) -> Option<&R> {
        self.lhs[row].as_ref()
    }

    pub fn rhs(&self, row: usize) -> Option<&R> {
        self.rhs[row].as_ref()
    }

    pub fn lhs_all(&self) -> &[Option<R>] {
        &self.lhs
    }

    pub fn rhs_all(&self) -> &[Option<R>] {
        &self.rhs
    }

    pub fn row_flags(&self, row: usize) -> RowFlags {
        self.row_flags[row]
    }

    /// Single mutation point for sides so the derived flags never go stale.
    pub fn set_sides(&mut self, row: usize, lhs: Option<R>, rhs: Option<R>) {
        let redundant = self.row_flags[row] & RowFlags::REDUNDANT;
        self.row_flags[row] = side_flags(&lhs, &rhs) | redundant;
        self.lhs[row] = lhs;
        self.rhs[row] = rhs;
    }

    pub fn mark_redundant(&mut self, row: usize) {
        self.row_flags[row] |= RowFlags::REDUNDANT;
    }

    pub fn is_equation(&self, row: usize) -> bool {
        self.row_flags[row].contains(RowFlags::EQUATION)
    }

    pub fn is_row_active(&self, row: usize) -> bool {
        !self.row_flags[row].contains(RowFlags::REDUNDANT)
    }

    pub fn is_col_active(&self, col: usize) -> bool {
        !self.col_flags[col].contains(ColFlags::INACTIVE)
    }

    pub fn is_integral(&self, col: usize) -> bool {
        self.col_flags[col].contains(ColFlags::INTEGRAL)
    }

    pub fn is_binary(&self, col: usize) -> bool {
        self.is_integral(col)
            && self.lower[col].as_ref().is_some_and(|l| l.is_zero())
            && self.upper[col].as_ref().is_some_and(|u| *u == R::one())
    }

    pub fn active_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nrows()).filter(|&r| self.is_row_active(r))
    }

    pub fn active_cols(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ncols()).filter(|&c| self.is_col_active(c))
    }

    pub fn num_active_rows(&self) -> usize {
        self.active_rows().count()
    }

    pub fn num_active_cols(&self) -> usize {
        self.active_cols().count()
    }

    /// Objective value `c'x + offset` for a full assignment.
    pub fn objective_value(&self, x: &[R]) -> R {
        self.objective
            .iter()
            .zip(x)
            .fold(self.objective_offset.clone(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    pub fn row_activity_at(&self, row: usize, x: &[R]) -> R {
        self.matrix
            .row(row)
            .iter()
            .fold(R::zero(), |acc, e| acc + e.value.clone() * x[e.index].clone())
    }

    /// Checks bounds, sides, integrality and row activities of `x` within feastol.
    pub fn is_feasible(&self, x: &[R], ctx: &NumericContext<R>) -> Result<(), String> {
        if x.len() != self.ncols() {
            return Err(format!("solution has {} values, expected {}", x.len(), self.ncols()));
        }
        for (j, v) in x.iter().enumerate() {
            if let Some(l) = &self.lower[j] {
                if !ctx.is_feas_ge(v, l) {
                    return Err(format!("column {} = {} below lower bound {}", self.col_names[j], v, l));
                }
            }
            if let Some(u) = &self.upper[j] {
                if !ctx.is_feas_le(v, u) {
                    return Err(format!("column {} = {} above upper bound {}", self.col_names[j], v, u));
                }
            }
            if self.is_integral(j) && !ctx.is_integral(v) {
                return Err(format!("column {} = {} not integral", self.col_names[j], v));
            }
        }
        for i in 0..self.nrows() {
            let act = self.row_activity_at(i, x);
            if let Some(l) = &self.lhs[i] {
                if !ctx.is_feas_ge(&act, l) {
                    return Err(format!("row {} activity {} below lhs {}", self.row_names[i], act, l));
                }
            }
            if let Some(u) = &self.rhs[i] {
                if !ctx.is_feas_le(&act, u) {
                    return Err(format!("row {} activity {} above rhs {}", self.row_names[i], act, u));
                }
            }
        }
        Ok(())
    }

    /// Structural checks run before presolving. Returns warnings for values
    /// whose magnitude reaches `hugeval`.
    pub fn validate(&self, ctx: &NumericContext<R>) -> Result<Vec<String>, ModelError> {
        let n = self.ncols();
        let m = self.nrows();
        if self.lower.len() != n
            || self.upper.len() != n
            || self.col_flags.len() != n
            || self.col_names.len() != n
            || self.matrix.ncols() != n
        {
            return Err(ModelError::Dimension("column data lengths differ".into()));
        }
        if self.rhs.len() != m || self.row_names.len() != m || self.matrix.nrows() != m {
            return Err(ModelError::Dimension("row data lengths differ".into()));
        }
        self.matrix.check_consistency().map_err(ModelError::Matrix)?;
        let mut warnings = Vec::new();
        for j in 0..n {
            if let (Some(l), Some(u)) = (&self.lower[j], &self.upper[j]) {
                if l > u {
                    return Err(ModelError::CrossedBounds(self.col_names[j].clone()));
                }
            }
            for b in [&self.lower[j], &self.upper[j]].into_iter().flatten() {
                if ctx.is_huge(b) {
                    warnings.push(format!("column {} has huge bound {}", self.col_names[j], b));
                }
            }
        }
        for i in 0..m {
            if let (Some(l), Some(u)) = (&self.lhs[i], &self.rhs[i]) {
                if l > u {
                    return Err(ModelError::CrossedSides(self.row_names[i].clone()));
                }
            }
            for e in self.matrix.row(i) {
                if ctx.is_huge(&e.value) {
                    warnings.push(format!(
                        "coefficient {} in row {} is huge",
                        e.value, self.row_names[i]
                    ));
                }
            }
        }
        Ok(warnings)
    }

    /// Converts every number to another representation (used to run the same
    /// instance in both arithmetic modes).
    pub fn convert<S: Real>(&self) -> Problem<S> {
        let conv = |v: &R| S::from_f64(v.to_f64());
        let conv_opt = |v: &Option<R>| v.as_ref().map(conv);
        let triplets = self
            .matrix
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (r, c, conv(&v)))
            .collect();
        Problem {
            name: self.name.clone(),
            objective: self.objective.iter().map(conv).collect(),
            objective_offset: conv(&self.objective_offset),
            lower: self.lower.iter().map(conv_opt).collect(),
            upper: self.upper.iter().map(conv_opt).collect(),
            col_flags: self.col_flags.clone(),
            lhs: self.lhs.iter().map(conv_opt).collect(),
            rhs: self.rhs.iter().map(conv_opt).collect(),
            row_flags: self.row_flags.clone(),
            matrix: SparseMatrix::from_triplets(self.nrows(), self.ncols(), triplets),
            col_names: self.col_names.clone(),
            row_names: self.row_names.clone(),
        }
    }
}

/// Incremental construction of a [`Problem`].
#[derive(Clone, Debug)]
pub struct ProblemBuilder<R> {
    name: String,
    objective: Vec<R>,
    offset: R,
    lower: Vec<Option<R>>,
    upper: Vec<Option<R>>,
    integral: Vec<bool>,
    col_names: Vec<String>,
    lhs: Vec<Option<R>>,
    rhs: Vec<Option<R>>,
    row_names: Vec<String>,
    triplets: Vec<(usize, usize, R)>,
}

impl<R: Real> Default for ProblemBuilder<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> ProblemBuilder<R> {
    pub fn new() -> Self {
        ProblemBuilder {
            name: String::new(),
            objective: Vec::new(),
            offset: R::zero(),
            lower: Vec::new(),
            upper: Vec::new(),
            integral: Vec::new(),
            col_names: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            row_names: Vec::new(),
            triplets: Vec::new(),
        }
    }

    pub fn name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn set_offset(&mut self, offset: R) {
        self.offset = offset;
    }

    pub fn add_col(
        &mut self,
        name: &str,
        cost: R,
        lower: Option<R>,
        upper: Option<R>,
        integral: bool,
    ) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integral.push(integral);
        self.col_names.push(name.to_string());
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, name: &str, entries: &[(usize, R)], lhs: Option<R>, rhs: Option<R>) -> usize {
        let row = self.lhs.len();
        for (col, value) in entries {
            self.triplets.push((row, *col, value.clone()));
        }
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self.row_names.push(name.to_string());
        row
    }

    pub fn col_mut(&mut self, col: usize) -> (&mut R, &mut Option<R>, &mut Option<R>, &mut bool) {
        (
            &mut self.objective[col],
            &mut self.lower[col],
            &mut self.upper[col],
            &mut self.integral[col],
        )
    }

    pub fn ncols(&self) -> usize {
        self.objective.len()
    }

    pub fn nrows(&self) -> usize {
        self.lhs.len()
    }

    pub fn push_entry(&mut self, row: usize, col: usize, value: R) {
        self.triplets.push((row, col, value));
    }

    pub fn set_row_sides(&mut self, row: usize, lhs: Option<R>, rhs: Option<R>) {
        self.lhs[row] = lhs;
        self.rhs[row] = rhs;
    }

    pub fn row_sides(&self, row: usize) -> (Option<&R>, Option<&R>) {
        (self.lhs[row].as_ref(), self.rhs[row].as_ref())
    }

    pub fn build(self) -> Problem<R> {
        let n = self.objective.len();
        let m = self.lhs.len();
        let row_flags = self
            .lhs
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| side_flags(l, r))
            .collect();
        let col_flags = self
            .integral
            .iter()
            .map(|&i| if i { ColFlags::INTEGRAL } else { ColFlags::empty() })
            .collect();
        Problem {
            name: self.name,
            objective: self.objective,
            objective_offset: self.offset,
            lower: self.lower,
            upper: self.upper,
            col_flags,
            lhs: self.lhs,
            rhs: self.rhs,
            row_flags,
            matrix: SparseMatrix::from_triplets(m, n, self.triplets),
            col_names: self.col_names,
            row_names: self.row_names,
        }
    }
}
