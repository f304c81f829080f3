//! Reduction techniques. Each presolver reads a [`PresolveView`] and returns
//! transactions; none of them can mutate the problem.

use std::fmt;

use crate::error::Verdict;
use crate::model::{Locks, Problem, RowActivity};
use crate::numerics::{NumericContext, Real};
use crate::transaction::Transaction;

mod coefftightening;
mod colsingleton;
mod domcol;
mod doubletoneq;
mod dualfix;
mod dualinfer;
mod fixcontinuous;
mod implint;
mod parallelcols;
mod parallelrows;
mod probing;
mod propagation;
mod simpleprobing;
mod simplifyineq;
mod sparsify;
mod stuffing;
mod substitution;
mod trivial;

pub use coefftightening::{run_coefftightening, tighten_row, TightenedRow};
pub use colsingleton::run_colsingleton;
pub use domcol::run_domcol;
pub use doubletoneq::run_doubletoneq;
pub use dualfix::run_dualfix;
pub use dualinfer::run_dualinfer;
pub use fixcontinuous::run_fixcontinuous;
pub use implint::run_implint;
pub use parallelcols::run_parallelcols;
pub use parallelrows::run_parallelrows;
pub use probing::{run_probing, ProbeOutcome, ProbingScratch};
pub use propagation::run_propagation;
pub use simpleprobing::run_simpleprobing;
pub use simplifyineq::run_simplifyineq;
pub use sparsify::run_sparsify;
pub use stuffing::run_stuffing;
pub use substitution::run_substitution;
pub use trivial::run_trivial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Fast,
    Medium,
    Exhaustive,
}

impl Tier {
    pub fn name(self) -> &'static str {
        match self {
            Tier::Fast => "FAST",
            Tier::Medium => "MEDIUM",
            Tier::Exhaustive => "EXHAUSTIVE",
        }
    }

    pub fn next(self) -> Option<Tier> {
        match self {
            Tier::Fast => Some(Tier::Medium),
            Tier::Medium => Some(Tier::Exhaustive),
            Tier::Exhaustive => None,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PresolverDescriptor {
    pub name: &'static str,
    pub tier: Tier,
    pub delayed: bool,
    /// Position in the global apply order.
    pub apply_order: usize,
    pub internal_parallel: bool,
}

/// Read-only input of a presolver call.
pub struct PresolveView<'a, R> {
    pub problem: &'a Problem<R>,
    pub activities: &'a [RowActivity<R>],
    pub locks: &'a [Locks],
    pub ctx: &'a NumericContext<R>,
    /// Rows and columns changed since the presolver's previous call
    /// (everything on the first call). Only fast presolvers look at them.
    pub changed_rows: &'a [usize],
    pub changed_cols: &'a [usize],
    /// Whether the presolver may split its own work across threads.
    pub parallel: bool,
}

impl<'a, R: Real> PresolveView<'a, R> {
    /// View on every row and column, without internal parallelism.
    pub fn full(
        problem: &'a Problem<R>,
        activities: &'a [RowActivity<R>],
        locks: &'a [Locks],
        ctx: &'a NumericContext<R>,
        all_rows: &'a [usize],
        all_cols: &'a [usize],
    ) -> Self {
        PresolveView {
            problem,
            activities,
            locks,
            ctx,
            changed_rows: all_rows,
            changed_cols: all_cols,
            parallel: false,
        }
    }

    /// Finite bound of column `col` giving the largest value of `coef * x`.
    pub fn max_bound(&self, col: usize, coef: &R) -> Option<&R> {
        if coef.is_positive() {
            self.problem.upper[col].as_ref()
        } else {
            self.problem.lower[col].as_ref()
        }
    }

    pub fn min_bound(&self, col: usize, coef: &R) -> Option<&R> {
        if coef.is_positive() {
            self.problem.lower[col].as_ref()
        } else {
            self.problem.upper[col].as_ref()
        }
    }

    pub fn min_without(&self, row: usize, col: usize, coef: &R) -> Option<R> {
        self.activities[row].min_without(coef, self.problem.lower[col].as_ref(), self.problem.upper[col].as_ref())
    }

    pub fn max_without(&self, row: usize, col: usize, coef: &R) -> Option<R> {
        self.activities[row].max_without(coef, self.problem.lower[col].as_ref(), self.problem.upper[col].as_ref())
    }

    /// Whether every column of the row and every coefficient is integral.
    pub fn row_is_integral(&self, row: usize) -> bool {
        self.problem
            .matrix
            .row(row)
            .iter()
            .all(|e| self.problem.is_integral(e.index) && e.value.to_i64_exact().is_some())
    }
}

pub type PresolverOutput<R> = Result<Vec<Transaction<R>>, Verdict>;
pub type RunFn<R> = fn(&PresolveView<R>) -> PresolverOutput<R>;

pub struct Presolver<R> {
    pub descriptor: PresolverDescriptor,
    pub run: RunFn<R>,
}

impl<R> Clone for Presolver<R> {
    fn clone(&self) -> Self {
        Presolver {
            descriptor: self.descriptor,
            run: self.run,
        }
    }
}

const fn desc(name: &'static str, tier: Tier, apply_order: usize, internal_parallel: bool) -> PresolverDescriptor {
    PresolverDescriptor {
        name,
        tier,
        delayed: false,
        apply_order,
        internal_parallel,
    }
}

/// The presolvers in apply order.
pub const DESCRIPTORS: [PresolverDescriptor; 17] = [
    desc("colsingleton", Tier::Fast, 0, false),
    desc("coefftightening", Tier::Fast, 1, false),
    desc("propagation", Tier::Fast, 2, false),
    desc("simpleprobing", Tier::Medium, 3, false),
    desc("parallelrows", Tier::Medium, 4, false),
    desc("parallelcols", Tier::Medium, 5, false),
    desc("stuffing", Tier::Medium, 6, false),
    desc("dualfix", Tier::Medium, 7, false),
    desc("fixcontinuous", Tier::Medium, 8, false),
    desc("simplifyineq", Tier::Medium, 9, false),
    desc("doubletoneq", Tier::Medium, 10, false),
    desc("implint", Tier::Exhaustive, 11, false),
    desc("domcol", Tier::Exhaustive, 12, true),
    desc("dualinfer", Tier::Exhaustive, 13, false),
    desc("probing", Tier::Exhaustive, 14, true),
    desc("substitution", Tier::Exhaustive, 15, false),
    PresolverDescriptor {
        name: "sparsify",
        tier: Tier::Exhaustive,
        delayed: true,
        apply_order: 16,
        internal_parallel: true,
    },
];

pub fn registry<R: Real>() -> Vec<Presolver<R>> {
    let runs: [RunFn<R>; 17] = [
        run_colsingleton,
        run_coefftightening,
        run_propagation,
        run_simpleprobing,
        run_parallelrows,
        run_parallelcols,
        run_stuffing,
        run_dualfix,
        run_fixcontinuous,
        run_simplifyineq,
        run_doubletoneq,
        run_implint,
        run_domcol,
        run_dualinfer,
        run_probing,
        run_substitution,
        run_sparsify,
    ];
    DESCRIPTORS
        .iter()
        .zip(runs)
        .map(|(d, run)| Presolver { descriptor: *d, run })
        .collect()
}

pub fn presolver_names() -> impl Iterator<Item = &'static str> {
    DESCRIPTORS.iter().map(|d| d.name)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::model::{compute_activities, compute_locks};

    /// Owns everything a view borrows.
    pub struct Fixture<R> {
        pub problem: Problem<R>,
        pub activities: Vec<RowActivity<R>>,
        pub locks: Vec<Locks>,
        pub ctx: NumericContext<R>,
        pub rows: Vec<usize>,
        pub cols: Vec<usize>,
    }

    impl<R: Real> Fixture<R> {
        pub fn new(problem: Problem<R>) -> Self {
            Fixture {
                activities: compute_activities(&problem),
                locks: compute_locks(&problem),
                ctx: NumericContext::default(),
                rows: problem.active_rows().collect(),
                cols: problem.active_cols().collect(),
                problem,
            }
        }

        pub fn view(&self) -> PresolveView<'_, R> {
            PresolveView::full(&self.problem, &self.activities, &self.locks, &self.ctx, &self.rows, &self.cols)
        }

        pub fn run(&self, f: RunFn<R>) -> PresolverOutput<R> {
            f(&self.view())
        }
    }

    #[test]
    fn registry_order_matches_descriptors() {
        let reg = registry::<f64>();
        assert_eq!(reg.len(), 17);
        for (i, p) in reg.iter().enumerate() {
            assert_eq!(p.descriptor.apply_order, i);
        }
        let delayed: Vec<_> = DESCRIPTORS.iter().filter(|d| d.delayed).map(|d| d.name).collect();
        assert_eq!(delayed, vec!["sparsify"]);
        assert!(DESCRIPTORS.windows(2).all(|w| w[0].tier <= w[1].tier));
    }
}
