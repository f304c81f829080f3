pub mod activity;
pub mod matrix;
pub mod problem;
pub mod state;

pub use activity::{compute_activities, update_activity, BoundSide, RowActivity};
pub use matrix::{Entry, SparseMatrix};
pub use problem::{ColFlags, Problem, ProblemBuilder, RowFlags};
pub use state::{compact_problem, compute_locks, lock_contribution, ChangeCounters, Locks, ModificationFlags, ProblemState};
