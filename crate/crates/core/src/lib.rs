//! Transaction-based parallel presolving for mixed-integer and linear programs.

pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod parallel;
pub mod postsolve;
pub mod presolvers;
pub mod scheduler;
pub mod transaction;
