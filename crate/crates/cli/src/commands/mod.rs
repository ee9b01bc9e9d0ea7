pub mod solve;
pub mod sweep;
pub mod validate;

pub use solve::{cmd_solve, solve_point, Solution, Summary};
pub use sweep::{cmd_sweep, run_sweep, SweepRow};
pub use validate::{cmd_validate, run_checks, Check, Verdict};
