//! Exact reference tools for tiny instances: a brute-force optimizer and an
//! LP-format export of the full MILP for external solvers.

mod external;
mod milp;
mod oracle;

use thiserror::Error;

pub use self::external::{parse_value_file, run_external_solver, values_for};
pub use self::milp::{
    assignment_from_solution, emit_milp, Family, LinearProgram, MilpArtifacts, MilpOptions, Row, RowViolation, Sense,
    VarKey, Variable,
};
pub use self::oracle::{
    best_day_route, exact_solve, verify_against_oracle, ExactLimits, ExactOutcome, OracleVerdict,
    ORACLE_MAX_CUSTOMERS, ORACLE_MAX_DAYS,
};

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("instance too large for the oracle: {customers} customers, {days} days")]
    TooLarge { customers: usize, days: usize },
    #[error("oracle node cap reached")]
    NodeCap,
    #[error("the MILP needs the sum-of-square-roots compactness mode; the square root of a sum is not linear")]
    CompactnessMode,
    #[error("cannot map solution to the MILP: {0}")]
    Mapping(String),
    #[error("solution values, line {line}: {reason}")]
    ValueFile { line: usize, reason: String },
    #[error("external solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
