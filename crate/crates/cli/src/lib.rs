//! Command line front end: instance generation, solving, validation, exact
//! and MILP export, benchmark batches, next-month evaluation and maps.

pub mod bench;
mod commands;
pub mod next_month;
pub mod render;

pub use commands::{
    cmd_bench, cmd_exact, cmd_export_milp, cmd_generate, cmd_next_month, cmd_render, cmd_solve, cmd_validate,
    execute, parse_budget, read_config, read_instance, read_shared, read_solution, run, write_atomic, BenchArgs, Cli,
    CliError, Command, GenKind, GenerateArgs, SolverArgs,
};
