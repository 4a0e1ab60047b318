//! Experiment orchestration, reference oracles, decay fits and result files.

mod config;
mod experiment;
mod expr;
mod oracles;
mod verify;

pub use config::{
    default_beta_grid, CharacterPolicy, ExperimentConfig, ExperimentKind, ModulusGrid, NPolicy,
    OutputFormat, SmoothingPolicy,
};
pub use experiment::{
    fit_line, read_results_csv, real_character, report_path, run_burgess_experiment,
    run_experiment, run_expsum_experiment, run_pool, select_characters, write_results,
    DecadeMean, DecayFitReport, ExperimentOutput, LinearFit, PerModulus, ResultRow, TrendCheck,
};
pub use expr::parse_real;
pub use oracles::{brute_force_discrepancy, brute_force_membership, jacobi_symbol, MembershipTable};
pub use verify::{run_verify_suite, Check};
