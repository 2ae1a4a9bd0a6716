//! Seeded experiment generators and batch execution, cross-checked against
//! an independent Gauss–Newton solver.

pub mod bench;
pub mod experiments;
pub mod oracle;

pub use bench::{run_experiment, BenchRow, BenchRun, MethodSummary, CSV_HEADER, METHOD_FRMPA, METHOD_ORACLE};
pub use experiments::{generate, trial_rng, ExperimentId, ExperimentSpec};
pub use oracle::{gauss_newton_oracle, OracleResult};
