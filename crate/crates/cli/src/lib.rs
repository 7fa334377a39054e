//! Command-line workflows over `sasaki-core`: expression parsing, jobs,
//! JSON reports and plots.

pub mod args;
pub mod error;
pub mod expr;
pub mod job;
pub mod plot;
pub mod report;
pub mod run;

pub use error::CliError;
pub use expr::{parse_field_expression, Expr, ExprField};
pub use job::{CommandKind, JobSpec, Tolerances};
pub use report::{Report, Status};
pub use run::{run, Outcome};
