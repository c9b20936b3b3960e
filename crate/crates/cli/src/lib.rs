//! Command-line front end for `noether-core`: model files, subcommand
//! dispatch, text and JSON output, and exit codes.
//!
//! Exit codes: 0 success, 1 a verdict came out false (or no current exists),
//! 2 input or usage error, 3 the engine could not decide (internal invariant
//! violation, order bound, non-polynomial input to a homotopy, cancellation).

pub mod error;
pub mod model_file;
pub mod run;

pub use error::CliError;
pub use model_file::ModelFile;
pub use run::{run, Cli, Command, Format};
