pub mod error;
pub mod regress;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use report::{Report, Status};
pub use run::{run, RunOptions};
pub use scenario::Scenario;
