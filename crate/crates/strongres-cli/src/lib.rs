//! Problem-file parsing, command execution and artifact emission for the resolution engine.

pub mod doc;
pub mod problem;
pub mod run;

pub use problem::{parse_problem, ProblemError, ProblemFile};
pub use run::{execute, Command, Options, RunArtifacts};
