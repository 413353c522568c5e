//! Batch driver for graded hp-DG ground-state convergence studies: the
//! configuration format, the study itself and the text formats it writes.

pub mod config;
pub mod formats;
pub mod study;

pub use config::{ConfigError, PotentialSign, StudyConfig};
pub use study::{run_study, write_outputs, StudyError, StudyOutcome};
