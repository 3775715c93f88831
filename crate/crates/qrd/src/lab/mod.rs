//! Experiment harness: file formats, configs, verification suites and the
//! mapping from library errors to process exit codes.

pub mod config;
pub mod io;
pub mod verify;

pub use config::{Digest, ExperimentConfig, ResultRecord};
pub use verify::{run_suite, Suite, SuiteReport};

use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NOT_WHITELISTED: i32 = 4;

/// Malformed or non-physical input exits with 2, parameter-domain errors with 3.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Malformed(_)
        | Error::NotHermitian(_)
        | Error::NotPsd(_)
        | Error::DimMismatch(..)
        | Error::ZeroOperator => EXIT_MALFORMED,
        Error::KindNotWhitelisted(_) => EXIT_NOT_WHITELISTED,
        Error::BadAlpha(_)
        | Error::BadParams(_)
        | Error::SingularSigma
        | Error::GenericityUndetermined(_)
        | Error::GenericityFails(_)
        | Error::NoConvexWitness
        | Error::DimTooLarge(_)
        | Error::SupportViolation => EXIT_DOMAIN,
    }
}
