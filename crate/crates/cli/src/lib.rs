//! Command implementations behind the `envelope` binary.

pub mod alloc;
pub mod commands;

use envelope_core::{Error, ErrorKind};

pub use commands::*;

/// Process exit code for an error category.
pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Ingestion => 3,
        ErrorKind::Degenerate => 4,
    }
}
