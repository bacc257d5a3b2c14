//! Library half of the `cfregions` command-line tool: spec-file parsing
//! and the command implementations, kept separate from the binary so the
//! integration and acceptance suites can drive them directly.

pub mod commands;
pub mod specfile;
