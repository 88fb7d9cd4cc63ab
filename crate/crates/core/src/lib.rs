//! Turns game design documents into packaged Unity script templates.

pub mod analyze;
pub mod config;
pub mod digest;
pub mod eval;
pub mod generate;
pub mod ingest;
pub mod job;
pub mod package;
pub mod rubric;
pub mod spec;
pub mod validate;
