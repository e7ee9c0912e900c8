//! Case files, command runners and batch summaries behind the `limsup` binary.

pub mod batch;
pub mod cache;
pub mod run;
pub mod spec;
