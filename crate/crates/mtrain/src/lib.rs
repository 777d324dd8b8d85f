//! Filesystem, HTTP and command-line front end for the maintenance-training
//! engines in `mtrain-core`.

pub mod cli;
pub mod package;
pub mod report;
pub mod service;
pub mod simulate;
