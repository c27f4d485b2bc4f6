//! Command line tool and HTTP service around `sashimi-core`.

pub mod artifacts;
pub mod cli;
pub mod jobs;
pub mod service;
