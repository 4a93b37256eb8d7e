//! File formats, configuration and the `ews` command-line driver around
//! [`ews_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod records;
pub mod report;
pub mod table;
