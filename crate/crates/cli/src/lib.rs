//! Library surface of the command-line tool: experiment configs, runners,
//! box statistics and the SVG plot writer. The `raretail` binary is a
//! thin wrapper over these.

pub mod boxstats;
pub mod config;
pub mod plot;
pub mod runner;
