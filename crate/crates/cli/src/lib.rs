//! Scenario files, command dispatch and report rendering for the `waysim`
//! command line tool.

pub mod commands;
pub mod report;
pub mod scenario;
