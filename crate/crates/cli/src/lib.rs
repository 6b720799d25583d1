//! IO companion for `aerowrench-core`: JSON parameter and scenario
//! documents, CSV run logs, metrics rendering, and the CLI command layer.

pub mod commands;
pub mod csvlog;
pub mod params_doc;
pub mod report;
