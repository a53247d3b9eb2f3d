//! Command-line front end for `panelbounds-core`: CSV panels in, JSON out.

pub mod args;
pub mod commands;
pub mod io;
