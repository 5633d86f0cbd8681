//! Command-line front end, file formats and the scaling benchmark for
//! [`pglb_core`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod formats;
