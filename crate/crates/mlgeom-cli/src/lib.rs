//! Support code for the `mlgeom` command-line tool.

pub mod harness;
pub mod input;
