//! File formats, reports, benchmark and command-line front end for
//! [`corrfix_core`].

pub mod bench;
pub mod cli;
pub mod io;
pub mod report;
