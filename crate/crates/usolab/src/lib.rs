//! Files, sweeps, DOT export and the command line for `griduso`.

pub mod cli;
pub mod dot;
pub mod formats;
pub mod guards;
pub mod sweep;
