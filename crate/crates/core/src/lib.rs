//! Unique sink orientations of grids.
//!
//! The crate models grids, outmaps and the Grid-USO answer types, provides
//! brute-force oracles and instance generators ([`lab`]), a recursive
//! line-following sink finder ([`findsink`]), Unique Forward EOPL semantics
//! ([`eopl`]) and a reduction from Grid-USO to Unique Forward EOPL together
//! with the map from EOPL answers back to Grid-USO certificates
//! ([`reduction`]).
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bits;
pub mod certificate;
pub mod dirset;
pub mod eopl;
pub mod findsink;
pub mod frame;
pub mod grid;
pub mod lab;
pub mod outmap;
pub mod reduction;

pub use certificate::{refined_index, verify_certificate, Certificate, RefinedIndex};
pub use dirset::DirSet;
pub use grid::{Grid, GridError, Point, Subgrid};
pub use outmap::{induced_outmap, InducedOutmap, OrientationTable, Outmap};
