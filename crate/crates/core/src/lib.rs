//! Multiregional environmentally-extended input-output (EE-MRIO) engine.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the numerical
//! pipeline end to end:
//!
//! * [`index`]: region and sector taxonomies and the region-major flat layout
//!   shared by every vector and matrix.
//! * [`mrio`]: Model D transformation of supply/use tables into a direct
//!   requirements matrix, the Leontief inverse, and impact evaluation.
//! * [`satellite`]: regionalized GHG satellite accounts, emissions factors and
//!   emissions impacts.
//! * [`wind_cost`]: a parametric offshore wind balance-of-system cost surrogate
//!   and the mapping of its cost categories onto final-demand shocks.
//! * [`payback`]: economic, carbon and social-cost-adjusted payback periods.
//! * [`scenario`]: per-project evaluation over a shared factorized model.
//!
//! File formats, configuration and the command line live in the `eemrio`
//! companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod accounts;
pub mod index;
pub mod linalg;
pub mod mrio;
pub mod payback;
pub mod satellite;
pub mod scenario;
pub mod wind_cost;

pub use index::{Region, RegionSectorIndex, Sector, SectorCode};
