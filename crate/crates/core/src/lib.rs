//! Exact computation with truncated Hausdorff moment sequences and the
//! Pascal-triangle dimension group.
//!
//! Everything here is pure and allocation-based; there is no IO. Scalars are
//! exact rationals or [`Surd`]s (rational combinations of square roots), so
//! every verdict this crate reports is decided exactly, with floating point
//! nowhere in the pipeline.
//!
//! Module map:
//!
//! - [`arith`]: rationals, surds, dense subgroups of the reals, enclosures,
//!   rank over the rationals.
//! - [`moment`]: finite differences, truncated moment bodies, membership
//!   certificates and extension intervals.
//! - [`measure`]: measures on `[0, 1]` with exact moments, and an LP oracle
//!   ([`simplex`]) used to cross-check membership.
//! - [`perturb`]: moving a moment sequence into a dense subgroup while keeping
//!   every truncation strictly interior.
//! - [`pascal`]: the Pascal table `g(n, k)`, homomorphism reports, and trace
//!   rows.
//! - [`cantor`]: locally constant functions on the Cantor set and the
//!   finite-depth embedding certificate.

#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;

pub mod arith;
pub mod cantor;
mod error;
pub mod linalg;
pub mod measure;
pub mod moment;
pub mod pascal;
pub mod perturb;
pub mod simplex;

pub use arith::{Enclosure, Rational, Scalar, SubgroupDescriptor, Surd};
pub use error::Error;
pub use measure::Measure;
pub use moment::{InteriorCertificate, Membership, MomentVector};

pub type Result<T, E = Error> = core::result::Result<T, E>;
