//! Exact computation in finite-rank symmetric inverse semigroups and related
//! finite semigroups: enumeration with a uniform multiplication oracle, ideal
//! series with finite unstability certificates, products and pullbacks of
//! series, block-respecting partial function semigroups, Green's relations
//! with constructive D-class factorization, and symbolic verification of
//! neighborhood-base constructions over truncated countable carriers.
//!
//! Throughout, composition is `a·b : x ↦ a(b(x))`: the right factor acts
//! first. All computations are exact and deterministic; with the default
//! `parallel` feature the heavy sweeps fan out over rayon without changing
//! any result.

pub mod green;
pub mod ideal;
mod par;
pub mod pinj;
pub mod product;
pub mod pt;
pub mod semigroup;
pub mod topology;

pub use pinj::{PartialInjection, Point, PointSet};
pub use semigroup::{ElementSet, Semigroup};
