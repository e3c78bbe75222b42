//! Boundary chains and cyclic pair integrals on self-similar planar sets.
//!
//! A structure is a convex polygon together with contracting similitudes
//! whose images tile it up to interior-disjoint overlap and cover its
//! boundary. Refining the tiling level by level yields oriented boundary
//! chains; the part not on the outer boundary traces the holes, and pair
//! integrals of Hoelder functions over those inner chains converge
//! geometrically to a limit this crate extrapolates, bounds, and
//! cross-checks against a direct line-integral oracle.
//!
//! All floating-point reductions that feed reported values go through an
//! exactly rounded accumulator, so results are independent of enumeration
//! order and of the `parallel` feature.

pub mod chain;
pub mod cochain;
pub mod exact;
pub mod expr;
pub mod geom;
mod par;
pub mod presets;
pub mod structure;
pub mod young;
