//! Empirical coordination in the triangular multiterminal network.
//!
//! Three terminals: `T_X` observes `X^n`, `T_Y` observes `Y^n`, and `T_Z`
//! must emit `Z^n` whose joint type with `(X^n, Y^n)` approaches a target
//! `p(x,y)p(z|x,y)`. Links are noiseless and rate limited: `C1: T_X -> T_Y`,
//! `C2: T_Y -> T_Z`, `C3: T_X -> T_Z`.
//!
//! - [`finite_prob`]: exact pmfs, kernels, types, total variation and
//!   information measures.
//! - [`rate_region`]: inner-bound and outer-bound corner points, the kernel
//!   search that instantiates them, and convex-hull membership.
//! - [`dsbs_examples`]: closed forms for the doubly symmetric binary source
//!   (key distribution and rate distortion).
//! - [`coord_sim`]: the two random-binning schemes run end to end at small
//!   block lengths.

pub mod coord_sim;
pub mod dsbs_examples;
pub mod finite_prob;
pub mod rate_region;
pub mod seed;
