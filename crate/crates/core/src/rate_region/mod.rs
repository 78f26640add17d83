//! Corner points of the inner and outer bounds, sampled region clouds, and
//! convex-hull membership.
//!
//! A corner is the componentwise-minimal rate triple `(R1, R2, R3)` for one
//! fixed six-variable distribution over `(X, Y, U, V, W, Z)`:
//!
//! | region  | R1           | R2                               | R3                      |
//! |---------|--------------|----------------------------------|-------------------------|
//! | inner 1 | I(X;U,V\|Y)  | I(X;U) + I(V,Y;Z\|U) - I(W;Z\|U) | I(X;W\|U)               |
//! | inner 2 | I(X;U,V\|Y)  | I(X;U) + I(V,Y;W\|U)             | I(X;Z\|U) - I(W;Z\|U)   |
//! | outer   | I(X;U,V\|Y)  | I(X,Y;U)                         | I(X;W\|U)               |
//!
//! Inner region 1 requires `p(x,y)p(u|x)p(v|u,x)p(w|u,x)p(z|y,u,v,w)`;
//! inner region 2 requires `p(x,y)p(u|x)p(v|u,x)p(w|u,y)p(z|x,u,w)`.

mod cloud;
mod factorization;
mod hull;
mod search;

pub use cloud::{CloudPoint, RegionCloud, DEDUP_TOL};
pub use factorization::{check_factorization, AuxFactorization, AuxSizes, Scheme};
pub use hull::dominates_convex_combination;
pub use search::{search_inner_bound, search_outer_bound, Sampler, MAX_GRID_PARAMETERS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_prob::{total_variation, JointPmf, ProbError};

/// Canonical variable names.
pub mod vars {
    pub const X: &str = "X";
    pub const Y: &str = "Y";
    pub const Z: &str = "Z";
    pub const U: &str = "U";
    pub const V: &str = "V";
    pub const W: &str = "W";
    /// Canonical order of a six-variable joint.
    pub const ALL: [&str; 6] = [X, Y, U, V, W, Z];
}
use vars::{U, V, W, X, Y, Z};

/// Components in `[-CLAMP_TOL, 0)` are rounding and clamp to 0.
pub const CLAMP_TOL: f64 = 1e-9;
/// Tolerance on conditional mutual informations that must vanish.
pub const MARKOV_TOL: f64 = 1e-9;
/// Tolerance (L1) on the `(X, Y, Z)` marginal matching a target.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("rate component {component} = {value} is negative")]
    NegativeRate { component: &'static str, value: f64 },
    #[error("distribution does not factorize per {scheme}: {statement} = {value}")]
    Factorization {
        scheme: Scheme,
        statement: &'static str,
        value: f64,
    },
    #[error("(X,Y,Z) marginal differs from the target by {0} in L1")]
    TargetMismatch(f64),
    #[error("kernel for `{output}` does not match the {scheme} signature")]
    Signature { scheme: Scheme, output: String },
    #[error("{scheme} grid has {free} free parameters (limit {limit}); use random sampling")]
    GridTooLarge {
        scheme: Scheme,
        free: usize,
        limit: usize,
    },
    #[error("grid step {0} must divide 1")]
    GridStep(f64),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("no sampled kernel met the coordination constraint (best residual {best_residual})")]
    EmptySearch { best_residual: f64 },
    #[error("invalid region record: {0}")]
    Record(String),
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// A rate triple in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTriple {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

fn clamp(component: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(RegionError::NegativeRate { component, value })
    }
}

impl RateTriple {
    /// Validates the components, clamping rounding-level negatives.
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        Ok(Self {
            r1: clamp("r1", r1)?,
            r2: clamp("r2", r2)?,
            r3: clamp("r3", r3)?,
        })
    }

    pub const ZERO: RateTriple = RateTriple {
        r1: 0.0,
        r2: 0.0,
        r3: 0.0,
    };

    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2 + self.r3
    }

    /// Componentwise `self >= other - tol`.
    pub fn dominates(&self, other: &RateTriple, tol: f64) -> bool {
        self.r1 + tol >= other.r1 && self.r2 + tol >= other.r2 && self.r3 + tol >= other.r3
    }

    pub fn max_abs_diff(&self, other: &RateTriple) -> f64 {
        (self.r1 - other.r1)
            .abs()
            .max((self.r2 - other.r2).abs())
            .max((self.r3 - other.r3).abs())
    }
}

/// Corner of inner region 1.
pub fn inner_corner_r1(joint6: &JointPmf) -> Result<RateTriple> {
    check_factorization(joint6, Scheme::R1)?;
    let r1 = joint6.mutual_information(&[X], &[U, V], &[Y])?;
    let r2 = joint6.mutual_information(&[X], &[U], &[])?
        + joint6.mutual_information(&[V, Y], &[Z], &[U])?
        - joint6.mutual_information(&[W], &[Z], &[U])?;
    let r3 = joint6.mutual_information(&[X], &[W], &[U])?;
    RateTriple::new(r1, r2, r3)
}

/// Corner of inner region 2.
pub fn inner_corner_r2(joint6: &JointPmf) -> Result<RateTriple> {
    check_factorization(joint6, Scheme::R2)?;
    let r1 = joint6.mutual_information(&[X], &[U, V], &[Y])?;
    let r2 = joint6.mutual_information(&[X], &[U], &[])?
        + joint6.mutual_information(&[V, Y], &[W], &[U])?;
    let r3 = joint6.mutual_information(&[X], &[Z], &[U])?
        - joint6.mutual_information(&[W], &[Z], &[U])?;
    RateTriple::new(r1, r2, r3)
}

/// Corner of the outer bound for a joint consistent with `target`.
///
/// No Markov structure is imposed on the auxiliaries.
pub fn outer_corner(joint6: &JointPmf, target: &JointPmf) -> Result<RateTriple> {
    check_target(joint6, target)?;
    let r1 = joint6.mutual_information(&[X], &[U, V], &[Y])?;
    let r2 = joint6.mutual_information(&[X, Y], &[U], &[])?;
    let r3 = joint6.mutual_information(&[X], &[W], &[U])?;
    RateTriple::new(r1, r2, r3)
}

/// Corner for the given scheme; `target` is only consulted for the outer
/// bound.
pub fn corner(scheme: Scheme, joint6: &JointPmf, target: &JointPmf) -> Result<RateTriple> {
    match scheme {
        Scheme::R1 => inner_corner_r1(joint6),
        Scheme::R2 => inner_corner_r2(joint6),
        Scheme::Outer => outer_corner(joint6, target),
    }
}

/// L1 distance between the `(X, Y, Z)` marginal of `joint6` and `target`.
pub fn target_residual(joint6: &JointPmf, target: &JointPmf) -> Result<f64> {
    let names = target.names();
    let marginal = joint6.marginalize(&names)?;
    Ok(total_variation(&marginal, target)?)
}

fn check_target(joint6: &JointPmf, target: &JointPmf) -> Result<()> {
    let residual = target_residual(joint6, target)?;
    if residual > MARGINAL_TOL {
        return Err(RegionError::TargetMismatch(residual));
    }
    Ok(())
}
