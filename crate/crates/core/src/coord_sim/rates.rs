use serde::{Deserialize, Serialize};

use super::{Result, SimError, SimScheme};
use crate::finite_prob::JointPmf;
use crate::rate_region::vars::{ALL, U, V, W, X, Y, Z};
use crate::rate_region::{check_factorization, RateTriple};

/// Rounding allowance when turning `2^{nR}` into an integer count, so exact
/// powers of two are not bumped up.
const COUNT_SLACK: f64 = 1e-9;

/// Above this many bits a count is far past any codebook budget and the
/// rate is kept unquantized.
const MAX_QUANTIZED_BITS: f64 = 62.0;

/// Codebook and bin counts, `⌈2^{n·rate}⌉`. Stored as floats because
/// infeasible configurations can exceed `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookSizes {
    pub u: f64,
    pub u_bins: f64,
    pub v: f64,
    pub v_bins: f64,
    pub w: f64,
    pub z: f64,
    pub z_bins: f64,
}

/// Per-codebook rates in bits per symbol.
///
/// Every rate is the `log2` of its integer count divided by `n`, so a
/// message made of these indices spends exactly `n` times its channel rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeRates {
    pub scheme: SimScheme,
    pub n: usize,
    pub r_u_tilde: f64,
    pub r_u: f64,
    pub r_v_tilde: f64,
    pub r_v: f64,
    pub r_w_tilde: f64,
    pub r_z_tilde: f64,
    pub r_z: f64,
    pub sizes: BookSizes,
}

impl CodeRates {
    /// `(R_U + R_V, R̃_U + R_Z, R̃_W)` for scheme 1 and
    /// `(R_U + R_V, R̃_U + R̃_W, R_Z)` for scheme 2.
    pub fn channel_rates(&self) -> RateTriple {
        let (r2, r3) = match self.scheme {
            SimScheme::One => (self.r_u_tilde + self.r_z, self.r_w_tilde),
            SimScheme::Two => (self.r_u_tilde + self.r_w_tilde, self.r_z),
        };
        RateTriple {
            r1: self.r_u + self.r_v,
            r2,
            r3,
        }
    }
}

fn count(n: usize, rate: f64) -> f64 {
    let bits = n as f64 * rate;
    if bits > MAX_QUANTIZED_BITS {
        return bits.exp2();
    }
    (bits.exp2() - COUNT_SLACK).ceil().max(1.0)
}

/// Rounds `rate` up to the next `log2(integer)/n` and returns it with the
/// integer.
fn quantize(n: usize, rate: f64) -> (f64, f64) {
    let c = count(n, rate);
    if n as f64 * rate > MAX_QUANTIZED_BITS {
        return (rate, c);
    }
    (c.log2() / n as f64, c)
}

/// Binned rate `R̃ − side + δ`, limited to `[0, R̃]`. At the upper limit the
/// bin index is the codeword index itself.
fn binned(n: usize, tilde: (f64, f64), side_information: f64, delta: f64) -> (f64, f64) {
    let (rate, c) = tilde;
    let raw = (rate - side_information + delta).clamp(0.0, rate);
    let (r, bins) = quantize(n, raw);
    if bins >= c {
        (rate, c)
    } else {
        (r, bins)
    }
}

fn tilde(n: usize, degenerate: bool, covering: f64, delta: f64) -> (f64, f64) {
    if degenerate {
        (0.0, 1.0)
    } else {
        quantize(n, covering + delta)
    }
}

/// Covering rates at their lower bounds plus `delta`, binned rates at the
/// smallest values meeting the packing bounds with the same margin.
///
/// An auxiliary that is constant given its parent codeword gets a single
/// codeword and rate 0.
pub fn derive_code_rates(
    joint6: &JointPmf,
    delta: f64,
    scheme: SimScheme,
    n: usize,
) -> Result<CodeRates> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(SimError::Delta(delta));
    }
    if n == 0 {
        return Err(SimError::BlockLength);
    }
    let j = joint6.reorder(&ALL)?;
    check_factorization(&j, scheme.region())?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| j.mutual_information(a, b, c);
    let flat = |a: &[&str], c: &[&str]| -> Result<bool> {
        Ok(j.conditional_entropy(a, c)? <= 1e-12)
    };

    let u_t = tilde(n, flat(&[U], &[])?, mi(&[U], &[X], &[])?, delta);
    let v_t = tilde(n, flat(&[V], &[U])?, mi(&[V], &[X], &[U])?, delta);
    let (w_cover, z_cover) = match scheme {
        SimScheme::One => (mi(&[W], &[X], &[U])?, mi(&[Z], &[V, Y], &[U])?),
        SimScheme::Two => (mi(&[W], &[V, Y], &[U])?, mi(&[Z], &[X], &[U])?),
    };
    let w_t = tilde(n, flat(&[W], &[U])?, w_cover, delta);
    let z_t = tilde(n, flat(&[Z], &[U])?, z_cover, delta);

    let i_uy = mi(&[U], &[Y], &[])?;
    let i_vy_u = mi(&[V], &[Y], &[U])?;
    let u_b = binned(n, u_t, i_uy, delta);
    let v_b = binned(n, v_t, i_vy_u, delta);
    let z_b = binned(n, z_t, mi(&[Z], &[W], &[U])?, delta);

    // Pairs sent unbinned need no decoding, so the joint bound only binds
    // on the positive binning slack.
    let slack = (u_t.0 - u_b.0) + (v_t.0 - v_b.0);
    let excess = slack - (mi(&[U, V], &[Y], &[])? - delta);
    if slack > 0.0 && excess > 1e-12 {
        return Err(SimError::Infeasible {
            constraint: "(R̃_U − R_U) + (R̃_V − R_V) ≤ I(U,V;Y) − δ",
            excess,
        });
    }

    Ok(CodeRates {
        scheme,
        n,
        r_u_tilde: u_t.0,
        r_u: u_b.0,
        r_v_tilde: v_t.0,
        r_v: v_b.0,
        r_w_tilde: w_t.0,
        r_z_tilde: z_t.0,
        r_z: z_b.0,
        sizes: BookSizes {
            u: u_t.1,
            u_bins: u_b.1,
            v: v_t.1,
            v_bins: v_b.1,
            w: w_t.1,
            z: z_t.1,
            z_bins: z_b.1,
        },
    })
}
