//! Closed forms for the doubly symmetric binary source.
//!
//! `DSBS(a)` puts mass `a/2` on each agreeing cell and `(1-a)/2` on each
//! disagreeing cell. Every example uses `p(u|x) = BSC(alpha)` with `V` and
//! `W` degenerate:
//!
//! - key distribution (`Z = X`, inner region 2)
//! - `D1`: `p(z|y) = BSC(d)`, inner region 1, feasible when `a ⋆ d <= D`
//! - `D2`: `p(z|x) = BSC(d)`, inner region 2, feasible when `d <= D`
//!
//! The `*_factorization` functions build the explicit kernels, so every
//! closed form can be checked against the generic corner evaluators.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::finite_prob::{binary_entropy, star, Alphabet, JointPmf, Kernel, ProbError};
use crate::rate_region::vars::{U, V, W, X, Y, Z};
use crate::rate_region::{
    inner_corner_r1, inner_corner_r2, AuxFactorization, CloudPoint, RateTriple, RegionCloud,
    RegionError, Scheme,
};

/// Slack on distortion comparisons, so grid points that land on `D` up to
/// rounding count as feasible.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsbsError {
    #[error("{name} = {value} is outside [0, 1/2]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

pub type Result<T> = std::result::Result<T, DsbsError>;

/// Parameters of one example instance. `distortion` is the budget `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsbsParams {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub distortion: f64,
}

impl DsbsParams {
    pub fn validate(&self) -> Result<()> {
        check("a", self.a)?;
        check("alpha", self.alpha)?;
        check("d", self.d)?;
        check("D", self.distortion)
    }
}

fn check(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=0.5).contains(&value) {
        Ok(())
    } else {
        Err(DsbsError::OutOfRange { name, value })
    }
}

fn hb(x: f64) -> f64 {
    binary_entropy(x).expect("argument in [0, 1]")
}

fn st(x: f64, y: f64) -> f64 {
    star(x, y).expect("arguments in [0, 1]")
}

/// The source `DSBS(a)` over `(X, Y)`.
pub fn dsbs(a: f64) -> Result<JointPmf> {
    check("a", a)?;
    Ok(JointPmf::doubly_symmetric(X, Y, a)?)
}

/// `(H_b(a⋆α) − H_b(α), 1 − H_b(α), H_b(α))`.
pub fn key_dist_corner(a: f64, alpha: f64) -> Result<RateTriple> {
    check("a", a)?;
    check("alpha", alpha)?;
    Ok(RateTriple::new(
        hb(st(a, alpha)) - hb(alpha),
        1.0 - hb(alpha),
        hb(alpha),
    )?)
}

/// For each `a`, the minimum of `r1 + r3` of the key-distribution corner
/// over `alpha_grid`.
pub fn encryptor_sum_rate_curve(a_grid: &[f64], alpha_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if a_grid.is_empty() {
        return Err(DsbsError::EmptyGrid("a"));
    }
    if alpha_grid.is_empty() {
        return Err(DsbsError::EmptyGrid("alpha"));
    }
    a_grid
        .iter()
        .map(|&a| {
            let mut best = f64::INFINITY;
            for &alpha in alpha_grid {
                let c = key_dist_corner(a, alpha)?;
                best = best.min(c.r1 + c.r3);
            }
            Ok((a, best))
        })
        .collect()
}

/// A closed-form corner and whether its distortion meets the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdCorner {
    pub rates: RateTriple,
    pub feasible: bool,
}

/// Corner of `D1`: `(H_b(a⋆α) − H_b(α), 1 − H_b(α) + H_b(α⋆a⋆d) − H_b(d), 0)`.
///
/// The second component is `I(X;U) + I(Y;Z|U)` evaluated exactly.
/// [`rd_d1_loose_bound`] gives the simpler `2 − H_b(α) − H_b(d)`, which
/// agrees only when `α⋆a⋆d = 1/2`.
pub fn rd_d1_corner(a: f64, alpha: f64, d: f64, distortion: f64) -> Result<RdCorner> {
    DsbsParams {
        a,
        alpha,
        d,
        distortion,
    }
    .validate()?;
    let rates = RateTriple::new(
        hb(st(a, alpha)) - hb(alpha),
        1.0 - hb(alpha) + hb(st(st(alpha, a), d)) - hb(d),
        0.0,
    )?;
    Ok(RdCorner {
        rates,
        feasible: st(a, d) <= distortion + FEASIBILITY_SLACK,
    })
}

/// `(H_b(a⋆α) − H_b(α), 2 − H_b(α) − H_b(d), 0)`, componentwise at least
/// the `D1` corner.
pub fn rd_d1_loose_bound(a: f64, alpha: f64, d: f64) -> Result<RateTriple> {
    check("a", a)?;
    check("alpha", alpha)?;
    check("d", d)?;
    Ok(RateTriple::new(
        hb(st(a, alpha)) - hb(alpha),
        2.0 - hb(alpha) - hb(d),
        0.0,
    )?)
}

/// Corner of `D2`: `(H_b(a⋆α) − H_b(α), 1 − H_b(α), H_b(α⋆d) − H_b(d))`.
pub fn rd_d2_corner(a: f64, alpha: f64, d: f64, distortion: f64) -> Result<RdCorner> {
    DsbsParams {
        a,
        alpha,
        d,
        distortion,
    }
    .validate()?;
    let rates = RateTriple::new(
        hb(st(a, alpha)) - hb(alpha),
        1.0 - hb(alpha),
        hb(st(alpha, d)) - hb(d),
    )?;
    Ok(RdCorner {
        rates,
        feasible: d <= distortion + FEASIBILITY_SLACK,
    })
}

fn bsc_from(inputs: Vec<Alphabet>, source: &str, crossover: f64) -> Result<Kernel> {
    let pos = inputs
        .iter()
        .position(|a| a.name() == source)
        .expect("source is an input");
    Ok(Kernel::from_fn(inputs, Alphabet::binary(Z), |t, o| {
        if t[pos] == o {
            1.0 - crossover
        } else {
            crossover
        }
    })?)
}

fn kernels_with_z(scheme: Scheme, alpha: f64, z: Kernel) -> Result<AuxFactorization> {
    let x = Alphabet::binary(X);
    let y = Alphabet::binary(Y);
    let u = Alphabet::binary(U);
    let v = Alphabet::singleton(V);
    let w = Alphabet::singleton(W);
    let w_parent = if scheme == Scheme::R1 { x.clone() } else { y };
    Ok(AuxFactorization::new(
        scheme,
        vec![
            Kernel::bsc(&x, &u, alpha)?,
            Kernel::uniform(vec![u.clone(), x], v)?,
            Kernel::uniform(vec![u, w_parent], w)?,
            z,
        ],
    )?)
}

fn r1_z_inputs() -> Vec<Alphabet> {
    vec![
        Alphabet::binary(Y),
        Alphabet::binary(U),
        Alphabet::singleton(V),
        Alphabet::singleton(W),
    ]
}

fn r2_z_inputs() -> Vec<Alphabet> {
    vec![
        Alphabet::binary(X),
        Alphabet::binary(U),
        Alphabet::singleton(W),
    ]
}

/// Kernels of the key-distribution instance.
pub fn key_dist_factorization(alpha: f64) -> Result<AuxFactorization> {
    check("alpha", alpha)?;
    kernels_with_z(Scheme::R2, alpha, bsc_from(r2_z_inputs(), X, 0.0)?)
}

/// Kernels of the `D1` instance.
pub fn rd_d1_factorization(alpha: f64, d: f64) -> Result<AuxFactorization> {
    check("alpha", alpha)?;
    check("d", d)?;
    kernels_with_z(Scheme::R1, alpha, bsc_from(r1_z_inputs(), Y, d)?)
}

/// Kernels of the `D2` instance.
pub fn rd_d2_factorization(alpha: f64, d: f64) -> Result<AuxFactorization> {
    check("alpha", alpha)?;
    check("d", d)?;
    kernels_with_z(Scheme::R2, alpha, bsc_from(r2_z_inputs(), X, d)?)
}

/// One evaluated rate-distortion grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdRow {
    pub scheme: Scheme,
    pub rates: RateTriple,
    pub alpha: f64,
    pub d: f64,
    pub feasible: bool,
}

/// All `D1` and `D2` grid points, feasible or not, `D1` first, then by
/// `alpha` and `d` in grid order.
pub fn rd_rows(a: f64, distortion: f64, alpha_grid: &[f64], d_grid: &[f64]) -> Result<Vec<RdRow>> {
    if alpha_grid.is_empty() {
        return Err(DsbsError::EmptyGrid("alpha"));
    }
    if d_grid.is_empty() {
        return Err(DsbsError::EmptyGrid("d"));
    }
    let mut rows = Vec::with_capacity(2 * alpha_grid.len() * d_grid.len());
    for scheme in [Scheme::R1, Scheme::R2] {
        for &alpha in alpha_grid {
            for &d in d_grid {
                let c = match scheme {
                    Scheme::R1 => rd_d1_corner(a, alpha, d, distortion)?,
                    _ => rd_d2_corner(a, alpha, d, distortion)?,
                };
                rows.push(RdRow {
                    scheme,
                    rates: c.rates,
                    alpha,
                    d,
                    feasible: c.feasible,
                });
            }
        }
    }
    Ok(rows)
}

/// Union cloud of every feasible `D1` and `D2` corner, each carrying the
/// BSC kernels that realize it.
pub fn rd_region(a: f64, distortion: f64, alpha_grid: &[f64], d_grid: &[f64]) -> Result<RegionCloud> {
    let rows = rd_rows(a, distortion, alpha_grid, d_grid)?;
    let points = rows
        .iter()
        .filter(|r| r.feasible)
        .map(|r| {
            let provenance = match r.scheme {
                Scheme::R1 => rd_d1_factorization(r.alpha, r.d)?,
                _ => rd_d2_factorization(r.alpha, r.d)?,
            };
            Ok(CloudPoint {
                rates: r.rates,
                provenance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionCloud::from_points(points))
}

/// `points` evenly spaced values covering `[0, 1/2]`.
pub fn default_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| 0.5 * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// CSV with header `a,sum_rate`.
pub fn sum_rate_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("a,sum_rate\n");
    for (a, s) in curve {
        writeln!(out, "{a},{s}").expect("writing to a string");
    }
    out
}

/// CSV with header `scheme,r1,r2,r3,alpha,d,feasible`.
pub fn rd_csv(rows: &[RdRow]) -> String {
    let mut out = String::from("scheme,r1,r2,r3,alpha,d,feasible\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme, r.rates.r1, r.rates.r2, r.rates.r3, r.alpha, r.d, r.feasible
        )
        .expect("writing to a string");
    }
    out
}

/// Agreement tolerance between closed forms and the generic evaluators.
pub const CONSISTENCY_TOL: f64 = 1e-10;

/// Outcome of comparing one closed form with the generic evaluator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyCheck {
    pub name: &'static str,
    pub points: usize,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn compare<F>(name: &'static str, tuples: Vec<Vec<f64>>, f: F) -> Result<ConsistencyCheck>
where
    F: Fn(&[f64]) -> Result<(RateTriple, RateTriple)> + Sync,
{
    let errors = tuples
        .par_iter()
        .map(|t| f(t).map(|(a, b)| a.max_abs_diff(&b)))
        .collect::<Result<Vec<f64>>>()?;
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(ConsistencyCheck {
        name,
        points: tuples.len(),
        max_abs_error,
        tolerance: CONSISTENCY_TOL,
        passed: max_abs_error <= CONSISTENCY_TOL,
    })
}

/// Compares every closed-form corner with the generic corner evaluator on
/// the composed six-variable joint, over `grid` in each parameter.
pub fn consistency_suite(grid: &[f64]) -> Result<Vec<ConsistencyCheck>> {
    if grid.is_empty() {
        return Err(DsbsError::EmptyGrid("consistency"));
    }
    let pairs: Vec<Vec<f64>> = grid
        .iter()
        .flat_map(|&a| grid.iter().map(move |&alpha| vec![a, alpha]))
        .collect();
    let triples: Vec<Vec<f64>> = pairs
        .iter()
        .flat_map(|p| grid.iter().map(move |&d| vec![p[0], p[1], d]))
        .collect();
    Ok(vec![
        compare("key_distribution", pairs, |t| {
            let j = key_dist_factorization(t[1])?.compose(&dsbs(t[0])?)?;
            Ok((key_dist_corner(t[0], t[1])?, inner_corner_r2(&j)?))
        })?,
        compare("rate_distortion_d1", triples.clone(), |t| {
            let j = rd_d1_factorization(t[1], t[2])?.compose(&dsbs(t[0])?)?;
            Ok((rd_d1_corner(t[0], t[1], t[2], 0.5)?.rates, inner_corner_r1(&j)?))
        })?,
        compare("rate_distortion_d2", triples, |t| {
            let j = rd_d2_factorization(t[1], t[2])?.compose(&dsbs(t[0])?)?;
            Ok((rd_d2_corner(t[0], t[1], t[2], 0.5)?.rates, inner_corner_r2(&j)?))
        })?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: RateTriple, b: RateTriple, tol: f64) -> bool {
        a.max_abs_diff(&b) <= tol
    }

    #[test]
    fn source_examples() {
        let p = dsbs(0.0).unwrap();
        assert_eq!(p.prob(&[0, 1]), 0.5);
        assert_eq!(p.prob(&[0, 0]), 0.0);
        let p = dsbs(0.5).unwrap();
        assert!((p.mutual_information(&[X], &[Y], &[]).unwrap()).abs() < 1e-15);
        let p = dsbs(0.4).unwrap();
        let i = p.mutual_information(&[X], &[Y], &[]).unwrap();
        assert!((i - 0.0290494055).abs() < 1e-9);
        assert!(matches!(dsbs(0.7), Err(DsbsError::OutOfRange { .. })));
    }

    #[test]
    fn key_distribution_examples() {
        for alpha in [0.0, 0.1, 0.37, 0.5] {
            assert!(key_dist_corner(0.0, alpha).unwrap().r1.abs() < 1e-15);
            let c = key_dist_corner(0.5, alpha).unwrap();
            assert!((c.r1 - (1.0 - hb(alpha))).abs() < 1e-15);
        }
        assert!(close(
            key_dist_corner(0.3, 0.5).unwrap(),
            RateTriple::new(0.0, 0.0, 1.0).unwrap(),
            1e-15
        ));
        assert!(key_dist_corner(0.3, 0.6).is_err());
    }

    #[test]
    fn sum_rate_examples() {
        let grid = default_grid(101);
        let curve = encryptor_sum_rate_curve(&[0.0, 0.2, 0.5], &grid).unwrap();
        assert!(curve[0].1.abs() < 1e-15);
        assert!((curve[1].1 - 0.7219280949).abs() < 1e-9);
        assert!((curve[2].1 - 1.0).abs() < 1e-15);
        assert!(encryptor_sum_rate_curve(&[], &grid).is_err());
    }

    #[test]
    fn d1_examples() {
        let c = rd_d1_corner(0.2, 0.5, 0.5, 0.5).unwrap();
        assert!(close(c.rates, RateTriple::ZERO, 1e-15));
        assert!(c.feasible);
        assert!(!rd_d1_corner(0.2, 0.5, 0.5, 0.49).unwrap().feasible);

        let d = 0.08;
        let c = rd_d1_corner(0.0, 0.5, d, 0.1).unwrap();
        assert!(close(c.rates, RateTriple::new(0.0, 1.0 - hb(d), 0.0).unwrap(), 1e-15));
        assert!(c.feasible);
        assert!(!rd_d1_corner(0.0, 0.5, d, 0.05).unwrap().feasible);

        // a = 0.3, alpha = 0.1: a⋆alpha = 0.34 and a⋆d = 0.32 for d = 0.05.
        assert!((st(0.3, 0.1) - 0.34).abs() < 1e-15);
        assert!((st(0.3, 0.05) - 0.32).abs() < 1e-15);
        let c = rd_d1_corner(0.3, 0.1, 0.05, 0.32).unwrap();
        assert!((c.rates.r1 - (hb(0.34) - hb(0.1))).abs() < 1e-15);
        assert!(c.feasible);
        let loose = rd_d1_loose_bound(0.3, 0.1, 0.05).unwrap();
        assert!((loose.r2 - (2.0 - hb(0.1) - hb(0.05))).abs() < 1e-15);
        assert!(loose.dominates(&c.rates, 0.0));
    }

    #[test]
    fn d2_examples() {
        let d = 0.12;
        let c = rd_d2_corner(0.0, 0.5, d, 0.2).unwrap();
        assert!(close(c.rates, RateTriple::new(0.0, 0.0, 1.0 - hb(d)).unwrap(), 1e-15));
        assert!(c.feasible);
        for alpha in [0.0, 0.2, 0.5] {
            assert!(rd_d2_corner(0.3, alpha, 0.5, 0.5).unwrap().rates.r3.abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_generic_evaluators() {
        for &a in &[0.0, 0.13, 0.5] {
            let base = dsbs(a).unwrap();
            for &alpha in &[0.0, 0.21, 0.5] {
                let j = key_dist_factorization(alpha).unwrap().compose(&base).unwrap();
                assert!(close(
                    inner_corner_r2(&j).unwrap(),
                    key_dist_corner(a, alpha).unwrap(),
                    1e-10
                ));
                for &d in &[0.0, 0.07, 0.5] {
                    let j1 = rd_d1_factorization(alpha, d).unwrap().compose(&base).unwrap();
                    let j2 = rd_d2_factorization(alpha, d).unwrap().compose(&base).unwrap();
                    let c1 = rd_d1_corner(a, alpha, d, 0.5).unwrap();
                    let c2 = rd_d2_corner(a, alpha, d, 0.5).unwrap();
                    assert!(close(inner_corner_r1(&j1).unwrap(), c1.rates, 1e-10));
                    assert!(close(inner_corner_r2(&j2).unwrap(), c2.rates, 1e-10));
                }
            }
        }
    }

    #[test]
    fn consistency_suite_passes_on_a_coarse_grid() {
        let checks = consistency_suite(&default_grid(5)).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert_eq!(checks[1].points, 125);
    }

    #[test]
    fn region_examples() {
        let grid = default_grid(101);
        let cloud = rd_region(0.0, 0.1, &grid, &grid).unwrap();
        let t = 1.0 - hb(0.1);
        assert!(cloud.contains(&RateTriple::new(0.0, t, 0.0).unwrap(), 1e-9));
        assert!(cloud.contains(&RateTriple::new(0.0, 0.0, t).unwrap(), 1e-9));

        let cloud = rd_region(0.3, 0.5, &grid, &grid).unwrap();
        assert!(cloud.contains(&RateTriple::ZERO, 1e-12));

        let cloud = rd_region(0.5, 0.2, &grid, &grid).unwrap();
        assert!(!cloud.is_empty());
        assert!(cloud.points().iter().all(|p| p.scheme() == Scheme::R2));
        assert!(rd_region(0.5, 0.2, &[], &grid).is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = sum_rate_csv(&[(0.0, 0.0), (0.5, 1.0)]);
        assert_eq!(csv, "a,sum_rate\n0,0\n0.5,1\n");
        let rows = rd_rows(0.5, 0.2, &[0.5], &[0.5]).unwrap();
        let csv = rd_csv(&rows);
        assert!(csv.starts_with("scheme,r1,r2,r3,alpha,d,feasible\nSCHEME_R1,"));
        assert_eq!(csv.lines().count(), 3);
    }
}
