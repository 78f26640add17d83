//! Sampling auxiliary kernels to populate region clouds.
//!
//! Each sample composes a full six-variable joint and is kept only if its
//! induced `p(z|x,y)` matches the target. Because `p(x,y)` is preserved by
//! construction, the `p(x,y)`-weighted row-wise L1 residual equals the L1
//! distance between the `(X, Y, Z)` marginals.

use rand::Rng;
use rayon::prelude::*;

use super::vars::{U, V, W, X, Y, Z};
use super::{
    corner, target_residual, AuxFactorization, AuxSizes, CloudPoint, RegionCloud, RegionError,
    Result, Scheme,
};
use crate::finite_prob::{Alphabet, JointPmf, Kernel};
use crate::seed;

/// Grid sampling is limited to factorizations with at most this many free
/// kernel parameters.
pub const MAX_GRID_PARAMETERS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    /// Every kernel row ranges over the simplex lattice with spacing `step`.
    Grid { step: f64 },
    /// `count` seeded draws per scheme from a mixture of kernel families.
    Random { count: usize, seed: u64 },
}

struct Template {
    output: Alphabet,
    inputs: Vec<Alphabet>,
}

impl Template {
    fn rows(&self) -> usize {
        self.inputs.iter().map(Alphabet::len).product()
    }
}

fn templates(scheme: Scheme, target: &JointPmf, sizes: AuxSizes) -> Result<Vec<Template>> {
    let alpha = |name: &str| -> Result<Alphabet> { Ok(target.alphabet(name)?.clone()) };
    let x = alpha(X)?;
    let y = alpha(Y)?;
    let z = alpha(Z)?;
    let u = Alphabet::indexed(U, sizes.u);
    let v = Alphabet::indexed(V, sizes.v);
    let w = Alphabet::indexed(W, sizes.w);
    let t = |output: &Alphabet, inputs: &[&Alphabet]| Template {
        output: output.clone(),
        inputs: inputs.iter().map(|a| (*a).clone()).collect(),
    };
    Ok(match scheme {
        Scheme::R1 => vec![
            t(&u, &[&x]),
            t(&v, &[&u, &x]),
            t(&w, &[&u, &x]),
            t(&z, &[&y, &u, &v, &w]),
        ],
        Scheme::R2 => vec![
            t(&u, &[&x]),
            t(&v, &[&u, &x]),
            t(&w, &[&u, &y]),
            t(&z, &[&x, &u, &w]),
        ],
        Scheme::Outer => vec![
            t(&u, &[&x, &y, &z]),
            t(&v, &[&x, &y, &z, &u]),
            t(&w, &[&x, &y, &z, &u, &v]),
        ],
    })
}

/// Draws one kernel from a mixture of structured families: flat-Dirichlet
/// rows, a random deterministic map, a noisy or exact copy of one input, a
/// constant, or an independent uniform output.
fn random_kernel<R: Rng>(rng: &mut R, t: &Template) -> Kernel {
    let k = t.output.len();
    let rows = t.rows();
    let family = rng.gen_range(0..6);
    let mut entries = vec![0.0; rows * k];
    let sizes: Vec<usize> = t.inputs.iter().map(Alphabet::len).collect();
    let copy_of = |rng: &mut R| {
        if t.inputs.is_empty() {
            None
        } else {
            Some(rng.gen_range(0..t.inputs.len()))
        }
    };
    // Symbol of input `j` for flat row index `r`.
    let input_symbol = |r: usize, j: usize| {
        let stride: usize = sizes[j + 1..].iter().product();
        (r / stride) % sizes[j]
    };
    match family {
        0 => {
            for row in entries.chunks_mut(k) {
                let mut total = 0.0;
                for e in row.iter_mut() {
                    *e = -(1.0 - rng.gen::<f64>()).ln();
                    total += *e;
                }
                row.iter_mut().for_each(|e| *e /= total);
            }
        }
        1 => {
            for row in entries.chunks_mut(k) {
                row[rng.gen_range(0..k)] = 1.0;
            }
        }
        2 | 3 => match copy_of(rng) {
            Some(j) => {
                let crossover = if family == 2 {
                    0.5 * rng.gen::<f64>()
                } else {
                    0.0
                };
                for (r, row) in entries.chunks_mut(k).enumerate() {
                    let s = input_symbol(r, j) % k;
                    if k == 1 {
                        row[0] = 1.0;
                        continue;
                    }
                    for (o, e) in row.iter_mut().enumerate() {
                        *e = if o == s {
                            1.0 - crossover
                        } else {
                            crossover / (k - 1) as f64
                        };
                    }
                }
            }
            None => entries.iter_mut().for_each(|e| *e = 1.0 / k as f64),
        },
        4 => {
            let s = rng.gen_range(0..k);
            for row in entries.chunks_mut(k) {
                row[s] = 1.0;
            }
        }
        _ => entries.iter_mut().for_each(|e| *e = 1.0 / k as f64),
    }
    // Exact re-normalization keeps rows within the kernel tolerance.
    for row in entries.chunks_mut(k) {
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|e| *e /= total);
    }
    let rows_vec: Vec<Vec<f64>> = entries.chunks(k).map(<[f64]>::to_vec).collect();
    Kernel::new(t.inputs.clone(), t.output.clone(), rows_vec).expect("sampled kernel is valid")
}

/// All points of the simplex in `k` dimensions with coordinates in
/// multiples of `1/parts`.
fn simplex_lattice(k: usize, parts: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(k - 1, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, parts, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|v| v.into_iter().map(|c| c as f64 / parts as f64).collect())
        .collect()
}

struct Grid {
    // Per kernel row: the list of admissible row vectors.
    row_options: Vec<Vec<Vec<f64>>>,
    // Number of rows contributed by each template.
    rows_per_template: Vec<usize>,
    total: u64,
}

fn grid_for(scheme: Scheme, ts: &[Template], step: f64) -> Result<Grid> {
    let parts = (1.0 / step).round();
    if !(step > 0.0 && step <= 1.0) || ((parts * step) - 1.0).abs() > 1e-9 {
        return Err(RegionError::GridStep(step));
    }
    let parts = parts as usize;
    let free: usize = ts.iter().map(|t| t.rows() * (t.output.len() - 1)).sum();
    if free > MAX_GRID_PARAMETERS {
        return Err(RegionError::GridTooLarge {
            scheme,
            free,
            limit: MAX_GRID_PARAMETERS,
        });
    }
    let mut row_options = Vec::new();
    let mut rows_per_template = Vec::new();
    for t in ts {
        let lattice = simplex_lattice(t.output.len(), parts);
        for _ in 0..t.rows() {
            row_options.push(lattice.clone());
        }
        rows_per_template.push(t.rows());
    }
    let total = row_options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .ok_or(RegionError::GridStep(step))?;
    Ok(Grid {
        row_options,
        rows_per_template,
        total,
    })
}

impl Grid {
    fn kernels(&self, ts: &[Template], mut index: u64) -> Vec<Kernel> {
        let mut chosen: Vec<&Vec<f64>> = Vec::with_capacity(self.row_options.len());
        for opts in self.row_options.iter().rev() {
            let n = opts.len() as u64;
            chosen.push(&opts[(index % n) as usize]);
            index /= n;
        }
        chosen.reverse();
        let mut it = chosen.into_iter();
        ts.iter()
            .zip(&self.rows_per_template)
            .map(|(t, &r)| {
                let rows: Vec<Vec<f64>> = it.by_ref().take(r).cloned().collect();
                Kernel::new(t.inputs.clone(), t.output.clone(), rows)
                    .expect("lattice rows are normalized")
            })
            .collect()
    }
}

struct Evaluated {
    residual: f64,
    point: Option<CloudPoint>,
}

fn evaluate(
    scheme: Scheme,
    kernels: Vec<Kernel>,
    base: &JointPmf,
    target: &JointPmf,
    tolerance: f64,
) -> Evaluated {
    let fact = match AuxFactorization::new(scheme, kernels) {
        Ok(f) => f,
        Err(_) => {
            return Evaluated {
                residual: f64::INFINITY,
                point: None,
            }
        }
    };
    let joint = match fact.compose(base) {
        Ok(j) => j,
        Err(_) => {
            return Evaluated {
                residual: f64::INFINITY,
                point: None,
            }
        }
    };
    let residual = target_residual(&joint, target).unwrap_or(f64::INFINITY);
    if residual > tolerance {
        return Evaluated {
            residual,
            point: None,
        };
    }
    // Distributions whose corner has a genuinely negative component are not
    // operating points of the scheme and are dropped.
    let point = corner(scheme, &joint, target).ok().map(|rates| CloudPoint {
        rates,
        provenance: fact,
    });
    Evaluated { residual, point }
}

struct Collected {
    points: Vec<CloudPoint>,
    best_residual: f64,
}

impl Collected {
    fn empty() -> Self {
        Self {
            points: Vec::new(),
            best_residual: f64::INFINITY,
        }
    }

    fn push(mut self, e: Evaluated) -> Self {
        self.best_residual = self.best_residual.min(e.residual);
        if let Some(p) = e.point {
            self.points.push(p);
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.best_residual = self.best_residual.min(other.best_residual);
        self.points.extend(other.points);
        self
    }
}

fn scheme_label(scheme: Scheme) -> u64 {
    match scheme {
        Scheme::R1 => seed::label::SEARCH_R1,
        Scheme::R2 => seed::label::SEARCH_R2,
        Scheme::Outer => seed::label::SEARCH_OUTER,
    }
}

fn run_scheme(
    scheme: Scheme,
    target: &JointPmf,
    base: &JointPmf,
    sizes: AuxSizes,
    sampler: Sampler,
    tolerance: f64,
) -> Result<Collected> {
    let ts = templates(scheme, target, sizes)?;
    let collected = match sampler {
        Sampler::Random { count, seed: s } => (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed::rng(s, scheme_label(scheme), i);
                let kernels: Vec<Kernel> = ts.iter().map(|t| random_kernel(&mut rng, t)).collect();
                evaluate(scheme, kernels, base, target, tolerance)
            })
            .fold(Collected::empty, Collected::push)
            .reduce(Collected::empty, Collected::merge),
        Sampler::Grid { step } => {
            let grid = grid_for(scheme, &ts, step)?;
            (0..grid.total)
                .into_par_iter()
                .map(|i| evaluate(scheme, grid.kernels(&ts, i), base, target, tolerance))
                .fold(Collected::empty, Collected::push)
                .reduce(Collected::empty, Collected::merge)
        }
    };
    Ok(collected)
}

fn canonical_target(target: &JointPmf) -> Result<JointPmf> {
    Ok(target.reorder(&[X, Y, Z])?)
}

/// Samples auxiliary kernels for both inner schemes and returns the union
/// cloud of every corner whose induced `p(z|x,y)` matches the target within
/// `tolerance`.
pub fn search_inner_bound(
    target: &JointPmf,
    aux_sizes: AuxSizes,
    sampler: Sampler,
    tolerance: f64,
) -> Result<RegionCloud> {
    if !(tolerance > 0.0) {
        return Err(RegionError::Tolerance(tolerance));
    }
    let target = canonical_target(target)?;
    let base = target.marginalize(&[X, Y])?;
    let mut all = Collected::empty();
    for scheme in [Scheme::R1, Scheme::R2] {
        all = all.merge(run_scheme(
            scheme, &target, &base, aux_sizes, sampler, tolerance,
        )?);
    }
    if all.points.is_empty() {
        return Err(RegionError::EmptySearch {
            best_residual: all.best_residual,
        });
    }
    Ok(RegionCloud::from_points(all.points))
}

/// Outer-bound corners over `count` seeded joints `p(x,y,z)p(u,v,w|x,y,z)`.
pub fn search_outer_bound(
    target: &JointPmf,
    aux_sizes: AuxSizes,
    count: usize,
    seed: u64,
) -> Result<RegionCloud> {
    let target = canonical_target(target)?;
    let collected = run_scheme(
        Scheme::Outer,
        &target,
        &target,
        aux_sizes,
        Sampler::Random { count, seed },
        f64::INFINITY,
    )?;
    if collected.points.is_empty() {
        return Err(RegionError::EmptySearch {
            best_residual: collected.best_residual,
        });
    }
    Ok(RegionCloud::from_points(collected.points))
}
