use std::collections::HashSet;

use super::{Alphabet, Kernel, ProbError, Result, NORMALIZATION_TOL};

/// Largest product space (in tuples) a dense pmf may span.
pub const MAX_SUPPORT: usize = 1_000_000;

/// Exact pmf over the product of an ordered list of named alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    vars: Vec<Alphabet>,
    mass: Vec<f64>,
}

pub(crate) fn product_size(vars: &[Alphabet]) -> Result<usize> {
    let size = vars.iter().map(|a| a.len() as u128).product::<u128>();
    if size > MAX_SUPPORT as u128 {
        return Err(ProbError::Capacity {
            size,
            limit: MAX_SUPPORT,
        });
    }
    Ok(size as usize)
}

pub(crate) fn check_unique_names(vars: &[Alphabet]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in vars {
        if !seen.insert(v.name()) {
            return Err(ProbError::DuplicateVariable(v.name().to_string()));
        }
    }
    Ok(())
}

/// Advances a mixed-radix counter; returns false after the last tuple.
pub(crate) fn advance(tuple: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..tuple.len()).rev() {
        tuple[i] += 1;
        if tuple[i] < sizes[i] {
            return true;
        }
        tuple[i] = 0;
    }
    false
}

pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * sizes[i + 1];
    }
    s
}

impl JointPmf {
    /// Builds a pmf from dense row-major masses.
    pub fn new(vars: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        check_unique_names(&vars)?;
        let size = product_size(&vars)?;
        if mass.len() != size {
            return Err(ProbError::SizeMismatch {
                expected: size,
                found: mass.len(),
            });
        }
        let mut total = 0.0;
        for &m in &mass {
            if !(m.is_finite() && m >= 0.0) {
                return Err(ProbError::InvalidMass(m));
            }
            total += m;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized(total));
        }
        Ok(Self { vars, mass })
    }

    /// Builds a pmf by evaluating `f` on every tuple of symbol indices.
    pub fn from_fn<F>(vars: Vec<Alphabet>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let size = product_size(&vars)?;
        let sizes: Vec<usize> = vars.iter().map(Alphabet::len).collect();
        let mut tuple = vec![0; vars.len()];
        let mut mass = Vec::with_capacity(size);
        loop {
            mass.push(f(&tuple));
            if !advance(&mut tuple, &sizes) {
                break;
            }
        }
        Self::new(vars, mass)
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Result<Self> {
        let size = product_size(&vars)?;
        Self::new(vars, vec![1.0 / size as f64; size])
    }

    pub fn point_mass(vars: Vec<Alphabet>, at: &[usize]) -> Result<Self> {
        if at.len() != vars.len() {
            return Err(ProbError::LengthMismatch {
                expected: vars.len(),
                found: at.len(),
            });
        }
        for (a, &s) in vars.iter().zip(at) {
            if s >= a.len() {
                return Err(ProbError::UnknownSymbol {
                    variable: a.name().to_string(),
                    symbol: s.to_string(),
                });
            }
        }
        Self::from_fn(vars, |t| if t == at { 1.0 } else { 0.0 })
    }

    /// Binary pair with uniform marginals and `Pr(X = Y) = p_agree`.
    pub fn doubly_symmetric(x: &str, y: &str, p_agree: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_agree) {
            return Err(ProbError::OutOfRange {
                what: "agreement probability",
                value: p_agree,
            });
        }
        let agree = 0.5 * p_agree;
        let disagree = 0.5 * (1.0 - p_agree);
        Self::new(
            vec![Alphabet::binary(x), Alphabet::binary(y)],
            vec![agree, disagree, disagree, agree],
        )
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(Alphabet::name).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(Alphabet::len).collect()
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.vars[self.position(name)?])
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.vars.iter().any(|a| a.name() == name)
    }

    pub(crate) fn flat_index(&self, tuple: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &s) in self.vars.iter().zip(tuple) {
            idx = idx * a.len() + s;
        }
        idx
    }

    /// Mass of a tuple of symbol indices (in variable order).
    pub fn prob(&self, tuple: &[usize]) -> f64 {
        debug_assert_eq!(tuple.len(), self.vars.len());
        self.mass[self.flat_index(tuple)]
    }

    /// Visits every tuple with its mass.
    pub fn for_each<F: FnMut(&[usize], f64)>(&self, mut f: F) {
        let sizes = self.sizes();
        let mut tuple = vec![0; sizes.len()];
        for &m in &self.mass {
            f(&tuple, m);
            advance(&mut tuple, &sizes);
        }
    }

    pub(crate) fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(ProbError::DuplicateVariable(n.to_string()));
                }
                self.position(n)
            })
            .collect()
    }

    /// Sums out every variable not in `keep`. The result lists variables in
    /// the order given by `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        if keep.is_empty() {
            return Err(ProbError::EmptyGroup("keep"));
        }
        let pos = self.positions(keep)?;
        let vars: Vec<Alphabet> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let out = self.project(&pos);
        Ok(JointPmf { vars, mass: out })
    }

    /// Dense marginal over the variables at `pos` (in that order). An empty
    /// position list yields the single total mass.
    pub(crate) fn project(&self, pos: &[usize]) -> Vec<f64> {
        let out_sizes: Vec<usize> = pos.iter().map(|&p| self.vars[p].len()).collect();
        let out_strides = strides(&out_sizes);
        let mut weight = vec![0; self.vars.len()];
        for (k, &p) in pos.iter().enumerate() {
            weight[p] = out_strides[k];
        }
        let mut out = vec![0.0; out_sizes.iter().product()];
        let sizes = self.sizes();
        let mut tuple = vec![0; sizes.len()];
        let mut target = 0usize;
        for &m in &self.mass {
            out[target] += m;
            // Odometer step that keeps `target` in sync with `tuple`.
            for i in (0..tuple.len()).rev() {
                tuple[i] += 1;
                target += weight[i];
                if tuple[i] < sizes[i] {
                    break;
                }
                target -= weight[i] * sizes[i];
                tuple[i] = 0;
            }
        }
        out
    }

    /// Reorders variables to match `order`, which must be a permutation.
    pub fn reorder(&self, order: &[&str]) -> Result<JointPmf> {
        if order.len() != self.vars.len() {
            return Err(ProbError::AlphabetMismatch);
        }
        self.marginalize(order)
    }

    /// Conditional kernel p(output | given).
    ///
    /// Rows whose conditioning event has zero probability are filled
    /// uniformly and flagged unconstrained.
    pub fn conditional(&self, output: &str, given: &[&str]) -> Result<Kernel> {
        if given.contains(&output) {
            return Err(ProbError::OutputInGiven(output.to_string()));
        }
        let mut names: Vec<&str> = given.to_vec();
        names.push(output);
        let pos = self.positions(&names)?;
        let joint = self.project(&pos);
        let inputs: Vec<Alphabet> = pos[..given.len()]
            .iter()
            .map(|&p| self.vars[p].clone())
            .collect();
        let out_alpha = self.vars[pos[given.len()]].clone();
        let k = out_alpha.len();
        let mut rows = joint;
        let mut unconstrained = Vec::with_capacity(rows.len() / k);
        for row in rows.chunks_mut(k) {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|p| *p /= total);
                unconstrained.push(false);
            } else {
                row.iter_mut().for_each(|p| *p = 1.0 / k as f64);
                unconstrained.push(true);
            }
        }
        Kernel::from_parts(inputs, out_alpha, rows, unconstrained)
    }

    /// Extends the pmf by one kernel per step: the joint becomes
    /// p(current) · p(output | inputs), with the output appended last.
    pub fn compose(&self, kernels: &[Kernel]) -> Result<JointPmf> {
        let mut joint = self.clone();
        for k in kernels {
            joint = joint.extend(k)?;
        }
        Ok(joint)
    }

    fn extend(&self, kernel: &Kernel) -> Result<JointPmf> {
        if self.has_variable(kernel.output().name()) {
            return Err(ProbError::DuplicateVariable(
                kernel.output().name().to_string(),
            ));
        }
        let mut in_pos = Vec::with_capacity(kernel.inputs().len());
        for a in kernel.inputs() {
            let p = self
                .position(a.name())
                .map_err(|_| ProbError::KernelInputUndefined(a.name().to_string()))?;
            if &self.vars[p] != a {
                return Err(ProbError::AlphabetMismatch);
            }
            in_pos.push(p);
        }
        let mut vars = self.vars.clone();
        vars.push(kernel.output().clone());
        let size = product_size(&vars)?;
        let mut mass = Vec::with_capacity(size);
        let mut row_tuple = vec![0; in_pos.len()];
        self.for_each(|t, m| {
            for (slot, &p) in row_tuple.iter_mut().zip(&in_pos) {
                *slot = t[p];
            }
            let row = kernel.row(&row_tuple);
            mass.extend(row.iter().map(|&q| m * q));
        });
        debug_assert_eq!(mass.len(), size);
        // Re-normalize away accumulated rounding so downstream checks see an
        // exact unit total.
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized(total));
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Ok(JointPmf { vars, mass })
    }
}

/// Joint type of equal-length sequences, one per variable.
pub fn empirical_distribution<S, T>(vars: &[Alphabet], sequences: &[S]) -> Result<JointPmf>
where
    S: AsRef<[T]>,
    T: Copy + Into<usize>,
{
    if sequences.len() != vars.len() {
        return Err(ProbError::LengthMismatch {
            expected: vars.len(),
            found: sequences.len(),
        });
    }
    if vars.is_empty() {
        return Err(ProbError::EmptyGroup("variables"));
    }
    check_unique_names(vars)?;
    let n = sequences[0].as_ref().len();
    if n == 0 {
        return Err(ProbError::LengthMismatch {
            expected: 1,
            found: 0,
        });
    }
    for s in sequences {
        if s.as_ref().len() != n {
            return Err(ProbError::LengthMismatch {
                expected: n,
                found: s.as_ref().len(),
            });
        }
    }
    let size = product_size(vars)?;
    let mut counts = vec![0u64; size];
    for i in 0..n {
        let mut idx = 0;
        for (a, s) in vars.iter().zip(sequences) {
            let sym: usize = s.as_ref()[i].into();
            if sym >= a.len() {
                return Err(ProbError::UnknownSymbol {
                    variable: a.name().to_string(),
                    symbol: sym.to_string(),
                });
            }
            idx = idx * a.len() + sym;
        }
        counts[idx] += 1;
    }
    let mass = counts.iter().map(|&c| c as f64 / n as f64).collect();
    JointPmf::new(vars.to_vec(), mass)
}

/// L1 distance between two pmfs on identical variables (range `[0, 2]`).
pub fn total_variation(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if p.vars != q.vars {
        return Err(ProbError::AlphabetMismatch);
    }
    Ok(p.mass
        .iter()
        .zip(&q.mass)
        .map(|(a, b)| (a - b).abs())
        .sum())
}
