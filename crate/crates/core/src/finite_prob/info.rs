//! Entropies and mutual informations in bits.

use std::collections::HashSet;

use super::{JointPmf, ProbError, Result};

fn plogp_sum(masses: &[f64]) -> f64 {
    -masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// `-x log x - (1-x) log (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ProbError::OutOfRange { what: "x", value: x });
    }
    Ok(plogp_sum(&[x, 1.0 - x]))
}

/// Binary convolution `x(1-y) + y(1-x)`.
pub fn star(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ProbError::OutOfRange { what: "x", value: x });
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(ProbError::OutOfRange { what: "y", value: y });
    }
    Ok(x * (1.0 - y) + y * (1.0 - x))
}

impl JointPmf {
    /// Joint entropy H(vars). The empty set has entropy 0.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        let pos = self.positions(vars)?;
        if pos.is_empty() {
            return Ok(0.0);
        }
        Ok(plogp_sum(&self.project(&pos)))
    }

    /// H(target | given).
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        let all = disjoint_union(&[target, given])?;
        Ok((self.entropy(&all)? - self.entropy(given)?).max(0.0))
    }

    /// I(A; B | C), computed as H(A,C) + H(B,C) - H(A,B,C) - H(C).
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        if a.is_empty() {
            return Err(ProbError::EmptyGroup("first group"));
        }
        if b.is_empty() {
            return Err(ProbError::EmptyGroup("second group"));
        }
        let abc = disjoint_union(&[a, b, given])?;
        let ac = disjoint_union(&[a, given])?;
        let bc = disjoint_union(&[b, given])?;
        let value =
            self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(given)?;
        // Exact value is nonnegative; anything below zero is rounding.
        debug_assert!(value > -1e-9, "negative mutual information {value}");
        Ok(value.max(0.0))
    }
}

fn disjoint_union<'a>(groups: &[&[&'a str]]) -> Result<Vec<&'a str>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in groups {
        for &v in *g {
            if !seen.insert(v) {
                return Err(ProbError::OverlappingGroups(v.to_string()));
            }
            out.push(v);
        }
    }
    Ok(out)
}
