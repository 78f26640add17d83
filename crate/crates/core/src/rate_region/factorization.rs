use std::fmt;

use serde::{Deserialize, Serialize};

use super::vars::{ALL, U, V, W, X, Y, Z};
use super::{RegionError, Result, MARKOV_TOL};
use crate::finite_prob::{JointPmf, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "SCHEME_R1")]
    R1,
    #[serde(rename = "SCHEME_R2")]
    R2,
    #[serde(rename = "OUTER")]
    Outer,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::R1 => "SCHEME_R1",
            Scheme::R2 => "SCHEME_R2",
            Scheme::Outer => "OUTER",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "SCHEME_R1" => Some(Scheme::R1),
            "SCHEME_R2" => Some(Scheme::R2),
            "OUTER" => Some(Scheme::Outer),
            _ => None,
        }
    }

    /// `(output, inputs)` of each kernel, in composition order. The outer
    /// bound has no fixed input sets.
    pub(crate) fn signature(&self) -> Option<[(&'static str, &'static [&'static str]); 4]> {
        match self {
            Scheme::R1 => Some([
                (U, &[X]),
                (V, &[U, X]),
                (W, &[U, X]),
                (Z, &[Y, U, V, W]),
            ]),
            Scheme::R2 => Some([
                (U, &[X]),
                (V, &[U, X]),
                (W, &[U, Y]),
                (Z, &[X, U, W]),
            ]),
            Scheme::Outer => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Alphabet sizes of the auxiliaries U, V, W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSizes {
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

impl Default for AuxSizes {
    fn default() -> Self {
        Self { u: 2, v: 2, w: 2 }
    }
}

/// The kernels that, composed onto a base source, produce a six-variable
/// joint for one scheme.
///
/// Inner schemes compose onto p(x,y) with kernels for U, V, W, Z. The outer
/// bound composes onto the target p(x,y,z) with kernels for U, V, W whose
/// inputs may be any variable already defined.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFactorization {
    scheme: Scheme,
    kernels: Vec<Kernel>,
    aux_sizes: AuxSizes,
}

fn same_set(a: &[&str], b: &[&str]) -> bool {
    a.len() == b.len() && a.iter().all(|n| b.contains(n))
}

impl AuxFactorization {
    pub fn new(scheme: Scheme, kernels: Vec<Kernel>) -> Result<Self> {
        let expected_outputs: &[&str] = match scheme {
            Scheme::Outer => &[U, V, W],
            _ => &[U, V, W, Z],
        };
        if kernels.len() != expected_outputs.len() {
            return Err(RegionError::Signature {
                scheme,
                output: format!("{} kernels", kernels.len()),
            });
        }
        for (k, &out) in kernels.iter().zip(expected_outputs) {
            if k.output().name() != out {
                return Err(RegionError::Signature {
                    scheme,
                    output: k.output().name().to_string(),
                });
            }
        }
        if let Some(sig) = scheme.signature() {
            for (k, (out, inputs)) in kernels.iter().zip(sig) {
                if !same_set(&k.input_names(), inputs) {
                    return Err(RegionError::Signature {
                        scheme,
                        output: out.to_string(),
                    });
                }
            }
        }
        let aux_sizes = AuxSizes {
            u: kernels[0].output().len(),
            v: kernels[1].output().len(),
            w: kernels[2].output().len(),
        };
        Ok(Self {
            scheme,
            kernels,
            aux_sizes,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn aux_sizes(&self) -> AuxSizes {
        self.aux_sizes
    }

    pub fn kernel(&self, output: &str) -> Option<&Kernel> {
        self.kernels.iter().find(|k| k.output().name() == output)
    }

    /// Six-variable joint in canonical order `(X, Y, U, V, W, Z)`.
    pub fn compose(&self, base: &JointPmf) -> Result<JointPmf> {
        Ok(base.compose(&self.kernels)?.reorder(&ALL)?)
    }
}

/// Verifies the conditional independences that make `joint6` factorize per
/// `scheme`. The outer bound imposes none.
pub fn check_factorization(joint6: &JointPmf, scheme: Scheme) -> Result<()> {
    let checks: [(&'static str, &[&str], &[&str], &[&str]); 4] = match scheme {
        Scheme::R1 => [
            ("I(U;Y|X)", &[U], &[Y], &[X]),
            ("I(V;Y|U,X)", &[V], &[Y], &[U, X]),
            ("I(W;Y,V|U,X)", &[W], &[Y, V], &[U, X]),
            ("I(Z;X|Y,U,V,W)", &[Z], &[X], &[Y, U, V, W]),
        ],
        Scheme::R2 => [
            ("I(U;Y|X)", &[U], &[Y], &[X]),
            ("I(V;Y|U,X)", &[V], &[Y], &[U, X]),
            ("I(W;X,V|U,Y)", &[W], &[X, V], &[U, Y]),
            ("I(Z;Y,V|X,U,W)", &[Z], &[Y, V], &[X, U, W]),
        ],
        Scheme::Outer => return Ok(()),
    };
    for (statement, a, b, c) in checks {
        let value = joint6.mutual_information(a, b, c)?;
        if value > MARKOV_TOL {
            return Err(RegionError::Factorization {
                scheme,
                statement,
                value,
            });
        }
    }
    Ok(())
}
