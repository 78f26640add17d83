//! JSON document form shared by pmfs and kernels:
//! `{"variables":[{"name","symbols":[...]}], "mass":[{"tuple":[...], "p":float}]}`.
//! Omitted tuples carry zero mass. For kernels the last variable is the
//! output and each `p` is a conditional probability.

use serde::{Deserialize, Serialize};

use super::{Alphabet, JointPmf, Kernel, ProbError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub name: String,
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassDoc {
    pub tuple: Vec<SymbolLabel>,
    pub p: f64,
}

/// A symbol written either as its label or as a bare integer index/label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolLabel {
    Text(String),
    Number(u64),
}

impl SymbolLabel {
    fn resolve(&self, alphabet: &Alphabet) -> Result<usize> {
        let found = match self {
            SymbolLabel::Text(s) => alphabet.index_of(s),
            SymbolLabel::Number(k) => alphabet.index_of(&k.to_string()),
        };
        found.ok_or_else(|| ProbError::UnknownSymbol {
            variable: alphabet.name().to_string(),
            symbol: match self {
                SymbolLabel::Text(s) => s.clone(),
                SymbolLabel::Number(k) => k.to_string(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfDocument {
    pub variables: Vec<VariableDoc>,
    pub mass: Vec<MassDoc>,
}

fn variable_docs(vars: &[Alphabet]) -> Vec<VariableDoc> {
    vars.iter()
        .map(|a| VariableDoc {
            name: a.name().to_string(),
            symbols: a.symbols().to_vec(),
        })
        .collect()
}

fn entries<'a>(vars: &[Alphabet], masses: impl Iterator<Item = (Vec<usize>, f64)> + 'a) -> Vec<MassDoc> {
    masses
        .filter(|(_, p)| *p != 0.0)
        .map(|(t, p)| MassDoc {
            tuple: t
                .iter()
                .zip(vars)
                .map(|(&s, a)| SymbolLabel::Text(a.symbols()[s].clone()))
                .collect(),
            p,
        })
        .collect()
}

impl PmfDocument {
    fn alphabets(&self) -> Result<Vec<Alphabet>> {
        self.variables
            .iter()
            .map(|v| Alphabet::new(v.name.clone(), v.symbols.clone()))
            .collect()
    }

    fn dense(&self, vars: &[Alphabet]) -> Result<Vec<f64>> {
        let size = super::pmf::product_size(vars)?;
        let mut mass = vec![0.0; size];
        let mut filled = vec![false; size];
        for entry in &self.mass {
            if entry.tuple.len() != vars.len() {
                return Err(ProbError::LengthMismatch {
                    expected: vars.len(),
                    found: entry.tuple.len(),
                });
            }
            let mut idx = 0;
            for (label, a) in entry.tuple.iter().zip(vars) {
                idx = idx * a.len() + label.resolve(a)?;
            }
            if filled[idx] {
                return Err(ProbError::Document("tuple listed twice".into()));
            }
            filled[idx] = true;
            mass[idx] = entry.p;
        }
        Ok(mass)
    }

    pub fn to_pmf(&self) -> Result<JointPmf> {
        let vars = self.alphabets()?;
        let mass = self.dense(&vars)?;
        JointPmf::new(vars, mass)
    }

    pub fn to_kernel(&self) -> Result<Kernel> {
        let mut vars = self.alphabets()?;
        let output = vars
            .pop()
            .ok_or_else(|| ProbError::Document("kernel needs an output variable".into()))?;
        let mut all = vars.clone();
        all.push(output.clone());
        let rows = self.dense(&all)?;
        let n_rows = rows.len() / output.len();
        Kernel::from_parts(vars, output, rows, vec![false; n_rows])
    }

    pub fn from_pmf(p: &JointPmf) -> Self {
        let mut out = Vec::new();
        p.for_each(|t, m| out.push((t.to_vec(), m)));
        Self {
            variables: variable_docs(p.variables()),
            mass: entries(p.variables(), out.into_iter()),
        }
    }

    pub fn from_kernel(k: &Kernel) -> Self {
        let mut all = k.inputs().to_vec();
        all.push(k.output().clone());
        let sizes: Vec<usize> = all.iter().map(Alphabet::len).collect();
        let mut out = Vec::new();
        let mut tuple = vec![0; all.len()];
        let width = k.output().len();
        for r in 0..k.num_rows() {
            for o in 0..width {
                out.push((tuple.clone(), k.row_at(r)[o]));
                super::pmf::advance(&mut tuple, &sizes);
            }
        }
        Self {
            variables: variable_docs(&all),
            mass: entries(&all, out.into_iter()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ProbError::Document(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pmf document serializes")
    }
}

impl JointPmf {
    pub fn to_json(&self) -> String {
        PmfDocument::from_pmf(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        PmfDocument::parse(text)?.to_pmf()
    }
}

impl Kernel {
    pub fn to_json(&self) -> String {
        PmfDocument::from_kernel(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        PmfDocument::parse(text)?.to_kernel()
    }
}
