use super::pmf::{advance, check_unique_names, product_size};
use super::{Alphabet, ProbError, Result, NORMALIZATION_TOL};

/// Conditional pmf p(output | inputs), one dense row per input tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    inputs: Vec<Alphabet>,
    output: Alphabet,
    rows: Vec<f64>,
    unconstrained: Vec<bool>,
}

impl Kernel {
    /// Builds a kernel from one row per input tuple (row-major over inputs).
    pub fn new(inputs: Vec<Alphabet>, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let n_rows = product_size(&inputs)?;
        if rows.len() != n_rows || rows.iter().any(|r| r.len() != output.len()) {
            return Err(ProbError::SizeMismatch {
                expected: n_rows * output.len(),
                found: flat.len(),
            });
        }
        Self::from_parts(inputs, output, flat, vec![false; n_rows])
    }

    pub(crate) fn from_parts(
        inputs: Vec<Alphabet>,
        output: Alphabet,
        rows: Vec<f64>,
        unconstrained: Vec<bool>,
    ) -> Result<Self> {
        let mut all = inputs.clone();
        all.push(output.clone());
        check_unique_names(&all)?;
        let n_rows = product_size(&inputs)?;
        product_size(&all)?;
        let k = output.len();
        if rows.len() != n_rows * k {
            return Err(ProbError::SizeMismatch {
                expected: n_rows * k,
                found: rows.len(),
            });
        }
        for (r, row) in rows.chunks(k).enumerate() {
            let mut sum = 0.0;
            for &p in row {
                if !(p.is_finite() && p >= 0.0) {
                    return Err(ProbError::InvalidMass(p));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ProbError::RowNotNormalized { row: r, sum });
            }
        }
        Ok(Self {
            inputs,
            output,
            rows,
            unconstrained,
        })
    }

    /// Builds a kernel by evaluating `f(input_tuple, output_symbol)`.
    pub fn from_fn<F>(inputs: Vec<Alphabet>, output: Alphabet, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize], usize) -> f64,
    {
        let n_rows = product_size(&inputs)?;
        let sizes: Vec<usize> = inputs.iter().map(Alphabet::len).collect();
        let mut tuple = vec![0; inputs.len()];
        let mut rows = Vec::with_capacity(n_rows * output.len());
        for _ in 0..n_rows {
            rows.extend((0..output.len()).map(|o| f(&tuple, o)));
            advance(&mut tuple, &sizes);
        }
        Self::from_parts(inputs, output, rows, vec![false; n_rows])
    }

    /// Output is a deterministic function of the inputs.
    pub fn deterministic<F>(inputs: Vec<Alphabet>, output: Alphabet, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> usize,
    {
        Self::from_fn(inputs, output, |t, o| if f(t) == o { 1.0 } else { 0.0 })
    }

    /// Output independent of the inputs and uniform.
    pub fn uniform(inputs: Vec<Alphabet>, output: Alphabet) -> Result<Self> {
        let k = output.len() as f64;
        Self::from_fn(inputs, output, |_, _| 1.0 / k)
    }

    /// Output is a copy of `input` under a new name.
    pub fn copy(input: &Alphabet, output: impl Into<String>) -> Result<Self> {
        Self::deterministic(vec![input.clone()], input.renamed(output), |t| t[0])
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn bsc(input: &Alphabet, output: &Alphabet, crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(ProbError::OutOfRange {
                what: "crossover",
                value: crossover,
            });
        }
        if input.len() != 2 || output.len() != 2 {
            return Err(ProbError::AlphabetMismatch);
        }
        Self::from_fn(vec![input.clone()], output.clone(), |t, o| {
            if t[0] == o {
                1.0 - crossover
            } else {
                crossover
            }
        })
    }

    pub fn inputs(&self) -> &[Alphabet] {
        &self.inputs
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(Alphabet::name).collect()
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn num_rows(&self) -> usize {
        self.unconstrained.len()
    }

    fn row_index(&self, input: &[usize]) -> usize {
        debug_assert_eq!(input.len(), self.inputs.len());
        let mut idx = 0;
        for (a, &s) in self.inputs.iter().zip(input) {
            idx = idx * a.len() + s;
        }
        idx
    }

    /// Conditional pmf of the output for one input tuple.
    pub fn row(&self, input: &[usize]) -> &[f64] {
        self.row_at(self.row_index(input))
    }

    /// All rows concatenated in input-major order.
    pub fn entries(&self) -> &[f64] {
        &self.rows
    }

    pub fn row_at(&self, r: usize) -> &[f64] {
        let k = self.output.len();
        &self.rows[r * k..(r + 1) * k]
    }

    /// True when the row was produced by conditioning on a zero-probability
    /// event.
    pub fn is_unconstrained(&self, input: &[usize]) -> bool {
        self.unconstrained[self.row_index(input)]
    }

    /// Number of free real parameters across all rows.
    pub fn free_parameters(&self) -> usize {
        self.num_rows() * (self.output.len() - 1)
    }

    /// Largest absolute entry difference between two kernels with the same
    /// signature, ignoring rows flagged unconstrained in either one.
    pub fn max_abs_diff(&self, other: &Kernel) -> Result<f64> {
        if self.inputs != other.inputs || self.output != other.output {
            return Err(ProbError::AlphabetMismatch);
        }
        let k = self.output.len();
        let mut worst: f64 = 0.0;
        for r in 0..self.num_rows() {
            if self.unconstrained[r] || other.unconstrained[r] {
                continue;
            }
            for o in 0..k {
                worst = worst.max((self.rows[r * k + o] - other.rows[r * k + o]).abs());
            }
        }
        Ok(worst)
    }
}
