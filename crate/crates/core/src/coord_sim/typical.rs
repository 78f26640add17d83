use super::{Result, SimError};
use crate::finite_prob::{empirical_distribution, total_variation, JointPmf};

/// True iff the joint type of `sequences` (one per variable of `reference`,
/// in the same order) lies within `epsilon` of `reference` in L1.
pub fn is_typical<S, T>(sequences: &[S], reference: &JointPmf, epsilon: f64) -> Result<bool>
where
    S: AsRef<[T]>,
    T: Copy + Into<usize>,
{
    let empirical = empirical_distribution(reference.variables(), sequences)?;
    Ok(total_variation(&empirical, reference)? <= epsilon)
}

/// Typicality against a fixed reference, without building pmfs. Produces
/// the same distance as [`is_typical`] term by term.
#[derive(Debug, Clone)]
pub(crate) struct TypicalityTest {
    sizes: Vec<usize>,
    reference: Vec<f64>,
    epsilon: f64,
}

impl TypicalityTest {
    pub(crate) fn new(reference: &JointPmf, epsilon: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&epsilon) {
            return Err(SimError::Epsilon(epsilon));
        }
        Ok(Self {
            sizes: reference.sizes(),
            reference: reference.masses().to_vec(),
            epsilon,
        })
    }

    pub(crate) fn distance(&self, sequences: &[&[u8]]) -> f64 {
        debug_assert_eq!(sequences.len(), self.sizes.len());
        let n = sequences[0].len();
        let mut counts = vec![0u64; self.reference.len()];
        for i in 0..n {
            let mut idx = 0;
            for (size, s) in self.sizes.iter().zip(sequences) {
                idx = idx * size + s[i] as usize;
            }
            counts[idx] += 1;
        }
        counts
            .iter()
            .zip(&self.reference)
            .map(|(&c, r)| (c as f64 / n as f64 - r).abs())
            .sum()
    }

    pub(crate) fn accepts(&self, sequences: &[&[u8]]) -> bool {
        self.distance(sequences) <= self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::Alphabet;
    use proptest::prelude::*;

    fn uniform2() -> JointPmf {
        JointPmf::uniform(vec![Alphabet::binary("X"), Alphabet::binary("Y")]).unwrap()
    }

    #[test]
    fn examples() {
        let r = uniform2();
        // Exactly at the type of the reference.
        let x = [0u8, 0, 1, 1];
        let y = [0u8, 1, 0, 1];
        assert!(is_typical(&[x, y], &r, 1e-12).unwrap());
        let single = JointPmf::uniform(vec![Alphabet::binary("X")]).unwrap();
        assert!(!is_typical(&[[0u8; 6]], &single, 0.5).unwrap());
        assert!(is_typical(&[[0u8; 6], [1u8; 6]], &r, 2.0).unwrap());
        assert!(is_typical(&[[0u8; 3]], &r, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn fast_path_matches_public(
            xs in proptest::collection::vec(0u8..2, 1..24),
            seed in 0usize..1000,
            eps in 0.0f64..2.0,
            masses in proptest::collection::vec(0.01f64..1.0, 6),
        ) {
            let n = xs.len();
            let ys: Vec<u8> = (0..n).map(|i| ((i * 7 + seed) % 3) as u8).collect();
            let total: f64 = masses.iter().sum();
            let mass: Vec<f64> = masses.iter().map(|m| m / total).collect();
            let reference = JointPmf::new(
                vec![Alphabet::binary("X"), Alphabet::indexed("Y", 3)],
                mass,
            ).unwrap();
            let test = TypicalityTest::new(&reference, eps).unwrap();
            let fast = test.distance(&[&xs, &ys]);
            let emp = empirical_distribution(reference.variables(), &[&xs, &ys]).unwrap();
            prop_assert_eq!(fast, total_variation(&emp, &reference).unwrap());
            prop_assert_eq!(
                test.accepts(&[&xs, &ys]),
                is_typical(&[&xs, &ys], &reference, eps).unwrap()
            );
        }
    }
}
