use std::collections::HashSet;

use super::{ProbError, Result};

/// A named, ordered, finite set of symbol labels.
///
/// Symbol indices are positions in the label list and never change.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<N, I, S>(name: N, symbols: I) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(ProbError::EmptyAlphabet(name));
        }
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(ProbError::DuplicateSymbol {
                    alphabet: name,
                    symbol: s.clone(),
                });
            }
        }
        Ok(Self { name, symbols })
    }

    /// Alphabet `{"0", "1", ..., "size-1"}`.
    ///
    /// Panics if `size == 0`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Self {
        assert!(size > 0, "alphabet size must be positive");
        Self {
            name: name.into(),
            symbols: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::indexed(name, 2)
    }

    /// Single-symbol alphabet, used for degenerate auxiliaries.
    pub fn singleton(name: impl Into<String>) -> Self {
        Self::indexed(name, 1)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false; alphabets have at least one symbol.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            symbols: self.symbols.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(matches!(
            Alphabet::new("X", Vec::<String>::new()),
            Err(ProbError::EmptyAlphabet(_))
        ));
        assert!(matches!(
            Alphabet::new("X", ["a", "b", "a"]),
            Err(ProbError::DuplicateSymbol { .. })
        ));
    }

    #[test]
    fn indices_are_positions() {
        let a = Alphabet::new("X", ["lo", "hi"]).unwrap();
        assert_eq!(a.index_of("hi"), Some(1));
        assert_eq!(a.index_of("mid"), None);
        assert_eq!(Alphabet::indexed("U", 3).symbols(), ["0", "1", "2"]);
    }
}
