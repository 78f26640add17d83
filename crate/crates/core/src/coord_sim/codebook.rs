use std::sync::OnceLock;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::{CodeRates, Result, SimError};
use crate::finite_prob::JointPmf;
use crate::rate_region::vars::{ALL, U, V, W, Z};
use crate::seed;

/// Largest number of sequences any single book may hold.
pub const MAX_BOOK_SEQUENCES: u64 = 1 << 22;

/// Index-addressable sequences with a bin index each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Book {
    n: usize,
    symbols: Vec<u8>,
    bins: Vec<u32>,
    bin_count: usize,
    // Members of bin `b` are `members[offsets[b]..offsets[b + 1]]`, ascending.
    offsets: Vec<u32>,
    members: Vec<u32>,
}

impl Book {
    fn new(n: usize, symbols: Vec<u8>, bins: Vec<u32>, bin_count: usize) -> Self {
        let mut offsets = vec![0u32; bin_count + 1];
        for &b in &bins {
            offsets[b as usize + 1] += 1;
        }
        for b in 0..bin_count {
            offsets[b + 1] += offsets[b];
        }
        let mut fill = offsets.clone();
        let mut members = vec![0u32; bins.len()];
        for (i, &b) in bins.iter().enumerate() {
            members[fill[b as usize] as usize] = i as u32;
            fill[b as usize] += 1;
        }
        Self {
            n,
            symbols,
            bins,
            bin_count,
            offsets,
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn sequence(&self, index: usize) -> &[u8] {
        &self.symbols[index * self.n..(index + 1) * self.n]
    }

    pub fn bin_of(&self, index: usize) -> usize {
        self.bins[index] as usize
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Codeword indices in bin `b`, ascending. Bins may be empty.
    pub fn bin(&self, b: usize) -> &[u32] {
        &self.members[self.offsets[b] as usize..self.offsets[b + 1] as usize]
    }
}

/// Per-position sampler for a variable given the `U` symbol at that
/// position (or unconditionally, with a single row).
#[derive(Debug, Clone)]
struct RowSampler {
    rows: Vec<WeightedIndex<f64>>,
}

impl RowSampler {
    fn conditional(joint6: &JointPmf, output: &str, given: &[&str]) -> Result<Self> {
        let k = joint6.conditional(output, given)?;
        let rows = (0..k.num_rows())
            .map(|r| WeightedIndex::new(k.row_at(r).iter().copied()).expect("row is a pmf"))
            .collect();
        Ok(Self { rows })
    }

    fn draw<R: Rng>(&self, rng: &mut R, parent: Option<&[u8]>, n: usize, out: &mut Vec<u8>) {
        for i in 0..n {
            let row = parent.map_or(0, |p| p[i] as usize);
            out.push(self.rows[row].sample(rng) as u8);
        }
    }
}

fn draw_book(
    n: usize,
    count: usize,
    bin_count: usize,
    sampler: &RowSampler,
    parent: Option<&[u8]>,
    seq_seed: (u64, u64, u64),
    bin_seed: Option<(u64, u64, u64)>,
) -> Book {
    let mut rng = seed::rng(seq_seed.0, seq_seed.1, seq_seed.2);
    let mut symbols = Vec::with_capacity(count * n);
    for _ in 0..count {
        sampler.draw(&mut rng, parent, n, &mut symbols);
    }
    let bins: Vec<u32> = match bin_seed {
        Some(s) if bin_count < count => {
            let mut rng = seed::rng(s.0, s.1, s.2);
            (0..count)
                .map(|_| rng.gen_range(0..bin_count) as u32)
                .collect()
        }
        // An unbinned book sends the codeword index itself.
        _ => (0..count as u32).collect(),
    };
    Book::new(n, symbols, bins, bin_count.min(count).max(1))
}

fn checked(book: &'static str, size: f64) -> Result<usize> {
    if size > MAX_BOOK_SEQUENCES as f64 {
        return Err(SimError::Budget {
            book,
            size,
            limit: MAX_BOOK_SEQUENCES,
        });
    }
    Ok(size as usize)
}

/// The `U` book and the per-codeword `V`, `W`, `Z` sub-books.
///
/// Sub-books are generated on first access from seeds that depend only on
/// the suite seed and the `U` index, so their contents do not depend on
/// access order.
#[derive(Debug)]
pub struct CodebookSuite {
    n: usize,
    seed: u64,
    rates: CodeRates,
    joint6: JointPmf,
    u_book: Book,
    counts: [usize; 6],
    samplers: [RowSampler; 3],
    v_books: Vec<OnceLock<Book>>,
    w_books: Vec<OnceLock<Book>>,
    z_books: Vec<OnceLock<Book>>,
}

const V_IDX: usize = 0;
const W_IDX: usize = 1;
const Z_IDX: usize = 2;

/// Draws the `U` book i.i.d. from `p(u)` with uniform bins and prepares the
/// sub-books, each i.i.d. from `p(·|u)` along the parent codeword.
pub fn generate_codebooks(rates: &CodeRates, joint6: &JointPmf, seed: u64) -> Result<CodebookSuite> {
    let j = joint6.reorder(&ALL)?;
    for a in j.variables() {
        if a.len() > 256 {
            return Err(SimError::Alphabet {
                name: a.name().to_string(),
                size: a.len(),
            });
        }
    }
    let s = &rates.sizes;
    let u = checked("U", s.u)?;
    let counts = [
        checked("V", s.v)?,
        checked("V bins", s.v_bins)?,
        checked("W", s.w)?,
        checked("Z", s.z)?,
        checked("Z bins", s.z_bins)?,
        checked("U bins", s.u_bins)?,
    ];
    let n = rates.n;
    let u_sampler = RowSampler::conditional(&j, U, &[])?;
    let u_book = draw_book(
        n,
        u,
        counts[5],
        &u_sampler,
        None,
        (seed, seed::label::U_BOOK, 0),
        Some((seed, seed::label::U_BINS, 0)),
    );
    let samplers = [
        RowSampler::conditional(&j, V, &[U])?,
        RowSampler::conditional(&j, W, &[U])?,
        RowSampler::conditional(&j, Z, &[U])?,
    ];
    let lazy = || (0..u).map(|_| OnceLock::new()).collect::<Vec<_>>();
    Ok(CodebookSuite {
        n,
        seed,
        rates: *rates,
        joint6: j,
        u_book,
        counts,
        samplers,
        v_books: lazy(),
        w_books: lazy(),
        z_books: lazy(),
    })
}

impl CodebookSuite {
    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn rates(&self) -> &CodeRates {
        &self.rates
    }

    /// The six-variable joint in canonical order.
    pub fn joint6(&self) -> &JointPmf {
        &self.joint6
    }

    pub fn u_book(&self) -> &Book {
        &self.u_book
    }

    fn sub_book(&self, which: usize, m_u: usize) -> &Book {
        let (cells, count, bins, book_label, bin_label) = match which {
            V_IDX => (
                &self.v_books,
                self.counts[0],
                self.counts[1],
                seed::label::V_BOOK,
                Some(seed::label::V_BINS),
            ),
            W_IDX => (&self.w_books, self.counts[2], self.counts[2], seed::label::W_BOOK, None),
            _ => (
                &self.z_books,
                self.counts[3],
                self.counts[4],
                seed::label::Z_BOOK,
                Some(seed::label::Z_BINS),
            ),
        };
        cells[m_u].get_or_init(|| {
            draw_book(
                self.n,
                count,
                bins,
                &self.samplers[which],
                Some(self.u_book.sequence(m_u)),
                (self.seed, book_label, m_u as u64),
                bin_label.map(|l| (self.seed, l, m_u as u64)),
            )
        })
    }

    pub fn v_book(&self, m_u: usize) -> &Book {
        self.sub_book(V_IDX, m_u)
    }

    pub fn w_book(&self, m_u: usize) -> &Book {
        self.sub_book(W_IDX, m_u)
    }

    pub fn z_book(&self, m_u: usize) -> &Book {
        self.sub_book(Z_IDX, m_u)
    }
}
