use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::codebook::Book;
use super::typical::TypicalityTest;
use super::{
    derive_code_rates, generate_codebooks, CodeRates, CodebookSuite, Result, SimError, SimScheme,
};
use crate::finite_prob::{empirical_distribution, total_variation, JointPmf};
use crate::rate_region::vars::{ALL, U, V, W, X, Y, Z};
use crate::rate_region::{RateTriple, MARGINAL_TOL};
use crate::seed;

/// Allowance when comparing payload bits with `n` times a channel rate.
pub const BUDGET_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    C1,
    C2,
    C3,
}

/// One index with the size of the space it is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexField {
    pub value: u64,
    pub space: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMessage {
    pub channel: Channel,
    pub payload: Vec<IndexField>,
}

impl ChannelMessage {
    fn new(channel: Channel, fields: &[(usize, usize)]) -> Self {
        Self {
            channel,
            payload: fields
                .iter()
                .map(|&(value, space)| IndexField {
                    value: value as u64,
                    space: space as u64,
                })
                .collect(),
        }
    }

    /// `sum log2(space)` over the payload.
    pub fn bits(&self) -> f64 {
        self.payload.iter().map(|f| (f.space as f64).log2()).sum()
    }

    pub fn indices_in_range(&self) -> bool {
        self.payload.iter().all(|f| f.value < f.space)
    }

    /// Every index is in range and the payload fits `n · rate` bits.
    pub fn within_budget(&self, n: usize, rate: f64) -> bool {
        self.indices_in_range() && self.bits() <= n as f64 * rate + BUDGET_SLACK
    }

    fn expect(&self, channel: Channel, fields: usize) -> Result<()> {
        if self.channel != channel || self.payload.len() != fields || !self.indices_in_range() {
            return Err(SimError::Message(format!(
                "expected {fields} in-range indices on {channel:?}, got {self:?}"
            )));
        }
        Ok(())
    }

    fn index(&self, i: usize) -> usize {
        self.payload[i].value as usize
    }
}

/// Which stages hit a cover failure, an empty bin, no typical candidate, or
/// more than one typical candidate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFlags {
    pub tx_cover_u: bool,
    pub tx_cover_v: bool,
    pub tx_cover_w_or_z: bool,
    pub relay_decode_u: bool,
    pub relay_decode_v: bool,
    pub relay_cover: bool,
    pub rx_decode: bool,
}

impl StageFlags {
    pub const NAMES: [&'static str; 7] = [
        "tx_cover_u",
        "tx_cover_v",
        "tx_cover_w_or_z",
        "relay_decode_u",
        "relay_decode_v",
        "relay_cover",
        "rx_decode",
    ];

    pub fn as_array(&self) -> [bool; 7] {
        [
            self.tx_cover_u,
            self.tx_cover_v,
            self.tx_cover_w_or_z,
            self.relay_decode_u,
            self.relay_decode_v,
            self.relay_cover,
            self.rx_decode,
        ]
    }

    pub fn any(&self) -> bool {
        self.as_array().iter().any(|&f| f)
    }

    fn merge(self, o: StageFlags) -> StageFlags {
        StageFlags {
            tx_cover_u: self.tx_cover_u || o.tx_cover_u,
            tx_cover_v: self.tx_cover_v || o.tx_cover_v,
            tx_cover_w_or_z: self.tx_cover_w_or_z || o.tx_cover_w_or_z,
            relay_decode_u: self.relay_decode_u || o.relay_decode_u,
            relay_decode_v: self.relay_decode_v || o.relay_decode_v,
            relay_cover: self.relay_cover || o.relay_cover,
            rx_decode: self.rx_decode || o.rx_decode,
        }
    }
}

fn test(suite: &CodebookSuite, vars: &[&str], epsilon: f64) -> Result<TypicalityTest> {
    TypicalityTest::new(&suite.joint6().marginalize(vars)?, epsilon)
}

/// First index (ascending) whose codeword, placed before `rest`, passes.
fn cover(book: &Book, t: &TypicalityTest, rest: &[&[u8]]) -> Option<usize> {
    let mut seqs: Vec<&[u8]> = Vec::with_capacity(rest.len() + 1);
    seqs.push(&[]);
    seqs.extend_from_slice(rest);
    (0..book.len()).find(|&i| {
        seqs[0] = book.sequence(i);
        t.accepts(&seqs)
    })
}

/// Decodes within bin `b`: `Ok(index)` for a unique typical candidate (or a
/// bin of size one), `Err(fallback)` otherwise.
fn decode(
    book: &Book,
    b: usize,
    t: &TypicalityTest,
    rest: &[&[u8]],
) -> std::result::Result<usize, usize> {
    let members = book.bin(b);
    match members {
        [] => return Err(0),
        [only] => return Ok(*only as usize),
        _ => {}
    }
    let mut seqs: Vec<&[u8]> = Vec::with_capacity(rest.len() + 1);
    seqs.push(&[]);
    seqs.extend_from_slice(rest);
    let mut hits = members.iter().filter(|&&i| {
        seqs[0] = book.sequence(i as usize);
        t.accepts(&seqs)
    });
    match (hits.next(), hits.next()) {
        (Some(&i), None) => Ok(i as usize),
        (Some(&i), Some(_)) => Err(i as usize),
        (None, _) => Err(0),
    }
}

fn check_length(seq: &[u8], n: usize) -> Result<()> {
    if seq.len() != n {
        return Err(SimError::Prob(crate::finite_prob::ProbError::LengthMismatch {
            expected: n,
            found: seq.len(),
        }));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxOutput {
    pub c1: ChannelMessage,
    pub c3: ChannelMessage,
    pub m_u: usize,
    pub m_v: usize,
    /// `m_w` under scheme 1, `m_z` under scheme 2.
    pub m_third: usize,
    pub flags: StageFlags,
}

/// Covers `x^n` with `U`, then `V`, then `W` (scheme 1) or `Z` (scheme 2).
pub fn tx_encode(x_seq: &[u8], suite: &CodebookSuite, epsilon: f64) -> Result<TxOutput> {
    let n = suite.block_length();
    check_length(x_seq, n)?;
    let scheme = suite.rates().scheme;
    let mut flags = StageFlags::default();

    let u_book = suite.u_book();
    let m_u = cover(u_book, &test(suite, &[U, X], epsilon)?, &[x_seq]).unwrap_or_else(|| {
        flags.tx_cover_u = true;
        0
    });
    let u_seq = u_book.sequence(m_u);

    let v_book = suite.v_book(m_u);
    let m_v = cover(v_book, &test(suite, &[V, X, U], epsilon)?, &[x_seq, u_seq])
        .unwrap_or_else(|| {
            flags.tx_cover_v = true;
            0
        });

    let (third_book, name) = match scheme {
        SimScheme::One => (suite.w_book(m_u), W),
        SimScheme::Two => (suite.z_book(m_u), Z),
    };
    let m_third = cover(third_book, &test(suite, &[name, X, U], epsilon)?, &[x_seq, u_seq])
        .unwrap_or_else(|| {
            flags.tx_cover_w_or_z = true;
            0
        });

    let c1 = ChannelMessage::new(
        Channel::C1,
        &[
            (u_book.bin_of(m_u), u_book.bin_count()),
            (v_book.bin_of(m_v), v_book.bin_count()),
        ],
    );
    let c3 = match scheme {
        SimScheme::One => ChannelMessage::new(Channel::C3, &[(m_third, third_book.len())]),
        SimScheme::Two => ChannelMessage::new(
            Channel::C3,
            &[(third_book.bin_of(m_third), third_book.bin_count())],
        ),
    };
    Ok(TxOutput {
        c1,
        c3,
        m_u,
        m_v,
        m_third,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayOutput {
    pub c2: ChannelMessage,
    pub u_hat: usize,
    pub v_hat: usize,
    /// `m_z` under scheme 1, `m_w` under scheme 2.
    pub m_cover: usize,
    pub flags: StageFlags,
}

fn relay_cover(
    y_seq: &[u8],
    u_hat: usize,
    v_hat: usize,
    suite: &CodebookSuite,
    epsilon: f64,
    mut flags: StageFlags,
) -> Result<RelayOutput> {
    let u_book = suite.u_book();
    let u_seq = u_book.sequence(u_hat);
    let v_seq = suite.v_book(u_hat).sequence(v_hat);
    let (book, name) = match suite.rates().scheme {
        SimScheme::One => (suite.z_book(u_hat), Z),
        SimScheme::Two => (suite.w_book(u_hat), W),
    };
    let m_cover = cover(
        book,
        &test(suite, &[name, U, V, Y], epsilon)?,
        &[u_seq, v_seq, y_seq],
    )
    .unwrap_or_else(|| {
        flags.relay_cover = true;
        0
    });
    let second = match suite.rates().scheme {
        SimScheme::One => (book.bin_of(m_cover), book.bin_count()),
        SimScheme::Two => (m_cover, book.len()),
    };
    let c2 = ChannelMessage::new(Channel::C2, &[(u_hat, u_book.len()), second]);
    Ok(RelayOutput {
        c2,
        u_hat,
        v_hat,
        m_cover,
        flags,
    })
}

/// Decodes `(û, v̂)` from the bins on `C1` against `y^n`, then covers the
/// relay's auxiliary and forwards `û` with it on `C2`.
pub fn relay_process(
    y_seq: &[u8],
    msg_c1: &ChannelMessage,
    suite: &CodebookSuite,
    epsilon: f64,
) -> Result<RelayOutput> {
    check_length(y_seq, suite.block_length())?;
    msg_c1.expect(Channel::C1, 2)?;
    let mut flags = StageFlags::default();
    let u_book = suite.u_book();
    if msg_c1.payload[0].space != u_book.bin_count() as u64 {
        return Err(SimError::Message("C1 U-bin space does not match the book".into()));
    }
    let u_hat = decode(u_book, msg_c1.index(0), &test(suite, &[U, Y], epsilon)?, &[y_seq])
        .unwrap_or_else(|fallback| {
            flags.relay_decode_u = true;
            fallback
        });
    let v_book = suite.v_book(u_hat);
    let b_v = msg_c1.index(1);
    let v_hat = if b_v < v_book.bin_count() {
        decode(
            v_book,
            b_v,
            &test(suite, &[V, U, Y], epsilon)?,
            &[u_book.sequence(u_hat), y_seq],
        )
    } else {
        Err(0)
    }
    .unwrap_or_else(|fallback| {
        flags.relay_decode_v = true;
        fallback
    });
    relay_cover(y_seq, u_hat, v_hat, suite, epsilon, flags)
}

/// The relay handed the transmitter's true `(m_u, m_v)`.
pub fn relay_process_genie(
    y_seq: &[u8],
    m_u: usize,
    m_v: usize,
    suite: &CodebookSuite,
    epsilon: f64,
) -> Result<RelayOutput> {
    check_length(y_seq, suite.block_length())?;
    if m_u >= suite.u_book().len() || m_v >= suite.v_book(m_u).len() {
        return Err(SimError::Message("genie index out of range".into()));
    }
    relay_cover(y_seq, m_u, m_v, suite, epsilon, StageFlags::default())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RxOutput {
    pub z_seq: Vec<u8>,
    pub u_hat: usize,
    pub m_w: usize,
    pub m_z: usize,
    pub decode_failed: bool,
}

/// Resolves `w^n` by index and decodes `ẑ` in its bin against `(w^n, u^n)`.
pub fn rx_decode(
    msg_c2: &ChannelMessage,
    msg_c3: &ChannelMessage,
    suite: &CodebookSuite,
    epsilon: f64,
) -> Result<RxOutput> {
    msg_c2.expect(Channel::C2, 2)?;
    msg_c3.expect(Channel::C3, 1)?;
    let u_hat = msg_c2.index(0);
    if u_hat >= suite.u_book().len() {
        return Err(SimError::Message("C2 U index out of range".into()));
    }
    let (m_w, b_z) = match suite.rates().scheme {
        SimScheme::One => (msg_c3.index(0), msg_c2.index(1)),
        SimScheme::Two => (msg_c2.index(1), msg_c3.index(0)),
    };
    let w_book = suite.w_book(u_hat);
    let z_book = suite.z_book(u_hat);
    if m_w >= w_book.len() || b_z >= z_book.bin_count() {
        return Err(SimError::Message("W index or Z bin out of range".into()));
    }
    let u_seq = suite.u_book().sequence(u_hat);
    let w_seq = w_book.sequence(m_w);
    let (m_z, decode_failed) = match decode(
        z_book,
        b_z,
        &test(suite, &[Z, W, U], epsilon)?,
        &[w_seq, u_seq],
    ) {
        Ok(i) => (i, false),
        Err(fallback) => (fallback, true),
    };
    Ok(RxOutput {
        z_seq: z_book.sequence(m_z).to_vec(),
        u_hat,
        m_w,
        m_z,
        decode_failed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub n: usize,
    pub scheme: SimScheme,
    pub tv_to_target: f64,
    pub stage_failures: StageFlags,
    /// Joint type of `(x^n, y^n, z^n)`.
    pub achieved_empirical: JointPmf,
    /// Messages whose payload exceeded `n` times the channel rate.
    pub budget_violations: usize,
    pub channel_rates: RateTriple,
}

/// Everything about a trial that does not depend on its seed.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    target: JointPmf,
    joint6: JointPmf,
    epsilon: f64,
    rates: CodeRates,
    source: WeightedIndex<f64>,
    y_size: usize,
}

impl TrialPlan {
    pub fn new(
        target: &JointPmf,
        joint6: &JointPmf,
        scheme: SimScheme,
        n: usize,
        delta: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(0.0..=2.0).contains(&epsilon) {
            return Err(SimError::Epsilon(epsilon));
        }
        let target = target.reorder(&[X, Y, Z])?;
        let joint6 = joint6.reorder(&ALL)?;
        let residual = total_variation(&joint6.marginalize(&[X, Y, Z])?, &target)?;
        if residual > MARGINAL_TOL {
            return Err(SimError::TargetMismatch(residual));
        }
        let rates = derive_code_rates(&joint6, delta, scheme, n)?;
        let xy = target.marginalize(&[X, Y])?;
        let source = WeightedIndex::new(xy.masses().iter().copied()).expect("p(x,y) is a pmf");
        let y_size = xy.sizes()[1];
        Ok(Self {
            target,
            joint6,
            epsilon,
            rates,
            source,
            y_size,
        })
    }

    pub fn rates(&self) -> &CodeRates {
        &self.rates
    }

    pub fn target(&self) -> &JointPmf {
        &self.target
    }

    pub fn joint6(&self) -> &JointPmf {
        &self.joint6
    }

    /// Codebooks for the trial with this seed.
    pub fn suite(&self, seed: u64) -> Result<CodebookSuite> {
        generate_codebooks(
            &self.rates,
            &self.joint6,
            seed::derive(seed, seed::label::CODEBOOK, 0),
        )
    }

    /// `(x^n, y^n)` drawn i.i.d. from `p(x,y)`.
    pub fn draw_source(&self, seed: u64) -> (Vec<u8>, Vec<u8>) {
        let mut rng = seed::rng(seed, seed::label::SOURCE, 0);
        let n = self.rates.n;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let cell = self.source.sample(&mut rng);
            x.push((cell / self.y_size) as u8);
            y.push((cell % self.y_size) as u8);
        }
        (x, y)
    }

    pub fn run(&self, seed: u64) -> Result<TrialResult> {
        let suite = self.suite(seed)?;
        let (x, y) = self.draw_source(seed);
        let tx = tx_encode(&x, &suite, self.epsilon)?;
        let relay = relay_process(&y, &tx.c1, &suite, self.epsilon)?;
        let rx = rx_decode(&relay.c2, &tx.c3, &suite, self.epsilon)?;

        let n = self.rates.n;
        let channel_rates = self.rates.channel_rates();
        let budget_violations = [
            (&tx.c1, channel_rates.r1),
            (&relay.c2, channel_rates.r2),
            (&tx.c3, channel_rates.r3),
        ]
        .iter()
        .filter(|(m, r)| !m.within_budget(n, *r))
        .count();

        let mut flags = tx.flags.merge(relay.flags);
        flags.rx_decode = rx.decode_failed;
        let achieved = empirical_distribution(self.target.variables(), &[&x, &y, &rx.z_seq])?;
        Ok(TrialResult {
            seed,
            n,
            scheme: self.rates.scheme,
            tv_to_target: total_variation(&achieved, &self.target)?,
            stage_failures: flags,
            achieved_empirical: achieved,
            budget_violations,
            channel_rates,
        })
    }
}

/// One end-to-end trial. Errors only for invalid configurations; coding
/// failures are reported in the result's flags.
pub fn run_trial(
    target: &JointPmf,
    joint6: &JointPmf,
    scheme: SimScheme,
    n: usize,
    delta: f64,
    epsilon: f64,
    seed: u64,
) -> Result<TrialResult> {
    TrialPlan::new(target, joint6, scheme, n, delta, epsilon)?.run(seed)
}
