//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here calls the crate's entropy or mutual-information code: the
//! dense masses are read through `for_each` and every measure is a direct
//! sum over tuples.
#![allow(dead_code)]

use std::collections::HashMap;

use coordcap::finite_prob::{Alphabet, JointPmf, Kernel};
use rand::Rng;

fn key(t: &[usize], pos: &[usize]) -> Vec<usize> {
    pos.iter().map(|&p| t[p]).collect()
}

/// `I(A;B|C)` by the direct sum
/// `Σ p(a,b,c) log2(p(a,b,c) p(c) / (p(a,c) p(b,c)))`.
pub fn mi_oracle(p: &JointPmf, a: &[&str], b: &[&str], c: &[&str]) -> f64 {
    let names = p.names();
    let pos = |g: &[&str]| -> Vec<usize> {
        g.iter()
            .map(|n| names.iter().position(|m| m == n).expect("variable exists"))
            .collect()
    };
    let (pa, pb, pc) = (pos(a), pos(b), pos(c));
    let abc: Vec<usize> = pa.iter().chain(&pb).chain(&pc).copied().collect();
    let ac: Vec<usize> = pa.iter().chain(&pc).copied().collect();
    let bc: Vec<usize> = pb.iter().chain(&pc).copied().collect();
    let mut m_abc: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut m_ac: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut m_bc: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut m_c: HashMap<Vec<usize>, f64> = HashMap::new();
    p.for_each(|t, m| {
        *m_abc.entry(key(t, &abc)).or_default() += m;
        *m_ac.entry(key(t, &ac)).or_default() += m;
        *m_bc.entry(key(t, &bc)).or_default() += m;
        *m_c.entry(key(t, &pc)).or_default() += m;
    });
    let mut total = 0.0;
    for (k, &pabc) in &m_abc {
        if pabc <= 0.0 {
            continue;
        }
        let ka = &k[..pa.len()];
        let kb = &k[pa.len()..pa.len() + pb.len()];
        let kc = &k[pa.len() + pb.len()..];
        let kac: Vec<usize> = ka.iter().chain(kc).copied().collect();
        let kbc: Vec<usize> = kb.iter().chain(kc).copied().collect();
        let ratio = pabc * m_c[kc] / (m_ac[&kac] * m_bc[&kbc]);
        total += pabc * ratio.log2();
    }
    total
}

/// `H(A)` by direct summation.
pub fn entropy_oracle(p: &JointPmf, a: &[&str]) -> f64 {
    let names = p.names();
    let pa: Vec<usize> = a
        .iter()
        .map(|n| names.iter().position(|m| m == n).unwrap())
        .collect();
    let mut m: HashMap<Vec<usize>, f64> = HashMap::new();
    p.for_each(|t, q| *m.entry(key(t, &pa)).or_default() += q);
    -m.values().filter(|&&q| q > 0.0).map(|q| q * q.log2()).sum::<f64>()
}

pub fn hb_oracle(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

pub fn star_oracle(x: f64, y: f64) -> f64 {
    x + y - 2.0 * x * y
}

/// Strictly positive random pmf row of length `k`.
pub fn random_row<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random row that is sometimes sparse or deterministic.
pub fn random_row_mixed<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    match rng.gen_range(0..4) {
        0 => {
            let mut r = vec![0.0; k];
            r[rng.gen_range(0..k)] = 1.0;
            r
        }
        1 => {
            let mut r: Vec<f64> = (0..k)
                .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..1.0) } else { 0.0 })
                .collect();
            if r.iter().sum::<f64>() == 0.0 {
                r[0] = 1.0;
            }
            let s: f64 = r.iter().sum();
            r.iter_mut().for_each(|v| *v /= s);
            r
        }
        _ => random_row(rng, k),
    }
}

pub fn random_kernel<R: Rng>(rng: &mut R, inputs: Vec<Alphabet>, output: Alphabet) -> Kernel {
    let rows: usize = inputs.iter().map(Alphabet::len).product();
    let k = output.len();
    let rows = (0..rows).map(|_| random_row_mixed(rng, k)).collect();
    Kernel::new(inputs, output, rows).unwrap()
}

pub fn random_pmf<R: Rng>(rng: &mut R, vars: Vec<Alphabet>) -> JointPmf {
    let size: usize = vars.iter().map(Alphabet::len).product();
    JointPmf::new(vars, random_row_mixed(rng, size)).unwrap()
}

/// Welch's t statistic and Welch–Satterthwaite degrees of freedom.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let stats = |s: &[f64]| {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        let v = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2.powi(2) / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    (t, df)
}
