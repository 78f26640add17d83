mod common;

use common::{hb_oracle, mi_oracle, random_kernel, random_pmf, star_oracle};
use coordcap::dsbs_examples::key_dist_factorization;
use coordcap::finite_prob::{Alphabet, JointPmf, Kernel};
use coordcap::rate_region::vars::{U, V, W, X, Y, Z};
use coordcap::rate_region::{
    dominates_convex_combination, inner_corner_r1, inner_corner_r2, search_inner_bound,
    search_outer_bound, AuxFactorization, AuxSizes, CloudPoint, RateTriple, RegionCloud,
    RegionError, Sampler, Scheme,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    joint: JointPmf,
}

fn alph(name: &str, rng: &mut ChaCha8Rng, lo: usize) -> Alphabet {
    Alphabet::indexed(name, rng.gen_range(lo..=3))
}

/// Random `p(x,y)` and random kernels for `scheme`. `degenerate_v` and
/// `degenerate_w` make `V` or `W` a singleton; `functional_y` forces `Y = f(X)`.
fn instance(seed: u64, scheme: Scheme, degenerate_w: bool, degenerate_v: bool, functional_y: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = alph(X, &mut rng, 2);
    let y = alph(Y, &mut rng, 1);
    let z = alph(Z, &mut rng, 1);
    let u = alph(U, &mut rng, 1);
    let v = if degenerate_v { Alphabet::singleton(V) } else { alph(V, &mut rng, 1) };
    let w = if degenerate_w { Alphabet::singleton(W) } else { alph(W, &mut rng, 1) };
    let base = if functional_y {
        let f: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..y.len())).collect();
        let px = random_pmf(&mut rng, vec![x.clone()]);
        let k = Kernel::deterministic(vec![x.clone()], y.clone(), |t| f[t[0]]).unwrap();
        px.compose(&[k]).unwrap()
    } else {
        random_pmf(&mut rng, vec![x.clone(), y.clone()])
    };
    let mut k = |inputs: &[&Alphabet], out: &Alphabet| {
        random_kernel(&mut rng, inputs.iter().map(|a| (*a).clone()).collect(), out.clone())
    };
    let kernels = match scheme {
        Scheme::R1 => vec![
            k(&[&x], &u),
            k(&[&u, &x], &v),
            k(&[&u, &x], &w),
            k(&[&y, &u, &v, &w], &z),
        ],
        _ => vec![
            k(&[&x], &u),
            k(&[&u, &x], &v),
            k(&[&u, &y], &w),
            k(&[&x, &u, &w], &z),
        ],
    };
    let fact = AuxFactorization::new(scheme, kernels).unwrap();
    Instance {
        joint: fact.compose(&base).unwrap(),
    }
}

fn check_against(got: Result<RateTriple, RegionError>, expect: [f64; 3]) {
    if expect.iter().any(|&e| e < -1e-9) {
        assert!(matches!(got, Err(RegionError::NegativeRate { .. })), "{got:?} vs {expect:?}");
        return;
    }
    let got = got.unwrap().as_array();
    for (g, e) in got.iter().zip(expect) {
        assert!((g - e.max(0.0)).abs() < 1e-10, "{got:?} vs {expect:?}");
    }
}

#[test]
fn inner_corners_match_direct_sums() {
    for seed in 0..100 {
        let j = instance(seed, Scheme::R1, false, false, false).joint;
        let mi = |a: &[&str], b: &[&str], c: &[&str]| mi_oracle(&j, a, b, c);
        let expect = [
            mi(&[X], &[U, V], &[Y]),
            mi(&[X], &[U], &[]) + mi(&[V, Y], &[Z], &[U]) - mi(&[W], &[Z], &[U]),
            mi(&[X], &[W], &[U]),
        ];
        check_against(inner_corner_r1(&j), expect);

        let j = instance(seed, Scheme::R2, false, false, false).joint;
        let mi = |a: &[&str], b: &[&str], c: &[&str]| mi_oracle(&j, a, b, c);
        let expect = [
            mi(&[X], &[U, V], &[Y]),
            mi(&[X], &[U], &[]) + mi(&[V, Y], &[W], &[U]),
            mi(&[X], &[Z], &[U]) - mi(&[W], &[Z], &[U]),
        ];
        check_against(inner_corner_r2(&j), expect);
    }
}

#[test]
fn degenerate_w_gives_the_cascade_corner() {
    for seed in 0..100 {
        let j = instance(1000 + seed, Scheme::R1, true, false, false).joint;
        let mi = |a: &[&str], b: &[&str], c: &[&str]| mi_oracle(&j, a, b, c);
        let expect = [
            mi(&[X], &[U, V], &[Y]),
            mi(&[X], &[U], &[]) + mi(&[V, Y], &[Z], &[U]),
            0.0,
        ];
        check_against(inner_corner_r1(&j), expect);
    }
}

#[test]
fn functional_side_information_needs_no_direct_link() {
    for seed in 0..100 {
        let j = instance(2000 + seed, Scheme::R1, true, true, true).joint;
        let c = inner_corner_r1(&j).unwrap();
        assert!(c.r3.abs() < 1e-10);
        assert!((c.r1 - mi_oracle(&j, &[X], &[U], &[Y])).abs() < 1e-10);
    }
}

fn key_target(p_agree: f64) -> JointPmf {
    let base = JointPmf::doubly_symmetric(X, Y, p_agree).unwrap();
    let copy = Kernel::copy(base.alphabet(X).unwrap(), Z).unwrap();
    base.compose(&[copy]).unwrap()
}

fn key_corner(crossover: f64, alpha: f64) -> RateTriple {
    RateTriple {
        r1: hb_oracle(star_oracle(crossover, alpha)) - hb_oracle(alpha),
        r2: 1.0 - hb_oracle(alpha),
        r3: hb_oracle(alpha),
    }
}

fn rows_identical(k: &Kernel) -> bool {
    (1..k.num_rows()).all(|r| k.row_at(r) == k.row_at(0))
}

/// Returns the crossover when `k` is a binary symmetric channel.
fn bsc_crossover(k: &Kernel) -> Option<f64> {
    if k.output().len() != 2 || k.num_rows() != 2 {
        return None;
    }
    let (r0, r1) = (k.row_at(0), k.row_at(1));
    ((r0[0] - r1[1]).abs() < 1e-12 && (r0[1] - r1[0]).abs() < 1e-12).then_some(r0[1])
}

fn is_copy_of_x(k: &Kernel) -> bool {
    let pos = k.input_names().iter().position(|n| *n == X);
    let Some(pos) = pos else { return false };
    let sizes: Vec<usize> = k.inputs().iter().map(Alphabet::len).collect();
    (0..k.num_rows()).all(|r| {
        let stride: usize = sizes[pos + 1..].iter().product();
        let x = (r / stride) % sizes[pos];
        k.row_at(r)[x] == 1.0
    })
}

#[test]
fn random_search_finds_the_key_distribution_corners() {
    let target = key_target(0.89);
    let cloud = search_inner_bound(
        &target,
        AuxSizes::default(),
        Sampler::Random { count: 10_000, seed: 1 },
        1e-9,
    )
    .unwrap();
    let mut found = 0;
    for p in cloud.filter_scheme(Scheme::R2).points() {
        let f = &p.provenance;
        let Some(alpha) = bsc_crossover(f.kernel(U).unwrap()) else { continue };
        if !(rows_identical(f.kernel(V).unwrap())
            && rows_identical(f.kernel(W).unwrap())
            && is_copy_of_x(f.kernel(Z).unwrap()))
        {
            continue;
        }
        let c = key_corner(0.11, alpha);
        let (_, d) = cloud.nearest(&c).unwrap();
        assert!(d < 1e-3, "alpha {alpha}: nearest at {d}");
        assert!(cloud.contains(&c, 1e-3));
        found += 1;
    }
    assert!(found > 0);
    assert!(!cloud.contains(&RateTriple::ZERO, 1e-6));
}

#[test]
fn constant_target_needs_no_communication() {
    let base = JointPmf::doubly_symmetric(X, Y, 0.8).unwrap();
    let z = Kernel::deterministic(vec![base.alphabet(X).unwrap().clone()], Alphabet::binary(Z), |_| 0)
        .unwrap();
    let target = base.compose(&[z]).unwrap();
    let cloud = search_inner_bound(
        &target,
        AuxSizes::default(),
        Sampler::Random { count: 2000, seed: 3 },
        1e-9,
    )
    .unwrap();
    let (_, d) = cloud.nearest(&RateTriple::ZERO).unwrap();
    assert!(d < 1e-12);
    assert!(cloud.contains(&RateTriple::ZERO, 1e-12));
}

#[test]
fn grid_search_over_the_key_distribution() {
    let target = key_target(0.7);
    let sizes = AuxSizes { u: 2, v: 1, w: 1 };
    let cloud = search_inner_bound(&target, sizes, Sampler::Grid { step: 0.25 }, 1e-9).unwrap();
    for alpha in [0.0, 0.25, 0.5] {
        let c = key_corner(0.3, alpha);
        let (_, d) = cloud.nearest(&c).unwrap();
        assert!(d < 1e-9, "alpha {alpha}: {d}");
    }
    // Every kept point is a grid kernel with a well-defined corner.
    for p in cloud.points() {
        for k in p.provenance.kernels() {
            assert!(k.entries().iter().all(|e| (e * 4.0 - (e * 4.0).round()).abs() < 1e-12));
        }
    }
}

#[test]
fn grid_with_too_many_parameters_is_refused() {
    let target = key_target(0.7);
    let err = search_inner_bound(&target, AuxSizes::default(), Sampler::Grid { step: 0.5 }, 1e-9)
        .unwrap_err();
    assert!(matches!(err, RegionError::GridTooLarge { .. }));
}

#[test]
fn random_search_is_reproducible() {
    let target = key_target(0.7);
    let run = |count| {
        search_inner_bound(&target, AuxSizes::default(), Sampler::Random { count, seed: 1 }, 1e-9)
            .unwrap()
    };
    let a = run(10_000);
    assert_eq!(a.to_json_lines(), run(10_000).to_json_lines());
    // A longer run with the same seed extends the shorter one.
    let small = run(500);
    let big = run(2000);
    assert!(big.len() >= small.len());
    for p in small.points() {
        let (_, d) = big.nearest(&p.rates).unwrap();
        assert!(d <= 2e-9);
    }
    let back = RegionCloud::from_json_lines(&a.to_json_lines()).unwrap();
    assert_eq!(back.to_json_lines(), a.to_json_lines());
}

#[test]
fn outer_search_respects_entropy_bounds() {
    let target = key_target(0.7);
    let cloud = search_outer_bound(&target, AuxSizes::default(), 2000, 5).unwrap();
    let h_xy = 1.0 + hb_oracle(0.3);
    for p in cloud.points() {
        assert_eq!(p.scheme(), Scheme::Outer);
        assert!(p.rates.r1 <= hb_oracle(0.3) + 1e-9);
        assert!(p.rates.r2 <= h_xy + 1e-9);
        assert!(p.rates.r3 <= 1.0 + 1e-9);
    }
    assert_eq!(
        cloud.to_json_lines(),
        search_outer_bound(&target, AuxSizes::default(), 2000, 5).unwrap().to_json_lines()
    );
}

fn hand_cloud(points: &[[f64; 3]]) -> RegionCloud {
    let provenance = key_dist_factorization(0.1).unwrap();
    RegionCloud::from_points(
        points
            .iter()
            .map(|p| CloudPoint {
                rates: RateTriple { r1: p[0], r2: p[1], r3: p[2] },
                provenance: provenance.clone(),
            })
            .collect(),
    )
}

#[test]
fn membership_examples() {
    let cloud = hand_cloud(&[[0.2, 0.5, 0.1], [0.0, 0.9, 0.4], [0.4, 0.6, 0.0]]);
    assert!(!cloud.contains(&RateTriple::ZERO, 1e-9));
    assert!(cloud.contains(&RateTriple { r1: 0.2, r2: 0.5, r3: 0.1 }, 1e-12));
    // Midpoint of two corners.
    assert!(cloud.contains(&RateTriple { r1: 0.3, r2: 0.55, r3: 0.05 }, 1e-9));
    assert!(!cloud.contains(&RateTriple { r1: 1.0, r2: 0.49, r3: 1.0 }, 1e-9));
    assert!(cloud.contains(&RateTriple { r1: 5.0, r2: 5.0, r3: 5.0 }, 0.0));
}

fn primal_grid_contains(points: &[[f64; 3]], b: [f64; 3], parts: usize) -> bool {
    fn rec(points: &[[f64; 3]], b: [f64; 3], parts: usize, left: usize, i: usize, acc: [f64; 3]) -> bool {
        let w = |c: usize| c as f64 / parts as f64;
        if i + 1 == points.len() {
            let s = [0, 1, 2].map(|k| acc[k] + w(left) * points[i][k]);
            return (0..3).all(|k| s[k] <= b[k]);
        }
        (0..=left).any(|c| {
            let next = [0, 1, 2].map(|k| acc[k] + w(c) * points[i][k]);
            rec(points, b, parts, left - c, i + 1, next)
        })
    }
    rec(points, b, parts, parts, 0, [0.0; 3])
}

/// Largest `min_i y.(p_i - b)` over a lattice of non-negative unit-sum `y`.
fn dual_grid_separation(points: &[[f64; 3]], b: [f64; 3], parts: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=parts {
        for j in 0..=parts - i {
            let y = [i, j, parts - i - j].map(|c| c as f64 / parts as f64);
            let m = points
                .iter()
                .map(|p| (0..3).map(|k| y[k] * (p[k] - b[k])).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            best = best.max(m);
        }
    }
    best
}

fn point3() -> impl Strategy<Value = [f64; 3]> {
    [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hull_membership_agrees_with_grid_oracles(
        points in prop::collection::vec(point3(), 1..5),
        b in [0.0..1.2f64, 0.0..1.2f64, 0.0..1.2f64],
    ) {
        let lp = dominates_convex_combination(&points, b);
        if primal_grid_contains(&points, b, 12) {
            prop_assert!(lp);
        }
        if dual_grid_separation(&points, b, 40) > 1e-6 {
            prop_assert!(!lp);
        }
        if lp {
            prop_assert!(dual_grid_separation(&points, b, 40) <= 1e-9);
        }
    }

    #[test]
    fn membership_is_monotone(
        points in prop::collection::vec(point3(), 1..5),
        b in point3(),
        lift in point3(),
    ) {
        let cloud = hand_cloud(&points);
        let t = RateTriple { r1: b[0], r2: b[1], r3: b[2] };
        let up = RateTriple { r1: b[0] + lift[0], r2: b[1] + lift[1], r3: b[2] + lift[2] };
        if cloud.contains(&t, 0.0) {
            prop_assert!(cloud.contains(&up, 0.0));
        }
        for p in &points {
            let q = RateTriple { r1: p[0], r2: p[1], r3: p[2] };
            prop_assert!(cloud.contains(&q, 1e-12));
        }
    }
}
