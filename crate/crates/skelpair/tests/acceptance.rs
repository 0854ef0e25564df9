//! Acceptance suite: one test per shipped guarantee, each checked at its
//! stated tolerance. The criteria fall into three groups: exact degree
//! and vanishing facts about the intersection ring (c1-c4), coherence of
//! the exact, limit, and closed-form pairing routes (c5-c7), and
//! algebraic/analytic identities of the surrounding machinery (c8-c9).

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num::traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skelpair::chow::{
    build_degree_table, check_vanishing, f_degree, f_degree_table, BitVec, DegreeTable,
};
use skelpair::func::{fourier_delta, AnyFunction, ExprFunction, GridFunction, Smoothness};
use skelpair::pairing::{
    convergence_table, counterexample_triple, pair_cube3, pair_exact, pair_limit, pair_zhang2,
};
use skelpair::rat::{format_rat, rat, rat_int, Rat};
use skelpair::skeleton::{all_partitions, cells, charts, point_partition_rat, Graph};

fn interval() -> Graph {
    Graph::interval()
}

/// Shared degree tables for d = 1, 2, 3, with the vanishing condition
/// checked so the limit pairing accepts them.
fn verified_table(d: usize) -> &'static DegreeTable {
    const NEW: OnceLock<DegreeTable> = OnceLock::new();
    static TABLES: [OnceLock<DegreeTable>; 3] = [NEW; 3];
    TABLES[d - 1].get_or_init(|| {
        let t = build_degree_table(d).expect("degree table for d <= 3 fits the default budget");
        let report = check_vanishing(&t);
        assert!(
            report.violations.is_empty(),
            "vanishing precheck for the shared d={d} table found violations"
        );
        t
    })
}

fn bv(d: usize, bits: u16) -> BitVec {
    BitVec::new(d, bits)
}

fn expr_fn(d: usize, src: &str) -> ExprFunction {
    ExprFunction::new(
        interval(),
        d,
        Smoothness::Cubes,
        &[("*".to_string(), src.to_string())],
    )
    .expect("battery expression should parse")
}

// c1: the d=2 degree functional on Fourier cubes. Exactly -32 on the
// triple of full diagonals, 16 on every ordering of the two half
// diagonals with the full one, and 0 on all other degree-3 tuples.
#[test]
fn c1_degree_goldens_d2() {
    let start = Instant::now();
    let t = build_degree_table(2).expect("d=2 degree table");
    for v0 in 0..4u16 {
        for v1 in 0..4u16 {
            for v2 in 0..4u16 {
                let tuple = [bv(2, v0), bv(2, v1), bv(2, v2)];
                let got = f_degree(&tuple, &t).expect("degree of a d=2 triple");
                let mut sorted = [v0, v1, v2];
                sorted.sort_unstable();
                let expected = if sorted == [3, 3, 3] {
                    rat_int(-32)
                } else if sorted == [1, 2, 3] {
                    rat_int(16)
                } else {
                    rat_int(0)
                };
                assert_eq!(
                    got, expected,
                    "f-degree of the ordered tuple ({v0:02b},{v1:02b},{v2:02b})"
                );
            }
        }
    }
    assert!(
        start.elapsed() < Duration::from_secs(1),
        "d=2 goldens took {:?}, budget is 1 s",
        start.elapsed()
    );
}

// c2: the d=3 degree functional on weight-6 Fourier quadruples. Exactly
// 64 on the four carrying multisets, 0 on every other tuple of total
// weight 6.
#[test]
fn c2_degree_goldens_d3() {
    const CARRYING: [[u16; 4]; 4] = [[1, 2, 4, 7], [1, 2, 5, 6], [1, 3, 4, 6], [2, 3, 4, 5]];
    let start = Instant::now();
    let t = build_degree_table(3).expect("d=3 degree table");
    let mut carrying_hits = 0u32;
    let mut mismatches = Vec::new();
    for code in 0..4096u32 {
        let masks = [
            (code >> 9 & 7) as u16,
            (code >> 6 & 7) as u16,
            (code >> 3 & 7) as u16,
            (code & 7) as u16,
        ];
        let weight: u32 = masks.iter().map(|m| m.count_ones()).sum();
        if weight != 6 {
            continue;
        }
        let tuple: Vec<BitVec> = masks.iter().map(|&m| bv(3, m)).collect();
        let got = f_degree(&tuple, &t).expect("degree of a d=3 quadruple");
        let mut sorted = masks;
        sorted.sort_unstable();
        let expected = if CARRYING.contains(&sorted) {
            carrying_hits += 1;
            rat_int(64)
        } else {
            rat_int(0)
        };
        if got != expected {
            mismatches.push(format!(
                "{masks:?}: got {}, expected {}",
                format_rat(&got),
                format_rat(&expected)
            ));
        }
    }
    assert_eq!(
        carrying_hits, 96,
        "each of the 4 carrying multisets has 24 orderings"
    );
    assert!(
        start.elapsed() < Duration::from_secs(60),
        "d=3 goldens took {:?}, budget is 60 s",
        start.elapsed()
    );
    assert!(
        mismatches.is_empty(),
        "{} of {} weight-6 quadruples disagree with the golden values \
         (first 8 shown): {}",
        mismatches.len(),
        4096,
        mismatches
            .iter()
            .take(8)
            .cloned()
            .collect::<Vec<_>>()
            .join("; ")
    );
}

// c3: the vanishing condition (degree 0 whenever the alpha sum is below
// d+|P|) holds with zero violations for d = 1, 2, 3, and the d=4 table
// is a stretch job that must either verify cleanly or report its failure
// mode explicitly.
#[test]
fn c3_vanishing_condition() {
    for d in 1..=3usize {
        let t = build_degree_table(d).expect("degree table for d <= 3");
        let report = check_vanishing(&t);
        assert!(
            report.violations.is_empty(),
            "d={d}: {} vanishing violations, first {:?}",
            report.violations.len(),
            report.violations.first()
        );
        assert!(report.checked > 0, "d={d}: the scan must test real pairs");
        assert!(
            t.vanishing_verified(),
            "d={d}: a clean scan must mark the table verified"
        );
    }
    match build_degree_table(4) {
        Ok(t) => {
            let report = check_vanishing(&t);
            assert!(
                report.violations.is_empty(),
                "d=4 stretch: {} vanishing violations, first {:?}",
                report.violations.len(),
                report.violations.first()
            );
        }
        Err(e) => panic!("d=4 stretch build reported: {e}"),
    }
}

// c4: the oscillating triple at level n. The claim under test is that
// its exact pairing equals n for n = 1..8.
#[test]
fn c4_oscillating_counterexample() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for n in 1..=8u32 {
        let (_, value) = counterexample_triple(n).expect("oscillating triple pairing");
        if value != rat_int(n as i64) {
            mismatches.push(format!("n={n}: got {}", format_rat(&value)));
        }
    }
    assert!(
        start.elapsed() < Duration::from_secs(10),
        "oscillating triples took {:?}, budget is 10 s",
        start.elapsed()
    );
    assert!(
        mismatches.is_empty(),
        "oscillating triple pairings should equal n exactly: {}",
        mismatches.join("; ")
    );
}

// c5: on the interval with d=1 the exact pairing collapses to
// -sum over cells of n * (step of f0) * (step of f1), i.e. the discrete
// Dirichlet energy form. Checked exactly on 100 seeded random pairs.
#[test]
fn c5_d1_closed_form_coherence() {
    let t = verified_table(1);
    let graph = interval();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0001);
    for case in 0..100 {
        let n = rng.gen_range(1..=8u32);
        let sample = |rng: &mut ChaCha8Rng| -> Vec<Rat> {
            (0..=n)
                .map(|_| rat(rng.gen_range(-12..=12), rng.gen_range(1..=4)))
                .collect()
        };
        let v0 = sample(&mut rng);
        let v1 = sample(&mut rng);
        let g0 = GridFunction::new(graph.clone(), 1, n, vec![v0.clone()])
            .expect("random d=1 grid");
        let g1 = GridFunction::new(graph.clone(), 1, n, vec![v1.clone()])
            .expect("random d=1 grid");
        let report = pair_exact(&[&g0, &g1], t).expect("d=1 exact pairing");
        let got = report.exact_value().expect("exact route yields a rational");

        let mut energy = Rat::zero();
        for i in 0..n as usize {
            energy += (&v0[i + 1] - &v0[i]) * (&v1[i + 1] - &v1[i]);
        }
        let oracle = -energy * rat_int(n as i64);
        assert_eq!(
            got, &oracle,
            "case {case} (n={n}): pairing vs negative Dirichlet form"
        );
    }
}

// c6: on Gamma^2 the table-driven limit pairing and the closed-form
// triple pairing agree on every ordered battery triple, and the exact
// pairings of the standard approximations converge to the limit with
// the empirically expected rate (a regression guard, not a theorem).
#[test]
fn c6_d2_limit_coherence_and_convergence() {
    let t = verified_table(2);
    let battery = [
        expr_fn(2, "x1*x2"),
        expr_fn(2, "sin(pi*x1)*x2"),
        expr_fn(2, "x1^2+x2^2"),
    ];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let (_, _, total) =
                    pair_zhang2(&battery[i], &battery[j], &battery[k], 16)
                        .expect("closed-form triple pairing");
                let limit = pair_limit(&[&battery[i], &battery[j], &battery[k]], t, 16)
                    .expect("partition-formula pairing")
                    .value_f64();
                assert!(
                    (total - limit).abs() <= 1e-6,
                    "triple ({i},{j},{k}): closed form {total} vs partition formula {limit}"
                );
            }
        }
    }

    let fs = [&battery[0], &battery[1], &battery[2]];
    let rows = convergence_table(&fs, &[4, 8, 16, 32], t, 256)
        .expect("convergence table of the battery triple");
    assert_eq!(rows.len(), 4, "one row per requested level");
    for row in &rows {
        assert!(
            row.gap > 0.0,
            "gap at n={} is {}, expected positive",
            row.n,
            row.gap
        );
    }
    for pair in rows.windows(2) {
        assert!(
            pair[1].gap < pair[0].gap,
            "gap should shrink from n={} ({}) to n={} ({})",
            pair[0].n,
            pair[0].gap,
            pair[1].n,
            pair[1].gap
        );
    }
    assert!(
        rows[3].gap <= rows[0].gap / 4.0,
        "rate guard: gap(32)={} exceeds gap(4)/4={}",
        rows[3].gap,
        rows[0].gap / 4.0
    );
}

// c7: on Gamma^3 the closed-form cube-smooth pairing agrees with the
// table-driven limit pairing on battery quadruples, and the derived
// quadruple (x1, x2, x3, x1*x2*x3) pairs to exactly 1. Both routes
// enumerate argument slots symmetrically, so unordered multisets cover
// the ordered quadruples; one permuted pair witnesses that.
#[test]
fn c7_d3_cube_smooth_coherence() {
    let t = verified_table(3);
    let battery = [
        expr_fn(3, "x1*x2*x3"),
        expr_fn(3, "x1+x2+x3"),
        expr_fn(3, "sin(pi*x1)*x2*x3"),
    ];
    let mut mismatches = Vec::new();
    for i0 in 0..3 {
        for i1 in i0..3 {
            for i2 in i1..3 {
                for i3 in i2..3 {
                    let fs = [&battery[i0], &battery[i1], &battery[i2], &battery[i3]];
                    let cube = pair_cube3(&fs, 16).expect("closed-form quadruple pairing");
                    let limit = pair_limit(&fs, t, 16)
                        .expect("partition-formula pairing")
                        .value_f64();
                    if (cube - limit).abs() > 1e-5 {
                        mismatches.push(format!(
                            "({i0},{i1},{i2},{i3}): closed form {cube} vs partition formula {limit}"
                        ));
                    }
                }
            }
        }
    }
    assert!(
        mismatches.is_empty(),
        "{} of 15 battery quadruples disagree across the two routes: {}",
        mismatches.len(),
        mismatches.join("; ")
    );

    let ordered = pair_cube3(&[&battery[2], &battery[0], &battery[0], &battery[1]], 16)
        .expect("permuted quadruple");
    let sorted = pair_cube3(&[&battery[0], &battery[0], &battery[1], &battery[2]], 16)
        .expect("sorted quadruple");
    assert!(
        (ordered - sorted).abs() <= 1e-9,
        "argument order must not matter: {ordered} vs {sorted}"
    );

    let coords = [
        expr_fn(3, "x1"),
        expr_fn(3, "x2"),
        expr_fn(3, "x3"),
        expr_fn(3, "x1*x2*x3"),
    ];
    let fs = [&coords[0], &coords[1], &coords[2], &coords[3]];
    let derived = pair_cube3(&fs, 16).expect("derived quadruple");
    assert!(
        (derived - 1.0).abs() <= 1e-6,
        "pairing of (x1, x2, x3, x1*x2*x3) is {derived}, expected 1"
    );
    let derived_limit = pair_limit(&fs, t, 16)
        .expect("derived quadruple via partition formula")
        .value_f64();
    assert!(
        (derived_limit - 1.0).abs() <= 1e-5,
        "partition formula gives {derived_limit} on the derived quadruple, expected 1"
    );
}

// c8: the exact pairing is multilinear, symmetric in its arguments,
// annihilates constants, and is invariant under refining affine grids,
// all as identities of rational numbers on seeded random d=2 instances.
#[test]
fn c8_exact_pairing_algebra() {
    let t = verified_table(2);
    let graph = interval();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0002);
    let corner_count = |n: u32| (n as usize + 1) * (n as usize + 1);
    for case in 0..100 {
        let n = rng.gen_range(1..=4u32);
        let rand_grid = |rng: &mut ChaCha8Rng| -> GridFunction {
            let values = (0..corner_count(n))
                .map(|_| rat(rng.gen_range(-8..=8), rng.gen_range(1..=4)))
                .collect();
            GridFunction::new(graph.clone(), 2, n, vec![values]).expect("random d=2 grid")
        };
        let f0 = rand_grid(&mut rng);
        let f1 = rand_grid(&mut rng);
        let f2 = rand_grid(&mut rng);
        let g = rand_grid(&mut rng);
        let value = |fs: &[&GridFunction]| -> Rat {
            pair_exact(fs, t)
                .expect("d=2 exact pairing")
                .exact_value()
                .expect("exact route yields a rational")
                .clone()
        };
        let base = value(&[&f0, &f1, &f2]);

        let a = rat(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        let b = rat(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        let combo = f0.scale(&a).add(&g.scale(&b)).expect("grid combination");
        let lhs = value(&[&combo, &f1, &f2]);
        let rhs = &a * &base + &b * &value(&[&g, &f1, &f2]);
        assert_eq!(lhs, rhs, "case {case}: multilinearity in the first slot");

        let args = [&f0, &f1, &f2];
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let permuted = value(&[args[perm[0]], args[perm[1]], args[perm[2]]]);
            assert_eq!(permuted, base, "case {case}: symmetry under {perm:?}");
        }

        let c = GridFunction::constant(graph.clone(), 2, n, rat(rng.gen_range(-5..=5), 2))
            .expect("constant grid");
        assert!(
            value(&[&c, &f1, &f2]).is_zero(),
            "case {case}: pairing against a constant must vanish"
        );

        let k = rng.gen_range(2..=3u32) * n;
        let refined = [
            f0.refine(k).expect("refined grid"),
            f1.refine(k).expect("refined grid"),
            f2.refine(k).expect("refined grid"),
        ];
        let refined_value = value(&[&refined[0], &refined[1], &refined[2]]);
        assert_eq!(
            refined_value, base,
            "case {case}: refining level {n} to {k} must not change the pairing"
        );
    }
}

// c9: analysis identities of the difference calculus. Four parts:
// inverting the Fourier differences recovers the corner values; halving
// h cuts the stencil error of polynomial mixed partials by at least 3x;
// the subinterval identity relating ambient and diagonal sums of
// cell-constant functions holds exactly on I^2 and I^3; and the degree
// functional vanishes on every multiset of odd total weight.
#[test]
fn c9_analysis_suite() {
    fourier_inversion_part();
    h_halving_part();
    subinterval_identity_part();
    parity_part();
}

fn fourier_inversion_part() {
    let cases: [(usize, &str, Vec<f64>); 3] = [
        (1, "sin(pi*x1)+x1^2", vec![0.3]),
        (2, "sin(pi*x1)*x2^2+x1*x2", vec![0.3, 0.45]),
        (3, "sin(pi*x1)*x2^2+x3^3", vec![0.3, 0.45, 0.55]),
    ];
    let h = 0.125;
    for (d, src, x) in &cases {
        let d = *d;
        let f = expr_fn(d, src);
        let any = AnyFunction::Expr(f.clone());
        let chart = charts(f.graph(), d)[0].clone();
        let deltas: Vec<f64> = (0..1u16 << d)
            .map(|m| {
                fourier_delta(&any, &chart, x, bv(d, m), h)
                    .expect("difference inside the open cube")
            })
            .collect();
        for w in 0..1u16 << d {
            let corner: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(j, &xj)| if w >> j & 1 == 1 { xj - h } else { xj + h })
                .collect();
            let direct = f.eval(&chart, &corner).expect("corner evaluation");
            let mut reconstructed = 0.0;
            for (m, delta) in deltas.iter().enumerate() {
                let sign = if (m as u16 & w).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                reconstructed += sign * delta;
            }
            assert!(
                (reconstructed - direct).abs() <= 1e-12,
                "d={d}, corner {w:b}: inversion gives {reconstructed}, direct {direct}"
            );
        }
    }
}

fn h_halving_part() {
    let steps = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];

    let f1 = expr_fn(1, "x1^3");
    let any1 = AnyFunction::Expr(f1.clone());
    let chart1 = charts(f1.graph(), 1)[0].clone();
    let x1 = [0.45];
    let true1 = 3.0 * x1[0] * x1[0];
    let err1: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let delta = fourier_delta(&any1, &chart1, &x1, bv(1, 1), h)
                .expect("d=1 difference");
            (delta / h - true1).abs()
        })
        .collect();
    for pair in err1.windows(2) {
        assert!(
            pair[0] >= 3.0 * pair[1],
            "d=1 stencil error must drop 3x per halving: {} then {}",
            pair[0],
            pair[1]
        );
    }

    let f2 = expr_fn(2, "x1^3*x2^3");
    let any2 = AnyFunction::Expr(f2.clone());
    let chart2 = charts(f2.graph(), 2)[0].clone();
    let x2 = [0.4, 0.35];
    let true2 = 9.0 * x2[0] * x2[0] * x2[1] * x2[1];
    let err2: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let delta = fourier_delta(&any2, &chart2, &x2, bv(2, 3), h)
                .expect("d=2 mixed difference");
            (delta / (h * h) - true2).abs()
        })
        .collect();
    for pair in err2.windows(2) {
        assert!(
            pair[0] >= 3.0 * pair[1],
            "d=2 stencil error must drop 3x per halving: {} then {}",
            pair[0],
            pair[1]
        );
    }
}

/// The subinterval identity: for a cell-constant g on Gamma^d and any
/// coincidence pattern P, summing g over ambient lattice cells whose
/// centers realize exactly P equals n^(|P|-d) times the matching sum
/// over cells of the diagonal of P, both sides as exact rationals.
fn subinterval_identity_part() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0003);
    for d in [2usize, 3] {
        let graph = interval();
        let chart_list = charts(&graph, d);
        let partitions = all_partitions(d).expect("partition list");
        for n in 1..=8u32 {
            let mut values: HashMap<(usize, Vec<u32>), Rat> = HashMap::new();
            for (ci, _) in chart_list.iter().enumerate() {
                for cell in cells(d, n) {
                    values.insert((ci, cell), rat(rng.gen_range(-9..=9), rng.gen_range(1..=3)));
                }
            }
            let center = |cell: &[u32]| -> Vec<Rat> {
                cell.iter()
                    .map(|&c| rat(2 * c as i64 + 1, 2 * n as i64))
                    .collect()
            };

            let mut lhs_total = Rat::zero();
            for p in &partitions {
                let mut lhs = Rat::zero();
                for (ci, _) in chart_list.iter().enumerate() {
                    for cell in cells(d, n) {
                        let pattern = point_partition_rat(&center(&cell))
                            .expect("cell centers are inner points");
                        if pattern == *p {
                            lhs += &values[&(ci, cell)];
                        }
                    }
                }
                lhs *= rat(1, (n as i64).pow(d as u32));
                lhs_total += &lhs;

                let k = p.size();
                let block_of = p.block_of();
                let mut rhs = Rat::zero();
                for block_cell in cells(k, n) {
                    let ambient_cell: Vec<u32> =
                        (0..d).map(|j| block_cell[block_of[j]]).collect();
                    let pattern = point_partition_rat(&center(&ambient_cell))
                        .expect("diagonal centers are inner points");
                    if pattern == *p {
                        rhs += &values[&(0, ambient_cell)];
                    }
                }
                rhs *= rat(1, (n as i64).pow(d as u32));
                assert_eq!(
                    lhs, rhs,
                    "subinterval identity at d={d}, n={n}, partition {p}"
                );
            }

            let full: Rat = values.values().sum::<Rat>() * rat(1, (n as i64).pow(d as u32));
            assert_eq!(
                lhs_total, full,
                "coincidence patterns partition the cells at d={d}, n={n}"
            );
        }
    }
}

fn parity_part() {
    for d in 1..=3usize {
        let t = verified_table(d);
        let mut odd_seen = 0u32;
        for (multiset, degree) in f_degree_table(t) {
            let weight: u32 = multiset.iter().map(|v| v.weight()).sum();
            if weight % 2 == 1 {
                odd_seen += 1;
                assert!(
                    degree.is_zero(),
                    "odd total weight forces degree 0, but {multiset:?} has {}",
                    format_rat(&degree)
                );
            }
        }
        assert!(odd_seen > 0, "d={d}: the scan must see odd-weight multisets");
    }
}
