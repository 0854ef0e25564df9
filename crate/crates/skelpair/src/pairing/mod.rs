//! Intersection pairings of d+1 functions on the d-fold power of a graph.
//!
//! Two routes compute the same quantity. The exact pairing works on grid
//! functions at a fixed subdivision level n and is a finite rational sum
//! of degree coefficients times lattice-difference integrals. The limit
//! pairing works on expression functions and evaluates the partition
//! formula: a sum over axis partitions 𝒫 and index tuples (v_0,…,v_d)
//! with Σ α(𝒫,v_i) = d+|𝒫| of scaled degree coefficients times integrals
//! of generalized differentials over the diagonal 𝒟_𝒫.
//!
//! The closed forms for d = 2 (triple pairings through second-order
//! diagonal differentials) and d = 3 (cube-smooth quadruple pairings) are
//! implemented with their published tuple sets and coefficients rather
//! than through the degree table, so they serve as independent checks of
//! the general machinery.

mod report;

pub use report::{convergence_csv, ConvergenceRow, PairingReport, PairingTerm, Scalar};

use std::collections::HashMap;

use num::traits::Pow;
use num::{One, Signed, Zero};
use num_bigint::BigInt;
use thiserror::Error;

use crate::chow::{build_degree_table, f_degree, BitVec, ChowError, DegreeTable};
use crate::func::{
    diagonal_points, generalized_differential, integrate_grid_product, standard_approximation,
    DiagonalPoint, ExprFunction, FuncError, GridFunction, Smoothness,
};
use crate::rat::{rat_to_f64, Rat};
use crate::skeleton::{
    alpha, all_partitions, Chart, Graph, Partition, SkeletonError, EPS_COINCIDE,
};

/// Default quadrature points per axis for diagonal integrals.
pub const DEFAULT_QUADRATURE: u32 = 64;

/// Cap on quadrature points per axis for integrals over three or more
/// axes, keeping the node count of volume integrals bounded.
pub const VOLUME_QUADRATURE_CAP: u32 = 16;

/// Largest d the limit pairing accepts; the vanishing condition is
/// machine-checked here for d up to this bound.
pub const MAX_LIMIT_D: usize = 3;

#[derive(Debug, Error)]
pub enum PairError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error("the vanishing condition has not been verified on this d = {d} degree table")]
    VanishingConditionUnverified { d: usize },
    #[error("function {index} is declared smooth on simplices only; this closed form needs cube-smooth inputs")]
    SmoothnessClassMismatch { index: usize },
    #[error("the limit pairing is guarded to d <= {max}, got d = {d}")]
    TooLarge { d: usize, max: usize },
    #[error("{detail}")]
    Incompatible { detail: String },
}

/// All ordered (d+1)-tuples of index vectors, ascending lexicographically
/// with the first component most significant.
fn mask_tuples(d: usize) -> impl Iterator<Item = Vec<u16>> {
    let base = 1u64 << d;
    let count = base.pow(d as u32 + 1);
    (0..count).map(move |index| {
        let mut tuple = vec![0u16; d + 1];
        let mut rest = index;
        for slot in (0..=d).rev() {
            tuple[slot] = (rest % base) as u16;
            rest /= base;
        }
        tuple
    })
}

fn quadrature_for(m: u32, block_count: usize) -> u32 {
    if block_count >= 3 {
        m.min(VOLUME_QUADRATURE_CAP)
    } else {
        m
    }
}

fn check_quadrature(m: u32) -> Result<(), PairError> {
    if m == 0 {
        return Err(PairError::Incompatible {
            detail: "quadrature needs at least one point per axis".into(),
        });
    }
    Ok(())
}

/// Whether two different blocks of 𝒫 land on the same point of Γ at x,
/// i.e. x lies on a diagonal stratum strictly deeper than 𝒟_𝒫. Blocks on
/// different edges are different points even at equal parameters.
fn blocks_collide(p: &Partition, chart: &Chart, x: &[f64]) -> bool {
    let blocks = p.blocks();
    let edges = chart.edge_indices();
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            let (bi, bj) = (blocks[i][0], blocks[j][0]);
            if edges[bi] == edges[bj] && (x[bi] - x[bj]).abs() <= EPS_COINCIDE {
                return true;
            }
        }
    }
    false
}

/// The integrand factor D^v_a f at a diagonal quadrature node.
///
/// Cube-smooth factors with a < |v| vanish in the limit (the cube
/// difference is of order h^{|v|}), so they short-circuit to exactly 0.
/// Simplex-smooth factors are continuous only on the open stratum of
/// 𝒟_𝒫; nodes that fall on a deeper diagonal carry no measure in the
/// limit and contribute 0 rather than a boundary value.
fn d_value(
    f: &ExprFunction,
    chart: &Chart,
    x: &[f64],
    v: BitVec,
    a: usize,
    p: &Partition,
) -> Result<f64, FuncError> {
    if !v.is_zero() {
        match f.smoothness() {
            Smoothness::Cubes => {
                if a < v.weight() as usize {
                    return Ok(0.0);
                }
            }
            Smoothness::Simplices => {
                if blocks_collide(p, chart, x) {
                    return Ok(0.0);
                }
            }
        }
    }
    generalized_differential(f, chart, x, v, a).map(|(value, _)| value)
}

/// Generalized-differential columns over the quadrature nodes of one
/// diagonal, cached per (function, index vector). Tuples within a
/// partition share factor columns, which keeps the per-point Richardson
/// extrapolation from being repeated across tuples.
struct DiffColumns<'a> {
    fs: &'a [&'a ExprFunction],
    partition: &'a Partition,
    nodes: Vec<DiagonalPoint>,
    alphas: Vec<usize>,
    /// Slot index folded to the first slot holding the same function, so
    /// repeated arguments share one column per mask.
    canon: Vec<usize>,
    weight: f64,
    cache: HashMap<(usize, u16), Vec<f64>>,
}

impl<'a> DiffColumns<'a> {
    fn new(
        graph: &Graph,
        fs: &'a [&'a ExprFunction],
        partition: &'a Partition,
        m: u32,
    ) -> DiffColumns<'a> {
        let d = partition.d();
        let nodes = diagonal_points(graph, partition, m);
        let alphas = (0..1u32 << d)
            .map(|mask| alpha(partition, mask))
            .collect();
        let canon = fs
            .iter()
            .enumerate()
            .map(|(i, f)| {
                (0..i)
                    .find(|&j| std::ptr::eq(fs[j], *f))
                    .unwrap_or(i)
            })
            .collect();
        let weight = (m as f64).powi(-(partition.size() as i32));
        DiffColumns {
            fs,
            partition,
            nodes,
            alphas,
            canon,
            weight,
            cache: HashMap::new(),
        }
    }

    fn alpha_of(&self, mask: u16) -> usize {
        self.alphas[mask as usize]
    }

    fn ensure_column(&mut self, i: usize, mask: u16) -> Result<(), FuncError> {
        let slot = self.canon[i];
        if self.cache.contains_key(&(slot, mask)) {
            return Ok(());
        }
        let v = BitVec::new(self.partition.d(), mask);
        let a = self.alphas[mask as usize];
        let mut column = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            column.push(d_value(
                self.fs[slot],
                &node.ambient_chart,
                &node.x,
                v,
                a,
                self.partition,
            )?);
        }
        self.cache.insert((slot, mask), column);
        Ok(())
    }

    /// Midpoint-rule integral over the diagonal of ∏_i D^{v_i}_{α(𝒫,v_i)} f_i.
    fn product_integral(&mut self, masks: &[u16]) -> Result<f64, FuncError> {
        for (i, &mask) in masks.iter().enumerate() {
            self.ensure_column(i, mask)?;
        }
        let columns: Vec<&[f64]> = masks
            .iter()
            .enumerate()
            .map(|(i, &mask)| self.cache[&(self.canon[i], mask)].as_slice())
            .collect();
        let mut total = 0.0;
        for idx in 0..self.nodes.len() {
            let mut product = 1.0;
            for column in &columns {
                product *= column[idx];
            }
            total += product;
        }
        Ok(total * self.weight)
    }
}

/// The exact pairing ⟨f_0,…,f_d⟩_{W,n} of d+1 grid functions at level n:
/// n^{2d} Σ over index tuples of the tuple's degree coefficient times the
/// integral over Γ^d of the product of lattice differences. Exact
/// rational arithmetic end to end; only tuples with nonzero degree are
/// enumerated in the report.
pub fn pair_exact(fs: &[&GridFunction], t: &DegreeTable) -> Result<PairingReport, PairError> {
    let d = t.d();
    if fs.len() != d + 1 {
        return Err(ChowError::DegreeMismatch {
            expected: d as u32 + 1,
            got: fs.len() as u32,
        }
        .into());
    }
    let first = fs[0];
    let n = first.n();
    for f in fs {
        if f.d() != d || f.graph() != first.graph() {
            return Err(PairError::Incompatible {
                detail: "pairing arguments live on different graph powers".into(),
            });
        }
        if f.n() != n {
            return Err(FuncError::LevelMismatch {
                expected: n,
                got: f.n(),
            }
            .into());
        }
    }
    let scale = Rat::from_integer(BigInt::from(n).pow(2 * d as u32));
    let discrete = Partition::discrete(d);
    let mut value = Rat::zero();
    let mut terms = Vec::new();
    for masks in mask_tuples(d) {
        let tuple: Vec<BitVec> = masks.iter().map(|&mask| BitVec::new(d, mask)).collect();
        let deg = f_degree(&tuple, t)?;
        if deg.is_zero() {
            continue;
        }
        let factors: Vec<(&GridFunction, BitVec)> =
            fs.iter().copied().zip(tuple.iter().copied()).collect();
        let integral = integrate_grid_product(&factors, n)?;
        let contribution = &scale * &deg * &integral;
        value += contribution.clone();
        terms.push(PairingTerm {
            partition: discrete.clone(),
            tuple,
            ldeg: deg,
            integral: Scalar::Exact(integral),
            contribution: Scalar::Exact(contribution),
        });
    }
    Ok(PairingReport {
        kind: "exact",
        d,
        graph: first.graph().summary_id(),
        level: Some(n),
        quadrature: None,
        value: Scalar::Exact(value),
        terms,
    })
}

/// The limit pairing of d+1 expression functions via the partition
/// formula: Σ_𝒫 2^{−(d+|𝒫|)} Σ_{Σ α(𝒫,v_i) = d+|𝒫|} ldeg(∏ F_{v_i})
/// ∫_{𝒟_𝒫} ∏ D^{v_i}_{α(𝒫,v_i)} f_i.
///
/// The formula is valid only under the vanishing condition, so the table
/// must have been marked by a clean `check_vanishing` run. Integrals over
/// one or two axes use m points per axis; deeper volume integrals cap at
/// `VOLUME_QUADRATURE_CAP` points per axis.
pub fn pair_limit(
    fs: &[&ExprFunction],
    t: &DegreeTable,
    m: u32,
) -> Result<PairingReport, PairError> {
    let d = t.d();
    if d > MAX_LIMIT_D {
        return Err(PairError::TooLarge { d, max: MAX_LIMIT_D });
    }
    if fs.len() != d + 1 {
        return Err(ChowError::DegreeMismatch {
            expected: d as u32 + 1,
            got: fs.len() as u32,
        }
        .into());
    }
    if !t.vanishing_verified() {
        return Err(PairError::VanishingConditionUnverified { d });
    }
    check_quadrature(m)?;
    let graph = fs[0].graph();
    for f in fs {
        if f.d() != d || f.graph() != graph {
            return Err(PairError::Incompatible {
                detail: "pairing arguments live on different graph powers".into(),
            });
        }
    }
    let mut value = 0.0f64;
    let mut terms = Vec::new();
    for p in all_partitions(d)? {
        let target = d + p.size();
        let coeff = Rat::new(BigInt::one(), BigInt::from(2).pow(target as u32));
        let mut columns = DiffColumns::new(graph, fs, &p, quadrature_for(m, p.size()));
        for masks in mask_tuples(d) {
            let alpha_sum: usize = masks.iter().map(|&mask| columns.alpha_of(mask)).sum();
            if alpha_sum != target {
                continue;
            }
            let tuple: Vec<BitVec> = masks.iter().map(|&mask| BitVec::new(d, mask)).collect();
            let deg = f_degree(&tuple, t)?;
            if deg.is_zero() {
                continue;
            }
            let integral = columns.product_integral(&masks)?;
            let contribution = rat_to_f64(&(&coeff * &deg)) * integral;
            value += contribution;
            terms.push(PairingTerm {
                partition: p.clone(),
                tuple,
                ldeg: deg,
                integral: Scalar::Approx(integral),
                contribution: Scalar::Approx(contribution),
            });
        }
    }
    Ok(PairingReport {
        kind: "limit",
        d,
        graph: graph.summary_id(),
        level: None,
        quadrature: Some(m),
        value: Scalar::Approx(value),
        terms,
    })
}

/// The six orderings of the index multiset {(1,0), (0,1), (1,1)}.
const TRIPLE_ORDERINGS: [[u16; 3]; 6] = [
    [1, 2, 3],
    [1, 3, 2],
    [2, 1, 3],
    [2, 3, 1],
    [3, 1, 2],
    [3, 2, 1],
];

/// Closed-form triple pairing on Γ²: the full-square part
/// Σ ∫_{Γ²} D^{v_0}_{|v_0|} D^{v_1}_{|v_1|} D^{v_2}_{|v_2|} over the
/// orderings of {(1,0),(0,1),(1,1)}, plus the diagonal part
/// 2 Σ ∫_𝒟 ∏ D^{v_i}_1 − 4 ∫_𝒟 ∏ D^{(1,1)}_1. Returns
/// (smooth, singular, total); the tuple sets and coefficients are fixed
/// here independently of any degree table.
pub fn pair_zhang2(
    f0: &ExprFunction,
    f1: &ExprFunction,
    f2: &ExprFunction,
    m: u32,
) -> Result<(f64, f64, f64), PairError> {
    let fs = [f0, f1, f2];
    let graph = f0.graph();
    for f in &fs {
        if f.d() != 2 || f.graph() != graph {
            return Err(PairError::Incompatible {
                detail: "triple pairing needs three functions on the same Γ²".into(),
            });
        }
    }
    check_quadrature(m)?;

    let discrete = Partition::discrete(2);
    let mut square = DiffColumns::new(graph, &fs, &discrete, m);
    let mut smooth = 0.0;
    for masks in &TRIPLE_ORDERINGS {
        smooth += square.product_integral(masks)?;
    }

    let total_p = Partition::total(2);
    let mut diag = DiffColumns::new(graph, &fs, &total_p, m);
    let mut singular = 0.0;
    for masks in &TRIPLE_ORDERINGS {
        singular += 2.0 * diag.product_integral(masks)?;
    }
    singular -= 4.0 * diag.product_integral(&[3, 3, 3])?;

    Ok((smooth, singular, smooth + singular))
}

/// The four index multisets whose quadruples carry the cube-smooth d = 3
/// pairing, as sorted mask lists (bit i is coordinate i+1).
const CUBE_QUADRUPLE_MULTISETS: [[u16; 4]; 4] = [
    [1, 2, 4, 7],
    [1, 2, 5, 6],
    [1, 3, 4, 6],
    [2, 3, 4, 5],
];

/// Closed-form quadruple pairing on Γ³ for cube-smooth inputs:
/// Σ over ordered tuples whose multiset is one of the four carrying sets
/// of ∫_{Γ³} ∏ D^{v_i}_{|v_i|} f_i, all with coefficient 1. The multisets
/// are fixed here independently of any degree table.
pub fn pair_cube3(fs: &[&ExprFunction], m: u32) -> Result<f64, PairError> {
    if fs.len() != 4 {
        return Err(ChowError::DegreeMismatch {
            expected: 4,
            got: fs.len() as u32,
        }
        .into());
    }
    let graph = fs[0].graph();
    for (index, f) in fs.iter().enumerate() {
        if f.d() != 3 || f.graph() != graph {
            return Err(PairError::Incompatible {
                detail: "quadruple pairing needs four functions on the same Γ³".into(),
            });
        }
        if f.smoothness() == Smoothness::Simplices {
            return Err(PairError::SmoothnessClassMismatch { index });
        }
    }
    check_quadrature(m)?;
    let discrete = Partition::discrete(3);
    let mut columns = DiffColumns::new(graph, fs, &discrete, quadrature_for(m, 3));
    let mut total = 0.0;
    for masks in mask_tuples(3) {
        if masks.iter().any(|&mask| mask == 0) {
            continue;
        }
        let mut sorted = [masks[0], masks[1], masks[2], masks[3]];
        sorted.sort_unstable();
        if CUBE_QUADRUPLE_MULTISETS.contains(&sorted) {
            total += columns.product_integral(&masks)?;
        }
    }
    Ok(total)
}

/// Exact pairings of the level-n standard approximations against the
/// limit pairing, one row per level. Levels must be strictly ascending.
pub fn convergence_table(
    fs: &[&ExprFunction],
    ns: &[u32],
    t: &DegreeTable,
    m: u32,
) -> Result<Vec<ConvergenceRow>, PairError> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PairError::Incompatible {
            detail: "levels must be a nonempty strictly ascending list".into(),
        });
    }
    let limit = pair_limit(fs, t, m)?.value_f64();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let grids: Vec<GridFunction> = fs
            .iter()
            .map(|f| standard_approximation(f, n))
            .collect::<Result<_, _>>()?;
        let refs: Vec<&GridFunction> = grids.iter().collect();
        let exact = pair_exact(&refs, t)?
            .exact_value()
            .expect("exact pipeline carries rationals")
            .clone();
        let gap = (rat_to_f64(&exact) - limit).abs();
        rows.push(ConvergenceRow {
            n,
            exact,
            limit,
            gap,
        });
    }
    Ok(rows)
}

/// The alternating triangle wave (1/2) Σ_k (−1)^k max(0, 1/n − |x − k/n|)
/// with peaks (−1)^k/(2n) at the lattice points k/n, evaluated exactly.
fn triangle_wave(n: u32, x: &Rat) -> Rat {
    let inv_n = Rat::new(BigInt::one(), BigInt::from(n));
    let mut sum = Rat::zero();
    for k in -(n as i64)..=(n as i64) {
        let node = Rat::new(BigInt::from(k), BigInt::from(n));
        let gap = &inv_n - (x - node).abs();
        if gap > Rat::zero() {
            if k.rem_euclid(2) == 0 {
                sum += gap;
            } else {
                sum -= gap;
            }
        }
    }
    sum / Rat::from_integer(BigInt::from(2))
}

/// The oscillating triple on the unit square at level n: f_0 and f_1 are
/// the triangle waves of x_1 and x_2, f_2 the triangle wave of x_1 − x_2,
/// all with amplitude 1/(2n). Returns the grids and their exact pairing,
/// which grows linearly in n even though every function's sup norm decays
/// like 1/n.
pub fn counterexample_triple(n: u32) -> Result<([GridFunction; 3], Rat), PairError> {
    if n == 0 {
        return Err(PairError::Incompatible {
            detail: "the oscillating triple needs level n >= 1".into(),
        });
    }
    let graph = Graph::interval();
    let phi: Vec<Rat> = (0..=n)
        .map(|i| triangle_wave(n, &Rat::new(BigInt::from(i), BigInt::from(n))))
        .collect();
    let size = (n as usize + 1) * (n as usize + 1);
    let mut v0 = Vec::with_capacity(size);
    let mut v1 = Vec::with_capacity(size);
    let mut v2 = Vec::with_capacity(size);
    for i in 0..=n {
        for j in 0..=n {
            v0.push(phi[i as usize].clone());
            v1.push(phi[j as usize].clone());
            let skew = Rat::new(BigInt::from(i as i64 - j as i64), BigInt::from(n));
            v2.push(triangle_wave(n, &skew));
        }
    }
    let f0 = GridFunction::new(graph.clone(), 2, n, vec![v0])?;
    let f1 = GridFunction::new(graph.clone(), 2, n, vec![v1])?;
    let f2 = GridFunction::new(graph.clone(), 2, n, vec![v2])?;
    let t = build_degree_table(2)?;
    let report = pair_exact(&[&f0, &f1, &f2], &t)?;
    let value = report
        .exact_value()
        .expect("exact pipeline carries rationals")
        .clone();
    Ok(([f0, f1, f2], value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::check_vanishing;
    use crate::rat::{rat, rat_int};

    fn expr(d: usize, smooth: Smoothness, src: &str) -> ExprFunction {
        ExprFunction::new(
            Graph::interval(),
            d,
            smooth,
            &[("*".to_string(), src.to_string())],
        )
        .unwrap()
    }

    fn verified_table(d: usize) -> DegreeTable {
        let t = build_degree_table(d).unwrap();
        let report = check_vanishing(&t);
        assert!(
            report.violations.is_empty(),
            "vanishing must hold for d = {d}"
        );
        t
    }

    #[test]
    fn d1_exact_pairing_hits_the_energy_value() {
        let t = build_degree_table(1).unwrap();
        let f = expr(1, Smoothness::Cubes, "x1");
        for n in [1u32, 2, 4] {
            let g = standard_approximation(&f, n).unwrap();
            let report = pair_exact(&[&g, &g], &t).unwrap();
            assert_eq!(
                report.exact_value(),
                Some(&rat_int(-1)),
                "slope-1 self pairing is -1 independent of the level, n = {n}"
            );
        }
    }

    #[test]
    fn constant_arguments_annihilate_exactly() {
        let t = build_degree_table(1).unwrap();
        let g = standard_approximation(&expr(1, Smoothness::Cubes, "x1"), 2).unwrap();
        let c = GridFunction::constant(Graph::interval(), 1, 2, rat(7, 3)).unwrap();
        let report = pair_exact(&[&g, &c], &t).unwrap();
        assert_eq!(report.exact_value(), Some(&rat_int(0)));
        assert!(
            report.terms.iter().all(|term| match &term.integral {
                Scalar::Exact(r) => r.is_zero(),
                Scalar::Approx(_) => false,
            }),
            "every surviving term has a zero lattice-difference integral"
        );
    }

    #[test]
    fn limit_pairing_requires_a_verified_table() {
        let t = build_degree_table(1).unwrap();
        let f = expr(1, Smoothness::Cubes, "x1");
        let err = pair_limit(&[&f, &f], &t, 8).unwrap_err();
        assert!(
            matches!(err, PairError::VanishingConditionUnverified { d: 1 }),
            "unchecked table is rejected, got {err:?}"
        );
        check_vanishing(&t);
        let report = pair_limit(&[&f, &f], &t, 8).unwrap();
        assert!(
            (report.value_f64() + 1.0).abs() < 1e-12,
            "d = 1 limit pairing collapses to -\u{222b} D\u{b9}f\u{2080} D\u{b9}f\u{2081}, got {}",
            report.value_f64()
        );
    }

    #[test]
    fn product_triple_reaches_three_halves() {
        let t = verified_table(2);
        let f = expr(2, Smoothness::Cubes, "x1*x2");
        let report = pair_limit(&[&f, &f, &f], &t, 16).unwrap();
        assert!(
            (report.value_f64() - 1.5).abs() < 1e-9,
            "xy triple pairing is 3/2, got {}",
            report.value_f64()
        );
        let (smooth, singular, total) = pair_zhang2(&f, &f, &f, 16).unwrap();
        assert!((smooth - 1.5).abs() < 1e-9, "smooth part 3/2, got {smooth}");
        assert!(
            singular.abs() < 1e-9,
            "globally smooth input has no diagonal part, got {singular}"
        );
        assert!((total - report.value_f64()).abs() < 1e-9);
    }

    #[test]
    fn d3_exact_route_matches_partition_formula_on_multiaffine_quadruple() {
        // The quadruple (x1, x2, x3, x1*x2*x3) is affine in each variable
        // separately, so its standard approximations reproduce it exactly
        // and the exact pairing is the same at every level. Pinning that
        // level-independent rational against the partition-formula limit
        // guards the consistency of the two routes end to end.
        let t = verified_table(3);
        let coords = [
            expr(3, Smoothness::Cubes, "x1"),
            expr(3, Smoothness::Cubes, "x2"),
            expr(3, Smoothness::Cubes, "x3"),
            expr(3, Smoothness::Cubes, "x1*x2*x3"),
        ];
        for n in [2u32, 4] {
            let grids: Vec<GridFunction> = coords
                .iter()
                .map(|f| standard_approximation(f, n).unwrap())
                .collect();
            let refs: Vec<&GridFunction> = grids.iter().collect();
            let report = pair_exact(&refs, &t).unwrap();
            assert_eq!(
                report.exact_value(),
                Some(&rat_int(-1)),
                "exact pairing of the multi-affine quadruple at n = {n}"
            );
        }
        let refs: Vec<&ExprFunction> = coords.iter().collect();
        let limit = pair_limit(&refs, &t, 16).unwrap().value_f64();
        assert!(
            (limit + 1.0).abs() < 1e-9,
            "partition formula agrees with the exact route, got {limit}"
        );
    }

    #[test]
    fn mixed_smoothness_triple_matches_hand_integration() {
        // f0 = f1 = x*y, f2 = |x - y|. In the full-square part an
        // ordering survives only if (1,1) lands on one of the two product
        // factors (the mixed second differential of |x - y| vanishes off
        // the diagonal), leaving a first difference of |x - y| worth
        // sign(x - y) against x or -sign(x - y) against y; each of the
        // four such orderings integrates to 1/6, so smooth = 2/3. On the
        // diagonal D11 of the product factors vanishes (an order-h^2
        // difference against one power of h) and the first differences of
        // |x - y| cancel, leaving the 2 orderings that put (1,1) on f2,
        // worth -t^2 each: singular = 2 * (-2/3) = -4/3. Total -2/3.
        let f = expr(2, Smoothness::Cubes, "x1*x2");
        let g = expr(2, Smoothness::Simplices, "abs(x1-x2)");
        let (smooth, singular, total) = pair_zhang2(&f, &f, &g, 64).unwrap();
        assert!((smooth - 2.0 / 3.0).abs() < 1e-3, "smooth part, got {smooth}");
        assert!(
            (singular + 4.0 / 3.0).abs() < 1e-3,
            "singular part, got {singular}"
        );
        assert!((total + 2.0 / 3.0).abs() < 2e-3, "total, got {total}");
        let t = verified_table(2);
        let report = pair_limit(&[&f, &f, &g], &t, 64).unwrap();
        assert!(
            (report.value_f64() - total).abs() < 1e-9,
            "partition formula and closed form see the same sums"
        );
    }

    #[test]
    fn cube_quadruple_pairing_is_exact_on_coordinate_products() {
        let fs = [
            expr(3, Smoothness::Cubes, "x1"),
            expr(3, Smoothness::Cubes, "x2"),
            expr(3, Smoothness::Cubes, "x3"),
            expr(3, Smoothness::Cubes, "x1*x2*x3"),
        ];
        let refs: Vec<&ExprFunction> = fs.iter().collect();
        let value = pair_cube3(&refs, 8).unwrap();
        assert!(
            (value - 1.0).abs() < 1e-9,
            "only one ordered tuple survives with unit factors, got {value}"
        );
        let c = expr(3, Smoothness::Cubes, "2");
        let with_constant = pair_cube3(&[&c, &refs[1], &refs[2], &refs[3]], 4).unwrap();
        assert!(with_constant.abs() < 1e-12, "constants annihilate");
        let s = expr(3, Smoothness::Simplices, "x1");
        let err = pair_cube3(&[&s, &refs[1], &refs[2], &refs[3]], 4).unwrap_err();
        assert!(matches!(
            err,
            PairError::SmoothnessClassMismatch { index: 0 }
        ));
    }

    #[test]
    fn oscillating_triple_value_grows_linearly() {
        // At level n the only index tuple with both a nonzero degree and
        // nonzero lattice differences assigns (1,0) to f0, (0,1) to f1 and
        // (1,1) to f2; each cell contributes the same product of three
        // alternating differences of size 1/(2n), and the sum collapses to
        // n^4 * 16 * 1/(8n^3) = 2n.
        for n in [1u32, 3] {
            let (grids, value) = counterexample_triple(n).unwrap();
            assert_eq!(
                value,
                rat_int(2 * n as i64),
                "pairing of the level-{n} oscillating triple"
            );
            assert_eq!(grids[0].n(), n);
            let chart = grids[2].charts()[0].clone();
            assert_eq!(
                grids[2].corner_value(&chart, &[0, 0]).unwrap(),
                &rat(1, 2 * n as i64),
                "triangle wave peaks at 1/(2n) on the lattice"
            );
        }
    }

    #[test]
    fn convergence_rows_are_flat_for_affine_inputs() {
        let t = verified_table(1);
        let f = expr(1, Smoothness::Cubes, "x1");
        let rows = convergence_table(&[&f, &f], &[1, 2, 4], &t, 32).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.exact, rat_int(-1), "affine exact value is level-free");
            assert!(row.gap < 1e-12, "no gap against the limit, got {}", row.gap);
        }
        let err = convergence_table(&[&f, &f], &[4, 2], &t, 8).unwrap_err();
        assert!(matches!(err, PairError::Incompatible { .. }));
    }
}
