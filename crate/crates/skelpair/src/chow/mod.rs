//! Exact arithmetic in the combinatorial Chow ring of the standard cube.
//!
//! The ring is the polynomial ring on the 2^d cube vertices C_v, v ∈ F_2^d,
//! modulo three relation families: (1) a monomial vanishes unless its
//! support is a chain under the coordinatewise order (the vertices then
//! span a simplex of the cube), (2) (Σ_{C'} C')·C_v = 0 for every vertex,
//! (3) for vertices C_1, C_2 differing in axis i, the partial sums
//! Σ_{pr_i(C') = pr_i(C_2)} C_1 C_2 C' = 0.
//!
//! The degree-(d+1) part carries a unique linear functional `ldeg` that is
//! 1 on products of d+1 distinct comparable vertices; [`build_degree_table`]
//! pins it down by solving the relation system over exact rationals. The
//! Fourier generators F_v = Σ_w (−1)^{⟨v,w⟩} C_w turn the table into the
//! coefficient scheme of the intersection pairing, and [`check_vanishing`]
//! proves the vanishing condition the limit pairing depends on.

mod rewrite;
mod solve;

pub use rewrite::rewrite_degree;

use crate::rat::{format_rat, Rat};
use crate::skeleton::{all_partitions, alpha, Partition};
use num::traits::Zero;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};
use thiserror::Error;

/// Largest d for which the degree table may be attempted; d = 5 is a
/// stretch target that can exhaust the work budget.
pub const MAX_CHOW_D: usize = 5;

/// Default work budget for [`build_degree_table`], counted in sparse-row
/// coefficient operations. Generous enough for d ≤ 4; d = 5 may exceed it.
pub const DEFAULT_BUILD_BUDGET: u64 = 500_000_000;

/// Errors of the Chow-ring layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChowError {
    #[error("d = {d} exceeds the degree-table guard (max {max})")]
    TooLarge { d: usize, max: usize },
    #[error("relation system is inconsistent: {detail}")]
    InconsistentRelations { detail: String },
    #[error("degree table underdetermined; free monomials: {}", free.join(", "))]
    Underdetermined { free: Vec<String> },
    #[error("element degree {got} does not match table degree {expected}")]
    DegreeMismatch { expected: u32, got: u32 },
    #[error("work budget exhausted after {work} operations (budget {budget})")]
    Timeout { work: u64, budget: u64 },
}

/// A vertex label / Fourier index: a bit vector in F_2^d.
///
/// Bit i is coordinate i + 1; the text form prints coordinates in order,
/// so v = (1,1,0) reads "110".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    d: u8,
    bits: u16,
}

impl BitVec {
    pub fn new(d: usize, bits: u16) -> BitVec {
        debug_assert!(d <= 16 && (bits as u32) < (1u32 << d));
        BitVec { d: d as u8, bits }
    }

    pub fn zero(d: usize) -> BitVec {
        BitVec::new(d, 0)
    }

    /// The all-ones vector (1,…,1).
    pub fn ones(d: usize) -> BitVec {
        BitVec::new(d, ((1u32 << d) - 1) as u16)
    }

    pub fn d(&self) -> usize {
        self.d as usize
    }

    pub fn bits(&self) -> u16 {
        self.bits
    }

    pub fn mask(&self) -> u32 {
        self.bits as u32
    }

    pub fn get(&self, axis: usize) -> bool {
        self.bits >> axis & 1 == 1
    }

    /// Number of ones |v|.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Mod-2 inner product ⟨v,w⟩.
    pub fn dot(&self, other: &BitVec) -> u32 {
        (self.bits & other.bits).count_ones() % 2
    }

    /// v + (1,…,1), the vertex antipode used by the ψ involution.
    pub fn flip_all(&self) -> BitVec {
        BitVec {
            d: self.d,
            bits: self.bits ^ BitVec::ones(self.d as usize).bits,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Coordinatewise comparability (either direction).
    pub fn comparable(&self, other: &BitVec) -> bool {
        let a = self.bits;
        let b = other.bits;
        a & !b == 0 || b & !a == 0
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for axis in 0..self.d {
            write!(f, "{}", self.bits >> axis & 1)?;
        }
        Ok(())
    }
}

impl FromStr for BitVec {
    type Err = String;

    fn from_str(s: &str) -> Result<BitVec, String> {
        if s.is_empty() || s.len() > 16 {
            return Err(format!("bad bit-vector literal {s:?}"));
        }
        let mut bits = 0u16;
        for (axis, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << axis,
                _ => return Err(format!("bad bit-vector literal {s:?}")),
            }
        }
        Ok(BitVec {
            d: s.len() as u8,
            bits,
        })
    }
}

/// All 2^d bit vectors in numeric order.
pub fn all_bitvecs(d: usize) -> Vec<BitVec> {
    (0..1u32 << d).map(|b| BitVec::new(d, b as u16)).collect()
}

/// Whether a vertex set is a chain: pairwise comparable coordinatewise,
/// i.e. the vertices span a simplex of the cube.
pub fn is_chain(support: &[BitVec]) -> bool {
    let mut masks: Vec<u16> = support.iter().map(|v| v.bits).collect();
    masks.sort_unstable();
    masks_form_chain(&masks)
}

/// Chain test for a numerically sorted mask list: consecutive containment
/// suffices because strict containment implies numeric order.
fn masks_form_chain(sorted: &[u16]) -> bool {
    sorted.windows(2).all(|w| w[0] & !w[1] == 0)
}

/// A monomial in the vertex generators, stored as its sorted vertex list
/// with repeats (so the length is the degree).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    d: u8,
    verts: Vec<u16>,
}

impl Monomial {
    pub fn new(d: usize, vertices: Vec<BitVec>) -> Monomial {
        debug_assert!(vertices.iter().all(|v| v.d() == d));
        let mut verts: Vec<u16> = vertices.iter().map(|v| v.bits).collect();
        verts.sort_unstable();
        Monomial { d: d as u8, verts }
    }

    pub(crate) fn from_sorted_masks(d: u8, verts: Vec<u16>) -> Monomial {
        debug_assert!(verts.windows(2).all(|w| w[0] <= w[1]));
        Monomial { d, verts }
    }

    pub fn d(&self) -> usize {
        self.d as usize
    }

    pub fn degree(&self) -> u32 {
        self.verts.len() as u32
    }

    /// Distinct vertices of the support.
    pub fn support(&self) -> Vec<BitVec> {
        let mut out: Vec<BitVec> = Vec::new();
        for &m in &self.verts {
            if out.last().map(|v: &BitVec| v.bits) != Some(m) {
                out.push(BitVec {
                    d: self.d,
                    bits: m,
                });
            }
        }
        out
    }

    /// (vertex, multiplicity) pairs in vertex order.
    pub fn multiplicities(&self) -> Vec<(BitVec, u32)> {
        let mut out: Vec<(BitVec, u32)> = Vec::new();
        for &m in &self.verts {
            match out.last_mut() {
                Some((v, k)) if v.bits == m => *k += 1,
                _ => out.push((BitVec { d: self.d, bits: m }, 1)),
            }
        }
        out
    }

    pub fn has_chain_support(&self) -> bool {
        masks_form_chain(&self.verts)
    }

    /// Whether all d+1 vertices are distinct (then the support is a maximal
    /// chain whenever it is a chain at all).
    pub fn is_squarefree(&self) -> bool {
        self.verts.windows(2).all(|w| w[0] < w[1])
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.d, other.d);
        let mut verts = Vec::with_capacity(self.verts.len() + other.verts.len());
        let (mut i, mut j) = (0, 0);
        while i < self.verts.len() || j < other.verts.len() {
            let take_left = j == other.verts.len()
                || (i < self.verts.len() && self.verts[i] <= other.verts[j]);
            if take_left {
                verts.push(self.verts[i]);
                i += 1;
            } else {
                verts.push(other.verts[j]);
                j += 1;
            }
        }
        Monomial { d: self.d, verts }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (v, mult)) in self.multiplicities().iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "C{v}")?;
            if *mult > 1 {
                write!(f, "^{mult}")?;
            }
        }
        Ok(())
    }
}

/// A homogeneous element of the ring: exact rational combination of
/// monomials of one degree. Monomials with non-chain support are pruned by
/// multiplication (they are zero in the quotient).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChowElement {
    d: u8,
    degree: u32,
    terms: BTreeMap<Monomial, Rat>,
}

impl ChowElement {
    pub fn zero(d: usize, degree: u32) -> ChowElement {
        ChowElement {
            d: d as u8,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The degree-1 generator C_v.
    pub fn vertex(v: BitVec) -> ChowElement {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::new(v.d(), vec![v]), Rat::from_integer(1.into()));
        ChowElement {
            d: v.d() as u8,
            degree: 1,
            terms,
        }
    }

    pub fn from_monomial(m: Monomial, coeff: Rat) -> ChowElement {
        let d = m.d;
        let degree = m.degree();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        ChowElement { d, degree, terms }
    }

    pub fn d(&self) -> usize {
        self.d as usize
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &ChowElement) -> ChowElement {
        debug_assert_eq!((self.d, self.degree), (other.d, other.degree));
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        ChowElement {
            d: self.d,
            degree: self.degree,
            terms,
        }
    }

    pub fn scale(&self, factor: &Rat) -> ChowElement {
        if factor.is_zero() {
            return ChowElement::zero(self.d as usize, self.degree);
        }
        ChowElement {
            d: self.d,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }
}

/// The Fourier generator F_v = Σ_w (−1)^{⟨v,w⟩} C_w, a degree-1 element
/// with 2^d terms and coefficients ±1.
pub fn expand_f(v: BitVec) -> ChowElement {
    let d = v.d();
    let mut terms = BTreeMap::new();
    for w in all_bitvecs(d) {
        let sign = if v.dot(&w) == 0 { 1 } else { -1 };
        terms.insert(Monomial::new(d, vec![w]), Rat::from_integer(sign.into()));
    }
    ChowElement {
        d: d as u8,
        degree: 1,
        terms,
    }
}

/// Graded product; monomials whose support is not a chain are dropped.
pub fn multiply(a: &ChowElement, b: &ChowElement) -> ChowElement {
    debug_assert_eq!(a.d, b.d);
    let mut terms: BTreeMap<Monomial, Rat> = BTreeMap::new();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let m = ma.mul(mb);
            if !m.has_chain_support() {
                continue;
            }
            let entry = terms.entry(m).or_insert_with(Rat::zero);
            *entry += ca * cb;
        }
    }
    terms.retain(|_, c| !c.is_zero());
    ChowElement {
        d: a.d,
        degree: a.degree + b.degree,
        terms,
    }
}

/// The ψ involution: every vertex C_v becomes C_{v+(1,…,1)}. It preserves
/// chains (complementation reverses the order) and satisfies
/// ψ(F_v) = (−1)^{⟨v,(1,…,1)⟩} F_v.
pub fn psi(e: &ChowElement) -> ChowElement {
    let full = BitVec::ones(e.d as usize).bits;
    let terms = e
        .terms
        .iter()
        .map(|(m, c)| {
            let mut verts: Vec<u16> = m.verts.iter().map(|&v| v ^ full).collect();
            verts.sort_unstable();
            (Monomial::from_sorted_masks(m.d, verts), c.clone())
        })
        .collect();
    ChowElement {
        d: e.d,
        degree: e.degree,
        terms,
    }
}

/// The local degree functional on degree-(d+1) monomials, realized as an
/// exact table over all chain-support monomials (non-chain monomials are
/// implicitly zero).
#[derive(Debug)]
pub struct DegreeTable {
    d: u8,
    entries: BTreeMap<Monomial, Rat>,
    f_memo: RwLock<HashMap<Vec<u16>, Rat>>,
    vanishing_ok: OnceLock<bool>,
}

impl DegreeTable {
    pub fn d(&self) -> usize {
        self.d as usize
    }

    /// Table value of a canonical monomial; zero off the chain support.
    pub fn entry(&self, m: &Monomial) -> Rat {
        match self.entries.get(m) {
            Some(v) => v.clone(),
            None => {
                debug_assert!(
                    !m.has_chain_support() || m.degree() != self.d as u32 + 1,
                    "chain monomial {m} missing from a complete table"
                );
                Rat::zero()
            }
        }
    }

    /// All (monomial, value) entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.entries.iter()
    }

    /// Whether [`check_vanishing`] has run on this table without finding
    /// violations; the limit pairing requires this witness.
    pub fn vanishing_verified(&self) -> bool {
        self.vanishing_ok.get().copied().unwrap_or(false)
    }
}

/// Solves the relation system for the degree functional on degree-(d+1)
/// chain monomials with the default work budget.
pub fn build_degree_table(d: usize) -> Result<DegreeTable, ChowError> {
    build_degree_table_with_budget(d, DEFAULT_BUILD_BUDGET)
}

/// As [`build_degree_table`] with an explicit work budget; exceeding it
/// yields a deterministic `Timeout` (useful for the d = 5 stretch case).
pub fn build_degree_table_with_budget(d: usize, budget: u64) -> Result<DegreeTable, ChowError> {
    if d < 1 || d > MAX_CHOW_D {
        return Err(ChowError::TooLarge { d, max: MAX_CHOW_D });
    }
    let entries = solve::solve_degree_system(d as u8, budget)?;
    Ok(DegreeTable {
        d: d as u8,
        entries,
        f_memo: RwLock::new(HashMap::new()),
        vanishing_ok: OnceLock::new(),
    })
}

/// Linear extension of the degree table to a degree-(d+1) element.
pub fn ldeg(e: &ChowElement, t: &DegreeTable) -> Result<Rat, ChowError> {
    if e.d != t.d || e.degree != t.d as u32 + 1 {
        return Err(ChowError::DegreeMismatch {
            expected: t.d as u32 + 1,
            got: e.degree,
        });
    }
    let mut acc = Rat::zero();
    for (m, c) in &e.terms {
        acc += c * t.entry(m);
    }
    Ok(acc)
}

/// Degree of a product of Fourier generators, ldeg(∏ F_{v_i}), memoized on
/// the sorted multiset of the v_i (the value is permutation-invariant).
pub fn f_degree(vs: &[BitVec], t: &DegreeTable) -> Result<Rat, ChowError> {
    let d = t.d as usize;
    if vs.len() != d + 1 || vs.iter().any(|v| v.d() != d) {
        return Err(ChowError::DegreeMismatch {
            expected: t.d as u32 + 1,
            got: vs.len() as u32,
        });
    }
    let mut key: Vec<u16> = vs.iter().map(|v| v.bits).collect();
    key.sort_unstable();
    if let Some(v) = t.f_memo.read().expect("memo lock poisoned").get(&key) {
        return Ok(v.clone());
    }
    let value = f_degree_uncached(t, &key);
    t.f_memo
        .write()
        .expect("memo lock poisoned")
        .insert(key, value.clone());
    Ok(value)
}

fn f_degree_uncached(t: &DegreeTable, sorted_masks: &[u16]) -> Rat {
    let d = t.d;
    let mut acc: HashMap<Vec<u16>, i64> = HashMap::new();
    acc.insert(Vec::new(), 1);
    for &v in sorted_masks {
        acc = mul_f_fast(d, &acc, v);
    }
    dot_table(t, &acc)
}

/// Multiplies an integer-coefficient chain-monomial map by F_v.
///
/// Coefficients stay well inside i64: they are bounded by the number of
/// orderings of the factors, at most (d+2)! for the products formed here.
fn mul_f_fast(d: u8, acc: &HashMap<Vec<u16>, i64>, v: u16) -> HashMap<Vec<u16>, i64> {
    let size = 1u16 << d;
    let mut out: HashMap<Vec<u16>, i64> = HashMap::with_capacity(acc.len() * 2);
    for (key, &c) in acc {
        for w in 0..size {
            let sign = if (v & w).count_ones() % 2 == 0 { c } else { -c };
            if let Some(next) = insert_chain(key, w) {
                *out.entry(next).or_insert(0) += sign;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Inserts w into a sorted chain-mask list if the result is still a chain.
fn insert_chain(key: &[u16], w: u16) -> Option<Vec<u16>> {
    let pos = key.partition_point(|&x| x <= w);
    if pos > 0 && key[pos - 1] & !w != 0 {
        return None;
    }
    if pos < key.len() && w & !key[pos] != 0 {
        return None;
    }
    let mut next = Vec::with_capacity(key.len() + 1);
    next.extend_from_slice(&key[..pos]);
    next.push(w);
    next.extend_from_slice(&key[pos..]);
    Some(next)
}

fn dot_table(t: &DegreeTable, acc: &HashMap<Vec<u16>, i64>) -> Rat {
    let mut value = Rat::zero();
    for (key, &c) in acc {
        if c == 0 {
            continue;
        }
        let m = Monomial::from_sorted_masks(t.d, key.clone());
        let entry = t.entry(&m);
        if !entry.is_zero() {
            value += entry * Rat::from_integer(c.into());
        }
    }
    value
}

/// The complete F-degree table: every multiset of d+1 Fourier indices in
/// ascending lexicographic order with its degree value.
///
/// Computed by a depth-first scan that shares prefix products, then cached
/// in the table's memo, so later [`f_degree`] queries are lookups.
pub fn f_degree_table(t: &DegreeTable) -> Vec<(Vec<BitVec>, Rat)> {
    let d = t.d as usize;
    let size = 1u16 << d;
    let branches: Vec<Vec<(Vec<u16>, Rat)>> = (0..size)
        .into_par_iter()
        .map(|v0| {
            let mut acc = HashMap::new();
            acc.insert(Vec::new(), 1i64);
            let acc = mul_f_fast(t.d, &acc, v0);
            let mut out = Vec::new();
            scan_rest(t, &acc, vec![v0], v0, d + 1, &mut out);
            out
        })
        .collect();
    let mut memo = t.f_memo.write().expect("memo lock poisoned");
    let mut table = Vec::new();
    for branch in branches {
        for (key, value) in branch {
            memo.insert(key.clone(), value.clone());
            let vs = key
                .iter()
                .map(|&b| BitVec {
                    d: t.d,
                    bits: b,
                })
                .collect();
            table.push((vs, value));
        }
    }
    table
}

fn scan_rest(
    t: &DegreeTable,
    acc: &HashMap<Vec<u16>, i64>,
    path: Vec<u16>,
    min_next: u16,
    len: usize,
    out: &mut Vec<(Vec<u16>, Rat)>,
) {
    if path.len() == len {
        out.push((path, dot_table(t, acc)));
        return;
    }
    let size = 1u16 << t.d;
    for v in min_next..size {
        let next_acc = mul_f_fast(t.d, acc, v);
        let mut next_path = path.clone();
        next_path.push(v);
        scan_rest(t, &next_acc, next_path, v, len, out);
    }
}

/// One violation of the vanishing condition: a partition and a Fourier
/// multiset whose alpha sum is below the threshold d+|P| yet whose degree
/// is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub partition: Partition,
    pub multiset: Vec<BitVec>,
    pub alpha_sum: usize,
    pub threshold: usize,
    pub degree: Rat,
}

/// Result of the vanishing-condition scan.
#[derive(Debug, Clone, PartialEq)]
pub struct VanishingReport {
    pub d: usize,
    /// (partition, multiset) pairs below the threshold, hence degree-tested.
    pub checked: u64,
    /// All (partition, multiset) pairs scanned.
    pub scanned: u64,
    pub violations: Vec<Violation>,
}

impl VanishingReport {
    pub fn to_json(&self) -> String {
        let violations: Vec<serde_json::Value> = self
            .violations
            .iter()
            .map(|v| {
                serde_json::json!({
                    "partition": v.partition.one_based_blocks(),
                    "multiset": v.multiset.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                    "alpha_sum": v.alpha_sum,
                    "threshold": v.threshold,
                    "degree": format_rat(&v.degree),
                })
            })
            .collect();
        serde_json::json!({
            "d": self.d,
            "checked": self.checked,
            "scanned": self.scanned,
            "violations": violations,
        })
        .to_string()
    }
}

/// Scans every partition of the axes and every multiset of d+1 Fourier
/// indices for violations of the vanishing condition: Σ_i α(P, v_i) below
/// d+|P| with a nonzero degree.
///
/// Tuples are scanned up to ordering; the degree is permutation-invariant
/// and α sums only depend on the multiset. On success the table is marked
/// as verified, which is the witness the limit pairing checks.
pub fn check_vanishing(t: &DegreeTable) -> VanishingReport {
    let d = t.d as usize;
    let partitions = all_partitions(d).expect("chow guard is stricter than partition guard");
    let table = f_degree_table(t);
    let mut checked = 0u64;
    let mut scanned = 0u64;
    let mut violations = Vec::new();
    for p in &partitions {
        let threshold = d + p.size();
        let alphas: Vec<usize> = (0..1u32 << d).map(|m| alpha(p, m)).collect();
        for (multiset, degree) in &table {
            scanned += 1;
            let alpha_sum: usize = multiset.iter().map(|v| alphas[v.mask() as usize]).sum();
            if alpha_sum < threshold {
                checked += 1;
                if !degree.is_zero() {
                    violations.push(Violation {
                        partition: p.clone(),
                        multiset: multiset.clone(),
                        alpha_sum,
                        threshold,
                        degree: degree.clone(),
                    });
                }
            }
        }
    }
    if violations.is_empty() {
        let _ = t.vanishing_ok.set(true);
    }
    VanishingReport {
        d,
        checked,
        scanned,
        violations,
    }
}

/// CSV form of the F-degree table: one row per multiset, indices in binary
/// notation separated by spaces, value as "p/q".
pub fn f_table_csv(t: &DegreeTable) -> String {
    let mut out = String::from("multiset,ldeg\n");
    for (vs, value) in f_degree_table(t) {
        let key = vs
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!("{key},{}\n", format_rat(&value)));
    }
    out
}

/// JSON form of the F-degree table.
pub fn f_table_json(t: &DegreeTable) -> String {
    let entries: Vec<serde_json::Value> = f_degree_table(t)
        .into_iter()
        .map(|(vs, value)| {
            serde_json::json!({
                "multiset": vs.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "ldeg": format_rat(&value),
            })
        })
        .collect();
    serde_json::json!({ "d": t.d(), "entries": entries }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    #[test]
    fn bitvec_roundtrip_and_orientation() {
        let v = bv("110");
        assert!(v.get(0) && v.get(1) && !v.get(2));
        assert_eq!(v.weight(), 2);
        assert_eq!(v.to_string(), "110");
        assert_eq!(BitVec::new(3, v.bits()), v);
    }

    #[test]
    fn bitvec_dot_and_flip() {
        let v = bv("101");
        let w = bv("110");
        assert_eq!(v.dot(&w), 1);
        assert_eq!(v.flip_all(), bv("010"));
        assert_eq!(v.flip_all().flip_all(), v);
    }

    #[test]
    fn chain_detection_matches_comparability() {
        assert!(is_chain(&[bv("000"), bv("100"), bv("110"), bv("111")]));
        assert!(!is_chain(&[bv("100"), bv("010")]));
        assert!(is_chain(&[bv("01")]));
        assert!(is_chain(&[bv("00"), bv("00"), bv("11")]));
    }

    #[test]
    fn expand_f_has_signed_vertex_terms() {
        // d=1: F_1 = C_0 − C_1, F_0 = C_0 + C_1.
        let f1 = expand_f(bv("1"));
        assert_eq!(f1.coeff(&Monomial::new(1, vec![bv("0")])), rat_int(1));
        assert_eq!(f1.coeff(&Monomial::new(1, vec![bv("1")])), rat_int(-1));
        let f0 = expand_f(bv("0"));
        assert_eq!(f0.coeff(&Monomial::new(1, vec![bv("1")])), rat_int(1));

        // d=2: F_(1,1) = C_00 − C_01 − C_10 + C_11 (bit i is axis i+1).
        let f11 = expand_f(bv("11"));
        assert_eq!(f11.coeff(&Monomial::new(2, vec![bv("00")])), rat_int(1));
        assert_eq!(f11.coeff(&Monomial::new(2, vec![bv("10")])), rat_int(-1));
        assert_eq!(f11.coeff(&Monomial::new(2, vec![bv("01")])), rat_int(-1));
        assert_eq!(f11.coeff(&Monomial::new(2, vec![bv("11")])), rat_int(1));
    }

    #[test]
    fn multiply_prunes_non_chain_support_and_cancels() {
        // (C_0 − C_1)(C_0 + C_1) = C_0² − C_1² in d=1.
        let a = ChowElement::vertex(bv("0")).add(&ChowElement::vertex(bv("1")).scale(&rat(-1, 1)));
        let b = ChowElement::vertex(bv("0")).add(&ChowElement::vertex(bv("1")));
        let p = multiply(&a, &b);
        assert_eq!(p.coeff(&Monomial::new(1, vec![bv("0"), bv("0")])), rat_int(1));
        assert_eq!(p.coeff(&Monomial::new(1, vec![bv("1"), bv("1")])), rat_int(-1));
        assert_eq!(p.coeff(&Monomial::new(1, vec![bv("0"), bv("1")])), rat_int(0));

        // C_10 · C_01 = 0 in d=2: incomparable support.
        let q = multiply(
            &ChowElement::vertex(bv("10")),
            &ChowElement::vertex(bv("01")),
        );
        assert!(q.is_zero());

        // F_0² in d=1 keeps all of C_0² + 2C_0C_1 + C_1².
        let f0 = expand_f(bv("0"));
        let sq = multiply(&f0, &f0);
        assert_eq!(sq.coeff(&Monomial::new(1, vec![bv("0"), bv("1")])), rat_int(2));
    }

    #[test]
    fn psi_is_the_antipodal_involution() {
        let e = ChowElement::vertex(bv("00"));
        assert_eq!(psi(&e), ChowElement::vertex(bv("11")));
        for s in ["00", "10", "01", "11"] {
            let v = bv(s);
            let f = expand_f(v);
            let sign = if v.dot(&BitVec::ones(2)) == 0 {
                rat_int(1)
            } else {
                rat_int(-1)
            };
            assert_eq!(psi(&f), f.scale(&sign), "psi(F_{s})");
            assert_eq!(psi(&psi(&f)), f);
        }
    }

    #[test]
    fn d1_degree_table_has_the_known_values() {
        let t = build_degree_table(1).unwrap();
        assert_eq!(t.entry(&Monomial::new(1, vec![bv("0"), bv("1")])), rat_int(1));
        assert_eq!(t.entry(&Monomial::new(1, vec![bv("0"), bv("0")])), rat_int(-1));
        assert_eq!(t.entry(&Monomial::new(1, vec![bv("1"), bv("1")])), rat_int(-1));
    }

    #[test]
    fn d1_fourier_degrees() {
        let t = build_degree_table(1).unwrap();
        let f1f1 = multiply(&expand_f(bv("1")), &expand_f(bv("1")));
        assert_eq!(ldeg(&f1f1, &t).unwrap(), rat_int(-4));
        assert_eq!(f_degree(&[bv("1"), bv("1")], &t).unwrap(), rat_int(-4));
        assert_eq!(f_degree(&[bv("0"), bv("1")], &t).unwrap(), rat_int(0));
        assert_eq!(f_degree(&[bv("0"), bv("0")], &t).unwrap(), rat_int(0));
    }

    #[test]
    fn degree_mismatch_is_reported() {
        let t = build_degree_table(1).unwrap();
        let e = ChowElement::vertex(bv("0"));
        assert!(matches!(
            ldeg(&e, &t),
            Err(ChowError::DegreeMismatch { .. })
        ));
        assert!(matches!(
            f_degree(&[bv("1")], &t),
            Err(ChowError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn zero_index_absorbs_every_product() {
        let t = build_degree_table(2).unwrap();
        for (vs, value) in f_degree_table(&t) {
            if vs.iter().any(|v| v.is_zero()) {
                assert!(value.is_zero(), "tuple {vs:?} should vanish");
            }
        }
    }

    #[test]
    fn f_degree_memo_is_order_insensitive() {
        let t = build_degree_table(2).unwrap();
        let a = f_degree(&[bv("10"), bv("01"), bv("11")], &t).unwrap();
        let b = f_degree(&[bv("11"), bv("10"), bv("01")], &t).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, rat_int(16));
    }

    #[test]
    fn table_guard_rejects_out_of_range_dimensions() {
        assert!(matches!(
            build_degree_table(0),
            Err(ChowError::TooLarge { .. })
        ));
        assert!(matches!(
            build_degree_table(6),
            Err(ChowError::TooLarge { .. })
        ));
    }

    #[test]
    fn tight_budget_times_out_deterministically() {
        let e1 = build_degree_table_with_budget(3, 10);
        let e2 = build_degree_table_with_budget(3, 10);
        match (e1, e2) {
            (Err(ChowError::Timeout { work: w1, .. }), Err(ChowError::Timeout { work: w2, .. })) => {
                assert_eq!(w1, w2)
            }
            other => panic!("expected deterministic timeouts, got {other:?}"),
        }
    }

    #[test]
    fn vanishing_holds_for_d1(){
        let t = build_degree_table(1).unwrap();
        let report = check_vanishing(&t);
        assert!(report.violations.is_empty());
        assert!(t.vanishing_verified());
        assert!(report.checked > 0);
    }

    #[test]
    fn csv_export_is_stable_and_complete() {
        let t = build_degree_table(1).unwrap();
        let csv = f_table_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "multiset,ldeg");
        // Multisets of size 2 over {0,1}: 00, 01, 11.
        assert_eq!(lines.len(), 4);
        assert!(lines.contains(&"1 1,-4/1"));
        assert_eq!(csv, f_table_csv(&t));
    }
}
