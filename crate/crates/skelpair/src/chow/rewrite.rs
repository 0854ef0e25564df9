//! Rewriting oracle for the degree functional.
//!
//! Works only from the vertex-sum relations: a squared vertex C_a² in a
//! monomial expands to −Σ_{C' ≠ C_a} C_a·C', non-chain products drop, and
//! squarefree chain monomials of full degree evaluate to 1. Some monomials
//! rewrite into each other forever (already at d = 2, C_a²C_b and C_aC_b²
//! feed each other), so the oracle returns `None` on a cycle instead of a
//! value. Where it does terminate it is independent of the linear solver,
//! which is exactly what makes it a useful cross-check.

use super::Monomial;
use crate::rat::Rat;
use num::traits::Zero;
use std::collections::{HashMap, HashSet};

/// Attempts to evaluate the degree functional on a degree-(d+1) monomial
/// by vertex-sum rewriting alone. `None` means the rewrite does not
/// terminate (a cycle or the depth cap was hit), not that the value is
/// undefined.
pub fn rewrite_degree(m: &Monomial, max_depth: usize) -> Option<Rat> {
    debug_assert_eq!(m.degree() as usize, m.d() + 1);
    let mut memo: HashMap<Vec<u16>, Option<Rat>> = HashMap::new();
    let mut in_progress: HashSet<Vec<u16>> = HashSet::new();
    go(
        m.d() as u8,
        &sorted_masks(m),
        max_depth,
        &mut memo,
        &mut in_progress,
    )
}

fn sorted_masks(m: &Monomial) -> Vec<u16> {
    m.multiplicities()
        .iter()
        .flat_map(|(v, k)| std::iter::repeat(v.bits()).take(*k as usize))
        .collect()
}

fn go(
    d: u8,
    verts: &[u16],
    depth: usize,
    memo: &mut HashMap<Vec<u16>, Option<Rat>>,
    in_progress: &mut HashSet<Vec<u16>>,
) -> Option<Rat> {
    if !super::masks_form_chain(verts) {
        return Some(Rat::zero());
    }
    if verts.windows(2).all(|w| w[0] < w[1]) {
        // d+1 distinct comparable vertices form a maximal chain.
        return Some(Rat::from_integer(1.into()));
    }
    if let Some(v) = memo.get(verts) {
        return v.clone();
    }
    if depth == 0 || !in_progress.insert(verts.to_vec()) {
        memo.insert(verts.to_vec(), None);
        return None;
    }

    // Expand the smallest repeated vertex: C_a² R = −Σ_{c' ≠ a} C_a C' R.
    let a = verts
        .windows(2)
        .find(|w| w[0] == w[1])
        .map(|w| w[0])
        .expect("non-squarefree monomial has a repeated vertex");
    let mut rest: Vec<u16> = verts.to_vec();
    let pos = rest.iter().position(|&v| v == a).expect("a is present");
    rest.remove(pos);

    let size = 1u16 << d;
    let mut acc = Rat::zero();
    let mut result = Some(());
    for c in 0..size {
        if c == a {
            continue;
        }
        let child = match super::insert_chain(&rest, c) {
            Some(key) => key,
            None => continue,
        };
        match go(d, &child, depth - 1, memo, in_progress) {
            Some(v) => acc -= v,
            None => {
                result = None;
                break;
            }
        }
    }
    in_progress.remove(verts);
    let value = result.map(|()| acc);
    memo.insert(verts.to_vec(), value.clone());
    value
}
