//! Exact solver for the degree functional on the top graded piece.
//!
//! Unknowns are the chain-support monomials of degree d+1. Rows come in
//! three families: normalization (value 1 on each product of d+1 distinct
//! comparable vertices), vertex-sum relations ((Σ_{C'} C')·M = 0 paired
//! against every degree-d chain monomial M), and axis partial sums (for
//! C_1, C_2 differing in axis i, the sum over C' agreeing with C_2 on that
//! axis annihilates every degree-(d−2) chain cofactor). Elimination is
//! sparse Gaussian over `BigRational` with a deterministic work counter,
//! so an exhausted budget is reported identically on every run.

use super::{ChowError, Monomial};
use crate::rat::Rat;
use num::traits::Zero;
use std::collections::{BTreeMap, HashMap, HashSet};

struct Row {
    /// Sorted (column, coefficient) pairs, no zeros.
    cols: Vec<(usize, Rat)>,
    rhs: Rat,
}

pub(crate) fn solve_degree_system(
    d: u8,
    budget: u64,
) -> Result<BTreeMap<Monomial, Rat>, ChowError> {
    let mut work = 0u64;
    let columns = multichains(d, d as usize + 1);
    let col_index: HashMap<&[u16], usize> = columns
        .iter()
        .enumerate()
        .map(|(i, key)| (key.as_slice(), i))
        .collect();
    let rows = assemble_rows(d, &columns, &col_index, budget, &mut work)?;
    let values = eliminate(columns.len(), rows, budget, &mut work)?;
    if let Some(free) = free_column_report(&columns, &values, d) {
        return Err(ChowError::Underdetermined { free });
    }
    Ok(columns
        .into_iter()
        .zip(values)
        .map(|(key, value)| {
            (
                Monomial::from_sorted_masks(d, key),
                value.expect("free columns were reported above"),
            )
        })
        .collect())
}

/// Sorted chain sequences of the given length over F_2^d, ascending
/// lexicographically. Repeats are allowed; each next vertex must contain
/// the previous one.
fn multichains(d: u8, len: usize) -> Vec<Vec<u16>> {
    let size = 1u16 << d;
    let mut out = Vec::new();
    let mut path: Vec<u16> = Vec::with_capacity(len);
    fn go(size: u16, len: usize, path: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if path.len() == len {
            out.push(path.clone());
            return;
        }
        let last = path.last().copied();
        for w in last.unwrap_or(0)..size {
            if let Some(p) = last {
                if p & !w != 0 {
                    continue;
                }
            }
            path.push(w);
            go(size, len, path, out);
            path.pop();
        }
    }
    go(size, len, &mut path, &mut out);
    out
}

fn assemble_rows(
    d: u8,
    columns: &[Vec<u16>],
    col_index: &HashMap<&[u16], usize>,
    budget: u64,
    work: &mut u64,
) -> Result<Vec<Row>, ChowError> {
    let size = 1u16 << d;
    let one = Rat::from_integer(1.into());
    let mut rows: Vec<Row> = Vec::new();

    // Normalization: squarefree chains of length d+1 are maximal chains.
    for (i, key) in columns.iter().enumerate() {
        if key.windows(2).all(|w| w[0] < w[1]) {
            rows.push(Row {
                cols: vec![(i, one.clone())],
                rhs: one.clone(),
            });
        }
    }

    let mut seen: HashSet<Vec<usize>> = HashSet::new();

    // Vertex-sum rows, one per degree-d chain monomial.
    for m in multichains(d, d as usize) {
        let mut cols: Vec<usize> = Vec::new();
        for c in 0..size {
            *work += 1;
            if let Some(key) = super::insert_chain(&m, c) {
                cols.push(col_index[key.as_slice()]);
            }
        }
        if *work > budget {
            return Err(ChowError::Timeout {
                work: *work,
                budget,
            });
        }
        push_row(&mut rows, &mut seen, cols, &one);
    }

    // Axis partial sums over degree-(d−2) cofactors.
    if d >= 2 {
        for n in multichains(d, d as usize - 2) {
            for c1 in 0..size {
                let with_c1 = match super::insert_chain(&n, c1) {
                    Some(key) => key,
                    None => continue,
                };
                for c2 in 0..size {
                    if c2 == c1 {
                        continue;
                    }
                    let with_both = match super::insert_chain(&with_c1, c2) {
                        Some(key) => key,
                        None => continue,
                    };
                    let differing = c1 ^ c2;
                    for axis in 0..d {
                        if differing >> axis & 1 == 0 {
                            continue;
                        }
                        let want = c2 >> axis & 1;
                        let mut cols: Vec<usize> = Vec::new();
                        for c in 0..size {
                            *work += 1;
                            if c >> axis & 1 != want {
                                continue;
                            }
                            if let Some(key) = super::insert_chain(&with_both, c) {
                                cols.push(col_index[key.as_slice()]);
                            }
                        }
                        push_row(&mut rows, &mut seen, cols, &one);
                    }
                    if *work > budget {
                        return Err(ChowError::Timeout {
                            work: *work,
                            budget,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn push_row(rows: &mut Vec<Row>, seen: &mut HashSet<Vec<usize>>, mut cols: Vec<usize>, one: &Rat) {
    if cols.is_empty() {
        return;
    }
    cols.sort_unstable();
    if !seen.insert(cols.clone()) {
        return;
    }
    rows.push(Row {
        cols: cols.into_iter().map(|c| (c, one.clone())).collect(),
        rhs: Rat::zero(),
    });
}

/// Incremental echelon elimination. Returns per-column values, `None` for
/// free columns.
fn eliminate(
    ncols: usize,
    rows: Vec<Row>,
    budget: u64,
    work: &mut u64,
) -> Result<Vec<Option<Rat>>, ChowError> {
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut pivot_rows: Vec<Row> = Vec::new();

    for mut row in rows {
        loop {
            let lead = match row.cols.first() {
                Some(&(col, _)) => col,
                None => break,
            };
            let pivot = match pivot_of_col[lead] {
                Some(i) => &pivot_rows[i],
                None => break,
            };
            let factor = row.cols[0].1.clone();
            row = subtract_scaled(row, &factor, pivot, work);
            if *work > budget {
                return Err(ChowError::Timeout {
                    work: *work,
                    budget,
                });
            }
        }
        if row.cols.is_empty() {
            if !row.rhs.is_zero() {
                return Err(ChowError::InconsistentRelations {
                    detail: format!("a relation row reduced to 0 = {}", row.rhs),
                });
            }
            continue;
        }
        let lead_coeff = row.cols[0].1.clone();
        if lead_coeff != Rat::from_integer(1.into()) {
            for (_, c) in row.cols.iter_mut() {
                *c /= &lead_coeff;
            }
            row.rhs /= &lead_coeff;
            *work += row.cols.len() as u64;
        }
        pivot_of_col[row.cols[0].0] = Some(pivot_rows.len());
        pivot_rows.push(row);
    }

    // Back-substitution in descending column order. A pivot fed by a free
    // column stays `None` so the caller reports both.
    let mut values: Vec<Option<Rat>> = vec![None; ncols];
    'cols: for col in (0..ncols).rev() {
        let pivot = match pivot_of_col[col] {
            Some(i) => &pivot_rows[i],
            None => continue,
        };
        let mut value = pivot.rhs.clone();
        for (j, c) in &pivot.cols[1..] {
            match &values[*j] {
                Some(vj) => value -= c * vj,
                None => continue 'cols,
            }
        }
        values[col] = Some(value);
    }
    Ok(values)
}

/// row − factor·pivot, assuming both are sorted; drops cancelled entries.
fn subtract_scaled(row: Row, factor: &Rat, pivot: &Row, work: &mut u64) -> Row {
    *work += (row.cols.len() + pivot.cols.len()) as u64;
    let mut cols = Vec::with_capacity(row.cols.len() + pivot.cols.len());
    let mut i = 0;
    let mut j = 0;
    while i < row.cols.len() || j < pivot.cols.len() {
        if j == pivot.cols.len()
            || (i < row.cols.len() && row.cols[i].0 < pivot.cols[j].0)
        {
            cols.push(row.cols[i].clone());
            i += 1;
        } else if i == row.cols.len() || pivot.cols[j].0 < row.cols[i].0 {
            let (col, c) = &pivot.cols[j];
            cols.push((*col, -(factor * c)));
            j += 1;
        } else {
            let c = &row.cols[i].1 - factor * &pivot.cols[j].1;
            if !c.is_zero() {
                cols.push((row.cols[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    let rhs = row.rhs - factor * &pivot.rhs;
    Row { cols, rhs }
}

fn free_column_report(
    columns: &[Vec<u16>],
    values: &[Option<Rat>],
    d: u8,
) -> Option<Vec<String>> {
    let mut free: Vec<String> = Vec::new();
    let mut extra = 0usize;
    for (key, value) in columns.iter().zip(values) {
        if value.is_none() {
            if free.len() < 12 {
                free.push(Monomial::from_sorted_masks(d, key.clone()).to_string());
            } else {
                extra += 1;
            }
        }
    }
    if free.is_empty() {
        return None;
    }
    if extra > 0 {
        free.push(format!("and {extra} more"));
    }
    Some(free)
}
