//! Finite graphs and the combinatorial structure of their d-fold powers.
//!
//! A metrized graph is presented as an ordered list of vertices and edges;
//! its d-fold power is covered by cube charts indexed by d-tuples of edges.
//! This module provides the graph model, chart enumeration, the simplex
//! decomposition of the cube, coincidence partitions of inner points with
//! their generalized diagonals, and n-fold edge subdivision.
//!
//! Conventions fixed here and relied on everywhere else:
//! - the coordinate t ∈ [0,1] on an edge (a, b) with a < b is the mass at b,
//!   so t = 0 is the tail and t = 1 is the head;
//! - charts and partitions carry canonical orders (lexicographic tuples,
//!   blocks sorted by least element) so emitted reports are byte-stable;
//! - axes are 0-based in code; the 1-based form appears only in serialized
//!   reports.

use crate::rat::{rat, Rat};
use num::traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Upper bound on d for set-partition enumeration (Bell-number growth).
pub const MAX_PARTITION_D: usize = 8;

/// Absolute tolerance for coincidence detection on floating-point points.
/// Rational points are compared exactly instead.
pub const EPS_COINCIDE: f64 = 1e-12;

/// Errors raised by graph validation and the combinatorial operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkeletonError {
    #[error("empty {0} list")]
    EmptyInput(&'static str),
    #[error("duplicate vertex name {0:?}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0:?} in edge list")]
    UnknownVertex(String),
    #[error("self-loop at vertex {0:?}")]
    SelfLoop(String),
    #[error("parallel edge between {0:?} and {1:?}")]
    ParallelEdge(String, String),
    #[error("coordinate {axis} = {value} is on the boundary, not inner")]
    NotInner { axis: usize, value: f64 },
    #[error("d = {d} exceeds the enumeration guard (max {max})")]
    TooLarge { d: usize, max: usize },
    #[error("invalid partition blocks: {0}")]
    BadPartition(String),
    #[error("invalid graph JSON: {0}")]
    BadJson(String),
    #[error("cell index {cell} out of range at level {level}")]
    BadCell { cell: u32, level: u32 },
}

/// A finite ordered graph without self-loops or parallel edges.
///
/// The vertex order is the strict total order all chart orientations refer
/// to; every edge is stored as (tail, head) with tail < head in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Graph {
    /// Vertex names in their defining order.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Edges as (tail, head) vertex-index pairs with tail < head.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The standard unit interval graph I with vertices "0" and "1".
    pub fn interval() -> Graph {
        Graph {
            vertices: vec!["0".to_string(), "1".to_string()],
            edges: vec![(0, 1)],
        }
    }

    /// Compact identifier used in report metadata, e.g. "2v1e".
    pub fn summary_id(&self) -> String {
        format!("{}v{}e", self.vertices.len(), self.edges.len())
    }

    /// Parses the graph interchange JSON
    /// `{"vertices":["v0","v1",...],"edges":[["v0","v1"],...]}`.
    pub fn from_json(text: &str) -> Result<Graph, SkeletonError> {
        let raw: GraphJson =
            serde_json::from_str(text).map_err(|e| SkeletonError::BadJson(e.to_string()))?;
        validate_graph(&raw.vertices, &raw.edges)
    }

    /// Serializes to the interchange JSON with vertex order preserved.
    pub fn to_json(&self) -> String {
        let raw = GraphJson {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (self.vertices[a].clone(), self.vertices[b].clone()))
                .collect(),
        };
        serde_json::to_string(&raw).expect("graph serialization cannot fail")
    }
}

/// Validates raw vertex and edge lists and returns the canonical graph.
///
/// Edges are normalized to (tail, head) with tail < head in the vertex
/// order; self-loops, parallel edges (in either orientation), duplicate
/// vertex names, and unknown endpoint names are rejected.
pub fn validate_graph(
    raw_vertices: &[String],
    raw_edges: &[(String, String)],
) -> Result<Graph, SkeletonError> {
    if raw_vertices.is_empty() {
        return Err(SkeletonError::EmptyInput("vertex"));
    }
    if raw_edges.is_empty() {
        return Err(SkeletonError::EmptyInput("edge"));
    }
    let mut index = BTreeMap::new();
    for (i, name) in raw_vertices.iter().enumerate() {
        if index.insert(name.clone(), i).is_some() {
            return Err(SkeletonError::DuplicateVertex(name.clone()));
        }
    }
    let mut edges = Vec::with_capacity(raw_edges.len());
    let mut seen = std::collections::HashSet::new();
    for (a, b) in raw_edges {
        let ia = *index
            .get(a)
            .ok_or_else(|| SkeletonError::UnknownVertex(a.clone()))?;
        let ib = *index
            .get(b)
            .ok_or_else(|| SkeletonError::UnknownVertex(b.clone()))?;
        if ia == ib {
            return Err(SkeletonError::SelfLoop(a.clone()));
        }
        let (tail, head) = if ia < ib { (ia, ib) } else { (ib, ia) };
        if !seen.insert((tail, head)) {
            return Err(SkeletonError::ParallelEdge(
                raw_vertices[tail].clone(),
                raw_vertices[head].clone(),
            ));
        }
        edges.push((tail, head));
    }
    Ok(Graph {
        vertices: raw_vertices.to_vec(),
        edges,
    })
}

/// A cube chart of the d-fold power: a d-tuple of edge indices denoting the
/// embedding of [0,1]^d with coordinate i running along the i-th edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chart {
    edge_indices: Vec<usize>,
}

impl Chart {
    pub fn new(edge_indices: Vec<usize>) -> Chart {
        Chart { edge_indices }
    }

    pub fn edge_indices(&self) -> &[usize] {
        &self.edge_indices
    }

    pub fn d(&self) -> usize {
        self.edge_indices.len()
    }

    /// Text key "e1,e2,...,ed" used by the function interchange format.
    pub fn key(&self) -> String {
        self.edge_indices
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses a chart key, checking arity and edge-index range.
    pub fn parse_key(key: &str, d: usize, edge_count: usize) -> Result<Chart, SkeletonError> {
        let parts: Vec<&str> = key.split(',').collect();
        if parts.len() != d {
            return Err(SkeletonError::BadPartition(format!(
                "chart key {key:?} has {} coordinates, expected {d}",
                parts.len()
            )));
        }
        let mut edge_indices = Vec::with_capacity(d);
        for p in parts {
            let e: usize = p
                .trim()
                .parse()
                .map_err(|_| SkeletonError::BadPartition(format!("bad chart key {key:?}")))?;
            if e >= edge_count {
                return Err(SkeletonError::BadPartition(format!(
                    "edge index {e} out of range in chart key {key:?}"
                )));
            }
            edge_indices.push(e);
        }
        Ok(Chart { edge_indices })
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// All |edges|^d cube charts of the d-fold power, in lexicographic order.
pub fn charts(g: &Graph, d: usize) -> Vec<Chart> {
    assert!(d >= 1, "chart dimension must be positive");
    let m = g.edge_count();
    let mut out = Vec::with_capacity(m.pow(d as u32));
    let mut current = vec![0usize; d];
    loop {
        out.push(Chart::new(current.clone()));
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            current[axis] += 1;
            if current[axis] < m {
                break;
            }
            current[axis] = 0;
        }
    }
}

/// Whether x lies in the closed simplex of the permutation sigma, i.e.
/// x[sigma[0]] ≤ x[sigma[1]] ≤ … ≤ x[sigma[d−1]].
///
/// The cube is covered by these simplices over all permutations; points
/// with coincident coordinates lie in several of them.
pub fn simplex_membership(x: &[f64], sigma: &[usize]) -> bool {
    debug_assert_eq!(x.len(), sigma.len());
    sigma.windows(2).all(|w| x[w[0]] <= x[w[1]])
}

/// A set partition of the axes {0,…,d−1} in canonical form: each block
/// sorted ascending, blocks ordered by their least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    d: usize,
}

impl Partition {
    /// Canonicalizes and validates a block list as a partition of {0,…,d−1}.
    pub fn new(blocks: Vec<Vec<usize>>, d: usize) -> Result<Partition, SkeletonError> {
        let mut seen = vec![false; d];
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
        for mut block in blocks {
            if block.is_empty() {
                return Err(SkeletonError::BadPartition("empty block".to_string()));
            }
            block.sort_unstable();
            for &a in &block {
                if a >= d {
                    return Err(SkeletonError::BadPartition(format!(
                        "axis {a} out of range for d = {d}"
                    )));
                }
                if seen[a] {
                    return Err(SkeletonError::BadPartition(format!(
                        "axis {a} appears twice"
                    )));
                }
                seen[a] = true;
            }
            canon.push(block);
        }
        if let Some(a) = seen.iter().position(|&s| !s) {
            return Err(SkeletonError::BadPartition(format!("axis {a} uncovered")));
        }
        canon.sort_by_key(|b| b[0]);
        Ok(Partition { blocks: canon, d })
    }

    /// The discrete partition {{0},{1},…,{d−1}}.
    pub fn discrete(d: usize) -> Partition {
        Partition {
            blocks: (0..d).map(|a| vec![a]).collect(),
            d,
        }
    }

    /// The one-block partition {{0,…,d−1}}.
    pub fn total(d: usize) -> Partition {
        Partition {
            blocks: vec![(0..d).collect()],
            d,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks |P|.
    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.d
    }

    /// Axis → index of the block containing it.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.d];
        for (j, block) in self.blocks.iter().enumerate() {
            for &a in block {
                out[a] = j;
            }
        }
        out
    }

    /// Blocks with 1-based axes, the form used in serialized reports.
    pub fn one_based_blocks(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|a| a + 1).collect())
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            write!(f, "{{")?;
            for (k, a) in block.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", a + 1)?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// The coincidence partition of an inner floating-point: axes whose
/// coordinates agree within `EPS_COINCIDE` share a block.
pub fn point_partition(x: &[f64]) -> Result<Partition, SkeletonError> {
    for (axis, &v) in x.iter().enumerate() {
        if !(v > 0.0 && v < 1.0) {
            return Err(SkeletonError::NotInner { axis, value: v });
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    'axes: for (axis, &v) in x.iter().enumerate() {
        for block in blocks.iter_mut() {
            if (x[block[0]] - v).abs() <= EPS_COINCIDE {
                block.push(axis);
                continue 'axes;
            }
        }
        blocks.push(vec![axis]);
    }
    blocks.sort_by_key(|b| b[0]);
    Ok(Partition { blocks, d: x.len() })
}

/// The coincidence partition of an inner rational point, compared exactly.
pub fn point_partition_rat(x: &[Rat]) -> Result<Partition, SkeletonError> {
    let zero = Rat::zero();
    let one = Rat::one();
    for (axis, v) in x.iter().enumerate() {
        if !(*v > zero && *v < one) {
            return Err(SkeletonError::NotInner {
                axis,
                value: crate::rat::rat_to_f64(v),
            });
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    'axes: for (axis, v) in x.iter().enumerate() {
        for block in blocks.iter_mut() {
            if &x[block[0]] == v {
                block.push(axis);
                continue 'axes;
            }
        }
        blocks.push(vec![axis]);
    }
    blocks.sort_by_key(|b| b[0]);
    Ok(Partition { blocks, d: x.len() })
}

/// All set partitions of {0,…,d−1} in canonical order (descending
/// lexicographic on restricted-growth strings), so the discrete partition
/// comes first and the one-block partition last. Count is Bell(d).
pub fn all_partitions(d: usize) -> Result<Vec<Partition>, SkeletonError> {
    if d < 1 || d > MAX_PARTITION_D {
        return Err(SkeletonError::TooLarge {
            d,
            max: MAX_PARTITION_D,
        });
    }
    let mut out = Vec::with_capacity(bell_number(d) as usize);
    let mut rgs = vec![0usize; d];
    descend(&mut rgs, 1, 1, &mut |rgs| {
        let blocks_count = rgs.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); blocks_count];
        for (axis, &b) in rgs.iter().enumerate() {
            blocks[b].push(axis);
        }
        out.push(Partition { blocks, d });
    });
    Ok(out)
}

fn descend(rgs: &mut Vec<usize>, pos: usize, max_used: usize, emit: &mut impl FnMut(&[usize])) {
    if pos == rgs.len() {
        emit(rgs);
        return;
    }
    for digit in (0..=max_used).rev() {
        rgs[pos] = digit;
        descend(rgs, pos + 1, max_used.max(digit + 1), emit);
    }
}

/// Bell number B(d): the number of set partitions of a d-element set.
pub fn bell_number(d: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..d {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    *row.last().unwrap()
}

/// Number of blocks of p meeting the support of the axis mask v
/// (bit i of the mask is axis i).
pub fn alpha(p: &Partition, v_mask: u32) -> usize {
    p.blocks
        .iter()
        .filter(|block| block.iter().any(|&a| v_mask >> a & 1 == 1))
        .count()
}

/// Where a subdivision vertex sits on the original graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexLocation {
    /// The index of the original vertex.
    Original(usize),
    /// Interior vertex at parameter step/level along the original edge.
    Interior { edge: usize, step: u32, level: u32 },
}

/// Coordinate data of an n-fold subdivision: the location of every new
/// vertex and, per original edge, the list of its n sub-edges in parameter
/// order.
#[derive(Debug, Clone)]
pub struct SubdivisionMap {
    locations: Vec<VertexLocation>,
    sub_edges: Vec<Vec<usize>>,
    old_edges: Vec<(usize, usize)>,
}

impl SubdivisionMap {
    pub fn location(&self, new_vertex: usize) -> &VertexLocation {
        &self.locations[new_vertex]
    }

    /// The j-th sub-edge (parameter range [j/n, (j+1)/n]) of an old edge.
    pub fn sub_edge(&self, old_edge: usize, j: usize) -> usize {
        self.sub_edges[old_edge][j]
    }

    pub fn sub_edges(&self, old_edge: usize) -> &[usize] {
        &self.sub_edges[old_edge]
    }

    /// Parameter of a new vertex on a given old edge, if it lies on it.
    pub fn parameter_on(&self, new_vertex: usize, old_edge: usize) -> Option<Rat> {
        match self.locations[new_vertex] {
            VertexLocation::Original(u) => {
                let (tail, head) = self.old_edges[old_edge];
                if u == tail {
                    Some(Rat::zero())
                } else if u == head {
                    Some(Rat::one())
                } else {
                    None
                }
            }
            VertexLocation::Interior { edge, step, level } => {
                (edge == old_edge).then(|| rat(step as i64, level as i64))
            }
        }
    }
}

/// The n-fold subdivision: every edge becomes a path of n edges through
/// n−1 fresh interior vertices at parameters i/n.
///
/// The new vertex order interleaves interior vertices after the tail of
/// their edge, which keeps every sub-edge oriented with its parameter
/// direction: no sub-edge is flipped relative to the original edge. The
/// new edge list is grouped by original edge in parameter order.
pub fn subdivide(g: &Graph, n: u32) -> (Graph, SubdivisionMap) {
    assert!(n >= 1, "subdivision level must be positive");
    // Sort key: originals at (v, -1, 0), interiors of edge e = (a, b) at
    // (a, e, j). This places interiors between consecutive original
    // vertices, so tail < interior_1 < … < interior_{n-1} < head holds in
    // the new order for every edge.
    let mut keyed: Vec<((usize, i64, u32), VertexLocation, String)> = Vec::new();
    for i in 0..g.vertex_count() {
        keyed.push((
            (i, -1, 0),
            VertexLocation::Original(i),
            g.vertices[i].clone(),
        ));
    }
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        for j in 1..n {
            let mut name = format!("{}~{}~{}", g.vertices[a], g.vertices[b], j);
            while g.vertices.contains(&name) {
                name.push('~');
            }
            keyed.push((
                (a, e as i64, j),
                VertexLocation::Interior {
                    edge: e,
                    step: j,
                    level: n,
                },
                name,
            ));
        }
    }
    keyed.sort_by(|x, y| x.0.cmp(&y.0));

    let mut locations = Vec::with_capacity(keyed.len());
    let mut names = Vec::with_capacity(keyed.len());
    let mut new_index_of_original = vec![0usize; g.vertex_count()];
    let mut interior_index: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    for (idx, (_, loc, name)) in keyed.into_iter().enumerate() {
        match loc {
            VertexLocation::Original(i) => new_index_of_original[i] = idx,
            VertexLocation::Interior { edge, step, .. } => {
                interior_index.insert((edge, step), idx);
            }
        }
        locations.push(loc);
        names.push(name);
    }

    let mut edges = Vec::with_capacity(g.edge_count() * n as usize);
    let mut sub_edges = Vec::with_capacity(g.edge_count());
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        let mut path = Vec::with_capacity(n as usize + 1);
        path.push(new_index_of_original[a]);
        for j in 1..n {
            path.push(interior_index[&(e, j)]);
        }
        path.push(new_index_of_original[b]);
        let mut subs = Vec::with_capacity(n as usize);
        for w in path.windows(2) {
            debug_assert!(w[0] < w[1], "subdivision must preserve orientation");
            subs.push(edges.len());
            edges.push((w[0], w[1]));
        }
        sub_edges.push(subs);
    }

    (
        Graph {
            vertices: names,
            edges,
        },
        SubdivisionMap {
            locations,
            sub_edges,
            old_edges: g.edges.clone(),
        },
    )
}

/// Parameterization of the generalized diagonal of a partition: `embed`
/// places the block parameters onto all axes of their block, `project`
/// reads them back off the block representatives.
#[derive(Debug, Clone)]
pub struct DiagonalChart {
    block_of: Vec<usize>,
    reps: Vec<usize>,
}

impl DiagonalChart {
    /// Dimension of the diagonal, |P|.
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.block_of.len()
    }

    pub fn embed(&self, t: &[f64]) -> Vec<f64> {
        debug_assert_eq!(t.len(), self.reps.len());
        self.block_of.iter().map(|&j| t[j]).collect()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.reps.iter().map(|&a| x[a]).collect()
    }

    pub fn embed_rat(&self, t: &[Rat]) -> Vec<Rat> {
        debug_assert_eq!(t.len(), self.reps.len());
        self.block_of.iter().map(|&j| t[j].clone()).collect()
    }

    pub fn project_rat(&self, x: &[Rat]) -> Vec<Rat> {
        self.reps.iter().map(|&a| x[a].clone()).collect()
    }
}

/// The diagonal chart of a partition; blocks are taken in canonical order
/// and represented by their least axis.
pub fn diagonal_chart(p: &Partition) -> DiagonalChart {
    DiagonalChart {
        block_of: p.block_of(),
        reps: p.blocks.iter().map(|b| b[0]).collect(),
    }
}

/// A 1/n-cell of a cube chart, identified by its lower-corner lattice
/// indices; its center is the evaluation point of lattice differences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePoint {
    pub chart: Chart,
    pub cell: Vec<u32>,
    pub level: u32,
}

impl LatticePoint {
    pub fn new(chart: Chart, cell: Vec<u32>, level: u32) -> Result<LatticePoint, SkeletonError> {
        for &c in &cell {
            if c >= level {
                return Err(SkeletonError::BadCell { cell: c, level });
            }
        }
        Ok(LatticePoint { chart, cell, level })
    }

    /// The cell center (cell + 1/2)/n, an inner point of the chart.
    pub fn center(&self) -> Vec<Rat> {
        self.cell
            .iter()
            .map(|&c| rat(2 * c as i64 + 1, 2 * self.level as i64))
            .collect()
    }

    pub fn center_f64(&self) -> Vec<f64> {
        self.cell
            .iter()
            .map(|&c| (2.0 * c as f64 + 1.0) / (2.0 * self.level as f64))
            .collect()
    }
}

/// Iterates all cells {0,…,n−1}^d in lexicographic order.
pub fn cells(d: usize, n: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (n as u64).pow(d as u32);
    (0..total).map(move |mut idx| {
        let mut cell = vec![0u32; d];
        for axis in (0..d).rev() {
            cell[axis] = (idx % n as u64) as u32;
            idx /= n as u64;
        }
        cell
    })
}
