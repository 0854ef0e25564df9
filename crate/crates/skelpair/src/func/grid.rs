//! Piecewise-affine grid functions on Γ^d.
//!
//! A `GridFunction` stores one exact rational value per lattice vertex
//! (i_1/n, …, i_d/n) of every cube chart, row-major with the first axis
//! most significant. Values on shared chart boundaries are stored once per
//! chart but must agree; the constructor checks this by identifying each
//! lattice vertex with its global position on the graph. Between lattice
//! vertices the function is the piecewise-affine interpolation on the
//! standard (Kuhn) triangulation of each 1/n-cell, which is what level-n
//! standard approximations produce.

use super::{ExprFunction, FuncError};
use crate::rat::{dyadic53, rat_to_f64, Rat};
use crate::skeleton::{cells, charts, subdivide, Chart, Graph};
use num::traits::{Signed, ToPrimitive};

/// Global identity of a lattice position on one axis: a graph vertex or an
/// interior point (edge, step) at parameter step/n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PointId {
    V(usize),
    E(usize, u32),
}

fn point_id(graph: &Graph, edge: usize, step: u32, n: u32) -> PointId {
    let (tail, head) = graph.edges()[edge];
    if step == 0 {
        PointId::V(tail)
    } else if step == n {
        PointId::V(head)
    } else {
        PointId::E(edge, step)
    }
}

/// Exact piecewise-affine function on the level-n lattice of Γ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    graph: Graph,
    d: usize,
    n: u32,
    charts: Vec<Chart>,
    values: Vec<Vec<Rat>>,
}

impl GridFunction {
    /// Builds a grid from per-chart value arrays, validating array shapes
    /// and cross-chart gluing.
    pub fn new(
        graph: Graph,
        d: usize,
        n: u32,
        values: Vec<Vec<Rat>>,
    ) -> Result<GridFunction, FuncError> {
        if d == 0 {
            return Err(FuncError::Incompatible {
                detail: "grid dimension must be at least 1".into(),
            });
        }
        if n == 0 {
            return Err(FuncError::Incompatible {
                detail: "grid level must be at least 1".into(),
            });
        }
        let chart_list = charts(&graph, d);
        if values.len() != chart_list.len() {
            return Err(FuncError::Incompatible {
                detail: format!(
                    "expected {} chart value arrays, got {}",
                    chart_list.len(),
                    values.len()
                ),
            });
        }
        let per_chart = (n as usize + 1).pow(d as u32);
        for (chart, array) in chart_list.iter().zip(&values) {
            if array.len() != per_chart {
                return Err(FuncError::Incompatible {
                    detail: format!(
                        "chart {chart} expects {per_chart} values, got {}",
                        array.len()
                    ),
                });
            }
        }
        let g = GridFunction {
            graph,
            d,
            n,
            charts: chart_list,
            values,
        };
        g.check_gluing()?;
        Ok(g)
    }

    fn check_gluing(&self) -> Result<(), FuncError> {
        use std::collections::HashMap;
        let mut seen: HashMap<Vec<PointId>, (usize, Rat)> = HashMap::new();
        for (ci, chart) in self.charts.iter().enumerate() {
            for corner in cells(self.d, self.n + 1) {
                let id: Vec<PointId> = corner
                    .iter()
                    .zip(chart.edge_indices())
                    .map(|(&i, &e)| point_id(&self.graph, e, i, self.n))
                    .collect();
                let value = &self.values[ci][self.corner_index(&corner)];
                match seen.get(&id) {
                    Some((first_chart, stored)) if stored != value => {
                        return Err(FuncError::GluingMismatch {
                            detail: format!(
                                "charts {} and {} disagree at a shared lattice vertex: {} vs {}",
                                self.charts[*first_chart], chart, stored, value
                            ),
                        });
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(id, (ci, value.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Constant grid c at any level.
    pub fn constant(graph: Graph, d: usize, n: u32, c: Rat) -> Result<GridFunction, FuncError> {
        let count = charts(&graph, d).len();
        let per_chart = (n as usize + 1).pow(d as u32);
        GridFunction::new(graph, d, n, vec![vec![c; per_chart]; count])
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart_values(&self, chart_index: usize) -> &[Rat] {
        &self.values[chart_index]
    }

    /// Row-major index of a lattice corner, first axis most significant.
    pub fn corner_index(&self, corner: &[u32]) -> usize {
        corner
            .iter()
            .fold(0usize, |acc, &i| acc * (self.n as usize + 1) + i as usize)
    }

    pub fn chart_index(&self, chart: &Chart) -> Result<usize, FuncError> {
        self.charts
            .binary_search_by(|c| c.edge_indices().cmp(chart.edge_indices()))
            .map_err(|_| FuncError::MissingChart {
                chart: chart.to_string(),
            })
    }

    /// Value at a lattice corner of a chart.
    pub fn corner_value(&self, chart: &Chart, corner: &[u32]) -> Result<&Rat, FuncError> {
        let ci = self.chart_index(chart)?;
        Ok(&self.values[ci][self.corner_index(corner)])
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction, FuncError> {
        self.compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        GridFunction::new(self.graph.clone(), self.d, self.n, values)
    }

    pub fn scale(&self, c: &Rat) -> GridFunction {
        GridFunction {
            graph: self.graph.clone(),
            d: self.d,
            n: self.n,
            charts: self.charts.clone(),
            values: self
                .values
                .iter()
                .map(|a| a.iter().map(|x| x * c).collect())
                .collect(),
        }
    }

    fn compatible(&self, other: &GridFunction) -> Result<(), FuncError> {
        if self.n != other.n {
            return Err(FuncError::LevelMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.d != other.d || self.graph != other.graph {
            return Err(FuncError::Incompatible {
                detail: "grids live on different graph powers".into(),
            });
        }
        Ok(())
    }

    /// Exact interpolated value at a rational point of a chart cube, using
    /// the piecewise-affine extension on the Kuhn triangulation.
    pub fn interpolate(&self, chart: &Chart, y: &[Rat]) -> Result<Rat, FuncError> {
        let ci = self.chart_index(chart)?;
        debug_assert_eq!(y.len(), self.d);
        let n_rat = Rat::from_integer(self.n.into());
        let mut cell: Vec<u32> = Vec::with_capacity(self.d);
        let mut t: Vec<Rat> = Vec::with_capacity(self.d);
        for yk in y {
            debug_assert!(!yk.is_negative() && *yk <= Rat::from_integer(1.into()));
            let scaled = yk * &n_rat;
            let mut floor = scaled.floor().to_integer().to_u32().unwrap_or(0);
            if floor >= self.n {
                floor = self.n - 1;
            }
            cell.push(floor);
            t.push(&scaled - Rat::from_integer(floor.into()));
        }
        // Axes sorted by local coordinate descending walk the Kuhn simplex
        // containing t; ties break by axis index for determinism.
        let mut order: Vec<usize> = (0..self.d).collect();
        order.sort_by(|&a, &b| t[b].cmp(&t[a]).then(a.cmp(&b)));
        let mut corner = cell.clone();
        let one = Rat::from_integer(1.into());
        let mut value = (&one - &t[order[0]]) * &self.values[ci][self.corner_index(&corner)];
        for (k, &axis) in order.iter().enumerate() {
            corner[axis] += 1;
            let weight = match order.get(k + 1) {
                Some(&next) => &t[axis] - &t[next],
                None => t[axis].clone(),
            };
            value += weight * &self.values[ci][self.corner_index(&corner)];
        }
        Ok(value)
    }

    /// Float interpolation for the numeric difference operators.
    pub fn interpolate_f64(&self, chart: &Chart, y: &[f64]) -> Result<f64, FuncError> {
        let ys: Vec<Rat> = y
            .iter()
            .map(|&v| {
                dyadic53(v.clamp(0.0, 1.0)).ok_or(FuncError::EvalError {
                    detail: "non-finite coordinate".into(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(rat_to_f64(&self.interpolate(chart, &ys)?))
    }

    /// Resamples onto a finer lattice; the level must be a multiple of the
    /// current one so the function itself is unchanged.
    pub fn refine(&self, m: u32) -> Result<GridFunction, FuncError> {
        if m == 0 || m % self.n != 0 {
            return Err(FuncError::LevelMismatch {
                expected: self.n,
                got: m,
            });
        }
        let m_rat = Rat::from_integer(m.into());
        let mut values = Vec::with_capacity(self.charts.len());
        for chart in &self.charts {
            let mut array = Vec::with_capacity((m as usize + 1).pow(self.d as u32));
            for corner in cells(self.d, m + 1) {
                let y: Vec<Rat> = corner
                    .iter()
                    .map(|&i| Rat::from_integer(i.into()) / &m_rat)
                    .collect();
                array.push(self.interpolate(chart, &y)?);
            }
            values.push(array);
        }
        GridFunction::new(self.graph.clone(), self.d, m, values)
    }

    /// Reinterprets a level-n grid on Γ as a level-(n/k) grid on the k-fold
    /// subdivision sd_k(Γ). Pure relabeling: every lattice vertex keeps its
    /// value, so lattice differences are unchanged.
    pub fn rebase_to_subdivision(&self, k: u32) -> Result<GridFunction, FuncError> {
        if k == 0 || self.n % k != 0 {
            return Err(FuncError::LevelMismatch {
                expected: self.n,
                got: k,
            });
        }
        let new_n = self.n / k;
        if new_n == 0 {
            return Err(FuncError::LevelMismatch {
                expected: self.n,
                got: k,
            });
        }
        let (sub_graph, map) = subdivide(&self.graph, k);
        // Inverse of the sub-edge listing: new edge -> (old edge, slot).
        let mut origin = vec![(0usize, 0u32); sub_graph.edge_count()];
        for old_edge in 0..self.graph.edge_count() {
            for (slot, &new_edge) in map.sub_edges(old_edge).iter().enumerate() {
                origin[new_edge] = (old_edge, slot as u32);
            }
        }
        let new_charts = charts(&sub_graph, self.d);
        let mut values = Vec::with_capacity(new_charts.len());
        for chart in &new_charts {
            let sources: Vec<(usize, u32)> = chart
                .edge_indices()
                .iter()
                .map(|&e| origin[e])
                .collect();
            let old_chart = Chart::new(sources.iter().map(|&(e, _)| e).collect());
            let old_ci = self.chart_index(&old_chart)?;
            let mut array = Vec::with_capacity((new_n as usize + 1).pow(self.d as u32));
            for corner in cells(self.d, new_n + 1) {
                let old_corner: Vec<u32> = corner
                    .iter()
                    .zip(&sources)
                    .map(|(&i, &(_, slot))| slot * new_n + i)
                    .collect();
                array.push(self.values[old_ci][self.corner_index(&old_corner)].clone());
            }
            values.push(array);
        }
        GridFunction::new(sub_graph, self.d, new_n, values)
    }
}

/// The level-n standard approximation of an expression function: exact
/// dyadic rationalization of its values at the lattice vertices, each
/// shared vertex evaluated once so gluing holds by construction.
pub fn standard_approximation(f: &ExprFunction, n: u32) -> Result<GridFunction, FuncError> {
    use std::collections::HashMap;
    let graph = f.graph().clone();
    let d = f.d();
    let chart_list = charts(&graph, d);
    let mut cache: HashMap<Vec<PointId>, Rat> = HashMap::new();
    let mut values = Vec::with_capacity(chart_list.len());
    for chart in &chart_list {
        let mut array = Vec::with_capacity((n as usize + 1).pow(d as u32));
        for corner in cells(d, n + 1) {
            let id: Vec<PointId> = corner
                .iter()
                .zip(chart.edge_indices())
                .map(|(&i, &e)| point_id(&graph, e, i, n))
                .collect();
            let value = match cache.get(&id) {
                Some(v) => v.clone(),
                None => {
                    let x: Vec<f64> = corner.iter().map(|&i| i as f64 / n as f64).collect();
                    let y = f.eval(chart, &x)?;
                    let v = dyadic53(y).ok_or(FuncError::EvalError {
                        detail: format!("value {y} has no dyadic representation"),
                    })?;
                    cache.insert(id, v.clone());
                    v
                }
            };
            array.push(value);
        }
        values.push(array);
    }
    GridFunction::new(graph, d, n, values)
}

/// Projection of a grid onto the level-n piecewise-affine space by exact
/// resampling; at the grid's own level this is the identity.
pub fn grid_approximation(g: &GridFunction, n: u32) -> Result<GridFunction, FuncError> {
    if n == g.n() {
        return Ok(g.clone());
    }
    let n_rat = Rat::from_integer(n.into());
    let mut values = Vec::with_capacity(g.charts().len());
    for chart in g.charts() {
        let mut array = Vec::with_capacity((n as usize + 1).pow(g.d() as u32));
        for corner in cells(g.d(), n + 1) {
            let y: Vec<Rat> = corner
                .iter()
                .map(|&i| Rat::from_integer(i.into()) / &n_rat)
                .collect();
            array.push(g.interpolate(chart, &y)?);
        }
        values.push(array);
    }
    GridFunction::new(g.graph().clone(), g.d(), n, values)
}
