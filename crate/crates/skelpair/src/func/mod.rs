//! Function spaces on Γ^d: chart-local expressions, exact grid functions,
//! difference operators, and quadrature.
//!
//! Two concrete function kinds feed the pairings. [`GridFunction`] holds
//! exact rational lattice values and models piecewise-affine functions;
//! [`ExprFunction`] holds one closed-form expression per cube chart and
//! models piecewise-smooth functions, tagged with the partition of
//! smoothness domains ([`Smoothness`]: smooth on whole cubes, or only on
//! the simplices cut out by coordinate order). [`AnyFunction`] is the
//! serialization-facing sum of the two.

mod diff;
mod expr;
mod grid;
mod quad;

pub use diff::{
    fourier_delta, generalized_differential, lattice_delta_expr, lattice_delta_grid, zhang_delta,
    EXTRAP_LEVELS, H_MIN,
};
pub use expr::{evaluate, parse_expr, Expr};
pub use grid::{grid_approximation, standard_approximation, GridFunction};
pub use quad::{diagonal_points, integrate_diagonal, integrate_grid_product, DiagonalPoint};

use crate::rat::ParseRatError;
use crate::skeleton::{charts, Chart, Graph, SkeletonError};
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors of the function layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncError {
    #[error("syntax error at byte {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("unknown identifier {name:?} at byte {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("{name} takes {expected} argument(s), got {got} (at byte {position})")]
    ArityMismatch {
        position: usize,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("evaluation failed: {detail}")]
    EvalError { detail: String },
    #[error("variable {name} exceeds dimension d = {d}")]
    VarOutOfRange { name: String, d: usize },
    #[error("level mismatch: expected {expected}, got {got}")]
    LevelMismatch { expected: u32, got: u32 },
    #[error("point leaves the open chart on axis {axis} (coordinate {value})")]
    OutOfRange { axis: usize, value: f64 },
    #[error("no usable difference radius: h0 = {h0} is below the minimum {min}")]
    DegenerateRadius { h0: f64, min: f64 },
    #[error("grid values disagree across charts: {detail}")]
    GluingMismatch { detail: String },
    #[error("chart {chart} has no function data")]
    MissingChart { chart: String },
    #[error("malformed function JSON: {0}")]
    BadJson(String),
    #[error("incompatible inputs: {detail}")]
    Incompatible { detail: String },
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
}

impl From<ParseRatError> for FuncError {
    fn from(e: ParseRatError) -> FuncError {
        FuncError::BadJson(e.to_string())
    }
}

/// Where an expression function is declared smooth: on every closed chart
/// cube, or only on the closed simplices of the coordinate-order
/// triangulation (functions like `abs(x1-x2)` that kink on diagonals).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Cubes,
    Simplices,
}

impl Smoothness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Smoothness::Cubes => "cubes",
            Smoothness::Simplices => "simplices",
        }
    }

    pub fn parse(s: &str) -> Result<Smoothness, FuncError> {
        match s {
            "cubes" => Ok(Smoothness::Cubes),
            "simplices" => Ok(Smoothness::Simplices),
            other => Err(FuncError::BadJson(format!(
                "smooth must be \"cubes\" or \"simplices\", got {other:?}"
            ))),
        }
    }
}

/// Piecewise-smooth function on Γ^d given by one expression per chart,
/// with an optional default expression (chart key "*") for all charts not
/// listed explicitly.
#[derive(Debug, Clone)]
pub struct ExprFunction {
    graph: Graph,
    d: usize,
    smooth: Smoothness,
    per_chart: BTreeMap<String, (String, Expr)>,
    default: Option<(String, Expr)>,
}

impl ExprFunction {
    /// Parses and validates the chart table. Entries are (chart key,
    /// expression source); the key "*" provides the default.
    pub fn new(
        graph: Graph,
        d: usize,
        smooth: Smoothness,
        entries: &[(String, String)],
    ) -> Result<ExprFunction, FuncError> {
        if d == 0 {
            return Err(FuncError::Incompatible {
                detail: "dimension must be at least 1".into(),
            });
        }
        if entries.is_empty() {
            return Err(FuncError::Incompatible {
                detail: "an expression function needs at least one chart entry".into(),
            });
        }
        let mut per_chart = BTreeMap::new();
        let mut default = None;
        for (key, source) in entries {
            let ast = parse_expr(source)?;
            if let Some(mv) = ast.max_var() {
                if mv >= d {
                    return Err(FuncError::VarOutOfRange {
                        name: format!("x{}", mv + 1),
                        d,
                    });
                }
            }
            if key == "*" {
                if default.is_some() {
                    return Err(FuncError::Incompatible {
                        detail: "duplicate default chart entry \"*\"".into(),
                    });
                }
                default = Some((source.clone(), ast));
            } else {
                Chart::parse_key(key, d, graph.edge_count())?;
                if per_chart
                    .insert(key.clone(), (source.clone(), ast))
                    .is_some()
                {
                    return Err(FuncError::Incompatible {
                        detail: format!("duplicate chart entry {key:?}"),
                    });
                }
            }
        }
        Ok(ExprFunction {
            graph,
            d,
            smooth,
            per_chart,
            default,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smooth
    }

    fn expr_for(&self, chart: &Chart) -> Result<&Expr, FuncError> {
        let key = chart.key();
        if let Some((_, ast)) = self.per_chart.get(&key) {
            return Ok(ast);
        }
        if let Some((_, ast)) = &self.default {
            return Ok(ast);
        }
        Err(FuncError::MissingChart { chart: key })
    }

    /// Evaluates the chart's expression at x ∈ [0,1]^d.
    pub fn eval(&self, chart: &Chart, x: &[f64]) -> Result<f64, FuncError> {
        evaluate(self.expr_for(chart)?, x)
    }

    /// Samples shared chart faces and reports charts whose expressions
    /// visibly disagree there. Warnings, not errors: the pairing theory
    /// assumes continuity, and this check catches the blatant violations.
    pub fn continuity_warnings(&self) -> Vec<String> {
        const SAMPLES: usize = 16;
        const TOL: f64 = 1e-9;
        let chart_list = charts(&self.graph, self.d);
        let edges = self.graph.edges();
        let mut warnings = Vec::new();
        for (i, a) in chart_list.iter().enumerate() {
            for b in chart_list.iter().skip(i + 1) {
                let differing: Vec<usize> = (0..self.d)
                    .filter(|&j| a.edge_indices()[j] != b.edge_indices()[j])
                    .collect();
                if differing.len() != 1 {
                    continue;
                }
                let axis = differing[0];
                let (ea, eb) = (a.edge_indices()[axis], b.edge_indices()[axis]);
                let shared: Vec<usize> = [edges[ea].0, edges[ea].1]
                    .iter()
                    .filter(|v| **v == edges[eb].0 || **v == edges[eb].1)
                    .copied()
                    .collect();
                let (fa, fb) = match (self.expr_for(a), self.expr_for(b)) {
                    (Ok(fa), Ok(fb)) => (fa, fb),
                    _ => continue,
                };
                for &vertex in &shared {
                    let ta = if vertex == edges[ea].0 { 0.0 } else { 1.0 };
                    let tb = if vertex == edges[eb].0 { 0.0 } else { 1.0 };
                    let mut worst = 0.0f64;
                    for s in 0..SAMPLES {
                        let mut xa = vec![0.0; self.d];
                        let mut xb = vec![0.0; self.d];
                        let mut rank = 0usize;
                        for j in 0..self.d {
                            if j == axis {
                                xa[j] = ta;
                                xb[j] = tb;
                            } else {
                                let u = ((s as f64 + 0.5) / SAMPLES as f64
                                    + 0.37 * rank as f64)
                                    .fract();
                                xa[j] = u;
                                xb[j] = u;
                                rank += 1;
                            }
                        }
                        match (evaluate(fa, &xa), evaluate(fb, &xb)) {
                            (Ok(va), Ok(vb)) => worst = worst.max((va - vb).abs()),
                            _ => {}
                        }
                    }
                    if worst > TOL {
                        warnings.push(format!(
                            "charts {a} and {b} differ by {worst:.3e} on their shared face \
                             (axis {}, vertex {})",
                            axis + 1,
                            self.graph.vertices()[vertex]
                        ));
                    }
                }
            }
        }
        warnings
    }
}

/// A function of either kind, as read from function JSON.
#[derive(Debug, Clone)]
pub enum AnyFunction {
    Grid(GridFunction),
    Expr(ExprFunction),
}

impl AnyFunction {
    pub fn d(&self) -> usize {
        match self {
            AnyFunction::Grid(g) => g.d(),
            AnyFunction::Expr(f) => f.d(),
        }
    }

    pub fn graph(&self) -> &Graph {
        match self {
            AnyFunction::Grid(g) => g.graph(),
            AnyFunction::Expr(f) => f.graph(),
        }
    }

    /// Float value at a chart point; grids interpolate piecewise-affinely.
    pub fn value(&self, chart: &Chart, x: &[f64]) -> Result<f64, FuncError> {
        match self {
            AnyFunction::Grid(g) => g.interpolate_f64(chart, x),
            AnyFunction::Expr(f) => f.eval(chart, x),
        }
    }

    /// Parses function JSON against a graph and dimension:
    /// `{"type":"expr","smooth":"cubes"|"simplices","charts":{key:expr}}`
    /// with optional key "*" as default, or
    /// `{"type":"grid","n":N,"values":{chart-key:["p/q",…]}}`.
    pub fn from_json(graph: &Graph, d: usize, text: &str) -> Result<AnyFunction, FuncError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| FuncError::BadJson(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| FuncError::BadJson("top level must be an object".into()))?;
        let kind = obj
            .get("type")
            .and_then(|v| v.as_str())
            .ok_or_else(|| FuncError::BadJson("missing \"type\"".into()))?;
        match kind {
            "expr" => {
                let smooth = Smoothness::parse(
                    obj.get("smooth")
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| FuncError::BadJson("missing \"smooth\"".into()))?,
                )?;
                let chart_obj = obj
                    .get("charts")
                    .and_then(|v| v.as_object())
                    .ok_or_else(|| FuncError::BadJson("missing \"charts\" object".into()))?;
                let mut entries = Vec::new();
                for (key, v) in chart_obj {
                    let source = v.as_str().ok_or_else(|| {
                        FuncError::BadJson(format!("chart {key:?} must map to a string"))
                    })?;
                    entries.push((key.clone(), source.to_string()));
                }
                Ok(AnyFunction::Expr(ExprFunction::new(
                    graph.clone(),
                    d,
                    smooth,
                    &entries,
                )?))
            }
            "grid" => {
                let n = obj
                    .get("n")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| FuncError::BadJson("missing integer \"n\"".into()))?
                    as u32;
                let value_obj = obj
                    .get("values")
                    .and_then(|v| v.as_object())
                    .ok_or_else(|| FuncError::BadJson("missing \"values\" object".into()))?;
                let chart_list = charts(graph, d);
                let mut values = Vec::with_capacity(chart_list.len());
                for chart in &chart_list {
                    let key = chart.key();
                    let array = value_obj
                        .get(&key)
                        .and_then(|v| v.as_array())
                        .ok_or_else(|| FuncError::MissingChart { chart: key.clone() })?;
                    let mut rats = Vec::with_capacity(array.len());
                    for cell in array {
                        let s = cell.as_str().ok_or_else(|| {
                            FuncError::BadJson(format!(
                                "grid values must be \"p/q\" strings (chart {key})"
                            ))
                        })?;
                        rats.push(crate::rat::parse_rat(s)?);
                    }
                    values.push(rats);
                }
                if value_obj.len() != chart_list.len() {
                    return Err(FuncError::BadJson(format!(
                        "expected {} chart arrays, got {}",
                        chart_list.len(),
                        value_obj.len()
                    )));
                }
                Ok(AnyFunction::Grid(GridFunction::new(
                    graph.clone(),
                    d,
                    n,
                    values,
                )?))
            }
            other => Err(FuncError::BadJson(format!(
                "type must be \"expr\" or \"grid\", got {other:?}"
            ))),
        }
    }

    /// Serializes back to the documented schema with sorted keys.
    pub fn to_json(&self) -> String {
        match self {
            AnyFunction::Expr(f) => {
                let mut chart_map = serde_json::Map::new();
                if let Some((source, _)) = &f.default {
                    chart_map.insert("*".into(), serde_json::Value::String(source.clone()));
                }
                for (key, (source, _)) in &f.per_chart {
                    chart_map.insert(key.clone(), serde_json::Value::String(source.clone()));
                }
                serde_json::json!({
                    "type": "expr",
                    "smooth": f.smooth.as_str(),
                    "charts": chart_map,
                })
                .to_string()
            }
            AnyFunction::Grid(g) => {
                let mut value_map = serde_json::Map::new();
                for (ci, chart) in g.charts().iter().enumerate() {
                    let array: Vec<serde_json::Value> = g
                        .chart_values(ci)
                        .iter()
                        .map(|r| serde_json::Value::String(crate::rat::format_rat(r)))
                        .collect();
                    value_map.insert(chart.key(), serde_json::Value::Array(array));
                }
                serde_json::json!({
                    "type": "grid",
                    "n": g.n(),
                    "values": value_map,
                })
                .to_string()
            }
        }
    }
}
