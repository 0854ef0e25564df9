//! Integration over Γ^d and its generalized diagonals.
//!
//! Grid products integrate exactly: lattice differences are constant on
//! each 1/n-cell, so the integral is a finite rational sum. Diagonal
//! integrals use a composite midpoint rule over [0,1]^{|P|} per chart of
//! Γ^{|P|}; midpoints are inner points by construction, which keeps
//! integrands away from chart boundaries and (generically) off deeper
//! diagonal strata.

use super::{FuncError, GridFunction};
use crate::chow::BitVec;
use crate::rat::Rat;
use crate::skeleton::{cells, charts, diagonal_chart, Chart, Graph, LatticePoint, Partition};
use num::traits::One;

/// One midpoint-rule node on the diagonal 𝒟_P: block coordinates t on
/// [0,1]^{|P|} and the embedded ambient point x in the ambient chart.
#[derive(Debug, Clone)]
pub struct DiagonalPoint {
    pub ambient_chart: Chart,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

/// The midpoint nodes of the m-per-axis rule on 𝒟_P, in deterministic
/// chart-then-lexicographic order. Every node carries weight m^{−|P|}.
pub fn diagonal_points(graph: &Graph, p: &Partition, m: u32) -> Vec<DiagonalPoint> {
    let k = p.size();
    let dc = diagonal_chart(p);
    let block_of = p.block_of();
    let mut out = Vec::new();
    for block_chart in charts(graph, k) {
        let ambient_chart = Chart::new(
            block_of
                .iter()
                .map(|&b| block_chart.edge_indices()[b])
                .collect(),
        );
        for cell in cells(k, m) {
            let t: Vec<f64> = cell
                .iter()
                .map(|&c| (2 * c + 1) as f64 / (2 * m) as f64)
                .collect();
            let x = dc.embed(&t);
            out.push(DiagonalPoint {
                ambient_chart: ambient_chart.clone(),
                t,
                x,
            });
        }
    }
    out
}

/// Composite midpoint quadrature of an integrand over the diagonal 𝒟_P,
/// summed over the charts of Γ^{|P|}.
pub fn integrate_diagonal(
    graph: &Graph,
    p: &Partition,
    m: u32,
    integrand: &mut dyn FnMut(&Chart, &[f64]) -> Result<f64, FuncError>,
) -> Result<f64, FuncError> {
    if m == 0 {
        return Err(FuncError::Incompatible {
            detail: "quadrature needs at least one point per axis".into(),
        });
    }
    let weight = (m as f64).powi(-(p.size() as i32));
    let mut total = 0.0f64;
    for node in diagonal_points(graph, p, m) {
        total += integrand(&node.ambient_chart, &node.x)? * weight;
    }
    Ok(total)
}

/// Exact integral over Γ^d of a product of lattice differences,
/// Σ_{charts, cells} ∏_i Δ̃_n^{v_i} f_i · n^{−d}.
pub fn integrate_grid_product(
    factors: &[(&GridFunction, BitVec)],
    n: u32,
) -> Result<Rat, FuncError> {
    let (first, _) = factors.first().ok_or_else(|| FuncError::Incompatible {
        detail: "product integral needs at least one factor".into(),
    })?;
    let d = first.d();
    for (g, v) in factors {
        if g.n() != n {
            return Err(FuncError::LevelMismatch {
                expected: n,
                got: g.n(),
            });
        }
        if g.d() != d || g.graph() != first.graph() || v.d() != d {
            return Err(FuncError::Incompatible {
                detail: "product factors live on different graph powers".into(),
            });
        }
    }
    let cell_volume = Rat::one() / Rat::from_integer((n as u64).pow(d as u32).into());
    let mut total = Rat::from_integer(0.into());
    for chart in first.charts() {
        for cell in cells(d, n) {
            let point = LatticePoint::new(chart.clone(), cell, n)
                .expect("cell iterator yields valid cells");
            let mut product = Rat::one();
            for (g, v) in factors {
                let delta = super::lattice_delta_grid(g, &point, *v)?;
                if delta == Rat::from_integer(0.into()) {
                    product = delta;
                    break;
                }
                product *= delta;
            }
            total += product;
        }
    }
    Ok(total * cell_volume)
}
