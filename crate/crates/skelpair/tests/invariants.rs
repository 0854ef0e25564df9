//! Randomized structural invariants: the Fourier difference transform
//! must invert exactly, and the exact pairing must be linear in each
//! slot over arbitrary rational grids.

use std::sync::OnceLock;

use proptest::prelude::*;
use skelpair::chow::{build_degree_table, DegreeTable};
use skelpair::func::{fourier_delta, AnyFunction, ExprFunction, GridFunction, Smoothness};
use skelpair::pairing::pair_exact;
use skelpair::rat::{rat, Rat};
use skelpair::skeleton::{charts, Graph};

fn d1_table() -> &'static DegreeTable {
    static TABLE: OnceLock<DegreeTable> = OnceLock::new();
    TABLE.get_or_init(|| build_degree_table(1).expect("d=1 degree table"))
}

fn pairing(fs: &[&GridFunction]) -> Rat {
    pair_exact(fs, d1_table())
        .expect("d=1 exact pairing")
        .exact_value()
        .expect("exact route yields a rational")
        .clone()
}

fn grid_from(n: u32, raw: &[(i64, i64)]) -> GridFunction {
    let values = raw[..n as usize + 1]
        .iter()
        .map(|&(p, q)| rat(p, q))
        .collect();
    GridFunction::new(Graph::interval(), 1, n, vec![values]).expect("random d=1 grid")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Applying the inverse transform to the 2^d Fourier differences of a
    /// random quadratic recovers the cube corner values it was built from.
    #[test]
    fn fourier_differences_invert(
        coeffs in prop::array::uniform6(-5..=5i32),
        xi in 3..=13u32,
        yi in 3..=13u32,
    ) {
        let src = format!(
            "({})+({})*x1+({})*x2+({})*x1*x2+({})*x1^2+({})*x2^2",
            coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4], coeffs[5]
        );
        let f = ExprFunction::new(
            Graph::interval(),
            2,
            Smoothness::Cubes,
            &[("*".to_string(), src)],
        )
        .expect("polynomial source");
        let any = AnyFunction::Expr(f.clone());
        let chart = charts(f.graph(), 2)[0].clone();
        let x = [xi as f64 / 16.0, yi as f64 / 16.0];
        let h = 0.125;
        let deltas: Vec<f64> = (0..4u16)
            .map(|m| {
                fourier_delta(&any, &chart, &x, skelpair::chow::BitVec::new(2, m), h)
                    .expect("difference inside the open square")
            })
            .collect();
        for w in 0..4u16 {
            let corner = [
                if w & 1 == 1 { x[0] - h } else { x[0] + h },
                if w & 2 == 2 { x[1] - h } else { x[1] + h },
            ];
            let direct = f.eval(&chart, &corner).expect("corner evaluation");
            let mut reconstructed = 0.0;
            for (m, delta) in deltas.iter().enumerate() {
                let sign = if (m as u16 & w).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                reconstructed += sign * delta;
            }
            prop_assert!(
                (reconstructed - direct).abs() <= 1e-9,
                "corner {:02b}: reconstructed {} vs direct {}",
                w,
                reconstructed,
                direct
            );
        }
    }

    /// The exact pairing is linear in the first slot (and by the
    /// symmetry checks elsewhere, in every slot).
    #[test]
    fn exact_pairing_is_multilinear(
        n in 1..=4u32,
        raw_f in prop::collection::vec((-8..=8i64, 1..=3i64), 5),
        raw_g in prop::collection::vec((-8..=8i64, 1..=3i64), 5),
        raw_h in prop::collection::vec((-8..=8i64, 1..=3i64), 5),
        (ap, aq) in (-6..=6i64, 1..=3i64),
        (bp, bq) in (-6..=6i64, 1..=3i64),
    ) {
        let f = grid_from(n, &raw_f);
        let g = grid_from(n, &raw_g);
        let h = grid_from(n, &raw_h);
        let a = rat(ap, aq);
        let b = rat(bp, bq);
        let combo = f.scale(&a).add(&g.scale(&b)).expect("grid combination");
        let lhs = pairing(&[&combo, &h]);
        let rhs = &a * &pairing(&[&f, &h]) + &b * &pairing(&[&g, &h]);
        prop_assert_eq!(lhs, rhs);
    }
}
