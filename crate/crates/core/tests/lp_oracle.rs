mod common;

use fairsect::lp::{solve, LpProblem, LpStatus, DEFAULT_MAX_ITERS};
use fairsect::RngStream;
use proptest::prelude::*;

use common::{grid_optimum_within, random_box_lp, vertex_optimum};

fn feasible(p: &LpProblem, x: &[f64]) -> bool {
    let rows_ok = p
        .a_ub
        .iter()
        .zip(&p.b_ub)
        .all(|(a, b)| a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() <= b + 1e-8);
    let bounds_ok = p
        .bounds
        .iter()
        .zip(x)
        .all(|(&(lo, hi), &v)| v >= lo - 1e-9 && v <= hi + 1e-9);
    rows_ok && bounds_ok
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = RngStream::new(2024, 0);
    for i in 0..200 {
        let p = random_box_lp(&mut rng);
        let sol = solve(&p, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "problem {i}");
        assert!(feasible(&p, &sol.x), "problem {i}");
        let exact = vertex_optimum(&p);
        assert!(
            (sol.objective - exact).abs() < 1e-9,
            "problem {i}: {} vs {exact}",
            sol.objective
        );
    }
}

/// Where the 10⁻³ grid comes within 2e-3 of the optimum, its exact minimum
/// never beats the simplex.
#[test]
fn grid_brute_force_never_beats_simplex() {
    let mut rng = RngStream::new(7, 0);
    for i in 0..50 {
        let p = random_box_lp(&mut rng);
        let sol = solve(&p, DEFAULT_MAX_ITERS).unwrap();
        if let Some(grid) = grid_optimum_within(&p, 1e-3, 2e-3) {
            assert!(sol.objective <= grid + 1e-12, "problem {i}");
            assert!(grid - sol.objective < 2e-3, "problem {i}: grid {grid}");
        }
    }
}

fn general_lp() -> impl Strategy<Value = LpProblem> {
    (1usize..5, 1usize..6).prop_flat_map(|(nv, m)| {
        let coef = -3.0f64..3.0;
        (
            prop::collection::vec(coef.clone(), nv),
            prop::collection::vec(prop::collection::vec(coef.clone(), nv), m),
            prop::collection::vec(-2.0f64..4.0, m),
            prop::collection::vec((-2.0f64..1.0, 0.0f64..3.0), nv),
        )
            .prop_map(|(c, a_ub, b_ub, raw)| LpProblem {
                c,
                a_ub,
                b_ub,
                bounds: raw.into_iter().map(|(lo, w)| (lo, lo + w)).collect(),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Optimal answers are feasible and no worse than any vertex; problems
    /// reported infeasible have no feasible vertex either.
    #[test]
    fn statuses_agree_with_enumeration(p in general_lp()) {
        let sol = solve(&p, DEFAULT_MAX_ITERS).unwrap();
        let exact = vertex_optimum(&p);
        match sol.status {
            LpStatus::Optimal => {
                prop_assert!(feasible(&p, &sol.x));
                prop_assert!((sol.objective - exact).abs() <= 1e-7 * (1.0 + exact.abs()));
            }
            LpStatus::Infeasible => prop_assert!(exact.is_infinite()),
            other => prop_assert!(false, "bounded problem ended {other:?}"),
        }
    }
}
