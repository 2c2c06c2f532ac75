use std::f64::consts::PI;

use calabi_core::calabi::{action_function, compute_report, Budgets, Computation};
use calabi_core::circle::invariant_measure;
use calabi_core::experiments::{measure_distances, DistanceGrid};
use calabi_core::geometry::DiskPoint;
use calabi_core::mapzoo::{bump, FamilySpec};
use calabi_core::quadrature::GridSpec;
use calabi_core::Execution;
use proptest::prelude::*;

fn twist_spec(coefficients: Vec<f64>) -> FamilySpec {
    FamilySpec::RadialTwist { coefficients }
}

#[test]
fn twist_action_matches_closed_form() {
    let spec = twist_spec(vec![0.3, -0.6, 0.3]);
    let f = spec.build().unwrap();
    let cf = spec.closed_form().unwrap();
    let mu = invariant_measure(&f.boundary_lift(), 10, 100, 0.0).unwrap();
    let a = action_function(&f, &mu, 64).unwrap();
    for z in [DiskPoint::ORIGIN, DiskPoint::new(0.5, 0.1), DiskPoint::new(-0.2, -0.9)] {
        // β(1 − |z|⁴) for g = β(1 − s)²
        let oracle = 0.3 * (1.0 - z.norm_sq().powi(2));
        assert!((a.eval(z).unwrap() - oracle).abs() < 1e-6);
        assert!((cf.action(z) - oracle).abs() < 1e-14);
    }
}

#[test]
fn bump_displacement_stays_inside_support() {
    for n in [2, 3, 5, 8] {
        let d = measure_distances(
            &bump(n).unwrap(),
            DistanceGrid {
                grid: GridSpec::new(64, 64),
                boundary: 64,
            },
            false,
            Execution::Sequential,
        )
        .unwrap();
        assert!(d.d0 <= 2.0 / n as f64);
        assert_eq!(d.lift_deviation, 0.0);
    }
}

#[test]
fn bump_invariant_is_independent_of_n() {
    let budgets = Budgets {
        grid: GridSpec::new(32, 8),
        ..Budgets::default()
    };
    for n in [2, 6, 64] {
        let rep = compute_report(&bump(n).unwrap(), &[Computation::Cal3], &budgets).unwrap();
        assert!((rep.cal3.unwrap() - 2.0 / PI).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn radial_closed_forms_agree_with_generic_computations(
        c1 in -0.5f64..0.5, c2 in -0.5f64..0.5, c3 in -0.5f64..0.5,
    ) {
        // g(s) = c1(1−s) + c2(1−s)² + c3(1−s)³ expanded in powers of s
        let coefficients = vec![c1 + c2 + c3, -c1 - 2.0 * c2 - 3.0 * c3, c2 + 3.0 * c3, -c3];
        let spec = twist_spec(coefficients);
        let cf = spec.closed_form().unwrap();
        let budgets = Budgets {
            grid: GridSpec::new(32, 16),
            rho_iterates: 2000,
            measure_samples: 300,
            ..Budgets::default()
        };
        let rep = compute_report(
            &spec.build().unwrap(),
            &[Computation::Cal1, Computation::Cal3, Computation::Rho],
            &budgets,
        ).unwrap();
        prop_assert!((rep.cal3.unwrap() - cf.cal().unwrap()).abs() < 1e-10);
        prop_assert!((rep.cal1.unwrap() - cf.cal1().unwrap()).abs() < 1e-6);
        prop_assert!((rep.rho.unwrap() - cf.rho()).abs() <= rep.rho_halfwidth.unwrap());
    }
}
