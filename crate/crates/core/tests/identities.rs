use calabi_core::calabi::{
    action_function, angle_function, c_mu_tilde, cal1, cal2_tilde, compute_report, ActionOptions, Budgets, Computation,
    LiouvilleForm, PairSampler,
};
use calabi_core::circle::BoundaryMeasure;
use calabi_core::geometry::DiskPoint;
use calabi_core::mapzoo::{bump, drift_map, rotation, shear, twist, DriftField};
use calabi_core::quadrature::GridSpec;
use calabi_core::Execution;

fn small(seed: u64) -> Budgets {
    Budgets {
        pairs: 4096,
        seed,
        grid: GridSpec::new(32, 32),
        rho_iterates: 2000,
        measure_samples: 500,
        ..Budgets::default()
    }
}

fn period_three() -> (calabi_core::flow::MapBundle, BoundaryMeasure, BoundaryMeasure) {
    let f = drift_map(DriftField::new(0.05, 6, 3, 0.5).with_offset(0.0))
        .unwrap()
        .compose(&rotation(1.0 / 3.0))
        .compose(&shear(0.3, 1).unwrap());
    let orbit = |x0: f64| BoundaryMeasure::uniform((0..3).map(|k| x0 + k as f64 / 3.0).collect());
    (f, orbit(1.0 / 24.0), orbit(5.0 / 24.0))
}

#[test]
fn link_holds_for_twist_after_rotation() {
    let f = twist(0.3).compose(&rotation(0.2));
    let rep = compute_report(&f, &[Computation::VerifyLink], &small(3)).unwrap();
    assert!(rep.link_pass.unwrap(), "{rep:?}");
    assert!(rep.equality_pass.unwrap(), "{rep:?}");
    assert!((rep.rho.unwrap() - 0.2).abs() <= rep.rho_halfwidth.unwrap());
}

#[test]
fn measure_and_primitive_independence() {
    let (f, mu1, mu2) = period_three();
    let grid = GridSpec::new(16, 32);
    let run = |mu: &BoundaryMeasure, form| {
        cal1(&f, mu, grid, ActionOptions { form, ..ActionOptions::default() }).unwrap().value
    };
    let base = run(&mu1, LiouvilleForm::Standard);
    assert!((run(&mu2, LiouvilleForm::Standard) - base).abs() < 1e-5);
    assert!((run(&mu1, LiouvilleForm::PlusExactUv(0.1)) - base).abs() < 1e-5);
    // the normalization is not trivially zero, and A₀ is not constant on the circle
    let a = action_function(&f, &mu1, 64).unwrap();
    assert!(a.normalization().abs() > 1e-3);
    assert!((a.base(DiskPoint::on_circle(0.0)).unwrap() - a.normalization()).abs() > 1e-3);
}

#[test]
fn action_is_path_independent() {
    let (f, mu, _) = period_three();
    let a = action_function(&f, &mu, 64).unwrap();
    for k in 0..20 {
        let t = k as f64 / 20.0;
        let z = DiskPoint::from_polar(0.2 + 0.7 * t, 6.0 * t);
        let l_path = [DiskPoint::new(z.u, 0.0), z];
        assert!((a.base_along(&l_path).unwrap() - a.base(z).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn cocycle_on_random_pairs() {
    let f = shear(0.4, 1).unwrap();
    let g = twist(0.3);
    let fg = f.compose(&g);
    for (x, y) in PairSampler::new(100, 9).pairs() {
        let (ag, gx, gy) = g.chord_winding_with_images(x, y).unwrap();
        let af = angle_function(&f, gx, gy).unwrap();
        let afg = angle_function(&fg, x, y).unwrap();
        assert!((afg.0 - ag.0 - af.0).abs() < 1e-6);
    }
}

#[test]
fn map_then_inverse_has_zero_invariant() {
    let f = shear(0.3, 1).unwrap();
    let est = cal2_tilde(&f.compose(&f.inverse()), &PairSampler::new(1024, 4), Execution::Sequential).unwrap();
    assert!(est.mean.abs() <= 3.0 * est.stderr + 1e-6, "{est:?}");
}

#[test]
fn c_mu_is_conjugation_invariant() {
    let phi = bump(4).unwrap();
    let h = shear(0.3, 1).unwrap();
    let conj = phi.conjugate_by(&h);
    let pts: Vec<DiskPoint> = PairSampler::new(120, 31).pairs().into_iter().map(|p| p.0).collect();
    let moved: Vec<DiskPoint> = pts.iter().map(|&z| h.map(z).unwrap()).collect();
    let w = vec![1.0 / pts.len() as f64; pts.len()];
    let a = c_mu_tilde(&phi, &pts, &w, Execution::Sequential).unwrap();
    let b = c_mu_tilde(&conj, &moved, &w, Execution::Sequential).unwrap();
    let se = a.stderr.hypot(b.stderr);
    assert!((a.value - b.value).abs() <= 3.0 * se + 1e-9, "{a:?} {b:?}");
}
