//! Acceptance gate: prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use calabi_core::arithmetic::{best_approx_check, classify, continued_fraction, power_rule, GrowthLabel};
use calabi_core::calabi::{
    action_function, angle_function, cal1, cal2_tilde, pullback_difference, verify_link, ActionOptions, Budgets,
    LiouvilleForm, PairSampler,
};
use calabi_core::circle::{rotation_number, BoundaryMeasure, LiftedCircleMap};
use calabi_core::experiments::{exp_c0_discontinuity, exp_c1_continuity, exp_rigidity, C0Config, C1Config, RigidityConfig};
use calabi_core::flow::MapBundle;
use calabi_core::geometry::{DiskPoint, TangentVector};
use calabi_core::mapzoo::{bump, drift, drift_map, rotation, shear, twist, DriftField};
use calabi_core::quadrature::GridSpec;
use calabi_core::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn budgets(seed: u64) -> Budgets {
    Budgets {
        seed,
        ..Budgets::default()
    }
}

fn rotation_triple() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for alpha in [0.1, 0.3, GOLDEN] {
        let t = Instant::now();
        let rep = verify_link(&rotation(alpha), &budgets(7)).map_err(|e| e.to_string())?;
        let (c1, c2, c3, se) = (rep.cal1.unwrap(), rep.cal2.unwrap(), rep.cal3.unwrap(), rep.cal2_stderr.unwrap());
        let secs = t.elapsed().as_secs_f64();
        ok &= c1.abs() <= 1e-5 && (c3 - alpha).abs() <= 1e-6 && (c2 - alpha).abs() <= (3.0 * se).max(5e-3) && secs <= 120.0;
        lines.push(format!("a={alpha:.4}: cal1={c1:.1e} cal2={c2:.6} cal3={c3:.8} ({secs:.1}s)"));
    }
    ensure(ok, lines.join("; "))
}

fn link_identity() -> Outcome {
    let tw = twist(0.3);
    let cases = [
        ("twist", tw.clone()),
        ("bump4", bump(4).unwrap()),
        ("twist*rot0.2", tw.compose(&rotation(0.2))),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, f) in cases {
        let rep = verify_link(&f, &budgets(11)).map_err(|e| e.to_string())?;
        let budget = rep.link_budget.unwrap();
        ok &= rep.residual_link.unwrap() <= budget && rep.residual_23.unwrap() <= budget;
        if name == "twist" {
            let target = [0.2, 0.2, 0.2, 0.0];
            let got = [rep.cal1.unwrap(), rep.cal2.unwrap(), rep.cal3.unwrap(), rep.rho.unwrap()];
            ok &= (got[0] - target[0]).abs() <= 1e-5
                && (got[1] - target[1]).abs() <= budget
                && (got[2] - target[2]).abs() <= 1e-6
                && got[3].abs() <= rep.rho_halfwidth.unwrap();
        }
        lines.push(format!(
            "{name}: link={:.1e} r23={:.1e} budget={budget:.1e}",
            rep.residual_link.unwrap(),
            rep.residual_23.unwrap()
        ));
    }
    ensure(ok, lines.join("; "))
}

fn morphism() -> Outcome {
    let pairs = [
        ("twist,bump4", twist(0.3), bump(4).unwrap()),
        ("rot0.2,drift", rotation(0.2), drift(0.2, 2, 1, 0.3).unwrap()),
        ("shear,twist", shear(0.4, 1).unwrap(), twist(-0.2)),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, (name, f, g)) in pairs.into_iter().enumerate() {
        let sampler = PairSampler::new(20_000, 100 + i as u64);
        let est = |b: &MapBundle| cal2_tilde(b, &sampler, Execution::Parallel).map_err(|e| e.to_string());
        let (ef, eg, efg) = (est(&f)?, est(&g)?, est(&f.compose(&g))?);
        let defect = (efg.mean - ef.mean - eg.mean).abs();
        let se = (ef.stderr.powi(2) + eg.stderr.powi(2) + efg.stderr.powi(2)).sqrt();
        ok &= defect <= 3.0 * se;
        lines.push(format!("{name}: defect={defect:.1e} 3se={:.1e}", 3.0 * se));
    }
    ensure(ok, lines.join("; "))
}

fn cocycle() -> Outcome {
    let f = shear(0.4, 1).unwrap();
    let g = drift(0.2, 2, 1, 0.3).unwrap();
    let fg = f.compose(&g);
    let mut worst = 0.0f64;
    for (x, y) in PairSampler::new(1_000, 5).pairs() {
        let (ang_g, gx, gy) = g.chord_winding_with_images(x, y).map_err(|e| e.to_string())?;
        let ang_f = angle_function(&f, gx, gy).map_err(|e| e.to_string())?;
        let ang_fg = angle_function(&fg, x, y).map_err(|e| e.to_string())?;
        worst = worst.max((ang_fg.0 - ang_g.0 - ang_f.0).abs());
    }
    ensure(worst <= 1e-6, format!("max residual {worst:.1e} over 1000 pairs"))
}

fn action_primitive() -> Outcome {
    // the shear fixes the circle pointwise, so the boundary map is the drift after a third of a turn
    let f = drift_map(DriftField::new(0.05, 6, 3, 0.5).with_offset(0.0))
        .unwrap()
        .compose(&rotation(1.0 / 3.0))
        .compose(&shear(0.3, 1).unwrap());
    // two distinct period-3 boundary orbits through zeros of cos 6θ
    let orbit = |x0: f64| BoundaryMeasure::uniform((0..3).map(|k| x0 + k as f64 / 3.0).collect());
    let (mu1, mu2) = (orbit(1.0 / 24.0), orbit(5.0 / 24.0));
    let a = action_function(&f, &mu1, 64).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-5;
    let mut grad_err = 0.0f64;
    for _ in 0..100 {
        let r = 0.95 * rng.gen::<f64>().sqrt();
        let z = DiskPoint::from_polar(r, TAU * rng.gen::<f64>());
        for e in [TangentVector::new(1.0, 0.0), TangentVector::new(0.0, 1.0)] {
            let fd = (a.eval(z + h * e).unwrap() - a.eval(z + (-h) * e).unwrap()) / (2.0 * h);
            let exact = pullback_difference(&f, LiouvilleForm::Standard, z, e).unwrap();
            grad_err = grad_err.max((fd - exact).abs());
        }
    }
    let grid = GridSpec::new(32, 64);
    let run = |mu: &BoundaryMeasure, form| {
        cal1(&f, mu, grid, ActionOptions { form, ..ActionOptions::default() }).map(|c| c.value)
    };
    let base = run(&mu1, LiouvilleForm::Standard).map_err(|e| e.to_string())?;
    let lam = (run(&mu1, LiouvilleForm::PlusExactUv(0.1)).unwrap() - base).abs();
    let mu = (run(&mu2, LiouvilleForm::Standard).unwrap() - base).abs();
    ensure(
        grad_err <= 1e-5 && lam <= 1e-5 && mu <= 1e-5,
        format!("grad={grad_err:.1e} lambda={lam:.1e} mu={mu:.1e} (cal1={base:.1e}, c_mu={:.4})", a.normalization()),
    )
}

fn rotation_certificate() -> Outcome {
    let n = 1_000;
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.3, GOLDEN, 0.987] {
        let est = rotation_number(&LiftedCircleMap::translation(alpha), n, 0.0).map_err(|e| e.to_string())?;
        worst = worst.max((est.value.0 - alpha).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut defect = 0.0f64;
    let lift = |a: f64, b: f64| LiftedCircleMap::from_fn("sine", move |x| x + a + b * (TAU * x).sin() / TAU);
    for _ in 0..20 {
        let f = lift(rng.gen_range(-2.0..2.0), rng.gen_range(-0.9..0.9));
        let g = lift(rng.gen_range(-2.0..2.0), rng.gen_range(-0.9..0.9));
        let rho = |m: &LiftedCircleMap| rotation_number(m, n, 0.0).unwrap().value.0;
        defect = defect.max((rho(&f.compose(&g)) - rho(&f) - rho(&g)).abs());
    }
    ensure(
        worst <= 1.0 / n as f64 && defect < 1.0 + 2.0 / n as f64,
        format!("max |est - truth| = {worst:.1e}, max defect = {defect:.3}"),
    )
}

fn c0_discontinuity() -> Outcome {
    let r = exp_c0_discontinuity(&C0Config::default(), Execution::Parallel).map_err(|e| e.to_string())?;
    let cal_ok = r.values("cal").iter().all(|c| (c.unwrap() - 2.0 / PI).abs() <= 1e-3);
    let d0: Vec<String> = r.values("d0").iter().map(|d| format!("{:.3}", d.unwrap())).collect();
    ensure(r.pass && cal_ok, format!("cal=2/pi on all rows, d0=[{}]", d0.join(", ")))
}

fn near_identity() -> Outcome {
    let cfg = C1Config {
        seed: 13,
        ..C1Config::default()
    };
    let r = exp_c1_continuity(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let eps = r.values("eps");
    ensure(
        r.pass,
        format!(
            "{} scales, eps from {:.1e} to {:.1e}",
            eps.len(),
            eps.first().unwrap().unwrap(),
            eps.last().unwrap().unwrap()
        ),
    )
}

fn rigidity() -> Outcome {
    let t = Instant::now();
    let cfg = RigidityConfig {
        seed: 17,
        ..RigidityConfig::default()
    };
    let r = exp_rigidity(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let q = r.values("q");
    let applied: Vec<String> = q
        .iter()
        .zip(r.values("far_bound"))
        .filter(|(_, b)| b.is_some())
        .map(|(q, _)| format!("{}", q.unwrap()))
        .collect();
    let cal_ok = r.checks.iter().any(|c| c.name == "cal1_vanishes" && c.pass);
    let secs = t.elapsed().as_secs_f64();
    ensure(
        r.pass && cal_ok && !applied.is_empty() && secs <= 600.0,
        format!(
            "q up to {}, single-k check active at q in {{{}}}, none active for q <= 21 ({secs:.0}s)",
            q.last().unwrap().unwrap(),
            applied.join(", ")
        ),
    )
}

fn continued_fractions() -> Outcome {
    let cf = continued_fraction(GOLDEN, 26).map_err(|e| e.to_string())?;
    let mut fib = vec![1i128, 1];
    while fib.len() < 26 {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
    }
    let fib_ok = cf.q[..26] == fib[..];
    let checks = best_approx_check(&cf, GOLDEN);
    let reliable: Vec<_> = checks.iter().filter(|c| c.reliable).collect();
    let ineq_ok = !reliable.is_empty() && reliable.iter().all(|c| c.holds == Some(true));
    let synth = classify(&power_rule(2, 6).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let label_ok = synth.labels.contains(&GrowthLabel::NonBrunoLike);
    ensure(
        fib_ok && ineq_ok && label_ok,
        format!(
            "fibonacci={fib_ok}, inequality on {} reliable rows, synthetic label {:?}",
            reliable.len(),
            synth.labels
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 7\ncomputations = [\"cal1\", \"cal2\", \"cal3\", \"rho\", \"verify-link\", \"c-mu\"]\n\
         [map]\nfamily = \"composition\"\n\
         [map.outer]\nfamily = \"radial_twist\"\ncoefficients = [0.3, -0.6, 0.3]\n\
         [map.inner]\nfamily = \"shear\"\nbeta = 0.3\nspin = 1\n\
         [budgets]\npairs = 4000\nc_mu_points = 100\ngrid = { radial = 32, angular = 64 }\n",
    )
    .map_err(|e| e.to_string())?;
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_calabi"))
            .args(["compute", "--format", "json", "--workers", "2", "--config"])
            .arg(&cfg)
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    ensure(
        ok,
        format!(
            "{} bytes, identical={} (stderr: {})",
            a.stdout.len(),
            a.stdout == b.stdout,
            String::from_utf8_lossy(&a.stderr).trim()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("rotation triple", rotation_triple),
        ("link identity", link_identity),
        ("morphism", morphism),
        ("cocycle", cocycle),
        ("action primitive", action_primitive),
        ("rotation-number certificate", rotation_certificate),
        ("C0 discontinuity", c0_discontinuity),
        ("near-identity bounds", near_identity),
        ("rigidity", rigidity),
        ("continued fractions", continued_fractions),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} {name}: PASS [{secs:.1}s] {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL [{secs:.1}s] {d}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
