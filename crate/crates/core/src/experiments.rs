//! Batch experiments: near-identity bounds, the bump sequence, and rigidity of
//! iterates of conjugated rotations along continued-fraction denominators.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arithmetic::continued_fraction;
use crate::calabi::{angle_function, cal1, cal2_tilde, cal3_tilde, ActionOptions, Cal3Options, PairSampler};
use crate::circle::{invariant_measure, rotation_number};
use crate::error::{CalabiError, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::flow::MapBundle;
use crate::geometry::{DiskPoint, Jacobian2};
use crate::mapzoo::{bump, conjugated_rotation, FamilySpec};
use crate::quadrature::{GridSpec, PolarGrid};

/// Largest admissible `d₁` for the near-identity experiment.
pub const MAX_NEAR_IDENTITY: f64 = 0.5;
/// Largest `d₀` at which the far-pair angle is forced to a single integer.
pub const MAX_FAR_PAIR_EPSILON: f64 = 1.0 / 16.0;
pub const DEFAULT_Q_MAX: u64 = 200;

/// One table cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Flag(bool),
    Missing(Option<()>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:e}"),
            Cell::Flag(b) => b.to_string(),
            Cell::Missing(_) => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Missing(None), Into::into)
    }
}

/// Where a bound column comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSource {
    pub column: String,
    pub formula: String,
}

/// A table-level check. Diagnostics are reported but do not affect `pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub bounds: Vec<BoundSource>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ExperimentResult {
    fn new(name: &str, columns: &[&str], bounds: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            bounds: bounds
                .iter()
                .map(|(c, f)| BoundSource {
                    column: c.to_string(),
                    formula: f.to_string(),
                })
                .collect(),
            checks: Vec::new(),
            pass: false,
        }
    }

    fn check(&mut self, name: &str, pass: bool, required: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            required,
            detail,
        });
    }

    fn finish(mut self) -> Self {
        let pass_col = self.column("pass");
        let rows_ok = self
            .rows
            .iter()
            .all(|r| pass_col.is_none_or(|i| r[i] == Cell::Flag(true)));
        self.pass = rows_ok && self.checks.iter().all(|c| c.pass || !c.required);
        self
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric view of a column; missing cells become `None`.
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Int(v) => Some(v as f64),
                Cell::Num(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Sampled lower bounds for `d₀(f, id)` and `d₁(f, id)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub d0: f64,
    /// `max(d₀, sup ‖Df − I‖)`, when the Jacobian was sampled.
    pub d1: Option<f64>,
    /// Change against the half-resolution grid.
    pub d0_delta: f64,
    pub d1_delta: Option<f64>,
    /// `sup |φ̃(x) − x|` over the boundary samples.
    pub lift_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceGrid {
    pub grid: GridSpec,
    pub boundary: usize,
}

impl Default for DistanceGrid {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(256, 256),
            boundary: 512,
        }
    }
}

fn sampled_sup(bundle: &MapBundle, spec: GridSpec, boundary: usize, jacobian: bool, exec: Execution) -> Result<(f64, f64, f64)> {
    let grid = PolarGrid::new(spec, &bundle.radial_breakpoints());
    let nr = grid.radial().len();
    let na = grid.angles().len();
    let interior = try_map_indexed(exec, na, |j| -> Result<(f64, f64)> {
        let (mut d0, mut d1) = (0.0f64, 0.0f64);
        for i in 0..nr {
            let z = grid.point(i, j);
            if jacobian {
                let (w, df) = bundle.map_with_jacobian(z)?;
                d0 = d0.max(w.distance(z));
                d1 = d1.max(df.sub(&Jacobian2::IDENTITY).operator_norm());
            } else {
                d0 = d0.max(bundle.map(z)?.distance(z));
            }
        }
        Ok((d0, d1))
    })?;
    let lift = bundle.boundary_lift();
    let edge = try_map_indexed(exec, boundary, |k| -> Result<(f64, f64)> {
        let x = k as f64 / boundary as f64;
        let z = DiskPoint::on_circle(x);
        let y = lift.eval(x)?;
        Ok((DiskPoint::on_circle(y).distance(z), (y - x).abs()))
    })?;
    let d0 = interior.iter().chain(&edge).map(|p| p.0).fold(0.0, f64::max);
    let d1 = interior.iter().map(|p| p.1).fold(0.0, f64::max);
    let lift_dev = edge.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((d0, d1, lift_dev))
}

/// Samples displacement (and optionally the Jacobian) on a polar grid plus
/// boundary points, and repeats at half resolution to report a delta.
pub fn measure_distances(bundle: &MapBundle, grid: DistanceGrid, jacobian: bool, exec: Execution) -> Result<Distances> {
    let (d0, d1, lift_deviation) = sampled_sup(bundle, grid.grid, grid.boundary, jacobian, exec)?;
    let (c0, c1, _) = sampled_sup(bundle, grid.grid.halved(), (grid.boundary / 2).max(1), jacobian, exec)?;
    let d1 = d0.max(d1);
    let c1 = c0.max(c1);
    Ok(Distances {
        d0,
        d1: jacobian.then_some(d1),
        d0_delta: (d0 - c0).abs(),
        d1_delta: jacobian.then_some((d1 - c1).abs()),
        lift_deviation,
    })
}

/// The first `n` pairs from the seeded stream with `|x − y| ≥ min_sep`.
pub fn separated_pairs(n: usize, min_sep: f64, seed: u64) -> Vec<(DiskPoint, DiskPoint)> {
    let mut out = Vec::with_capacity(n);
    let mut round = 0u64;
    while out.len() < n {
        let batch = PairSampler::new(4 * n.max(64), seed.wrapping_add(round)).pairs();
        out.extend(batch.into_iter().filter(|(x, y)| x.distance(*y) >= min_sep).take(n - out.len()));
        round += 1;
    }
    out
}

fn default_twist() -> FamilySpec {
    FamilySpec::RadialTwist {
        coefficients: vec![0.3, -0.6, 0.3],
    }
}

/// Settings for the near-identity experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C1Config {
    /// Autonomous generator scaled by each `tau`.
    pub base: FamilySpec,
    pub scales: Vec<f64>,
    pub pairs: usize,
    /// Pairs used for the pointwise cosine bound.
    pub cos_pairs: usize,
    pub seed: u64,
    pub distances: DistanceGrid,
}

impl Default for C1Config {
    fn default() -> Self {
        Self {
            base: default_twist(),
            scales: vec![0.04, 0.02, 0.01, 0.005, 0.002, 0.001],
            pairs: 20_000,
            cos_pairs: 1_000,
            seed: 0,
            distances: DistanceGrid::default(),
        }
    }
}

/// `|Cal̃| ≤ √(2ε)/π` and `|cos 2πAng − 1| ≤ 2ε` for `τ`-scaled generators with `ε = d₁ ≤ 1/2`.
pub fn exp_c1_continuity(config: &C1Config, exec: Execution) -> Result<ExperimentResult> {
    let mut res = ExperimentResult::new(
        "c1-continuity",
        &[
            "tau", "eps", "eps_delta", "cal2", "cal2_stderr", "cal_bound", "cos_dev", "cos_bound", "pass",
        ],
        &[
            ("cal_bound", "sqrt(2*eps)/pi + 3*cal2_stderr"),
            ("cos_bound", "2*eps, max over sampled pairs of |cos(2*pi*Ang) - 1|"),
        ],
    );
    let base = config.base.field()?;
    if !base.is_autonomous() {
        return Err(CalabiError::InvalidParameter(
            "the near-identity experiment scales an autonomous generator".into(),
        ));
    }
    if let Some(bad) = config.scales.iter().find(|t| t.is_nan() || **t < 0.0 || !t.is_finite()) {
        return Err(CalabiError::InvalidParameter(format!("scale {bad} must be non-negative")));
    }
    let cos_pairs = PairSampler::new(config.cos_pairs, config.seed ^ 0xc05).pairs();
    let mut cals = Vec::new();
    for &tau in &config.scales {
        let f = FamilySpec::Scaled {
            map: Box::new(config.base.clone()),
            tau,
        }
        .build()?;
        let d = measure_distances(&f, config.distances, true, exec)?;
        let eps = d.d1.unwrap_or(d.d0);
        if eps > MAX_NEAR_IDENTITY {
            return Err(CalabiError::ScaleTooLarge { epsilon: eps });
        }
        let est = cal2_tilde(&f, &PairSampler::new(config.pairs, config.seed), exec)?;
        let cos_dev = try_map_indexed(exec, cos_pairs.len(), |i| {
            let (x, y) = cos_pairs[i];
            angle_function(&f, x, y).map(|a| ((2.0 * PI * a.0).cos() - 1.0).abs())
        })?
        .into_iter()
        .fold(0.0, f64::max);
        let cal_bound = (2.0 * eps).sqrt() / PI + 3.0 * est.stderr;
        let pass = est.mean.abs() <= cal_bound && cos_dev <= 2.0 * eps;
        cals.push(est.mean);
        res.rows.push(vec![
            tau.into(),
            eps.into(),
            d.d1_delta.into(),
            est.mean.into(),
            est.stderr.into(),
            cal_bound.into(),
            cos_dev.into(),
            (2.0 * eps).into(),
            pass.into(),
        ]);
    }
    let mut order: Vec<usize> = (0..config.scales.len()).collect();
    order.sort_by(|&a, &b| config.scales[b].total_cmp(&config.scales[a]));
    let monotone = order.windows(2).all(|w| cals[w[1]].abs() <= cals[w[0]].abs() + 1e-12);
    res.check(
        "cal_shrinks_with_tau",
        monotone,
        false,
        "|cal2| is non-increasing as tau decreases".into(),
    );
    Ok(res.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C0Config {
    pub ns: Vec<u32>,
    /// Allowed distance from `2/π`.
    pub cal_tolerance: f64,
    /// Displacement target for the diagnostic "small d₀" check.
    pub small_d0: f64,
    pub cal_grid: GridSpec,
    pub distances: DistanceGrid,
}

impl Default for C0Config {
    fn default() -> Self {
        Self {
            ns: vec![2, 4, 8, 16, 32],
            cal_tolerance: 1e-3,
            small_d0: 0.05,
            cal_grid: GridSpec::new(64, 8),
            distances: DistanceGrid::default(),
        }
    }
}

/// Bumps with shrinking support: `Cal̃` stays at `2/π` while `d₀ ≤ 2/n`.
pub fn exp_c0_discontinuity(config: &C0Config, exec: Execution) -> Result<ExperimentResult> {
    let mut res = ExperimentResult::new(
        "c0-discontinuity",
        &["n", "d0", "d0_delta", "d0_bound", "cal", "cal_delta", "cal_target", "pass"],
        &[
            ("d0_bound", "2/n, diameter of the support disk of radius 1/n"),
            ("cal_target", "2/pi, twice the normalized bump mass"),
        ],
    );
    let bundles = config.ns.iter().map(|&n| bump(n)).collect::<Result<Vec<_>>>()?;
    let target = 2.0 / PI;
    let rows = try_map_indexed(exec, bundles.len(), |i| -> Result<(Distances, f64, f64)> {
        let f = &bundles[i];
        let d = measure_distances(f, config.distances, false, exec)?;
        let cal = cal3_tilde(
            f,
            Cal3Options {
                grid: config.cal_grid,
                time_nodes: 1,
                exec,
            },
        )?;
        Ok((d, cal.value, cal.delta))
    })?;
    let mut d0s = Vec::new();
    for (&n, (d, cal, delta)) in config.ns.iter().zip(rows) {
        let bound = 2.0 / n as f64;
        let pass = d.d0 <= bound && (cal - target).abs() <= config.cal_tolerance;
        d0s.push((n, d.d0));
        res.rows.push(vec![
            (n as i64).into(),
            d.d0.into(),
            d.d0_delta.into(),
            bound.into(),
            cal.into(),
            delta.into(),
            target.into(),
            pass.into(),
        ]);
    }
    let mut sorted = d0s.clone();
    sorted.sort_by_key(|p| p.0);
    let decreasing = sorted.windows(2).all(|w| w[1].1 < w[0].1);
    res.check(
        "d0_decreasing",
        decreasing,
        true,
        "d0 strictly decreases as n grows".into(),
    );
    let smallest = sorted.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    res.check(
        "d0_small",
        smallest < config.small_d0,
        false,
        format!("smallest d0 = {smallest:.4} against {}", config.small_d0),
    );
    Ok(res.finish())
}

fn shear_conjugator() -> FamilySpec {
    FamilySpec::Shear { beta: 0.3, spin: 1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigidityConfig {
    pub alpha: f64,
    /// Number of partial quotients to expand.
    pub depth: usize,
    pub conjugator: FamilySpec,
    pub tau: f64,
    pub q_max: u64,
    pub far_pairs: usize,
    pub seed: u64,
    /// Budget for `|Cal₁(f^q) − q·Cal₁(f)|` and `|Cal₁(f)|`.
    pub cal_tolerance: f64,
    pub cal_grid: GridSpec,
    pub distances: DistanceGrid,
    pub rho_iterates: usize,
    pub measure_samples: usize,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        Self {
            alpha: (5f64.sqrt() - 1.0) / 2.0,
            depth: 12,
            conjugator: shear_conjugator(),
            tau: 0.5,
            q_max: DEFAULT_Q_MAX,
            far_pairs: 1_000,
            seed: 0,
            cal_tolerance: 1e-4,
            cal_grid: GridSpec::new(64, 64),
            distances: DistanceGrid {
                grid: GridSpec::new(128, 128),
                boundary: 512,
            },
            rho_iterates: 100_000,
            measure_samples: 2_000,
        }
    }
}

struct FarPairs {
    k: i64,
    max_dev: f64,
    single_k: bool,
}

fn far_pair_angles(f: &MapBundle, eps: f64, n: usize, seed: u64, exec: Execution) -> Result<FarPairs> {
    let pairs = separated_pairs(n, eps.sqrt(), seed);
    let angles = try_map_indexed(exec, pairs.len(), |i| angle_function(f, pairs[i].0, pairs[i].1).map(|a| a.0))?;
    let mut ks: Vec<i64> = angles.iter().map(|a| a.round() as i64).collect();
    ks.sort_unstable();
    let k = ks[ks.len() / 2];
    let max_dev = angles.iter().map(|a| (a - k as f64).abs()).fold(0.0, f64::max);
    Ok(FarPairs {
        k,
        max_dev,
        single_k: ks.first() == ks.last(),
    })
}

/// Iterates `f^q = h R_{qα} h⁻¹` along the convergent denominators of `α`.
pub fn exp_rigidity(config: &RigidityConfig, exec: Execution) -> Result<ExperimentResult> {
    let mut res = ExperimentResult::new(
        "rigidity",
        &[
            "q", "p", "d0", "d0_delta", "cal1", "cal1_delta", "cal1_target", "k", "far_dev", "far_bound", "single_k",
            "ratio_dev", "ratio_bound", "pass",
        ],
        &[
            ("far_bound", "2*eps^(1/4)/pi with eps = d0, applied when eps <= 1/16"),
            ("ratio_bound", "1/q + 2*eps^(1/4)/pi + rho halfwidth"),
            ("cal1_target", "q * cal1(f), within cal_tolerance + grid deltas"),
        ],
    );
    let cf = continued_fraction(config.alpha, config.depth)?;
    if cf.terminated {
        return Err(CalabiError::InvalidParameter(format!(
            "alpha = {} is rational at working precision",
            config.alpha
        )));
    }
    let mut stages: Vec<(i64, i64)> = Vec::new();
    for (&p, &q) in cf.p.iter().zip(&cf.q) {
        if q as u64 > config.q_max {
            return Err(CalabiError::QMaxExceeded {
                q: q as u64,
                q_max: config.q_max,
            });
        }
        if stages.last().is_none_or(|s| s.1 != q as i64) {
            stages.push((p as i64, q as i64));
        }
    }
    let conj = config.conjugator.field()?;
    let f = conjugated_rotation(config.alpha, conj.clone(), config.tau)?;
    let options = ActionOptions {
        exec,
        ..ActionOptions::default()
    };
    let lift = f.boundary_lift();
    let rho = rotation_number(&lift, config.rho_iterates, 0.0)?;
    let mu = invariant_measure(&lift, 1_000, config.measure_samples, 0.0)?;
    let base = cal1(&f, &mu, config.cal_grid, options)?;
    res.check(
        "cal1_vanishes",
        base.value.abs() <= config.cal_tolerance + base.delta,
        true,
        format!("cal1(f) = {:e} with grid delta {:e}", base.value, base.delta),
    );
    let mut d0s = Vec::new();
    for (p, q) in stages {
        let fq = conjugated_rotation(q as f64 * config.alpha, conj.clone(), config.tau)?;
        let d = measure_distances(&fq, config.distances, false, exec)?;
        let eps = d.d0;
        let mu_q = invariant_measure(&fq.boundary_lift(), 1_000, config.measure_samples, 0.0)?;
        let cq = cal1(&fq, &mu_q, config.cal_grid, options)?;
        let target = q as f64 * base.value;
        let cal_ok = (cq.value - target).abs() <= config.cal_tolerance + cq.delta + q as f64 * base.delta;
        let far = far_pair_angles(&fq, eps, config.far_pairs, config.seed.wrapping_add(q as u64), exec)?;
        let quarter = 2.0 * eps.powf(0.25) / PI;
        let applies = eps <= MAX_FAR_PAIR_EPSILON;
        let single = applies.then_some(far.single_k && far.max_dev <= quarter);
        let ratio_dev = (far.k as f64 / q as f64 - rho.value.0).abs();
        let ratio_bound = 1.0 / q as f64 + quarter + rho.rigorous_halfwidth;
        let ratio_ok = !applies || ratio_dev <= ratio_bound;
        let pass = cal_ok && single.unwrap_or(true) && ratio_ok;
        d0s.push(eps);
        res.rows.push(vec![
            q.into(),
            p.into(),
            eps.into(),
            d.d0_delta.into(),
            cq.value.into(),
            cq.delta.into(),
            target.into(),
            far.k.into(),
            far.max_dev.into(),
            applies.then_some(quarter).into(),
            single.into(),
            ratio_dev.into(),
            ratio_bound.into(),
            pass.into(),
        ]);
    }
    let applied = res.values("far_bound").iter().filter(|b| b.is_some()).count();
    res.check(
        "far_pair_stage_reached",
        applied > 0,
        false,
        format!("{applied} stage(s) with d0 <= 1/16"),
    );
    let decreasing = d0s.windows(2).skip(1).all(|w| w[1] < w[0]);
    res.check(
        "d0_decreasing",
        decreasing,
        false,
        "d0 decreases along the denominators (first stage excluded)".into(),
    );
    Ok(res.finish())
}
