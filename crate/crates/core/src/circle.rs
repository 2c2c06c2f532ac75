//! Lifts of circle maps, rotation numbers and invariant measures.
//!
//! Circle coordinates are in turns: `x` and `x + 1` are the same point.

use std::fmt;
use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Turns;

type LiftFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// A lift `φ̃: ℝ → ℝ` of a circle homeomorphism.
///
/// Only the restriction to `[0, 1)` is stored; other arguments are reduced by
/// their integer part, which makes `φ̃(x + 1) = φ̃(x) + 1` hold exactly.
#[derive(Clone)]
pub struct LiftedCircleMap {
    name: String,
    restricted: Arc<LiftFn>,
}

impl fmt::Debug for LiftedCircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LiftedCircleMap")
            .field("name", &self.name)
            .finish()
    }
}

impl LiftedCircleMap {
    /// `f` is only ever called on `[0, 1)`.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            restricted: Arc::new(f),
        }
    }

    /// From an infallible formula.
    pub fn from_fn(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |x| Ok(f(x)))
    }

    pub fn identity() -> Self {
        Self::translation(0.0)
    }

    pub fn translation(a: f64) -> Self {
        Self::from_fn(format!("x+{a}"), move |x| x + a)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let k = x.floor();
        Ok(k + (self.restricted)(x - k)?)
    }

    /// `δ(x) = φ̃(x) − x`, one-periodic.
    pub fn displacement(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)? - x)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LiftedCircleMap) -> LiftedCircleMap {
        let (a, b) = (self.clone(), inner.clone());
        Self::new(format!("{}*{}", a.name, b.name), move |x| a.eval(b.eval(x)?))
    }

    pub fn iterate(&self, n: usize) -> LiftedCircleMap {
        let a = self.clone();
        Self::new(format!("({})^{n}", a.name), move |x| {
            let mut y = x;
            for _ in 0..n {
                y = a.eval(y)?;
            }
            Ok(y)
        })
    }

    /// `φ̃ⁿ(x)`.
    pub fn orbit_end(&self, x: f64, n: usize) -> Result<f64> {
        let mut y = x;
        for _ in 0..n {
            y = self.eval(y)?;
        }
        Ok(y)
    }
}

/// `ρ̃` from `n` iterates, with the certified half-width `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationNumberEstimate {
    pub value: Turns,
    pub rigorous_halfwidth: f64,
    pub iterates_used: usize,
}

impl RotationNumberEstimate {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value.0).abs() <= self.rigorous_halfwidth
    }
}

pub const DEFAULT_ROTATION_ITERATES: usize = 100_000;

/// `(φ̃ⁿ(x₀) − x₀)/n`. The true rotation number is within `1/n`.
pub fn rotation_number(lift: &LiftedCircleMap, n: usize, x0: f64) -> Result<RotationNumberEstimate> {
    let n = n.max(1);
    let end = lift.orbit_end(x0, n)?;
    Ok(RotationNumberEstimate {
        value: Turns((end - x0) / n as f64),
        rigorous_halfwidth: 1.0 / n as f64,
        iterates_used: n,
    })
}

/// Weighted atoms on the circle approximating an invariant probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasure {
    /// Positions in `[0, 1)`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Period of the orbit when a periodic orbit was detected.
    pub period: Option<usize>,
    /// `|∫ψ d(φ_*μ) − ∫ψ dμ|` for `ψ(x) = e^{2πix}`.
    pub invariance_defect: f64,
}

impl BoundaryMeasure {
    /// Equal weights on the given points.
    pub fn uniform(points: Vec<f64>) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self {
            points: points.into_iter().map(|x| x.rem_euclid(1.0)).collect(),
            weights,
            period: None,
            invariance_defect: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn try_integrate(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }

    /// Fourier coefficient `∫ e^{2πikx} dμ` as `(re, im)`.
    pub fn fourier(&self, k: i64) -> (f64, f64) {
        let re = self.integrate(|x| (TAU * k as f64 * x).cos());
        let im = self.integrate(|x| (TAU * k as f64 * x).sin());
        (re, im)
    }
}

pub const PERIOD_TOL: f64 = 1e-10;
pub const DEFAULT_Q_MAX: usize = 10_000;

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Empirical measure along the orbit of `x0` after `burn_in` iterates, or the
/// exact periodic-orbit measure when the orbit closes up within [`PERIOD_TOL`].
pub fn invariant_measure(
    lift: &LiftedCircleMap,
    burn_in: usize,
    samples: usize,
    x0: f64,
) -> Result<BoundaryMeasure> {
    let samples = samples.max(1);
    let start = lift.orbit_end(x0, burn_in)?;
    let q_max = samples.min(DEFAULT_Q_MAX);
    let mut orbit = Vec::with_capacity(samples + 1);
    orbit.push(start);
    let mut y = start;
    let mut period = None;
    for q in 1..=samples {
        y = lift.eval(y)?;
        if period.is_none() && q <= q_max && circle_gap(y, start) < PERIOD_TOL {
            period = Some(q);
            break;
        }
        orbit.push(y);
    }
    let count = period.unwrap_or(samples);
    orbit.truncate(count);
    let mut measure = BoundaryMeasure::uniform(orbit);
    measure.period = period;
    // pushing forward shifts the orbit by one index, so the defect telescopes
    let psi = |x: f64| (TAU * x).sin_cos();
    let ((s1, c1), (s0, c0)) = (psi(y), psi(start));
    measure.invariance_defect = (c1 - c0).hypot(s1 - s0) / count as f64;
    Ok(measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine_lift(a: f64, b: f64) -> LiftedCircleMap {
        LiftedCircleMap::from_fn("sine", move |x| x + a + b * (TAU * x).sin())
    }

    #[test]
    fn rotation_number_examples() {
        let id = LiftedCircleMap::identity();
        let e = rotation_number(&id, 50, 0.3).unwrap();
        assert_eq!(e.value.0, 0.0);
        assert_eq!(e.rigorous_halfwidth, 1.0 / 50.0);
        let one = rotation_number(&LiftedCircleMap::translation(1.0), 100, 0.0).unwrap();
        assert!((one.value.0 - 1.0).abs() < 1e-12);
        assert_eq!(one.rigorous_halfwidth, 0.01);
    }

    #[test]
    fn rotation_number_against_longer_orbit() {
        let f = sine_lift(0.05, 0.02);
        let est = rotation_number(&f, 100_000, 0.0).unwrap();
        let oracle = rotation_number(&f, 1_000_000, 0.0).unwrap();
        assert!((est.value.0 - oracle.value.0).abs() < 2e-5);
    }

    #[test]
    fn commutes_with_integer_translation() {
        let f = sine_lift(0.13, 0.05);
        for x in [0.0, 0.3, 0.99] {
            assert!((f.eval(x + 1.0).unwrap() - f.eval(x).unwrap() - 1.0).abs() < 1e-14);
            assert!((f.eval(x - 3.0).unwrap() - f.eval(x).unwrap() + 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rational_rotation_measure() {
        let m = invariant_measure(&LiftedCircleMap::translation(1.0 / 3.0), 0, 100, 0.0).unwrap();
        assert_eq!(m.period, Some(3));
        assert_eq!(m.len(), 3);
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.invariance_defect < 1e-12);
    }

    #[test]
    fn golden_rotation_equidistributes() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let n = 10_000;
        let m = invariant_measure(&LiftedCircleMap::translation(alpha), 0, n, 0.0).unwrap();
        assert_eq!(m.period, None);
        let (re, im) = m.fourier(1);
        // geometric sum bound 1/(n |sin πα|)
        let bound = 1.0 / (n as f64 * (std::f64::consts::PI * alpha).sin());
        assert!(re.hypot(im) <= bound + 1e-12);
        assert!(m.invariance_defect <= 2.0 / n as f64);
    }

    #[test]
    fn attracting_fixed_point() {
        let f = sine_lift(0.0, 0.1);
        let m = invariant_measure(&f, 1000, 1000, 0.2).unwrap();
        assert_eq!(m.period, Some(1));
        assert!((m.points[0] - 0.5).abs() < 1e-9);
        let birkhoff = m.try_integrate(|x| f.displacement(x)).unwrap();
        assert!(birkhoff.abs() < 1e-9);
        assert!(rotation_number(&f, 10_000, 0.2).unwrap().value.0.abs() <= 1e-4);
    }

    #[test]
    fn birkhoff_matches_rotation_number() {
        let f = sine_lift(0.21, 0.03);
        let m = invariant_measure(&f, 1000, 10_000, 0.0).unwrap();
        let rho = rotation_number(&f, 100_000, 0.0).unwrap();
        let avg = m.try_integrate(|x| f.displacement(x)).unwrap();
        // telescoping: the empirical average differs from the orbit slope by ≤ 1/samples
        assert!((avg - rho.value.0).abs() <= rho.rigorous_halfwidth + 2.0 / 10_000.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quasi_morphism_defect(a1 in -1.0f64..1.0, b1 in -0.15f64..0.15, a2 in -1.0f64..1.0, b2 in -0.15f64..0.15) {
            let (f, g) = (sine_lift(a1, b1), sine_lift(a2, b2));
            let n = 2000;
            let rf = rotation_number(&f, n, 0.0).unwrap().value.0;
            let rg = rotation_number(&g, n, 0.0).unwrap().value.0;
            let rfg = rotation_number(&f.compose(&g), n, 0.0).unwrap().value.0;
            prop_assert!((rfg - rf - rg).abs() < 1.0 + 3.0 / n as f64);
        }

        #[test]
        fn homogeneity(a in -1.0f64..1.0, b in -0.15f64..0.15, k in 1usize..6) {
            let f = sine_lift(a, b);
            let n = 3000;
            let r1 = rotation_number(&f, n * k, 0.0).unwrap();
            let rk = rotation_number(&f.iterate(k), n, 0.0).unwrap();
            prop_assert!((rk.value.0 - k as f64 * r1.value.0).abs() <= rk.rigorous_halfwidth + k as f64 * r1.rigorous_halfwidth);
        }

        #[test]
        fn integer_equivariance(a in -1.0f64..1.0, b in -0.15f64..0.15) {
            let f = sine_lift(a, b);
            let n = 500;
            let r = rotation_number(&f, n, 0.0).unwrap().value.0;
            let shifted = rotation_number(&LiftedCircleMap::translation(1.0).compose(&f), n, 0.0).unwrap().value.0;
            prop_assert!((shifted - r - 1.0).abs() < 1e-9);
        }

        #[test]
        fn start_point_independence(a in -1.0f64..1.0, b in -0.15f64..0.15, x0 in 0.0f64..1.0) {
            let f = sine_lift(a, b);
            let n = 1000;
            let r0 = rotation_number(&f, n, 0.0).unwrap().value.0;
            let r1 = rotation_number(&f, n, x0).unwrap().value.0;
            prop_assert!((r0 - r1).abs() <= 2.0 / n as f64);
        }
    }
}
