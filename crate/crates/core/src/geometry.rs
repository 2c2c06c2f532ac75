//! Conventions for the closed unit disk.
//!
//! The area form is the normalized `ω = (1/π) du∧dv`, so the disk has total
//! mass one, and the built-in Liouville form is `λ = r²/(2π) dθ`, whose
//! Cartesian expression is `(u dv − v du)/(2π)`. Angles, rotation numbers and
//! Calabi values are all measured in turns (one turn = 2π radians).

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{CalabiError, Result};

/// Points at radius in `(1, 1 + TOL_BOUNDARY]` are projected back onto the circle.
pub const TOL_BOUNDARY: f64 = 1e-9;

/// Vectors shorter than this have no usable argument.
pub const MIN_VECTOR_NORM: f64 = 1e-12;

/// Largest admissible argument jump between consecutive samples, in turns.
pub const MAX_ANGLE_STEP: f64 = 0.25;

/// Density of `ω` with respect to `du dv`.
pub const AREA_DENSITY: f64 = 1.0 / PI;

/// A point of the closed unit disk in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiskPoint {
    pub u: f64,
    pub v: f64,
}

/// A free planar vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub du: f64,
    pub dv: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { u: 0.0, v: 0.0 };

    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { u: r * c, v: r * s }
    }

    /// Boundary point at circle coordinate `x` (in turns).
    pub fn on_circle(x: f64) -> Self {
        Self::from_polar(1.0, TAU * x)
    }

    pub fn norm_sq(self) -> f64 {
        self.u * self.u + self.v * self.v
    }

    pub fn norm(self) -> f64 {
        self.u.hypot(self.v)
    }

    /// Argument in turns, in `(-1/2, 1/2]`.
    pub fn arg_turns(self) -> f64 {
        self.v.atan2(self.u) / TAU
    }

    pub fn distance(self, other: DiskPoint) -> f64 {
        (self - other).norm()
    }

    /// Rotation about the origin by `turns`.
    pub fn rotated(self, turns: f64) -> Self {
        let (s, c) = (TAU * turns).sin_cos();
        Self {
            u: c * self.u - s * self.v,
            v: s * self.u + c * self.v,
        }
    }

    /// Re-projects small numerical overshoot onto the circle.
    pub fn clamp_to_disk(self) -> Result<Self> {
        let r = self.norm();
        if r <= 1.0 {
            Ok(self)
        } else if r <= 1.0 + TOL_BOUNDARY {
            Ok(Self {
                u: self.u / r,
                v: self.v / r,
            })
        } else {
            Err(CalabiError::LeftDisk { radius: r })
        }
    }

    pub fn as_vector(self) -> TangentVector {
        TangentVector {
            du: self.u,
            dv: self.v,
        }
    }
}

impl TangentVector {
    pub const ZERO: TangentVector = TangentVector { du: 0.0, dv: 0.0 };

    pub fn new(du: f64, dv: f64) -> Self {
        Self { du, dv }
    }

    pub fn norm(self) -> f64 {
        self.du.hypot(self.dv)
    }

    pub fn dot(self, other: TangentVector) -> f64 {
        self.du * other.du + self.dv * other.dv
    }

    /// `self × other` (z-component of the cross product).
    pub fn cross(self, other: TangentVector) -> f64 {
        self.du * other.dv - self.dv * other.du
    }

    /// Signed angle from `self` to `other`, in turns, in `(-1/2, 1/2]`.
    pub fn angle_to(self, other: TangentVector) -> f64 {
        self.cross(other).atan2(self.dot(other)) / TAU
    }
}

impl Sub for DiskPoint {
    type Output = TangentVector;
    fn sub(self, rhs: DiskPoint) -> TangentVector {
        TangentVector {
            du: self.u - rhs.u,
            dv: self.v - rhs.v,
        }
    }
}

impl Add<TangentVector> for DiskPoint {
    type Output = DiskPoint;
    fn add(self, rhs: TangentVector) -> DiskPoint {
        DiskPoint {
            u: self.u + rhs.du,
            v: self.v + rhs.dv,
        }
    }
}

impl Add for TangentVector {
    type Output = TangentVector;
    fn add(self, rhs: TangentVector) -> TangentVector {
        TangentVector {
            du: self.du + rhs.du,
            dv: self.dv + rhs.dv,
        }
    }
}

impl Sub for TangentVector {
    type Output = TangentVector;
    fn sub(self, rhs: TangentVector) -> TangentVector {
        TangentVector {
            du: self.du - rhs.du,
            dv: self.dv - rhs.dv,
        }
    }
}

impl Mul<TangentVector> for f64 {
    type Output = TangentVector;
    fn mul(self, rhs: TangentVector) -> TangentVector {
        TangentVector {
            du: self * rhs.du,
            dv: self * rhs.dv,
        }
    }
}

impl Neg for TangentVector {
    type Output = TangentVector;
    fn neg(self) -> TangentVector {
        TangentVector {
            du: -self.du,
            dv: -self.dv,
        }
    }
}

/// An angle measured in full revolutions.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Turns(pub f64);

impl Turns {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_radians(self) -> f64 {
        self.0 * TAU
    }
}

impl Add for Turns {
    type Output = Turns;
    fn add(self, rhs: Turns) -> Turns {
        Turns(self.0 + rhs.0)
    }
}

impl Neg for Turns {
    type Output = Turns;
    fn neg(self) -> Turns {
        Turns(-self.0)
    }
}

/// Row-major 2×2 matrix of partial derivatives `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for Jacobian2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Jacobian2 {
    pub const IDENTITY: Jacobian2 = Jacobian2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn rotation(turns: f64) -> Self {
        let (s, c) = (TAU * turns).sin_cos();
        Self::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, w: TangentVector) -> TangentVector {
        TangentVector {
            du: self.a * w.du + self.b * w.dv,
            dv: self.c * w.du + self.d * w.dv,
        }
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Jacobian2) -> Jacobian2 {
        Jacobian2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn sub(&self, rhs: &Jacobian2) -> Jacobian2 {
        Jacobian2 {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
            c: self.c - rhs.c,
            d: self.d - rhs.d,
        }
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        let frob = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (frob * frob - 4.0 * det * det).max(0.0).sqrt();
        ((frob + disc) / 2.0).sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &Jacobian2) -> f64 {
        let d = self.sub(rhs);
        d.a.abs().max(d.b.abs()).max(d.c.abs()).max(d.d.abs())
    }
}

/// `λ_z(w)` for `λ = r²/(2π) dθ`.
pub fn liouville_eval(z: DiskPoint, w: TangentVector) -> f64 {
    (z.u * w.dv - z.v * w.du) / TAU
}

/// Density of the normalized area form; constant `1/π`.
pub fn area_density(_z: DiskPoint) -> f64 {
    AREA_DENSITY
}

/// Accumulates the continuous argument of a sequence of planar vectors.
#[derive(Debug, Clone)]
pub struct AngleUnwrapper {
    last: Option<TangentVector>,
    total: f64,
    max_step: f64,
}

impl Default for AngleUnwrapper {
    fn default() -> Self {
        Self::new()
    }
}

impl AngleUnwrapper {
    pub fn new() -> Self {
        Self {
            last: None,
            total: 0.0,
            max_step: 0.0,
        }
    }

    pub fn push(&mut self, w: TangentVector) -> Result<()> {
        let norm = w.norm();
        if norm < MIN_VECTOR_NORM {
            return Err(CalabiError::ZeroVector { norm });
        }
        if let Some(prev) = self.last {
            let step = prev.angle_to(w);
            if step.abs() >= MAX_ANGLE_STEP {
                return Err(CalabiError::StepTooCoarse(format!(
                    "argument jump of {step:.4} turns between consecutive samples"
                )));
            }
            self.max_step = self.max_step.max(step.abs());
            self.total += step;
        }
        self.last = Some(w);
        Ok(())
    }

    pub fn total(&self) -> Turns {
        Turns(self.total)
    }

    /// Largest absolute jump seen so far, in turns.
    pub fn max_step(&self) -> f64 {
        self.max_step
    }
}

/// Total continuous argument variation of `vectors`, first to last, in turns.
pub fn unwrap_angle(vectors: &[TangentVector]) -> Result<Turns> {
    let mut unwrapper = AngleUnwrapper::new();
    for &w in vectors {
        unwrapper.push(w)?;
    }
    Ok(unwrapper.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn polar_vec(turns: f64) -> TangentVector {
        DiskPoint::on_circle(turns).as_vector()
    }

    #[test]
    fn liouville_examples() {
        let w = TangentVector::new(0.3, -1.7);
        assert_eq!(liouville_eval(DiskPoint::ORIGIN, w), 0.0);
        let z = DiskPoint::new(1.0, 0.0);
        assert!((liouville_eval(z, TangentVector::new(0.0, 1.0)) - 1.0 / TAU).abs() < 1e-15);
        assert_eq!(liouville_eval(z, TangentVector::new(1.0, 0.0)), 0.0);
    }

    #[test]
    fn area_density_is_normalized() {
        assert_eq!(area_density(DiskPoint::ORIGIN), 1.0 / PI);
        assert_eq!(area_density(DiskPoint::new(0.5, 0.5)), 1.0 / PI);
        // total mass: density times Euclidean area π
        assert!((AREA_DENSITY * PI - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unwrap_full_loop() {
        let loop_ = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)]
            .map(|(a, b)| TangentVector::new(a, b));
        // quarter-turn jumps are exactly at the safety margin, so refine once
        let fine: Vec<_> = (0..=8).map(|k| polar_vec(k as f64 / 8.0)).collect();
        assert!((unwrap_angle(&fine).unwrap().0 - 1.0).abs() < 1e-14);
        assert!(matches!(
            unwrap_angle(&loop_),
            Err(CalabiError::StepTooCoarse(_))
        ));
    }

    #[test]
    fn unwrap_constant_and_near_full() {
        let c = [TangentVector::new(1.0, 0.0); 2];
        assert_eq!(unwrap_angle(&c).unwrap().0, 0.0);
        let path: Vec<_> = (0..=10).map(|k| polar_vec(0.0999 * k as f64)).collect();
        // oracle: sum of the per-step principal arguments
        let oracle: f64 = path.windows(2).map(|w| w[0].angle_to(w[1])).sum();
        let got = unwrap_angle(&path).unwrap().0;
        assert!((got - oracle).abs() < 1e-14);
        assert!((got - 0.999).abs() < 1e-12);
    }

    #[test]
    fn unwrap_rejects_zero_vector() {
        let v = [TangentVector::new(1.0, 0.0), TangentVector::new(1e-13, 0.0)];
        assert!(matches!(
            unwrap_angle(&v),
            Err(CalabiError::ZeroVector { .. })
        ));
    }

    #[test]
    fn circulation_of_liouville_recovers_area_form() {
        // ∮ λ over a small square / Euclidean area → density of ω
        for &(u, v) in &[(0.1, 0.2), (-0.5, 0.3), (0.7, -0.6)] {
            for &h in &[1e-2, 1e-3] {
                let z = DiskPoint::new(u, v);
                let corners = [
                    z,
                    DiskPoint::new(u + h, v),
                    DiskPoint::new(u + h, v + h),
                    DiskPoint::new(u, v + h),
                    z,
                ];
                // λ is linear in position, so the midpoint rule is exact per edge
                let circ: f64 = corners
                    .windows(2)
                    .map(|e| {
                        let mid = DiskPoint::new((e[0].u + e[1].u) / 2.0, (e[0].v + e[1].v) / 2.0);
                        liouville_eval(mid, e[1] - e[0])
                    })
                    .sum();
                assert!((circ / (h * h) - 1.0 / PI).abs() < 10.0 * h);
            }
        }
    }

    #[test]
    fn operator_norm_of_rotation_is_one() {
        let r = Jacobian2::rotation(0.17);
        assert!((r.operator_norm() - 1.0).abs() < 1e-14);
        assert!((Jacobian2::new(2.0, 0.0, 0.0, 0.5).operator_norm() - 2.0).abs() < 1e-14);
    }

    fn smooth_path(start: f64, increments: &[f64]) -> Vec<TangentVector> {
        let mut acc = start;
        let mut out = vec![polar_vec(acc)];
        for inc in increments {
            acc += inc;
            out.push(polar_vec(acc));
        }
        out
    }

    proptest! {
        #[test]
        fn unwrap_reversal_negates(start in -1.0f64..1.0, incs in prop::collection::vec(-0.2f64..0.2, 1..40)) {
            let path = smooth_path(start, &incs);
            let fwd = unwrap_angle(&path).unwrap().0;
            let mut rev = path.clone();
            rev.reverse();
            let back = unwrap_angle(&rev).unwrap().0;
            prop_assert!((fwd + back).abs() < 1e-12);
        }

        #[test]
        fn unwrap_is_additive(start in -1.0f64..1.0,
                              a in prop::collection::vec(-0.2f64..0.2, 1..20),
                              b in prop::collection::vec(-0.2f64..0.2, 1..20)) {
            let mut all = a.clone();
            all.extend_from_slice(&b);
            let whole = smooth_path(start, &all);
            let first = &whole[..=a.len()];
            let second = &whole[a.len()..];
            let sum = unwrap_angle(first).unwrap().0 + unwrap_angle(second).unwrap().0;
            prop_assert!((unwrap_angle(&whole).unwrap().0 - sum).abs() < 1e-12);
        }

        #[test]
        fn liouville_is_linear(u in -0.7f64..0.7, v in -0.7f64..0.7,
                               a in -3.0f64..3.0, w1 in -2.0f64..2.0, w2 in -2.0f64..2.0,
                               w3 in -2.0f64..2.0, w4 in -2.0f64..2.0) {
            let z = DiskPoint::new(u, v);
            let x = TangentVector::new(w1, w2);
            let y = TangentVector::new(w3, w4);
            let lhs = liouville_eval(z, a * x + y);
            let rhs = a * liouville_eval(z, x) + liouville_eval(z, y);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
