//! Disk maps carried together with a generating isotopy.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{PolynomialProfile, RadialField, SharedField};
use super::rk4::{self, Oriented};
use crate::circle::LiftedCircleMap;
use crate::error::{CalabiError, Result};
use crate::geometry::{AngleUnwrapper, DiskPoint, Jacobian2, Turns, MIN_VECTOR_NORM};

/// Doublings allowed when a chord rotates too fast for the sampling grid.
pub const MAX_REFINEMENT: u32 = 8;

/// One unit-time Hamiltonian flow, run forward or as the inverse isotopy.
#[derive(Debug, Clone)]
pub struct FlowPiece {
    field: SharedField,
    reversed: bool,
    steps: usize,
    exact: Option<RadialField>,
}

impl FlowPiece {
    /// Radial autonomous fields are flowed exactly; anything else gets a calibrated step count.
    pub fn new(field: SharedField) -> Result<Self> {
        let exact = if field.is_autonomous() {
            field.radial()
        } else {
            None
        };
        let steps = match exact {
            Some(_) => 0,
            None => rk4::calibrate_steps(Oriented {
                field: field.as_ref(),
                reversed: false,
            })?,
        };
        Ok(Self {
            field,
            reversed: false,
            steps,
            exact,
        })
    }

    /// Same field with a fixed step count and no exact shortcut.
    pub fn with_steps(field: SharedField, steps: usize) -> Self {
        Self {
            field,
            reversed: false,
            steps: steps.max(1),
            exact: None,
        }
    }

    pub fn field(&self) -> &SharedField {
        &self.field
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// RK4 step count per unit time; zero for exactly integrated pieces.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn reversed(&self) -> Self {
        Self {
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    fn oriented(&self) -> Oriented<'_> {
        Oriented {
            field: self.field.as_ref(),
            reversed: self.reversed,
        }
    }

    fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }

    /// Generator at local time `tau`: `H(τ)` forward, `−H(1 − τ)` reversed.
    pub fn hamiltonian(&self, tau: f64, z: DiskPoint) -> f64 {
        if self.reversed {
            -self.field.value(1.0 - tau, z)
        } else {
            self.field.value(tau, z)
        }
    }

    /// Angular speed in turns on the circle `|z|² = s` (exact pieces only).
    fn exact_rate(r: &RadialField, sign: f64, s: f64) -> f64 {
        sign * r.angular_rate(s)
    }

    pub fn advance(&self, z: DiskPoint, tau: f64) -> Result<DiskPoint> {
        match &self.exact {
            Some(r) => Ok(z.rotated(Self::exact_rate(r, self.sign(), z.norm_sq()) * tau)),
            None => rk4::advance(self.oriented(), z, tau, self.steps),
        }
    }

    pub fn advance_with_jacobian(&self, z: DiskPoint, tau: f64) -> Result<(DiskPoint, Jacobian2)> {
        match &self.exact {
            Some(r) => {
                let s = z.norm_sq();
                let turns = Self::exact_rate(r, self.sign(), s) * tau;
                // f(z) = R(θ(s)) z, so Df = R(θ)(I + Jz ⊗ ∇θ)
                let dtheta = TAU * tau * self.sign() * r.angular_rate_ds(s);
                let (tu, tv) = (dtheta * 2.0 * z.u, dtheta * 2.0 * z.v);
                let m = Jacobian2::new(1.0 - z.v * tu, -z.v * tv, z.u * tu, 1.0 + z.u * tv);
                Ok((z.rotated(turns), Jacobian2::rotation(turns).mul(&m)))
            }
            None => rk4::advance_with_jacobian(self.oriented(), z, tau, self.steps),
        }
    }

    /// Lifted boundary coordinate after local time `tau`.
    pub fn advance_boundary(&self, x: f64, tau: f64) -> Result<f64> {
        if let Some(r) = &self.exact {
            return Ok(x + Self::exact_rate(r, self.sign(), 1.0) * tau);
        }
        if self.field.fixes_boundary() {
            return Ok(x);
        }
        rk4::advance_boundary(self.oriented(), x, tau, self.steps)
    }

    /// Winding of `f_τ(x) − f_τ(y)` over the whole piece, with the end points.
    pub fn chord_winding(&self, x: DiskPoint, y: DiskPoint) -> Result<(f64, DiskPoint, DiskPoint)> {
        let sep = x.distance(y);
        if sep < MIN_VECTOR_NORM {
            return Err(CalabiError::ZeroVector { norm: sep });
        }
        if let Some(r) = &self.exact {
            let (sx, sy) = (x.norm_sq(), y.norm_sq());
            let wx = Self::exact_rate(r, self.sign(), sx);
            let wy = Self::exact_rate(r, self.sign(), sy);
            let turns = circle_pair_winding(x, y, wx, wy);
            return Ok((turns, x.rotated(wx), y.rotated(wy)));
        }
        let mut last_err = None;
        for level in 0..=MAX_REFINEMENT {
            let n = self.steps << level;
            let path = rk4::paired_trajectory(self.oriented(), x, y, n)?;
            let mut unwrap = AngleUnwrapper::new();
            let res: Result<()> = path.iter().try_for_each(|&(a, b)| unwrap.push(a - b));
            match res {
                Ok(()) => {
                    let &(fx, fy) = path.last().expect("nonempty");
                    return Ok((unwrap.total().value(), fx, fy));
                }
                Err(e @ CalabiError::StepTooCoarse(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }
}

/// Winding, in turns, of `x(t) − y(t)` when `x` and `y` turn rigidly about the
/// origin by `wx` and `wy` turns over unit time.
pub fn circle_pair_winding(x: DiskPoint, y: DiskPoint, wx: f64, wy: f64) -> f64 {
    // x − y = e^{iA}(r₁ − r₂ e^{iφ}) with φ the angle of y relative to x
    let (s1, s2) = (x.norm_sq(), y.norm_sq());
    let (r1, r2) = (s1.sqrt(), s2.sqrt());
    let phi0 = TAU * (y.arg_turns() - x.arg_turns());
    let dphi = TAU * (wy - wx);
    let phi1 = phi0 + dphi;
    let inner = if dphi == 0.0 {
        0.0
    } else if s1 > s2 {
        let f = |p: f64| (-r2 * p.sin()).atan2(r1 - r2 * p.cos());
        f(phi1) - f(phi0)
    } else if s1 < s2 {
        let q = r1 / r2;
        let g = |p: f64| (q * p.sin()).atan2(1.0 - q * p.cos());
        dphi + g(phi1) - g(phi0)
    } else {
        // same circle, hence same speed
        0.0
    };
    wx + inner / TAU
}

/// A disk map `f` with a Hamiltonian isotopy from the identity, stored as a
/// concatenation of unit-time pieces run in equal time slots.
#[derive(Debug, Clone)]
pub struct MapBundle {
    name: String,
    pieces: Vec<FlowPiece>,
}

impl MapBundle {
    pub fn from_field(field: SharedField) -> Result<Self> {
        let name = field.name();
        Ok(Self {
            name,
            pieces: vec![FlowPiece::new(field)?],
        })
    }

    pub fn from_pieces(name: impl Into<String>, pieces: Vec<FlowPiece>) -> Self {
        let mut pieces = pieces;
        if pieces.is_empty() {
            pieces.push(Self::identity().pieces.remove(0));
        }
        Self {
            name: name.into(),
            pieces,
        }
    }

    pub fn identity() -> Self {
        let zero: SharedField = Arc::new(RadialField::new(Arc::new(PolynomialProfile::new(vec![]))));
        Self {
            name: "identity".into(),
            pieces: vec![FlowPiece::new(zero).expect("exact")],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn pieces(&self) -> &[FlowPiece] {
        &self.pieces
    }

    /// `self ∘ inner`: the isotopy of `inner` followed by that of `self`.
    pub fn compose(&self, inner: &MapBundle) -> MapBundle {
        let mut pieces = inner.pieces.clone();
        pieces.extend(self.pieces.iter().cloned());
        MapBundle {
            name: format!("{}*{}", self.name, inner.name),
            pieces,
        }
    }

    pub fn inverse(&self) -> MapBundle {
        MapBundle {
            name: format!("inv({})", self.name),
            pieces: self.pieces.iter().rev().map(FlowPiece::reversed).collect(),
        }
    }

    pub fn iterate(&self, n: usize) -> MapBundle {
        if n == 0 {
            return Self::identity();
        }
        let mut pieces = Vec::with_capacity(n * self.pieces.len());
        for _ in 0..n {
            pieces.extend(self.pieces.iter().cloned());
        }
        MapBundle {
            name: format!("({})^{n}", self.name),
            pieces,
        }
    }

    /// `h ∘ self ∘ h⁻¹` with isotopy `h⁻¹`, then `self`, then `h`.
    pub fn conjugate_by(&self, h: &MapBundle) -> MapBundle {
        h.compose(&self.compose(&h.inverse()))
            .with_name(format!("conj({},{})", h.name, self.name))
    }

    fn slot(&self, t: f64) -> (usize, f64) {
        let m = self.pieces.len();
        let x = t.clamp(0.0, 1.0) * m as f64;
        let k = (x.floor() as usize).min(m - 1);
        (k, x - k as f64)
    }

    /// `f_t(z)` along the concatenated isotopy.
    pub fn flow_map(&self, t: f64, z: DiskPoint) -> Result<DiskPoint> {
        let (k, tau) = self.slot(t);
        let mut p = z;
        for piece in &self.pieces[..k] {
            p = piece.advance(p, 1.0)?;
        }
        self.pieces[k].advance(p, tau)
    }

    pub fn flow_jacobian(&self, t: f64, z: DiskPoint) -> Result<Jacobian2> {
        Ok(self.flow_map_with_jacobian(t, z)?.1)
    }

    pub fn flow_map_with_jacobian(&self, t: f64, z: DiskPoint) -> Result<(DiskPoint, Jacobian2)> {
        let (k, tau) = self.slot(t);
        let mut p = z;
        let mut j = Jacobian2::IDENTITY;
        for (i, piece) in self.pieces[..=k].iter().enumerate() {
            let span = if i == k { tau } else { 1.0 };
            let (q, dj) = piece.advance_with_jacobian(p, span)?;
            p = q;
            j = dj.mul(&j);
        }
        Ok((p, j))
    }

    /// The time-one map.
    pub fn map(&self, z: DiskPoint) -> Result<DiskPoint> {
        self.pieces.iter().try_fold(z, |p, piece| piece.advance(p, 1.0))
    }

    pub fn map_with_jacobian(&self, z: DiskPoint) -> Result<(DiskPoint, Jacobian2)> {
        self.flow_map_with_jacobian(1.0, z)
    }

    pub fn inverse_map(&self, z: DiskPoint) -> Result<DiskPoint> {
        self.pieces
            .iter()
            .rev()
            .try_fold(z, |p, piece| piece.reversed().advance(p, 1.0))
    }

    pub fn inverse_map_with_jacobian(&self, z: DiskPoint) -> Result<(DiskPoint, Jacobian2)> {
        self.inverse().map_with_jacobian(z)
    }

    /// Generator of the concatenated isotopy: `m · H_k(m t − k)` in slot `k`.
    pub fn hamiltonian(&self, t: f64, z: DiskPoint) -> f64 {
        let (k, tau) = self.slot(t);
        self.pieces.len() as f64 * self.pieces[k].hamiltonian(tau, z)
    }

    /// `φ̃(x)` for the boundary lift determined by the isotopy.
    pub fn lift_value(&self, x: f64) -> Result<f64> {
        self.pieces
            .iter()
            .try_fold(x, |y, piece| piece.advance_boundary(y, 1.0))
    }

    pub fn boundary_lift(&self) -> LiftedCircleMap {
        let me = self.clone();
        LiftedCircleMap::new(format!("lift({})", self.name), move |x| me.lift_value(x))
    }

    /// Total winding of the chord `f_t(x) − f_t(y)` over the isotopy.
    pub fn chord_winding(&self, x: DiskPoint, y: DiskPoint) -> Result<Turns> {
        Ok(self.chord_winding_with_images(x, y)?.0)
    }

    /// Chord winding together with `f(x)` and `f(y)`.
    pub fn chord_winding_with_images(
        &self,
        x: DiskPoint,
        y: DiskPoint,
    ) -> Result<(Turns, DiskPoint, DiskPoint)> {
        let mut total = 0.0;
        let (mut a, mut b) = (x, y);
        for piece in &self.pieces {
            let (w, na, nb) = piece.chord_winding(a, b)?;
            total += w;
            a = na;
            b = nb;
        }
        Ok((Turns(total), a, b))
    }

    /// Union of all radial breakpoints of the pieces.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| p.field.radial_breakpoints())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// True when every piece is integrated in closed form.
    pub fn is_exact(&self) -> bool {
        self.pieces.iter().all(FlowPiece::is_exact)
    }

    /// `max |det Df − 1|` over `sample_count` seeded uniform interior points.
    pub fn area_residual(&self, sample_count: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..sample_count.max(1) {
            let r: f64 = rng.gen::<f64>().sqrt();
            let th: f64 = TAU * rng.gen::<f64>();
            let (_, j) = self.map_with_jacobian(DiskPoint::from_polar(r, th))?;
            worst = worst.max((j.det() - 1.0).abs());
        }
        Ok(worst)
    }
}
