//! Time-dependent Hamiltonians on the disk and their vector fields.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::geometry::{DiskPoint, TangentVector};
use std::f64::consts::PI;

/// Value, gradient and Hessian of a scalar function of `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet2 {
    pub fn constant(c: f64) -> Self {
        Self {
            v: c,
            ..Self::default()
        }
    }

    pub fn coord_u(z: DiskPoint) -> Self {
        Self {
            v: z.u,
            du: 1.0,
            ..Self::default()
        }
    }

    pub fn coord_v(z: DiskPoint) -> Self {
        Self {
            v: z.v,
            dv: 1.0,
            ..Self::default()
        }
    }

    /// Jet of `s = u² + v²`.
    pub fn radius_sq(z: DiskPoint) -> Self {
        Self {
            v: z.norm_sq(),
            du: 2.0 * z.u,
            dv: 2.0 * z.v,
            duu: 2.0,
            duv: 0.0,
            dvv: 2.0,
        }
    }

    /// Jets of `Re zᵐ` and `Im zᵐ`.
    pub fn power(z: DiskPoint, m: u32) -> (Self, Self) {
        // (u + iv)^k for k = m, m-1, m-2
        let pow = |k: i64| -> (f64, f64) {
            if k < 0 {
                return (0.0, 0.0);
            }
            let (mut re, mut im) = (1.0, 0.0);
            for _ in 0..k {
                let nr = re * z.u - im * z.v;
                im = re * z.v + im * z.u;
                re = nr;
            }
            (re, im)
        };
        let m = m as i64;
        let (r0, i0) = pow(m);
        let (r1, i1) = pow(m - 1);
        let (r2, i2) = pow(m - 2);
        let mf = m as f64;
        let m2 = mf * (mf - 1.0);
        let re = Jet2 {
            v: r0,
            du: mf * r1,
            dv: -mf * i1,
            duu: m2 * r2,
            duv: -m2 * i2,
            dvv: -m2 * r2,
        };
        let im = Jet2 {
            v: i0,
            du: mf * i1,
            dv: mf * r1,
            duu: m2 * i2,
            duv: m2 * r2,
            dvv: -m2 * i2,
        };
        (re, im)
    }

    /// `φ ∘ self` for a scalar function with derivatives `(φ, φ′, φ″)` at `self.v`.
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Self {
            v: f,
            du: df * self.du,
            dv: df * self.dv,
            duu: d2f * self.du * self.du + df * self.duu,
            duv: d2f * self.du * self.dv + df * self.duv,
            dvv: d2f * self.dv * self.dv + df * self.dvv,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            v: c * self.v,
            du: c * self.du,
            dv: c * self.dv,
            duu: c * self.duu,
            duv: c * self.duv,
            dvv: c * self.dvv,
        }
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.du, self.dv]
    }

    pub fn hessian(&self) -> [f64; 3] {
        [self.duu, self.duv, self.dvv]
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + o.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            du: self.du * o.v + self.v * o.du,
            dv: self.dv * o.v + self.v * o.dv,
            duu: self.duu * o.v + 2.0 * self.du * o.du + self.v * o.duu,
            duv: self.duv * o.v + self.du * o.dv + self.dv * o.du + self.v * o.duv,
            dvv: self.dvv * o.v + 2.0 * self.dv * o.dv + self.v * o.dvv,
        }
    }
}

/// A Hamiltonian `H(t, z)`, `t ∈ [0, 1]`, constant on the unit circle for every `t`.
pub trait HamiltonianField: Send + Sync + Debug {
    fn name(&self) -> String;

    fn value(&self, t: f64, z: DiskPoint) -> f64;

    /// Analytic value, gradient and Hessian, when available.
    fn jet(&self, _t: f64, _z: DiskPoint) -> Option<Jet2> {
        None
    }

    fn gradient(&self, t: f64, z: DiskPoint) -> Option<[f64; 2]> {
        self.jet(t, z).map(|j| j.gradient())
    }

    /// `[H_uu, H_uv, H_vv]`.
    fn hessian(&self, t: f64, z: DiskPoint) -> Option<[f64; 3]> {
        self.jet(t, z).map(|j| j.hessian())
    }

    /// Set for autonomous fields of the form `H = g(|z|²)`, whose flows are known exactly.
    fn radial(&self) -> Option<RadialField> {
        None
    }

    /// Radii across which the field is less smooth than elsewhere.
    fn radial_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn is_autonomous(&self) -> bool {
        false
    }

    /// True when the field vanishes identically on the unit circle.
    fn fixes_boundary(&self) -> bool {
        false
    }
}

pub type SharedField = Arc<dyn HamiltonianField>;

/// Finite-difference step used when no analytic derivative is supplied.
pub fn fd_step(z: DiskPoint) -> f64 {
    1e-5 * (1.0 + z.norm())
}

/// `∇H`, analytic if the field provides it, else by central differences.
pub fn gradient_of(field: &dyn HamiltonianField, t: f64, z: DiskPoint) -> [f64; 2] {
    if let Some(g) = field.gradient(t, z) {
        return g;
    }
    let h = fd_step(z);
    let f = |du: f64, dv: f64| field.value(t, DiskPoint::new(z.u + du, z.v + dv));
    [
        (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
        (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
    ]
}

/// Jacobian of the gradient map, `[∂u H_u, ∂v H_u, ∂u H_v, ∂v H_v]`.
///
/// Uses the analytic Hessian when available. Otherwise the gradient is
/// differenced without symmetrizing, so a supplied gradient that is not a
/// true gradient shows up as a non-symplectic linearization.
pub fn gradient_jacobian_of(field: &dyn HamiltonianField, t: f64, z: DiskPoint) -> [f64; 4] {
    if let Some([huu, huv, hvv]) = field.hessian(t, z) {
        return [huu, huv, huv, hvv];
    }
    let h = fd_step(z);
    let g = |du: f64, dv: f64| gradient_of(field, t, DiskPoint::new(z.u + du, z.v + dv));
    let (gup, gum) = (g(h, 0.0), g(-h, 0.0));
    let (gvp, gvm) = (g(0.0, h), g(0.0, -h));
    [
        (gup[0] - gum[0]) / (2.0 * h),
        (gvp[0] - gvm[0]) / (2.0 * h),
        (gup[1] - gum[1]) / (2.0 * h),
        (gvp[1] - gvm[1]) / (2.0 * h),
    ]
}

/// `[H_uu, H_uv, H_vv]`, analytic or by differencing the gradient.
pub fn hessian_of(field: &dyn HamiltonianField, t: f64, z: DiskPoint) -> [f64; 3] {
    let [a, b, c, d] = gradient_jacobian_of(field, t, z);
    [a, (b + c) / 2.0, d]
}

/// `X = π (∂H/∂v, −∂H/∂u)`, the solution of `dH = ω(X, ·)` for `ω = (1/π) du∧dv`.
pub fn hamiltonian_vector_field(field: &dyn HamiltonianField, t: f64, z: DiskPoint) -> TangentVector {
    let [hu, hv] = gradient_of(field, t, z);
    TangentVector::new(PI * hv, -PI * hu)
}

/// A function `g(s)` of `s = |z|²` with two derivatives.
pub trait RadialProfile: Send + Sync + Debug {
    fn name(&self) -> String;
    /// `(g, g′, g″)` at `s`.
    fn eval(&self, s: f64) -> (f64, f64, f64);
    /// Radii (not `s` values) where `g` has reduced smoothness.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// `∫₀¹ g(s) ds` in closed form, when known.
    fn integral(&self) -> Option<f64> {
        None
    }
}

/// `g(s) = Σ cₖ sᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProfile {
    pub coefficients: Vec<f64>,
}

impl PolynomialProfile {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn at_boundary(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// `∫₀¹ g(s) ds`.
    pub fn integral(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k as f64 + 1.0))
            .sum()
    }
}

impl RadialProfile for PolynomialProfile {
    fn name(&self) -> String {
        let terms: Vec<String> = self.coefficients.iter().map(|c| format!("{c}")).collect();
        format!("poly[{}]", terms.join(","))
    }

    fn integral(&self) -> Option<f64> {
        Some(PolynomialProfile::integral(self))
    }

    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let (mut g, mut dg, mut d2g) = (0.0, 0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            d2g = d2g * s + 2.0 * dg;
            dg = dg * s + g;
            g = g * s + c;
        }
        (g, dg, d2g)
    }
}

/// Autonomous `H(z) = scale · g(|z|²)`.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub profile: Arc<dyn RadialProfile>,
    pub scale: f64,
}

impl RadialField {
    pub fn new(profile: Arc<dyn RadialProfile>) -> Self {
        Self {
            profile,
            scale: 1.0,
        }
    }

    pub fn scaled(&self, tau: f64) -> Self {
        Self {
            profile: Arc::clone(&self.profile),
            scale: self.scale * tau,
        }
    }

    /// `(g, g′, g″)` including the scale.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let (g, dg, d2g) = self.profile.eval(s);
        (self.scale * g, self.scale * dg, self.scale * d2g)
    }

    /// Counterclockwise angular speed, in turns per unit time, on the circle `|z|² = s`.
    pub fn angular_rate(&self, s: f64) -> f64 {
        -self.eval(s).1
    }

    /// Derivative of [`Self::angular_rate`] in `s`.
    pub fn angular_rate_ds(&self, s: f64) -> f64 {
        -self.eval(s).2
    }
}

impl HamiltonianField for RadialField {
    fn name(&self) -> String {
        if self.scale == 1.0 {
            format!("radial({})", self.profile.name())
        } else {
            format!("{}*radial({})", self.scale, self.profile.name())
        }
    }

    fn value(&self, _t: f64, z: DiskPoint) -> f64 {
        self.eval(z.norm_sq()).0
    }

    fn jet(&self, _t: f64, z: DiskPoint) -> Option<Jet2> {
        let s = Jet2::radius_sq(z);
        let (g, dg, d2g) = self.eval(s.v);
        Some(s.chain(g, dg, d2g))
    }

    fn radial(&self) -> Option<RadialField> {
        Some(self.clone())
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints()
    }

    fn is_autonomous(&self) -> bool {
        true
    }

    fn fixes_boundary(&self) -> bool {
        self.scale == 0.0 || self.eval(1.0).1 == 0.0
    }
}

/// The time-`tau` flow of `inner`, reparametrized to unit time: `H′(t, z) = τ H(τt, z)`.
#[derive(Debug, Clone)]
pub struct TimeScaledField {
    pub inner: SharedField,
    pub tau: f64,
}

impl HamiltonianField for TimeScaledField {
    fn name(&self) -> String {
        format!("{}@t{}", self.inner.name(), self.tau)
    }

    fn value(&self, t: f64, z: DiskPoint) -> f64 {
        self.tau * self.inner.value(self.tau * t, z)
    }

    fn jet(&self, t: f64, z: DiskPoint) -> Option<Jet2> {
        self.inner.jet(self.tau * t, z).map(|j| j.scale(self.tau))
    }

    fn gradient(&self, t: f64, z: DiskPoint) -> Option<[f64; 2]> {
        self.inner
            .gradient(self.tau * t, z)
            .map(|[a, b]| [self.tau * a, self.tau * b])
    }

    fn hessian(&self, t: f64, z: DiskPoint) -> Option<[f64; 3]> {
        self.inner
            .hessian(self.tau * t, z)
            .map(|h| h.map(|x| self.tau * x))
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        self.inner.radial_breakpoints()
    }

    fn is_autonomous(&self) -> bool {
        self.inner.is_autonomous()
    }

    fn fixes_boundary(&self) -> bool {
        self.inner.fixes_boundary()
    }
}

/// Time-`tau` map of `field` as a unit-time generator; radial fields stay radial.
pub fn time_scaled(field: SharedField, tau: f64) -> SharedField {
    match field.radial() {
        Some(r) => Arc::new(r.scaled(tau)),
        None => Arc::new(TimeScaledField { inner: field, tau }),
    }
}

type ValueFn = dyn Fn(f64, DiskPoint) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, DiskPoint) -> [f64; 2] + Send + Sync;

/// A field given by closures; derivatives fall back to finite differences.
#[derive(Clone)]
pub struct FnField {
    name: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
}

impl FnField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64, DiskPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
        }
    }

    /// Supplies the gradient used for the vector field. Nothing checks that it
    /// matches `value`; a mismatch yields a non-Hamiltonian flow.
    pub fn with_gradient(
        mut self,
        gradient: impl Fn(f64, DiskPoint) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl Debug for FnField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnField").field("name", &self.name).finish()
    }
}

impl HamiltonianField for FnField {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, t: f64, z: DiskPoint) -> f64 {
        (self.value)(t, z)
    }

    fn gradient(&self, t: f64, z: DiskPoint) -> Option<[f64; 2]> {
        self.gradient.as_ref().map(|g| g(t, z))
    }
}
