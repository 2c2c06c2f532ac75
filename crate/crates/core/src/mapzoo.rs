//! Built-in Hamiltonian families and the maps built from them.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CalabiError, Result};
use crate::flow::{time_scaled, HamiltonianField, Jet2, MapBundle, PolynomialProfile, RadialField, RadialProfile, SharedField};
use crate::geometry::DiskPoint;

/// Quintic smootherstep `6x⁵ − 15x⁴ + 10x³` with its first two derivatives.
fn smootherstep(x: f64) -> (f64, f64, f64) {
    let x = x.clamp(0.0, 1.0);
    let s = x * x * x * (x * (6.0 * x - 15.0) + 10.0);
    let ds = 30.0 * x * x * (x - 1.0) * (x - 1.0);
    let d2s = 60.0 * x * (2.0 * x - 1.0) * (x - 1.0);
    (s, ds, d2s)
}

/// Plateau profile `ψ`: one on `[0, 1/2]`, zero from 1 on, joined by a smootherstep.
pub fn plateau(rho: f64) -> (f64, f64, f64) {
    if rho <= 0.5 {
        (1.0, 0.0, 0.0)
    } else if rho >= 1.0 {
        (0.0, 0.0, 0.0)
    } else {
        let (s, ds, d2s) = smootherstep(2.0 * rho - 1.0);
        (1.0 - s, -2.0 * ds, -4.0 * d2s)
    }
}

/// `∫₀¹ ψ(ρ) ρ dρ`.
pub const PLATEAU_MOMENT: f64 = 2.0 / 7.0;

/// `h_n(r) = c_n ψ(n r)` with `∫₀¹ h_n(r) 2πr dr = 1`, as a function of `s = r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub n: u32,
    pub c: f64,
}

impl BumpProfile {
    pub fn new(n: u32) -> Self {
        let nf = n as f64;
        Self {
            n,
            c: nf * nf / (TAU * PLATEAU_MOMENT),
        }
    }

    /// `(h, h′, h″)` in the radius.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        let nf = self.n as f64;
        let (p, dp, d2p) = plateau(nf * r);
        (self.c * p, self.c * nf * dp, self.c * nf * nf * d2p)
    }
}

impl RadialProfile for BumpProfile {
    fn name(&self) -> String {
        format!("bump{}", self.n)
    }

    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let r = s.max(0.0).sqrt();
        let (h, dh, d2h) = self.radial(r);
        if dh == 0.0 && d2h == 0.0 {
            return (h, 0.0, 0.0);
        }
        (h, dh / (2.0 * r), (d2h * r - dh) / (4.0 * r * r * r))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let nf = self.n as f64;
        vec![0.5 / nf, 1.0 / nf]
    }

    fn integral(&self) -> Option<f64> {
        // ∫₀¹ h(√s) ds = ∫₀¹ h(r) 2r dr = 1/π by the normalization
        Some(1.0 / PI)
    }
}

/// `H = β (1 − s)² (u cos 2πkt + v sin 2πkt)`: a rotating shear that fixes the boundary pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearField {
    pub beta: f64,
    pub spin: i32,
}

impl HamiltonianField for ShearField {
    fn name(&self) -> String {
        format!("shear({},{})", self.beta, self.spin)
    }

    fn value(&self, t: f64, z: DiskPoint) -> f64 {
        let (s, c) = (TAU * self.spin as f64 * t).sin_cos();
        self.beta * (1.0 - z.norm_sq()).powi(2) * (c * z.u + s * z.v)
    }

    fn jet(&self, t: f64, z: DiskPoint) -> Option<Jet2> {
        let (sn, cs) = (TAU * self.spin as f64 * t).sin_cos();
        let sj = Jet2::radius_sq(z);
        let w = 1.0 - sj.v;
        let a = sj.chain(self.beta * w * w, -2.0 * self.beta * w, 2.0 * self.beta);
        let l = Jet2::coord_u(z).scale(cs) + Jet2::coord_v(z).scale(sn);
        Some(a * l)
    }

    fn is_autonomous(&self) -> bool {
        self.spin == 0
    }

    fn fixes_boundary(&self) -> bool {
        true
    }
}

/// `H = β (1 − s)(c + Re zᵐ)(1 + γ Im zᵏ)`: moves the boundary at `β (c + cos mθ)(1 + γ sin kθ)` turns per unit time.
///
/// With `c = 1` the boundary fixed points are degenerate and the map develops a
/// thin layer near them; `c = 0` gives simple zeros instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftField {
    pub beta: f64,
    pub offset: f64,
    pub m: u32,
    pub k: u32,
    pub gamma: f64,
}

impl DriftField {
    pub fn new(beta: f64, m: u32, k: u32, gamma: f64) -> Self {
        Self {
            beta,
            offset: 1.0,
            m,
            k,
            gamma,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }
}

impl HamiltonianField for DriftField {
    fn name(&self) -> String {
        format!("drift({},{},{},{},{})", self.beta, self.offset, self.m, self.k, self.gamma)
    }

    fn value(&self, t: f64, z: DiskPoint) -> f64 {
        self.jet(t, z).expect("analytic").v
    }

    fn jet(&self, _t: f64, z: DiskPoint) -> Option<Jet2> {
        let a = (Jet2::constant(1.0) - Jet2::radius_sq(z)).scale(self.beta);
        let b = Jet2::constant(self.offset) + Jet2::power(z, self.m).0;
        let c = Jet2::constant(1.0) + Jet2::power(z, self.k).1.scale(self.gamma);
        Some(a * b * c)
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

fn radial_field(profile: impl RadialProfile + 'static) -> RadialField {
    RadialField::new(Arc::new(profile))
}

/// Generator of the rotation by `alpha` turns: `H = α(1 − |z|²)`.
pub fn rotation_field(alpha: f64) -> RadialField {
    radial_field(PolynomialProfile::new(vec![alpha, -alpha]))
}

pub fn rotation(alpha: f64) -> MapBundle {
    MapBundle::from_field(Arc::new(rotation_field(alpha)))
        .expect("radial fields need no calibration")
        .with_name(format!("rotation({alpha})"))
}

/// `H = g(|z|²)` for a polynomial `g` with `g(1) = 0`.
pub fn radial_twist_field(coefficients: &[f64]) -> Result<RadialField> {
    let p = PolynomialProfile::new(coefficients.to_vec());
    let g1 = p.at_boundary();
    if g1.abs() > 1e-12 {
        return Err(CalabiError::BoundaryNotConstant {
            time: 0.0,
            variation: g1,
        });
    }
    Ok(radial_field(p))
}

pub fn radial_twist(coefficients: &[f64]) -> Result<MapBundle> {
    Ok(MapBundle::from_field(Arc::new(radial_twist_field(coefficients)?))?
        .with_name(format!("radial_twist({coefficients:?})")))
}

/// `g(s) = β (1 − s)²`.
pub fn twist(beta: f64) -> MapBundle {
    radial_twist(&[beta, -2.0 * beta, beta]).expect("vanishes on the boundary")
}

pub fn bump_field(n: u32) -> Result<RadialField> {
    if n < 2 {
        return Err(CalabiError::InvalidParameter(format!("bump needs n >= 2, got {n}")));
    }
    Ok(radial_field(BumpProfile::new(n)))
}

pub fn bump(n: u32) -> Result<MapBundle> {
    Ok(MapBundle::from_field(Arc::new(bump_field(n)?))?.with_name(format!("bump({n})")))
}

pub fn shear(beta: f64, spin: i32) -> Result<MapBundle> {
    MapBundle::from_field(Arc::new(ShearField { beta, spin }))
}

pub fn drift(beta: f64, m: u32, k: u32, gamma: f64) -> Result<MapBundle> {
    drift_map(DriftField::new(beta, m, k, gamma))
}

pub fn drift_map(field: DriftField) -> Result<MapBundle> {
    MapBundle::from_field(Arc::new(field))
}

/// `h ∘ R_α ∘ h⁻¹` with `h` the time-`tau` map of `conjugator`.
pub fn conjugated_rotation(alpha: f64, conjugator: SharedField, tau: f64) -> Result<MapBundle> {
    if tau == 0.0 {
        return Ok(rotation(alpha));
    }
    let h = MapBundle::from_field(time_scaled(conjugator, tau))?;
    Ok(rotation(alpha).conjugate_by(&h))
}

pub fn compose(a: &MapBundle, b: &MapBundle) -> MapBundle {
    a.compose(b)
}

pub fn iterate(a: &MapBundle, n: usize) -> MapBundle {
    a.iterate(n)
}

pub fn inverse(a: &MapBundle) -> MapBundle {
    a.inverse()
}

/// Ground truth for autonomous radial generators `H = g(|z|²)`.
#[derive(Debug, Clone)]
pub struct RadialClosedForm {
    field: RadialField,
}

impl RadialClosedForm {
    pub fn new(field: RadialField) -> Self {
        Self { field }
    }

    /// `2 ∫₀¹ g(s) ds`, shared by the angle and Hamiltonian forms.
    pub fn cal(&self) -> Option<f64> {
        self.field
            .profile
            .integral()
            .map(|i| 2.0 * self.field.scale * i)
    }

    /// `ρ̃ = −g′(1)`.
    pub fn rho(&self) -> f64 {
        -self.field.eval(1.0).1
    }

    /// `A(z) = g(s) − s g′(s) + g′(1)`.
    pub fn action(&self, z: DiskPoint) -> f64 {
        let s = z.norm_sq();
        let (g, dg, _) = self.field.eval(s);
        g - s * dg + self.field.eval(1.0).1
    }

    /// `Cal₁ = ∫_D A ω = Cal̃ − ρ̃`.
    pub fn cal1(&self) -> Option<f64> {
        self.cal().map(|c| c - self.rho())
    }

    /// Chord winding of two points on the circle `|z|² = s`: `−g′(s)`.
    pub fn circle_winding(&self, s: f64) -> f64 {
        -self.field.eval(s).1
    }
}

fn one() -> u32 {
    1
}

fn unit() -> f64 {
    1.0
}

/// Declarative description of a map, as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Rotation {
        alpha: f64,
    },
    RadialTwist {
        coefficients: Vec<f64>,
    },
    Bump {
        n: u32,
    },
    Shear {
        beta: f64,
        #[serde(default)]
        spin: i32,
    },
    Drift {
        beta: f64,
        #[serde(default = "unit")]
        offset: f64,
        #[serde(default = "one")]
        m: u32,
        #[serde(default = "one")]
        k: u32,
        #[serde(default)]
        gamma: f64,
    },
    ConjugatedRotation {
        alpha: f64,
        conjugator: Box<FamilySpec>,
        tau: f64,
    },
    /// `outer ∘ inner`.
    Composition {
        outer: Box<FamilySpec>,
        inner: Box<FamilySpec>,
    },
    Iterate {
        map: Box<FamilySpec>,
        n: usize,
    },
    Inverse {
        map: Box<FamilySpec>,
    },
    /// Time-`tau` map of a single-generator family.
    Scaled {
        map: Box<FamilySpec>,
        tau: f64,
    },
}

impl FamilySpec {
    /// The generator, for families given by a single Hamiltonian.
    pub fn field(&self) -> Result<SharedField> {
        Ok(match self {
            FamilySpec::Rotation { alpha } => Arc::new(rotation_field(*alpha)),
            FamilySpec::RadialTwist { coefficients } => Arc::new(radial_twist_field(coefficients)?),
            FamilySpec::Bump { n } => Arc::new(bump_field(*n)?),
            FamilySpec::Shear { beta, spin } => Arc::new(ShearField {
                beta: *beta,
                spin: *spin,
            }),
            FamilySpec::Drift {
                beta,
                offset,
                m,
                k,
                gamma,
            } => Arc::new(DriftField {
                beta: *beta,
                offset: *offset,
                m: *m,
                k: *k,
                gamma: *gamma,
            }),
            FamilySpec::Scaled { map, tau } => time_scaled(map.field()?, *tau),
            other => {
                return Err(CalabiError::InvalidParameter(format!(
                    "{} is not generated by a single Hamiltonian",
                    other.family_name()
                )))
            }
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            FamilySpec::Rotation { .. } => "rotation",
            FamilySpec::RadialTwist { .. } => "radial_twist",
            FamilySpec::Bump { .. } => "bump",
            FamilySpec::Shear { .. } => "shear",
            FamilySpec::Drift { .. } => "drift",
            FamilySpec::ConjugatedRotation { .. } => "conjugated_rotation",
            FamilySpec::Composition { .. } => "composition",
            FamilySpec::Iterate { .. } => "iterate",
            FamilySpec::Inverse { .. } => "inverse",
            FamilySpec::Scaled { .. } => "scaled",
        }
    }

    pub fn build(&self) -> Result<MapBundle> {
        match self {
            FamilySpec::Rotation { alpha } => Ok(rotation(*alpha)),
            FamilySpec::RadialTwist { coefficients } => radial_twist(coefficients),
            FamilySpec::Bump { n } => bump(*n),
            FamilySpec::ConjugatedRotation {
                alpha,
                conjugator,
                tau,
            } => conjugated_rotation(*alpha, conjugator.field()?, *tau),
            FamilySpec::Composition { outer, inner } => Ok(outer.build()?.compose(&inner.build()?)),
            FamilySpec::Iterate { map, n } => Ok(map.build()?.iterate(*n)),
            FamilySpec::Inverse { map } => Ok(map.build()?.inverse()),
            single => MapBundle::from_field(single.field()?),
        }
    }

    /// Closed-form values when the family is an autonomous radial generator.
    pub fn closed_form(&self) -> Option<RadialClosedForm> {
        let f = self.field().ok()?;
        if !f.is_autonomous() {
            return None;
        }
        f.radial().map(RadialClosedForm::new)
    }
}
