//! Action functions and the action-average form of the invariant.

use serde::{Deserialize, Serialize};

use crate::circle::BoundaryMeasure;
use crate::error::{CalabiError, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::flow::MapBundle;
use crate::geometry::{liouville_eval, DiskPoint, TangentVector};
use crate::quadrature::{composite_rule, GridSpec, PolarGrid, TrigInterpolant};

pub const DEFAULT_RADIAL_NODES: usize = 64;
pub const DEFAULT_TOL_AREA: f64 = 1e-6;
/// Above this many atoms, `c_μ` is read off a trigonometric interpolant of `A₀` on the circle.
pub const DIRECT_ATOM_LIMIT: usize = 64;
const BOUNDARY_TABLE: usize = 256;
const AREA_CHECK_SAMPLES: usize = 100;

/// A primitive of the area form: the built-in `r²/(2π) dθ`, optionally plus `d(c·u·v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum LiouvilleForm {
    #[default]
    Standard,
    PlusExactUv(f64),
}

impl LiouvilleForm {
    pub fn eval(&self, z: DiskPoint, w: TangentVector) -> f64 {
        let base = liouville_eval(z, w);
        match *self {
            LiouvilleForm::Standard => base,
            LiouvilleForm::PlusExactUv(c) => base + c * (z.v * w.du + z.u * w.dv),
        }
    }
}

/// `(f*λ − λ)_z(w)`.
pub fn pullback_difference(
    bundle: &MapBundle,
    form: LiouvilleForm,
    z: DiskPoint,
    w: TangentVector,
) -> Result<f64> {
    let (fz, j) = bundle.map_with_jacobian(z)?;
    Ok(form.eval(fz, j.apply(w)) - form.eval(z, w))
}

/// Options shared by the action-function computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionOptions {
    pub radial_nodes: usize,
    pub form: LiouvilleForm,
    pub tol_area: f64,
    pub exec: Execution,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            radial_nodes: DEFAULT_RADIAL_NODES,
            form: LiouvilleForm::Standard,
            tol_area: DEFAULT_TOL_AREA,
            exec: Execution::default(),
        }
    }
}

/// `A = A₀ − c_μ`, with `A₀` the integral of `f*λ − λ` along the segment from the origin.
#[derive(Debug, Clone)]
pub struct ActionFunction {
    bundle: MapBundle,
    options: ActionOptions,
    breakpoints: Vec<f64>,
    c_mu: f64,
}

fn check_area(bundle: &MapBundle, tol_area: f64) -> Result<f64> {
    let residual = bundle.area_residual(AREA_CHECK_SAMPLES, 0)?;
    if residual > 10.0 * tol_area {
        return Err(CalabiError::NotAreaPreserving { residual });
    }
    Ok(residual)
}

/// `∫ (f*λ − λ)` along the straight segment `a → b`, with panel edges where
/// the segment crosses a breakpoint radius.
fn segment_integral(
    bundle: &MapBundle,
    form: LiouvilleForm,
    breakpoints: &[f64],
    nodes: usize,
    a: DiskPoint,
    b: DiskPoint,
) -> Result<f64> {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return Ok(0.0);
    }
    // parameters where |a + t d| crosses a breakpoint
    let mut cuts = Vec::new();
    let (pa, pd) = (a.as_vector().dot(d), a.norm_sq());
    for &r in breakpoints {
        let disc = pa * pa - len2 * (pd - r * r);
        if disc > 0.0 {
            for t in [(-pa - disc.sqrt()) / len2, (-pa + disc.sqrt()) / len2] {
                cuts.push(t);
            }
        }
    }
    let mut acc = 0.0;
    for (t, w) in composite_rule(0.0, 1.0, &cuts, nodes) {
        acc += w * pullback_difference(bundle, form, a + t * d, d)?;
    }
    Ok(acc)
}

impl ActionFunction {
    pub fn new(bundle: &MapBundle, mu: &BoundaryMeasure, options: ActionOptions) -> Result<Self> {
        check_area(bundle, options.tol_area)?;
        let mut a = Self {
            bundle: bundle.clone(),
            options,
            breakpoints: bundle.radial_breakpoints(),
            c_mu: 0.0,
        };
        a.c_mu = if mu.len() <= DIRECT_ATOM_LIMIT {
            mu.try_integrate(|x| a.base(DiskPoint::on_circle(x)))?
        } else {
            let table = try_map_indexed(options.exec, BOUNDARY_TABLE, |j| {
                a.base(DiskPoint::on_circle(j as f64 / BOUNDARY_TABLE as f64))
            })?;
            let interp = TrigInterpolant::new(&table, 0.0);
            mu.integrate(|x| interp.eval(x))
        };
        Ok(a)
    }

    /// `A₀(z)`, vanishing at the origin.
    pub fn base(&self, z: DiskPoint) -> Result<f64> {
        segment_integral(
            &self.bundle,
            self.options.form,
            &self.breakpoints,
            self.options.radial_nodes,
            DiskPoint::ORIGIN,
            z,
        )
    }

    pub fn eval(&self, z: DiskPoint) -> Result<f64> {
        Ok(self.base(z)? - self.c_mu)
    }

    /// `c_μ = ∫ A₀ dμ`.
    pub fn normalization(&self) -> f64 {
        self.c_mu
    }

    /// `A₀` at the last vertex computed along a polygonal path from the origin.
    pub fn base_along(&self, path: &[DiskPoint]) -> Result<f64> {
        let mut acc = 0.0;
        let mut prev = DiskPoint::ORIGIN;
        for &p in path {
            acc += segment_integral(
                &self.bundle,
                self.options.form,
                &self.breakpoints,
                self.options.radial_nodes,
                prev,
                p,
            )?;
            prev = p;
        }
        Ok(acc)
    }
}

pub fn action_function(bundle: &MapBundle, mu: &BoundaryMeasure, radial_nodes: usize) -> Result<ActionFunction> {
    ActionFunction::new(
        bundle,
        mu,
        ActionOptions {
            radial_nodes,
            ..ActionOptions::default()
        },
    )
}

/// `∫_D A ω` with its grid-doubling check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cal1Estimate {
    /// Value on the doubled grid.
    pub value: f64,
    /// `|value − value on the base grid|`.
    pub delta: f64,
    pub c_mu: f64,
    pub area_residual: f64,
    pub grid: GridSpec,
}

/// `(∫_D A₀ ω, A₀ on the grid's boundary angles)`.
///
/// Along each ray `A₀(ρe) = ∫₀^ρ F`, so the area integral reduces to
/// `∫₀¹ F(ρ)(1 − ρ²)/2 dρ` per direction.
fn ray_sums(
    bundle: &MapBundle,
    form: LiouvilleForm,
    grid: &PolarGrid,
    exec: Execution,
) -> Result<(f64, Vec<f64>)> {
    let per_angle = try_map_indexed(exec, grid.angles().len(), |j| -> Result<(f64, f64)> {
        let th = grid.angles()[j];
        let e = TangentVector::new(th.cos(), th.sin());
        let (mut area, mut full) = (0.0, 0.0);
        for &(r, w) in grid.radial() {
            let z = DiskPoint::from_polar(r, th);
            let f = pullback_difference(bundle, form, z, e)?;
            area += w * f * (1.0 - r * r) / 2.0;
            full += w * f;
        }
        Ok((area, full))
    })?;
    let m = per_angle.len() as f64;
    let area = per_angle.iter().map(|p| p.0).sum::<f64>() * 2.0 / m;
    Ok((area, per_angle.into_iter().map(|p| p.1).collect()))
}

fn cal1_on_grid(
    bundle: &MapBundle,
    mu: &BoundaryMeasure,
    spec: GridSpec,
    options: ActionOptions,
) -> Result<(f64, f64)> {
    let breakpoints = bundle.radial_breakpoints();
    let grid = PolarGrid::new(spec, &breakpoints);
    let (area, boundary) = ray_sums(bundle, options.form, &grid, options.exec)?;
    let c_mu = if mu.len() <= DIRECT_ATOM_LIMIT {
        let nodes = options.radial_nodes;
        mu.try_integrate(|x| {
            segment_integral(bundle, options.form, &breakpoints, nodes, DiskPoint::ORIGIN, DiskPoint::on_circle(x))
        })?
    } else {
        let offset = 0.5 / boundary.len() as f64;
        let interp = TrigInterpolant::new(&boundary, offset);
        mu.integrate(|x| interp.eval(x))
    };
    Ok((area - c_mu, c_mu))
}

/// `Cal₁(f) = ∫_D A ω` on `grid` and on its doubling.
pub fn cal1(
    bundle: &MapBundle,
    mu: &BoundaryMeasure,
    grid: GridSpec,
    options: ActionOptions,
) -> Result<Cal1Estimate> {
    let area_residual = check_area(bundle, options.tol_area)?;
    let (coarse, _) = cal1_on_grid(bundle, mu, grid, options)?;
    let fine_grid = grid.doubled();
    let (fine, c_mu) = cal1_on_grid(bundle, mu, fine_grid, options)?;
    Ok(Cal1Estimate {
        value: fine,
        delta: (fine - coarse).abs(),
        c_mu,
        area_residual,
        grid: fine_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::invariant_measure;
    use crate::flow::{PolynomialProfile, RadialField};
    use std::sync::Arc;

    fn radial(c: Vec<f64>) -> MapBundle {
        MapBundle::from_field(Arc::new(RadialField::new(Arc::new(PolynomialProfile::new(c))))).unwrap()
    }

    fn boundary_measure(b: &MapBundle) -> BoundaryMeasure {
        invariant_measure(&b.boundary_lift(), 100, 1000, 0.0).unwrap()
    }

    #[test]
    fn rotation_action_vanishes() {
        let b = radial(vec![0.3, -0.3]);
        let a = action_function(&b, &boundary_measure(&b), 64).unwrap();
        for z in [DiskPoint::new(0.3, 0.2), DiskPoint::new(-0.9, 0.1), DiskPoint::ORIGIN] {
            assert!(a.eval(z).unwrap().abs() < 1e-13);
        }
        let c = cal1(&b, &boundary_measure(&b), GridSpec::new(16, 16), ActionOptions::default()).unwrap();
        assert!(c.value.abs() < 1e-13);
    }

    #[test]
    fn twist_action_closed_form() {
        let b = radial(vec![0.3, -0.6, 0.3]);
        let mu = boundary_measure(&b);
        let a = action_function(&b, &mu, 64).unwrap();
        for r in [0.0, 0.2, 0.5, 0.8, 1.0] {
            let z = DiskPoint::from_polar(r, 1.1);
            assert!((a.eval(z).unwrap() - 0.3 * (1.0 - r.powi(4))).abs() < 1e-12);
        }
        let c = cal1(&b, &mu, GridSpec::new(32, 16), ActionOptions::default()).unwrap();
        assert!((c.value - 0.2).abs() < 1e-12);
        assert!(c.delta < 1e-12);
    }

    #[test]
    fn identity_is_zero() {
        let b = MapBundle::identity();
        let c = cal1(&b, &BoundaryMeasure::uniform(vec![0.0]), GridSpec::new(8, 8), ActionOptions::default()).unwrap();
        assert_eq!(c.value, 0.0);
    }
}
