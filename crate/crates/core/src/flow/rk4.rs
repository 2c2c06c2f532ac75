//! Classical fourth-order integration of a single flow piece.

use std::f64::consts::{PI, TAU};

use super::field::{gradient_jacobian_of, gradient_of, HamiltonianField};
use crate::error::{CalabiError, Result};
use crate::geometry::{DiskPoint, Jacobian2};

pub const DEFAULT_STEPS: usize = 256;
pub const MAX_STEPS: usize = 1 << 16;
pub const TOL_ODE: f64 = 1e-8;

/// A field run forward, or backward as `−H(1 − τ)` to generate the inverse isotopy.
#[derive(Clone, Copy)]
pub struct Oriented<'a> {
    pub field: &'a dyn HamiltonianField,
    pub reversed: bool,
}

impl Oriented<'_> {
    fn time(&self, tau: f64) -> f64 {
        if self.reversed {
            1.0 - tau
        } else {
            tau
        }
    }

    fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }

    pub fn velocity(&self, tau: f64, u: f64, v: f64) -> [f64; 2] {
        let [hu, hv] = gradient_of(self.field, self.time(tau), DiskPoint::new(u, v));
        let k = self.sign() * PI;
        [k * hv, -k * hu]
    }

    /// Velocity and its spatial derivative `[[∂u X₁, ∂v X₁], [∂u X₂, ∂v X₂]]`.
    fn velocity_jet(&self, tau: f64, u: f64, v: f64) -> ([f64; 2], [f64; 4]) {
        let z = DiskPoint::new(u, v);
        let t = self.time(tau);
        let k = self.sign() * PI;
        let (g, dg) = match self.field.jet(t, z) {
            Some(j) => (j.gradient(), [j.duu, j.duv, j.duv, j.dvv]),
            None => (gradient_of(self.field, t, z), gradient_jacobian_of(self.field, t, z)),
        };
        let [hu, hv] = g;
        let [huu, huv, hvu, hvv] = dg;
        ([k * hv, -k * hu], [k * hvu, k * hvv, -k * huu, -k * huv])
    }

    /// Counterclockwise speed, in turns, of the boundary point at circle coordinate `x`.
    pub fn boundary_rate(&self, tau: f64, x: f64) -> f64 {
        let (s, c) = (TAU * x).sin_cos();
        let [xu, xv] = self.velocity(tau, c, s);
        (c * xv - s * xu) / TAU
    }
}

fn project(u: f64, v: f64) -> Result<(f64, f64)> {
    let p = DiskPoint::new(u, v).clamp_to_disk()?;
    Ok((p.u, p.v))
}

fn step_count(tau_end: f64, steps: usize) -> usize {
    ((tau_end * steps as f64).ceil() as usize).max(1)
}

/// `f_τ(z)` by `ceil(τ·steps)` uniform steps.
pub fn advance(f: Oriented, z: DiskPoint, tau_end: f64, steps: usize) -> Result<DiskPoint> {
    if tau_end <= 0.0 {
        return Ok(z);
    }
    let n = step_count(tau_end, steps);
    let h = tau_end / n as f64;
    let (mut u, mut v) = (z.u, z.v);
    for i in 0..n {
        (u, v) = rk4_step(f, i as f64 * h, h, u, v);
        (u, v) = project(u, v)?;
    }
    Ok(DiskPoint::new(u, v))
}

fn rk4_step(f: Oriented, t: f64, h: f64, u: f64, v: f64) -> (f64, f64) {
    let k1 = f.velocity(t, u, v);
    let k2 = f.velocity(t + h / 2.0, u + h / 2.0 * k1[0], v + h / 2.0 * k1[1]);
    let k3 = f.velocity(t + h / 2.0, u + h / 2.0 * k2[0], v + h / 2.0 * k2[1]);
    let k4 = f.velocity(t + h, u + h * k3[0], v + h * k3[1]);
    (
        u + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        v + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    )
}

/// Point and Jacobian, integrating the variational equation `J′ = DX · J` alongside.
pub fn advance_with_jacobian(
    f: Oriented,
    z: DiskPoint,
    tau_end: f64,
    steps: usize,
) -> Result<(DiskPoint, Jacobian2)> {
    if tau_end <= 0.0 {
        return Ok((z, Jacobian2::IDENTITY));
    }
    let n = step_count(tau_end, steps);
    let h = tau_end / n as f64;
    let mut y = [z.u, z.v, 1.0, 0.0, 0.0, 1.0];
    let rhs = |t: f64, y: &[f64; 6]| -> [f64; 6] {
        let (x, d) = f.velocity_jet(t, y[0], y[1]);
        // J = [[y2, y3], [y4, y5]]
        [
            x[0],
            x[1],
            d[0] * y[2] + d[1] * y[4],
            d[0] * y[3] + d[1] * y[5],
            d[2] * y[2] + d[3] * y[4],
            d[2] * y[3] + d[3] * y[5],
        ]
    };
    let axpy = |y: &[f64; 6], a: f64, k: &[f64; 6]| -> [f64; 6] {
        std::array::from_fn(|i| y[i] + a * k[i])
    };
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + h / 2.0, &axpy(&y, h / 2.0, &k1));
        let k3 = rhs(t + h / 2.0, &axpy(&y, h / 2.0, &k2));
        let k4 = rhs(t + h, &axpy(&y, h, &k3));
        for j in 0..6 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        (y[0], y[1]) = project(y[0], y[1])?;
    }
    Ok((
        DiskPoint::new(y[0], y[1]),
        Jacobian2::new(y[2], y[3], y[4], y[5]),
    ))
}

/// Positions of two points after each of `n` uniform steps over the whole piece, start included.
pub fn paired_trajectory(
    f: Oriented,
    x: DiskPoint,
    y: DiskPoint,
    n: usize,
) -> Result<Vec<(DiskPoint, DiskPoint)>> {
    let h = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let (mut a, mut b) = ((x.u, x.v), (y.u, y.v));
    out.push((x, y));
    for i in 0..n {
        let t = i as f64 * h;
        a = rk4_step(f, t, h, a.0, a.1);
        a = project(a.0, a.1)?;
        b = rk4_step(f, t, h, b.0, b.1);
        b = project(b.0, b.1)?;
        out.push((DiskPoint::new(a.0, a.1), DiskPoint::new(b.0, b.1)));
    }
    Ok(out)
}

/// Lifted boundary motion: integrates the tangential speed on the unit circle.
pub fn advance_boundary(f: Oriented, x: f64, tau_end: f64, steps: usize) -> Result<f64> {
    if tau_end <= 0.0 {
        return Ok(x);
    }
    let n = step_count(tau_end, steps);
    let h = tau_end / n as f64;
    let mut x = x;
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = f.boundary_rate(t, x);
        let k2 = f.boundary_rate(t + h / 2.0, x + h / 2.0 * k1);
        let k3 = f.boundary_rate(t + h / 2.0, x + h / 2.0 * k2);
        let k4 = f.boundary_rate(t + h, x + h * k3);
        let dx = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if dx.abs() >= 0.25 {
            return Err(CalabiError::StepTooCoarse(format!(
                "boundary moved {dx:.3} turns in one step"
            )));
        }
        x += dx;
    }
    Ok(x)
}

fn probe_points() -> Vec<DiskPoint> {
    let mut pts = vec![DiskPoint::ORIGIN];
    for &r in &[0.05, 0.2, 0.45, 0.7, 0.9, 1.0] {
        for &a in &[0.0, 0.29, 0.58, 0.83] {
            pts.push(DiskPoint::from_polar(r, TAU * (a + r)));
        }
    }
    pts
}

/// Smallest power-of-two multiple of [`DEFAULT_STEPS`] whose time-1 map agrees
/// with the doubled resolution within [`TOL_ODE`] on a fixed probe set.
pub fn calibrate_steps(f: Oriented) -> Result<usize> {
    let probes = probe_points();
    let run = |n: usize| -> Option<Vec<DiskPoint>> {
        probes.iter().map(|&z| advance(f, z, 1.0, n).ok()).collect()
    };
    let mut n = DEFAULT_STEPS;
    let mut coarse = run(n);
    while 2 * n <= MAX_STEPS {
        let fine = run(2 * n);
        if let (Some(c), Some(fi)) = (&coarse, &fine) {
            let diff = c
                .iter()
                .zip(fi)
                .map(|(a, b)| a.distance(*b))
                .fold(0.0, f64::max);
            if diff < TOL_ODE {
                return Ok(n);
            }
        }
        n *= 2;
        coarse = fine;
    }
    Err(CalabiError::StepTooCoarse(format!(
        "no convergence of {} within {MAX_STEPS} steps",
        f.field.name()
    )))
}
