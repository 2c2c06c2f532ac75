//! Angle functions of isotopies and their averages.

use serde::{Deserialize, Serialize};

use crate::error::{CalabiError, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::flow::MapBundle;
use crate::geometry::{DiskPoint, Turns};

/// Closest two points may be for their chord to be tracked.
pub const MIN_PAIR_SEPARATION: f64 = 1e-9;

/// Winding in turns of `f_t(x) − f_t(y)` along the bundle's isotopy.
pub fn angle_function(bundle: &MapBundle, x: DiskPoint, y: DiskPoint) -> Result<Turns> {
    let sep = x.distance(y);
    if sep < MIN_PAIR_SEPARATION {
        return Err(CalabiError::InvalidParameter(format!(
            "points {sep:e} apart; the angle function is only evaluated off the diagonal"
        )));
    }
    bundle.chord_winding(x, y)
}

/// `(1/n) Ang_{Iⁿ}(x, y)`, summed as the cocycle `Σ_{k<n} Ang_I(fᵏx, fᵏy)`.
pub fn birkhoff_angle(bundle: &MapBundle, x: DiskPoint, y: DiskPoint, n: usize) -> Result<Turns> {
    let n = n.max(1);
    let (mut a, mut b) = (x, y);
    let mut total = 0.0;
    for k in 0..n {
        let sep = a.distance(b);
        if sep < MIN_PAIR_SEPARATION {
            return Err(CalabiError::OrbitCollision {
                iterate: k,
                separation: sep,
            });
        }
        let (w, fa, fb) = bundle.chord_winding_with_images(a, b)?;
        total += w.0;
        a = fa;
        b = fb;
    }
    Ok(Turns(total / n as f64))
}

/// A double average over a finite measure together with a sampling error proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairAverage {
    pub value: f64,
    /// Standard deviation of the row means divided by `√(atoms)`.
    pub stderr: f64,
    pub pairs: usize,
    pub skipped: usize,
}

/// `∫∫ Ang dμ dμ` over distinct atoms, renormalized by the off-diagonal mass.
///
/// Coincident atoms (closer than [`MIN_PAIR_SEPARATION`]) are skipped.
pub fn c_mu_tilde(
    bundle: &MapBundle,
    points: &[DiskPoint],
    weights: &[f64],
    exec: Execution,
) -> Result<PairAverage> {
    let n = points.len();
    if n != weights.len() {
        return Err(CalabiError::InvalidParameter(
            "points and weights differ in length".into(),
        ));
    }
    // Ang(x, y) = Ang(y, x): the chord only changes sign
    let rows = try_map_indexed(exec, n, |i| -> Result<(f64, f64, usize, usize)> {
        let (mut sum, mut mass, mut used, mut skipped) = (0.0, 0.0, 0, 0);
        for j in (i + 1)..n {
            if points[i].distance(points[j]) < MIN_PAIR_SEPARATION {
                skipped += 1;
                continue;
            }
            let w = weights[i] * weights[j];
            sum += w * angle_function(bundle, points[i], points[j])?.0;
            mass += w;
            used += 1;
        }
        Ok((sum, mass, used, skipped))
    })?;
    let mass: f64 = rows.iter().map(|r| r.1).sum();
    let pairs = rows.iter().map(|r| r.2).sum();
    let skipped = rows.iter().map(|r| r.3).sum();
    if mass == 0.0 {
        return Ok(PairAverage {
            value: 0.0,
            stderr: 0.0,
            pairs,
            skipped,
        });
    }
    let value = rows.iter().map(|r| r.0).sum::<f64>() / mass;
    let means: Vec<f64> = rows
        .iter()
        .filter(|r| r.1 > 0.0)
        .map(|r| r.0 / r.1)
        .collect();
    let k = means.len() as f64;
    let stderr = if k > 1.0 {
        let m = means.iter().sum::<f64>() / k;
        (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() / k.sqrt()
    } else {
        0.0
    };
    Ok(PairAverage {
        value,
        stderr,
        pairs,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{PolynomialProfile, RadialField};
    use std::sync::Arc;

    fn radial(c: Vec<f64>) -> MapBundle {
        MapBundle::from_field(Arc::new(RadialField::new(Arc::new(PolynomialProfile::new(c))))).unwrap()
    }

    #[test]
    fn rotation_every_chord_turns_rigidly() {
        let b = radial(vec![0.37, -0.37]);
        for (x, y) in [
            (DiskPoint::new(0.1, 0.2), DiskPoint::new(-0.5, 0.3)),
            (DiskPoint::new(1.0, 0.0), DiskPoint::new(0.0, -1.0)),
        ] {
            assert!((angle_function(&b, x, y).unwrap().0 - 0.37).abs() < 1e-13);
            assert!((birkhoff_angle(&b, x, y, 10).unwrap().0 - 0.37).abs() < 1e-13);
        }
        let id = MapBundle::identity();
        assert_eq!(angle_function(&id, DiskPoint::new(0.1, 0.0), DiskPoint::ORIGIN).unwrap().0, 0.0);
        assert_eq!(birkhoff_angle(&id, DiskPoint::new(0.1, 0.0), DiskPoint::ORIGIN, 7).unwrap().0, 0.0);
    }

    #[test]
    fn twist_invariant_circles() {
        let b = radial(vec![0.3, -0.6, 0.3]);
        let y = DiskPoint::new(0.5, 0.0);
        assert!((birkhoff_angle(&b, DiskPoint::ORIGIN, y, 20).unwrap().0 - 0.45).abs() < 1e-13);
        // equally spaced atoms on one circle: every chord turns with the circle
        let r: f64 = 0.6;
        let pts: Vec<_> = (0..12).map(|k| DiskPoint::from_polar(r, k as f64 * std::f64::consts::FRAC_PI_6)).collect();
        let w = vec![1.0 / 12.0; 12];
        let c = c_mu_tilde(&b, &pts, &w, Execution::Sequential).unwrap();
        assert!((c.value - 0.6 * (1.0 - r * r)).abs() < 1e-13);
        let single = c_mu_tilde(&b, &pts[..1], &[1.0], Execution::Sequential).unwrap();
        assert_eq!(single.value, 0.0);
        assert_eq!(single.pairs, 0);
    }

    #[test]
    fn collision_and_diagonal_are_rejected() {
        let b = radial(vec![0.3, -0.6, 0.3]);
        let z = DiskPoint::new(0.2, 0.2);
        assert!(matches!(angle_function(&b, z, z), Err(CalabiError::InvalidParameter(_))));
        assert!(matches!(
            birkhoff_angle(&b, z, DiskPoint::new(0.2, 0.2 + 1e-10), 3),
            Err(CalabiError::OrbitCollision { .. })
        ));
    }
}
