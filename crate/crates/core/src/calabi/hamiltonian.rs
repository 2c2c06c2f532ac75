//! The Hamiltonian form of the invariant, `2 ∫₀¹ ∫_D H_t ω dt`.

use serde::{Deserialize, Serialize};

use crate::error::{CalabiError, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::flow::{FlowPiece, MapBundle, SharedField};
use crate::geometry::DiskPoint;
use crate::quadrature::{GaussRule, GridSpec, PolarGrid};

pub const BOUNDARY_SAMPLES: usize = 64;
pub const TOL_BOUNDARY_CONSTANT: f64 = 1e-8;
pub const DEFAULT_TIME_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cal3Options {
    pub grid: GridSpec,
    /// Gauss nodes in time for each non-autonomous piece.
    pub time_nodes: usize,
    pub exec: Execution,
}

impl Default for Cal3Options {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            time_nodes: DEFAULT_TIME_NODES,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cal3Estimate {
    /// Value with doubled space and time resolution.
    pub value: f64,
    pub delta: f64,
}

/// Boundary value of `H` at one time, after checking it is constant on the circle.
fn boundary_level(piece: &FlowPiece, tau: f64, slot: usize, slots: usize) -> Result<f64> {
    let vals: Vec<f64> = (0..BOUNDARY_SAMPLES)
        .map(|k| piece.hamiltonian(tau, DiskPoint::on_circle(k as f64 / BOUNDARY_SAMPLES as f64)))
        .collect();
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo > TOL_BOUNDARY_CONSTANT {
        return Err(CalabiError::BoundaryNotConstant {
            time: (slot as f64 + tau) / slots as f64,
            variation: hi - lo,
        });
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

fn on_grid(bundle: &MapBundle, grid: GridSpec, time_nodes: usize, exec: Execution) -> Result<f64> {
    let polar = PolarGrid::new(grid, &bundle.radial_breakpoints());
    let rule = GaussRule::new(time_nodes);
    let slots = bundle.pieces().len();
    let mut total = 0.0;
    for (k, piece) in bundle.pieces().iter().enumerate() {
        let times: Vec<(f64, f64)> = if piece.field().is_autonomous() {
            vec![(0.5, 1.0)]
        } else {
            rule.on_interval(0.0, 1.0).collect()
        };
        for (tau, wt) in times {
            let level = boundary_level(piece, tau, k, slots)?;
            let rows = try_map_indexed(exec, polar.radial().len(), |i| -> Result<f64> {
                let (r, w) = polar.radial()[i];
                let s: f64 = polar
                    .angles()
                    .iter()
                    .map(|&th| piece.hamiltonian(tau, DiskPoint::from_polar(r, th)) - level)
                    .sum();
                Ok(polar.area_weight(r, w) * s)
            })?;
            total += wt * rows.iter().sum::<f64>();
        }
    }
    Ok(2.0 * total)
}

/// `2 ∫₀¹ ∫_D (H_t − H_t|∂D) ω dt` along the bundle's isotopy.
pub fn cal3_tilde(bundle: &MapBundle, options: Cal3Options) -> Result<Cal3Estimate> {
    let coarse = on_grid(bundle, options.grid, options.time_nodes, options.exec)?;
    let fine = on_grid(bundle, options.grid.doubled(), 2 * options.time_nodes, options.exec)?;
    Ok(Cal3Estimate {
        value: fine,
        delta: (fine - coarse).abs(),
    })
}

/// [`cal3_tilde`] for a single generator, without building its flow.
pub fn cal3_field(field: SharedField, options: Cal3Options) -> Result<Cal3Estimate> {
    let bundle = MapBundle::from_pieces(field.name(), vec![FlowPiece::with_steps(field, 1)]);
    cal3_tilde(&bundle, options)
}
