//! Gauss–Legendre rules and product grids on the disk.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::geometry::DiskPoint;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule; `n` is clamped to at least 1.
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).expect("nonzero");
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = (b - a) / 2.0;
        let mid = (a + b) / 2.0;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Sorted, deduplicated panel edges of `[a, b]` including any interior breakpoints.
pub fn panel_edges(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut edges = vec![a, b];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    edges
}

/// Composite rule on `[a, b]`: `per_panel` Gauss nodes on every panel between breakpoints.
pub fn composite_rule(a: f64, b: f64, breakpoints: &[f64], per_panel: usize) -> Vec<(f64, f64)> {
    let rule = GaussRule::new(per_panel);
    panel_edges(a, b, breakpoints)
        .windows(2)
        .flat_map(|w| rule.on_interval(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

pub fn composite_integrate(
    a: f64,
    b: f64,
    breakpoints: &[f64],
    per_panel: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    composite_rule(a, b, breakpoints, per_panel)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

/// Resolution of a polar product grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Total radial Gauss nodes, shared out between the radial panels.
    pub radial: usize,
    /// Equispaced angular nodes.
    pub angular: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radial: 128,
            angular: 256,
        }
    }
}

impl GridSpec {
    pub fn new(radial: usize, angular: usize) -> Self {
        Self { radial, angular }
    }

    pub fn doubled(self) -> Self {
        Self {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
        }
    }

    pub fn halved(self) -> Self {
        Self {
            radial: (self.radial / 2).max(1),
            angular: (self.angular / 2).max(1),
        }
    }
}

/// Product rule for `∫_D F ω`: composite Gauss in `r`, midpoint-uniform in `θ`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    radial: Vec<(f64, f64)>,
    angles: Vec<f64>,
}

impl PolarGrid {
    pub fn new(spec: GridSpec, breakpoints: &[f64]) -> Self {
        let panels = panel_edges(0.0, 1.0, breakpoints).len() - 1;
        let per_panel = (spec.radial / panels).max(8);
        let m = spec.angular.max(1);
        Self {
            radial: composite_rule(0.0, 1.0, breakpoints, per_panel),
            angles: (0..m).map(|j| TAU * (j as f64 + 0.5) / m as f64).collect(),
        }
    }

    /// Radial nodes and their Gauss weights on `[0, 1]`.
    pub fn radial(&self) -> &[(f64, f64)] {
        &self.radial
    }

    /// Angles in radians.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.angles.len()
    }

    /// `ω`-weight attached to a node with radial weight `w` at radius `r`.
    pub fn area_weight(&self, r: f64, w: f64) -> f64 {
        r * w * (TAU / self.angles.len() as f64) / PI
    }

    pub fn point(&self, i: usize, j: usize) -> DiskPoint {
        DiskPoint::from_polar(self.radial[i].0, self.angles[j])
    }
}

/// Evaluates the trigonometric interpolant of equispaced samples.
///
/// `values[j]` is the sample at circle coordinate `offset + j/m` (turns).
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    offset: f64,
    coeffs: Vec<(f64, f64)>,
}

impl TrigInterpolant {
    pub fn new(values: &[f64], offset: f64) -> Self {
        let m = values.len();
        let kmax = m / 2;
        let coeffs = (0..=kmax)
            .map(|k| {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, &f) in values.iter().enumerate() {
                    let (s, c) = (TAU * (k * j) as f64 / m as f64).sin_cos();
                    a += f * c;
                    b += f * s;
                }
                let scale = if k == 0 || (m.is_multiple_of(2) && k == kmax) {
                    1.0
                } else {
                    2.0
                };
                (scale * a / m as f64, scale * b / m as f64)
            })
            .collect();
        Self { offset, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = x - self.offset;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let (s, c) = (TAU * k as f64 * y).sin_cos();
                a * c + b * s
            })
            .sum()
    }
}
