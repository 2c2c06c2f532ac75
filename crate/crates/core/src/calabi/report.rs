//! Runs the three computations side by side and checks the identities linking them.

use serde::{Deserialize, Serialize};

use super::action::{cal1, ActionOptions, LiouvilleForm};
use super::angle::c_mu_tilde;
use super::hamiltonian::{cal3_tilde, Cal3Options};
use super::montecarlo::{cal2_tilde, PairSampler, Strategy};
use crate::circle::{invariant_measure, rotation_number};
use crate::error::Result;
use crate::exec::Execution;
use crate::flow::MapBundle;
use crate::geometry::DiskPoint;
use crate::quadrature::GridSpec;

/// Fixed slack added to `3·stderr` in the identity checks; covers the
/// quadrature deltas and the `1/n` rotation-number certificate.
pub const LINK_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Computation {
    Cal1,
    Cal2,
    Cal3,
    Rho,
    VerifyLink,
    CMu,
}

impl Computation {
    pub const ALL: [Computation; 6] = [
        Computation::Cal1,
        Computation::Cal2,
        Computation::Cal3,
        Computation::Rho,
        Computation::VerifyLink,
        Computation::CMu,
    ];
}

/// Resolution and sampling settings for a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub pairs: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub grid: GridSpec,
    pub radial_nodes: usize,
    pub time_nodes: usize,
    pub rho_iterates: usize,
    pub measure_burn_in: usize,
    pub measure_samples: usize,
    pub tol_area: f64,
    /// Atoms of the empirical area measure used by `c-mu`.
    pub c_mu_points: usize,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            pairs: 20_000,
            seed: 0,
            strategy: Strategy::Uniform,
            grid: GridSpec::default(),
            radial_nodes: 64,
            time_nodes: 16,
            rho_iterates: 100_000,
            measure_burn_in: 1_000,
            measure_samples: 10_000,
            tol_area: 1e-6,
            c_mu_points: 400,
            exec: Execution::default(),
        }
    }
}

/// Values, their error bars, and the identity residuals for one map.
///
/// Fields that were not requested are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalabiReport {
    pub name: String,
    pub cal1: Option<f64>,
    pub cal1_budget: Option<f64>,
    pub cal2: Option<f64>,
    pub cal2_stderr: Option<f64>,
    pub cal3: Option<f64>,
    pub cal3_budget: Option<f64>,
    pub rho: Option<f64>,
    pub rho_halfwidth: Option<f64>,
    pub c_mu: Option<f64>,
    pub c_mu_stderr: Option<f64>,
    pub residual_link: Option<f64>,
    pub residual_23: Option<f64>,
    pub link_budget: Option<f64>,
    pub link_pass: Option<bool>,
    pub equality_pass: Option<bool>,
    pub pairs: Option<usize>,
    pub resampled: Option<usize>,
    pub seed: u64,
    pub grid_radial: usize,
    pub grid_angular: usize,
    pub time_nodes: usize,
    pub measure_atoms: Option<usize>,
    pub measure_period: Option<usize>,
    pub area_residual: Option<f64>,
    /// Normalization used for the Hamiltonian integral.
    pub cal3_convention: String,
}

impl CalabiReport {
    pub const CSV_COLUMNS: [&'static str; 19] = [
        "name",
        "cal1",
        "cal1_budget",
        "cal2",
        "cal2_stderr",
        "cal3",
        "cal3_budget",
        "rho",
        "rho_halfwidth",
        "c_mu",
        "c_mu_stderr",
        "residual_link",
        "residual_23",
        "link_budget",
        "link_pass",
        "equality_pass",
        "pairs",
        "seed",
        "area_residual",
    ];

    pub fn csv_header() -> String {
        Self::CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        fn f(x: Option<f64>) -> String {
            x.map(|v| format!("{v:e}")).unwrap_or_default()
        }
        fn b(x: Option<bool>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        let fields = [
            self.name.replace(',', ";"),
            f(self.cal1),
            f(self.cal1_budget),
            f(self.cal2),
            f(self.cal2_stderr),
            f(self.cal3),
            f(self.cal3_budget),
            f(self.rho),
            f(self.rho_halfwidth),
            f(self.c_mu),
            f(self.c_mu_stderr),
            f(self.residual_link),
            f(self.residual_23),
            f(self.link_budget),
            b(self.link_pass),
            b(self.equality_pass),
            self.pairs.map(|p| p.to_string()).unwrap_or_default(),
            self.seed.to_string(),
            f(self.area_residual),
        ];
        fields.join(",")
    }

    /// Both identities hold within budget.
    pub fn passed(&self) -> bool {
        self.link_pass.unwrap_or(false) && self.equality_pass.unwrap_or(false)
    }
}

/// Runs the requested computations.
pub fn compute_report(bundle: &MapBundle, selection: &[Computation], budgets: &Budgets) -> Result<CalabiReport> {
    let wants = |c: Computation| selection.contains(&c) || selection.contains(&Computation::VerifyLink);
    let mut rep = CalabiReport {
        name: bundle.name().to_string(),
        cal1: None,
        cal1_budget: None,
        cal2: None,
        cal2_stderr: None,
        cal3: None,
        cal3_budget: None,
        rho: None,
        rho_halfwidth: None,
        c_mu: None,
        c_mu_stderr: None,
        residual_link: None,
        residual_23: None,
        link_budget: None,
        link_pass: None,
        equality_pass: None,
        pairs: None,
        resampled: None,
        seed: budgets.seed,
        grid_radial: budgets.grid.radial,
        grid_angular: budgets.grid.angular,
        time_nodes: budgets.time_nodes,
        measure_atoms: None,
        measure_period: None,
        area_residual: None,
        cal3_convention: "2*int_0^1 int_D (H_t - H_t|boundary) omega dt".into(),
    };
    let lift = bundle.boundary_lift();
    if wants(Computation::Cal1) {
        let mu = invariant_measure(&lift, budgets.measure_burn_in, budgets.measure_samples, 0.0)?;
        let est = cal1(
            bundle,
            &mu,
            budgets.grid,
            ActionOptions {
                radial_nodes: budgets.radial_nodes,
                form: LiouvilleForm::Standard,
                tol_area: budgets.tol_area,
                exec: budgets.exec,
            },
        )?;
        rep.cal1 = Some(est.value);
        rep.cal1_budget = Some(est.delta);
        rep.area_residual = Some(est.area_residual);
        rep.measure_atoms = Some(mu.len());
        rep.measure_period = mu.period;
    }
    if wants(Computation::Cal2) {
        let sampler = PairSampler::new(budgets.pairs, budgets.seed).with_strategy(budgets.strategy);
        let est = cal2_tilde(bundle, &sampler, budgets.exec)?;
        rep.cal2 = Some(est.mean);
        rep.cal2_stderr = Some(est.stderr);
        rep.pairs = Some(est.samples);
        rep.resampled = Some(est.resampled);
    }
    if wants(Computation::Cal3) {
        let est = cal3_tilde(
            bundle,
            Cal3Options {
                grid: budgets.grid,
                time_nodes: budgets.time_nodes,
                exec: budgets.exec,
            },
        )?;
        rep.cal3 = Some(est.value);
        rep.cal3_budget = Some(est.delta);
    }
    if wants(Computation::Rho) {
        let est = rotation_number(&lift, budgets.rho_iterates, 0.0)?;
        rep.rho = Some(est.value.0);
        rep.rho_halfwidth = Some(est.rigorous_halfwidth);
    }
    if selection.contains(&Computation::CMu) {
        // empirical area measure from the same seeded stream as the pair sampler
        let n = budgets.c_mu_points.max(1);
        let pts: Vec<DiskPoint> = PairSampler::new(n, budgets.seed ^ 0x5eed)
            .pairs()
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        let w = vec![1.0 / n as f64; n];
        let est = c_mu_tilde(bundle, &pts, &w, budgets.exec)?;
        rep.c_mu = Some(est.value);
        rep.c_mu_stderr = Some(est.stderr);
    }
    if let (Some(c1), Some(c2), Some(c3), Some(rho), Some(se)) = (rep.cal1, rep.cal2, rep.cal3, rep.rho, rep.cal2_stderr) {
        let budget = 3.0 * se + LINK_SLACK;
        let link = (c2 - c1 - rho).abs();
        let eq = (c2 - c3).abs();
        rep.residual_link = Some(link);
        rep.residual_23 = Some(eq);
        rep.link_budget = Some(budget);
        rep.link_pass = Some(link <= budget);
        rep.equality_pass = Some(eq <= budget);
    }
    Ok(rep)
}

/// All three invariants, the rotation number, and both identity residuals.
pub fn verify_link(bundle: &MapBundle, budgets: &Budgets) -> Result<CalabiReport> {
    compute_report(bundle, &[Computation::VerifyLink], budgets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{PolynomialProfile, RadialField};
    use std::sync::Arc;

    fn radial(c: Vec<f64>) -> MapBundle {
        MapBundle::from_field(Arc::new(RadialField::new(Arc::new(PolynomialProfile::new(c))))).unwrap()
    }

    fn small() -> Budgets {
        Budgets {
            pairs: 4000,
            seed: 7,
            grid: GridSpec::new(32, 16),
            rho_iterates: 10_000,
            ..Budgets::default()
        }
    }

    #[test]
    fn twist_report() {
        let r = verify_link(&radial(vec![0.3, -0.6, 0.3]), &small()).unwrap();
        assert!((r.cal1.unwrap() - 0.2).abs() < 1e-10);
        assert!((r.cal3.unwrap() - 0.2).abs() < 1e-10);
        assert_eq!(r.rho.unwrap(), 0.0);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn csv_row_matches_header() {
        let r = compute_report(&radial(vec![0.1, -0.1]), &[Computation::Cal3], &small()).unwrap();
        assert_eq!(r.csv_row().split(',').count(), CalabiReport::CSV_COLUMNS.len());
        assert!(r.cal1.is_none() && r.link_pass.is_none());
    }
}
