//! The invariant computed from the action function, the angle function and the Hamiltonian.

pub mod action;
pub mod angle;
pub mod hamiltonian;
pub mod montecarlo;
pub mod report;

pub use action::{action_function, cal1, pullback_difference, ActionFunction, ActionOptions, Cal1Estimate, LiouvilleForm};
pub use angle::{angle_function, birkhoff_angle, c_mu_tilde, PairAverage};
pub use hamiltonian::{cal3_field, cal3_tilde, Cal3Estimate, Cal3Options};
pub use montecarlo::{cal2_tilde, estimate_pairs, MonteCarloEstimate, PairSampler, Strategy};
pub use report::{compute_report, verify_link, Budgets, CalabiReport, Computation};
