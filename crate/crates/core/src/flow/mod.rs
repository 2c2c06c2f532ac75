//! Hamiltonian flows, their Jacobians and concatenated isotopies.

pub mod bundle;
pub mod field;
pub mod rk4;

pub use bundle::{circle_pair_winding, FlowPiece, MapBundle};
pub use field::{
    hamiltonian_vector_field, time_scaled, FnField, HamiltonianField, Jet2, PolynomialProfile,
    RadialField, RadialProfile, SharedField, TimeScaledField,
};
