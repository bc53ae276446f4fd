//! Numerical construction and certification of Smale horseshoes near a
//! Shilnikov saddle-focus homoclinic orbit.
//!
//! The phase space is finite dimensional with coordinates `(x, y, z, v⁺, v⁻)`:
//! a focus pair `(x, y)` contracting at rate `alpha` and rotating at rate
//! `beta`, one expanding direction `z` at rate `gamma`, `N` extra unstable
//! modes `v⁺` and `M` truncated stable modes `v⁻`. Inside a neighborhood of
//! the saddle the flow is exactly linear; the return to the section is a
//! prescribed affine-plus-quadratic global map carrying a built-in homoclinic
//! connection. On top of that model the crate builds:
//!
//! * the local Poincaré map `P₀¹` with its flight time ([`local_dynamics`]),
//! * the global map `P₁⁰`, the section constraint and the full return map
//!   `P = P₁⁰ ∘ P₀¹` with analytic and finite-difference Jacobians
//!   ([`global_map`]),
//! * the family of fixed points of `P` with its leading-order asymptotics
//!   ([`fixed_points`]),
//! * slabs, cone-field certificates for the Conley–Moser conditions,
//!   itineraries, orbit shadowing for prescribed symbol words and the
//!   finite-depth conjugacy to the full shift on two symbols ([`horseshoe`]).

pub mod error;
pub mod fixed_points;
pub mod global_map;
pub mod horseshoe;
pub mod local_dynamics;
pub mod model;
pub mod symbols;

pub use error::{FixedPointError, FlightError, HorseshoeError, ModelError, StructuralError};
pub use fixed_points::{FixedPointRecord, LeadingOrderData, RescaledCoords};
pub use global_map::{PoincareResult, SectionFlags};
pub use horseshoe::{
    CantorPointCertificate, ConjugacyReport, ConleyMoserReport, Horseshoe, Slab, Verdict,
};
pub use local_dynamics::{FlightResult, Sigma0Point, Sigma1Point};
pub use model::{ModelSpec, StateVec, ValidationReport};
pub use symbols::SymbolWord;
