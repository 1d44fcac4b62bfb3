//! Compatible vector fields, first integrals, and integrability certificates
//! for one-dimensional time-dependent Hamiltonian systems H = p²/2 + V(q, t).
//!
//! The central objects are the dynamical field u = ∂t + p∂q − V_q∂p of such
//! a system and a second field v on extended phase space. When the pair
//! closes under the commutator — [u, v] lies in the span of u and v — the
//! two fields foliate extended phase space and the system acquires a first
//! integral that is constant along *both* fields. For fields reduced to the
//! form v = ∂q + C(q, p, t)∂p this closure condition collapses to a single
//! scalar equation, u(C) + C² + V_qq = 0, which this crate treats as the
//! defining residual throughout.
//!
//! The crate provides:
//!
//! - [`fields`]: the residual, commutator coefficients, reduction of general
//!   first-order fields, and the inverse construction C = −J_q/J_p from a
//!   known integral;
//! - [`families`]: five closed-form potential families with their compatible
//!   coefficients and (where available) explicit first integrals;
//! - [`numerics`]: the adaptive integrator, quadrature, and root-finding the
//!   constructions and checks rest on;
//! - [`verify`]: grid scans, conservation runs, reduction consistency, and
//!   inverse round-trips that certify the algebra numerically;
//! - [`funcat`]: the small catalog of closed-form coefficient functions the
//!   families are assembled from.

pub mod error;
pub mod families;
pub mod fields;
pub mod funcat;
pub mod jet;
pub mod numerics;
pub mod verify;

pub use error::{Error, Result};
pub use families::{
    abel_family, forced_oscillator, giacomini, quadratic, sarlet, sarlet_with_variant, solve_q,
    AbelFrozen, AbelSpec, Aux, FamilyInstance, FamilyLabel, RiccatiSpec, SarletVariant,
    TransformedState, SINGULAR_MARGIN,
};
pub use fields::{
    apply_u, basic_equation_residual, bracket_coeffs, compatible_from_invariant,
    reduce_general_field, BracketCoeffs, FieldDerivs, GeneralField, PhaseState, PotentialDerivs,
    PotentialSpec, ScalarField, DELTA_P,
};
pub use funcat::{FnKind, SpaceProfile, TimeFunction};
pub use numerics::{find_root, integrate, quad, AuxOde, IntegratorConfig, Trajectory};
pub use verify::{
    abel_characteristic_check, drift_check, inverse_roundtrip, residual_scan, riccati_consistency,
    sample_states, CharacteristicReport, CharacteristicSample, DriftReport, GridSpec,
    ResidualReport, RiccatiReport, RiccatiSample, RoundTripReport,
};
