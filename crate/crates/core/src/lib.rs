//! Computational dynamics of the backward shift on weighted `ℓᵖ` spaces.
//!
//! - [`space`] and [`vector`]: weight sequences, spaces, finitely supported
//!   vectors.
//! - [`shift`]: `B`, `S`, polynomials in `B`, the adjoint of `B`.
//! - [`criteria`]: finite-horizon checks of the weight characterizations of
//!   (`Γ`-)hyper/supercyclicity, and witness extraction from orbits.
//! - [`constructor`]: the inductive construction of an approximate
//!   `Γ`-supercyclic vector with per-target error certificates.
//! - [`orbit`]: orbit traces, return sets, limit points, weak limits.
//! - [`cyclicity`]: certification of cyclic vectors by polynomials in `B`.

pub mod constructor;
pub mod criteria;
pub mod cyclicity;
mod dyadic;
pub mod error;
pub mod orbit;
pub mod shift;
pub mod space;
pub mod vector;

pub use constructor::{
    build_supercyclic, default_dense_targets, evaluate_conditions, k_constant, validate_witnesses,
    ConstructionCert, TargetSet, WitnessSchedule,
};
pub use criteria::{
    check_bilateral_hypercyclic, check_bilateral_supercyclic, check_gamma_supercyclic,
    check_unilateral_hypercyclic, extract_witnesses, DeltaSchedule, GammaInterval, GammaSet,
    Status, Verdict, Witness,
};
pub use cyclicity::{
    approximate_e0_from, certify_cyclic, projective_limit_point_cyclic, ratio_constant,
    CyclicityCert, SearchBudget,
};
pub use error::{Error, Result};
pub use orbit::{
    adjoint_orbit_norms, bounded_orbit_criterion, detect_limit_points, return_set, trace_orbit,
    weak_limit_check, Ball, OrbitTrace,
};
pub use shift::{adjoint_forward, backward, forward, iterate, iterate_forward, poly_apply, Polynomial};
pub use space::{Mode, SpaceCtx, WeightFamily, WeightSeq};
pub use vector::{SparseVec, VecEntries};

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact evaluation of `P(B)x`; see [`shift::poly_apply`] for the rounded one.
pub fn poly_apply_exact(poly: &Polynomial, x: &SparseVec) -> SparseVec {
    dyadic::poly_apply_exact(poly, x)
}
