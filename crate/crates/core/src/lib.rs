//! Two-party entanglement in a one-dimensional p-wave superconducting fermion
//! chain whose hopping and pairing decay exponentially with distance.
//!
//! Everything reduces to a single primitive, the ground-state Majorana
//! correlator `G_x`, evaluated as a one-dimensional Brillouin-zone integral.
//! From it the crate builds two-site reduced density matrices, their
//! concurrence and tangle, block entanglement entropies, and logarithmic
//! critical scaling fits. The [`oracle`] module re-derives the same
//! quantities by exact diagonalization of a finite ring and is used to
//! validate every closed-form path.
//!
//! Module map:
//!
//! - [`model`]: couplings, dispersion, global gap, analytic phase boundaries.
//! - [`correlators`]: `G_x`, correlator tables, Toeplitz spin correlators.
//! - [`entanglement`]: `rho_d`, concurrence, truncation length, totals,
//!   monogamy checks.
//! - [`entropy`]: block entropy and central-charge fits.
//! - [`criticality`]: derivatives of `C_d` and logarithmic-divergence fits.
//! - [`oracle`]: finite-ring exact diagonalization and Wick reconstruction.

pub mod correlators;
pub mod criticality;
pub mod entanglement;
pub mod entropy;
mod error;
pub mod fit;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quadrature;

pub use correlators::{
    correlator_table, g_correlator, p_coefficients, CorrelatorTable, PCoefficients,
    QuadratureConfig,
};
pub use entanglement::{
    concurrence, entanglement_profile, two_site_state, wootters_concurrence,
    EntanglementProfile, TwoSiteState,
};
pub use error::{Error, Result};
pub use model::{ModelParams, PhaseBoundary};
