//! Relative eigenvalue certificates for compressions of invertible,
//! indefinite symmetric matrices.
//!
//! Given a symmetric invertible `H` and a subspace `U`, the compression
//! `M = QᵀHQ` has eigenvalues that can be matched to eigenvalues of `H`
//! with relative error at most `η = ‖P_U − P‖`, where `P = H P_U H⁻¹` is the
//! oblique projection onto `H·U` along `(H⁻¹·U)^⊥`. This crate computes
//! all of those objects, produces checkable [`Certificate`]s and exposes the
//! gap-perturbation and angle machinery the certificates rest on.

pub mod angle;
pub mod certify;
mod error;
pub mod ext_real;
pub mod gap;
pub mod harness;
pub mod linalg;
pub mod mtx;
pub mod report;
pub mod selftest;
pub mod split;

pub use angle::{angle_bound, annular_residuals, graph_tangent, max_angle, AngleReport, GraphRotation};
pub use certify::{
    certify, certify_gap, certify_negative, match_indices, oracle_match, Certificate, EssentialModel,
    Match, OracleMatch, Verdict,
};
pub use error::{Error, Result};
pub use gap::{
    form_sandwich_check, gap_condition, guaranteed_interval, minimax_sample, perturbed_compare,
    relbound_check, GapConditionReport, GapWindow, MinimaxReport, PerturbationComparison,
    RelativeBoundParams, SandwichReport,
};
pub use harness::{gen_instance, run_batch, BatchSummary, InstanceSpec, SubspaceMode};
pub use linalg::{
    operator_norm, orthonormalize, spectral_projector, sym_eig, variational_values, OpenInterval,
    OrthonormalBasis, SpectralCut, SymmetricOperator, Tolerances,
};
pub use report::Report;
pub use split::{
    compress, diag_off_split, image_subspaces, oblique_projection, verify_factorization,
    CompressionSetup, FactorizationReport, ObliqueProjector, OperatorSplit,
};
