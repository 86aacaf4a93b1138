//! Exact and certified numerics for weighted circular potentials in several
//! complex variables.
//!
//! The crate builds superlogarithmic plurisubharmonic potentials from
//! spike-scheduled coefficient families, then interrogates them three ways:
//!
//! - [`construct`] generates the coefficient/scale families, assembles the
//!   potential `F = Σ u_m + v_m`, verifies its subharmonicity by certified
//!   sampling, and recovers Taylor coefficients through extended-precision
//!   circle averages.
//! - [`hypersurface`] composes analytic test curves into the truncated
//!   potential and measures tangency orders, including the distinguished
//!   coordinate-slice curves.
//! - [`obstruct`] certifies that every nonconstant analytic curve meets the
//!   potential at finite order: it normalizes a curve, locates the spike that
//!   dominates its leading behaviour, and emits a machine-checkable
//!   [`obstruct::ObstructionCertificate`].
//! - [`typecheck`] runs finite-type diagnostics on polynomial models:
//!   pluriharmonic splitting, lowest mixed degree, and monomial-curve contact
//!   bounds.
//!
//! Exactness policy: everything degree-indexed (coefficients, series,
//! certificates) lives in arbitrary-precision rationals over the Gaussian
//! field ([`arith::GaussianRational`]); floating point appears only in the
//! smooth-bump layer ([`smoothfn`]) and the sampling diagnostics, where
//! tolerances are explicit arguments.
//!
//! # Features
//!
//! `parallel` (default) fans the batch routines (`check_subharmonic`,
//! `certify_batch`) across a rayon pool. Disable it for a dependency-light
//! sequential build; the `*_seq` twins are always available and their outputs
//! are bit-identical to the parallel paths.

pub mod arith;
pub mod construct;
pub mod hypersurface;
pub mod obstruct;
pub mod series;
pub mod smoothfn;
pub mod typecheck;

mod dd;
mod exec;
mod quad;

pub use arith::{BigRational, GaussianRational};
pub use construct::{
    check_subharmonic, check_subharmonic_seq, gen_sequences, gen_spike_schedule, taylor_extract,
    verify_spike_conditions, SequenceFamily, SubharmonicReport, SurfaceModel,
};
pub use hypersurface::{curve_compose, tangency_order, xm_tangency_check, Curve};
pub use obstruct::{
    certify_batch, certify_batch_seq, normalize_curve, obstruction_certificate,
    random_normalized_curve, ObstructionCertificate,
};
pub use series::{TruncatedSeries, Valuation};
pub use smoothfn::{compute_constant, ConvexProfileSpec, CutoffSpec};
pub use typecheck::{dangelo_lower_bound, DangeloBound, ModelFunction, TypeBound};
