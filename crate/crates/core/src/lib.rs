//! Sensitivity analysis for unmeasured confounding.
//!
//! The crate is organised around the objects a sensitivity analysis needs:
//!
//! - [`scm`]: linear/threshold structural causal models, deterministic
//!   simulation and ground-truth estimands.
//! - [`estimators`]: naive and adjusted observational estimates (difference in
//!   means, OLS, Wald IV, the three-regression mediation system).
//! - [`bias_formulas`]: the discrete decomposition of confounding bias into a
//!   fully adjusted and a partially adjusted contrast.
//! - [`summary_sens`]: E-values and assumption-free bounds.
//! - [`ovb`]: omitted-variable bias on the partial-R² scale.
//! - [`copula_sens`]: Gaussian-copula ρ sensitivity for the ACE.
//! - [`mediation_sens`]: error-correlation sensitivity for NDE/NIE.
//! - [`registry`]: reviewed methods as data plus the six-step recommender.

pub mod bias_formulas;
pub mod copula_sens;
pub mod data;
pub mod error;
pub mod estimators;
pub mod mediation_sens;
pub mod normal;
pub mod ovb;
pub mod registry;
pub mod scm;
pub mod summary_sens;

pub use data::DataTable;
pub use error::{Error, Result};
pub use estimators::{MediationFit, OlsFit};
pub use scm::{EstimandKind, EstimandQuery, NodeDef, NodeKind, ScmSpec, TruthMethod, TruthResult};
