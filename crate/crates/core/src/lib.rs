//! Multivariate medial correlation.
//!
//! The coefficient compares, for each margin `X_i`, the propensity of `X_i`
//! to sit on the same side of its median as all of the remaining margins
//! (jointly below, or jointly above) against the propensity to sit on the
//! opposite side. Everything is driven by a single sufficient statistic: the
//! table of orthant probabilities `P(U_i <= 1/2 for all i in S)` over every
//! coordinate subset `S`.
//!
//! * [`copula`] evaluates copula models (product, comonotone,
//!   countermonotone, Gumbel, Marshall-Olkin and block products of these).
//! * [`orthant`] builds the orthant table and derives survival, reflected and
//!   exceedance probabilities from it by inclusion-exclusion.
//! * [`coefficients`] turns a table into a [`CoefficientsReport`].
//! * [`estimator`] does the same from data through rank pseudo-observations.
//! * [`sampler`] draws seeded Monte Carlo samples from every model.
//! * [`data_io`] reads CSV data and writes reports and sample batches.
//!
//! ```
//! use medialcorr::{build_orthant_table, coefficients_from_table, CopulaModel};
//!
//! let model: CopulaModel = "gumbel:d=3,delta=0.5".parse().unwrap();
//! let table = build_orthant_table(&model).unwrap();
//! let report = coefficients_from_table(&table).unwrap();
//! let expected = 2f64.powf(2.0 - 2f64.sqrt()) - 1.0;
//! assert!((report.beta - expected).abs() < 1e-12);
//! ```

pub mod closed_form;
pub mod coefficients;
pub mod concordance;
pub mod copula;
pub mod data_io;
pub mod error;
pub mod estimator;
pub mod orthant;
pub mod sampler;
pub mod subset;
pub mod summation;
pub mod validation;

pub use closed_form::{
    gumbel_beta_closed_form, minimum_attaining_model, mo_product_beta_closed_form, mo_product_model,
};
pub use coefficients::{
    beta_ij, beta_of_reflection, beta_representations, coefficients_from_table,
    BetaRepresentations, CoefficientsReport, ReportSource,
};
pub use concordance::{strong_concordance_check, ConcordanceReport, ConcordanceVerdict};
pub use copula::{axiom_check, AxiomReport, Copula, CopulaModel, Point, ReflectionMask};
pub use error::{Error, Result};
pub use estimator::{
    bootstrap_ci, empirical_coefficients, empirical_orthant_table, pseudo_observations,
    BootstrapIntervals, DataMatrix, PseudoObservations,
};
pub use orthant::{build_orthant_table, ExceedanceDistribution, OrthantTable};
pub use sampler::{sample, SampleBatch, Seed};
pub use subset::Subset;

/// Largest dimension accepted anywhere an orthant table is built (tables hold `2^d` entries).
pub const MAX_DIM: usize = 20;
