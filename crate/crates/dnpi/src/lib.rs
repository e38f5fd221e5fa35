//! Direct nonparametric predictive inference (D-NPI) classification
//! trees.
//!
//! The pieces, bottom up:
//!
//! - [`npi`]: exact NPI lower/upper probability kernels for Bernoulli and
//!   multinomial future observations, in rational arithmetic.
//! - [`contingency`]: per-node attribute-versus-class tables, conditional
//!   class intervals and the category-to-class linkage.
//! - [`ci`]: the Correct Indication split criterion (binary and
//!   multinomial forms) plus a brute-force polytope oracle for checking
//!   the multinomial optimizer.
//! - [`entropy`]: information gain and gain ratio for the C4.5-style
//!   baseline.
//! - [`tree`]: D-NPI tree induction with its two-condition stop rule, the
//!   unpruned gain-ratio baseline, classification and serialization.
//! - [`data`]: CSV ingestion, modal imputation, equal-frequency
//!   discretization and gain-ratio binarization.
//! - [`eval`]: repeated k-fold cross-validation, confusion matrices and
//!   report rendering.

pub mod ci;
pub mod contingency;
pub mod data;
pub mod entropy;
pub mod eval;
pub mod interval;
pub mod npi;
pub mod tree;

pub use ci::CiScore;
pub use contingency::ContingencyView;
pub use data::Dataset;
pub use eval::{ConfusionMatrix, CvConfig, EvalReport};
pub use interval::ProbabilityInterval;
pub use tree::{Algorithm, BuildParams, DecisionTree};
