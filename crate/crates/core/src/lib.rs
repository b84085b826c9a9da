//! Multi-route evaluation of local and confluent Heun functions, the indices
//! of coincidence of the binomial, negative binomial and Poisson
//! distributions, and their order-2 Rényi and Tsallis entropies.
//!
//! Every quantity is reachable by at least two independent algorithms; the
//! [`verify`] module checks their agreement, and the binomial identities
//! behind the closed forms in exact arithmetic.

pub mod closed_forms;
pub mod coincidence;
pub mod error;
pub mod exact;
pub mod hypergeom;
mod poly;
mod precision;
pub mod quadrature;
pub mod series;
pub mod verify;

pub use coincidence::{EntropyKind, FMethod, GMethod};
pub use error::{Error, Result};
pub use exact::{ExactInteger, ExactRational};
pub use hypergeom::{Clausen3F2Params, Gauss2F1Params};
pub use series::{
    ConfluentHeunParams, EvalResult, GeneralHeunParams, SeriesDerivatives, SeriesOptions,
};
pub use verify::{RelationId, RelationReport};
