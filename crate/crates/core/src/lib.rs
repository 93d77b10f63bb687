//! Cash-subadditive and quasi-convex risk measures on finite probability spaces.
//!
//! The crate evaluates quantile-based functionals (VaR, ES, ΛVaR), insured-loss and
//! certainty-equivalent functionals, and eligible-asset capital requirements, and
//! checks algebraic properties of any [`RiskFunctional`] by seeded randomized trials.

pub mod axioms;
pub mod envelopes;
pub mod error;
pub mod ext_real;
pub mod infconv;
pub mod measures;
pub mod portfolio;
pub mod prob;
pub mod replicate;
pub mod rng;

pub use axioms::{check_axiom, Axiom, CheckConfig, CheckReport, Verdict, Witness};
pub use error::{Result, RiskError};
pub use ext_real::ExtReal;
pub use measures::{LambdaFn, LambdaMode, RiskFunctional};
pub use prob::{FiniteSpace, ProbabilityVector, QuantileCurve, Rv};
