//! Finite probability spaces, random variables, quantiles, rearrangements and
//! stochastic dominance tests.

mod dist;
mod scenarios;
mod space;

pub use dist::{
    comonotone_rearrangement, ess_sup, fsd_dominates, is_comonotonic, merged_breakpoints, quantile, same_law,
    ssd_dominates, ssd_dominates_with, QuantileCurve, SsdMode, VALUE_TOL,
};
pub use scenarios::ScenarioTable;
pub use space::{FiniteSpace, ProbabilityVector, Rv, PROB_TOL};
