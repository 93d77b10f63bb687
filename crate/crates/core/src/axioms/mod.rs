//! Property checkers for the axioms of risk measures, with seeded search and replayable
//! counterexample witnesses.

mod closure;
mod range;
mod sampler;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use closure::{check_min_closure, ClosureReport, ClosureStatus};
pub use range::{estimate_range, RangeEstimate};

use crate::error::{input, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::measures::RiskFunctional;
use crate::prob::{fsd_dominates, is_comonotonic, same_law, ssd_dominates, FiniteSpace, Rv};
use crate::rng::trial_rng;

/// The axioms a risk functional may satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Monotonicity,
    CashAdditivity,
    CashSubadditivity,
    Convexity,
    QuasiConvexity,
    StarShapedness,
    QuasiStarShapedness,
    Normalization,
    QuasiNormalization,
    LawInvariance,
    FsdConsistency,
    SsdConsistency,
    ComonotonicQuasiConvexity,
    SupNormLipschitz,
}

impl Axiom {
    pub const ALL: [Axiom; 14] = [
        Axiom::Monotonicity,
        Axiom::CashAdditivity,
        Axiom::CashSubadditivity,
        Axiom::Convexity,
        Axiom::QuasiConvexity,
        Axiom::StarShapedness,
        Axiom::QuasiStarShapedness,
        Axiom::Normalization,
        Axiom::QuasiNormalization,
        Axiom::LawInvariance,
        Axiom::FsdConsistency,
        Axiom::SsdConsistency,
        Axiom::ComonotonicQuasiConvexity,
        Axiom::SupNormLipschitz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::Monotonicity => "monotonicity",
            Axiom::CashAdditivity => "cash_additivity",
            Axiom::CashSubadditivity => "cash_subadditivity",
            Axiom::Convexity => "convexity",
            Axiom::QuasiConvexity => "quasi_convexity",
            Axiom::StarShapedness => "star_shapedness",
            Axiom::QuasiStarShapedness => "quasi_star_shapedness",
            Axiom::Normalization => "normalization",
            Axiom::QuasiNormalization => "quasi_normalization",
            Axiom::LawInvariance => "law_invariance",
            Axiom::FsdConsistency => "fsd_consistency",
            Axiom::SsdConsistency => "ssd_consistency",
            Axiom::ComonotonicQuasiConvexity => "comonotonic_quasi_convexity",
            Axiom::SupNormLipschitz => "sup_norm_lipschitz",
        }
    }

    fn shape(self) -> Shape {
        match self {
            Axiom::Monotonicity
            | Axiom::LawInvariance
            | Axiom::FsdConsistency
            | Axiom::SsdConsistency
            | Axiom::SupNormLipschitz => Shape::Pair,
            Axiom::CashAdditivity | Axiom::CashSubadditivity => Shape::Shift,
            Axiom::Convexity | Axiom::QuasiConvexity | Axiom::ComonotonicQuasiConvexity => Shape::Mix,
            Axiom::StarShapedness | Axiom::QuasiStarShapedness => Shape::Star,
            Axiom::Normalization | Axiom::QuasiNormalization => Shape::Constant,
        }
    }

    /// Distributional axioms are only tested on uniform spaces, where permutations
    /// generate every law-preserving transform.
    fn needs_uniform(self) -> bool {
        matches!(self, Axiom::LawInvariance | Axiom::FsdConsistency | Axiom::SsdConsistency)
    }

    /// Stream salt. Axioms sharing a premise draw identical cases, so a strong form and its
    /// quasi form are tested on the same inputs.
    fn salt(self) -> u64 {
        let family = match self {
            Axiom::QuasiConvexity => Axiom::Convexity,
            Axiom::QuasiStarShapedness => Axiom::StarShapedness,
            Axiom::QuasiNormalization => Axiom::Normalization,
            a => a,
        };
        0x9E37_79B9_7F4A_7C15u64.wrapping_mul(family as u64 + 1)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axiom {
    type Err = RiskError;
    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| RiskError::Input(format!("unknown axiom {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Pair,
    Shift,
    Mix,
    Star,
    Constant,
}

/// One checker input.
///
/// For pair axioms `x` is the larger or dominating variable where an order applies:
/// monotonicity uses `x ≤ y`, the dominance axioms use `x ⪰ y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Case {
    Pair { x: Rv, y: Rv },
    Shift { x: Rv, m: f64 },
    Mix { x: Rv, y: Rv, lambda: f64 },
    Star { x: Rv, t: f64, lambda: f64 },
    Constant { x: Rv },
}

impl Case {
    fn shape(&self) -> Shape {
        match self {
            Case::Pair { .. } => Shape::Pair,
            Case::Shift { .. } => Shape::Shift,
            Case::Mix { .. } => Shape::Mix,
            Case::Star { .. } => Shape::Star,
            Case::Constant { .. } => Shape::Constant,
        }
    }

    fn space(&self) -> &FiniteSpace {
        match self {
            Case::Pair { x, .. }
            | Case::Shift { x, .. }
            | Case::Mix { x, .. }
            | Case::Star { x, .. }
            | Case::Constant { x } => x.space(),
        }
    }

    /// Checks that a supplied case satisfies the premise of the axiom.
    fn check_premise(&self, axiom: Axiom) -> Result<()> {
        if self.shape() != axiom.shape() {
            return input(format!("case shape does not fit axiom {axiom}"));
        }
        let ok = match (axiom, self) {
            (Axiom::Monotonicity, Case::Pair { x, y }) => x.le(y)?,
            (Axiom::LawInvariance, Case::Pair { x, y }) => same_law(x, y),
            (Axiom::FsdConsistency, Case::Pair { x, y }) => fsd_dominates(x, y),
            (Axiom::SsdConsistency, Case::Pair { x, y }) => ssd_dominates(x, y),
            (Axiom::SupNormLipschitz, Case::Pair { x, y }) => x.space() == y.space(),
            (Axiom::CashSubadditivity, Case::Shift { m, .. }) => *m >= 0.0,
            (Axiom::ComonotonicQuasiConvexity, Case::Mix { x, y, .. }) => is_comonotonic(x, y),
            (Axiom::Normalization | Axiom::QuasiNormalization, Case::Constant { x }) => x.is_constant(),
            _ => true,
        };
        let lambda_ok = match self {
            Case::Mix { lambda, .. } | Case::Star { lambda, .. } => (0.0..=1.0).contains(lambda),
            _ => true,
        };
        if ok && lambda_ok {
            Ok(())
        } else {
            input(format!("supplied case violates the premise of {axiom}"))
        }
    }
}

/// The inequality an axiom asserts between its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`.
    Le,
    /// `lhs = rhs`.
    Eq,
}

fn violated(lhs: ExtReal, rhs: ExtReal, rel: Relation, tol: f64) -> bool {
    match rel {
        Relation::Le => lhs.checked_sub(rhs).is_some_and(|d| d > ExtReal::Finite(tol)),
        Relation::Eq => lhs.distance(rhs) > tol,
    }
}

/// Both sides of the axiom's inequality on one case, or `None` when a side is `∞ - ∞`.
fn sides(axiom: Axiom, rho: &RiskFunctional, case: &Case) -> Option<(ExtReal, ExtReal, Relation)> {
    let r = |x: &Rv| rho.value(x);
    let combo = |a: ExtReal, b: ExtReal, l: f64| a.scale(l).checked_add(b.scale(1.0 - l));
    Some(match (axiom, case) {
        (Axiom::Monotonicity, Case::Pair { x, y }) => (r(x), r(y), Relation::Le),
        (Axiom::LawInvariance, Case::Pair { x, y }) => (r(x), r(y), Relation::Eq),
        (Axiom::FsdConsistency | Axiom::SsdConsistency, Case::Pair { x, y }) => (r(y), r(x), Relation::Le),
        (Axiom::SupNormLipschitz, Case::Pair { x, y }) => {
            let d = r(x).distance(r(y));
            (ExtReal::new(d), ExtReal::Finite(x.sup_distance(y).ok()?), Relation::Le)
        }
        (Axiom::CashAdditivity, Case::Shift { x, m }) => (r(&x.add_const(*m)), r(x).shift(*m), Relation::Eq),
        (Axiom::CashSubadditivity, Case::Shift { x, m }) => (r(&x.add_const(*m)), r(x).shift(*m), Relation::Le),
        (Axiom::Convexity, Case::Mix { x, y, lambda }) => {
            (r(&x.mix(y, *lambda).ok()?), combo(r(x), r(y), *lambda)?, Relation::Le)
        }
        (Axiom::QuasiConvexity | Axiom::ComonotonicQuasiConvexity, Case::Mix { x, y, lambda }) => {
            (r(&x.mix(y, *lambda).ok()?), r(x).max(r(y)), Relation::Le)
        }
        (Axiom::StarShapedness, Case::Star { x, lambda, .. }) => {
            let zero = Rv::constant(x.space(), 0.0);
            (r(&x.scale(*lambda)), combo(r(x), r(&zero), *lambda)?, Relation::Le)
        }
        (Axiom::QuasiStarShapedness, Case::Star { x, t, lambda }) => {
            let c = Rv::constant(x.space(), *t);
            let mixed = x.map(|v| lambda * v + (1.0 - lambda) * t);
            (r(&mixed), r(x).max(r(&c)), Relation::Le)
        }
        (Axiom::Normalization | Axiom::QuasiNormalization, Case::Constant { x }) => {
            (r(x), ExtReal::Finite(x.values()[0]), Relation::Eq)
        }
        _ => return None,
    })
}

/// Configuration of a checker run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckConfig {
    pub seed: u64,
    pub trials: usize,
    pub space_sizes: Vec<usize>,
    pub value_range: (f64, f64),
    pub lambda_grid: Vec<f64>,
    pub m_grid: Vec<f64>,
    pub tolerance: f64,
    /// Restricts random spaces to uniform ones.
    pub uniform_only: bool,
    /// Explicit cases evaluated before the random trials, in order.
    #[serde(default)]
    pub cases: Vec<Case>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            trials: 1000,
            space_sizes: vec![2, 3, 4, 5, 6],
            value_range: (-5.0, 5.0),
            lambda_grid: vec![0.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75, 0.9, 1.0],
            m_grid: vec![0.0, 0.1, 0.5, 1.0, 2.0, 5.0],
            tolerance: 1e-9,
            uniform_only: false,
            cases: Vec::new(),
        }
    }
}

impl CheckConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_case(mut self, case: Case) -> Self {
        self.cases.push(case);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.value_range;
        if self.trials == 0 {
            return input("trials must be positive");
        }
        if self.space_sizes.is_empty() || self.space_sizes.contains(&0) {
            return input("space sizes must be nonempty and positive");
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return input("value range must be a nonempty finite interval");
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return input("λ grid must be a nonempty subset of [0, 1]");
        }
        if self.m_grid.is_empty() || self.m_grid.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return input("m grid must be a nonempty subset of [0, ∞)");
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return input("tolerance must be positive");
        }
        Ok(())
    }
}

/// A violating input together with both sides of the violated relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub axiom: Axiom,
    pub trial: usize,
    pub case: Case,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub relation: Relation,
}

impl Witness {
    /// Re-evaluates `rho` on the stored inputs; true when the violation reproduces.
    pub fn replay(&self, rho: &RiskFunctional, tolerance: f64) -> bool {
        sides(self.axiom, rho, &self.case).is_some_and(|(l, r, rel)| violated(l, r, rel, tolerance))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of a checker run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub axiom: Axiom,
    pub measure: String,
    pub verdict: Verdict,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    pub range: Option<RangeEstimate>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Runs the axiom's sampler and reports the first violation in trial order.
///
/// Trials are evaluated in parallel; the reported witness does not depend on the worker count.
pub fn check_axiom(axiom: Axiom, rho: &RiskFunctional, cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let domain = rho.domain();
    if let Some(d) = domain {
        if axiom.needs_uniform() && !d.is_uniform() {
            return Err(RiskError::Precondition(format!("{axiom} is only checked on uniform spaces")));
        }
    }
    for case in &cfg.cases {
        case.check_premise(axiom)?;
        if let Some(d) = domain {
            if case.space() != d {
                return Err(RiskError::SpaceMismatch("supplied case lies outside the functional's domain".into()));
            }
        }
    }

    let (range, random_cases): (Option<RangeEstimate>, Option<Vec<Case>>) = match axiom {
        Axiom::Normalization | Axiom::QuasiNormalization => {
            let est = estimate_range(rho, cfg)?;
            let consts = sampler::constant_cases(axiom, cfg, domain, &est);
            (Some(est), Some(consts))
        }
        _ => (None, None),
    };
    let seeded = cfg.cases.len();
    let total = seeded + random_cases.as_ref().map_or(cfg.trials, Vec::len);

    let case_at = |i: usize| -> Case {
        if i < seeded {
            cfg.cases[i].clone()
        } else if let Some(cs) = &random_cases {
            cs[i - seeded].clone()
        } else {
            let mut rng = trial_rng(cfg.seed ^ axiom.salt(), (i - seeded) as u64);
            sampler::sample_case(axiom, cfg, domain, &mut rng, i - seeded)
        }
    };
    let evaluate = |i: usize| -> Option<Witness> {
        let case = case_at(i);
        let (lhs, rhs, relation) = sides(axiom, rho, &case)?;
        violated(lhs, rhs, relation, cfg.tolerance).then_some(Witness { axiom, trial: i, case, lhs, rhs, relation })
    };
    let first = (0..total).into_par_iter().find_first(|i| evaluate(*i).is_some());
    let witness = first.and_then(evaluate);
    Ok(CheckReport {
        axiom,
        measure: rho.name().to_string(),
        verdict: if witness.is_some() { Verdict::Fail } else { Verdict::Pass },
        trials: witness.as_ref().map_or(total, |w| w.trial + 1),
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        witness,
        range,
    })
}
