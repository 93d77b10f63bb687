//! Insurance-contract functionals `E_Q[f(X)]` and `E_Q[X - f(X)]`.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::{RiskFunctional, ScalarFn};
use crate::axioms::Axiom;
use crate::error::{input, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::prob::{FiniteSpace, ProbabilityVector, Rv};

/// Which party's position is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `E_Q[f(X)]`.
    Insurer,
    /// `E_Q[X - f(X)]`.
    Policyholder,
}

/// A pricing or belief measure on the outcomes of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QSpec {
    /// The space's own probabilities.
    Reference,
    /// `Q_i ∝ p_i exp(k·i/(n-1))`, tilting mass toward later outcomes when `k > 0`.
    Tilt { k: f64 },
    /// Explicit weights; the measure is then tied to one space.
    Fixed { weights: ProbabilityVector },
}

impl QSpec {
    pub(crate) fn weights<'a>(&'a self, x: &'a Rv) -> Cow<'a, [f64]> {
        match self {
            QSpec::Reference => Cow::Borrowed(x.probs()),
            QSpec::Tilt { k } => {
                let n = x.len();
                let denom = (n.max(2) - 1) as f64;
                let raw: Vec<f64> =
                    x.probs().iter().enumerate().map(|(i, p)| p * (k * i as f64 / denom).exp()).collect();
                let total: f64 = raw.iter().sum();
                Cow::Owned(raw.into_iter().map(|w| w / total).collect())
            }
            QSpec::Fixed { weights } => Cow::Borrowed(weights.weights()),
        }
    }

    pub(crate) fn validate_for(&self, space: Option<&FiniteSpace>) -> Result<()> {
        match self {
            QSpec::Tilt { k } if !k.is_finite() => input("tilt parameter must be finite"),
            QSpec::Fixed { weights } => match space {
                Some(s) if s.len() == weights.len() => Ok(()),
                Some(s) => Err(RiskError::SpaceMismatch(format!(
                    "probability vector of length {} on a space with {} outcomes",
                    weights.len(),
                    s.len()
                ))),
                None => input("a fixed probability vector needs the space it lives on"),
            },
            _ => Ok(()),
        }
    }

    pub(crate) fn expectation(&self, x: &Rv, g: impl Fn(f64) -> f64) -> f64 {
        self.weights(x).iter().zip(x.values()).map(|(q, v)| q * g(*v)).sum()
    }
}

fn side_value(x: &Rv, f: &ScalarFn, side: Side, q: &QSpec) -> f64 {
    match side {
        Side::Insurer => q.expectation(x, |v| f.eval(v)),
        Side::Policyholder => q.expectation(x, |v| v - f.eval(v)),
    }
}

/// Evaluates one contract position, validating the payoff on the support of `x`.
pub fn transformed_loss_value(x: &Rv, f: &ScalarFn, side: Side, q: &QSpec) -> Result<f64> {
    f.validate_payoff_on(x.values())?;
    q.validate_for(Some(x.space()))?;
    Ok(side_value(x, f, side, q))
}

/// The contract functional. The payoff shape is validated globally; a fixed `Q` needs `space`.
pub fn expected_transformed_loss(
    f: ScalarFn,
    side: Side,
    q: QSpec,
    space: Option<&FiniteSpace>,
) -> Result<RiskFunctional> {
    f.validate_payoff()?;
    q.validate_for(space)?;
    let side_name = match side {
        Side::Insurer => "insurer",
        Side::Policyholder => "policyholder",
    };
    let name = format!("transformed_loss:{side_name}:{}", serde_json::to_string(&f).unwrap());
    let fixed = matches!(q, QSpec::Fixed { .. });
    let claims = [Axiom::Monotonicity, Axiom::CashSubadditivity, Axiom::SupNormLipschitz];
    let r = RiskFunctional::new(name, move |x| ExtReal::Finite(side_value(x, &f, side, &q))).with_claims(&claims);
    Ok(match (fixed, space) {
        (true, Some(s)) => r.on_space(s.clone()),
        _ => r,
    })
}

/// The put premium `E_P[X_+]`.
pub fn put_premium() -> RiskFunctional {
    RiskFunctional::new("put_premium", |x| {
        ExtReal::Finite(x.values().iter().zip(x.probs()).map(|(v, p)| p * v.max(0.0)).sum())
    })
    .with_claims(&[
        Axiom::Monotonicity,
        Axiom::CashSubadditivity,
        Axiom::Convexity,
        Axiom::QuasiConvexity,
        Axiom::LawInvariance,
        Axiom::FsdConsistency,
        Axiom::SsdConsistency,
        Axiom::ComonotonicQuasiConvexity,
        Axiom::SupNormLipschitz,
    ])
}
