//! Concrete risk functionals behind one [`RiskFunctional`] interface.

mod ambiguity;
mod eligible;
mod insured;
mod lambda;
mod scalar;

use std::fmt;
use std::sync::Arc;

pub use ambiguity::{
    alpha_meu_ce, alpha_meu_value, choquet_integral, rdeu_ce, rdeu_value, AlphaMeuParams, DistortionFn, RdeuParams,
};
pub use eligible::{AcceptanceSet, EligibleAsset};
pub use insured::{expected_transformed_loss, put_premium, transformed_loss_value, QSpec, Side};
pub use lambda::{
    lambda_component, lambda_component_family, lambda_constraint_level, lambda_value_at_risk, lambda_var,
    two_level_lambda, two_level_lambda_var, two_level_value, LambdaFn, LambdaMode,
};
pub use scalar::ScalarFn;

use crate::axioms::Axiom;
use crate::error::{domain, input, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::prob::{FiniteSpace, QuantileCurve, Rv};

type EvalFn = dyn Fn(&Rv) -> ExtReal + Send + Sync;

/// A map from random variables to extended reals.
///
/// `claims` lists the axioms the functional is documented to satisfy; they are not
/// trusted anywhere and are checked by the axiom lab. A functional with a `domain`
/// is only defined on that space.
#[derive(Clone)]
pub struct RiskFunctional {
    name: Arc<str>,
    eval: Arc<EvalFn>,
    claims: Arc<[Axiom]>,
    domain: Option<FiniteSpace>,
}

impl RiskFunctional {
    pub fn new(name: impl Into<String>, f: impl Fn(&Rv) -> ExtReal + Send + Sync + 'static) -> Self {
        RiskFunctional { name: name.into().into(), eval: Arc::new(f), claims: Arc::new([]), domain: None }
    }

    pub fn with_claims(mut self, claims: &[Axiom]) -> Self {
        self.claims = claims.into();
        self
    }

    /// Restricts the functional to one space.
    pub fn on_space(mut self, space: FiniteSpace) -> Self {
        self.domain = Some(space);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into().into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claims(&self) -> &[Axiom] {
        &self.claims
    }

    pub fn claims_axiom(&self, axiom: Axiom) -> bool {
        self.claims.contains(&axiom)
    }

    pub fn domain(&self) -> Option<&FiniteSpace> {
        self.domain.as_ref()
    }

    /// Evaluates the functional, rejecting inputs outside its domain.
    pub fn evaluate(&self, x: &Rv) -> Result<ExtReal> {
        if let Some(d) = &self.domain {
            if d != x.space() {
                return Err(RiskError::SpaceMismatch(format!(
                    "{} is defined on a space with {} outcomes",
                    self.name,
                    d.len()
                )));
            }
        }
        Ok((self.eval)(x))
    }

    /// Evaluates the functional.
    ///
    /// # Panics
    /// Panics when `x` lies outside the functional's domain.
    pub fn value(&self, x: &Rv) -> ExtReal {
        self.evaluate(x).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Pointwise minimum of a nonempty family.
    pub fn pointwise_min(name: impl Into<String>, family: &[RiskFunctional]) -> Result<Self> {
        if family.is_empty() {
            return input("pointwise minimum of an empty family");
        }
        let mut domain = None;
        for f in family {
            if let Some(d) = &f.domain {
                match &domain {
                    None => domain = Some(d.clone()),
                    Some(existing) if existing != d => {
                        return Err(RiskError::SpaceMismatch("family members live on different spaces".into()))
                    }
                    _ => {}
                }
            }
        }
        let members: Vec<RiskFunctional> = family.to_vec();
        let mut out = RiskFunctional::new(name, move |x| members.iter().map(|f| (f.eval)(x)).min().unwrap());
        out.domain = domain;
        Ok(out)
    }
}

impl fmt::Debug for RiskFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RiskFunctional").field("name", &self.name).field("claims", &self.claims).finish()
    }
}

fn check_level(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        domain(format!("probability level {t} is outside [0, 1]"))
    }
}

const VAR_CLAIMS: &[Axiom] = &[
    Axiom::Monotonicity,
    Axiom::CashAdditivity,
    Axiom::CashSubadditivity,
    Axiom::StarShapedness,
    Axiom::QuasiStarShapedness,
    Axiom::Normalization,
    Axiom::QuasiNormalization,
    Axiom::LawInvariance,
    Axiom::FsdConsistency,
    Axiom::SupNormLipschitz,
];

const COHERENT_CLAIMS: &[Axiom] = &[
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

/// Value-at-Risk `VaR_t`, the left `t`-quantile.
pub fn var(t: f64) -> Result<RiskFunctional> {
    check_level(t)?;
    Ok(RiskFunctional::new(format!("var:{t}"), move |x| QuantileCurve::of(x).quantile(t).unwrap())
        .with_claims(VAR_CLAIMS))
}

/// Expected shortfall `ES_t`, with `ES_1 = ess-sup`.
pub fn es(t: f64) -> Result<RiskFunctional> {
    check_level(t)?;
    Ok(RiskFunctional::new(format!("es:{t}"), move |x| {
        ExtReal::Finite(QuantileCurve::of(x).expected_shortfall(t).unwrap())
    })
    .with_claims(COHERENT_CLAIMS))
}

/// `ES_t(X)`.
pub fn expected_shortfall(x: &Rv, t: f64) -> Result<f64> {
    QuantileCurve::of(x).expected_shortfall(t)
}

pub fn mean() -> RiskFunctional {
    RiskFunctional::new("mean", |x| ExtReal::Finite(x.mean())).with_claims(COHERENT_CLAIMS)
}

/// Entropic risk measure `(1/γ) log E[exp(γX)]`.
pub fn entropic(gamma: f64) -> Result<RiskFunctional> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return domain("entropic risk aversion must be positive");
    }
    Ok(RiskFunctional::new(format!("entropic:{gamma}"), move |x| {
        ExtReal::Finite(log_mean_exp(x.values(), x.probs(), gamma) / gamma)
    })
    .with_claims(COHERENT_CLAIMS))
}

/// `log Σ p_i exp(γ x_i)`, shifted for stability.
pub(crate) fn log_mean_exp(values: &[f64], probs: &[f64], gamma: f64) -> f64 {
    let s = values.iter().map(|v| gamma * v).fold(f64::NEG_INFINITY, f64::max);
    let acc: f64 = values.iter().zip(probs).map(|(v, p)| p * (gamma * v - s).exp()).sum();
    s + acc.ln()
}

/// `X ↦ min{E[X], cap}`.
pub fn capped_mean(cap: f64) -> Result<RiskFunctional> {
    if !cap.is_finite() {
        return domain("cap must be finite");
    }
    Ok(RiskFunctional::new(format!("capped_mean:{cap}"), move |x| ExtReal::Finite(x.mean().min(cap))).with_claims(&[
        Axiom::Monotonicity,
        Axiom::CashSubadditivity,
        Axiom::QuasiConvexity,
        Axiom::QuasiStarShapedness,
        Axiom::QuasiNormalization,
        Axiom::LawInvariance,
        Axiom::FsdConsistency,
        Axiom::SsdConsistency,
        Axiom::ComonotonicQuasiConvexity,
        Axiom::SupNormLipschitz,
    ]))
}

/// Parses the `kind:params` shorthand for measures without structured parameters.
///
/// Kinds: `var:t`, `es:t`, `mean`, `entropic:γ`, `capped_mean:c`, `two_level:α:β:z`, `put_premium`.
pub fn parse_measure(spec: &str) -> Result<RiskFunctional> {
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or("");
    let params: Vec<f64> = parts
        .map(|p| p.parse::<f64>().map_err(|_| RiskError::Input(format!("bad parameter {p:?} in {spec:?}"))))
        .collect::<Result<_>>()?;
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            input(format!("measure {kind:?} takes {n} parameter(s), got {}", params.len()))
        }
    };
    match kind {
        "var" => {
            arity(1)?;
            var(params[0])
        }
        "es" => {
            arity(1)?;
            es(params[0])
        }
        "mean" => {
            arity(0)?;
            Ok(mean())
        }
        "entropic" => {
            arity(1)?;
            entropic(params[0])
        }
        "capped_mean" => {
            arity(1)?;
            capped_mean(params[0])
        }
        "two_level" => {
            arity(3)?;
            two_level_lambda_var(params[0], params[1], params[2])
        }
        "put_premium" => {
            arity(0)?;
            Ok(put_premium())
        }
        other => input(format!("unknown measure kind {other:?}")),
    }
}
