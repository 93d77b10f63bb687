//! Certainty equivalents under ambiguity: α-maxmin expected utility and rank-dependent
//! expected utility with a mixed distortion.

use serde::{Deserialize, Serialize};

use super::{QSpec, RiskFunctional, ScalarFn};
use crate::axioms::Axiom;
use crate::error::{domain, input, validation, Result};
use crate::ext_real::ExtReal;
use crate::prob::{FiniteSpace, QuantileCurve, Rv};

const CE_CLAIMS: &[Axiom] = &[Axiom::Monotonicity, Axiom::CashSubadditivity, Axiom::SupNormLipschitz];

fn check_unit(x: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        domain(format!("{what} = {x} is outside [0, 1]"))
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return input("the λ set must be nonempty");
    }
    lambdas.iter().try_for_each(|l| check_unit(*l, "λ"))
}

/// Parameters of the α-MEU certainty equivalent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaMeuParams {
    pub alpha: f64,
    pub gamma: f64,
    pub lambdas: Vec<f64>,
    pub q1: Vec<QSpec>,
    pub q2: Vec<QSpec>,
}

impl AlphaMeuParams {
    pub fn validate(&self, space: Option<&FiniteSpace>) -> Result<()> {
        check_unit(self.alpha, "α")?;
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return domain("γ must be positive");
        }
        check_lambdas(&self.lambdas)?;
        if self.q1.is_empty() || self.q2.is_empty() {
            return input("belief sets must be nonempty");
        }
        self.q1.iter().chain(&self.q2).try_for_each(|q| q.validate_for(space))
    }

    fn has_fixed(&self) -> bool {
        self.q1.iter().chain(&self.q2).any(|q| matches!(q, QSpec::Fixed { .. }))
    }
}

/// `sup_{λ∈I} (1/γ) log(α min_{Q∈Q1} E_Q[e^{γλX}] + (1-α) max_{Q∈Q2} E_Q[e^{γλX}])`.
pub fn alpha_meu_value(x: &Rv, p: &AlphaMeuParams) -> Result<f64> {
    p.validate(Some(x.space()))?;
    Ok(alpha_meu_unchecked(x, p))
}

fn alpha_meu_unchecked(x: &Rv, p: &AlphaMeuParams) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &lambda in &p.lambdas {
        let g = p.gamma * lambda;
        // Factor out exp(shift) so large losses do not overflow.
        let shift = x.values().iter().map(|v| g * v).fold(f64::NEG_INFINITY, f64::max);
        let moment = |q: &QSpec| q.expectation(x, |v| (g * v - shift).exp());
        let lo = p.q1.iter().map(moment).fold(f64::INFINITY, f64::min);
        let hi = p.q2.iter().map(moment).fold(f64::NEG_INFINITY, f64::max);
        let v = (shift + (p.alpha * lo + (1.0 - p.alpha) * hi).ln()) / p.gamma;
        best = best.max(v);
    }
    best
}

pub fn alpha_meu_ce(p: AlphaMeuParams, space: Option<&FiniteSpace>) -> Result<RiskFunctional> {
    p.validate(space)?;
    let fixed = p.has_fixed();
    let name = format!("alpha_meu:{}", serde_json::to_string(&p).unwrap());
    let r = RiskFunctional::new(name, move |x| ExtReal::Finite(alpha_meu_unchecked(x, &p))).with_claims(CE_CLAIMS);
    Ok(match (fixed, space) {
        (true, Some(s)) => r.on_space(s.clone()),
        _ => r,
    })
}

/// Increasing map `[0,1] → [0,1]` with `T(0) = 0` and `T(1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionFn {
    Identity,
    /// `u^p`.
    Power {
        p: f64,
    },
    /// `1 - (1-u)^p`.
    DualPower {
        p: f64,
    },
    /// Values on an equally spaced grid of `[0, 1]`, linearly interpolated.
    Grid {
        values: Vec<f64>,
    },
}

const SHAPE_TOL: f64 = 1e-12;

impl DistortionFn {
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            DistortionFn::Identity => u,
            DistortionFn::Power { p } => u.powf(*p),
            DistortionFn::DualPower { p } => 1.0 - (1.0 - u).powf(*p),
            DistortionFn::Grid { values } => {
                let m = values.len() - 1;
                let pos = u * m as f64;
                let i = (pos.floor() as usize).min(m - 1);
                let frac = pos - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistortionFn::Power { p } | DistortionFn::DualPower { p } if !(p.is_finite() && *p > 0.0) => {
                validation("distortion exponent must be positive")
            }
            DistortionFn::Grid { values } => {
                if values.len() < 2 || values[0] != 0.0 || *values.last().unwrap() != 1.0 {
                    return validation("distortion grid must start at 0 and end at 1");
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return validation("distortion grid must be increasing");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn second_differences(values: &[f64]) -> impl Iterator<Item = f64> + '_ {
        values.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0])
    }

    pub fn is_convex(&self) -> bool {
        match self {
            DistortionFn::Identity => true,
            DistortionFn::Power { p } => *p >= 1.0,
            DistortionFn::DualPower { p } => *p <= 1.0,
            DistortionFn::Grid { values } => Self::second_differences(values).all(|d| d >= -SHAPE_TOL),
        }
    }

    pub fn is_concave(&self) -> bool {
        match self {
            DistortionFn::Identity => true,
            DistortionFn::Power { p } => *p <= 1.0,
            DistortionFn::DualPower { p } => *p >= 1.0,
            DistortionFn::Grid { values } => Self::second_differences(values).all(|d| d <= SHAPE_TOL),
        }
    }
}

/// Choquet integral `∫ Y d(T∘P)` for a finite `Y`, summing over decreasing distinct values.
pub fn choquet_integral(y: &Rv, t: impl Fn(f64) -> f64) -> f64 {
    let curve = QuantileCurve::of(y);
    let mut acc = 0.0;
    let mut upper = 0.0;
    let mut t_prev = 0.0;
    for (v, p) in curve.values().iter().zip(curve.masses()).rev() {
        upper += p;
        let t_now = if upper >= 1.0 - 1e-15 { 1.0 } else { t(upper) };
        acc += v * (t_now - t_prev);
        t_prev = t_now;
    }
    acc
}

/// Parameters of the RDEU certainty equivalent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdeuParams {
    pub ell: ScalarFn,
    pub alpha: f64,
    pub t1: DistortionFn,
    pub t2: DistortionFn,
    pub lambdas: Vec<f64>,
}

impl RdeuParams {
    pub fn validate(&self) -> Result<()> {
        self.ell.validate_loss()?;
        check_unit(self.alpha, "α")?;
        self.t1.validate()?;
        self.t2.validate()?;
        if !self.t1.is_convex() {
            return validation("T1 must be convex");
        }
        if !self.t2.is_concave() {
            return validation("T2 must be concave");
        }
        check_lambdas(&self.lambdas)
    }

    fn mixed(&self, u: f64) -> f64 {
        self.alpha * self.t1.eval(u) + (1.0 - self.alpha) * self.t2.eval(u)
    }

    fn term(&self, x: &Rv, lambda: f64) -> Option<f64> {
        let y = x.map(|v| self.ell.eval(lambda * v));
        self.ell.inverse(choquet_integral(&y, |u| self.mixed(u)))
    }
}

/// `sup_{λ∈I} ℓ⁻¹(∫ ℓ(λX) d(T∘P))` with `T = αT1 + (1-α)T2`.
pub fn rdeu_value(x: &Rv, p: &RdeuParams) -> Result<f64> {
    p.validate()?;
    let mut best = f64::NEG_INFINITY;
    for &lambda in &p.lambdas {
        let support: Vec<f64> = x.values().iter().map(|v| lambda * v).collect();
        p.ell.validate_loss_on(&support)?;
        match p.term(x, lambda) {
            Some(v) => best = best.max(v),
            None => return domain("ℓ⁻¹ is undefined at the Choquet integral"),
        }
    }
    Ok(best)
}

/// The RDEU functional. An undefined inverse contributes `-∞`.
pub fn rdeu_ce(p: RdeuParams) -> Result<RiskFunctional> {
    p.validate()?;
    let name = format!("rdeu:{}", serde_json::to_string(&p).unwrap());
    Ok(RiskFunctional::new(name, move |x| {
        p.lambdas.iter().map(|l| p.term(x, *l).map_or(ExtReal::NegInf, ExtReal::new)).max().unwrap()
    })
    .with_claims(CE_CLAIMS))
}
