//! Λ functions and the Lambda Value-at-Risk.

use serde::{Deserialize, Serialize};

use super::RiskFunctional;
use crate::axioms::Axiom;
use crate::error::{domain, validation, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::prob::{QuantileCurve, Rv, PROB_TOL};

/// A decreasing, right-continuous step function `ℝ → [0, 1]` that is not identically zero.
///
/// `Λ(x) = values[i]` where `i` is the number of breakpoints `≤ x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LambdaRepr", into = "LambdaRepr")]
pub struct LambdaFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaRepr {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<LambdaRepr> for LambdaFn {
    type Error = RiskError;
    fn try_from(r: LambdaRepr) -> Result<Self> {
        LambdaFn::new(r.breakpoints, r.values)
    }
}

impl From<LambdaFn> for LambdaRepr {
    fn from(l: LambdaFn) -> Self {
        LambdaRepr { breakpoints: l.breakpoints, values: l.values }
    }
}

impl LambdaFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return validation("a Λ with k breakpoints needs k + 1 plateau values");
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return validation("Λ breakpoints must be finite and strictly increasing");
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return validation("Λ values must lie in [0, 1]");
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return validation("Λ must be decreasing; increasing segments are not supported");
        }
        if values[0] == 0.0 {
            return domain("Λ is identically zero");
        }
        Ok(LambdaFn { breakpoints, values })
    }

    /// The constant function `t`.
    pub fn constant(t: f64) -> Result<Self> {
        Self::new(vec![], vec![t])
    }

    /// `hi` on `(-∞, z)` and `lo` on `[z, ∞)`.
    pub fn step(z: f64, hi: f64, lo: f64) -> Result<Self> {
        Self::new(vec![z], vec![hi, lo])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Λ(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|b| *b <= x)]
    }

    /// `Λ(x-)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|b| *b < x)]
    }

    /// `Λ(-∞)`.
    pub fn head(&self) -> f64 {
        self.values[0]
    }

    /// `Λ(+∞)`.
    pub fn tail(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `inf{x : Λ(x) = 0}`, or `+∞` when Λ never vanishes.
    pub fn zero_from(&self) -> ExtReal {
        match self.values.iter().position(|v| *v == 0.0) {
            Some(i) => ExtReal::Finite(self.breakpoints[i - 1]),
            None => ExtReal::PosInf,
        }
    }
}

/// Evaluation route for ΛVaR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// `inf{x : P(X ≤ x) ≥ Λ(x)}` over a finite candidate set.
    Primal,
    /// `inf_x VaR_{Λ(x)}(X) ∨ x`.
    InfEnvelope,
    /// `sup_x VaR_{Λ(x)}(X) ∧ x`.
    SupEnvelope,
}

impl std::str::FromStr for LambdaMode {
    type Err = RiskError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(LambdaMode::Primal),
            "inf_envelope" => Ok(LambdaMode::InfEnvelope),
            "sup_envelope" => Ok(LambdaMode::SupEnvelope),
            other => Err(RiskError::Input(format!("unknown ΛVaR mode {other:?}"))),
        }
    }
}

/// A point where the step functions may change: `(position, Λ level)`.
///
/// Covers atoms of X, breakpoints of Λ with their left limits, and the two infinite ends.
fn probes(curve: &QuantileCurve, lambda: &LambdaFn) -> Vec<(ExtReal, f64)> {
    let mut out = Vec::with_capacity(curve.values().len() + 2 * lambda.breakpoints.len() + 2);
    out.push((ExtReal::NegInf, lambda.head()));
    for v in curve.values() {
        out.push((ExtReal::Finite(*v), lambda.eval(*v)));
    }
    for b in &lambda.breakpoints {
        out.push((ExtReal::Finite(*b), lambda.eval(*b)));
        out.push((ExtReal::Finite(*b), lambda.left_limit(*b)));
    }
    out.push((ExtReal::PosInf, lambda.tail()));
    out
}

fn var_at(curve: &QuantileCurve, level: f64) -> ExtReal {
    if level <= 0.0 {
        ExtReal::NegInf
    } else {
        ExtReal::Finite(curve.level_value(level))
    }
}

/// ΛVaR of `x` computed by the chosen route. All routes agree exactly.
pub fn lambda_value_at_risk(x: &Rv, lambda: &LambdaFn, mode: LambdaMode) -> ExtReal {
    let curve = QuantileCurve::of(x);
    lambda_var_on_curve(&curve, lambda, mode)
}

pub(crate) fn lambda_var_on_curve(curve: &QuantileCurve, lambda: &LambdaFn, mode: LambdaMode) -> ExtReal {
    match mode {
        LambdaMode::Primal => {
            // Right-continuity of both F and Λ means the infimum is attained at an atom or breakpoint.
            let candidates = curve.values().iter().chain(&lambda.breakpoints);
            let best = candidates
                .filter(|x| curve.cdf(**x) >= lambda.eval(**x) - PROB_TOL)
                .fold(f64::INFINITY, |m, x| m.min(*x));
            ExtReal::new(best)
        }
        LambdaMode::InfEnvelope => {
            probes(curve, lambda).into_iter().map(|(pos, level)| var_at(curve, level).max(pos)).min().unwrap()
        }
        LambdaMode::SupEnvelope => {
            // Left limits matter here: the supremum over an interval is approached from the left.
            let mut best = ExtReal::NegInf;
            for (pos, level) in probes(curve, lambda) {
                best = best.max(var_at(curve, level).min(pos));
            }
            best
        }
    }
}

/// The ΛVaR functional.
pub fn lambda_var(lambda: LambdaFn, mode: LambdaMode) -> RiskFunctional {
    let name = format!("lambda_var:{}", serde_json::to_string(&lambda).unwrap());
    RiskFunctional::new(name, move |x| lambda_value_at_risk(x, &lambda, mode)).with_claims(&[
        Axiom::Monotonicity,
        Axiom::CashSubadditivity,
        Axiom::QuasiStarShapedness,
        Axiom::QuasiNormalization,
        Axiom::LawInvariance,
        Axiom::FsdConsistency,
        Axiom::SupNormLipschitz,
    ])
}

/// The Λ of the two-level example: `β` below `z` and `α` from `z` on.
pub fn two_level_lambda(alpha: f64, beta: f64, z: f64) -> Result<LambdaFn> {
    check_two_level(alpha, beta, z)?;
    LambdaFn::step(z, beta, alpha)
}

fn check_two_level(alpha: f64, beta: f64, z: f64) -> Result<()> {
    if !(0.0 < alpha && alpha < beta && beta < 1.0) {
        return domain(format!("two-level ΛVaR needs 0 < α < β < 1, got α={alpha}, β={beta}"));
    }
    if !z.is_finite() {
        return domain("two-level threshold must be finite");
    }
    Ok(())
}

/// Closed form `min{VaR_β(X), VaR_α(X ∨ z)}`.
pub fn two_level_value(x: &Rv, alpha: f64, beta: f64, z: f64) -> Result<f64> {
    check_two_level(alpha, beta, z)?;
    let a = QuantileCurve::of(x).level_value(beta);
    let b = QuantileCurve::of(&x.max_const(z)).level_value(alpha);
    Ok(a.min(b))
}

/// Two-level ΛVaR via its closed form.
pub fn two_level_lambda_var(alpha: f64, beta: f64, z: f64) -> Result<RiskFunctional> {
    check_two_level(alpha, beta, z)?;
    let name = format!("two_level:{alpha}:{beta}:{z}");
    Ok(RiskFunctional::new(name, move |x| ExtReal::Finite(two_level_value(x, alpha, beta, z).unwrap())).with_claims(&[
        Axiom::Monotonicity,
        Axiom::CashSubadditivity,
        Axiom::QuasiStarShapedness,
        Axiom::QuasiNormalization,
        Axiom::LawInvariance,
        Axiom::FsdConsistency,
        Axiom::SupNormLipschitz,
    ]))
}

/// The VaR level of the equivalent constraint: `ΛVaR(X) ≤ z ⟺ VaR_{Λ(z)}(X) ≤ z`.
pub fn lambda_constraint_level(lambda: &LambdaFn, z: f64) -> f64 {
    lambda.eval(z)
}

/// `X ↦ VaR_{Λ(x)}(X) ∨ x` for a fixed position `x`.
pub fn lambda_component(lambda: &LambdaFn, x: f64) -> RiskFunctional {
    let level = lambda.eval(x);
    RiskFunctional::new(format!("lambda_component:{x}"), move |v| {
        var_at(&QuantileCurve::of(v), level).max(ExtReal::Finite(x))
    })
}

/// Components at every grid position and every breakpoint of Λ.
pub fn lambda_component_family(lambda: &LambdaFn, grid: &[f64]) -> Vec<RiskFunctional> {
    let mut xs: Vec<f64> = grid.iter().chain(&lambda.breakpoints).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter().map(|x| lambda_component(lambda, x)).collect()
}
