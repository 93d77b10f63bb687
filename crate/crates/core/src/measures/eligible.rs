//! Capital requirements with an eligible asset instead of cash.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::RiskFunctional;
use crate::axioms::Axiom;
use crate::error::{domain, validation, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::prob::{QuantileCurve, Rv};

type Predicate = Arc<dyn Fn(&Rv) -> bool + Send + Sync>;

/// A downward-closed acceptance set.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcceptanceSet {
    /// `{Y : ess-sup Y ≤ c}`.
    EssSupAtMost { c: f64 },
    /// `{Y : VaR_t(Y) ≤ c}`.
    VarAtMost { t: f64, c: f64 },
    /// `{Y : ES_t(Y) ≤ c}`.
    EsAtMost { t: f64, c: f64 },
    /// `{Y : E[Y] ≤ c}`.
    MeanAtMost { c: f64 },
    /// A caller-supplied membership test.
    #[serde(skip)]
    Custom { name: String, pred: Predicate },
}

impl fmt::Debug for AcceptanceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcceptanceSet::Custom { name, .. } => write!(f, "Custom({name})"),
            other => write!(f, "{}", serde_json::to_string(other).unwrap_or_default()),
        }
    }
}

impl AcceptanceSet {
    pub fn custom(name: impl Into<String>, pred: impl Fn(&Rv) -> bool + Send + Sync + 'static) -> Self {
        AcceptanceSet::Custom { name: name.into(), pred: Arc::new(pred) }
    }

    pub fn contains(&self, y: &Rv) -> bool {
        match self {
            AcceptanceSet::EssSupAtMost { c } => y.ess_sup() <= *c,
            AcceptanceSet::VarAtMost { t, c } => {
                QuantileCurve::of(y).quantile(*t).is_ok_and(|v| v <= ExtReal::Finite(*c))
            }
            AcceptanceSet::EsAtMost { t, c } => QuantileCurve::of(y).expected_shortfall(*t).is_ok_and(|v| v <= *c),
            AcceptanceSet::MeanAtMost { c } => y.mean() <= *c,
            AcceptanceSet::Custom { pred, .. } => pred(y),
        }
    }

    fn validate(&self) -> Result<()> {
        let level = |t: f64| -> Result<()> {
            if (0.0..=1.0).contains(&t) {
                Ok(())
            } else {
                domain(format!("probability level {t} is outside [0, 1]"))
            }
        };
        match self {
            AcceptanceSet::VarAtMost { t, c } | AcceptanceSet::EsAtMost { t, c } => {
                level(*t)?;
                if !c.is_finite() {
                    return validation("acceptance threshold must be finite");
                }
            }
            AcceptanceSet::EssSupAtMost { c } | AcceptanceSet::MeanAtMost { c } if !c.is_finite() => {
                return validation("acceptance threshold must be finite")
            }
            _ => {}
        }
        Ok(())
    }
}

/// `ρ(X) = inf{m : X - (m/S0)·S_T ∈ A}`.
#[derive(Debug, Clone)]
pub struct EligibleAsset {
    accept: AcceptanceSet,
    s0: f64,
    st: Rv,
}

/// Bisection tolerance on `m`.
const M_TOL: f64 = 1e-9;
/// Grid points used to spot-check that feasibility is monotone in `m`.
const MONOTONE_PROBES: usize = 17;
const MAX_WIDENINGS: usize = 60;

enum Solve {
    Value(f64),
    AlwaysFeasible,
    NeverFeasible,
}

impl EligibleAsset {
    pub fn new(accept: AcceptanceSet, s0: f64, st: Rv) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return domain("initial asset price must be positive");
        }
        if st.values().iter().any(|v| *v <= 0.0) {
            return domain("terminal asset payoff must be strictly positive");
        }
        accept.validate()?;
        Ok(EligibleAsset { accept, s0, st })
    }

    fn feasible(&self, x: &Rv, m: f64) -> bool {
        let units = m / self.s0;
        let y = x.zip_with(&self.st, |a, s| a - units * s).expect("spaces checked");
        self.accept.contains(&y)
    }

    fn solve(&self, x: &Rv) -> Result<Solve> {
        self.st.space().check_same(x.space())?;
        let mut hi = x.sup_norm() / self.st.ess_inf() * self.s0 + 1.0;
        let mut lo = -hi;
        let mut widenings = 0;
        while !self.feasible(x, hi) {
            widenings += 1;
            if widenings > MAX_WIDENINGS {
                return Ok(Solve::NeverFeasible);
            }
            hi *= 2.0;
        }
        widenings = 0;
        while self.feasible(x, lo) {
            widenings += 1;
            if widenings > MAX_WIDENINGS {
                return Ok(Solve::AlwaysFeasible);
            }
            lo *= 2.0;
        }
        let probes: Vec<bool> = (0..MONOTONE_PROBES)
            .map(|i| self.feasible(x, lo + (hi - lo) * i as f64 / (MONOTONE_PROBES - 1) as f64))
            .collect();
        if probes.windows(2).any(|w| w[0] && !w[1]) {
            return validation("acceptance set is not downward closed: feasibility is not monotone in m");
        }
        for _ in 0..200 {
            if hi - lo <= M_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.feasible(x, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Solve::Value(hi))
    }

    /// The minimal capital, to within `1e-9`.
    pub fn evaluate(&self, x: &Rv) -> Result<f64> {
        match self.solve(x)? {
            Solve::Value(v) => Ok(v),
            Solve::NeverFeasible => Err(RiskError::Unbounded("no feasible capital amount".into())),
            Solve::AlwaysFeasible => Err(RiskError::Unbounded("every capital amount is feasible".into())),
        }
    }

    /// The functional form: infeasible positions map to `+∞` and always-acceptable ones to `-∞`.
    ///
    /// # Panics
    /// Evaluation panics if a custom acceptance set turns out not to be downward closed.
    pub fn to_functional(self) -> RiskFunctional {
        let space = self.st.space().clone();
        let name = format!("eligible_asset:{:?}:{}", self.accept, self.s0);
        RiskFunctional::new(name, move |x| match self.solve(x) {
            Ok(Solve::Value(v)) => ExtReal::Finite(v),
            Ok(Solve::NeverFeasible) => ExtReal::PosInf,
            Ok(Solve::AlwaysFeasible) => ExtReal::NegInf,
            Err(e) => panic!("{e}"),
        })
        .with_claims(&[Axiom::Monotonicity])
        .on_space(space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: &[f64]) -> Rv {
        Rv::uniform(v.to_vec()).unwrap()
    }

    #[test]
    fn cash_numeraire_gives_ess_sup() {
        let x = u(&[1.5, -2.0, 0.25]);
        let e = EligibleAsset::new(AcceptanceSet::EssSupAtMost { c: 0.0 }, 1.0, u(&[1.0, 1.0, 1.0])).unwrap();
        assert!((e.evaluate(&x).unwrap() - 1.5).abs() <= 1e-9);
    }

    #[test]
    fn risky_numeraire_gives_max_ratio() {
        let x = u(&[3.0, 5.0]);
        let e = EligibleAsset::new(AcceptanceSet::EssSupAtMost { c: 0.0 }, 1.0, u(&[1.0, 2.0])).unwrap();
        assert!((e.evaluate(&x).unwrap() - 3.0).abs() <= 1e-9);
    }

    #[test]
    fn accepted_positions_need_no_capital() {
        let x = u(&[-1.0, -0.5]);
        let e = EligibleAsset::new(AcceptanceSet::MeanAtMost { c: 0.0 }, 2.0, u(&[1.0, 3.0])).unwrap();
        assert!(e.evaluate(&x).unwrap() <= 0.0);
    }

    #[test]
    fn non_monotone_predicate_is_rejected() {
        let x = u(&[0.0, 0.0]);
        let weird = AcceptanceSet::custom("band", |y: &Rv| {
            let s = y.ess_sup();
            s <= 0.0 && !(-0.5..-0.25).contains(&s)
        });
        let e = EligibleAsset::new(weird, 1.0, u(&[1.0, 1.0])).unwrap();
        assert!(matches!(e.evaluate(&x), Err(RiskError::Validation(_))));
    }

    #[test]
    fn empty_acceptance_is_unbounded() {
        let e = EligibleAsset::new(AcceptanceSet::custom("empty", |_: &Rv| false), 1.0, u(&[1.0])).unwrap();
        assert!(matches!(e.evaluate(&u(&[1.0])), Err(RiskError::Unbounded(_))));
        assert_eq!(e.to_functional().value(&u(&[1.0])), ExtReal::PosInf);
    }

    #[test]
    fn rejects_nonpositive_asset() {
        assert!(EligibleAsset::new(AcceptanceSet::MeanAtMost { c: 0.0 }, 1.0, u(&[1.0, 0.0])).is_err());
        assert!(EligibleAsset::new(AcceptanceSet::MeanAtMost { c: 0.0 }, 0.0, u(&[1.0])).is_err());
    }
}
