//! Scenario portfolios under a ΛVaR constraint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::measures::{lambda_constraint_level, lambda_value_at_risk, LambdaFn, LambdaMode};
use crate::prob::{quantile, FiniteSpace, ProbabilityVector, Rv, ScenarioTable};

const SIMPLEX_TOL: f64 = 1e-12;
const OBJECTIVE_TIE: f64 = 1e-12;

/// Losses per unit weight, one row per outcome and one column per asset.
#[derive(Debug, Clone)]
pub struct ScenarioMatrix {
    space: FiniteSpace,
    assets: Vec<String>,
    losses: Vec<Vec<f64>>,
}

impl ScenarioMatrix {
    pub fn new(space: FiniteSpace, assets: Vec<String>, losses: Vec<Vec<f64>>) -> Result<Self> {
        if losses.len() != space.len() {
            return Err(RiskError::SpaceMismatch(format!("{} rows for {} outcomes", losses.len(), space.len())));
        }
        if assets.is_empty() {
            return input("scenario matrix has no assets");
        }
        for row in &losses {
            if row.len() != assets.len() {
                return input(format!("row has {} entries for {} assets", row.len(), assets.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return input("scenario losses must be finite");
            }
        }
        Ok(ScenarioMatrix { space, assets, losses })
    }

    /// Every non-probability column of the table is an asset.
    pub fn from_table(table: &ScenarioTable) -> Result<Self> {
        let n = table.space().len();
        let losses = (0..n).map(|w| table.columns().iter().map(|c| c.values()[w]).collect()).collect();
        Self::new(table.space().clone(), table.names().to_vec(), losses)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn losses(&self) -> &[Vec<f64>] {
        &self.losses
    }

    pub fn num_assets(&self) -> usize {
        self.assets.len()
    }

    /// The portfolio loss `X = Lw`.
    pub fn portfolio_loss(&self, w: &Weights) -> Result<Rv> {
        if w.len() != self.num_assets() {
            return Err(RiskError::SpaceMismatch(format!("{} weights for {} assets", w.len(), self.num_assets())));
        }
        let vals = self.losses.iter().map(|row| row.iter().zip(w.values()).map(|(l, w)| l * w).sum()).collect();
        Rv::new(self.space.clone(), vals)
    }
}

/// Nonnegative asset weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_TOL) {
            return Err(RiskError::Validation("weights must be nonnegative".into()));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > SIMPLEX_TOL {
            return Err(RiskError::Validation("weights must sum to 1".into()));
        }
        Ok(Weights(w))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Weights {
    type Error = RiskError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Weights::new(v)
    }
}

impl From<Weights> for Vec<f64> {
    fn from(w: Weights) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityMode {
    /// `ΛVaR(Lw) ≤ z`.
    Primal,
    /// `VaR_{Λ(z)}(Lw) ≤ z`.
    Reduced,
}

pub fn lambda_feasible(
    lambda: &LambdaFn,
    z: f64,
    l: &ScenarioMatrix,
    w: &Weights,
    mode: FeasibilityMode,
) -> Result<bool> {
    if !z.is_finite() {
        return input("constraint level must be finite");
    }
    let x = l.portfolio_loss(w)?;
    let value = match mode {
        FeasibilityMode::Primal => lambda_value_at_risk(&x, lambda, LambdaMode::Primal),
        FeasibilityMode::Reduced => quantile(&x, lambda_constraint_level(lambda, z))?,
    };
    Ok(value <= ExtReal::Finite(z))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSolution {
    pub weights: Weights,
    /// Expected loss `E[Lw]`.
    pub value: f64,
    pub feasible_points: usize,
    pub grid_points: usize,
}

/// Minimizes `E[Lw]` over the simplex grid `{k/resolution}` subject to the reduced constraint.
///
/// Returns `None` when no grid point is feasible. Ties within `1e-12` go to the
/// lexicographically first weight vector.
pub fn optimize_portfolio(
    l: &ScenarioMatrix,
    lambda: &LambdaFn,
    z: f64,
    resolution: usize,
) -> Result<Option<PortfolioSolution>> {
    if resolution < 2 {
        return input("portfolio grid resolution must be at least 2");
    }
    let grid = ProbabilityVector::simplex_grid(l.num_assets(), resolution);
    let probs = l.space.probs();
    let scored: Vec<Option<(f64, Weights)>> = grid
        .par_iter()
        .map(|p| -> Result<Option<(f64, Weights)>> {
            let w = Weights::new(p.weights().to_vec())?;
            if !lambda_feasible(lambda, z, l, &w, FeasibilityMode::Reduced)? {
                return Ok(None);
            }
            let x = l.portfolio_loss(&w)?;
            let mean = x.values().iter().zip(probs).map(|(v, p)| v * p).sum();
            Ok(Some((mean, w)))
        })
        .collect::<Result<_>>()?;
    let feasible_points = scored.iter().flatten().count();
    let best = scored.into_iter().flatten().fold(None::<(f64, Weights)>, |acc, cand| match acc {
        Some(a) if a.0 <= cand.0 + OBJECTIVE_TIE => Some(a),
        _ => Some(cand),
    });
    Ok(best.map(|(value, weights)| PortfolioSolution { weights, value, feasible_points, grid_points: grid.len() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> ScenarioMatrix {
        let n = rows.len();
        let k = rows[0].len();
        ScenarioMatrix::new(FiniteSpace::uniform(n), (0..k).map(|i| format!("a{i}")).collect(), rows).unwrap()
    }

    #[test]
    fn single_asset_gets_full_weight() {
        let l = matrix(vec![vec![1.0], vec![-1.0]]);
        let lam = LambdaFn::constant(0.5).unwrap();
        let sol = optimize_portfolio(&l, &lam, 5.0, 4).unwrap().unwrap();
        assert_eq!(sol.weights.values(), &[1.0]);
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn slack_constraint_is_feasible_both_ways() {
        let l = matrix(vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![3.0, -2.0]]);
        let w = Weights::new(vec![0.5, 0.5]).unwrap();
        let lam = LambdaFn::constant(1.0).unwrap();
        for mode in [FeasibilityMode::Primal, FeasibilityMode::Reduced] {
            assert!(lambda_feasible(&lam, 10.0, &l, &w, mode).unwrap());
        }
    }

    #[test]
    fn infeasible_when_every_loss_exceeds_level() {
        let l = matrix(vec![vec![2.0, 3.0], vec![1.5, 4.0]]);
        let lam = LambdaFn::constant(1.0).unwrap();
        assert!(optimize_portfolio(&l, &lam, 1.0, 5).unwrap().is_none());
    }

    #[test]
    fn two_level_instance_agrees() {
        let l = matrix(vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]);
        let w = Weights::new(vec![1.0]).unwrap();
        let lam = crate::measures::two_level_lambda(0.25, 0.75, 0.0).unwrap();
        let p = lambda_feasible(&lam, 0.0, &l, &w, FeasibilityMode::Primal).unwrap();
        let r = lambda_feasible(&lam, 0.0, &l, &w, FeasibilityMode::Reduced).unwrap();
        assert!(p);
        assert_eq!(p, r);
    }

    #[test]
    fn rejects_bad_inputs() {
        let l = matrix(vec![vec![1.0, 2.0]]);
        let w = Weights::new(vec![1.0]).unwrap();
        assert!(lambda_feasible(&LambdaFn::constant(0.5).unwrap(), 0.0, &l, &w, FeasibilityMode::Primal).is_err());
        assert!(optimize_portfolio(&l, &LambdaFn::constant(0.5).unwrap(), 0.0, 1).is_err());
        assert!(Weights::new(vec![0.7, 0.7]).is_err());
        assert!(Weights::new(vec![1.5, -0.5]).is_err());
    }
}
