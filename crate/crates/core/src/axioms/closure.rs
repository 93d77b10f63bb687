use serde::{Deserialize, Serialize};

use super::{check_axiom, Axiom, CheckConfig, CheckReport};
use crate::error::{input, Result};
use crate::measures::RiskFunctional;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureStatus {
    /// Every member passed the premises; `results` holds the verdicts on the minimum.
    Checked,
    /// Some member failed a premise; no verdict on the minimum is given.
    PreconditionFailed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosureReport {
    pub status: ClosureStatus,
    pub premises: Vec<CheckReport>,
    pub results: Vec<CheckReport>,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.status == ClosureStatus::Checked && self.results.iter().all(CheckReport::passed)
    }
}

/// Checks the listed axioms on every member, then on the pointwise minimum.
pub fn check_min_closure(family: &[RiskFunctional], axioms: &[Axiom], cfg: &CheckConfig) -> Result<ClosureReport> {
    if family.is_empty() {
        return input("closure check needs a nonempty family");
    }
    let allowed = [Axiom::QuasiNormalization, Axiom::QuasiStarShapedness, Axiom::CashSubadditivity];
    if let Some(a) = axioms.iter().find(|a| !allowed.contains(a)) {
        return input(format!("{a} is not preserved by pointwise minima"));
    }
    let mut premises = Vec::new();
    for member in family {
        for &a in axioms {
            let report = check_axiom(a, member, cfg)?;
            let failed = !report.passed();
            premises.push(report);
            if failed {
                return Ok(ClosureReport { status: ClosureStatus::PreconditionFailed, premises, results: vec![] });
            }
        }
    }
    let names: Vec<&str> = family.iter().map(RiskFunctional::name).collect();
    let min = RiskFunctional::pointwise_min(format!("min[{}]", names.join(",")), family)?;
    let results = axioms.iter().map(|a| check_axiom(*a, &min, cfg)).collect::<Result<_>>()?;
    Ok(ClosureReport { status: ClosureStatus::Checked, premises, results })
}
