use serde::{Deserialize, Serialize};

use super::sampler::sample_rv;
use super::CheckConfig;
use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::measures::RiskFunctional;
use crate::prob::{FiniteSpace, Rv};
use crate::rng::trial_rng;

/// Estimated range `D_ρ` of a functional.
///
/// `lower`/`upper` extrapolate from evaluations at scales 1, 2 and 4 of the configured value
/// range: an extreme that keeps moving steadily is reported as infinite, and one whose
/// movement dies out is reported as an open bound. `observed` is what scale 1 produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeEstimate {
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub lower_open: bool,
    pub upper_open: bool,
    pub observed: (ExtReal, ExtReal),
}

impl RangeEstimate {
    pub fn contains(&self, t: f64) -> bool {
        let t = ExtReal::Finite(t);
        let above = if self.lower_open { t > self.lower } else { t >= self.lower };
        let below = if self.upper_open { t < self.upper } else { t <= self.upper };
        above && below
    }
}

const SCALES: [f64; 3] = [1.0, 2.0, 4.0];
const GRID: usize = 41;
const MAX_SAMPLES: usize = 100;
const RANGE_SALT: u64 = 0x5EED_0FD0;

fn extremes_at(rho: &RiskFunctional, space: &FiniteSpace, cfg: &CheckConfig, scale: f64) -> (ExtReal, ExtReal) {
    let (lo, hi) = (cfg.value_range.0 * scale, cfg.value_range.1 * scale);
    let mut min = ExtReal::PosInf;
    let mut max = ExtReal::NegInf;
    let mut see = |v: ExtReal| {
        min = min.min(v);
        max = max.max(v);
    };
    for i in 0..GRID {
        let c = lo + (hi - lo) * i as f64 / (GRID - 1) as f64;
        see(rho.value(&Rv::constant(space, c)));
    }
    for k in 0..cfg.trials.min(MAX_SAMPLES) {
        let mut rng = trial_rng(cfg.seed ^ RANGE_SALT, k as u64);
        see(rho.value(&sample_rv(space, (lo, hi), &mut rng)));
    }
    (min, max)
}

/// Classifies one end from its values at the three scales (oriented so that "moving" means growing).
fn classify(m: [ExtReal; 3], tol: f64, infinite: ExtReal) -> (ExtReal, bool) {
    let (Some(a), Some(b), Some(c)) = (m[0].finite(), m[1].finite(), m[2].finite()) else {
        return (m[2], false);
    };
    let (inc1, inc2) = ((b - a).abs(), (c - b).abs());
    let tol = tol.max(1e-9 * c.abs());
    if inc2 <= tol {
        (m[2], false)
    } else if inc2 >= 0.5 * inc1 {
        (infinite, true)
    } else {
        (m[2], true)
    }
}

/// Estimates `D_ρ = {ρ(X)}` from constants and sampled variables.
pub fn estimate_range(rho: &RiskFunctional, cfg: &CheckConfig) -> Result<RangeEstimate> {
    cfg.validate()?;
    let space = rho.domain().cloned().unwrap_or_else(|| FiniteSpace::uniform(cfg.space_sizes[0]));
    let ext: Vec<(ExtReal, ExtReal)> = SCALES.iter().map(|s| extremes_at(rho, &space, cfg, *s)).collect();
    let (lower, lower_open) = classify([ext[0].0, ext[1].0, ext[2].0], cfg.tolerance, ExtReal::NegInf);
    let (upper, upper_open) = classify([ext[0].1, ext[1].1, ext[2].1], cfg.tolerance, ExtReal::PosInf);
    Ok(RangeEstimate { lower, upper, lower_open, upper_open, observed: ext[0] })
}
