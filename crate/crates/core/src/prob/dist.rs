use serde::Serialize;

use super::space::{FiniteSpace, Rv, PROB_TOL};
use crate::error::{domain, Result};
use crate::ext_real::ExtReal;

/// Absolute tolerance for value comparisons in dominance tests.
pub const VALUE_TOL: f64 = 1e-9;

/// Step quantile curve of a finite distribution.
///
/// `values[i]` is the quantile on the level interval `(breakpoints[i-1], breakpoints[i]]`,
/// with an implicit `breakpoints[-1] = 0`. The last breakpoint is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileCurve {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl QuantileCurve {
    pub fn of(x: &Rv) -> Self {
        let mut atoms: Vec<(f64, f64)> = x.values().iter().copied().zip(x.probs().iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match values.last() {
                Some(last) if *last == v => *probs.last_mut().unwrap() += p,
                _ => {
                    values.push(v);
                    probs.push(p);
                }
            }
        }
        let mut acc = 0.0;
        let mut breakpoints: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *breakpoints.last_mut().unwrap() = 1.0;
        QuantileCurve { breakpoints, values, probs }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Distinct support points in increasing order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Probability mass of each support point.
    pub fn masses(&self) -> &[f64] {
        &self.probs
    }

    /// Left quantile `inf{x : F(x) ≥ t}`; `-∞` at `t = 0`.
    pub fn quantile(&self, t: f64) -> Result<ExtReal> {
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("probability level {t} is outside [0, 1]"));
        }
        if t == 0.0 {
            return Ok(ExtReal::NegInf);
        }
        Ok(ExtReal::Finite(self.level_value(t)))
    }

    /// Quantile at a level known to lie in `(0, 1]`.
    pub(crate) fn level_value(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|b| *b < t - PROB_TOL);
        self.values[i.min(self.values.len() - 1)]
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|v| *v <= x);
        if i == 0 {
            0.0
        } else {
            self.breakpoints[i - 1]
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|v| *v < x);
        if i == 0 {
            0.0
        } else {
            self.breakpoints[i - 1]
        }
    }

    pub fn ess_sup(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    /// `∫_t^1 VaR_α dα`, exact for the step curve.
    pub fn tail_integral(&self, t: f64) -> f64 {
        let mut lo: f64 = 0.0;
        let mut acc = 0.0;
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            let width = b - lo.max(t);
            if width > 0.0 {
                acc += width * v;
            }
            lo = *b;
        }
        acc
    }

    /// Expected shortfall `ES_t`, with `ES_1 = ess-sup`.
    pub fn expected_shortfall(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("probability level {t} is outside [0, 1]"));
        }
        if t == 0.0 {
            return Ok(self.mean());
        }
        if 1.0 - t <= PROB_TOL {
            return Ok(self.ess_sup());
        }
        Ok(self.tail_integral(t) / (1.0 - t))
    }

    /// Stop-loss transform `E[(X-K)_+]`.
    pub fn stop_loss(&self, k: f64) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| p * (v - k).max(0.0)).sum()
    }
}

/// Left quantile `VaR_t(X)`.
pub fn quantile(x: &Rv, t: f64) -> Result<ExtReal> {
    QuantileCurve::of(x).quantile(t)
}

pub fn ess_sup(x: &Rv) -> f64 {
    x.ess_sup()
}

/// Sorted union of two breakpoint sets, merging levels closer than the probability tolerance.
pub fn merged_breakpoints(a: &QuantileCurve, b: &QuantileCurve) -> Vec<f64> {
    let mut all: Vec<f64> = a.breakpoints.iter().chain(&b.breakpoints).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for l in all {
        match out.last_mut() {
            Some(last) if l - *last <= PROB_TOL => *last = last.max(l),
            _ => out.push(l),
        }
    }
    *out.last_mut().unwrap() = 1.0;
    out
}

/// First-order dominance `X ⪰₁ Y`: quantiles of X are at least those of Y at every level.
pub fn fsd_dominates(x: &Rv, y: &Rv) -> bool {
    let (cx, cy) = (QuantileCurve::of(x), QuantileCurve::of(y));
    merged_breakpoints(&cx, &cy).into_iter().all(|l| cx.level_value(l) >= cy.level_value(l) - VALUE_TOL)
}

/// How second-order dominance is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsdMode {
    /// Stop-loss transforms at every kink of the merged support.
    StopLoss,
    /// Integrated quantile tails at every merged probability breakpoint.
    EsCurve,
}

/// Second-order (increasing convex) dominance `X ⪰₂ Y`, via stop-loss kinks.
pub fn ssd_dominates(x: &Rv, y: &Rv) -> bool {
    ssd_dominates_with(x, y, SsdMode::StopLoss)
}

pub fn ssd_dominates_with(x: &Rv, y: &Rv, mode: SsdMode) -> bool {
    let (cx, cy) = (QuantileCurve::of(x), QuantileCurve::of(y));
    match mode {
        SsdMode::StopLoss => {
            cx.values.iter().chain(&cy.values).all(|k| cx.stop_loss(*k) >= cy.stop_loss(*k) - VALUE_TOL)
        }
        SsdMode::EsCurve => std::iter::once(0.0)
            .chain(merged_breakpoints(&cx, &cy))
            .all(|t| cx.tail_integral(t) >= cy.tail_integral(t) - VALUE_TOL),
    }
}

/// True when the two variables have the same distribution.
pub fn same_law(x: &Rv, y: &Rv) -> bool {
    let (cx, cy) = (QuantileCurve::of(x), QuantileCurve::of(y));
    merged_breakpoints(&cx, &cy).into_iter().all(|l| (cx.level_value(l) - cy.level_value(l)).abs() <= VALUE_TOL)
}

/// Rearranges `(X, Y)` into a comonotonic pair with the same marginals.
///
/// Both quantile curves are composed with the merged level grid. When that grid is the
/// uniform grid of the input space, the output lives on the input space.
pub fn comonotone_rearrangement(x: &Rv, y: &Rv) -> Result<(Rv, Rv)> {
    if x.space() != y.space() {
        return domain("comonotone rearrangement needs both variables on the same space");
    }
    let (cx, cy) = (QuantileCurve::of(x), QuantileCurve::of(y));
    let levels = merged_breakpoints(&cx, &cy);
    let mut probs = Vec::with_capacity(levels.len());
    let mut lo = 0.0;
    for l in &levels {
        probs.push(l - lo);
        lo = *l;
    }
    let n = probs.len();
    let uniform_cells = probs.iter().all(|p| (p - 1.0 / n as f64).abs() <= PROB_TOL);
    let space = if uniform_cells && x.space().len() == n && x.space().is_uniform() {
        x.space().clone()
    } else if uniform_cells {
        FiniteSpace::uniform(n)
    } else {
        FiniteSpace::new(probs)?
    };
    let xs = levels.iter().map(|l| cx.level_value(*l)).collect();
    let ys = levels.iter().map(|l| cy.level_value(*l)).collect();
    Ok((Rv::new(space.clone(), xs)?, Rv::new(space, ys)?))
}

/// True when no pair of outcomes is ordered oppositely by `X` and `Y`.
pub fn is_comonotonic(x: &Rv, y: &Rv) -> bool {
    let (a, b) = (x.values(), y.values());
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] - a[j]) * (b[i] - b[j]) >= 0.0))
}
