use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Result, RiskError};

/// Tolerance on probability sums and probability-level comparisons.
pub const PROB_TOL: f64 = 1e-12;

/// A finite outcome set with strictly positive probabilities summing to one.
#[derive(Clone)]
pub struct FiniteSpace {
    probs: Arc<[f64]>,
}

impl FiniteSpace {
    /// Validates and wraps explicit probabilities.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, PROB_TOL)
    }

    /// Accepts probabilities whose sum is within `tol` of one and renormalizes them.
    pub fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return validation("a probability space needs at least one outcome");
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0 && **p <= 1.0 + tol)) {
            return validation(format!("probability {p} is not in (0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return validation(format!("probabilities sum to {sum}, not 1"));
        }
        let probs: Vec<f64> = if sum == 1.0 { probs } else { probs.iter().map(|p| p / sum).collect() };
        Ok(FiniteSpace { probs: probs.into() })
    }

    /// Builds a space from positive weights by normalizing them.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return validation("weights must be positive and finite");
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::with_tolerance(probs, 1e-9)
    }

    /// The uniform space on `n` outcomes.
    ///
    /// # Panics
    /// Panics when `n == 0`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform space needs n >= 1");
        FiniteSpace { probs: vec![1.0 / n as f64; n].into() }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.probs.iter().all(|p| (p - u).abs() <= PROB_TOL)
    }

    pub(crate) fn check_same(&self, other: &FiniteSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(RiskError::SpaceMismatch(format!("spaces with {} and {} outcomes differ", self.len(), other.len())))
        }
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.probs, &other.probs) || self.probs == other.probs
    }
}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("FiniteSpace").field(&self.probs).finish()
    }
}

/// A random variable: one finite value per outcome of a [`FiniteSpace`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RvRepr", into = "RvRepr")]
pub struct Rv {
    space: FiniteSpace,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RvRepr {
    probabilities: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RvRepr> for Rv {
    type Error = RiskError;
    fn try_from(r: RvRepr) -> Result<Self> {
        Rv::new(FiniteSpace::new(r.probabilities)?, r.values)
    }
}

impl From<Rv> for RvRepr {
    fn from(x: Rv) -> Self {
        RvRepr { probabilities: x.space.probs.to_vec(), values: x.values }
    }
}

impl Rv {
    pub fn new(space: FiniteSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(RiskError::SpaceMismatch(format!(
                "{} values for a space with {} outcomes",
                values.len(),
                space.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return validation(format!("value {v} is not finite"));
        }
        Ok(Rv { space, values })
    }

    /// Uniformly weighted variable with the given values.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return validation("a random variable needs at least one value");
        }
        Rv::new(FiniteSpace::uniform(values.len()), values)
    }

    pub fn constant(space: &FiniteSpace, c: f64) -> Self {
        assert!(c.is_finite(), "constant must be finite");
        Rv { space: space.clone(), values: vec![c; space.len()] }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        self.space.probs()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ess_sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ess_inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |X(ω)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(self.probs()).map(|(v, p)| v * p).sum()
    }

    /// True when every value equals the first.
    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }

    /// Applies `f` outcome by outcome. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Rv {
        let values: Vec<f64> = self.values.iter().map(|v| f(*v)).collect();
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Rv { space: self.space.clone(), values }
    }

    pub fn add_const(&self, c: f64) -> Rv {
        self.map(|v| v + c)
    }

    pub fn scale(&self, lambda: f64) -> Rv {
        self.map(|v| lambda * v)
    }

    pub fn max_const(&self, z: f64) -> Rv {
        self.map(|v| v.max(z))
    }

    /// Combines two variables on the same space outcome by outcome.
    pub fn zip_with(&self, other: &Rv, f: impl Fn(f64, f64) -> f64) -> Result<Rv> {
        self.space.check_same(&other.space)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Rv { space: self.space.clone(), values })
    }

    pub fn add(&self, other: &Rv) -> Result<Rv> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Rv) -> Result<Rv> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `λX + (1-λ)Y`.
    pub fn mix(&self, other: &Rv, lambda: f64) -> Result<Rv> {
        self.zip_with(other, |a, b| lambda * a + (1.0 - lambda) * b)
    }

    /// `max_ω |X(ω) - Y(ω)|`.
    pub fn sup_distance(&self, other: &Rv) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `X ≤ Y` outcome by outcome.
    pub fn le(&self, other: &Rv) -> Result<bool> {
        self.space.check_same(&other.space)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    /// Reorders values: outcome `i` takes the value of outcome `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Rv> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
            return domain("not a permutation of the outcomes");
        }
        let values = perm.iter().map(|&j| self.values[j]).collect();
        Ok(Rv { space: self.space.clone(), values })
    }

    /// Block averages `E[X | partition]`, where `blocks[i]` labels outcome `i`.
    pub fn conditional_expectation(&self, blocks: &[usize]) -> Result<Rv> {
        if blocks.len() != self.len() {
            return domain("partition labels must cover every outcome");
        }
        let k = blocks.iter().copied().max().map_or(0, |m| m + 1);
        let mut mass = vec![0.0; k];
        let mut total = vec![0.0; k];
        for ((b, v), p) in blocks.iter().zip(&self.values).zip(self.probs()) {
            mass[*b] += p;
            total[*b] += p * v;
        }
        let values = blocks.iter().map(|b| total[*b] / mass[*b]).collect();
        Ok(Rv { space: self.space.clone(), values })
    }
}

impl fmt::Debug for Rv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.space.is_uniform() {
            write!(f, "Rv(uniform {:?})", self.values)
        } else {
            write!(f, "Rv(p={:?}, x={:?})", self.space.probs(), self.values)
        }
    }
}

/// A probability vector over the outcomes of a finite space (zeros allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = RiskError;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        ProbabilityVector::new(w)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(q: ProbabilityVector) -> Self {
        q.weights
    }
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && (0.0..=1.0).contains(w))) {
            return validation("probability weights must lie in [0, 1]");
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return validation(format!("probability weights sum to {sum}, not 1"));
        }
        Ok(ProbabilityVector { weights })
    }

    pub fn dirac(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        ProbabilityVector { weights }
    }

    pub fn of_space(space: &FiniteSpace) -> Self {
        ProbabilityVector { weights: space.probs().to_vec() }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_dirac(&self) -> Option<usize> {
        let i = self.weights.iter().position(|w| *w == 1.0)?;
        self.weights.iter().enumerate().all(|(j, w)| j == i || *w == 0.0).then_some(i)
    }

    /// `E_Q[X]`.
    pub fn expectation(&self, x: &Rv) -> Result<f64> {
        if x.len() != self.len() {
            return Err(RiskError::SpaceMismatch(format!(
                "probability vector of length {} against a variable with {} outcomes",
                self.len(),
                x.len()
            )));
        }
        Ok(self.weights.iter().zip(x.values()).map(|(q, v)| q * v).sum())
    }

    /// All vectors `k/res` on the simplex of dimension `n`, in lexicographic order.
    pub fn simplex_grid(n: usize, res: usize) -> Vec<ProbabilityVector> {
        let mut out = Vec::new();
        let mut counts = vec![0usize; n];
        fn rec(i: usize, left: usize, res: usize, counts: &mut Vec<usize>, out: &mut Vec<ProbabilityVector>) {
            let n = counts.len();
            if i == n - 1 {
                counts[i] = left;
                let weights = counts.iter().map(|c| *c as f64 / res as f64).collect();
                out.push(ProbabilityVector { weights });
                return;
            }
            for c in 0..=left {
                counts[i] = c;
                rec(i + 1, left - c, res, counts, out);
            }
        }
        if n > 0 && res > 0 {
            rec(0, res, res, &mut counts, &mut out);
        }
        out
    }
}
