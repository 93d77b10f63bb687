use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};

/// Closed-form or tabulated real functions used as insurance payoffs `f` and loss functions `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    Identity,
    Zero,
    /// `x ↦ max(x, 0)`.
    PositivePart,
    /// `x ↦ min((x - d)_+, l)`.
    DeductibleLimit {
        d: f64,
        l: f64,
    },
    /// `x ↦ exp(γx)`.
    Exponential {
        gamma: f64,
    },
    /// `x ↦ (x_+)^p`.
    Power {
        p: f64,
    },
    /// Linear interpolation through `(xs, ys)`, extended linearly by the end segments.
    PiecewiseLinear {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
}

const SHAPE_TOL: f64 = 1e-12;

impl ScalarFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Identity => x,
            ScalarFn::Zero => 0.0,
            ScalarFn::PositivePart => x.max(0.0),
            ScalarFn::DeductibleLimit { d, l } => (x - d).max(0.0).min(*l),
            ScalarFn::Exponential { gamma } => (gamma * x).exp(),
            ScalarFn::Power { p } => x.max(0.0).powf(*p),
            ScalarFn::PiecewiseLinear { xs, ys } => {
                if xs.len() == 1 {
                    return ys[0];
                }
                let i = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1);
                let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Inverse on the range; `None` where no preimage exists or the map is not invertible.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        match self {
            ScalarFn::Identity => Some(y),
            ScalarFn::Exponential { gamma } => (y > 0.0).then(|| y.ln() / gamma),
            ScalarFn::Power { p } => (y > 0.0).then(|| y.powf(1.0 / p)),
            ScalarFn::PiecewiseLinear { xs, ys } => {
                if xs.len() < 2 || ys.windows(2).any(|w| w[1] <= w[0]) {
                    return None;
                }
                let i = ys.partition_point(|v| *v <= y).clamp(1, ys.len() - 1);
                let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
                Some(x0 + (x1 - x0) * (y - y0) / (y1 - y0))
            }
            _ => None,
        }
    }

    /// Checks the parameters of the closed forms and the table shape.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                validation(format!("{what} must be finite"))
            }
        };
        match self {
            ScalarFn::DeductibleLimit { d, l } => {
                finite(*d, "deductible")?;
                finite(*l, "limit")?;
                if *d < 0.0 || *l < 0.0 {
                    return validation("deductible and limit must be nonnegative");
                }
            }
            ScalarFn::Exponential { gamma } => {
                if !(gamma.is_finite() && *gamma > 0.0) {
                    return validation("exponential rate must be positive");
                }
            }
            ScalarFn::Power { p } => {
                if !(p.is_finite() && *p > 0.0) {
                    return validation("power exponent must be positive");
                }
            }
            ScalarFn::PiecewiseLinear { xs, ys } => {
                if xs.is_empty() || xs.len() != ys.len() {
                    return validation("piecewise-linear table needs matching nonempty xs and ys");
                }
                if xs.iter().chain(ys).any(|v| !v.is_finite()) {
                    return validation("piecewise-linear table entries must be finite");
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return validation("piecewise-linear abscissae must be strictly increasing");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Slopes of a piecewise-linear table (the end slopes extend to infinity).
    fn table_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
        if xs.len() == 1 {
            return vec![0.0];
        }
        xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect()
    }

    /// Globally checks that the map is an insurance payoff: increasing, 1-Lipschitz and
    /// zero on `(-∞, 0]`.
    pub fn validate_payoff(&self) -> Result<()> {
        self.validate()?;
        let ok = match self {
            ScalarFn::Zero | ScalarFn::PositivePart | ScalarFn::DeductibleLimit { .. } => true,
            ScalarFn::PiecewiseLinear { xs, ys } => {
                let slopes = Self::table_slopes(xs, ys);
                let flat_left = slopes[0].abs() <= SHAPE_TOL && self.eval(0.0).abs() <= SHAPE_TOL;
                let left_ok =
                    xs[0] >= 0.0 || xs.iter().zip(ys).filter(|(x, _)| **x <= 0.0).all(|(_, y)| y.abs() <= SHAPE_TOL);
                flat_left && left_ok && slopes.iter().all(|s| *s >= -SHAPE_TOL && *s <= 1.0 + SHAPE_TOL)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            validation("payoff must be increasing, 1-Lipschitz and zero for nonpositive losses")
        }
    }

    /// Checks the payoff shape on a finite set of points (plus 0).
    pub fn validate_payoff_on(&self, support: &[f64]) -> Result<()> {
        self.validate()?;
        let mut pts: Vec<f64> = support.iter().copied().chain(std::iter::once(0.0)).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for x in pts.iter().filter(|x| **x <= 0.0) {
            if self.eval(*x).abs() > SHAPE_TOL {
                return validation(format!("payoff is nonzero at the nonpositive loss {x}"));
            }
        }
        for w in pts.windows(2) {
            let rise = self.eval(w[1]) - self.eval(w[0]);
            if rise < -SHAPE_TOL || rise > (w[1] - w[0]) + SHAPE_TOL {
                return validation(format!("payoff is not increasing and 1-Lipschitz between {} and {}", w[0], w[1]));
            }
        }
        Ok(())
    }

    /// Checks that the map can serve as a loss function: strictly increasing and convex,
    /// with an inverse.
    pub fn validate_loss(&self) -> Result<()> {
        self.validate()?;
        let ok = match self {
            ScalarFn::Identity | ScalarFn::Exponential { .. } => true,
            ScalarFn::Power { p } => *p >= 1.0,
            ScalarFn::PiecewiseLinear { xs, ys } => {
                let s = Self::table_slopes(xs, ys);
                xs.len() >= 2 && s.iter().all(|v| *v > 0.0) && s.windows(2).all(|w| w[1] >= w[0] - SHAPE_TOL)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            validation("loss function must be strictly increasing and convex with an inverse")
        }
    }

    /// Checks strict increase of a loss function on a finite support.
    pub fn validate_loss_on(&self, support: &[f64]) -> Result<()> {
        self.validate_loss()?;
        let mut pts = support.to_vec();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.windows(2).any(|w| self.eval(w[1]) <= self.eval(w[0])) {
            return validation("loss function is not strictly increasing on the support");
        }
        Ok(())
    }
}
