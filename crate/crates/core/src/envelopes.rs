//! Lower-envelope representations: dominating families `ρ_Z`, `ρ̃_Z`, `ψ_Z`, `φ_Z` and the
//! acceptance-set form, with verification of the envelope equalities.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axioms::{check_axiom, Axiom, CheckConfig, CheckReport, Verdict};
use crate::error::{input, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::measures::RiskFunctional;
use crate::prob::{merged_breakpoints, ProbabilityVector, QuantileCurve, Rv};

/// The dominating family a member belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemberKind {
    #[serde(rename = "rho_Z")]
    RhoZ,
    #[serde(rename = "tilde_rho_Z")]
    TildeRhoZ,
    #[serde(rename = "psi_Z_ssd")]
    PsiZSsd,
    #[serde(rename = "phi_Z_fsd")]
    PhiZFsd,
    #[serde(rename = "monetary_acceptance")]
    MonetaryAcceptance,
}

impl MemberKind {
    pub const ALL: [MemberKind; 5] = [
        MemberKind::RhoZ,
        MemberKind::TildeRhoZ,
        MemberKind::PsiZSsd,
        MemberKind::PhiZFsd,
        MemberKind::MonetaryAcceptance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MemberKind::RhoZ => "rho_Z",
            MemberKind::TildeRhoZ => "tilde_rho_Z",
            MemberKind::PsiZSsd => "psi_Z_ssd",
            MemberKind::PhiZFsd => "phi_Z_fsd",
            MemberKind::MonetaryAcceptance => "monetary_acceptance",
        }
    }

    /// Axioms the base measure needs for the envelope equality to hold.
    pub fn preconditions(self) -> &'static [Axiom] {
        match self {
            MemberKind::RhoZ => &[Axiom::Monotonicity, Axiom::CashSubadditivity],
            MemberKind::TildeRhoZ => &[Axiom::QuasiNormalization, Axiom::QuasiStarShapedness, Axiom::CashSubadditivity],
            MemberKind::PsiZSsd => &[Axiom::SsdConsistency, Axiom::CashSubadditivity],
            MemberKind::PhiZFsd => &[Axiom::LawInvariance, Axiom::CashSubadditivity],
            MemberKind::MonetaryAcceptance => &[Axiom::CashAdditivity],
        }
    }

    /// Axioms each member is expected to satisfy.
    pub fn member_axioms(self) -> &'static [Axiom] {
        match self {
            MemberKind::RhoZ | MemberKind::TildeRhoZ | MemberKind::PsiZSsd => {
                &[Axiom::QuasiConvexity, Axiom::CashSubadditivity]
            }
            MemberKind::PhiZFsd | MemberKind::MonetaryAcceptance => &[Axiom::CashSubadditivity],
        }
    }
}

impl FromStr for MemberKind {
    type Err = RiskError;
    fn from_str(s: &str) -> Result<Self> {
        MemberKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| RiskError::Input(format!("unknown envelope kind {s:?}")))
    }
}

fn value(rho: &RiskFunctional, x: &Rv) -> ExtReal {
    rho.value(x)
}

/// `X ↦ ρ(Z + ess-sup(X - Z))`.
pub fn rho_z_envelope(rho: &RiskFunctional, z: &Rv) -> RiskFunctional {
    let (rho, z) = (rho.clone(), z.clone());
    let space = z.space().clone();
    RiskFunctional::new(format!("rho_Z[{}]", rho.name()), move |x| {
        let c = x.values().iter().zip(z.values()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        value(&rho, &z.add_const(c))
    })
    .with_claims(&[Axiom::Monotonicity, Axiom::QuasiConvexity, Axiom::CashSubadditivity])
    .on_space(space)
}

/// `sup_{t∈[0,1]} ES_t(X) - ES_t(Z)`, exact on the merged breakpoint grid.
pub fn es_gap(x: &Rv, z: &Rv) -> f64 {
    let (cx, cz) = (QuantileCurve::of(x), QuantileCurve::of(z));
    let mut best = cx.ess_sup() - cz.ess_sup();
    for t in std::iter::once(0.0).chain(merged_breakpoints(&cx, &cz)) {
        if t < 1.0 {
            best = best.max((cx.tail_integral(t) - cz.tail_integral(t)) / (1.0 - t));
        }
    }
    best
}

/// `sup_{t∈(0,1)} VaR_t(X) - VaR_t(Z)`, exact on the merged breakpoint grid.
pub fn var_gap(x: &Rv, z: &Rv) -> f64 {
    let (cx, cz) = (QuantileCurve::of(x), QuantileCurve::of(z));
    merged_breakpoints(&cx, &cz)
        .into_iter()
        .map(|l| cx.level_value(l) - cz.level_value(l))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `X ↦ ρ(Z + sup_t (ES_t(X) - ES_t(Z)))`.
pub fn psi_z_ssd_envelope(rho: &RiskFunctional, z: &Rv) -> RiskFunctional {
    let (rho, z) = (rho.clone(), z.clone());
    let space = z.space().clone();
    RiskFunctional::new(format!("psi_Z[{}]", rho.name()), move |x| value(&rho, &z.add_const(es_gap(x, &z))))
        .with_claims(&[
            Axiom::Monotonicity,
            Axiom::QuasiConvexity,
            Axiom::CashSubadditivity,
            Axiom::LawInvariance,
            Axiom::SsdConsistency,
        ])
        .on_space(space)
}

/// `X ↦ ρ(Z + sup_t (VaR_t(X) - VaR_t(Z)))`. Not quasi-convex in general.
pub fn phi_z_fsd_envelope(rho: &RiskFunctional, z: &Rv) -> RiskFunctional {
    let (rho, z) = (rho.clone(), z.clone());
    let space = z.space().clone();
    RiskFunctional::new(format!("phi_Z[{}]", rho.name()), move |x| value(&rho, &z.add_const(var_gap(x, &z))))
        .with_claims(&[Axiom::Monotonicity, Axiom::CashSubadditivity, Axiom::LawInvariance, Axiom::FsdConsistency])
        .on_space(space)
}

/// `X ↦ ess-sup(X - Z)` for an acceptable `Z`.
pub fn acceptance_member(z: &Rv) -> RiskFunctional {
    let z = z.clone();
    let space = z.space().clone();
    RiskFunctional::new("acceptance_member", move |x| {
        ExtReal::Finite(x.values().iter().zip(z.values()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max))
    })
    .with_claims(&[Axiom::Monotonicity, Axiom::CashAdditivity, Axiom::Convexity, Axiom::QuasiConvexity])
    .on_space(space)
}

/// `sup{m : ρ(Z+m) = t}` on a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLevel {
    pub value: ExtReal,
    /// The level `t` is not attained; `value` is the limit of the bisection.
    pub limit_only: bool,
}

const M_TOL: f64 = 1e-9;
const PLATEAU_TOL: f64 = 1e-9;
const PLATEAU_WIDENINGS: usize = 8;

/// Supremum of the level set `{m : ρ(Z+m) = t}` by bisection.
///
/// Returns `-∞` when `t` lies outside the values of `m ↦ ρ(Z+m)` on the bracket and `+∞` when a
/// plateau at `t` survives repeated widening of the upper end.
pub fn m_of(rho: &RiskFunctional, z: &Rv, t: f64, bracket: (f64, f64)) -> Result<MLevel> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !t.is_finite() {
        return input("m_of needs a finite bracket with lo < hi and a finite level");
    }
    let h = |m: f64| value(rho, &z.add_const(m)).to_f64();
    let below = |m: f64| h(m) <= t + PLATEAU_TOL;
    let neg_inf = MLevel { value: ExtReal::NegInf, limit_only: false };
    let top = h(hi);
    if (top - t).abs() <= PLATEAU_TOL {
        let width = hi - lo;
        let mut k = 0;
        loop {
            if k == PLATEAU_WIDENINGS {
                return Ok(MLevel { value: ExtReal::PosInf, limit_only: false });
            }
            let wider = hi + width * 2f64.powi(k as i32 + 1);
            if !below(wider) {
                lo = hi;
                hi = wider;
                break;
            }
            k += 1;
        }
    } else if top < t {
        return Ok(neg_inf);
    }
    if !below(lo) {
        return Ok(neg_inf);
    }
    while hi - lo > M_TOL {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let limit_only = (h(lo) - t).abs() > 1e-6;
    Ok(MLevel { value: ExtReal::Finite(lo), limit_only })
}

/// The λ grid for `ρ̃_Z`: 101 equally spaced points of `[0, 1]`.
pub fn tilde_lambda_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// Smallest `m` with `g(m) ≥ c` for increasing `g`, by bracketed regula falsi with periodic bisection.
fn first_crossing(g: impl Fn(f64) -> f64, c: f64, scale: f64) -> f64 {
    let mut hi = scale.max(1.0);
    let mut lo = -hi;
    let mut n = 0;
    while g(hi) < c {
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return f64::INFINITY;
        }
    }
    n = 0;
    while g(lo) >= c {
        lo *= 2.0;
        n += 1;
        if n > 200 {
            return f64::NEG_INFINITY;
        }
    }
    let (mut fa, mut fb) = (g(lo) - c, g(hi) - c);
    let mut side = 0i8;
    for k in 0..300 {
        if hi - lo <= M_TOL * hi.abs().max(1.0) || fb <= 1e-13 {
            break;
        }
        let secant = if fa.is_finite() && fb.is_finite() { (lo * fb - hi * fa) / (fb - fa) } else { f64::NAN };
        let m = if k % 3 == 2 || !(secant > lo && secant < hi) { 0.5 * (lo + hi) } else { secant };
        let fm = g(m) - c;
        if fm >= 0.0 {
            hi = m;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            lo = m;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    hi
}

/// `inf{t : X ≤ λ(Z + m_Z(t)) + (1-λ)t}` for one `λ > 0`, written in terms of `m`:
/// the minimal `m` with `λm + (1-λ)ρ(Z+m) ≥ max(X - λZ)` gives `t = ρ(Z+m)`.
fn tilde_at_lambda(rho: &RiskFunctional, z: &Rv, x: &Rv, lambda: f64) -> ExtReal {
    if lambda == 0.0 {
        return ExtReal::Finite(x.ess_sup());
    }
    let c = x.values().iter().zip(z.values()).map(|(a, b)| a - lambda * b).fold(f64::NEG_INFINITY, f64::max);
    let h = |m: f64| value(rho, &z.add_const(m)).to_f64();
    let g = |m: f64| lambda * m + (1.0 - lambda) * h(m);
    let m = first_crossing(g, c, z.sup_norm() + c.abs() + 1.0);
    if m.is_finite() {
        ExtReal::new(h(m))
    } else {
        ExtReal::new(m)
    }
}

/// `ρ̃_Z(X)` as the minimum over the λ grid.
pub fn tilde_value(rho: &RiskFunctional, z: &Rv, x: &Rv, lambdas: &[f64]) -> ExtReal {
    lambdas.iter().map(|l| tilde_at_lambda(rho, z, x, *l)).min().unwrap_or(ExtReal::PosInf)
}

/// The `ρ̃_Z` member on the default λ grid.
pub fn tilde_rho_z_envelope(rho: &RiskFunctional, z: &Rv) -> RiskFunctional {
    let (rho, z) = (rho.clone(), z.clone());
    let space = z.space().clone();
    let lambdas = tilde_lambda_grid();
    RiskFunctional::new(format!("tilde_rho_Z[{}]", rho.name()), move |x| tilde_value(&rho, &z, x, &lambdas))
        .with_claims(&[Axiom::Monotonicity, Axiom::QuasiConvexity, Axiom::CashSubadditivity, Axiom::Normalization])
        .on_space(space)
}

/// `ρ̃_Z(X)` straight from the definition: bisection on `t` per λ, with `m_Z(t)` from [`m_of`].
///
/// Much slower than [`tilde_value`]; used as an independent cross-check. The bisection needs the
/// accepted levels to form an interval reaching the top of `t_bracket`, so `ρ(Z+m)` should be
/// unbounded above in `m`.
pub fn tilde_value_by_definition(
    rho: &RiskFunctional,
    z: &Rv,
    x: &Rv,
    lambdas: &[f64],
    t_bracket: (f64, f64),
    m_bracket: (f64, f64),
) -> Result<ExtReal> {
    let mut best = ExtReal::PosInf;
    for &lambda in lambdas {
        if lambda == 0.0 {
            best = best.min(ExtReal::Finite(x.ess_sup()));
            continue;
        }
        let accepts = |t: f64| -> Result<bool> {
            Ok(match m_of(rho, z, t, m_bracket)?.value {
                ExtReal::PosInf => true,
                ExtReal::NegInf => false,
                ExtReal::Finite(m) => x
                    .values()
                    .iter()
                    .zip(z.values())
                    .all(|(xv, zv)| *xv <= lambda * (zv + m) + (1.0 - lambda) * t + 1e-12),
            })
        };
        let (mut lo, mut hi) = t_bracket;
        if !accepts(hi)? {
            continue;
        }
        if accepts(lo)? {
            best = best.min(ExtReal::Finite(lo));
            continue;
        }
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if accepts(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = best.min(ExtReal::Finite(hi));
    }
    Ok(best)
}

/// A member of a dominating family.
#[derive(Debug, Clone)]
pub struct EnvelopeMember {
    pub kind: MemberKind,
    pub anchor: Rv,
    pub base: RiskFunctional,
    functional: RiskFunctional,
}

impl EnvelopeMember {
    pub fn build(kind: MemberKind, base: &RiskFunctional, anchor: &Rv) -> Result<Self> {
        let functional = match kind {
            MemberKind::RhoZ => rho_z_envelope(base, anchor),
            MemberKind::TildeRhoZ => tilde_rho_z_envelope(base, anchor),
            MemberKind::PsiZSsd => psi_z_ssd_envelope(base, anchor),
            MemberKind::PhiZFsd => phi_z_fsd_envelope(base, anchor),
            MemberKind::MonetaryAcceptance => {
                if base.evaluate(anchor)? > ExtReal::ZERO {
                    return Err(RiskError::Precondition("anchor is not in the acceptance set".into()));
                }
                acceptance_member(anchor)
            }
        };
        Ok(EnvelopeMember { kind, anchor: anchor.clone(), base: base.clone(), functional })
    }

    pub fn functional(&self) -> &RiskFunctional {
        &self.functional
    }

    pub fn evaluate(&self, x: &Rv) -> Result<ExtReal> {
        self.functional.evaluate(x)
    }
}

/// Options for [`verify_envelope`].
#[derive(Debug, Clone)]
pub struct EnvelopeOptions {
    /// Configuration for the precondition checks on the base measure.
    pub precondition_cfg: CheckConfig,
    /// When set, each member is spot-checked for its expected axioms.
    pub member_cfg: Option<CheckConfig>,
    /// Tolerance of the equality and dominance comparisons.
    pub tolerance: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions { precondition_cfg: CheckConfig::default(), member_cfg: None, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberCheck {
    pub anchor: usize,
    pub axiom: Axiom,
    pub verdict: Verdict,
}

/// Result of verifying `ρ(X) = min over anchors of member(X)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub kind: MemberKind,
    pub base: String,
    pub target: ExtReal,
    pub min_value: ExtReal,
    pub attaining_anchor: usize,
    pub per_anchor: Vec<ExtReal>,
    pub equality: bool,
    pub dominance: bool,
    pub tolerance: f64,
    pub preconditions_met: bool,
    pub preconditions: Vec<CheckReport>,
    pub label: Option<String>,
    pub member_checks: Vec<MemberCheck>,
}

impl EnvelopeReport {
    pub fn holds(&self) -> bool {
        self.equality && self.dominance
    }
}

pub const PRECONDITIONS_VIOLATED: &str = "preconditions violated; equality not guaranteed";

/// Evaluates the members built on `anchors` at `x` and compares their minimum with `ρ(x)`.
///
/// For the attainment kinds `x` must be among the anchors. For the acceptance form each
/// anchor `W` is shifted to `W - ρ(W)` and `x - ρ(x)` is placed first.
pub fn verify_envelope(
    rho: &RiskFunctional,
    kind: MemberKind,
    x: &Rv,
    anchors: &[Rv],
    opts: &EnvelopeOptions,
) -> Result<EnvelopeReport> {
    for a in anchors {
        if a.space() != x.space() {
            return Err(RiskError::SpaceMismatch("anchors must share the space of X".into()));
        }
    }
    let target = rho.evaluate(x)?;
    let anchors: Vec<Rv> = if kind == MemberKind::MonetaryAcceptance {
        let shift = |w: &Rv| -> Result<Rv> {
            match rho.evaluate(w)?.finite() {
                Some(r) => Ok(w.add_const(-r)),
                None => Err(RiskError::Precondition("ρ must be finite on the anchors".into())),
            }
        };
        std::iter::once(shift(x)).chain(anchors.iter().map(shift)).collect::<Result<_>>()?
    } else {
        if !anchors.contains(x) {
            return input("the anchor family must contain X");
        }
        anchors.to_vec()
    };

    let preconditions: Vec<CheckReport> =
        kind.preconditions().iter().map(|a| check_axiom(*a, rho, &opts.precondition_cfg)).collect::<Result<_>>()?;
    let preconditions_met = preconditions.iter().all(CheckReport::passed);
    if kind == MemberKind::MonetaryAcceptance && !preconditions_met {
        return Err(RiskError::Precondition("the acceptance representation needs a cash-additive ρ".into()));
    }

    let members: Vec<EnvelopeMember> =
        anchors.iter().map(|z| EnvelopeMember::build(kind, rho, z)).collect::<Result<_>>()?;
    let per_anchor: Vec<ExtReal> = members.par_iter().map(|m| m.functional.value(x)).collect();
    let (attaining_anchor, min_value) = per_anchor
        .iter()
        .copied()
        .enumerate()
        .fold((0, ExtReal::PosInf), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
    let tol = opts.tolerance;
    let equality = min_value.distance(target) <= tol;
    let dominance = per_anchor.iter().all(|v| v.checked_sub(target).is_none_or(|d| d >= ExtReal::Finite(-tol)));

    let mut member_checks = Vec::new();
    if let Some(cfg) = &opts.member_cfg {
        for (i, m) in members.iter().enumerate() {
            for &a in kind.member_axioms() {
                let r = check_axiom(a, &m.functional, cfg)?;
                member_checks.push(MemberCheck { anchor: i, axiom: a, verdict: r.verdict });
            }
        }
    }
    Ok(EnvelopeReport {
        kind,
        base: rho.name().to_string(),
        target,
        min_value,
        attaining_anchor,
        per_anchor,
        equality,
        dominance,
        tolerance: tol,
        preconditions_met,
        preconditions,
        label: (!preconditions_met).then(|| PRECONDITIONS_VIOLATED.to_string()),
        member_checks,
    })
}

/// `max_{Q ∈ grid} E_Q[X]`.
pub fn max_expectation(x: &Rv, grid: &[ProbabilityVector]) -> Result<f64> {
    grid.iter().map(|q| q.expectation(x)).try_fold(f64::NEG_INFINITY, |m, v| Ok(m.max(v?)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualVertexReport {
    pub max_over_grid: f64,
    pub ess_sup: f64,
    pub equal: bool,
}

/// Checks that the maximum of `E_Q[X - Z]` over a grid containing every Dirac vector equals
/// `ess-sup(X - Z)` exactly.
pub fn dual_vertex_identity(x: &Rv, z: &Rv, grid: &[ProbabilityVector]) -> Result<DualVertexReport> {
    let d = x.sub(z)?;
    let n = d.len();
    if grid.iter().any(|q| q.len() != n) {
        return Err(RiskError::SpaceMismatch("grid vectors must match the space".into()));
    }
    if (0..n).any(|i| !grid.iter().any(|q| q.is_dirac() == Some(i))) {
        return input("grid is missing Dirac vectors");
    }
    let max_over_grid = max_expectation(&d, grid)?;
    let ess_sup = d.ess_sup();
    Ok(DualVertexReport { max_over_grid, ess_sup, equal: max_over_grid == ess_sup })
}
