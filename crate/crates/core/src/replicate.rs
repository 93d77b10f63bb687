//! Named replication suites with fixed instances and seeded random batches.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::axioms::{check_axiom, Axiom, Case, CheckConfig};
use crate::error::{input, Result};
use crate::ext_real::ExtReal;
use crate::infconv::{infconv_bruteforce, infconv_comonotone, BruteForceOptions, ComonotoneOptions};
use crate::measures::{
    alpha_meu_ce, capped_mean, es, lambda_value_at_risk, lambda_var, put_premium, rdeu_ce, two_level_lambda_var, var,
    AlphaMeuParams, DistortionFn, LambdaFn, LambdaMode, QSpec, RdeuParams, RiskFunctional, ScalarFn,
};
use crate::portfolio::{lambda_feasible, FeasibilityMode, ScenarioMatrix, Weights};
use crate::prob::{FiniteSpace, Rv};
use crate::rng::trial_rng;

pub const SUITES: [&str; 6] = [
    "lambda-var-representation",
    "remark-star-shapedness",
    "quasi-convexity-failure",
    "cash-subadditivity",
    "constraint-reduction",
    "infconv",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub id: String,
    pub passed: bool,
    /// Human-readable findings, one per line.
    pub lines: Vec<String>,
    pub data: Value,
}

/// Runs one suite; every random choice derives from `seed`.
pub fn run_suite(id: &str, seed: u64) -> Result<SuiteReport> {
    let (passed, lines, data) = match id {
        "lambda-var-representation" => representation(seed)?,
        "remark-star-shapedness" => star_shapedness(seed)?,
        "quasi-convexity-failure" => quasi_convexity_failure(seed)?,
        "cash-subadditivity" => cash_subadditivity(seed)?,
        "constraint-reduction" => constraint_reduction(seed)?,
        "infconv" => inf_convolution()?,
        _ => return input(format!("unknown suite {id:?}; known suites: {}, all", SUITES.join(", "))),
    };
    Ok(SuiteReport { id: id.to_string(), passed, lines, data })
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|id| run_suite(id, seed)).collect()
}

type Outcome = (bool, Vec<String>, Value);

fn draw_space(rng: &mut ChaCha8Rng) -> FiniteSpace {
    let n = rng.gen_range(1..=6);
    if rng.gen_bool(0.5) {
        FiniteSpace::uniform(n)
    } else {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        FiniteSpace::from_weights(&w).expect("positive weights")
    }
}

fn draw_value(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        (rng.gen_range(-3.0..=3.0f64) * 2.0).round() / 2.0
    } else {
        rng.gen_range(-3.0..3.0)
    }
}

fn draw_rv(rng: &mut ChaCha8Rng, space: &FiniteSpace) -> Rv {
    let v = (0..space.len()).map(|_| draw_value(rng)).collect();
    Rv::new(space.clone(), v).expect("length matches")
}

fn draw_lambda(rng: &mut ChaCha8Rng) -> LambdaFn {
    let k = rng.gen_range(0..=4);
    let mut bps: Vec<f64> = (0..k).map(|_| draw_value(rng)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut vals: Vec<f64> = (0..=bps.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals[0] = vals[0].max(0.05);
    LambdaFn::new(bps, vals).expect("nonincreasing levels")
}

fn representation(seed: u64) -> Result<Outcome> {
    const N: u64 = 500;
    let mut agree = 0;
    let mut worst = 0.0f64;
    for i in 0..N {
        let mut rng = trial_rng(seed, i);
        let s = draw_space(&mut rng);
        let x = draw_rv(&mut rng, &s);
        let lam = draw_lambda(&mut rng);
        let p = lambda_value_at_risk(&x, &lam, LambdaMode::Primal);
        let inf = lambda_value_at_risk(&x, &lam, LambdaMode::InfEnvelope);
        let sup = lambda_value_at_risk(&x, &lam, LambdaMode::SupEnvelope);
        let gap = p.distance(inf).max(p.distance(sup));
        worst = worst.max(gap);
        if gap <= 1e-9 {
            agree += 1;
        }
    }
    let line = format!("primal, inf-envelope and sup-envelope agree on {agree}/{N} instances (max gap {worst:e})");
    Ok((agree == N, vec![line], json!({"instances": N, "agree": agree, "max_gap": worst})))
}

fn star_shapedness(seed: u64) -> Result<Outcome> {
    let rho = lambda_var(LambdaFn::step(1.0, 1.0, 0.0)?, LambdaMode::Primal);
    let s = FiniteSpace::uniform(1);
    let table: Vec<(f64, f64)> =
        (-8..=12).map(|k| k as f64 * 0.25).map(|c| (c, rho.value(&Rv::constant(&s, c)).to_f64())).collect();
    let capped = table.iter().all(|(c, v)| *v == c.min(1.0));

    let case = Case::Star { x: Rv::constant(&s, 2.0), t: 0.0, lambda: 0.5 };
    let star = check_axiom(Axiom::StarShapedness, &rho, &CheckConfig::default().with_seed(seed).with_case(case))?;
    let w = star.witness.clone();
    let witness_ok = w.as_ref().is_some_and(|w| w.lhs == ExtReal::Finite(1.0) && w.rhs == ExtReal::Finite(0.5));
    let qs =
        check_axiom(Axiom::QuasiStarShapedness, &rho, &CheckConfig::default().with_seed(seed).with_trials(10_000))?;

    let lines = vec![
        format!("value at constants equals min(c, 1) on {} grid points: {capped}", table.len()),
        format!(
            "value(1) = {} > 0.5 * value(2) + 0.5 * value(0) = {}: star-shapedness {:?}",
            rho.value(&Rv::constant(&s, 1.0)),
            w.as_ref().map_or(ExtReal::NegInf, |w| w.rhs),
            star.verdict
        ),
        format!("quasi-star-shapedness over {} trials: {:?}", qs.trials, qs.verdict),
    ];
    let data = json!({
        "constants": table.iter().map(|(c, v)| json!({"c": c, "value": v})).collect::<Vec<_>>(),
        "star_shapedness": star,
        "quasi_star_shapedness": qs,
    });
    Ok((capped && witness_ok && !star.passed() && qs.passed(), lines, data))
}

fn quasi_convexity_failure(seed: u64) -> Result<Outcome> {
    let x = Rv::uniform(vec![-2.0, -1.0, 1.0, 2.0])?;
    let y = x.scale(-1.0);
    let rho = var(1.0 / 3.0)?;
    let case = Case::Mix { x, y, lambda: 0.5 };
    let rep = check_axiom(Axiom::QuasiConvexity, &rho, &CheckConfig::default().with_seed(seed).with_case(case))?;
    let ok = rep.witness.as_ref().is_some_and(|w| w.lhs == ExtReal::Finite(0.0) && w.rhs == ExtReal::Finite(-1.0));
    let lines = vec![format!(
        "var(1/3) of the midpoint is {} against max of the endpoints {}: {:?}",
        rep.witness.as_ref().map_or(ExtReal::NegInf, |w| w.lhs),
        rep.witness.as_ref().map_or(ExtReal::NegInf, |w| w.rhs),
        rep.verdict
    )];
    let data = serde_json::to_value(&rep)?;
    Ok((ok && !rep.passed(), lines, data))
}

fn ambiguity_functionals() -> Result<Vec<RiskFunctional>> {
    let meu = AlphaMeuParams {
        alpha: 0.4,
        gamma: 0.7,
        lambdas: vec![0.5, 1.0],
        q1: vec![QSpec::Reference, QSpec::Tilt { k: -1.0 }],
        q2: vec![QSpec::Reference, QSpec::Tilt { k: 1.0 }],
    };
    let rdeu = RdeuParams {
        ell: ScalarFn::Exponential { gamma: 0.5 },
        alpha: 0.5,
        t1: DistortionFn::Power { p: 2.0 },
        t2: DistortionFn::Power { p: 0.5 },
        lambdas: vec![0.5, 1.0],
    };
    Ok(vec![alpha_meu_ce(meu, None)?, rdeu_ce(rdeu)?])
}

fn cash_subadditivity(seed: u64) -> Result<Outcome> {
    let mut family = vec![two_level_lambda_var(0.25, 0.75, 0.0)?, put_premium()];
    family.extend(ambiguity_functionals()?);
    let cfg = CheckConfig::default().with_seed(seed).with_trials(10_000);
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for f in &family {
        let cs = check_axiom(Axiom::CashSubadditivity, f, &cfg)?;
        let ca = check_axiom(Axiom::CashAdditivity, f, &cfg)?;
        ok &= cs.passed() && !ca.passed();
        lines.push(format!("{}: cash subadditivity {:?}, cash additivity {:?}", f.name(), cs.verdict, ca.verdict));
        rows.push(json!({"measure": f.name(), "cash_subadditivity": cs, "cash_additivity": ca}));
    }
    Ok((ok, lines, Value::Array(rows)))
}

fn constraint_reduction(seed: u64) -> Result<Outcome> {
    const N: u64 = 500;
    let mut agree = 0;
    for i in 0..N {
        let mut rng = trial_rng(seed, i);
        let s = draw_space(&mut rng);
        let k = rng.gen_range(1..=3);
        let losses: Vec<Vec<f64>> = (0..s.len()).map(|_| (0..k).map(|_| draw_value(&mut rng)).collect()).collect();
        let l = ScenarioMatrix::new(s, (0..k).map(|j| format!("a{j}")).collect(), losses)?;
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|r| r / total).collect();
        w[k - 1] = 1.0 - w[..k - 1].iter().sum::<f64>();
        let w = Weights::new(w)?;
        let lam = draw_lambda(&mut rng);
        let z = draw_value(&mut rng);
        if lambda_feasible(&lam, z, &l, &w, FeasibilityMode::Primal)?
            == lambda_feasible(&lam, z, &l, &w, FeasibilityMode::Reduced)?
        {
            agree += 1;
        }
    }
    let line = format!("primal and reduced feasibility agree on {agree}/{N} instances");
    Ok((agree == N, vec![line], json!({"instances": N, "agree": agree})))
}

fn inf_convolution() -> Result<Outcome> {
    let rhos = [es(0.25)?, es(0.75)?];
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for values in [vec![0.0, 1.0], vec![0.0, 0.25, 0.5, 1.0]] {
        let x = Rv::uniform(values)?;
        let brute = infconv_bruteforce(&rhos, &x, &BruteForceOptions::default())?;
        let como = infconv_comonotone(&rhos, &x, &ComonotoneOptions::default())?;
        let tol = brute.grid_tolerance + como.grid_tolerance;
        let gap = brute.value.distance(como.value);
        ok &= gap <= tol && tol <= 0.05;
        lines.push(format!(
            "n = {}: brute force {}, comonotone {}, gap {gap:.3e} within combined tolerance {tol:.3e}",
            x.len(),
            brute.value,
            como.value
        ));
        rows.push(json!({"x": x.values(), "bruteforce": brute.value, "comonotone": como.value, "tolerance": tol}));
    }
    let floor = capped_mean(0.0)?;
    let zero = Rv::constant(&FiniteSpace::uniform(2), 0.0);
    let div = infconv_bruteforce(&[floor.clone(), floor], &zero, &BruteForceOptions::default())?;
    ok &= div.diverged;
    lines.push(format!("min(mean, 0) convolved with itself at 0: {} (diverged: {})", div.value, div.diverged));
    Ok((ok, lines, json!({"pairs": rows, "divergence": {"value": div.value, "diverged": div.diverged}})))
}
