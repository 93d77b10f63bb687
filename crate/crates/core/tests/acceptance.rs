//! Acceptance gate: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskcal::axioms::{check_axiom, check_min_closure, Axiom, Case, CheckConfig, Relation};
use riskcal::envelopes::{verify_envelope, EnvelopeOptions, MemberKind};
use riskcal::infconv::{infconv_bruteforce, infconv_comonotone, BruteForceOptions, ComonotoneOptions};
use riskcal::measures::{
    alpha_meu_ce, capped_mean, entropic, es, expected_transformed_loss, lambda_component_family, lambda_value_at_risk,
    lambda_var, mean, put_premium, rdeu_ce, two_level_lambda_var, var, AcceptanceSet, AlphaMeuParams, DistortionFn,
    EligibleAsset, LambdaFn, LambdaMode, QSpec, RdeuParams, ScalarFn, Side,
};
use riskcal::portfolio::{lambda_feasible, optimize_portfolio, FeasibilityMode, ScenarioMatrix, Weights};
use riskcal::prob::{ssd_dominates, ssd_dominates_with, SsdMode};
use riskcal::{ExtReal, FiniteSpace, RiskFunctional, Rv};

const SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED.wrapping_mul(31).wrapping_add(stream))
}

fn value(rng: &mut ChaCha8Rng, lattice: f64) -> f64 {
    if rng.gen_bool(0.5) {
        (rng.gen_range(-3.0..=3.0f64) / lattice).round() * lattice
    } else {
        rng.gen_range(-3.0..3.0)
    }
}

fn space(rng: &mut ChaCha8Rng, n: usize) -> FiniteSpace {
    if rng.gen_bool(0.5) {
        FiniteSpace::uniform(n)
    } else {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        FiniteSpace::from_weights(&w).unwrap()
    }
}

fn rv(rng: &mut ChaCha8Rng, space: &FiniteSpace, lattice: f64) -> Rv {
    let v = (0..space.len()).map(|_| value(rng, lattice)).collect();
    Rv::new(space.clone(), v).unwrap()
}

fn lattice_rv(rng: &mut ChaCha8Rng, space: &FiniteSpace, step: f64) -> Rv {
    let v = (0..space.len()).map(|_| (rng.gen_range(-3.0..=3.0f64) / step).round() * step).collect();
    Rv::new(space.clone(), v).unwrap()
}

fn random_lambda(rng: &mut ChaCha8Rng) -> LambdaFn {
    let k = rng.gen_range(0..=4);
    let mut bps: Vec<f64> = (0..k).map(|_| value(rng, 0.5)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut vals: Vec<f64> = (0..=bps.len())
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..1.0),
        })
        .collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    if vals[0] == 0.0 {
        vals[0] = 0.5;
    }
    LambdaFn::new(bps, vals).unwrap()
}

fn close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    a.distance(b) <= tol
}

fn c1_lambda_var_routes() -> Outcome {
    let mut agree = 0;
    for i in 0..500 {
        let mut r = rng(100 + i);
        let n = r.gen_range(1..=6);
        let s = space(&mut r, n);
        let x = rv(&mut r, &s, 0.5);
        let lam = random_lambda(&mut r);
        let p = lambda_value_at_risk(&x, &lam, LambdaMode::Primal);
        let inf = lambda_value_at_risk(&x, &lam, LambdaMode::InfEnvelope);
        let sup = lambda_value_at_risk(&x, &lam, LambdaMode::SupEnvelope);
        if close(p, inf, 1e-9) && close(p, sup, 1e-9) {
            agree += 1;
        }
    }
    outcome(agree == 500, format!("{agree}/500 instances agree within 1e-9"))
}

fn c2_star_counterexample() -> Outcome {
    let lam = LambdaFn::step(1.0, 1.0, 0.0).unwrap();
    let rho = lambda_var(lam, LambdaMode::Primal);
    let s = FiniteSpace::uniform(2);
    let consts_ok = (-16..=16).all(|k| {
        let c = k as f64 * 0.25;
        rho.value(&Rv::constant(&s, c)) == ExtReal::Finite(c.min(1.0))
    });
    let case = Case::Star { x: Rv::constant(&s, 2.0), t: 0.0, lambda: 0.5 };
    let star =
        check_axiom(Axiom::StarShapedness, &rho, &CheckConfig::default().with_seed(SEED).with_case(case)).unwrap();
    let witness_ok = star.witness.as_ref().is_some_and(|w| {
        w.trial == 0 && w.lhs == ExtReal::Finite(1.0) && w.rhs == ExtReal::Finite(0.5) && w.replay(&rho, 1e-9)
    });
    let qs = check_axiom(Axiom::QuasiStarShapedness, &rho, &CheckConfig::default().with_seed(SEED).with_trials(10_000))
        .unwrap();
    outcome(
        consts_ok && witness_ok && qs.passed(),
        format!(
            "value(c) = min(c, 1) on 33 constants: {consts_ok}; star witness 1 > 0.5: {witness_ok}; quasi-star over {} trials: {:?}",
            qs.trials, qs.verdict
        ),
    )
}

fn c3_quasi_convexity_failure() -> Outcome {
    let x = Rv::uniform(vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
    let y = x.scale(-1.0);
    let rho = var(1.0 / 3.0).unwrap();
    let cfg = CheckConfig::default().with_seed(7).with_case(Case::Mix { x: x.clone(), y: y.clone(), lambda: 0.5 });
    let rep = check_axiom(Axiom::QuasiConvexity, &rho, &cfg).unwrap();
    let ok = rep.witness.as_ref().is_some_and(|w| {
        w.trial == 0
            && w.case == Case::Mix { x: x.clone(), y: y.clone(), lambda: 0.5 }
            && w.lhs == ExtReal::Finite(0.0)
            && w.rhs == ExtReal::Finite(-1.0)
            && w.relation == Relation::Le
    });
    outcome(!rep.passed() && ok, format!("verdict {:?}; witness lhs 0, rhs -1 at trial 0: {ok}", rep.verdict))
}

fn ambiguity_functionals() -> Vec<RiskFunctional> {
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
    vec![alpha_meu_ce(meu, None).unwrap(), rdeu_ce(rdeu).unwrap()]
}

fn c4_cash_subadditive_not_additive() -> Outcome {
    let mut fs = vec![two_level_lambda_var(0.25, 0.75, 0.0).unwrap(), put_premium()];
    fs.extend(ambiguity_functionals());
    let mut lines = Vec::new();
    let mut ok = true;
    for f in &fs {
        let cs = check_axiom(Axiom::CashSubadditivity, f, &CheckConfig::default().with_seed(SEED).with_trials(10_000))
            .unwrap();
        let ca = check_axiom(Axiom::CashAdditivity, f, &CheckConfig::default().with_seed(SEED)).unwrap();
        let witnessed = ca.witness.as_ref().is_some_and(|w| w.replay(f, 1e-9));
        ok &= cs.passed() && !ca.passed() && witnessed;
        let name = f.name().split(':').next().unwrap_or_default();
        lines.push(format!("{name}: cs {:?}, ca {:?}", cs.verdict, ca.verdict));
    }
    outcome(ok, lines.join("; "))
}

struct AnchorSet {
    shared: Vec<Rv>,
    targets: Vec<Rv>,
}

fn anchor_sets() -> Vec<AnchorSet> {
    [3usize, 4, 5, 6]
        .iter()
        .map(|&n| {
            let mut r = rng(500 + n as u64);
            let s = FiniteSpace::uniform(n);
            let shared = (0..49).map(|_| rv(&mut r, &s, 0.5)).collect();
            let targets = (0..5).map(|_| rv(&mut r, &s, 0.5)).collect();
            AnchorSet { shared, targets }
        })
        .collect()
}

fn envelope_base(kind: MemberKind) -> RiskFunctional {
    match kind {
        MemberKind::RhoZ => {
            lambda_var(LambdaFn::new(vec![-1.0, 0.5, 1.5], vec![0.9, 0.7, 0.4, 0.2]).unwrap(), LambdaMode::Primal)
        }
        MemberKind::PsiZSsd => es(0.5).unwrap(),
        _ => var(0.5).unwrap(),
    }
}

fn c5_lower_envelopes(sets: &[AnchorSet]) -> Outcome {
    let kinds = [MemberKind::RhoZ, MemberKind::TildeRhoZ, MemberKind::PsiZSsd, MemberKind::MonetaryAcceptance];
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in kinds {
        let rho = envelope_base(kind);
        let tol = if kind == MemberKind::TildeRhoZ { 1e-6 } else { 1e-9 };
        let opts = EnvelopeOptions {
            precondition_cfg: CheckConfig::default().with_seed(SEED).with_trials(300),
            member_cfg: None,
            tolerance: tol,
        };
        let mut good = 0;
        for set in sets {
            for x in &set.targets {
                let mut anchors = vec![x.clone()];
                anchors.extend(set.shared.iter().cloned());
                let rep = verify_envelope(&rho, kind, x, &anchors, &opts).unwrap();
                // The anchor built from X itself sits at index 0 in both layouts.
                let attained = close(rep.per_anchor[0], rep.target, tol);
                if rep.holds() && rep.preconditions_met && attained && rep.per_anchor.len() >= 50 {
                    good += 1;
                }
            }
        }
        ok &= good == 20;
        lines.push(format!("{}: {good}/20", kind.as_str()));
    }
    outcome(ok, lines.join("; "))
}

fn c6_member_properties(sets: &[AnchorSet]) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let cfg = CheckConfig::default().with_seed(SEED).with_trials(1000);
    for kind in [MemberKind::RhoZ, MemberKind::PsiZSsd] {
        let rho = envelope_base(kind);
        let (mut total, mut good) = (0, 0);
        for set in sets {
            for z in set.shared.iter().chain(&set.targets) {
                let m = riskcal::envelopes::EnvelopeMember::build(kind, &rho, z).unwrap();
                total += 1;
                let qc = check_axiom(Axiom::QuasiConvexity, m.functional(), &cfg).unwrap();
                let cs = check_axiom(Axiom::CashSubadditivity, m.functional(), &cfg).unwrap();
                good += usize::from(qc.passed() && cs.passed());
            }
        }
        ok &= good == total;
        lines.push(format!("{}: {good}/{total} members pass quasi-convexity and cash subadditivity", kind.as_str()));
    }
    let rho = envelope_base(MemberKind::TildeRhoZ);
    let ncfg = CheckConfig::default().with_seed(SEED).with_trials(20);
    let (mut total, mut good) = (0, 0);
    for set in sets {
        for z in set.shared.iter().chain(&set.targets) {
            let m = riskcal::envelopes::EnvelopeMember::build(MemberKind::TildeRhoZ, &rho, z).unwrap();
            total += 1;
            good += usize::from(check_axiom(Axiom::Normalization, m.functional(), &ncfg).unwrap().passed());
        }
    }
    ok &= good == total;
    lines.push(format!("tilde_rho_Z: {good}/{total} normalized on the constants grid"));
    outcome(ok, lines.join("; "))
}

fn random_partition(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let blocks = r.gen_range(1..=n);
    let mut labels: Vec<usize> = (0..n).map(|i| if i < blocks { i } else { r.gen_range(0..blocks) }).collect();
    labels.shuffle(r);
    labels
}

fn c7_ssd_machinery() -> Outcome {
    let mut agree = 0;
    let mut positives = 0;
    for i in 0..1000 {
        let mut r = rng(2000 + i);
        let n = r.gen_range(1..=6);
        let s = space(&mut r, n);
        let x = rv(&mut r, &s, 0.5);
        let y = match i % 3 {
            0 => {
                let m = r.gen_range(1..=6);
                let t = space(&mut r, m);
                rv(&mut r, &t, 0.5)
            }
            1 => x.conditional_expectation(&random_partition(&mut r, n)).unwrap(),
            _ => x.map(|v| v - 0.25),
        };
        let a = ssd_dominates_with(&x, &y, SsdMode::StopLoss);
        let b = ssd_dominates_with(&x, &y, SsdMode::EsCurve);
        agree += usize::from(a == b);
        positives += usize::from(a);
    }
    let mut coarse = 0;
    for i in 0..1000 {
        let mut r = rng(4000 + i);
        let n = r.gen_range(1..=8);
        let s = space(&mut r, n);
        let x = rv(&mut r, &s, 0.5);
        let y = x.conditional_expectation(&random_partition(&mut r, n)).unwrap();
        coarse += usize::from(ssd_dominates(&x, &y));
    }
    outcome(
        agree == 1000 && coarse == 1000,
        format!("mode agreement {agree}/1000 ({positives} dominating); coarsenings dominated {coarse}/1000"),
    )
}

fn catalog() -> Vec<RiskFunctional> {
    let s = FiniteSpace::uniform(4);
    let st = Rv::new(s.clone(), vec![0.8, 0.9, 1.0, 1.1]).unwrap();
    let eligible = EligibleAsset::new(AcceptanceSet::EsAtMost { t: 0.5, c: 0.0 }, 1.0, st).unwrap().to_functional();
    let mut out = vec![
        var(0.1).unwrap(),
        var(0.5).unwrap(),
        var(0.9).unwrap(),
        es(0.1).unwrap(),
        es(0.5).unwrap(),
        es(0.9).unwrap(),
        mean(),
        entropic(0.5).unwrap(),
        capped_mean(1.0).unwrap(),
        two_level_lambda_var(0.25, 0.75, 0.0).unwrap(),
        lambda_var(LambdaFn::new(vec![-1.0, 0.5, 1.5], vec![0.9, 0.7, 0.4, 0.2]).unwrap(), LambdaMode::Primal),
        put_premium(),
        expected_transformed_loss(ScalarFn::DeductibleLimit { d: 0.5, l: 1.5 }, Side::Insurer, QSpec::Reference, None)
            .unwrap(),
        expected_transformed_loss(
            ScalarFn::DeductibleLimit { d: 0.5, l: 1.5 },
            Side::Policyholder,
            QSpec::Tilt { k: 0.5 },
            None,
        )
        .unwrap(),
        eligible,
    ];
    out.extend(ambiguity_functionals());
    out
}

fn c8_implications() -> Outcome {
    let cfg = CheckConfig::default().with_seed(SEED).with_trials(1000);
    let pass = |a: Axiom, f: &RiskFunctional| check_axiom(a, f, &cfg).unwrap().passed();
    let (mut ssd_premise, mut ssd_ok, mut cs_premise, mut lip_ok) = (0, 0, 0, 0);
    let fs = catalog();
    for f in &fs {
        let cs = pass(Axiom::CashSubadditivity, f);
        if pass(Axiom::LawInvariance, f) && pass(Axiom::QuasiConvexity, f) && cs {
            ssd_premise += 1;
            ssd_ok += usize::from(pass(Axiom::SsdConsistency, f));
        }
        if cs {
            cs_premise += 1;
            lip_ok += usize::from(pass(Axiom::SupNormLipschitz, f));
        }
    }
    outcome(
        ssd_premise > 0 && ssd_ok == ssd_premise && cs_premise > 0 && lip_ok == cs_premise,
        format!(
            "{} functionals; ssd consistency {ssd_ok}/{ssd_premise}; sup-norm lipschitz {lip_ok}/{cs_premise}",
            fs.len()
        ),
    )
}

fn c9_infconv() -> Outcome {
    let rhos = [es(0.25).unwrap(), es(0.75).unwrap()];
    let mut r = rng(9000);
    let mut xs = vec![Rv::uniform(vec![0.0, 1.0]).unwrap(), Rv::uniform(vec![0.0, 0.25, 0.5, 1.0]).unwrap()];
    for n in [2, 2, 4, 4] {
        xs.push(Rv::uniform((0..n).map(|_| r.gen_range(0.0..1.0)).collect()).unwrap());
    }
    let mut ok = true;
    let mut worst_gap: f64 = 0.0;
    let mut worst_tol: f64 = 0.0;
    for x in &xs {
        let b = infconv_bruteforce(&rhos, x, &BruteForceOptions::default()).unwrap();
        let c = infconv_comonotone(&rhos, x, &ComonotoneOptions::default()).unwrap();
        let tol = b.grid_tolerance + c.grid_tolerance;
        let gap = c.value.distance(b.value);
        worst_gap = worst_gap.max(gap);
        worst_tol = worst_tol.max(tol);
        let comonotone = c.allocation.as_ref().is_some_and(|a| a.is_comonotonic());
        ok &= tol <= 0.05 && gap <= tol && !b.diverged && !c.heuristic && comonotone;
    }
    let floor = RiskFunctional::new("mean_floor_zero", |x| ExtReal::Finite(x.mean().min(0.0)));
    let zero = Rv::constant(&FiniteSpace::uniform(2), 0.0);
    let d = infconv_bruteforce(&[floor.clone(), floor], &zero, &BruteForceOptions::default()).unwrap();
    let flagged = d.diverged && d.value == ExtReal::NegInf && d.allocation.is_none();
    outcome(
        ok && flagged,
        format!(
            "{} targets, max gap {worst_gap:.3e} within combined tolerance (max {worst_tol:.4}); divergence flagged: {flagged}",
            xs.len()
        ),
    )
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize, k: usize) -> ScenarioMatrix {
    let s = space(r, n);
    let rows = (0..n).map(|_| (0..k).map(|_| value(r, 0.5)).collect()).collect();
    ScenarioMatrix::new(s, (0..k).map(|j| format!("a{j}")).collect(), rows).unwrap()
}

fn random_weights(r: &mut ChaCha8Rng, k: usize) -> Weights {
    let raw: Vec<f64> = (0..k).map(|_| r.gen_range(0..=4) as f64).collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 || r.gen_bool(0.2) {
        let mut w = vec![0.0; k];
        w[r.gen_range(0..k)] = 1.0;
        return Weights::new(w).unwrap();
    }
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = w[..k - 1].iter().sum();
    w[k - 1] = 1.0 - head;
    Weights::new(w).unwrap()
}

fn oracle_portfolio(l: &ScenarioMatrix, lam: &LambdaFn, z: f64, res: usize) -> Option<(Vec<f64>, f64, usize)> {
    let k = l.num_assets();
    let mut points: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k - 1 {
        points = points
            .into_iter()
            .flat_map(|p| {
                let used: usize = p.iter().sum();
                (0..=res - used).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    let mut feasible = Vec::new();
    for p in points {
        let used: usize = p.iter().sum();
        let mut counts = p.clone();
        counts.push(res - used);
        let w: Vec<f64> = counts.iter().map(|c| *c as f64 / res as f64).collect();
        let x: Vec<f64> = l.losses().iter().map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
        let x = Rv::new(l.space().clone(), x).unwrap();
        if lambda_value_at_risk(&x, lam, LambdaMode::Primal) <= ExtReal::Finite(z) {
            let obj: f64 = x.values().iter().zip(l.space().probs()).map(|(v, p)| v * p).sum();
            feasible.push((w, obj));
        }
    }
    let best = feasible.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    let ties = feasible.iter().filter(|f| f.1 <= best + 1e-12).count();
    feasible.into_iter().find(|f| f.1 <= best + 1e-12).map(|(w, v)| (w, v, ties))
}

fn c10_constraint_reduction() -> Outcome {
    let mut agree = 0;
    let mut feasible = 0;
    for i in 0..500 {
        let mut r = rng(10_000 + i);
        let (n, k) = (r.gen_range(1..=6), r.gen_range(1..=3));
        let l = random_matrix(&mut r, n, k);
        let w = random_weights(&mut r, k);
        let lam = random_lambda(&mut r);
        let x = l.portfolio_loss(&w).unwrap();
        let z = match r.gen_range(0..3) {
            0 if !lam.breakpoints().is_empty() => *lam.breakpoints().choose(&mut r).unwrap(),
            1 => *x.values().choose(&mut r).unwrap(),
            _ => value(&mut r, 0.5),
        };
        let p = lambda_feasible(&lam, z, &l, &w, FeasibilityMode::Primal).unwrap();
        let q = lambda_feasible(&lam, z, &l, &w, FeasibilityMode::Reduced).unwrap();
        agree += usize::from(p == q);
        feasible += usize::from(p);
    }
    let mut matches = 0;
    for i in 0..20 {
        let mut r = rng(20_000 + i);
        let k = 2 + (i as usize % 2);
        let n = r.gen_range(4..=6);
        let l = random_matrix(&mut r, n, k);
        let lam = random_lambda(&mut r);
        let z = r.gen_range(-1.0..2.0);
        let got = optimize_portfolio(&l, &lam, z, 10).unwrap();
        let want = oracle_portfolio(&l, &lam, z, 10);
        let ok = match (&got, &want) {
            (None, None) => true,
            (Some(g), Some((w, v, ties))) => {
                let same_value = (g.value - v).abs() <= 1e-12;
                let feasible = lambda_feasible(&lam, z, &l, &g.weights, FeasibilityMode::Primal).unwrap();
                let same_point = *ties > 1 || g.weights.values().iter().zip(w).all(|(a, b)| (a - b).abs() <= 1e-12);
                same_value && feasible && same_point
            }
            _ => false,
        };
        matches += usize::from(ok);
    }
    outcome(
        agree == 500 && matches == 20,
        format!("verdicts agree {agree}/500 ({feasible} feasible); optimizer matches primal scan {matches}/20"),
    )
}

fn c11_component_family() -> Outcome {
    let grid: Vec<f64> = (-16..=16).map(|k| k as f64 * 0.25).collect();
    let mut equal = 0;
    let mut closure_ok = true;
    for i in 0..100 {
        let mut r = rng(30_000 + i);
        let n = r.gen_range(1..=6);
        let s = space(&mut r, n);
        let x = lattice_rv(&mut r, &s, 0.25);
        let lam = random_lambda(&mut r);
        let family = lambda_component_family(&lam, &grid);
        let min = RiskFunctional::pointwise_min("component_min", &family).unwrap();
        equal += usize::from(close(min.value(&x), lambda_value_at_risk(&x, &lam, LambdaMode::Primal), 1e-9));
        if i < 3 {
            let cfg = CheckConfig::default().with_seed(SEED + i).with_trials(1000);
            closure_ok &= check_min_closure(&family, &[Axiom::QuasiStarShapedness], &cfg).unwrap().passed();
        }
    }
    outcome(
        equal == 100 && closure_ok,
        format!("family minimum equals the measure on {equal}/100 targets; minimum quasi-star-shaped: {closure_ok}"),
    )
}

fn c12_equivalences() -> Outcome {
    let pairs = [
        (Axiom::StarShapedness, Axiom::QuasiStarShapedness),
        (Axiom::Normalization, Axiom::QuasiNormalization),
        (Axiom::Convexity, Axiom::QuasiConvexity),
    ];
    let mut agree = 0;
    let mut total = 0;
    for t in [0.1, 0.5, 0.9] {
        for rho in [var(t).unwrap(), es(t).unwrap()] {
            for (i, (a, b)) in pairs.iter().enumerate() {
                let cfg = CheckConfig::default().with_seed(SEED + i as u64).with_trials(1000);
                let va = check_axiom(*a, &rho, &cfg).unwrap().verdict;
                let vb = check_axiom(*b, &rho, &cfg).unwrap().verdict;
                total += 1;
                agree += usize::from(va == vb);
            }
        }
    }
    outcome(agree == total, format!("{agree}/{total} verdict pairs agree"))
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let sets = anchor_sets();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("lambda_var three routes", Box::new(c1_lambda_var_routes)),
        ("star-shapedness counterexample", Box::new(c2_star_counterexample)),
        ("quasi-convexity failure of var", Box::new(c3_quasi_convexity_failure)),
        ("cash subadditive, not additive", Box::new(c4_cash_subadditive_not_additive)),
        ("lower-envelope equalities", Box::new(|| c5_lower_envelopes(&sets))),
        ("member properties", Box::new(|| c6_member_properties(&sets))),
        ("ssd machinery", Box::new(c7_ssd_machinery)),
        ("implication suites", Box::new(c8_implications)),
        ("inf-convolution", Box::new(c9_infconv)),
        ("constraint reduction", Box::new(c10_constraint_reduction)),
        ("component family closure", Box::new(c11_component_family)),
        ("cash-additive equivalences", Box::new(c12_equivalences)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.passed);
        println!(
            "criterion {:>2} {:<32} {} [{:.2}s] {}",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
