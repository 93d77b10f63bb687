//! Per-axiom input generators.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Axiom, Case, CheckConfig, RangeEstimate};
use crate::ext_real::ExtReal;
use crate::prob::{comonotone_rearrangement, ssd_dominates, FiniteSpace, Rv};

/// Spacing of the value lattice; lattice draws make ties and exact boundary cases common.
const LATTICE_STEP: f64 = 0.5;
/// Number of evenly spaced constants in the normalization grid.
const CONSTANT_GRID: usize = 41;

pub(crate) fn sample_space(
    cfg: &CheckConfig,
    domain: Option<&FiniteSpace>,
    uniform: bool,
    rng: &mut ChaCha8Rng,
) -> FiniteSpace {
    if let Some(d) = domain {
        return d.clone();
    }
    let n = *cfg.space_sizes.choose(rng).unwrap();
    if uniform || cfg.uniform_only || rng.gen_bool(0.5) {
        FiniteSpace::uniform(n)
    } else {
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=4) as f64).collect();
        FiniteSpace::from_weights(&weights).expect("positive weights")
    }
}

pub(crate) fn sample_value(range: (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = range;
    if rng.gen_bool(0.6) {
        let steps = ((hi - lo) / LATTICE_STEP).floor() as i64;
        lo + LATTICE_STEP * rng.gen_range(0..=steps) as f64
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub(crate) fn sample_rv(space: &FiniteSpace, range: (f64, f64), rng: &mut ChaCha8Rng) -> Rv {
    let values = (0..space.len()).map(|_| sample_value(range, rng)).collect();
    Rv::new(space.clone(), values).expect("sampled values are finite")
}

fn sample_lambda(cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        *cfg.lambda_grid.choose(rng).unwrap()
    } else {
        rng.gen_range(0.0..=1.0)
    }
}

fn sample_m(cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        *cfg.m_grid.choose(rng).unwrap()
    } else {
        let top = cfg.m_grid.iter().copied().fold(0.0, f64::max).max(1.0);
        rng.gen_range(0.0..=top)
    }
}

fn nonnegative_increment(space: &FiniteSpace, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let half_span = 0.5 * (cfg.value_range.1 - cfg.value_range.0);
    (0..space.len()).map(|_| if rng.gen_bool(0.5) { 0.0 } else { sample_value((0.0, half_span), rng) }).collect()
}

fn shuffled(x: &Rv, rng: &mut ChaCha8Rng) -> Rv {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.shuffle(rng);
    x.permuted(&perm).expect("a shuffle is a permutation")
}

/// A comonotonic pair on `space`: both variables sorted along one random ranking.
fn comonotonic_pair(space: &FiniteSpace, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (Rv, Rv) {
    let x = sample_rv(space, cfg.value_range, rng);
    let y = sample_rv(space, cfg.value_range, rng);
    if space.is_uniform() {
        let (xc, yc) = comonotone_rearrangement(&x, &y).expect("same space");
        return shuffled_pair(&xc, &yc, rng);
    }
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.shuffle(rng);
    let mut xs = x.values().to_vec();
    let mut ys = y.values().to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let mut xv = vec![0.0; space.len()];
    let mut yv = vec![0.0; space.len()];
    for (rank, &slot) in order.iter().enumerate() {
        xv[slot] = xs[rank];
        yv[slot] = ys[rank];
    }
    (Rv::new(space.clone(), xv).unwrap(), Rv::new(space.clone(), yv).unwrap())
}

/// Applies one common permutation to both variables, which keeps them comonotonic.
fn shuffled_pair(x: &Rv, y: &Rv, rng: &mut ChaCha8Rng) -> (Rv, Rv) {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.shuffle(rng);
    (x.permuted(&perm).unwrap(), y.permuted(&perm).unwrap())
}

/// A common level plus one bump each on two disjoint sets of outcomes. Mixing spreads the
/// bump over both sets, which moves upper quantiles.
fn disjoint_bumps(space: &FiniteSpace, range: (f64, f64), rng: &mut ChaCha8Rng) -> (Rv, Rv) {
    let n = space.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // Least likely outcomes first, so small bumps stay below high quantile levels.
    if rng.gen_bool(0.5) {
        order.sort_by(|a, b| space.probs()[*a].total_cmp(&space.probs()[*b]));
    }
    let (split, end) = if rng.gen_bool(0.7) {
        (1, 2)
    } else {
        let split = rng.gen_range(1..n);
        (split, rng.gen_range(split + 1..=n))
    };
    let base = sample_value(range, rng);
    let bump = sample_value((0.0, range.1 - range.0), rng).max(LATTICE_STEP);
    let mut xv = vec![base; n];
    let mut yv = vec![base; n];
    for &i in &order[..split] {
        xv[i] += bump;
    }
    for &i in &order[split..end] {
        yv[i] += bump;
    }
    (Rv::new(space.clone(), xv).unwrap(), Rv::new(space.clone(), yv).unwrap())
}

fn ssd_pair(space: &FiniteSpace, cfg: &CheckConfig, rng: &mut ChaCha8Rng, trial: usize) -> (Rv, Rv) {
    match trial % 3 {
        // Comonotonic sums dominate arbitrary sums with the same marginals.
        0 => {
            let a = sample_rv(space, cfg.value_range, rng);
            let b = sample_rv(space, cfg.value_range, rng);
            let (ac, bc) = comonotone_rearrangement(&a, &b).expect("same space");
            (ac.add(&bc).unwrap(), a.add(&b).unwrap())
        }
        // A variable dominates its conditional expectation given any partition.
        1 => {
            let x = sample_rv(space, cfg.value_range, rng);
            let blocks_n = rng.gen_range(1..=space.len());
            let labels: Vec<usize> = (0..space.len()).map(|_| rng.gen_range(0..blocks_n)).collect();
            let y = x.conditional_expectation(&labels).unwrap();
            (x, shuffled(&y, rng))
        }
        // Random pairs kept when the stop-loss test certifies dominance.
        _ => {
            for _ in 0..20 {
                let x = sample_rv(space, cfg.value_range, rng);
                let y = sample_rv(space, cfg.value_range, rng);
                if ssd_dominates(&x, &y) {
                    return (x, y);
                }
                if ssd_dominates(&y, &x) {
                    return (y, x);
                }
            }
            let x = sample_rv(space, cfg.value_range, rng);
            let y = sample_rv(space, cfg.value_range, rng);
            let top = x.zip_with(&y, f64::max).unwrap();
            (shuffled(&top, rng), y)
        }
    }
}

/// Draws the random input of trial `trial`.
pub(crate) fn sample_case(
    axiom: Axiom,
    cfg: &CheckConfig,
    domain: Option<&FiniteSpace>,
    rng: &mut ChaCha8Rng,
    trial: usize,
) -> Case {
    let space = sample_space(cfg, domain, axiom.needs_uniform(), rng);
    let range = cfg.value_range;
    match axiom {
        Axiom::Monotonicity => {
            let x = sample_rv(&space, range, rng);
            let d = nonnegative_increment(&space, cfg, rng);
            let y = x.zip_with(&Rv::new(space.clone(), d).unwrap(), |a, b| a + b).unwrap();
            Case::Pair { x, y }
        }
        Axiom::CashAdditivity => {
            let x = sample_rv(&space, range, rng);
            let m = sample_m(cfg, rng);
            Case::Shift { x, m: if rng.gen_bool(0.5) { -m } else { m } }
        }
        Axiom::CashSubadditivity => {
            let x = sample_rv(&space, range, rng);
            Case::Shift { x, m: sample_m(cfg, rng) }
        }
        Axiom::Convexity | Axiom::QuasiConvexity => {
            let x = sample_rv(&space, range, rng);
            let (x, y) = match rng.gen_range(0..10) {
                0..=2 => {
                    let y = x.map(|v| -v).add_const(sample_value((-1.0, 1.0), rng));
                    (x, y)
                }
                3 | 4 => {
                    let y = shuffled(&x, rng);
                    (x, y)
                }
                5 | 6 if space.len() >= 2 => disjoint_bumps(&space, range, rng),
                _ => (x, sample_rv(&space, range, rng)),
            };
            Case::Mix { x, y, lambda: sample_lambda(cfg, rng) }
        }
        Axiom::ComonotonicQuasiConvexity => {
            let (x, y) = comonotonic_pair(&space, cfg, rng);
            Case::Mix { x, y, lambda: sample_lambda(cfg, rng) }
        }
        Axiom::StarShapedness | Axiom::QuasiStarShapedness => {
            let x = sample_rv(&space, range, rng);
            Case::Star { x, t: sample_value(range, rng), lambda: sample_lambda(cfg, rng) }
        }
        Axiom::LawInvariance => {
            let x = sample_rv(&space, range, rng);
            let y = shuffled(&x, rng);
            Case::Pair { x, y }
        }
        Axiom::FsdConsistency => {
            let y = sample_rv(&space, range, rng);
            let d = Rv::new(space.clone(), nonnegative_increment(&space, cfg, rng)).unwrap();
            let x = shuffled(&y.add(&d).unwrap(), rng);
            Case::Pair { x, y }
        }
        Axiom::SsdConsistency => {
            let (x, y) = ssd_pair(&space, cfg, rng, trial);
            Case::Pair { x, y }
        }
        Axiom::SupNormLipschitz => {
            let x = sample_rv(&space, range, rng);
            let y = if rng.gen_bool(0.5) {
                let noise: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-0.5..=0.5)).collect();
                x.zip_with(&Rv::new(space.clone(), noise).unwrap(), |a, b| a + b).unwrap()
            } else {
                sample_rv(&space, range, rng)
            };
            Case::Pair { x, y }
        }
        Axiom::Normalization | Axiom::QuasiNormalization => {
            Case::Constant { x: Rv::constant(&space, sample_value(range, rng)) }
        }
    }
}

/// Constants grid: evenly spaced points over the value range plus finite range endpoints.
///
/// For quasi-normalization only constants inside the estimated range are kept.
pub(crate) fn constant_cases(
    axiom: Axiom,
    cfg: &CheckConfig,
    domain: Option<&FiniteSpace>,
    est: &RangeEstimate,
) -> Vec<Case> {
    let space = domain.cloned().unwrap_or_else(|| FiniteSpace::uniform(1));
    let (lo, hi) = cfg.value_range;
    let mut pts: Vec<f64> =
        (0..CONSTANT_GRID).map(|i| lo + (hi - lo) * i as f64 / (CONSTANT_GRID - 1) as f64).collect();
    pts.extend([est.lower, est.upper].into_iter().filter_map(ExtReal::finite));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if axiom == Axiom::QuasiNormalization {
        pts.retain(|t| est.contains(*t));
    }
    pts.into_iter().map(|t| Case::Constant { x: Rv::constant(&space, t) }).collect()
}
