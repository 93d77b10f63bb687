#![allow(dead_code)]

use proptest::prelude::*;
use riskcal::{FiniteSpace, LambdaFn, Rv};

pub fn value() -> impl Strategy<Value = f64> {
    prop_oneof![(-12i32..=12).prop_map(|k| k as f64 * 0.25), -3.0..3.0f64]
}

pub fn space(max_n: usize) -> impl Strategy<Value = FiniteSpace> {
    (1..=max_n).prop_flat_map(|n| {
        prop_oneof![
            Just(FiniteSpace::uniform(n)),
            prop::collection::vec(1u32..=4, n)
                .prop_map(|w| FiniteSpace::from_weights(&w.iter().map(|v| *v as f64).collect::<Vec<_>>()).unwrap()),
        ]
    })
}

pub fn rv_on(space: FiniteSpace) -> impl Strategy<Value = Rv> {
    prop::collection::vec(value(), space.len()).prop_map(move |v| Rv::new(space.clone(), v).unwrap())
}

pub fn rv(max_n: usize) -> impl Strategy<Value = Rv> {
    space(max_n).prop_flat_map(rv_on)
}

pub fn uniform_rv(max_n: usize) -> impl Strategy<Value = Rv> {
    (1..=max_n).prop_flat_map(|n| rv_on(FiniteSpace::uniform(n)))
}

/// Two variables on one space.
pub fn pair(max_n: usize) -> impl Strategy<Value = (Rv, Rv)> {
    space(max_n).prop_flat_map(|s| (rv_on(s.clone()), rv_on(s)))
}

pub fn lambda() -> impl Strategy<Value = LambdaFn> {
    (prop::collection::vec(value(), 0..=4), prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..1.0f64], 5))
        .prop_map(|(mut bps, mut vals)| {
            bps.sort_by(f64::total_cmp);
            bps.dedup();
            vals.truncate(bps.len() + 1);
            vals.sort_by(|a, b| b.total_cmp(a));
            if vals[0] == 0.0 {
                vals[0] = 0.5;
            }
            LambdaFn::new(bps, vals).unwrap()
        })
}

/// `P(X ≤ x)` by direct summation.
pub fn cdf(x: &Rv, at: f64) -> f64 {
    x.values().iter().zip(x.probs()).filter(|(v, _)| **v <= at).map(|(_, p)| p).sum()
}

/// Atoms as sorted `(value, probability)` pairs with equal values merged.
pub fn atoms(x: &Rv) -> Vec<(f64, f64)> {
    let mut a: Vec<(f64, f64)> = x.values().iter().copied().zip(x.probs().iter().copied()).collect();
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, p) in a {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// `∫_t^1 VaR_α dα` by walking the sorted atoms.
pub fn tail_integral(x: &Rv, t: f64) -> f64 {
    let mut cum = 0.0;
    let mut acc = 0.0;
    for (v, p) in atoms(x) {
        let (lo, hi) = (cum, cum + p);
        let overlap = (hi - lo.max(t)).max(0.0);
        acc += overlap * v;
        cum = hi;
    }
    acc
}

pub fn es_oracle(x: &Rv, t: f64) -> f64 {
    if t >= 1.0 {
        x.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        tail_integral(x, t) / (1.0 - t)
    }
}

pub fn stop_loss(x: &Rv, k: f64) -> f64 {
    x.values().iter().zip(x.probs()).map(|(v, p)| p * (v - k).max(0.0)).sum()
}

/// `inf{x : P(X ≤ x) ≥ Λ(x)}` over atoms and breakpoints, where the infimum is attained.
pub fn lambda_var_oracle(x: &Rv, lam: &LambdaFn) -> f64 {
    let level = |at: f64| {
        let i = lam.breakpoints().iter().filter(|b| **b <= at).count();
        lam.values()[i]
    };
    x.values()
        .iter()
        .chain(lam.breakpoints())
        .copied()
        .filter(|c| cdf(x, *c) >= level(*c) - 1e-12)
        .fold(f64::INFINITY, f64::min)
}
