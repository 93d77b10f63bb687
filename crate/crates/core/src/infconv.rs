//! Inf-convolution `□ρ_i(X) = inf{Σ ρ_i(X_i) : Σ X_i = X}` on finite spaces: an exhaustive grid
//! oracle and a solver restricted to comonotonic allocations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axioms::{check_axiom, Axiom, CheckConfig};
use crate::error::{input, Result, RiskError};
use crate::ext_real::ExtReal;
use crate::measures::RiskFunctional;
use crate::prob::{is_comonotonic, QuantileCurve, Rv};

/// Components summing to the target outcome by outcome (within `1e-9`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    components: Vec<Rv>,
}

const SUM_TOL: f64 = 1e-9;

impl Allocation {
    pub fn new(components: Vec<Rv>, target: &Rv) -> Result<Self> {
        if components.is_empty() {
            return input("an allocation needs at least one component");
        }
        let mut sum = Rv::constant(target.space(), 0.0);
        for c in &components {
            sum = sum.add(c)?;
        }
        if sum.sup_distance(target)? > SUM_TOL {
            return Err(RiskError::Validation("allocation does not sum to the target".into()));
        }
        Ok(Allocation { components })
    }

    pub fn components(&self) -> &[Rv] {
        &self.components
    }

    /// True when every pair of components is comonotonic.
    pub fn is_comonotonic(&self) -> bool {
        let c = &self.components;
        (0..c.len()).all(|i| (i + 1..c.len()).all(|j| is_comonotonic(&c[i], &c[j])))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfConvResult {
    pub value: ExtReal,
    pub allocation: Option<Allocation>,
    pub diverged: bool,
    /// Spacing of the allocation grid the optimum was searched on.
    pub grid_tolerance: f64,
    /// Set when the comonotone restriction is used without verified preconditions.
    pub heuristic: bool,
    pub configurations: u64,
}

/// Options of the grid oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteForceOptions {
    /// Grid step as a fraction of `max(‖X‖∞, 1)`.
    pub step_fraction: f64,
    /// Grid steps added beyond `[min(0, X(ω)), max(0, X(ω))]` on each side.
    pub pad_steps: usize,
    pub detect_divergence: bool,
    /// Steps per half-width of the coarse grids used for divergence probes.
    pub divergence_steps: usize,
    pub slope_threshold: f64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            step_fraction: 1.0 / 40.0,
            pad_steps: 2,
            detect_divergence: true,
            divergence_steps: 5,
            slope_threshold: 0.5,
        }
    }
}

fn scale_of(x: &Rv) -> f64 {
    x.sup_norm().max(1.0)
}

/// Per-outcome grids: `[min(0,x) - pad, max(0,x) + pad]` in steps of `step`, plus `0` and `x` exactly.
pub fn outcome_grids(x: &Rv, step: f64, pad: f64) -> Result<Vec<Vec<f64>>> {
    if !(step.is_finite() && step > 0.0 && pad.is_finite() && pad >= 0.0) {
        return input("empty grid: step must be positive and padding nonnegative");
    }
    Ok(x.values()
        .iter()
        .map(|&v| {
            let lo = v.min(0.0) - pad;
            let hi = v.max(0.0) + pad;
            let n = ((hi - lo) / step).ceil() as usize;
            let mut g: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect();
            g.extend([0.0, v]);
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        })
        .collect())
}

fn sum_values(parts: &[ExtReal]) -> ExtReal {
    parts.iter().try_fold(ExtReal::ZERO, |acc, v| acc.checked_add(*v)).unwrap_or(ExtReal::PosInf)
}

/// Exhaustive search of `X_1` over the product grid for two functionals.
///
/// Returns the optimum and the minimizing `X_1`; ties go to the lexicographically first grid index.
pub fn bruteforce_on_grid(
    r1: &RiskFunctional,
    r2: &RiskFunctional,
    x: &Rv,
    grids: &[Vec<f64>],
) -> Result<(ExtReal, Option<Rv>, u64)> {
    if grids.len() != x.len() || grids.iter().any(Vec::is_empty) {
        return input("empty grid: every outcome needs grid points");
    }
    let space = x.space().clone();
    let rest: Vec<&Vec<f64>> = grids[1..].iter().collect();
    let count: u64 = grids.iter().map(|g| g.len() as u64).product();
    let best = grids[0]
        .par_iter()
        .map(|&first| {
            let mut idx = vec![0usize; rest.len()];
            let mut vals = vec![0.0; x.len()];
            let mut best: Option<(ExtReal, Vec<f64>)> = None;
            loop {
                vals[0] = first;
                for (k, g) in rest.iter().enumerate() {
                    vals[k + 1] = g[idx[k]];
                }
                let x1 = Rv::new(space.clone(), vals.clone()).expect("grid values are finite");
                let x2 = x.sub(&x1).expect("same space");
                let v = sum_values(&[r1.value(&x1), r2.value(&x2)]);
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, vals.clone()));
                }
                let mut k = rest.len();
                loop {
                    if k == 0 {
                        return best.unwrap();
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < rest[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None::<(ExtReal, Vec<f64>)>, |acc, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        })
        .unwrap();
    let (v, vals) = best;
    let x1 = if v == ExtReal::PosInf { None } else { Some(Rv::new(x.space().clone(), vals)?) };
    Ok((v, x1, count))
}

/// A functional evaluating the inf-convolution of `rhos` by brute force.
fn tail_functional(rhos: &[RiskFunctional], opts: &BruteForceOptions) -> RiskFunctional {
    let rhos = rhos.to_vec();
    let opts = opts.clone();
    let names: Vec<&str> = rhos.iter().map(RiskFunctional::name).collect();
    let name = format!("infconv[{}]", names.join(","));
    RiskFunctional::new(name, move |x| infconv_bruteforce(&rhos, x, &opts).map_or(ExtReal::PosInf, |r| r.value))
}

/// Grid-oracle inf-convolution. More than two functionals are handled by recursion on the tail.
pub fn infconv_bruteforce(rhos: &[RiskFunctional], x: &Rv, opts: &BruteForceOptions) -> Result<InfConvResult> {
    let scale = scale_of(x);
    let step = opts.step_fraction * scale;
    match rhos.len() {
        0 => return input("inf-convolution needs at least one functional"),
        1 => {
            return Ok(InfConvResult {
                value: rhos[0].evaluate(x)?,
                allocation: Some(Allocation::new(vec![x.clone()], x)?),
                diverged: false,
                grid_tolerance: 0.0,
                heuristic: false,
                configurations: 1,
            })
        }
        _ => {}
    }
    let r1 = &rhos[0];
    let tail = if rhos.len() == 2 { rhos[1].clone() } else { tail_functional(&rhos[1..], opts) };
    let grids = outcome_grids(x, step, opts.pad_steps as f64 * step)?;
    let (mut value, mut x1, mut configurations) = bruteforce_on_grid(r1, &tail, x, &grids)?;

    if opts.detect_divergence {
        if opts.divergence_steps == 0 {
            return input("empty grid: divergence probes need at least one step");
        }
        let mut probe = Vec::with_capacity(3);
        for k in 0..3 {
            let half = scale * 2f64.powi(k);
            let g = outcome_grids(x, half / opts.divergence_steps as f64, half)?;
            let (v, cand, c) = bruteforce_on_grid(r1, &tail, x, &g)?;
            configurations += c;
            if v < value {
                value = v;
                x1 = cand;
            }
            probe.push((half, v));
        }
        let drops = |a: (f64, ExtReal), b: (f64, ExtReal)| match a.1.checked_sub(b.1) {
            Some(d) => d > ExtReal::Finite(opts.slope_threshold * (b.0 - a.0)),
            None => false,
        };
        if drops(probe[0], probe[1]) && drops(probe[1], probe[2]) {
            return Ok(InfConvResult {
                value: ExtReal::NegInf,
                allocation: None,
                diverged: true,
                grid_tolerance: step,
                heuristic: false,
                configurations,
            });
        }
    }

    let allocation = match x1 {
        Some(x1) => {
            let rest = x.sub(&x1)?;
            let mut comps = vec![x1];
            if rhos.len() == 2 {
                comps.push(rest);
            } else {
                let sub = infconv_bruteforce(&rhos[1..], &rest, opts)?;
                match sub.allocation {
                    Some(a) => comps.extend(a.components),
                    None => comps.push(rest),
                }
            }
            if comps.len() == rhos.len() {
                Some(Allocation::new(comps, x)?)
            } else {
                None
            }
        }
        None => None,
    };
    Ok(InfConvResult { value, allocation, diverged: false, grid_tolerance: step, heuristic: false, configurations })
}

/// Options of the comonotone solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComonotoneOptions {
    /// Increments are split in fractions `k/resolution`.
    pub resolution: usize,
    /// Step of the grid for the allocation of the smallest value, as a fraction of `max(‖X‖∞, 1)`.
    pub step_fraction: f64,
    pub pad_steps: usize,
    /// When set, each functional is checked for SSD consistency and cash subadditivity first.
    pub precondition_cfg: Option<CheckConfig>,
}

impl Default for ComonotoneOptions {
    fn default() -> Self {
        ComonotoneOptions {
            resolution: 40,
            step_fraction: 1.0 / 40.0,
            pad_steps: 2,
            precondition_cfg: Some(CheckConfig::default().with_trials(300)),
        }
    }
}

/// Index tuples of a product of ranges, in lexicographic order.
fn product_indices(lens: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &len in lens {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..len).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

/// All compositions of `k` into `n` nonnegative parts, in lexicographic order.
fn compositions(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() - 1 {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for c in 0..=left {
            cur[i] = c;
            rec(i + 1, left - c, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, k, &mut vec![0; n], &mut out);
    out
}

/// Inf-convolution over comonotonic allocations `X_i = f_i(X)` with increasing `f_i`.
///
/// The smallest value of X is split over a grid and every increment between consecutive
/// values is split in fractions `k/resolution`.
pub fn infconv_comonotone(rhos: &[RiskFunctional], x: &Rv, opts: &ComonotoneOptions) -> Result<InfConvResult> {
    if opts.resolution < 2 {
        return input("comonotone split resolution must be at least 2");
    }
    let n = rhos.len();
    if n == 0 {
        return input("inf-convolution needs at least one functional");
    }
    if n == 1 {
        return Ok(InfConvResult {
            value: rhos[0].evaluate(x)?,
            allocation: Some(Allocation::new(vec![x.clone()], x)?),
            diverged: false,
            grid_tolerance: 0.0,
            heuristic: false,
            configurations: 1,
        });
    }
    let heuristic = match &opts.precondition_cfg {
        Some(cfg) => {
            let mut ok = true;
            for r in rhos {
                for a in [Axiom::SsdConsistency, Axiom::CashSubadditivity] {
                    ok &= check_axiom(a, r, cfg)?.passed();
                }
            }
            !ok
        }
        None => true,
    };

    let curve = QuantileCurve::of(x);
    let u = curve.values().to_vec();
    let deltas: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let step = opts.step_fraction * scale_of(x);
    let base_grid = outcome_grids(&Rv::uniform(vec![u[0]])?, step, opts.pad_steps as f64 * step)?.remove(0);
    let splits = compositions(opts.resolution, n);
    let k = opts.resolution as f64;
    // Position of each outcome's value among the distinct support points.
    let rank: Vec<usize> = x.values().iter().map(|v| u.partition_point(|w| w < v)).collect();

    let bases: Vec<Vec<f64>> = product_indices(&vec![base_grid.len(); n - 1])
        .into_iter()
        .map(|idx| {
            let mut b: Vec<f64> = idx.iter().map(|i| base_grid[*i]).collect();
            b.push(u[0] - b.iter().sum::<f64>());
            b
        })
        .collect();

    let space = x.space().clone();
    let m = deltas.len();
    let eval = |base: &[f64], choice: &[usize]| -> (ExtReal, Vec<Vec<f64>>) {
        // levels[i][j] = f_i(u_j)
        let mut levels = vec![vec![0.0; u.len()]; n];
        for i in 0..n {
            levels[i][0] = base[i];
            for j in 0..m {
                levels[i][j + 1] = levels[i][j] + splits[choice[j]][i] as f64 / k * deltas[j];
            }
        }
        let parts: Vec<ExtReal> = (0..n)
            .map(|i| {
                let vals = rank.iter().map(|r| levels[i][*r]).collect();
                rhos[i].value(&Rv::new(space.clone(), vals).expect("finite"))
            })
            .collect();
        (sum_values(&parts), levels)
    };

    let per_base: Vec<(ExtReal, Vec<Vec<f64>>)> = bases
        .par_iter()
        .map(|base| {
            let mut choice = vec![0usize; m];
            let mut best: Option<(ExtReal, Vec<Vec<f64>>)> = None;
            loop {
                let (v, levels) = eval(base, &choice);
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, levels));
                }
                let mut j = m;
                loop {
                    if j == 0 {
                        return best.unwrap();
                    }
                    j -= 1;
                    choice[j] += 1;
                    if choice[j] < splits.len() {
                        break;
                    }
                    choice[j] = 0;
                }
            }
        })
        .collect();
    let (value, levels) = per_base
        .into_iter()
        .fold(None::<(ExtReal, Vec<Vec<f64>>)>, |acc, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        })
        .unwrap();
    let components: Vec<Rv> =
        levels.iter().map(|lv| Rv::new(space.clone(), rank.iter().map(|r| lv[*r]).collect())).collect::<Result<_>>()?;
    let allocation = Allocation::new(components, x)?;
    let max_delta = deltas.iter().copied().fold(0.0, f64::max);
    Ok(InfConvResult {
        value,
        allocation: Some(allocation),
        diverged: false,
        grid_tolerance: step.max(max_delta / k),
        heuristic,
        configurations: bases.len() as u64 * (splits.len() as u64).pow(m as u32),
    })
}

/// `X ↦ □ρ_i(X)` evaluated with the comonotone solver (no precondition checks).
pub fn infconv_functional(rhos: &[RiskFunctional], opts: &ComonotoneOptions) -> RiskFunctional {
    let rhos = rhos.to_vec();
    let opts = ComonotoneOptions { precondition_cfg: None, ..opts.clone() };
    let names: Vec<&str> = rhos.iter().map(RiskFunctional::name).collect();
    RiskFunctional::new(format!("infconv[{}]", names.join(",")), move |x| {
        infconv_comonotone(&rhos, x, &opts).map_or(ExtReal::PosInf, |r| r.value)
    })
}
