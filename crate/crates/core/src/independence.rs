//! Entropy, mutual information, and conditioning of moment solutions.
//!
//! All information quantities are in bits.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CspInstance, Sense};
use crate::lasserre::{enumerate_index, local_distribution, MomentSolution, DRIFT_TOL, PROBABILITY_FLOOR};
use crate::rng::rng_from_seed;

/// `-sum p log2 p`, with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

fn marginals(joint: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let mut px = vec![0.0; rows];
    let mut py = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            px[r] += joint[r * cols + c];
            py[c] += joint[r * cols + c];
        }
    }
    (px, py)
}

/// `I(X;Y)` of a row-major `rows x cols` joint table.
pub fn mutual_information(joint: &[f64], rows: usize, cols: usize) -> f64 {
    assert_eq!(joint.len(), rows * cols, "joint table shape");
    let (px, py) = marginals(joint, rows, cols);
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let p = joint[r * cols + c];
            if p > 0.0 {
                mi += p * (p / (px[r] * py[c])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// `H(X | Y)` of a row-major joint table (`X` indexes rows).
pub fn conditional_entropy(joint: &[f64], rows: usize, cols: usize) -> f64 {
    let (_, py) = marginals(joint, rows, cols);
    let mut h = 0.0;
    for c in 0..cols {
        if py[c] <= 0.0 {
            continue;
        }
        let cond: Vec<f64> = (0..rows).map(|r| joint[r * cols + c] / py[c]).collect();
        h += py[c] * entropy(&cond);
    }
    h
}

/// `I(X;Y)` computed as `H(X) - H(X | Y)`.
pub fn mutual_information_by_conditioning(joint: &[f64], rows: usize, cols: usize) -> f64 {
    let (px, _) = marginals(joint, rows, cols);
    entropy(&px) - conditional_entropy(joint, rows, cols)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelationSummary {
    pub average_mi: f64,
    pub max_mi: f64,
    pub include_diagonal: bool,
    /// `(i, j, I(X_i; X_j))` for `i < j`.
    pub pairs: Vec<(usize, usize, f64)>,
}

fn pair_mi(sol: &MomentSolution, i: usize, j: usize) -> Result<f64> {
    if i == j {
        let d = local_distribution(sol, &[i], DRIFT_TOL)?;
        return Ok(entropy(&d.probabilities));
    }
    let d = local_distribution(sol, &[i, j], DRIFT_TOL)?;
    // little-endian: index a + 2b with a = x_i; rows follow x_i
    let p = &d.probabilities;
    Ok(mutual_information(&[p[0], p[2], p[1], p[3]], 2, 2))
}

/// `E_{i,j ~ W}[I(X_i; X_j)]`. With `include_diagonal`, the `i = j` draws
/// contribute `H(X_i)`; without it the average is over `i != j` with the
/// weights renormalized.
pub fn alpha_independence(
    sol: &MomentSolution,
    inst: &CspInstance,
    include_diagonal: bool,
) -> Result<PairCorrelationSummary> {
    if sol.level < 2 {
        return Err(Error::arg("independence needs a solution of level at least 2"));
    }
    if sol.n != inst.n {
        return Err(Error::arg("solution and instance dimensions differ"));
    }
    let w = &inst.vertex_weights;
    let mut total = 0.0;
    let mut mass = 0.0;
    let mut max_mi = 0.0f64;
    let mut pairs = Vec::new();
    for i in 0..sol.n {
        if include_diagonal && w[i] > 0.0 {
            let h = pair_mi(sol, i, i)?;
            total += w[i] * w[i] * h;
            mass += w[i] * w[i];
            max_mi = max_mi.max(h);
        }
        for j in i + 1..sol.n {
            let mi = pair_mi(sol, i, j)?;
            pairs.push((i, j, mi));
            let ww = w[i] * w[j];
            if ww > 0.0 {
                total += 2.0 * ww * mi;
                mass += 2.0 * ww;
                max_mi = max_mi.max(mi);
            }
        }
    }
    let average_mi = if include_diagonal {
        total
    } else if mass > 0.0 {
        total / mass
    } else {
        0.0
    };
    Ok(PairCorrelationSummary {
        average_mi,
        max_mi,
        include_diagonal,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningStep {
    pub pivot: usize,
    pub value: u8,
    pub probability: f64,
}

/// Conditions a level-`k` solution on `x_pivot = value`, giving level `k - 1`.
///
/// `G'[(S, a), (T, b)] = G[(S + p, a + v), (T + p, b + v)] / P(x_p = v)`, and
/// rows whose assignment disagrees with the pivot value are zero. The
/// objective of the result is recomputed from `inst` when its payoff scopes
/// still fit the new level and is `NaN` otherwise.
pub fn condition(
    sol: &MomentSolution,
    inst: &CspInstance,
    pivot: usize,
    value: u8,
) -> Result<MomentSolution> {
    if sol.level < 2 {
        return Err(Error::arg("conditioning needs a solution of level at least 2"));
    }
    if pivot >= sol.n || value > 1 {
        return Err(Error::arg(format!("no variable/value ({pivot}, {value})")));
    }
    let prob = sol.marginal(pivot)[value as usize];
    if !(prob >= PROBABILITY_FLOOR) {
        return Err(Error::NullEvent {
            pivot,
            value,
            probability: prob,
        });
    }
    let bit = 1u64 << pivot;
    let vbit = if value == 1 { bit } else { 0 };
    let masks = enumerate_index(sol.n, sol.level - 1);
    let map: Vec<Option<usize>> = masks
        .iter()
        .map(|&(s, a)| {
            if s & bit != 0 && (a & bit) != vbit {
                None
            } else {
                sol.position(s | bit, (a & !bit) | vbit)
            }
        })
        .collect();
    let d = masks.len();
    let g = DMatrix::from_fn(d, d, |r, c| match (map[r], map[c]) {
        (Some(a), Some(b)) => sol.gram[(a, b)] / prob,
        _ => 0.0,
    });
    let mut out = MomentSolution::new(sol.n, sol.level - 1, g, f64::NAN)?;
    if inst.payoffs.iter().all(|t| t.scope.len() <= out.level) {
        out.objective_value = out.objective(inst)?;
    }
    Ok(out)
}

/// `(E_j[H(X_j)] - E_j[H(X_j | X_i)], E_j[I(X_i; X_j)])` with `j ~ W`; the
/// conditional entropy is the marginal-weighted average over
/// [`condition`]ed solutions.
pub fn chain_rule_terms(sol: &MomentSolution, inst: &CspInstance, i: usize) -> Result<(f64, f64)> {
    let w = &inst.vertex_weights;
    let h_before: f64 = (0..sol.n)
        .map(|j| w[j] * entropy(&sol.marginal(j)))
        .sum();
    let mut h_after = 0.0;
    for v in 0..2u8 {
        let p = sol.marginal(i)[v as usize];
        if p < PROBABILITY_FLOOR {
            continue;
        }
        let c = condition(sol, inst, i, v)?;
        h_after += p * (0..sol.n).map(|j| w[j] * entropy(&c.marginal(j))).sum::<f64>();
    }
    let mut mi = 0.0;
    for j in 0..sol.n {
        mi += w[j] * pair_mi(sol, i, j)?;
    }
    Ok((h_before - h_after, mi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    Sampled,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecorrelateConfig {
    pub alpha: f64,
    pub strategy: SearchStrategy,
    /// Maximum number of conditionings; further capped so that the result
    /// keeps level at least 2.
    pub depth: usize,
    pub seed: u64,
    pub include_diagonal: bool,
}

impl Default for DecorrelateConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            strategy: SearchStrategy::Sampled,
            depth: 4,
            seed: 0,
            include_diagonal: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decorrelated {
    pub solution: MomentSolution,
    pub steps: Vec<ConditioningStep>,
    pub achieved_alpha: f64,
    /// Objective of the input minus that of the result (sense-adjusted loss).
    pub objective_loss: f64,
    /// False when the budget ran out before reaching the target.
    pub reached: bool,
}

fn loss(inst: &CspInstance, before: f64, after: f64) -> f64 {
    match inst.sense() {
        Sense::Maximize => before - after,
        Sense::Minimize => after - before,
    }
}

/// Conditions until the average pairwise mutual information is at most
/// `cfg.alpha`, keeping level at least 2.
pub fn decorrelate(
    sol: &MomentSolution,
    inst: &CspInstance,
    cfg: &DecorrelateConfig,
) -> Result<Decorrelated> {
    if sol.level < 2 {
        return Err(Error::arg("decorrelate needs a solution of level at least 2"));
    }
    let budget = cfg.depth.min(sol.level - 2);
    let base_obj = sol.objective(inst)?;
    let start = alpha_independence(sol, inst, cfg.include_diagonal)?.average_mi;
    let done = |s: MomentSolution, steps: Vec<ConditioningStep>, a: f64| -> Result<Decorrelated> {
        let obj = s.objective(inst)?;
        Ok(Decorrelated {
            solution: s,
            steps,
            achieved_alpha: a,
            objective_loss: loss(inst, base_obj, obj),
            reached: a <= cfg.alpha,
        })
    };
    if start <= cfg.alpha || budget == 0 {
        return done(sol.clone(), Vec::new(), start);
    }
    match cfg.strategy {
        SearchStrategy::Sampled => {
            let mut rng = rng_from_seed(cfg.seed);
            let mut cur = sol.clone();
            let mut steps = Vec::new();
            let mut best = (start, cur.clone(), steps.clone());
            for _ in 0..budget {
                let pivot = sample_index(&mut rng, &inst.vertex_weights);
                let m = cur.marginal(pivot);
                let p0 = m[0].clamp(0.0, 1.0) / (m[0].clamp(0.0, 1.0) + m[1].clamp(0.0, 1.0));
                let mut value = if rng.random::<f64>() < p0 { 0u8 } else { 1u8 };
                if m[value as usize] < PROBABILITY_FLOOR {
                    value = 1 - value;
                }
                let probability = m[value as usize];
                cur = condition(&cur, inst, pivot, value)?;
                steps.push(ConditioningStep {
                    pivot,
                    value,
                    probability,
                });
                let a = alpha_independence(&cur, inst, cfg.include_diagonal)?.average_mi;
                if a < best.0 {
                    best = (a, cur.clone(), steps.clone());
                }
                if a <= cfg.alpha {
                    break;
                }
            }
            let (a, s, st) = best;
            done(s, st, a)
        }
        SearchStrategy::Exhaustive => {
            let mut best = (start, sol.clone(), Vec::new());
            for depth in 1..=budget {
                if let Some((s, st, a)) =
                    search(sol, inst, cfg, base_obj, depth, &mut Vec::new(), &mut best)?
                {
                    return done(s, st, a);
                }
            }
            let (a, s, st) = best;
            done(s, st, a)
        }
    }
}

type Found = Option<(MomentSolution, Vec<ConditioningStep>, f64)>;

fn search(
    cur: &MomentSolution,
    inst: &CspInstance,
    cfg: &DecorrelateConfig,
    base_obj: f64,
    remaining: usize,
    path: &mut Vec<ConditioningStep>,
    best: &mut (f64, MomentSolution, Vec<ConditioningStep>),
) -> Result<Found> {
    for pivot in 0..cur.n {
        let m = cur.marginal(pivot);
        if m[0] < PROBABILITY_FLOOR || m[1] < PROBABILITY_FLOOR {
            continue;
        }
        for value in 0..2u8 {
            let next = condition(cur, inst, pivot, value)?;
            path.push(ConditioningStep {
                pivot,
                value,
                probability: m[value as usize],
            });
            if remaining == 1 {
                let a = alpha_independence(&next, inst, cfg.include_diagonal)?.average_mi;
                let l = loss(inst, base_obj, next.objective(inst)?);
                if a < best.0 {
                    *best = (a, next.clone(), path.clone());
                }
                if a <= cfg.alpha && l <= cfg.alpha {
                    return Ok(Some((next, path.clone(), a)));
                }
            } else if let Some(found) = search(&next, inst, cfg, base_obj, remaining - 1, path, best)? {
                return Ok(Some(found));
            }
            path.pop();
        }
    }
    Ok(None)
}

fn sample_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, Family, ProblemKind};
    use crate::oracle::exact_mixture_moments;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        let oracle = 2.0 - 0.75 * 3f64.log2();
        assert!((entropy(&[0.75, 0.25]) - oracle).abs() < 1e-15);
        assert!((entropy(&[0.75, 0.25]) - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn mutual_information_examples() {
        assert!(mutual_information(&[0.25, 0.25, 0.25, 0.25], 2, 2).abs() < 1e-15);
        assert!((mutual_information(&[0.5, 0.0, 0.0, 0.5], 2, 2) - 1.0).abs() < 1e-15);
        let j = [0.4, 0.1, 0.1, 0.4];
        let oracle = 1.0 + 1.0 - entropy(&j);
        assert!((mutual_information(&j, 2, 2) - oracle).abs() < 1e-14);
        assert!((mutual_information(&j, 2, 2) - 0.278072).abs() < 1e-6);
    }

    fn c4_mixture() -> (CspInstance, MomentSolution) {
        let c4 = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let mix = exact_mixture_moments(
            &c4,
            2,
            &[(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)],
        )
        .unwrap();
        (c4, mix)
    }

    #[test]
    fn independence_of_fixtures() {
        let (c4, mix) = c4_mixture();
        let s = alpha_independence(&mix, &c4, true).unwrap();
        assert!((s.average_mi - 1.0).abs() < 1e-12);
        let s = alpha_independence(&mix, &c4, false).unwrap();
        assert!((s.average_mi - 1.0).abs() < 1e-12);
        let point = exact_mixture_moments(&c4, 2, &[(vec![0, 1, 1, 0], 1.0)]).unwrap();
        assert_eq!(alpha_independence(&point, &c4, true).unwrap().average_mi, 0.0);
        let edge = crate::instance::load_edge_list("0 1\n").unwrap();
        let product = exact_mixture_moments(
            &edge,
            2,
            &[
                (vec![0, 0], 0.25),
                (vec![0, 1], 0.25),
                (vec![1, 0], 0.25),
                (vec![1, 1], 0.25),
            ],
        )
        .unwrap();
        let s = alpha_independence(&product, &edge, false).unwrap();
        assert!(s.average_mi.abs() < 1e-15);
    }

    #[test]
    fn conditioning_the_mixture_gives_the_bisection() {
        let (c4, mix) = c4_mixture();
        let mix3 = exact_mixture_moments(
            &c4,
            3,
            &[(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)],
        )
        .unwrap();
        let c = condition(&mix3, &c4, 0, 0).unwrap();
        let point = exact_mixture_moments(&c4, 2, &[(vec![0, 1, 0, 1], 1.0)]).unwrap();
        assert!((&c.gram - &point.gram).amax() < 1e-15);
        assert_eq!(alpha_independence(&c, &c4, true).unwrap().average_mi, 0.0);
        // at P = 1/2 the kept entries are doubled
        let c1 = condition(&mix, &c4, 0, 0).unwrap();
        let p = mix.position(0b11, 0b10).unwrap();
        let q = c1.position(0b10, 0b10).unwrap();
        assert_eq!(c1.gram[(q, q)], 2.0 * mix.gram[(p, p)]);
    }

    #[test]
    fn conditioning_a_point_mass_is_identity() {
        let c4 = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let x = vec![1, 0, 0, 1];
        let p3 = exact_mixture_moments(&c4, 3, &[(x.clone(), 1.0)]).unwrap();
        let p2 = exact_mixture_moments(&c4, 2, &[(x, 1.0)]).unwrap();
        let c = condition(&p3, &c4, 2, 0).unwrap();
        assert_eq!(c.gram, p2.gram);
        assert_eq!(c.objective_value, p2.objective_value);
        assert!(matches!(
            condition(&p3, &c4, 2, 1),
            Err(Error::NullEvent { pivot: 2, value: 1, .. })
        ));
    }

    #[test]
    fn decorrelate_fixtures() {
        let (c4, _) = c4_mixture();
        let mix3 = exact_mixture_moments(
            &c4,
            3,
            &[(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)],
        )
        .unwrap();
        for strategy in [SearchStrategy::Sampled, SearchStrategy::Exhaustive] {
            let cfg = DecorrelateConfig {
                alpha: 0.01,
                strategy,
                depth: 4,
                seed: 3,
                include_diagonal: true,
            };
            let r = decorrelate(&mix3, &c4, &cfg).unwrap();
            assert_eq!(r.steps.len(), 1);
            assert!(r.reached && r.achieved_alpha <= 1e-12);
            assert!(r.objective_loss.abs() < 1e-12);
        }
        let point = exact_mixture_moments(&c4, 3, &[(vec![0, 1, 0, 1], 1.0)]).unwrap();
        let r = decorrelate(&point, &c4, &DecorrelateConfig::default()).unwrap();
        assert!(r.steps.is_empty() && r.reached);
    }

    #[test]
    fn exhaustive_tie_break_is_lexicographic() {
        let (c4, _) = c4_mixture();
        let mix3 = exact_mixture_moments(
            &c4,
            3,
            &[(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)],
        )
        .unwrap();
        let cfg = DecorrelateConfig {
            alpha: 0.01,
            strategy: SearchStrategy::Exhaustive,
            ..Default::default()
        };
        let r = decorrelate(&mix3, &c4, &cfg).unwrap();
        assert_eq!((r.steps[0].pivot, r.steps[0].value), (0, 0));
    }

    #[test]
    fn chain_rule_on_mixture() {
        let c6 = generate(Family::Cycle, 6, 0, ProblemKind::MaxCutBisection).unwrap();
        let mix = exact_mixture_moments(
            &c6,
            2,
            &[
                (vec![0, 1, 0, 1, 0, 1], 0.3),
                (vec![1, 0, 1, 0, 1, 0], 0.2),
                (vec![0, 0, 0, 1, 1, 1], 0.5),
            ],
        )
        .unwrap();
        for i in 0..6 {
            let (lhs, rhs) = chain_rule_terms(&mix, &c6, i).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "{i}: {lhs} vs {rhs}");
        }
    }

    fn joint_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 4).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-9).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn statistical_distance_bound(j in joint_strategy()) {
            let mi_bits = mutual_information(&j, 2, 2);
            let (px, py) = marginals(&j, 2, 2);
            let bound = (2.0 * mi_bits * std::f64::consts::LN_2).sqrt();
            for a in 0..2 {
                for b in 0..2 {
                    prop_assert!((j[a * 2 + b] - px[a] * py[b]).abs() <= bound + 1e-12);
                }
            }
        }

        #[test]
        fn covariance_bound(j in joint_strategy()) {
            let mi_bits = mutual_information(&j, 2, 2);
            let (px, py) = marginals(&j, 2, 2);
            let ex = px[0] - px[1];
            let ey = py[0] - py[1];
            let exy = j[0] - j[1] - j[2] + j[3];
            let bound = 4.0 * (2.0 * mi_bits * std::f64::consts::LN_2).sqrt();
            prop_assert!((exy - ex * ey).abs() <= bound + 1e-12);
        }

        #[test]
        fn entropy_at_most_log_q(v in prop::collection::vec(0.0f64..1.0, 2..6)) {
            let s: f64 = v.iter().sum();
            prop_assume!(s > 1e-9);
            let p: Vec<f64> = v.iter().map(|x| x / s).collect();
            prop_assert!(entropy(&p) <= (p.len() as f64).log2() + 1e-12);
        }

        #[test]
        fn two_mutual_information_paths_agree(j in joint_strategy()) {
            let a = mutual_information(&j, 2, 2);
            let b = mutual_information_by_conditioning(&j, 2, 2);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
