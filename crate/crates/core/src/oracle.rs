//! Exact and Monte Carlo reference computations.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CspInstance, Sense};
use crate::lasserre::{enumerate_index, MomentSolution};
use crate::rng::rng_from_seed;

pub const BRUTE_FORCE_CAP_CONSTRAINED: usize = 24;
pub const BRUTE_FORCE_CAP_FREE: usize = 20;

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub optimum: f64,
    /// Lexicographically first optimal assignment (`x_0` most significant).
    pub witness: Vec<u8>,
    pub count: u64,
    /// Number of assignments that passed the cardinality filter.
    pub enumerated: u64,
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    key: u64,
    code: u64,
    count: u64,
    seen: u64,
}

impl Best {
    fn empty() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            key: u64::MAX,
            code: 0,
            count: 0,
            seen: 0,
        }
    }

    fn offer(&mut self, value: f64, key: u64, code: u64) {
        self.seen += 1;
        if value > self.value + TIE_TOL {
            *self = Best {
                value,
                key,
                code,
                count: 1,
                seen: self.seen,
            };
        } else if value >= self.value - TIE_TOL {
            self.count += 1;
            if key < self.key {
                self.key = key;
                self.code = code;
            }
        }
    }

    fn merge(mut self, other: Best) -> Best {
        let seen = self.seen + other.seen;
        if other.count == 0 {
            self.seen = seen;
            return self;
        }
        if self.count == 0 || other.value > self.value + TIE_TOL {
            return Best { seen, ..other };
        }
        if other.value >= self.value - TIE_TOL {
            self.count += other.count;
            if other.key < self.key {
                self.key = other.key;
                self.code = other.code;
            }
        }
        self.seen = seen;
        self
    }
}

fn labels_of(code: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((code >> i) & 1) as u8).collect()
}

/// Exhaustive optimum of a boolean instance, optionally restricted to
/// assignments meeting the cardinality constraint (exactly for uniform vertex
/// weights, to `1e-9` otherwise).
pub fn brute_force(inst: &CspInstance, respect_cardinality: bool) -> Result<ExactResult> {
    inst.require_boolean()?;
    let n = inst.n;
    let cap = if respect_cardinality {
        BRUTE_FORCE_CAP_CONSTRAINED
    } else {
        BRUTE_FORCE_CAP_FREE
    };
    if n > cap {
        return Err(Error::Capacity {
            what: "brute-force variable count".into(),
            size: n as u128,
            cap: cap as u128,
        });
    }
    let sign = match inst.sense() {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let uniform = inst.has_uniform_weights();
    let c1 = inst.cardinality.proportions()[1];
    let ones_target = c1 * n as f64;
    if respect_cardinality && uniform && (ones_target - ones_target.round()).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "no assignment of {n} equally weighted variables has a {c1} fraction of ones"
        )));
    }
    let ones_target = ones_target.round() as u32;
    let accept = |code: u64, weight1: f64| -> bool {
        if !respect_cardinality {
            true
        } else if uniform {
            code.count_ones() == ones_target
        } else {
            (weight1 - c1).abs() <= 1e-9
        }
    };

    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, term) in inst.payoffs.iter().enumerate() {
        for &v in &term.scope {
            touching[v].push(t);
        }
    }
    let eval_term = |t: usize, code: u64| -> f64 {
        let term = &inst.payoffs[t];
        let mut idx = 0usize;
        for (b, &v) in term.scope.iter().enumerate() {
            idx |= (((code >> v) & 1) as usize) << b;
        }
        term.weight * term.table[idx]
    };
    let lex_key = |code: u64| -> u64 {
        if n == 0 {
            0
        } else {
            code.reverse_bits() >> (64 - n)
        }
    };

    let total: u64 = 1u64 << n;
    let chunk_bits = n.saturating_sub(4).min(16);
    let chunk: u64 = 1u64 << chunk_bits;
    let chunks = total / chunk;
    let best = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut best = Best::empty();
            let start = ci * chunk;
            let mut g = start ^ (start >> 1);
            let mut value: f64 = (0..inst.payoffs.len()).map(|t| eval_term(t, g)).sum();
            let mut w1: f64 = (0..n)
                .filter(|&v| (g >> v) & 1 == 1)
                .map(|v| inst.vertex_weights[v])
                .sum();
            for s in start..start + chunk {
                if s != start {
                    let flip = s.trailing_zeros() as usize;
                    let ng = g ^ (1u64 << flip);
                    for &t in &touching[flip] {
                        value += eval_term(t, ng) - eval_term(t, g);
                    }
                    if (ng >> flip) & 1 == 1 {
                        w1 += inst.vertex_weights[flip];
                    } else {
                        w1 -= inst.vertex_weights[flip];
                    }
                    g = ng;
                }
                if accept(g, w1) {
                    best.offer(sign * value, lex_key(g), g);
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best::empty(), Best::merge);

    if best.count == 0 {
        return Err(Error::invalid("no assignment satisfies the cardinality constraint"));
    }
    let witness = labels_of(best.code, n);
    let optimum = inst.evaluate(&witness)?;
    Ok(ExactResult {
        optimum,
        witness,
        count: best.count,
        enumerated: best.seen,
    })
}

/// Straightforward enumeration used to cross-check [`brute_force`].
pub fn brute_force_naive(inst: &CspInstance, respect_cardinality: bool) -> Result<ExactResult> {
    let n = inst.n;
    if n > 16 {
        return Err(Error::Capacity {
            what: "naive enumeration".into(),
            size: n as u128,
            cap: 16,
        });
    }
    let sign = if inst.sense() == Sense::Maximize { 1.0 } else { -1.0 };
    let c = inst.cardinality.proportions();
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut count = 0;
    let mut seen = 0;
    // lexicographic order, x_0 most significant
    for k in 0u64..(1u64 << n) {
        let x: Vec<u8> = (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8).collect();
        if respect_cardinality {
            let b = inst.balance(&x)?;
            if (b[0] - c[0]).abs() > 1e-9 {
                continue;
            }
        }
        seen += 1;
        let v = sign * inst.evaluate(&x)?;
        match &best {
            Some((bv, _)) if v <= *bv + TIE_TOL => {
                if v >= *bv - TIE_TOL {
                    count += 1;
                }
            }
            _ => {
                best = Some((v, x));
                count = 1;
            }
        }
    }
    let (_, witness) =
        best.ok_or_else(|| Error::invalid("no assignment satisfies the cardinality constraint"))?;
    Ok(ExactResult {
        optimum: inst.evaluate(&witness)?,
        witness,
        count,
        enumerated: seen,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub sigma: f64,
    pub samples: u64,
}

/// Monte Carlo estimate of `P(Z1 <= t1, Z2 <= t2)` with binomial standard error.
pub fn mc_bvn(t1: f64, t2: f64, rho: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 10_000 {
        return Err(Error::arg("mc_bvn requires at least 10^4 samples"));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::arg("correlation must lie in [-1, 1]"));
    }
    let mut rng = rng_from_seed(seed);
    let s = (1.0 - rho * rho).max(0.0).sqrt();
    let mut hits = 0u64;
    for _ in 0..samples {
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        let z2 = rho * g1 + s * g2;
        if g1 <= t1 && z2 <= t2 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        sigma: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Moment matrix of a finite mixture of assignments:
/// `G[(S, a), (T, b)] = sum_x p_x [x_S = a][x_T = b]`.
pub fn exact_mixture_moments(
    inst: &CspInstance,
    level: usize,
    mixture: &[(Vec<u8>, f64)],
) -> Result<MomentSolution> {
    inst.require_boolean()?;
    if mixture.is_empty() {
        return Err(Error::arg("empty mixture"));
    }
    let total: f64 = mixture.iter().map(|m| m.1).sum();
    if (total - 1.0).abs() > 1e-12 || mixture.iter().any(|m| m.1 < 0.0) {
        return Err(Error::arg(format!(
            "mixture probabilities must be nonnegative and sum to 1, got {total}"
        )));
    }
    let masks = enumerate_index(inst.n, level);
    let d = masks.len();
    let mut g = DMatrix::zeros(d, d);
    let mut objective = 0.0;
    for (x, p) in mixture {
        if x.len() != inst.n || x.iter().any(|&a| a > 1) {
            return Err(Error::arg("mixture assignment does not match the instance"));
        }
        let vals = x
            .iter()
            .enumerate()
            .fold(0u64, |m, (v, &a)| if a == 1 { m | (1u64 << v) } else { m });
        let ind: Vec<usize> = masks
            .iter()
            .enumerate()
            .filter(|(_, &(s, a))| vals & s == a)
            .map(|(r, _)| r)
            .collect();
        for &r in &ind {
            for &c in &ind {
                g[(r, c)] += p;
            }
        }
        objective += p * inst.evaluate(x)?;
    }
    MomentSolution::new(inst.n, level, g, objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, load_edge_list, Family, ProblemKind};
    use crate::lasserre::{check_feasibility, Tolerances};

    #[test]
    fn small_optima() {
        let c4 = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let r = brute_force(&c4, true).unwrap();
        assert_eq!(r.optimum, 1.0);
        assert_eq!(r.witness, vec![0, 1, 0, 1]);
        assert_eq!(r.count, 2);
        assert_eq!(r.enumerated, 6);
        let k4 = generate(Family::Complete, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        assert!((brute_force(&k4, true).unwrap().optimum - 4.0 / 6.0).abs() < 1e-15);
        let c5 = load_edge_list("kind alpha-cut 0.4\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
        assert!((brute_force(&c5, false).unwrap().optimum - 0.8).abs() < 1e-15);
    }

    #[test]
    fn gray_code_matches_naive() {
        for seed in 0..6 {
            for &n in &[4usize, 6, 8, 10] {
                let inst =
                    generate(Family::Gnp { p: 0.5 }, n, seed, ProblemKind::MaxCutBisection);
                let Ok(inst) = inst else { continue };
                for flag in [true, false] {
                    let a = brute_force(&inst, flag).unwrap();
                    let b = brute_force_naive(&inst, flag).unwrap();
                    assert!((a.optimum - b.optimum).abs() < 1e-12);
                    assert_eq!(a.witness, b.witness);
                    assert_eq!(a.count, b.count);
                    assert_eq!(a.enumerated, b.enumerated);
                }
            }
        }
        let min = generate(Family::Gnp { p: 0.6 }, 8, 3, ProblemKind::MinCutBisection).unwrap();
        let a = brute_force(&min, true).unwrap();
        let b = brute_force_naive(&min, true).unwrap();
        assert_eq!(a.witness, b.witness);
        let sat = load_edge_list("kind max2sat\n0 1\n~0 2\n~1 ~2\n2 3\n~3 0\n").unwrap();
        for flag in [true, false] {
            let a = brute_force(&sat, flag).unwrap();
            let b = brute_force_naive(&sat, flag).unwrap();
            assert_eq!(a.witness, b.witness);
        }
    }

    #[test]
    fn constrained_never_beats_free() {
        for seed in 0..5 {
            let inst = generate(Family::Gnp { p: 0.4 }, 10, seed, ProblemKind::MaxCutBisection)
                .unwrap();
            let a = brute_force(&inst, true).unwrap().optimum;
            let b = brute_force(&inst, false).unwrap().optimum;
            assert!(a <= b + 1e-15);
        }
    }

    #[test]
    fn caps() {
        let big = generate(Family::Cycle, 22, 0, ProblemKind::MaxCutBisection).unwrap();
        assert!(matches!(brute_force(&big, false), Err(Error::Capacity { .. })));
    }

    #[test]
    fn mc_bvn_reference_points() {
        let e = mc_bvn(0.0, 0.0, 0.0, 1_000_000, 1).unwrap();
        assert!((e.estimate - 0.25).abs() <= 4.0 * e.sigma);
        let e = mc_bvn(0.0, 0.0, 1.0, 1_000_000, 2).unwrap();
        assert!((e.estimate - 0.5).abs() <= 4.0 * e.sigma);
        assert!(mc_bvn(0.0, 0.0, 0.0, 10, 0).is_err());
    }

    #[test]
    fn mixtures() {
        let c4 = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let point = exact_mixture_moments(&c4, 2, &[(vec![0, 1, 0, 1], 1.0)]).unwrap();
        assert_eq!(point.objective_value, 1.0);
        assert_eq!(point.bias(0), 1.0);
        let mix = exact_mixture_moments(
            &c4,
            2,
            &[(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)],
        )
        .unwrap();
        let j = mix.pair_joint(0, 2);
        assert_eq!(j, [[0.5, 0.0], [0.0, 0.5]]);
        let j = mix.pair_joint(0, 1);
        assert_eq!(j, [[0.0, 0.5], [0.5, 0.0]]);
        let rep = check_feasibility(&mix, &c4, &Tolerances::default()).unwrap();
        assert!(rep.consistency < 1e-15 && rep.cardinality < 1e-15 && rep.psd < 1e-12);
        assert!(exact_mixture_moments(&c4, 2, &[(vec![0, 1, 0, 1], 0.7)]).is_err());
    }
}
