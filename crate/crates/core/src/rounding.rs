//! Bias-preserving Gaussian threshold rounding, balance repair and the end
//! to end pipeline.
//!
//! Each vertex vector splits as `v_i = mu_i I + w_i` with `w_i` orthogonal to
//! `I`. A rounding trial draws one Gaussian vector `g` in the span of the
//! `w_i` and labels vertex `i` with `+1` iff `<g, w_i / |w_i|> <= t_i`, where
//! `t_i = Phi^-1((1 + mu_i) / 2)`; the marginal of every label is then exactly
//! `(1 + mu_i) / 2`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::independence::{decorrelate, ConditioningStep, DecorrelateConfig, SearchStrategy};
use crate::instance::CspInstance;
use crate::lasserre::{build_relaxation, MomentSolution};
use crate::normal;
use crate::rng::{rng_from_seed, sub_seed};
use crate::sdp_solver::{solve, SolveReport, SolverConfig};

/// `1 - mu^2` below this marks a vertex as deterministic.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Largest negative eigenvalue of the orthogonal Gram block accepted by
/// [`bias_decompose`].
pub const FACTOR_PSD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexBias {
    pub mu: f64,
    /// Coordinates of `w_i` in an orthonormal basis of the complement of `I`.
    pub w: Vec<f64>,
    /// `w_i / |w_i|`, or zeros when degenerate.
    pub direction: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasProfile {
    pub dimension: usize,
    pub vertices: Vec<VertexBias>,
}

impl BiasProfile {
    /// Builds a profile from biases and orthogonal parts given directly.
    pub fn from_parts(mus: &[f64], ws: &[Vec<f64>]) -> Result<Self> {
        if mus.len() != ws.len() {
            return Err(Error::arg("bias and vector counts differ"));
        }
        let dimension = ws.first().map_or(0, |w| w.len());
        if ws.iter().any(|w| w.len() != dimension) {
            return Err(Error::arg("orthogonal parts have different dimensions"));
        }
        let vertices = mus
            .iter()
            .zip(ws)
            .map(|(&mu, w)| {
                if !(-1.0..=1.0).contains(&mu) {
                    return Err(Error::arg(format!("bias {mu} outside [-1, 1]")));
                }
                Ok(vertex(mu, w.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dimension,
            vertices,
        })
    }

    /// `v_i` embedded with `I` as the first coordinate.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        let v = &self.vertices[i];
        std::iter::once(v.mu).chain(v.w.iter().copied()).collect()
    }

    /// Negates every bias and orthogonal part.
    pub fn negated(&self) -> Self {
        Self {
            dimension: self.dimension,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexBias {
                    mu: -v.mu,
                    w: v.w.iter().map(|x| -x).collect(),
                    direction: v.direction.iter().map(|x| -x).collect(),
                    degenerate: v.degenerate,
                })
                .collect(),
        }
    }
}

fn vertex(mu: f64, w: Vec<f64>) -> VertexBias {
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let degenerate = 1.0 - mu * mu < DEGENERATE_TOL || norm * norm < DEGENERATE_TOL;
    let direction = if degenerate {
        vec![0.0; w.len()]
    } else {
        w.iter().map(|x| x / norm).collect()
    };
    VertexBias {
        mu: mu.clamp(-1.0, 1.0),
        w,
        direction,
        degenerate,
    }
}

/// Splits each `v_i` into `mu_i I + w_i` and realizes the `w_i` as explicit
/// coordinates by factorizing `K_ij = <v_i, v_j> - mu_i mu_j`.
pub fn bias_decompose(sol: &MomentSolution) -> Result<BiasProfile> {
    if sol.level < 2 {
        return Err(Error::arg("bias decomposition needs level at least 2"));
    }
    let n = sol.n;
    let mus: Vec<f64> = (0..n).map(|i| sol.bias(i)).collect();
    let k = DMatrix::from_fn(n, n, |i, j| sol.spin_inner(i, j) - mus[i] * mus[j]);
    let k = crate::lasserre::symmetrize(k);
    let eig = SymmetricEigen::new(k);
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min < -FACTOR_PSD_TOL {
        return Err(Error::Numerical(format!(
            "orthogonal Gram block has eigenvalue {min:e}; solution is not PSD"
        )));
    }
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let keep: Vec<usize> = (0..n)
        .filter(|&c| eig.eigenvalues[c] > 1e-12 * top.max(1.0))
        .collect();
    let ws: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            keep.iter()
                .map(|&c| eig.eigenvectors[(i, c)] * eig.eigenvalues[c].sqrt())
                .collect()
        })
        .collect();
    let vertices = mus
        .iter()
        .zip(ws)
        .map(|(&mu, w)| vertex(mu.clamp(-1.0, 1.0), w))
        .collect();
    Ok(BiasProfile {
        dimension: keep.len(),
        vertices,
    })
}

/// `Phi^-1((1 + mu) / 2)`; `+inf` at `mu = 1` (always `+1`) and `-inf` at
/// `mu = -1` (never `+1`). Exactly odd in `mu`.
pub fn threshold(mu: f64) -> f64 {
    let mu = mu.clamp(-1.0, 1.0);
    if mu < 0.0 {
        -threshold(-mu)
    } else {
        normal::inv_cdf(0.5 + 0.5 * mu)
    }
}

/// Labels in `{+1, -1}` from one shared Gaussian vector drawn from `seed`.
pub fn round_labels(profile: &BiasProfile, seed: u64) -> Vec<i8> {
    let mut rng = rng_from_seed(seed);
    let g: Vec<f64> = (0..profile.dimension)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    profile
        .vertices
        .iter()
        .map(|v| {
            if v.degenerate {
                return if v.mu >= 0.0 { 1 } else { -1 };
            }
            let xi: f64 = v.direction.iter().zip(&g).map(|(a, b)| a * b).sum();
            if xi <= threshold(v.mu) {
                1
            } else {
                -1
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub moved: Vec<usize>,
    pub moved_weight: f64,
    pub balance_before: f64,
    pub balance_after: f64,
    pub value_before: f64,
    pub value_after: f64,
    /// Set when the required move exceeded the cap; the labels are unchanged.
    pub refused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedAssignment {
    pub labels: Vec<i8>,
    pub value: f64,
    /// `E_{i ~ W}[y_i]`.
    pub balance: f64,
    pub seed: u64,
    pub repair: Option<RepairReport>,
}

pub fn round(profile: &BiasProfile, inst: &CspInstance, seed: u64) -> Result<RoundedAssignment> {
    if profile.vertices.len() != inst.n {
        return Err(Error::arg("profile and instance sizes differ"));
    }
    let labels = round_labels(profile, seed);
    Ok(RoundedAssignment {
        value: inst.evaluate_spins(&labels)?,
        balance: inst.spin_balance(&labels),
        labels,
        seed,
        repair: None,
    })
}

/// Moves minimum weighted-degree vertices (ties to the lowest id) off the
/// heavy side while each move brings `E_W[y]` closer to `target`. Stops within
/// one vertex weight of the target. When the weight that must move,
/// `|balance - target| / 2`, exceeds `delta_cap` the assignment is returned
/// unchanged with `refused` set.
pub fn repair_balance(
    inst: &CspInstance,
    assignment: &RoundedAssignment,
    target: f64,
    delta_cap: f64,
) -> Result<RoundedAssignment> {
    if assignment.labels.len() != inst.n {
        return Err(Error::arg("assignment length differs from n"));
    }
    let mut labels = assignment.labels.clone();
    let before_value = inst.evaluate_spins(&labels)?;
    let before = inst.spin_balance(&labels);
    let needed = (before - target).abs() / 2.0;
    let mut report = RepairReport {
        moved: Vec::new(),
        moved_weight: 0.0,
        balance_before: before,
        balance_after: before,
        value_before: before_value,
        value_after: before_value,
        refused: false,
    };
    if needed > delta_cap {
        report.refused = true;
        return Ok(RoundedAssignment {
            labels,
            value: before_value,
            balance: before,
            seed: assignment.seed,
            repair: Some(report),
        });
    }
    let degree = inst.weighted_degrees();
    let w = &inst.vertex_weights;
    let mut order: Vec<usize> = (0..inst.n).filter(|&i| w[i] > 0.0).collect();
    order.sort_by(|&a, &b| degree[a].total_cmp(&degree[b]).then(a.cmp(&b)));
    let mut s = before;
    loop {
        let heavy: i8 = if s > target { 1 } else { -1 };
        let Some(&v) = order.iter().find(|&&i| labels[i] == heavy) else {
            break;
        };
        let next = s - 2.0 * heavy as f64 * w[v];
        if (next - target).abs() >= (s - target).abs() {
            break;
        }
        labels[v] = -heavy;
        s = next;
        report.moved.push(v);
        report.moved_weight += w[v];
    }
    let value = inst.evaluate_spins(&labels)?;
    let balance = inst.spin_balance(&labels);
    report.balance_after = balance;
    report.value_after = value;
    Ok(RoundedAssignment {
        labels,
        value,
        balance,
        seed: assignment.seed,
        repair: Some(report),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub level: usize,
    pub alpha: f64,
    pub depth: usize,
    pub strategy: SearchStrategy,
    pub include_diagonal: bool,
    pub trials: usize,
    pub seed: u64,
    pub delta_cap: f64,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            level: 2,
            alpha: 0.05,
            depth: 4,
            strategy: SearchStrategy::Sampled,
            include_diagonal: true,
            trials: 32,
            seed: 0,
            delta_cap: 1.0,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStatistics {
    pub trials: usize,
    pub mean_balance: f64,
    pub var_balance: f64,
    pub mean_value: f64,
    pub var_value: f64,
    pub mean_repaired_value: f64,
    pub var_repaired_value: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 {
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub value: f64,
    pub balance: f64,
    pub repaired_value: f64,
    pub repaired_balance: f64,
    pub refused: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineResult {
    pub best: RoundedAssignment,
    pub best_trial: usize,
    pub statistics: TrialStatistics,
    pub sdp_value: f64,
    /// Objective of the solution actually rounded (after conditioning).
    pub rounded_sdp_value: f64,
    pub achieved_alpha: f64,
    pub alpha_reached: bool,
    pub steps: Vec<ConditioningStep>,
    pub solve_report: Option<SolveReport>,
    pub trials: Vec<TrialRecord>,
}

/// Seed used for the conditioning stage of a pipeline run.
pub fn conditioning_seed(seed: u64) -> u64 {
    sub_seed(!seed, 0)
}

/// Decorrelates, rounds `cfg.trials` times with seeds `sub_seed(cfg.seed, t)`,
/// repairs each trial, and keeps the best repaired value (ties to the lowest
/// trial index).
pub fn pipeline_from_solution(
    inst: &CspInstance,
    sol: &MomentSolution,
    cfg: &PipelineConfig,
) -> Result<PipelineResult> {
    if cfg.trials == 0 {
        return Err(Error::arg("at least one rounding trial is required"));
    }
    let dec = decorrelate(
        sol,
        inst,
        &DecorrelateConfig {
            alpha: cfg.alpha,
            strategy: cfg.strategy,
            depth: cfg.depth,
            seed: conditioning_seed(cfg.seed),
            include_diagonal: cfg.include_diagonal,
        },
    )?;
    let profile = bias_decompose(&dec.solution)?;
    let target = inst.cardinality.spin_target();
    let sense = inst.sense();
    let mut best: Option<(usize, RoundedAssignment)> = None;
    let (mut bal, mut val, mut rep) = (Vec::new(), Vec::new(), Vec::new());
    let mut records = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let seed = sub_seed(cfg.seed, t as u64);
        let raw = round(&profile, inst, seed)?;
        let fixed = repair_balance(inst, &raw, target, cfg.delta_cap)?;
        records.push(TrialRecord {
            trial: t,
            seed,
            value: raw.value,
            balance: raw.balance,
            repaired_value: fixed.value,
            repaired_balance: fixed.balance,
            refused: fixed.repair.as_ref().is_some_and(|r| r.refused),
        });
        bal.push(raw.balance);
        val.push(raw.value);
        rep.push(fixed.value);
        let better = match &best {
            None => true,
            Some((_, b)) => {
                let refused = |r: &RoundedAssignment| r.repair.as_ref().is_some_and(|x| x.refused);
                match (refused(&fixed), refused(b)) {
                    (false, true) => true,
                    (true, false) => false,
                    _ => sense.better(fixed.value, b.value),
                }
            }
        };
        if better {
            best = Some((t, fixed));
        }
    }
    let (best_trial, best) = best.expect("at least one trial");
    let (mean_balance, var_balance) = mean_var(&bal);
    let (mean_value, var_value) = mean_var(&val);
    let (mean_repaired_value, var_repaired_value) = mean_var(&rep);
    Ok(PipelineResult {
        best,
        best_trial,
        statistics: TrialStatistics {
            trials: cfg.trials,
            mean_balance,
            var_balance,
            mean_value,
            var_value,
            mean_repaired_value,
            var_repaired_value,
        },
        sdp_value: sol.objective_value,
        rounded_sdp_value: dec.solution.objective_value,
        achieved_alpha: dec.achieved_alpha,
        alpha_reached: dec.reached,
        steps: dec.steps,
        solve_report: None,
        trials: records,
    })
}

/// Solve, decorrelate, round, repair.
pub fn pipeline(inst: &CspInstance, cfg: &PipelineConfig) -> Result<PipelineResult> {
    let rel = build_relaxation(inst, cfg.level)?;
    let (sol, report) = solve(&rel, &cfg.solver)?;
    let mut out = pipeline_from_solution(inst, &sol, cfg)?;
    out.solve_report = Some(report);
    Ok(out)
}
