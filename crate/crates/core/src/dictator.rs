//! Dictatorship-test gadgets on `{+1, -1}^R` built from a level-2 solution.
//!
//! A point of the cube is a bit mask: bit `l` set means coordinate `l` is
//! `-1`. Edge tables are dense and row-major: entry `x * 2^R + y`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::CspInstance;
use crate::lasserre::MomentSolution;
use crate::oracle::brute_force;
use crate::rng::rng_from_seed;
use crate::rounding::{bias_decompose, BiasProfile, RoundedAssignment, DEGENERATE_TOL};

pub const MAX_DIMENSION: usize = 12;
pub const MAX_BOOLEAN_DIMENSION: usize = 4;
pub const MAX_GRID_DIMENSION: usize = 2;

fn spin_of(x: usize, l: usize) -> f64 {
    if (x >> l) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictGadget {
    pub schema_version: u32,
    pub r: usize,
    pub epsilon: f64,
    /// `W(x)`, indexed by point.
    pub vertex_weights: Vec<f64>,
    /// Symmetric, row-major over points.
    pub edge_weights: Vec<f64>,
    /// Spin biases `mu_i` of the source solution.
    pub vertex_biases: Vec<f64>,
    /// Normalized relaxation value `sum_e w_e P_e(x_i != x_j) / sum_e w_e`.
    pub sdp_value: f64,
    /// Spin balance the dictators should reproduce.
    pub target_balance: f64,
    /// Probability mass of negative pair entries clipped to zero.
    pub clipped_mass: f64,
    pub source_kind: String,
    pub source_n: usize,
    pub source_level: usize,
    pub source_objective: f64,
}

impl DictGadget {
    pub fn points(&self) -> usize {
        1 << self.r
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.edge_weights[x * self.points() + y]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutFunction {
    pub r: usize,
    pub values: Vec<f64>,
}

impl CutFunction {
    pub fn new(r: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << r {
            return Err(Error::arg(format!(
                "cut function on R = {r} needs {} values, got {}",
                1usize << r,
                values.len()
            )));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::arg("cut function values must lie in [-1, 1]"));
        }
        Ok(Self { r, values })
    }

    pub fn constant(r: usize, c: f64) -> Result<Self> {
        Self::new(r, vec![c; 1 << r])
    }

    /// `F(x) = x^(l)`.
    pub fn dictator(r: usize, l: usize) -> Self {
        assert!(l < r, "coordinate {l} outside R = {r}");
        Self {
            r,
            values: (0..1usize << r).map(|x| spin_of(x, l)).collect(),
        }
    }

    /// Boolean function number `id`: bit `x` of `id` set means `F(x) = -1`.
    pub fn boolean(r: usize, id: u64) -> Self {
        Self {
            r,
            values: (0..1usize << r)
                .map(|x| if (id >> x) & 1 == 1 { -1.0 } else { 1.0 })
                .collect(),
        }
    }

    pub fn majority(r: usize) -> Self {
        Self {
            r,
            values: (0..1usize << r)
                .map(|x| {
                    let s: f64 = (0..r).map(|l| spin_of(x, l)).sum();
                    s.signum()
                })
                .collect(),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            r: self.r,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

/// Pair table indexed by labels (`0` is spin `+1`).
type Pair = [[f64; 2]; 2];

/// Noisy edge table `nu(a, b) = sum mu_e(a', b') K_i(a' -> a) K_j(b' -> b)`.
fn noisy(mu_e: &Pair, mi: [f64; 2], mj: [f64; 2], eps: f64) -> Pair {
    let k = |m: [f64; 2], from: usize, to: usize| {
        (1.0 - eps) * if from == to { 1.0 } else { 0.0 } + eps * m[to]
    };
    let mut out = [[0.0; 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            for ap in 0..2 {
                for bp in 0..2 {
                    *cell += mu_e[ap][bp] * k(mi, ap, a) * k(mj, bp, b);
                }
            }
        }
    }
    out
}

/// Builds the gadget of a cut-type instance from a solution of level at least 2.
pub fn build_gadget(
    sol: &MomentSolution,
    inst: &CspInstance,
    epsilon: f64,
    r: usize,
) -> Result<DictGadget> {
    inst.require_boolean()?;
    inst.require_binary_scopes()?;
    if !inst.kind.is_cut() {
        return Err(Error::arg("dictatorship gadgets are built for cut payoffs"));
    }
    if sol.level < 2 || sol.n != inst.n {
        return Err(Error::arg("gadget needs a level-2 solution of the same instance"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::arg(format!("noise rate {epsilon} outside [0, 1]")));
    }
    if r == 0 || r > MAX_DIMENSION {
        let entries = 1u128 << (2 * r.min(63));
        return Err(Error::Capacity {
            what: format!("gadget edge table for R = {r} (bytes)"),
            size: entries.saturating_mul(8),
            cap: 8u128 << (2 * MAX_DIMENSION),
        });
    }
    let total: f64 = inst.payoffs.iter().map(|t| t.weight).sum();
    if total <= 0.0 {
        return Err(Error::invalid("instance has no payoff weight"));
    }
    let marg = |i: usize| {
        let m = sol.marginal(i);
        let (a, b) = (m[0].max(0.0), m[1].max(0.0));
        [a / (a + b), b / (a + b)]
    };

    let mut clipped = 0.0;
    let mut sdp = 0.0;
    let mut edges: Vec<(f64, Pair)> = Vec::new();
    for t in &inst.payoffs {
        let (i, j) = (t.scope[0], t.scope[1]);
        let mut p = sol.pair_joint(i, j);
        let mut s = 0.0;
        for cell in p.iter_mut().flatten() {
            if *cell < 0.0 {
                clipped += -*cell * t.weight / total;
                *cell = 0.0;
            }
            s += *cell;
        }
        for cell in p.iter_mut().flatten() {
            *cell /= s;
        }
        let w = t.weight / total;
        sdp += w * (p[0][1] + p[1][0]);
        edges.push((w, noisy(&p, marg(i), marg(j), epsilon)));
    }

    // the product over coordinates depends only on the counts of each label pair
    let side = r + 1;
    let mut by_counts = vec![0.0; side * side * side];
    for n01 in 0..=r {
        for n10 in 0..=r - n01 {
            for n11 in 0..=r - n01 - n10 {
                let n00 = r - n01 - n10 - n11;
                let mut v = 0.0;
                for (w, nu) in &edges {
                    let fwd = nu[0][0].powi(n00 as i32)
                        * nu[0][1].powi(n01 as i32)
                        * nu[1][0].powi(n10 as i32)
                        * nu[1][1].powi(n11 as i32);
                    let rev = nu[0][0].powi(n00 as i32)
                        * nu[1][0].powi(n01 as i32)
                        * nu[0][1].powi(n10 as i32)
                        * nu[1][1].powi(n11 as i32);
                    v += w * 0.5 * (fwd + rev);
                }
                by_counts[(n01 * side + n10) * side + n11] = v;
            }
        }
    }
    let pts = 1usize << r;
    let mask = pts - 1;
    let mut edge_weights = vec![0.0; pts * pts];
    edge_weights
        .par_chunks_mut(pts)
        .enumerate()
        .for_each(|(x, row)| {
            for (y, cell) in row.iter_mut().enumerate() {
                let n11 = (x & y).count_ones() as usize;
                let n10 = (x & !y & mask).count_ones() as usize;
                let n01 = (!x & y & mask).count_ones() as usize;
                *cell = by_counts[(n01 * side + n10) * side + n11];
            }
        });

    let wsum: f64 = inst.vertex_weights.iter().sum();
    let margs: Vec<[f64; 2]> = (0..inst.n).map(marg).collect();
    let vertex_weights = (0..pts)
        .map(|x| {
            let minus = x.count_ones() as i32;
            inst.vertex_weights
                .iter()
                .zip(&margs)
                .map(|(w, m)| w / wsum * m[0].powi(r as i32 - minus) * m[1].powi(minus))
                .sum()
        })
        .collect();

    Ok(DictGadget {
        schema_version: crate::SCHEMA_VERSION,
        r,
        epsilon,
        vertex_weights,
        edge_weights,
        vertex_biases: (0..inst.n).map(|i| sol.bias(i).clamp(-1.0, 1.0)).collect(),
        sdp_value: sdp,
        target_balance: inst.cardinality.spin_target(),
        clipped_mass: clipped,
        source_kind: inst.kind.name().to_string(),
        source_n: inst.n,
        source_level: sol.level,
        source_objective: sol.objective_value,
    })
}

fn check_dims(g: &DictGadget, f: &CutFunction) -> Result<()> {
    if f.r != g.r {
        return Err(Error::arg(format!("function has R = {}, gadget has R = {}", f.r, g.r)));
    }
    Ok(())
}

/// `1/2 E_{(x,y)}[1 - F(x) F(y)]`.
pub fn dict_value(g: &DictGadget, f: &CutFunction) -> Result<f64> {
    check_dims(g, f)?;
    Ok(value_unchecked(g, &f.values))
}

fn value_unchecked(g: &DictGadget, v: &[f64]) -> f64 {
    let pts = g.points();
    let mut s = 0.0;
    for (x, &fx) in v.iter().enumerate() {
        let row = &g.edge_weights[x * pts..(x + 1) * pts];
        s += row
            .iter()
            .zip(v)
            .map(|(w, fy)| w * (1.0 - fx * fy))
            .sum::<f64>();
    }
    0.5 * s
}

/// `E_{x ~ W}[F(x)]`.
pub fn gadget_balance(g: &DictGadget, f: &CutFunction) -> Result<f64> {
    check_dims(g, f)?;
    Ok(balance_unchecked(g, &f.values))
}

fn balance_unchecked(g: &DictGadget, v: &[f64]) -> f64 {
    g.vertex_weights.iter().zip(v).map(|(w, f)| w * f).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictatorViolation {
    pub coordinate: usize,
    pub value: f64,
    pub balance: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub epsilon: f64,
    pub sdp_value: f64,
    pub values: Vec<f64>,
    pub balances: Vec<f64>,
    pub min_value: f64,
    pub min_coordinate: usize,
    /// Largest `|balance - target|` over dictators.
    pub max_balance_error: f64,
    pub violations: Vec<DictatorViolation>,
}

impl CompletenessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every dictator and flags those below `sdp - 2 eps - tol` or off
/// the target balance by more than `tol`.
pub fn completeness(g: &DictGadget, tol: f64) -> CompletenessReport {
    let mut values = Vec::with_capacity(g.r);
    let mut balances = Vec::with_capacity(g.r);
    let mut violations = Vec::new();
    let bound = g.sdp_value - 2.0 * g.epsilon;
    for l in 0..g.r {
        let f = CutFunction::dictator(g.r, l);
        let v = value_unchecked(g, &f.values);
        let b = balance_unchecked(g, &f.values);
        if v < bound - tol {
            violations.push(DictatorViolation {
                coordinate: l,
                value: v,
                balance: b,
                reason: format!("value {v} below {bound}"),
            });
        }
        if (b - g.target_balance).abs() > tol {
            violations.push(DictatorViolation {
                coordinate: l,
                value: v,
                balance: b,
                reason: format!("balance {b} differs from target {}", g.target_balance),
            });
        }
        values.push(v);
        balances.push(b);
    }
    let (min_coordinate, min_value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (l, v)| if v < a.1 { (l, v) } else { a });
    let max_balance_error = balances
        .iter()
        .map(|b| (b - g.target_balance).abs())
        .fold(0.0, f64::max);
    CompletenessReport {
        epsilon: g.epsilon,
        sdp_value: g.sdp_value,
        values,
        balances,
        min_value,
        min_coordinate,
        max_balance_error,
        violations,
    }
}

/// `E_{x^(-l)}[Var_{x^(l)} F]` under the product measure with spin bias
/// `mu[k]` on coordinate `k`.
pub fn influence(f: &CutFunction, l: usize, mu: &[f64]) -> Result<f64> {
    if l >= f.r || mu.len() != f.r {
        return Err(Error::arg("coordinate or measure does not match the function"));
    }
    Ok(influence_unchecked(&f.values, f.r, l, mu))
}

fn influence_unchecked(v: &[f64], r: usize, l: usize, mu: &[f64]) -> f64 {
    let p: Vec<f64> = mu.iter().map(|m| 0.5 * (1.0 + m)).collect();
    let bit = 1usize << l;
    let mut s = 0.0;
    for x in 0..1usize << r {
        if x & bit != 0 {
            continue;
        }
        let mut w = 1.0;
        for (k, pk) in p.iter().enumerate() {
            if k != l {
                w *= if (x >> k) & 1 == 1 { 1.0 - pk } else { *pk };
            }
        }
        let d = v[x] - v[x | bit];
        s += w * p[l] * (1.0 - p[l]) * d * d;
    }
    s
}

/// Coefficients of `F` in the orthonormal basis
/// `chi_S(x) = prod_{l in S} (x^(l) - mu_l) / sqrt(1 - mu_l^2)`, indexed by the
/// subset mask `S`. Coordinates with `|mu_l| = 1` contribute no basis
/// functions.
pub fn biased_fourier(values: &[f64], mu: &[f64]) -> Vec<f64> {
    let r = mu.len();
    let mut c = values.to_vec();
    for (l, &m) in mu.iter().enumerate() {
        let p = 0.5 * (1.0 + m);
        let sigma = (1.0 - m * m).max(0.0).sqrt();
        let bit = 1usize << l;
        for x in 0..1usize << r {
            if x & bit != 0 {
                continue;
            }
            let (fp, fm) = (c[x], c[x | bit]);
            c[x] = p * fp + (1.0 - p) * fm;
            c[x | bit] = if sigma < DEGENERATE_TOL.sqrt() {
                0.0
            } else {
                // E[f chi] with chi(+1) = (1 - mu) / sigma, chi(-1) = (-1 - mu) / sigma
                (p * fp * (1.0 - m) + (1.0 - p) * fm * (-1.0 - m)) / sigma
            };
        }
    }
    c
}

/// Evaluates the multilinear expansion at real coordinates `z`.
pub fn eval_multilinear(coefs: &[f64], mu: &[f64], z: &[f64]) -> f64 {
    let r = mu.len();
    let mut c = coefs.to_vec();
    let mut len = 1usize << r;
    // contract the highest coordinate first
    for l in (0..r).rev() {
        let sigma = (1.0 - mu[l] * mu[l]).max(0.0).sqrt();
        let chi = if sigma < DEGENERATE_TOL.sqrt() {
            0.0
        } else {
            (z[l] - mu[l]) / sigma
        };
        let half = len / 2;
        for s in 0..half {
            c[s] += c[s + half] * chi;
        }
        len = half;
    }
    c[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundnessMode {
    BooleanExhaustive,
    /// Values on the mesh `-1, -1 + 2/m, ..., 1`.
    Grid { mesh: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoundnessRow {
    pub function_id: u64,
    pub balance: f64,
    pub max_influence: f64,
    /// `None` when the function is filtered out.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub tau: f64,
    pub mode: SoundnessMode,
    pub balance_tol: f64,
    pub functions: u64,
    pub admissible: u64,
    pub max_value: Option<f64>,
    pub witness_id: Option<u64>,
    pub witness: Option<CutFunction>,
    pub rows: Vec<SoundnessRow>,
}

fn grid_values(r: usize, mesh: usize, id: u64) -> Vec<f64> {
    let base = (mesh + 1) as u64;
    let mut id = id;
    (0..1usize << r)
        .map(|_| {
            let d = id % base;
            id /= base;
            -1.0 + 2.0 * d as f64 / mesh as f64
        })
        .collect()
}

/// Maximum value over functions with `|balance - target| <= balance_tol` and
/// every influence at most `tau` under each vertex measure `mu_i^R`.
pub fn soundness_enumerate(
    g: &DictGadget,
    tau: f64,
    mode: SoundnessMode,
    balance_tol: f64,
) -> Result<SoundnessReport> {
    let r = g.r;
    let functions: u64 = match mode {
        SoundnessMode::BooleanExhaustive => {
            if r > MAX_BOOLEAN_DIMENSION {
                return Err(Error::Capacity {
                    what: "boolean functions on the cube".into(),
                    size: 1u128 << (1u32 << r.min(7)),
                    cap: 1u128 << (1u32 << MAX_BOOLEAN_DIMENSION),
                });
            }
            1u64 << (1u32 << r)
        }
        SoundnessMode::Grid { mesh } => {
            if mesh == 0 {
                return Err(Error::arg("grid mesh must be at least 1"));
            }
            if r > MAX_GRID_DIMENSION {
                return Err(Error::Capacity {
                    what: "grid functions need R".into(),
                    size: r as u128,
                    cap: MAX_GRID_DIMENSION as u128,
                });
            }
            ((mesh + 1) as u64).pow(1u32 << r)
        }
    };
    let mut measures: Vec<f64> = Vec::new();
    for &m in &g.vertex_biases {
        if !measures.iter().any(|x| (x - m).abs() < 1e-12) {
            measures.push(m);
        }
    }
    let values_of = |id: u64| match mode {
        SoundnessMode::BooleanExhaustive => CutFunction::boolean(r, id).values,
        SoundnessMode::Grid { mesh } => grid_values(r, mesh, id),
    };
    let rows: Vec<SoundnessRow> = (0..functions)
        .into_par_iter()
        .map(|id| {
            let v = values_of(id);
            let balance = balance_unchecked(g, &v);
            let mut max_influence = 0.0f64;
            for &m in &measures {
                let mu = vec![m; r];
                for l in 0..r {
                    max_influence = max_influence.max(influence_unchecked(&v, r, l, &mu));
                }
            }
            let admissible =
                (balance - g.target_balance).abs() <= balance_tol && max_influence <= tau;
            SoundnessRow {
                function_id: id,
                balance,
                max_influence,
                value: admissible.then(|| value_unchecked(g, &v)),
            }
        })
        .collect();
    let mut best: Option<(f64, u64)> = None;
    let mut admissible = 0;
    for row in &rows {
        if let Some(v) = row.value {
            admissible += 1;
            if best.is_none_or(|b| v > b.0 + 1e-15) {
                best = Some((v, row.function_id));
            }
        }
    }
    Ok(SoundnessReport {
        tau,
        mode,
        balance_tol,
        functions,
        admissible,
        max_value: best.map(|b| b.0),
        witness_id: best.map(|b| b.1),
        witness: best.map(|b| CutFunction {
            r,
            values: values_of(b.1),
        }),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoundnessTriple {
    pub tau: f64,
    pub max_value: Option<f64>,
    /// Normalized integral optimum of the source instance under its
    /// cardinality constraint.
    pub opt: f64,
    /// `max(0, max_value - opt)`.
    pub slack: f64,
    pub admissible: u64,
}

/// Runs the enumeration for each `tau` and pairs it with the brute-force
/// optimum of `inst`.
pub fn soundness_triples(
    g: &DictGadget,
    inst: &CspInstance,
    taus: &[f64],
    mode: SoundnessMode,
    balance_tol: f64,
) -> Result<Vec<SoundnessTriple>> {
    let total: f64 = inst.payoffs.iter().map(|t| t.weight).sum();
    let opt = brute_force(inst, true)?.optimum / total;
    taus.iter()
        .map(|&tau| {
            let rep = soundness_enumerate(g, tau, mode, balance_tol)?;
            Ok(SoundnessTriple {
                tau,
                max_value: rep.max_value,
                opt,
                slack: rep.max_value.map_or(0.0, |v| (v - opt).max(0.0)),
                admissible: rep.admissible,
            })
        })
        .collect()
}

/// The per-vertex probabilities `p*_i` of the function rounding for given
/// shared Gaussian vectors `zetas[j]` (one per coordinate).
pub fn function_probabilities(
    profile: &BiasProfile,
    f: &CutFunction,
    epsilon: f64,
    zetas: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if zetas.len() != f.r || zetas.iter().any(|z| z.len() != profile.dimension) {
        return Err(Error::arg("need one Gaussian vector of the profile dimension per coordinate"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::arg(format!("noise rate {epsilon} outside [0, 1]")));
    }
    Ok(profile
        .vertices
        .iter()
        .map(|v| {
            let mu = vec![v.mu; f.r];
            let mut c = biased_fourier(&f.values, &mu);
            for (s, cs) in c.iter_mut().enumerate() {
                *cs *= (1.0 - epsilon).powi(s.count_ones() as i32);
            }
            let z: Vec<f64> = zetas
                .iter()
                .map(|zeta| v.mu + v.w.iter().zip(zeta).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            eval_multilinear(&c, &mu, &z).clamp(-1.0, 1.0)
        })
        .collect())
}

/// Rounds with a cut function: noisy biased expansion at the Gaussian
/// surrogates, clamp to `[-1, 1]`, then label `+1` with probability
/// `(1 + p*_i) / 2`.
pub fn round_with_function_profile(
    profile: &BiasProfile,
    inst: &CspInstance,
    f: &CutFunction,
    epsilon: f64,
    seed: u64,
) -> Result<RoundedAssignment> {
    if f.r > MAX_DIMENSION {
        return Err(Error::Capacity {
            what: "cut function dimension".into(),
            size: f.r as u128,
            cap: MAX_DIMENSION as u128,
        });
    }
    if profile.vertices.len() != inst.n {
        return Err(Error::arg("profile and instance sizes differ"));
    }
    let mut rng = rng_from_seed(seed);
    let zetas: Vec<Vec<f64>> = (0..f.r)
        .map(|_| {
            (0..profile.dimension)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect()
        })
        .collect();
    let p = function_probabilities(profile, f, epsilon, &zetas)?;
    let labels: Vec<i8> = p
        .iter()
        .map(|&pi| {
            let u: f64 = rng.random();
            if u < 0.5 * (1.0 + pi) {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(RoundedAssignment {
        value: inst.evaluate_spins(&labels)?,
        balance: inst.spin_balance(&labels),
        labels,
        seed,
        repair: None,
    })
}

pub fn round_with_function(
    sol: &MomentSolution,
    inst: &CspInstance,
    f: &CutFunction,
    epsilon: f64,
    seed: u64,
) -> Result<RoundedAssignment> {
    let profile = bias_decompose(sol)?;
    round_with_function_profile(&profile, inst, f, epsilon, seed)
}
