//! Level-k moment relaxations and feasibility checks for their solutions.
//!
//! A solution is stored as the Gram matrix of the vectors `v_{S,alpha}` for
//! every subset `|S| <= k` and every local assignment `alpha in [q]^S`. The
//! program handed to the solver lives in the smaller parity basis: one row and
//! column per monomial `x_T = prod_{j in T} x_j` (spins, `|T| <= k`), entry
//! `(T1, T2)` tied to the moment `y_{T1 xor T2}` exactly when
//! `|T1 cup T2| <= k`. [`Relaxation::lift`] maps a parity-basis matrix back to
//! the full `(S, alpha)` Gram matrix.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{spin, CspInstance, Sense};

/// Hard cap on the number of `(S, alpha)` indices.
pub const INDEX_CAP: usize = 6000;

/// Variables are tracked as bits of a `u64`.
pub const MAX_VARIABLES: usize = 64;

/// Probabilities at or below this value are treated as zero when deciding
/// whether an event can be conditioned on.
pub const PROBABILITY_FLOOR: f64 = 1e-9;

/// Default drift allowed by [`local_distribution`] before it refuses.
pub const DRIFT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MomentIndex {
    pub subset: Vec<usize>,
    pub assignment: Vec<u8>,
}

impl MomentIndex {
    pub fn empty() -> Self {
        Self {
            subset: Vec::new(),
            assignment: Vec::new(),
        }
    }

    pub fn subset_mask(&self) -> u64 {
        self.subset.iter().fold(0, |m, &v| m | (1u64 << v))
    }

    /// Bit `v` set when variable `v` takes label 1.
    pub fn value_mask(&self) -> u64 {
        self.subset
            .iter()
            .zip(&self.assignment)
            .fold(0, |m, (&v, &a)| if a == 1 { m | (1u64 << v) } else { m })
    }

    pub fn from_masks(subset: u64, values: u64) -> Self {
        let vars = bits(subset);
        let assignment = vars.iter().map(|&v| ((values >> v) & 1) as u8).collect();
        Self {
            subset: vars,
            assignment,
        }
    }
}

/// Indices of the set bits of `mask`, ascending.
pub fn bits(mut mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// `sum_{s <= k} C(n, s) q^s`.
pub fn full_index_size(n: usize, level: usize, q: usize) -> u128 {
    (0..=level.min(n))
        .map(|s| binomial(n, s).saturating_mul((q as u128).saturating_pow(s as u32)))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// All subsets of `{0..n}` of size at most `level`, by size then lexicographically.
pub fn subsets_up_to(n: usize, level: usize) -> Vec<u64> {
    let mut out = vec![0u64];
    for s in 1..=level.min(n) {
        let mut combo: Vec<usize> = (0..s).collect();
        loop {
            out.push(combo.iter().fold(0u64, |m, &v| m | (1u64 << v)));
            // advance to the next combination
            let mut i = s;
            while i > 0 && combo[i - 1] == n - s + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for t in i..s {
                combo[t] = combo[t - 1] + 1;
            }
        }
    }
    out
}

/// The full `(S, alpha)` index list: subsets in [`subsets_up_to`] order, each
/// followed by its assignments counted with the first variable least
/// significant.
pub fn enumerate_index(n: usize, level: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for s in subsets_up_to(n, level) {
        let vars = bits(s);
        for code in 0u64..(1u64 << vars.len()) {
            let mut vals = 0u64;
            for (b, &v) in vars.iter().enumerate() {
                if (code >> b) & 1 == 1 {
                    vals |= 1u64 << v;
                }
            }
            out.push((s, vals));
        }
    }
    out
}

fn check_size(n: usize, level: usize, q: usize) -> Result<()> {
    if n > MAX_VARIABLES {
        return Err(Error::Capacity {
            what: "variable count".into(),
            size: n as u128,
            cap: MAX_VARIABLES as u128,
        });
    }
    let size = full_index_size(n, level, q);
    if size > INDEX_CAP as u128 {
        return Err(Error::Capacity {
            what: format!("level {level} too high for n = {n}: index set"),
            size,
            cap: INDEX_CAP as u128,
        });
    }
    Ok(())
}

/// A linear equality `sum coef * y_param = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `optimize sum c_p y_p` subject to `M >= 0`, `M[r, c] = y_p` for every tied
/// triplet, and the equalities over `y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConicProgram {
    pub dim: usize,
    /// Monomial of each row/column (and of each parameter) as a variable mask.
    pub basis: Vec<u64>,
    pub num_params: usize,
    /// `(row, col, param)` with `row <= col`.
    pub tied: Vec<(usize, usize, usize)>,
    pub equalities: Vec<SparseRow>,
    pub objective: Vec<(usize, f64)>,
    pub sense: Sense,
}

impl ConicProgram {
    pub fn objective_of(&self, params: &[f64]) -> f64 {
        self.objective.iter().map(|&(p, c)| c * params[p]).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Relaxation {
    pub n: usize,
    pub level: usize,
    pub index_set: Vec<MomentIndex>,
    pub program: ConicProgram,
}

/// Builds the level-`level` relaxation of a boolean instance.
pub fn build_relaxation(inst: &CspInstance, level: usize) -> Result<Relaxation> {
    inst.require_boolean()?;
    if level < 2 {
        return Err(Error::arg("relaxation level must be at least 2"));
    }
    let n = inst.n;
    check_size(n, level, inst.q)?;
    if let Some(t) = inst.payoffs.iter().find(|t| t.scope.len() > level) {
        return Err(Error::arg(format!(
            "payoff scope of size {} exceeds level {level}",
            t.scope.len()
        )));
    }

    let basis = subsets_up_to(n, level);
    let dim = basis.len();
    let pos: HashMap<u64, usize> = basis.iter().enumerate().map(|(i, &m)| (m, i)).collect();

    let mut tied = Vec::new();
    for r in 0..dim {
        for c in r..dim {
            if (basis[r] | basis[c]).count_ones() as usize <= level {
                tied.push((r, c, pos[&(basis[r] ^ basis[c])]));
            }
        }
    }

    let mut equalities = vec![SparseRow {
        coefs: vec![(0, 1.0)],
        rhs: 1.0,
    }];
    let target = inst.cardinality.spin_target();
    for &t in basis.iter().filter(|t| (t.count_ones() as usize) < level) {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (j, &w) in inst.vertex_weights.iter().enumerate() {
            if w != 0.0 {
                *acc.entry(pos[&(t ^ (1u64 << j))]).or_default() += w;
            }
        }
        *acc.entry(pos[&t]).or_default() -= target;
        let mut coefs: Vec<(usize, f64)> = acc.into_iter().filter(|&(_, c)| c != 0.0).collect();
        coefs.sort_by_key(|&(p, _)| p);
        if !coefs.is_empty() {
            equalities.push(SparseRow { coefs, rhs: 0.0 });
        }
    }

    // E_S sum_beta P_S(beta) mu_S(beta), with mu_S(beta) = 2^-|S| sum_{T<=S} chi_T(beta) y_T
    let mut obj: HashMap<usize, f64> = HashMap::new();
    for term in &inst.payoffs {
        let r = term.scope.len();
        let scale = term.weight / (1u64 << r) as f64;
        for (code, &payoff) in term.table.iter().enumerate() {
            if payoff == 0.0 {
                continue;
            }
            for sub in 0u64..(1u64 << r) {
                let mut mask = 0u64;
                let mut chi = 1.0;
                for (b, &v) in term.scope.iter().enumerate() {
                    if (sub >> b) & 1 == 1 {
                        mask |= 1u64 << v;
                        chi *= spin(((code >> b) & 1) as u8);
                    }
                }
                *obj.entry(pos[&mask]).or_default() += scale * payoff * chi;
            }
        }
    }
    let mut objective: Vec<(usize, f64)> = obj.into_iter().filter(|&(_, c)| c != 0.0).collect();
    objective.sort_by_key(|&(p, _)| p);

    let index_set = enumerate_index(n, level)
        .into_iter()
        .map(|(s, v)| MomentIndex::from_masks(s, v))
        .collect();

    Ok(Relaxation {
        n,
        level,
        index_set,
        program: ConicProgram {
            dim,
            basis,
            num_params: dim,
            tied,
            equalities,
            objective,
            sense: inst.sense(),
        },
    })
}

impl Relaxation {
    /// `A[(S, alpha), T] = 2^-|S| chi_T(alpha)` for `T` a subset of `S`.
    pub fn lift_matrix(&self) -> DMatrix<f64> {
        let pos: HashMap<u64, usize> = self
            .program
            .basis
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let rows = enumerate_index(self.n, self.level);
        let mut a = DMatrix::zeros(rows.len(), self.program.dim);
        for (r, &(s, vals)) in rows.iter().enumerate() {
            let scale = 1.0 / (1u64 << s.count_ones()) as f64;
            // iterate all submasks of s
            let mut t = s;
            loop {
                let sign = if (t & vals).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                a[(r, pos[&t])] = scale * sign;
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
        }
        a
    }

    /// Full `(S, alpha)` Gram matrix `A M A^T` of a parity-basis matrix.
    pub fn lift(&self, parity: &DMatrix<f64>) -> DMatrix<f64> {
        let a = self.lift_matrix();
        let g = &a * parity * a.transpose();
        symmetrize(g)
    }

    /// Parity-basis matrix of a point mass (spins `x_T` products).
    pub fn parity_of_assignment(&self, labels: &[u8]) -> DMatrix<f64> {
        let vals = labels
            .iter()
            .enumerate()
            .fold(0u64, |m, (v, &a)| if a == 1 { m | (1u64 << v) } else { m });
        let chi: Vec<f64> = self
            .program
            .basis
            .iter()
            .map(|&t| if (t & vals).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        DMatrix::from_fn(chi.len(), chi.len(), |r, c| chi[r] * chi[c])
    }
}

pub(crate) fn symmetrize(mut g: DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    for r in 0..n {
        for c in r + 1..n {
            let v = 0.5 * (g[(r, c)] + g[(c, r)]);
            g[(r, c)] = v;
            g[(c, r)] = v;
        }
    }
    g
}

/// A level-k solution: the Gram matrix over all `(S, alpha)` with `|S| <= k`.
#[derive(Debug, Clone)]
pub struct MomentSolution {
    pub level: usize,
    pub n: usize,
    pub q: usize,
    pub index_set: Vec<MomentIndex>,
    pub gram: DMatrix<f64>,
    pub objective_value: f64,
    masks: Vec<(u64, u64)>,
    lookup: HashMap<(u64, u64), usize>,
}

impl MomentSolution {
    /// Wraps a Gram matrix in the canonical index order for `(n, level)`.
    pub fn new(n: usize, level: usize, gram: DMatrix<f64>, objective_value: f64) -> Result<Self> {
        check_size(n, level, 2)?;
        let masks = enumerate_index(n, level);
        if gram.nrows() != masks.len() || gram.ncols() != masks.len() {
            return Err(Error::arg(format!(
                "gram is {}x{}, index set has {} entries",
                gram.nrows(),
                gram.ncols(),
                masks.len()
            )));
        }
        let lookup = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let index_set = masks
            .iter()
            .map(|&(s, v)| MomentIndex::from_masks(s, v))
            .collect();
        Ok(Self {
            level,
            n,
            q: 2,
            index_set,
            gram,
            objective_value,
            masks,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[(u64, u64)] {
        &self.masks
    }

    /// Position of `(S, alpha)`; `values` is reduced to the bits inside `subset`.
    pub fn position(&self, subset: u64, values: u64) -> Option<usize> {
        self.lookup.get(&(subset, values & subset)).copied()
    }

    /// `P(X_S = alpha)` read off the diagonal (unclipped).
    pub fn prob(&self, subset: u64, values: u64) -> Option<f64> {
        self.position(subset, values).map(|p| self.gram[(p, p)])
    }

    /// `<v_{i,a}, v_{j,b}>`. For `i == j` this is `[a == b] P(x_i = a)`.
    pub fn pair_entry(&self, i: usize, a: u8, j: usize, b: u8) -> f64 {
        let pi = self.lookup[&(1u64 << i, (a as u64) << i)];
        let pj = self.lookup[&(1u64 << j, (b as u64) << j)];
        self.gram[(pi, pj)]
    }

    /// Joint table `p[a][b] = <v_{i,a}, v_{j,b}>`.
    pub fn pair_joint(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        let mut p = [[0.0; 2]; 2];
        for a in 0..2u8 {
            for b in 0..2u8 {
                p[a as usize][b as usize] = self.pair_entry(i, a, j, b);
            }
        }
        p
    }

    /// `(P(x_i = 0), P(x_i = 1))`.
    pub fn marginal(&self, i: usize) -> [f64; 2] {
        [self.pair_entry(i, 0, i, 0), self.pair_entry(i, 1, i, 1)]
    }

    /// `mu_i = <v_i, I> = P(x_i = 0) - P(x_i = 1)`, from the empty-index column.
    pub fn bias(&self, i: usize) -> f64 {
        let p0 = self.lookup[&(1u64 << i, 0)];
        let p1 = self.lookup[&(1u64 << i, 1u64 << i)];
        self.gram[(p0, 0)] - self.gram[(p1, 0)]
    }

    /// `<v_i, v_j>` with `v_i = v_{i,0} - v_{i,1}`.
    pub fn spin_inner(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..2u8 {
            for b in 0..2u8 {
                s += spin(a) * spin(b) * self.pair_entry(i, a, j, b);
            }
        }
        s
    }

    /// Recomputes the relaxation objective from the local distributions.
    pub fn objective(&self, inst: &CspInstance) -> Result<f64> {
        let mut total = 0.0;
        for term in &inst.payoffs {
            let dist = local_distribution(self, &term.scope, DRIFT_TOL)?;
            let local: f64 = term
                .table
                .iter()
                .zip(&dist.probabilities)
                .map(|(p, q)| p * q)
                .sum();
            total += term.weight * local;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SolutionFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SolutionFile = serde_json::from_str(text)?;
        f.try_into()
    }
}

/// JSON layout of a [`MomentSolution`]: dense row-major lower triangle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub level: usize,
    pub n: usize,
    pub q: usize,
    pub objective_value: f64,
    pub index_set: Vec<MomentIndex>,
    pub gram_lower: Vec<f64>,
}

impl From<&MomentSolution> for SolutionFile {
    fn from(s: &MomentSolution) -> Self {
        let d = s.dim();
        let mut lower = Vec::with_capacity(d * (d + 1) / 2);
        for r in 0..d {
            for c in 0..=r {
                lower.push(s.gram[(r, c)]);
            }
        }
        Self {
            schema_version: crate::SCHEMA_VERSION,
            level: s.level,
            n: s.n,
            q: s.q,
            objective_value: s.objective_value,
            index_set: s.index_set.clone(),
            gram_lower: lower,
        }
    }
}

impl TryFrom<SolutionFile> for MomentSolution {
    type Error = Error;

    fn try_from(f: SolutionFile) -> Result<Self> {
        if f.q != 2 {
            return Err(Error::arg("only boolean solutions are supported"));
        }
        check_size(f.n, f.level, f.q)?;
        let d = full_index_size(f.n, f.level, f.q) as usize;
        if f.gram_lower.len() != d * (d + 1) / 2 {
            return Err(Error::arg("gram_lower has the wrong length"));
        }
        let mut g = DMatrix::zeros(d, d);
        let mut k = 0;
        for r in 0..d {
            for c in 0..=r {
                g[(r, c)] = f.gram_lower[k];
                g[(c, r)] = f.gram_lower[k];
                k += 1;
            }
        }
        let sol = MomentSolution::new(f.n, f.level, g, f.objective_value)?;
        if sol.index_set != f.index_set {
            return Err(Error::arg("index set does not match the canonical order"));
        }
        Ok(sol)
    }
}

/// A distribution on `[2]^subset`, little-endian in subset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDistribution {
    pub subset: Vec<usize>,
    pub probabilities: Vec<f64>,
}

/// Reads `mu_S` off the diagonal, clipping to `[0, 1]` and renormalizing when
/// the raw values drift from a distribution by at most `drift_tol`.
pub fn local_distribution(
    sol: &MomentSolution,
    subset: &[usize],
    drift_tol: f64,
) -> Result<LocalDistribution> {
    if subset.len() > sol.level {
        return Err(Error::arg(format!(
            "subset of size {} exceeds level {}",
            subset.len(),
            sol.level
        )));
    }
    let mut mask = 0u64;
    for &v in subset {
        if v >= sol.n {
            return Err(Error::arg(format!("variable {v} out of range")));
        }
        if mask & (1u64 << v) != 0 {
            return Err(Error::arg("subset repeats a variable"));
        }
        mask |= 1u64 << v;
    }
    let r = subset.len();
    let mut raw = Vec::with_capacity(1 << r);
    for code in 0u64..(1u64 << r) {
        let vals = subset
            .iter()
            .enumerate()
            .fold(0u64, |m, (b, &v)| if (code >> b) & 1 == 1 { m | (1u64 << v) } else { m });
        raw.push(sol.prob(mask, vals).expect("indexed subset"));
    }
    let total: f64 = raw.iter().sum();
    let worst_neg = raw.iter().fold(0.0f64, |m, &p| m.max(-p));
    let worst_high = raw.iter().fold(0.0f64, |m, &p| m.max(p - 1.0));
    if (total - 1.0).abs() > drift_tol || worst_neg > drift_tol || worst_high > drift_tol {
        return Err(Error::InconsistentSolution(format!(
            "local distribution on {subset:?} drifts: sum {total}, min {}",
            -worst_neg
        )));
    }
    let clipped: Vec<f64> = raw.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let s: f64 = clipped.iter().sum();
    Ok(LocalDistribution {
        subset: subset.to_vec(),
        probabilities: clipped.into_iter().map(|p| p / s).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub psd: f64,
    pub consistency: f64,
    pub cardinality: f64,
    /// Events at or below this probability are skipped by the conditional
    /// cardinality measure.
    pub probability_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-5,
            consistency: 1e-5,
            cardinality: 1e-5,
            probability_floor: PROBABILITY_FLOOR,
        }
    }
}

/// Signed violation magnitudes of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub min_eigenvalue: f64,
    /// `max(0, -min_eigenvalue)`.
    pub psd: f64,
    /// `|G[empty, empty] - 1|`.
    pub normalization: f64,
    /// Entries with `|S cup T| <= k` against the diagonal of the union.
    pub consistency: f64,
    pub marginalization: f64,
    /// `|sum_j W_j P(x_j = a, X_S = alpha) - c_a P(X_S = alpha)|`.
    pub cardinality: f64,
    /// Same, divided by `P(X_S = alpha)` over events above the floor.
    pub cardinality_conditional: f64,
    /// `|P(x_i != x_j) - |v_i - v_j|^2 / 4|` over binary payoff scopes.
    pub edge_identity: f64,
}

impl FeasibilityReport {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.psd <= tol.psd
            && self.normalization <= tol.consistency
            && self.consistency <= tol.consistency
            && self.marginalization <= tol.consistency
            && self.cardinality <= tol.cardinality
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(g.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Measures every feasibility condition of `sol` against `inst`.
pub fn check_feasibility(
    sol: &MomentSolution,
    inst: &CspInstance,
    tol: &Tolerances,
) -> Result<FeasibilityReport> {
    if sol.n != inst.n || sol.q != inst.q {
        return Err(Error::arg("solution and instance dimensions differ"));
    }
    let g = &sol.gram;
    let k = sol.level;
    let d = sol.dim();
    let masks = sol.masks();

    let min_eig = min_eigenvalue(g);
    let normalization = (g[(0, 0)] - 1.0).abs();

    let mut consistency = 0.0f64;
    for r in 0..d {
        let (s, a) = masks[r];
        for c in r..d {
            let (t, b) = masks[c];
            let u = s | t;
            if u.count_ones() as usize > k {
                continue;
            }
            let common = s & t;
            let expected = if (a ^ b) & common != 0 {
                0.0
            } else {
                let p = sol.position(u, a | b).expect("union indexed");
                g[(p, p)]
            };
            consistency = consistency.max((g[(r, c)] - expected).abs());
        }
    }

    let mut marginalization = 0.0f64;
    for r in 0..d {
        let (s, a) = masks[r];
        if s.count_ones() as usize >= k {
            continue;
        }
        for j in 0..sol.n {
            if s & (1u64 << j) != 0 {
                continue;
            }
            let p0 = sol.position(s | (1u64 << j), a).unwrap();
            let p1 = sol.position(s | (1u64 << j), a | (1u64 << j)).unwrap();
            for c in 0..d {
                let v = g[(p0, c)] + g[(p1, c)] - g[(r, c)];
                marginalization = marginalization.max(v.abs());
            }
        }
    }

    let props = inst.cardinality.proportions();
    let mut card = 0.0f64;
    let mut card_cond = 0.0f64;
    for r in 0..d {
        let (s, a) = masks[r];
        if s.count_ones() as usize >= k {
            continue;
        }
        let p_s = g[(r, r)];
        for (lab, &c_lab) in props.iter().enumerate() {
            let mut acc = 0.0;
            for (j, &w) in inst.vertex_weights.iter().enumerate() {
                let bit = 1u64 << j;
                let joint = if s & bit != 0 {
                    if ((a >> j) & 1) as usize == lab {
                        p_s
                    } else {
                        0.0
                    }
                } else {
                    let vals = if lab == 1 { a | bit } else { a };
                    let p = sol.position(s | bit, vals).unwrap();
                    g[(p, p)]
                };
                acc += w * joint;
            }
            let v = (acc - c_lab * p_s).abs();
            card = card.max(v);
            if p_s > tol.probability_floor {
                card_cond = card_cond.max(v / p_s);
            }
        }
    }

    let mut edge_identity = 0.0f64;
    if k >= 2 {
        for term in inst.payoffs.iter().filter(|t| t.scope.len() == 2) {
            let (i, j) = (term.scope[0], term.scope[1]);
            let m = (1u64 << i) | (1u64 << j);
            let differ = sol.prob(m, 1u64 << i).unwrap() + sol.prob(m, 1u64 << j).unwrap();
            let dist = sol.spin_inner(i, i) + sol.spin_inner(j, j) - 2.0 * sol.spin_inner(i, j);
            edge_identity = edge_identity.max((differ - dist / 4.0).abs());
        }
    }

    Ok(FeasibilityReport {
        min_eigenvalue: min_eig,
        psd: (-min_eig).max(0.0),
        normalization,
        consistency,
        marginalization,
        cardinality: card,
        cardinality_conditional: card_cond,
        edge_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, load_edge_list, Family, ProblemKind};

    fn point_mass(n: usize, level: usize, labels: &[u8]) -> MomentSolution {
        let masks = enumerate_index(n, level);
        let ind: Vec<f64> = masks
            .iter()
            .map(|&(s, a)| {
                let ok = bits(s).iter().all(|&v| ((a >> v) & 1) as u8 == labels[v]);
                if ok {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let g = DMatrix::from_fn(ind.len(), ind.len(), |r, c| ind[r] * ind[c]);
        MomentSolution::new(n, level, g, 0.0).unwrap()
    }

    #[test]
    fn single_edge_index_size() {
        let inst = load_edge_list("0 1\n").unwrap();
        let rel = build_relaxation(&inst, 2).unwrap();
        assert_eq!(rel.index_set.len(), 9);
        assert_eq!(rel.index_set[0], MomentIndex::empty());
        assert_eq!(rel.program.dim, 4);
        assert_eq!(full_index_size(16, 2, 2), 513);
        assert_eq!(full_index_size(12, 3, 2), 2049);
    }

    #[test]
    fn level_cap_is_reported_with_size() {
        let inst = generate(Family::Cycle, 20, 0, ProblemKind::MaxCutBisection).unwrap();
        match build_relaxation(&inst, 9) {
            Err(Error::Capacity { size, cap, .. }) => {
                assert_eq!(size, full_index_size(20, 9, 2));
                assert_eq!(cap, INDEX_CAP as u128);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert!(build_relaxation(&inst, 1).is_err());
    }

    #[test]
    fn lift_of_point_mass_matches_indicator_gram() {
        let inst = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let rel = build_relaxation(&inst, 2).unwrap();
        let labels = [0u8, 1, 0, 1];
        let g = rel.lift(&rel.parity_of_assignment(&labels));
        let direct = point_mass(4, 2, &labels);
        assert!((&g - &direct.gram).amax() < 1e-12);
        let params: Vec<f64> = rel
            .program
            .basis
            .iter()
            .map(|&t| if (t & 0b1010).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert!((rel.program.objective_of(&params) - 1.0).abs() < 1e-12);
        let sol = MomentSolution::new(4, 2, g, 1.0).unwrap();
        assert!((sol.objective(&inst).unwrap() - inst.evaluate(&labels).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn integral_bisection_is_feasible() {
        let inst = generate(Family::Cycle, 6, 0, ProblemKind::MaxCutBisection).unwrap();
        let sol = point_mass(6, 2, &[0, 1, 0, 1, 0, 1]);
        let rep = check_feasibility(&sol, &inst, &Tolerances::default()).unwrap();
        assert!(rep.passes(&Tolerances::default()), "{rep:?}");
        assert!(rep.consistency == 0.0 && rep.cardinality == 0.0 && rep.marginalization == 0.0);
        assert!(rep.edge_identity < 1e-15);
    }

    #[test]
    fn unbalanced_point_mass_violates_cardinality() {
        let inst = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let sol = point_mass(4, 2, &[0, 0, 0, 1]);
        let rep = check_feasibility(&sol, &inst, &Tolerances::default()).unwrap();
        assert!((rep.cardinality - 0.25).abs() < 1e-12);
        assert!(!rep.passes(&Tolerances::default()));
    }

    #[test]
    fn negative_eigenvalue_is_measured() {
        let inst = load_edge_list("0 1\n").unwrap();
        let mut sol = point_mass(2, 2, &[0, 1]);
        // rank-one gram plus a -0.1 component along a unit vector orthogonal to it
        let d = sol.dim();
        let ind: Vec<f64> = (0..d).map(|r| sol.gram[(r, 0)]).collect();
        let mut u = nalgebra::DVector::zeros(d);
        u[1] = 1.0;
        u[2] = -1.0;
        let proj = ind.iter().zip(u.iter()).map(|(a, b)| a * b).sum::<f64>()
            / ind.iter().map(|a| a * a).sum::<f64>();
        for r in 0..d {
            u[r] -= proj * ind[r];
        }
        let u = u.normalize();
        sol.gram -= 0.1 * &u * u.transpose();
        let rep = check_feasibility(&sol, &inst, &Tolerances::default()).unwrap();
        assert!((rep.psd - 0.1).abs() < 1e-12, "{}", rep.psd);
    }

    #[test]
    fn local_distributions() {
        let sol = point_mass(4, 2, &[0, 1, 1, 0]);
        let e = local_distribution(&sol, &[], DRIFT_TOL).unwrap();
        assert_eq!(e.probabilities, vec![1.0]);
        let p = local_distribution(&sol, &[1, 3], DRIFT_TOL).unwrap();
        // x1 = 1, x3 = 0 -> code 1
        assert_eq!(p.probabilities, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(local_distribution(&sol, &[0, 1, 2], DRIFT_TOL).is_err());
        let mut bad = sol.clone();
        bad.gram[(1, 1)] += 0.01;
        assert!(matches!(
            local_distribution(&bad, &[0], DRIFT_TOL),
            Err(Error::InconsistentSolution(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let sol = point_mass(3, 2, &[0, 1, 1]);
        let back = MomentSolution::from_json(&sol.to_json().unwrap()).unwrap();
        assert_eq!(back.gram, sol.gram);
        assert_eq!(back.index_set, sol.index_set);
    }

    #[test]
    fn cardinality_rows_hold_on_balanced_assignments() {
        let inst = generate(Family::Complete, 4, 0, ProblemKind::MaxCutBisection).unwrap();
        let rel = build_relaxation(&inst, 2).unwrap();
        let vals = 0b0110u64;
        let params: Vec<f64> = rel
            .program
            .basis
            .iter()
            .map(|&t| if (t & vals).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        for row in &rel.program.equalities {
            let lhs: f64 = row.coefs.iter().map(|&(p, c)| c * params[p]).sum();
            assert!((lhs - row.rhs).abs() < 1e-12);
        }
    }
}
