//! The threshold rounding on a single payoff term.
//!
//! An edge is described by the two biases and the correlation `rho` of the
//! normalized orthogonal parts. The relaxation sees the pair distribution
//! `p_ab = (1 + a mu1 + b mu2 + ab m) / 4` with
//! `m = mu1 mu2 + rho sqrt(1 - mu1^2) sqrt(1 - mu2^2)`; the rounding labels
//! vertex `i` with `+1` iff `xi_i <= t_i` for a standard bivariate normal pair
//! with correlation `rho`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{bvn_cdf, BVN_QUAD_TOL};
use crate::rounding::threshold;

/// Validity slack on the pair probabilities.
pub const VALIDITY_TOL: f64 = 1e-12;

/// Configurations whose relaxation value is below this are excluded from
/// ratios.
pub const MIN_SDP_VALUE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub mu1: f64,
    pub mu2: f64,
    pub rho: f64,
}

impl EdgeConfig {
    pub fn new(mu1: f64, mu2: f64, rho: f64) -> Self {
        Self { mu1, mu2, rho }
    }

    /// `E[x1 x2]` under the relaxation.
    pub fn m(&self) -> f64 {
        self.mu1 * self.mu2
            + self.rho * (1.0 - self.mu1 * self.mu1).max(0.0).sqrt()
                * (1.0 - self.mu2 * self.mu2).max(0.0).sqrt()
    }

    /// `P(x1 = a, x2 = b)` for spins `a, b`.
    pub fn pair_prob(&self, a: i8, b: i8) -> f64 {
        let (a, b) = (a as f64, b as f64);
        (1.0 + a * self.mu1 + b * self.mu2 + a * b * self.m()) / 4.0
    }

    pub fn is_valid(&self) -> bool {
        let in_box = |x: f64| (-1.0..=1.0).contains(&x);
        in_box(self.mu1)
            && in_box(self.mu2)
            && in_box(self.rho)
            && [(1, 1), (1, -1), (-1, 1), (-1, -1)]
                .iter()
                .all(|&(a, b)| self.pair_prob(a, b) >= -VALIDITY_TOL)
    }
}

/// `P(y1 = a, y2 = b)` under the rounding.
pub fn round_pair_prob(cfg: &EdgeConfig, a: i8, b: i8) -> f64 {
    let t1 = threshold(cfg.mu1);
    let t2 = threshold(cfg.mu2);
    let (af, bf) = (a as f64, b as f64);
    // y = +1 iff xi <= t, y = -1 iff -xi < -t
    bvn_cdf(af * t1, bf * t2, af * bf * cfg.rho)
}

/// Probability that the rounding labels the endpoints differently.
pub fn separation_prob(cfg: &EdgeConfig) -> f64 {
    let p1 = 0.5 * (1.0 + cfg.mu1.clamp(-1.0, 1.0));
    let p2 = 0.5 * (1.0 + cfg.mu2.clamp(-1.0, 1.0));
    let both = bvn_cdf(threshold(cfg.mu1), threshold(cfg.mu2), cfg.rho);
    (p1 + p2 - 2.0 * both).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffKind {
    Cut,
    /// `(y1 = s1) OR (y2 = s2)`.
    Clause { s1: i8, s2: i8 },
}

impl PayoffKind {
    /// The clause family used by the 2-Sat landscape. Literal signs are
    /// absorbed into `(mu1, mu2, rho)`, so `(+, +)` over the full domain covers
    /// all four clause types.
    pub const TWO_SAT: PayoffKind = PayoffKind::Clause { s1: 1, s2: 1 };

    pub fn name(&self) -> &'static str {
        match self {
            PayoffKind::Cut => "cut",
            PayoffKind::Clause { .. } => "2sat",
        }
    }
}

/// Value of the payoff under the relaxation's pair distribution.
pub fn edge_sdp_value(kind: PayoffKind, cfg: &EdgeConfig) -> f64 {
    match kind {
        PayoffKind::Cut => (1.0 - cfg.m()) / 2.0,
        PayoffKind::Clause { s1, s2 } => 1.0 - cfg.pair_prob(-s1, -s2),
    }
}

/// Expected payoff of the rounded labels.
pub fn edge_round_value(kind: PayoffKind, cfg: &EdgeConfig) -> f64 {
    match kind {
        PayoffKind::Cut => separation_prob(cfg),
        PayoffKind::Clause { s1, s2 } => (1.0 - round_pair_prob(cfg, -s1, -s2)).clamp(0.0, 1.0),
    }
}

/// `round / sdp`, or `None` for invalid or degenerate configurations.
pub fn edge_ratio(kind: PayoffKind, cfg: &EdgeConfig) -> Option<f64> {
    if !cfg.is_valid() {
        return None;
    }
    let sdp = edge_sdp_value(kind, cfg);
    if sdp <= MIN_SDP_VALUE {
        return None;
    }
    Some(edge_round_value(kind, cfg) / sdp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum Domain {
    Full,
    /// `mu1, mu2` fixed; only `rho` varies.
    Slice { mu1: f64, mu2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub resolution: usize,
    pub refinement_rounds: usize,
    /// Number of best grid cells refined.
    pub seeds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            resolution: 200,
            refinement_rounds: 60,
            seeds: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub seed: usize,
    pub round: usize,
    pub step: f64,
    pub ratio: f64,
    pub config: EdgeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCertificate {
    pub schema_version: u32,
    pub kind: PayoffKind,
    pub domain: Domain,
    pub resolution: usize,
    pub min_ratio: f64,
    pub argmin: EdgeConfig,
    pub round_value: f64,
    pub sdp_value: f64,
    pub grid_min_ratio: f64,
    pub grid_argmin: EdgeConfig,
    pub valid_cells: u64,
    /// Largest ratio difference per unit step between neighbouring cells
    /// around the refined seeds.
    pub lipschitz: f64,
    /// Ratio error from the bivariate normal quadrature tolerance.
    pub quadrature_error: f64,
    /// `lipschitz * h * sqrt(dims) / 2` with grid spacing `h`.
    pub grid_error: f64,
    pub error_bar: f64,
    pub refinement_trace: Vec<TraceEntry>,
}

fn axis(res: usize, i: usize) -> f64 {
    if res == 1 {
        0.0
    } else {
        -1.0 + 2.0 * i as f64 / (res - 1) as f64
    }
}

fn cell(domain: Domain, res: usize, i: usize, j: usize, k: usize) -> EdgeConfig {
    match domain {
        Domain::Full => EdgeConfig::new(axis(res, i), axis(res, j), axis(res, k)),
        Domain::Slice { mu1, mu2 } => EdgeConfig::new(mu1, mu2, axis(res, k)),
    }
}

#[derive(Clone, Copy)]
struct Cand {
    ratio: f64,
    idx: (usize, usize, usize),
}

fn keep_best(v: &mut Vec<Cand>, c: Cand, k: usize) {
    v.push(c);
    if v.len() > 4 * k.max(1) {
        v.sort_by(|a, b| a.ratio.total_cmp(&b.ratio).then(a.idx.cmp(&b.idx)));
        v.truncate(k.max(1));
    }
}

/// Minimum of `round / sdp` over valid configurations: grid, then compass
/// search from the best `seeds` cells.
pub fn ratio_search(kind: PayoffKind, domain: Domain, cfg: &SearchConfig) -> Result<RatioCertificate> {
    if cfg.resolution < 50 {
        return Err(Error::arg("ratio search needs at least 50 points per axis"));
    }
    let res = cfg.resolution;
    let (ni, nj) = match domain {
        Domain::Full => (res, res),
        Domain::Slice { .. } => (1, 1),
    };
    let k = cfg.seeds.max(1);
    let rows: Vec<(Vec<Cand>, u64)> = (0..ni)
        .into_par_iter()
        .map(|i| {
            let mut best = Vec::new();
            let mut valid = 0u64;
            for j in 0..nj {
                for l in 0..res {
                    if let Some(r) = edge_ratio(kind, &cell(domain, res, i, j, l)) {
                        valid += 1;
                        keep_best(&mut best, Cand { ratio: r, idx: (i, j, l) }, k);
                    }
                }
            }
            (best, valid)
        })
        .collect();
    let valid_cells = rows.iter().map(|r| r.1).sum();
    let mut all: Vec<Cand> = rows.into_iter().flat_map(|r| r.0).collect();
    all.sort_by(|a, b| a.ratio.total_cmp(&b.ratio).then(a.idx.cmp(&b.idx)));
    all.truncate(k);
    let first = *all
        .first()
        .ok_or_else(|| Error::Numerical("no valid configuration in the search domain".into()))?;

    let h = 2.0 / (res - 1) as f64;
    let f = |c: &EdgeConfig| edge_ratio(kind, c).unwrap_or(f64::INFINITY);
    let free_axes: &[usize] = match domain {
        Domain::Full => &[0, 1, 2],
        Domain::Slice { .. } => &[2],
    };

    // local Lipschitz estimate around the seeds
    let mut lipschitz = 0.0f64;
    for c in &all {
        let (i, j, l) = c.idx;
        for &ax in free_axes {
            for d in [-1i64, 1] {
                let mut idx = [i as i64, j as i64, l as i64];
                idx[ax] += d;
                if idx.iter().any(|&x| x < 0 || x >= res as i64) {
                    continue;
                }
                let nb = cell(domain, res, idx[0] as usize, idx[1] as usize, idx[2] as usize);
                if let Some(r) = edge_ratio(kind, &nb) {
                    lipschitz = lipschitz.max((r - c.ratio).abs() / h);
                }
            }
        }
    }

    let mut trace = Vec::new();
    let mut best_cfg = cell(domain, res, first.idx.0, first.idx.1, first.idx.2);
    let mut best_val = first.ratio;
    for (s, c) in all.iter().enumerate() {
        let mut x = cell(domain, res, c.idx.0, c.idx.1, c.idx.2);
        let mut fx = c.ratio;
        let mut step = h;
        for round in 0..cfg.refinement_rounds {
            let mut cand = (fx, x);
            for &ax in free_axes {
                for d in [-1.0, 1.0] {
                    let mut y = x;
                    match ax {
                        0 => y.mu1 = (y.mu1 + d * step).clamp(-1.0, 1.0),
                        1 => y.mu2 = (y.mu2 + d * step).clamp(-1.0, 1.0),
                        _ => y.rho = (y.rho + d * step).clamp(-1.0, 1.0),
                    }
                    let fy = f(&y);
                    if fy < cand.0 {
                        cand = (fy, y);
                    }
                }
            }
            if cand.0 < fx {
                fx = cand.0;
                x = cand.1;
            } else {
                step *= 0.5;
            }
            trace.push(TraceEntry {
                seed: s,
                round,
                step,
                ratio: fx,
                config: x,
            });
        }
        if fx < best_val {
            best_val = fx;
            best_cfg = x;
        }
    }

    let sdp = edge_sdp_value(kind, &best_cfg);
    let round_value = edge_round_value(kind, &best_cfg);
    let quadrature_error = 2.0 * BVN_QUAD_TOL / sdp.max(MIN_SDP_VALUE);
    let grid_error = lipschitz * h * (free_axes.len() as f64).sqrt() / 2.0;
    Ok(RatioCertificate {
        schema_version: crate::SCHEMA_VERSION,
        kind,
        domain,
        resolution: res,
        min_ratio: best_val,
        argmin: best_cfg,
        round_value,
        sdp_value: sdp,
        grid_min_ratio: first.ratio,
        grid_argmin: cell(domain, res, first.idx.0, first.idx.1, first.idx.2),
        valid_cells,
        lipschitz,
        quadrature_error,
        grid_error,
        error_bar: quadrature_error + grid_error,
        refinement_trace: trace,
    })
}

/// Writes `mu1,mu2,rho,sep,sdp,ratio` for every grid cell (empty fields for
/// invalid cells), in index order.
pub fn write_grid_csv<W: Write>(
    kind: PayoffKind,
    domain: Domain,
    resolution: usize,
    out: &mut W,
) -> Result<()> {
    writeln!(out, "mu1,mu2,rho,sep,sdp,ratio")?;
    let (ni, nj) = match domain {
        Domain::Full => (resolution, resolution),
        Domain::Slice { .. } => (1, 1),
    };
    for i in 0..ni {
        let rows: Vec<String> = (0..nj * resolution)
            .into_par_iter()
            .map(|jl| {
                let c = cell(domain, resolution, i, jl / resolution, jl % resolution);
                if c.is_valid() {
                    let sep = edge_round_value(kind, &c);
                    let sdp = edge_sdp_value(kind, &c);
                    let ratio = if sdp > MIN_SDP_VALUE {
                        format!("{}", sep / sdp)
                    } else {
                        String::new()
                    };
                    format!("{},{},{},{sep},{sdp},{ratio}", c.mu1, c.mu2, c.rho)
                } else {
                    format!("{},{},{},,,", c.mu1, c.mu2, c.rho)
                }
            })
            .collect();
        for r in rows {
            writeln!(out, "{r}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Edges the relaxation almost never cuts: `sdp <= eps`, worst = max separation.
    Min,
    /// Edges the relaxation almost always cuts: `sdp >= 1 - eps`, worst = min separation.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsPoint {
    pub eps: f64,
    pub worst_separation: f64,
    pub argworst: EdgeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtEpsCurve {
    pub schema_version: u32,
    pub regime: Regime,
    pub points: Vec<EpsPoint>,
    /// Fit of `deviation(eps) = C eps^beta`, where the deviation is the worst
    /// separation (min regime) or one minus it (max regime).
    pub beta: f64,
    pub constant: f64,
}

/// Smallest `rho` meeting `m >= 1 - 2 eps` and validity at fixed biases.
fn min_rho(mu1: f64, mu2: f64, eps: f64) -> Option<f64> {
    let s = (1.0 - mu1 * mu1).max(0.0).sqrt() * (1.0 - mu2 * mu2).max(0.0).sqrt();
    let m_low = (1.0 - 2.0 * eps)
        .max(-1.0 - mu1 - mu2)
        .max(-1.0 + mu1 + mu2);
    let m_high = (1.0 + mu1 - mu2).min(1.0 - mu1 + mu2);
    if s <= 1e-15 {
        let m = mu1 * mu2;
        return (m >= m_low - VALIDITY_TOL && m <= m_high + VALIDITY_TOL).then_some(1.0);
    }
    let rho = ((m_low - mu1 * mu2) / s).max(-1.0);
    if rho > 1.0 + 1e-12 {
        return None;
    }
    let rho = rho.min(1.0);
    let m = mu1 * mu2 + rho * s;
    (m <= m_high + VALIDITY_TOL).then_some(rho)
}

fn worst_min_regime(eps: f64, resolution: usize, rounds: usize) -> EpsPoint {
    // separation is non-increasing in rho, so the worst case sits at the
    // smallest admissible rho for each pair of biases
    let f = |mu1: f64, mu2: f64| -> Option<(f64, EdgeConfig)> {
        let rho = min_rho(mu1, mu2, eps)?;
        let c = EdgeConfig::new(mu1, mu2, rho);
        c.is_valid().then(|| (separation_prob(&c), c))
    };
    let res = resolution;
    let rows: Vec<Option<(f64, EdgeConfig)>> = (0..res)
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(f64, EdgeConfig)> = None;
            for j in 0..res {
                if let Some(v) = f(axis(res, i), axis(res, j)) {
                    if best.is_none_or(|b| v.0 > b.0) {
                        best = Some(v);
                    }
                }
            }
            best
        })
        .collect();
    let (mut fx, mut x) = rows
        .into_iter()
        .flatten()
        .fold(None::<(f64, EdgeConfig)>, |acc, v| match acc {
            Some(a) if a.0 >= v.0 => Some(a),
            _ => Some(v),
        })
        .expect("identical unbiased vectors are always admissible");
    let mut step = 2.0 / (res - 1) as f64;
    for _ in 0..rounds {
        let mut cand = (fx, x);
        for (d1, d2) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let m1 = (x.mu1 + d1 * step).clamp(-1.0, 1.0);
            let m2 = (x.mu2 + d2 * step).clamp(-1.0, 1.0);
            if let Some(v) = f(m1, m2) {
                if v.0 > cand.0 {
                    cand = v;
                }
            }
        }
        if cand.0 > fx {
            fx = cand.0;
            x = cand.1;
        } else {
            step *= 0.5;
        }
    }
    EpsPoint {
        eps,
        worst_separation: fx,
        argworst: x,
    }
}

/// Worst-case separation among configurations within `eps` of an uncut (min
/// regime) or fully cut (max regime) edge, and the fitted power law.
pub fn sqrt_eps_curve(eps: &[f64], regime: Regime, resolution: usize) -> Result<SqrtEpsCurve> {
    if eps.is_empty() {
        return Err(Error::arg("empty eps list"));
    }
    if let Some(e) = eps.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
        return Err(Error::arg(format!("eps {e} outside (0, 1/2)")));
    }
    if resolution < 50 {
        return Err(Error::arg("sqrt-eps search needs at least 50 points per axis"));
    }
    let points: Vec<EpsPoint> = eps
        .iter()
        .map(|&e| {
            let p = worst_min_regime(e, resolution, 60);
            match regime {
                Regime::Min => p,
                // negating mu2 and rho maps cut value and separation to their complements
                Regime::Max => EpsPoint {
                    eps: e,
                    worst_separation: 1.0 - p.worst_separation,
                    argworst: EdgeConfig::new(p.argworst.mu1, -p.argworst.mu2, -p.argworst.rho),
                },
            }
        })
        .collect();
    let dev: Vec<f64> = points
        .iter()
        .map(|p| match regime {
            Regime::Min => p.worst_separation,
            Regime::Max => 1.0 - p.worst_separation,
        })
        .collect();
    let (beta, constant) = if points.len() >= 2 {
        let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = dev.iter().map(|d| d.max(1e-300).ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let b = sxy / sxx;
        (b, (my - b * mx).exp())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SqrtEpsCurve {
        schema_version: crate::SCHEMA_VERSION,
        regime,
        points,
        beta,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::{bvn_pdf, cdf};
    use std::f64::consts::PI;

    #[test]
    fn separation_examples() {
        assert!((separation_prob(&EdgeConfig::new(0.0, 0.0, -1.0)) - 1.0).abs() < 1e-15);
        assert!((separation_prob(&EdgeConfig::new(0.0, 0.0, 0.0)) - 0.5).abs() < 1e-15);
        let r = 0.5f64;
        assert!((separation_prob(&EdgeConfig::new(0.0, 0.0, r)) - r.acos() / PI).abs() < 1e-12);
        assert!((separation_prob(&EdgeConfig::new(0.0, 0.0, r)) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sdp_value_examples() {
        assert!((edge_sdp_value(PayoffKind::Cut, &EdgeConfig::new(0.0, 0.0, -1.0)) - 1.0).abs() < 1e-15);
        assert!(edge_sdp_value(PayoffKind::Cut, &EdgeConfig::new(0.3, 0.3, 1.0)).abs() < 1e-15);
        let v = edge_sdp_value(PayoffKind::TWO_SAT, &EdgeConfig::new(0.0, 0.0, 0.0));
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sign_symmetry_and_monotonicity() {
        for i in 0..21 {
            for j in 0..21 {
                let (m1, m2) = (axis(21, i) * 0.95, axis(21, j) * 0.95);
                let mut prev = f64::INFINITY;
                for k in 0..41 {
                    let r = axis(41, k);
                    let a = separation_prob(&EdgeConfig::new(m1, m2, r));
                    let b = separation_prob(&EdgeConfig::new(-m1, -m2, r));
                    assert!((a - b).abs() < 1e-12);
                    assert!(a <= prev + 1e-12, "({m1},{m2},{r})");
                    prev = a;
                }
            }
        }
    }

    #[test]
    fn plackett_identity() {
        for &(h, k, r) in &[(0.3, -0.4, 0.2), (1.1, 0.5, -0.6), (-0.7, -1.3, 0.85), (0.0, 0.0, 0.0)] {
            let d = 1e-5;
            let fd = (bvn_cdf(h, k, r + d) - bvn_cdf(h, k, r - d)) / (2.0 * d);
            assert!((fd - bvn_pdf(h, k, r)).abs() < 1e-4, "{fd} vs {}", bvn_pdf(h, k, r));
        }
    }

    #[test]
    fn clause_round_value_matches_complement_formula() {
        let c = EdgeConfig::new(0.3, -0.2, 0.4);
        let t1 = threshold(c.mu1);
        let t2 = threshold(c.mu2);
        let p_mm = 1.0 - cdf(t1) - cdf(t2) + bvn_cdf(t1, t2, c.rho);
        assert!((edge_round_value(PayoffKind::TWO_SAT, &c) - (1.0 - p_mm)).abs() < 1e-12);
        // literal signs absorb into the configuration
        let neg = PayoffKind::Clause { s1: -1, s2: 1 };
        let flipped = EdgeConfig::new(-c.mu1, c.mu2, -c.rho);
        assert!((edge_round_value(neg, &c) - edge_round_value(PayoffKind::TWO_SAT, &flipped)).abs() < 1e-12);
        assert!((edge_sdp_value(neg, &c) - edge_sdp_value(PayoffKind::TWO_SAT, &flipped)).abs() < 1e-12);
    }

    #[test]
    fn validity() {
        assert!(EdgeConfig::new(0.0, 0.0, -1.0).is_valid());
        assert!(!EdgeConfig::new(0.9, -0.9, 1.0).is_valid());
        assert!(!EdgeConfig::new(1.2, 0.0, 0.0).is_valid());
    }

    #[test]
    fn gw_slice() {
        let cert = ratio_search(
            PayoffKind::Cut,
            Domain::Slice { mu1: 0.0, mu2: 0.0 },
            &SearchConfig::default(),
        )
        .unwrap();
        assert!((cert.min_ratio - 0.878_567_2).abs() < 1e-4, "{}", cert.min_ratio);
        assert!(ratio_search(PayoffKind::Cut, Domain::Full, &SearchConfig { resolution: 10, ..Default::default() }).is_err());
    }

    #[test]
    fn min_rho_is_tight() {
        let eps = 0.04;
        for &(a, b) in &[(0.1, 0.2), (-0.5, 0.3), (0.9, 0.85)] {
            if let Some(r) = min_rho(a, b, eps) {
                let c = EdgeConfig::new(a, b, r);
                assert!(edge_sdp_value(PayoffKind::Cut, &c) <= eps + 1e-12);
                if r > -1.0 {
                    assert!((edge_sdp_value(PayoffKind::Cut, &c) - eps).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eps_curve_sanity() {
        let c = sqrt_eps_curve(&[1e-4, 0.25], Regime::Min, 101).unwrap();
        assert!(c.points[0].worst_separation <= 0.05);
        assert!(c.points[1].worst_separation <= 1.0);
        let m = sqrt_eps_curve(&[0.01], Regime::Max, 101).unwrap();
        let mn = sqrt_eps_curve(&[0.01], Regime::Min, 101).unwrap();
        assert!((m.points[0].worst_separation - (1.0 - mn.points[0].worst_separation)).abs() < 1e-12);
        let cfg = m.points[0].argworst;
        assert!(edge_sdp_value(PayoffKind::Cut, &cfg) >= 1.0 - 0.01 - 1e-9);
        assert!((separation_prob(&cfg) - m.points[0].worst_separation).abs() < 1e-9);
        assert!(sqrt_eps_curve(&[0.6], Regime::Min, 101).is_err());
    }
}
