//! ADMM splitting solver for the programs produced by [`crate::lasserre`].
//!
//! The iteration alternates a projection onto the affine set of matrices whose
//! tied entries agree with a parameter vector satisfying the equalities (a
//! weighted least-squares step with a cached pseudo-inverse) and a projection
//! onto the PSD cone by a dense symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Sense;
use crate::lasserre::{min_eigenvalue, ConicProgram, MomentSolution, Relaxation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub primal_tolerance: f64,
    pub dual_tolerance: f64,
    /// Absolute bound on the negative part of the smallest eigenvalue of the
    /// returned Gram matrix, checked once the residuals have converged.
    pub psd_tolerance: f64,
    /// Initial penalty parameter.
    pub rho: f64,
    /// Rebalance `rho` every this many iterations (0 disables).
    pub adapt_every: usize,
    pub over_relaxation: f64,
    /// Reserved for randomized restarts; the iteration itself is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            primal_tolerance: 1e-6,
            dual_tolerance: 1e-6,
            psd_tolerance: 1e-6,
            rho: 1.0,
            adapt_every: 50,
            over_relaxation: 1.6,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::arg("max_iterations must be at least 1"));
        }
        if !(self.primal_tolerance > 0.0 && self.dual_tolerance > 0.0 && self.psd_tolerance > 0.0) {
            return Err(Error::arg("tolerances must be positive"));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::arg("rho must be positive"));
        }
        if !(1.0..2.0).contains(&self.over_relaxation) {
            return Err(Error::arg("over_relaxation must lie in [1, 2)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    InfeasibleSuspected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
}

impl TracePoint {
    pub fn combined(&self) -> f64 {
        self.primal.max(self.dual)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub rho: f64,
    /// Residuals at iterations `{1, 2, 5} x 10^j` and at the last iteration.
    pub trace: Vec<TracePoint>,
}

/// Nearest PSD matrix in Frobenius norm (eigenvalues clipped at zero).
pub fn project_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::arg("project_psd requires a square matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in PSD projection input".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), 1e-15, 10_000).ok_or_else(|| {
        Error::Numerical(format!(
            "eigendecomposition did not converge (n = {n}, max |entry| = {:e})",
            m.amax()
        ))
    })?;
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            out.ger(lam, &v, &v, 1.0);
        }
    }
    Ok(crate::lasserre::symmetrize(out))
}

/// The affine projection, precomputed.
struct AffineStep {
    /// `n_p`: number of matrix entries (counting both triangles) tied to `p`.
    counts: Vec<f64>,
    /// `D^-1 E^T (E D^-1 E^T)^+`.
    correction: DMatrix<f64>,
    e: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

impl AffineStep {
    fn new(p: &ConicProgram) -> Result<Self> {
        let np = p.num_params;
        let mut counts = vec![0.0; np];
        for &(r, c, q) in &p.tied {
            counts[q] += if r == c { 1.0 } else { 2.0 };
        }
        if counts.iter().any(|&n| n == 0.0) {
            return Err(Error::arg("program has a parameter with no tied entry"));
        }
        let m = p.equalities.len();
        let mut e = DMatrix::<f64>::zeros(m, np);
        let mut b = DVector::zeros(m);
        for (i, row) in p.equalities.iter().enumerate() {
            for &(q, v) in &row.coefs {
                e[(i, q)] += v;
            }
            b[i] = row.rhs;
        }
        let dinv = DVector::from_iterator(np, counts.iter().map(|n| 1.0 / n));
        let mut edt = e.transpose();
        for q in 0..np {
            for i in 0..m {
                edt[(q, i)] *= dinv[q];
            }
        }
        let normal = &e * &edt;
        let pinv = normal
            .clone()
            .pseudo_inverse(1e-10 * normal.amax().max(1.0))
            .map_err(|e| Error::Numerical(format!("normal equations: {e}")))?;
        let correction = edt * pinv;
        let sigma = match p.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let mut c = DVector::zeros(np);
        for &(q, v) in &p.objective {
            c[q] += sigma * v;
        }
        Ok(Self {
            counts,
            correction,
            e,
            b,
            c,
        })
    }

    /// Projects `v` onto the affine set after a linear objective pull of
    /// strength `pull` (`1/rho`, or 0 for a pure projection). Returns the
    /// matrix and its parameter vector.
    fn apply(&self, p: &ConicProgram, v: &DMatrix<f64>, pull: f64) -> (DMatrix<f64>, DVector<f64>) {
        let np = p.num_params;
        let mut s = DVector::<f64>::zeros(np);
        for &(r, c, q) in &p.tied {
            s[q] += if r == c { v[(r, c)] } else { v[(r, c)] + v[(c, r)] };
        }
        let mut y = DVector::<f64>::from_fn(np, |q, _| (s[q] + pull * self.c[q]) / self.counts[q]);
        let resid = &self.e * &y - &self.b;
        y -= &self.correction * resid;
        let mut x = v.clone();
        for &(r, c, q) in &p.tied {
            x[(r, c)] = y[q];
            x[(c, r)] = y[q];
        }
        (x, y)
    }
}

fn traced(iter: usize) -> bool {
    let mut m = iter;
    while m >= 10 && m % 10 == 0 {
        m /= 10;
    }
    matches!(m, 1 | 2 | 5)
}

/// Solves the relaxation. The returned Gram matrix is the lift of the affine
/// projection of the final PSD iterate, so the tied entries, equalities and
/// cardinality rows hold to rounding error. Convergence additionally requires
/// the lifted matrix to be PSD up to `psd_tolerance`.
pub fn solve(rel: &Relaxation, cfg: &SolverConfig) -> Result<(MomentSolution, SolveReport)> {
    cfg.validate()?;
    let p = &rel.program;
    let d = p.dim;
    let step = AffineStep::new(p)?;
    let alpha = cfg.over_relaxation;
    let mut rho = cfg.rho;

    // start from the identity-like product point: M = I projected
    let mut z = DMatrix::<f64>::identity(d, d);
    let mut u = DMatrix::<f64>::zeros(d, d);
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut watch: Vec<(usize, f64)> = Vec::new();
    let mut next_psd_check = 0;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        let v = &z - &u;
        let (x, _) = step.apply(p, &v, 1.0 / rho);
        let xh = alpha * &x + (1.0 - alpha) * &z;
        let z_old = z;
        z = project_psd(&(&xh + &u))?;
        u += &xh - &z;

        let xn = x.norm();
        let zn = z.norm();
        primal = (&x - &z).norm() / xn.max(zn).max(1.0);
        dual = rho * (&z - &z_old).norm() / (rho * u.norm()).max(1.0);
        if traced(it) {
            trace.push(TracePoint {
                iteration: it,
                primal,
                dual,
            });
        }
        if !primal.is_finite() || !dual.is_finite() {
            return Err(Error::Numerical(format!("residual diverged at iteration {it}")));
        }
        if primal <= cfg.primal_tolerance && dual <= cfg.dual_tolerance {
            if it >= next_psd_check {
                let (m, _) = step.apply(p, &z, 0.0);
                if min_eigenvalue(&rel.lift(&m)) >= -cfg.psd_tolerance {
                    status = SolveStatus::Optimal;
                    break;
                }
                next_psd_check = it + 25;
            }
        }
        if cfg.adapt_every > 0 && it % cfg.adapt_every == 0 {
            let ratio = primal / dual.max(1e-300);
            if !(0.5..=2.0).contains(&ratio) {
                let f = ratio.sqrt().clamp(0.1, 10.0);
                rho *= f;
                u /= f;
            }
        }
        if it % 1000 == 0 {
            watch.push((it, primal));
            if it >= 5000 && watch.len() >= 3 {
                let (_, a) = watch[watch.len() - 3];
                let (_, b) = watch[watch.len() - 1];
                if a > 1e-3 && b > 1e-3 && (a - b).abs() <= 0.01 * a {
                    status = SolveStatus::InfeasibleSuspected;
                    break;
                }
            }
        }
    }
    if trace.last().map(|t| t.iteration) != Some(iterations) {
        trace.push(TracePoint {
            iteration: iterations,
            primal,
            dual,
        });
    }

    let (m, y) = step.apply(p, &z, 0.0);
    let objective = p.objective_of(y.as_slice());
    let gram = rel.lift(&m);
    let sol = MomentSolution::new(rel.n, rel.level, gram, objective)?;
    Ok((
        sol,
        SolveReport {
            status,
            iterations,
            primal_residual: primal,
            dual_residual: dual,
            objective,
            rho,
            trace,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_projection_examples() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((project_psd(&i).unwrap() - &i).amax() < 1e-15);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = project_psd(&m).unwrap();
        assert!((p - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn psd_projection_is_idempotent() {
        let a = DMatrix::from_fn(6, 6, |r, c| ((r * 7 + c * 3) % 5) as f64 - 2.0);
        let s = &a + a.transpose();
        let p = project_psd(&s).unwrap();
        let pp = project_psd(&p).unwrap();
        assert!((&p - &pp).amax() < 1e-12);
        let g = &a * a.transpose();
        assert!((project_psd(&g).unwrap() - &g).amax() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_a_numerical_error() {
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(project_psd(&m), Err(Error::Numerical(_))));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            over_relaxation: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trace_schedule() {
        let t: Vec<usize> = (1..=1000).filter(|&i| traced(i)).collect();
        assert_eq!(t, vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]);
    }
}
