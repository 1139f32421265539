//! Benchmark runs over instance suites: solve, round, repair and compare with
//! the exhaustive optimum.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::independence::SearchStrategy;
use crate::instance::{generate, CspInstance, Family, ProblemKind, Sense};
use crate::lasserre::{build_relaxation, check_feasibility, FeasibilityReport, MomentSolution, SolutionFile, Tolerances};
use crate::oracle::brute_force;
use crate::rounding::{pipeline_from_solution, PipelineConfig, PipelineResult};
use crate::sdp_solver::{solve, SolveReport, SolverConfig};

/// Environment variable naming the solution cache directory.
pub const CACHE_ENV: &str = "CCSP_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub level: usize,
    pub trials: usize,
    pub alpha: f64,
    pub depth: usize,
    pub strategy: SearchStrategy,
    pub include_diagonal: bool,
    pub seed: u64,
    pub delta_cap: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            level: p.level,
            trials: p.trials,
            alpha: p.alpha,
            depth: p.depth,
            strategy: p.strategy,
            include_diagonal: p.include_diagonal,
            seed: p.seed,
            delta_cap: p.delta_cap,
            max_iterations: p.solver.max_iterations,
            tolerance: p.solver.primal_tolerance,
        }
    }
}

impl RunSettings {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            primal_tolerance: self.tolerance,
            dual_tolerance: self.tolerance,
            ..SolverConfig::default()
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            level: self.level,
            alpha: self.alpha,
            depth: self.depth,
            strategy: self.strategy,
            include_diagonal: self.include_diagonal,
            trials: self.trials,
            seed: self.seed,
            delta_cap: self.delta_cap,
            solver: self.solver(),
        }
    }
}

/// One benchmark instance: a file or a generated family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub id: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub p_cross: Option<f64>,
    #[serde(default)]
    pub kind: Option<ProblemKind>,
}

impl InstanceSpec {
    pub fn generated(id: &str, family: Family, n: usize, seed: u64) -> Self {
        let (p, eps, p_cross) = match family {
            Family::Gnp { p } => (Some(p), None, None),
            Family::Planted { eps, p_cross } => (None, Some(eps), Some(p_cross)),
            _ => (None, None, None),
        };
        Self {
            id: id.to_string(),
            path: None,
            family: Some(family.name().to_string()),
            n: Some(n),
            seed,
            p,
            eps,
            p_cross,
            kind: None,
        }
    }

    pub fn family(&self) -> Result<Option<Family>> {
        let Some(name) = &self.family else {
            return Ok(None);
        };
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| Error::Config(format!("instance {}: family {name} needs {what}", self.id)))
        };
        Ok(Some(match name.as_str() {
            "cycle" => Family::Cycle,
            "complete" => Family::Complete,
            "gnp" => Family::Gnp { p: need(self.p, "p")? },
            "two_cliques" => Family::TwoCliques,
            "planted" => Family::Planted {
                eps: need(self.eps, "eps")?,
                p_cross: self.p_cross.unwrap_or(1.0),
            },
            other => {
                return Err(Error::Config(format!("instance {}: unknown family {other}", self.id)))
            }
        }))
    }

    /// Loads or generates the instance; relative paths resolve against `base`.
    pub fn resolve(&self, base: &Path) -> Result<CspInstance> {
        let kind = self.kind.unwrap_or(ProblemKind::MaxCutBisection);
        match (&self.path, self.family()?) {
            (Some(p), None) => {
                let full = if p.is_absolute() { p.clone() } else { base.join(p) };
                let inst = CspInstance::load(&full)?;
                match self.kind {
                    Some(k) if k != inst.kind => Err(Error::Config(format!(
                        "instance {}: file has kind {}, config says {}",
                        self.id,
                        inst.kind.name(),
                        k.name()
                    ))),
                    _ => Ok(inst),
                }
            }
            (None, Some(f)) => {
                let n = self
                    .n
                    .ok_or_else(|| Error::Config(format!("instance {}: generated instances need n", self.id)))?;
                generate(f, n, self.seed, kind)
            }
            _ => Err(Error::Config(format!(
                "instance {}: give exactly one of path or family",
                self.id
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// `"bundled"` prepends the bundled suite.
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default)]
    pub defaults: RunSettings,
    #[serde(default, rename = "instance")]
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: BenchConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        match cfg.suite.as_deref() {
            None => {}
            Some("bundled") => {
                let mut all = bundled_suite();
                all.append(&mut cfg.instances);
                cfg.instances = all;
            }
            Some(other) => return Err(Error::Config(format!("unknown suite {other}"))),
        }
        if cfg.instances.is_empty() {
            return Err(Error::Config("no instances configured".into()));
        }
        let mut ids: Vec<&str> = cfg.instances.iter().map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate instance id {}", w[0])));
        }
        Ok(cfg)
    }

    pub fn bundled() -> Self {
        Self {
            suite: Some("bundled".into()),
            defaults: RunSettings::default(),
            instances: bundled_suite(),
            cache_dir: None,
        }
    }
}

/// Twelve max-bisection instances with `n <= 16`.
pub fn bundled_suite() -> Vec<InstanceSpec> {
    let planted = |eps: f64| Family::Planted { eps, p_cross: 0.9 };
    vec![
        InstanceSpec::generated("c4", Family::Cycle, 4, 0),
        InstanceSpec::generated("k4", Family::Complete, 4, 0),
        InstanceSpec::generated("c6", Family::Cycle, 6, 0),
        InstanceSpec::generated("c8", Family::Cycle, 8, 0),
        InstanceSpec::generated("two_cliques_8", Family::TwoCliques, 8, 0),
        InstanceSpec::generated("two_cliques_12", Family::TwoCliques, 12, 0),
        InstanceSpec::generated("planted_12_e0.01", planted(0.01), 12, 1),
        InstanceSpec::generated("planted_12_e0.05", planted(0.05), 12, 2),
        InstanceSpec::generated("planted_12_e0.10", planted(0.1), 12, 3),
        InstanceSpec::generated("gnp_10_0.5_s7", Family::Gnp { p: 0.5 }, 10, 7),
        InstanceSpec::generated("gnp_12_0.4_s11", Family::Gnp { p: 0.4 }, 12, 11),
        InstanceSpec::generated("gnp_16_0.3_s3", Family::Gnp { p: 0.3 }, 16, 3),
    ]
}

/// Everything `solve` produces for one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveArtifact {
    pub schema_version: u32,
    pub instance: CspInstance,
    pub solution: SolutionFile,
    pub report: SolveReport,
    pub feasibility: FeasibilityReport,
}

impl SolveArtifact {
    pub fn solve(inst: &CspInstance, level: usize, cfg: &SolverConfig) -> Result<Self> {
        let rel = build_relaxation(inst, level)?;
        let (sol, report) = solve(&rel, cfg)?;
        let feasibility = check_feasibility(&sol, inst, &Tolerances::default())?;
        Ok(Self {
            schema_version: crate::SCHEMA_VERSION,
            instance: inst.clone(),
            solution: SolutionFile::from(&sol),
            report,
            feasibility,
        })
    }

    pub fn moment_solution(&self) -> Result<MomentSolution> {
        self.solution.clone().try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: SolveArtifact = serde_json::from_str(text)?;
        if a.schema_version != crate::SCHEMA_VERSION {
            return Err(Error::arg(format!("unsupported schema version {}", a.schema_version)));
        }
        a.instance.validate()?;
        Ok(a)
    }
}

fn cache_key(inst: &CspInstance, level: usize, cfg: &SolverConfig) -> Result<String> {
    let mut h = DefaultHasher::new();
    serde_json::to_string(inst)?.hash(&mut h);
    level.hash(&mut h);
    serde_json::to_string(cfg)?.hash(&mut h);
    Ok(format!("{:016x}", h.finish()))
}

/// Solves, reusing `cache/<id>-<key>.json` when present.
pub fn solve_cached(
    id: &str,
    inst: &CspInstance,
    level: usize,
    cfg: &SolverConfig,
    cache: Option<&Path>,
) -> Result<SolveArtifact> {
    let Some(dir) = cache else {
        return SolveArtifact::solve(inst, level, cfg);
    };
    let file = dir.join(format!("{id}-{}.json", cache_key(inst, level, cfg)?));
    if let Ok(text) = std::fs::read_to_string(&file) {
        if let Ok(a) = SolveArtifact::from_json(&text) {
            if &a.instance == inst {
                return Ok(a);
            }
        }
    }
    let a = SolveArtifact::solve(inst, level, cfg)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(&file, a.to_json()?)?;
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub id: String,
    pub kind: String,
    pub n: usize,
    pub terms: usize,
    pub level: usize,
    pub sdp_value: f64,
    pub solve_status: String,
    pub iterations: usize,
    pub min_eigenvalue: f64,
    pub consistency: f64,
    pub cardinality: f64,
    pub edge_identity: f64,
    pub achieved_alpha: f64,
    pub conditioning_steps: usize,
    /// Value of the selected trial before repair.
    pub rounded_value: f64,
    pub mean_rounded_value: f64,
    pub repaired_value: f64,
    pub balance_after: f64,
    pub repair_refused: bool,
    pub optimum: f64,
    /// `repaired / optimum` when maximizing, `optimum / repaired` when minimizing.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub spec: InstanceSpec,
    pub row: BenchRow,
    pub artifact: SolveArtifact,
    pub result: PipelineResult,
}

pub fn run_instance(
    spec: &InstanceSpec,
    settings: &RunSettings,
    base: &Path,
    cache: Option<&Path>,
) -> Result<BenchOutcome> {
    let inst = spec.resolve(base)?;
    let artifact = solve_cached(&spec.id, &inst, settings.level, &settings.solver(), cache)?;
    let sol = artifact.moment_solution()?;
    let result = pipeline_from_solution(&inst, &sol, &settings.pipeline())?;
    let optimum = brute_force(&inst, true)?.optimum;
    let repaired = result.best.value;
    let ratio = match inst.sense() {
        Sense::Maximize => {
            if optimum > 0.0 {
                repaired / optimum
            } else {
                1.0
            }
        }
        Sense::Minimize => {
            if repaired > 0.0 {
                optimum / repaired
            } else {
                1.0
            }
        }
    };
    let repair = result.best.repair.as_ref();
    let row = BenchRow {
        id: spec.id.clone(),
        kind: inst.kind.name().to_string(),
        n: inst.n,
        terms: inst.payoffs.len(),
        level: settings.level,
        sdp_value: artifact.report.objective,
        solve_status: serde_json::to_value(artifact.report.status)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        iterations: artifact.report.iterations,
        min_eigenvalue: artifact.feasibility.min_eigenvalue,
        consistency: artifact.feasibility.consistency,
        cardinality: artifact.feasibility.cardinality,
        edge_identity: artifact.feasibility.edge_identity,
        achieved_alpha: result.achieved_alpha,
        conditioning_steps: result.steps.len(),
        rounded_value: repair.map_or(repaired, |r| r.value_before),
        mean_rounded_value: result.statistics.mean_value,
        repaired_value: repaired,
        balance_after: result.best.balance,
        repair_refused: repair.is_some_and(|r| r.refused),
        optimum,
        ratio,
    };
    Ok(BenchOutcome {
        spec: spec.clone(),
        row,
        artifact,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub rows: Vec<BenchRow>,
    /// Smallest ratio over max-bisection rows.
    pub min_bisection_ratio: Option<f64>,
    /// Smallest `c` with `repaired >= 1 - c sqrt(eps)` over planted rows.
    pub planted_c: Option<f64>,
}

/// Runs every instance in parallel; outcomes are ordered by id.
pub fn run_bench(cfg: &BenchConfig, base: &Path, cache: Option<&Path>) -> Result<Vec<BenchOutcome>> {
    let cache = cache.map(Path::to_path_buf).or_else(|| cfg.cache_dir.clone());
    let mut out = cfg
        .instances
        .par_iter()
        .map(|spec| run_instance(spec, &cfg.defaults, base, cache.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.row.id.cmp(&b.row.id));
    Ok(out)
}

pub fn summarize(outcomes: &[BenchOutcome]) -> BenchSummary {
    let rows: Vec<BenchRow> = outcomes.iter().map(|o| o.row.clone()).collect();
    let min_bisection_ratio = rows
        .iter()
        .filter(|r| r.kind == ProblemKind::MaxCutBisection.name())
        .map(|r| r.ratio)
        .reduce(f64::min);
    let planted_c = outcomes
        .iter()
        .filter_map(|o| match o.spec.family() {
            Ok(Some(Family::Planted { eps, .. })) if eps > 0.0 => {
                Some(((1.0 - o.row.repaired_value) / eps.sqrt()).max(0.0))
            }
            _ => None,
        })
        .reduce(f64::max);
    BenchSummary {
        schema_version: crate::SCHEMA_VERSION,
        rows,
        min_bisection_ratio,
        planted_c,
    }
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Cache directory from the environment, if set and non-empty.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
