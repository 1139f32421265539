//! The `ccsp` command line.
//!
//! Seeding: the global `--seed` is the only source of randomness. Rounding
//! trial `t` uses `sub_seed(seed, t)`, conditioning uses
//! `conditioning_seed(seed)`, instance generation and Monte Carlo use `seed`
//! directly, and `bench` overrides the configured seed when `--seed` is given.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{cache_dir_from_env, run_bench, summarize, write_rows_csv, BenchConfig, SolveArtifact};
use crate::dictator::{
    build_gadget, completeness, soundness_enumerate, soundness_triples, SoundnessMode, SoundnessTriple,
};
use crate::error::{Error, Result};
use crate::independence::SearchStrategy;
use crate::instance::{generate, write_edge_list, CspInstance, Family, ProblemKind};
use crate::landscape::{ratio_search, sqrt_eps_curve, write_grid_csv, Domain, PayoffKind, Regime, SearchConfig};
use crate::normal::bvn_cdf;
use crate::oracle::{brute_force, mc_bvn};
use crate::rounding::{pipeline_from_solution, PipelineConfig};
use crate::sdp_solver::SolverConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Numerical(_) | Error::InconsistentSolution(_) | Error::NullEvent { .. } => {
            EXIT_NUMERICAL
        }
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "ccsp", version, about = "Moment relaxations and Gaussian rounding for cardinality-constrained CSPs")]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and solve the moment relaxation of an instance.
    Solve(SolveArgs),
    /// Condition, round and repair a solved relaxation.
    Round(RoundArgs),
    /// Single-edge rounding landscapes.
    #[command(subcommand)]
    Landscape(LandscapeCommand),
    /// Dictatorship gadget from a solved relaxation.
    Dict(DictArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
    /// Exact and Monte Carlo references.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Write a generated instance as an edge list.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Edge list, or a `.json` instance.
    pub instance: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = SolverConfig::default().primal_tolerance)]
    pub tolerance: f64,
    /// Solution file (instance, moment matrix, solver and feasibility reports).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Sampled,
    Exhaustive,
}

impl From<StrategyArg> for SearchStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Sampled => SearchStrategy::Sampled,
            StrategyArg::Exhaustive => SearchStrategy::Exhaustive,
        }
    }
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    /// Solution file written by `solve`.
    pub solution: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Sampled)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 1.0)]
    pub delta_cap: f64,
    /// Leave `I(X_i; X_i)` terms out of the average mutual information.
    #[arg(long)]
    pub no_diagonal: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PayoffArg {
    Cut,
    #[value(name = "2sat")]
    TwoSat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    Min,
    Max,
}

#[derive(Debug, Subcommand)]
pub enum LandscapeCommand {
    /// Minimum of rounded value over relaxation value.
    Ratio(RatioArgs),
    /// Worst-case separation of nearly uncut (or nearly cut) edges.
    SqrtEps(SqrtEpsArgs),
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long, value_enum, default_value_t = PayoffArg::Cut)]
    pub payoff: PayoffArg,
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    #[arg(long, default_value_t = 60)]
    pub rounds: usize,
    /// Number of best grid cells refined.
    #[arg(long, default_value_t = 16)]
    pub seeds: usize,
    /// Fix the biases: `--slice MU1,MU2`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub slice: Option<Vec<f64>>,
    /// Certificate JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Full grid CSV (one row per cell).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SqrtEpsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0025, 0.01, 0.04, 0.09])]
    pub eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = RegimeArg::Min)]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 401)]
    pub resolution: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Boolean,
    Grid,
}

#[derive(Debug, Args)]
pub struct DictArgs {
    /// Solution file written by `solve`.
    pub solution: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Completeness tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Influence thresholds for the soundness enumeration.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Boolean)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 8)]
    pub mesh: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub balance_tol: f64,
    /// Gadget JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Completeness and soundness report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Soundness rows for every function and threshold.
    #[arg(long)]
    pub soundness_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML configuration.
    pub config: PathBuf,
    /// Directory for the summary and per-instance artifacts.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Solution cache; defaults to the `CCSP_CACHE_DIR` environment variable.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exhaustive optimum.
    BruteForce {
        instance: PathBuf,
        /// Ignore the cardinality constraint.
        #[arg(long)]
        free: bool,
    },
    /// `P(X <= t1, Y <= t2)` by quadrature and by Monte Carlo.
    Bvn {
        #[arg(allow_negative_numbers = true)]
        t1: f64,
        #[arg(allow_negative_numbers = true)]
        t2: f64,
        #[arg(allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Cycle,
    Complete,
    Gnp,
    TwoCliques,
    Planted,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_cross: f64,
    #[arg(long, default_value = "maxcut-bisection")]
    pub kind: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn load_artifact(path: &Path) -> Result<SolveArtifact> {
    SolveArtifact::from_json(&std::fs::read_to_string(path)?)
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Round(a) => cmd_round(a, seed, out),
        Command::Landscape(LandscapeCommand::Ratio(a)) => cmd_ratio(a, out, err),
        Command::Landscape(LandscapeCommand::SqrtEps(a)) => cmd_sqrt_eps(a, out),
        Command::Dict(a) => cmd_dict(a, out),
        Command::Bench(a) => cmd_bench(a, cli.seed, out, err),
        Command::Oracle(o) => cmd_oracle(o, seed, out),
        Command::Generate(a) => cmd_generate(a, seed, out),
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = CspInstance::load(&a.instance)?;
    let cfg = SolverConfig {
        max_iterations: a.max_iterations,
        primal_tolerance: a.tolerance,
        dual_tolerance: a.tolerance,
        ..SolverConfig::default()
    };
    let art = SolveArtifact::solve(&inst, a.level, &cfg)?;
    if let Some(p) = &a.out {
        write_file(p, &art.to_json()?)?;
    }
    let r = &art.report;
    writeln!(
        out,
        "objective {:.10} status {} iterations {} primal {:.3e} dual {:.3e} min_eigenvalue {:.3e}",
        r.objective,
        serde_json::to_value(r.status)?.as_str().unwrap_or_default(),
        r.iterations,
        r.primal_residual,
        r.dual_residual,
        art.feasibility.min_eigenvalue
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RoundOutput<'a> {
    schema_version: u32,
    seed: u64,
    config: &'a PipelineConfig,
    best_trial: usize,
    labels: &'a [i8],
    value: f64,
    balance: f64,
    repair: &'a Option<crate::rounding::RepairReport>,
    statistics: &'a crate::rounding::TrialStatistics,
    sdp_value: f64,
    rounded_sdp_value: f64,
    achieved_alpha: f64,
    alpha_reached: bool,
    steps: &'a [crate::independence::ConditioningStep],
}

fn cmd_round(a: &RoundArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let art = load_artifact(&a.solution)?;
    let sol = art.moment_solution()?;
    let cfg = PipelineConfig {
        level: sol.level,
        alpha: a.alpha,
        depth: a.depth,
        strategy: a.strategy.into(),
        include_diagonal: !a.no_diagonal,
        trials: a.trials,
        seed,
        delta_cap: a.delta_cap,
        solver: SolverConfig::default(),
    };
    let res = pipeline_from_solution(&art.instance, &sol, &cfg)?;
    if let Some(p) = &a.out {
        let o = RoundOutput {
            schema_version: crate::SCHEMA_VERSION,
            seed,
            config: &cfg,
            best_trial: res.best_trial,
            labels: &res.best.labels,
            value: res.best.value,
            balance: res.best.balance,
            repair: &res.best.repair,
            statistics: &res.statistics,
            sdp_value: res.sdp_value,
            rounded_sdp_value: res.rounded_sdp_value,
            achieved_alpha: res.achieved_alpha,
            alpha_reached: res.alpha_reached,
            steps: &res.steps,
        };
        write_file(p, &json(&o)?)?;
    }
    if let Some(p) = &a.stats {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &res.trials {
            w.serialize(t)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(p, &String::from_utf8_lossy(&bytes))?;
    }
    writeln!(
        out,
        "value {:.10} balance {:.3e} best_trial {} sdp {:.10} alpha {:.4} steps {}",
        res.best.value,
        res.best.balance,
        res.best_trial,
        res.sdp_value,
        res.achieved_alpha,
        res.steps.len()
    )?;
    Ok(EXIT_OK)
}

fn cmd_ratio(a: &RatioArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let kind = match a.payoff {
        PayoffArg::Cut => PayoffKind::Cut,
        PayoffArg::TwoSat => PayoffKind::TWO_SAT,
    };
    let domain = match &a.slice {
        Some(v) if v.len() == 2 => Domain::Slice { mu1: v[0], mu2: v[1] },
        Some(_) => return Err(Error::arg("--slice takes two values: MU1,MU2")),
        None => Domain::Full,
    };
    let start = Instant::now();
    let cert = ratio_search(
        kind,
        domain,
        &SearchConfig {
            resolution: a.resolution,
            refinement_rounds: a.rounds,
            seeds: a.seeds,
        },
    )?;
    writeln!(err, "search took {:.2}s", start.elapsed().as_secs_f64())?;
    if let Some(p) = &a.out {
        write_file(p, &json(&cert)?)?;
    }
    if let Some(p) = &a.csv {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
        write_grid_csv(kind, domain, a.resolution, &mut f)?;
        f.flush()?;
    }
    writeln!(
        out,
        "{} min_ratio {:.7} +- {:.1e} at mu1 {:.6} mu2 {:.6} rho {:.6}",
        kind.name(),
        cert.min_ratio,
        cert.error_bar,
        cert.argmin.mu1,
        cert.argmin.mu2,
        cert.argmin.rho
    )?;
    Ok(EXIT_OK)
}

fn cmd_sqrt_eps(a: &SqrtEpsArgs, out: &mut dyn Write) -> Result<i32> {
    let regime = match a.regime {
        RegimeArg::Min => Regime::Min,
        RegimeArg::Max => Regime::Max,
    };
    let curve = sqrt_eps_curve(&a.eps, regime, a.resolution)?;
    if let Some(p) = &a.out {
        write_file(p, &json(&curve)?)?;
    }
    if let Some(p) = &a.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["eps", "worst_separation", "mu1", "mu2", "rho"])?;
        for pt in &curve.points {
            w.write_record([
                pt.eps.to_string(),
                pt.worst_separation.to_string(),
                pt.argworst.mu1.to_string(),
                pt.argworst.mu2.to_string(),
                pt.argworst.rho.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(p, &String::from_utf8_lossy(&bytes))?;
    }
    for pt in &curve.points {
        writeln!(out, "eps {:<8} worst_separation {:.6}", pt.eps, pt.worst_separation)?;
    }
    writeln!(out, "beta {:.4} constant {:.4}", curve.beta, curve.constant)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DictReport {
    schema_version: u32,
    completeness: crate::dictator::CompletenessReport,
    soundness: Vec<SoundnessTriple>,
}

fn cmd_dict(a: &DictArgs, out: &mut dyn Write) -> Result<i32> {
    let art = load_artifact(&a.solution)?;
    let sol = art.moment_solution()?;
    let g = build_gadget(&sol, &art.instance, a.eps, a.r)?;
    if let Some(p) = &a.out {
        write_file(p, &json(&g)?)?;
    }
    let comp = completeness(&g, a.tol);
    let mode = match a.mode {
        ModeArg::Boolean => SoundnessMode::BooleanExhaustive,
        ModeArg::Grid => SoundnessMode::Grid { mesh: a.mesh },
    };
    let triples = if a.tau.is_empty() {
        Vec::new()
    } else {
        soundness_triples(&g, &art.instance, &a.tau, mode, a.balance_tol)?
    };
    if let Some(p) = &a.soundness_csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["tau", "function_id", "balance", "max_influence", "value"])?;
        for &tau in &a.tau {
            let rep = soundness_enumerate(&g, tau, mode, a.balance_tol)?;
            for r in &rep.rows {
                w.write_record([
                    tau.to_string(),
                    r.function_id.to_string(),
                    r.balance.to_string(),
                    r.max_influence.to_string(),
                    r.value.map(|v| v.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(p, &String::from_utf8_lossy(&bytes))?;
    }
    writeln!(
        out,
        "R {} eps {} sdp {:.10} min_dictator {:.10} (coordinate {}) max_balance_error {:.3e}",
        g.r, g.epsilon, g.sdp_value, comp.min_value, comp.min_coordinate, comp.max_balance_error
    )?;
    for t in &triples {
        writeln!(
            out,
            "tau {} max_value {} opt {:.10} slack {:.3e} admissible {}",
            t.tau,
            t.max_value.map_or("none".to_string(), |v| format!("{v:.10}")),
            t.opt,
            t.slack,
            t.admissible
        )?;
    }
    for v in &comp.violations {
        writeln!(out, "violation: dictator {}: {}", v.coordinate, v.reason)?;
    }
    let passed = comp.passed();
    if let Some(p) = &a.report {
        write_file(
            p,
            &json(&DictReport {
                schema_version: crate::SCHEMA_VERSION,
                completeness: comp,
                soundness: triples,
            })?,
        )?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_bench(a: &BenchArgs, seed: Option<u64>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg = BenchConfig::from_toml(&text)?;
    if let Some(s) = seed {
        cfg.defaults.seed = s;
    }
    let base = a.config.parent().unwrap_or(Path::new("."));
    let cache = a.cache_dir.clone().or_else(cache_dir_from_env);
    let start = Instant::now();
    let outcomes = run_bench(&cfg, base, cache.as_deref())?;
    writeln!(err, "bench took {:.2}s", start.elapsed().as_secs_f64())?;
    let summary = summarize(&outcomes);
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        write_rows_csv(&summary.rows, &mut buf)?;
        std::fs::write(dir.join("summary.csv"), buf)?;
        std::fs::write(dir.join("summary.json"), json(&summary)?)?;
        for o in &outcomes {
            std::fs::write(dir.join(format!("{}.solve.json", o.row.id)), o.artifact.to_json()?)?;
            std::fs::write(dir.join(format!("{}.round.json", o.row.id)), json(&o.result)?)?;
        }
    }
    writeln!(
        out,
        "{:<20} {:>3} {:>12} {:>7} {:>10} {:>10} {:>10} {:>7}",
        "id", "n", "sdp", "alpha", "rounded", "repaired", "optimum", "ratio"
    )?;
    for r in &summary.rows {
        writeln!(
            out,
            "{:<20} {:>3} {:>12.8} {:>7.4} {:>10.6} {:>10.6} {:>10.6} {:>7.4}",
            r.id, r.n, r.sdp_value, r.achieved_alpha, r.rounded_value, r.repaired_value, r.optimum, r.ratio
        )?;
    }
    if let Some(m) = summary.min_bisection_ratio {
        writeln!(out, "min max-bisection ratio {m:.6}")?;
    }
    if let Some(c) = summary.planted_c {
        writeln!(out, "planted fit: repaired >= 1 - {c:.4} sqrt(eps)")?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(o: &OracleCommand, seed: u64, out: &mut dyn Write) -> Result<i32> {
    match o {
        OracleCommand::BruteForce { instance, free } => {
            let inst = CspInstance::load(instance)?;
            let r = brute_force(&inst, !free)?;
            write!(out, "{}", json(&r)?)?;
        }
        OracleCommand::Bvn { t1, t2, rho, samples } => {
            let q = bvn_cdf(*t1, *t2, *rho);
            let mc = mc_bvn(*t1, *t2, *rho, *samples, seed)?;
            writeln!(
                out,
                "quadrature {q:.12} monte_carlo {:.6} sigma {:.2e} samples {}",
                mc.estimate, mc.sigma, mc.samples
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_generate(a: &GenerateArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let family = match a.family {
        FamilyArg::Cycle => Family::Cycle,
        FamilyArg::Complete => Family::Complete,
        FamilyArg::Gnp => Family::Gnp { p: a.p },
        FamilyArg::TwoCliques => Family::TwoCliques,
        FamilyArg::Planted => Family::Planted {
            eps: a.eps,
            p_cross: a.p_cross,
        },
    };
    let kind: ProblemKind = a.kind.parse()?;
    let inst = generate(family, a.n, seed, kind)?;
    let text = write_edge_list(&inst)?;
    match &a.out {
        Some(p) => write_file(p, &text)?,
        None => write!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let code = run_from(std::iter::once("ccsp").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
        assert_eq!(
            exit_code(&Error::Capacity { what: "x".into(), size: 2, cap: 1 }),
            EXIT_CAPACITY
        );
        assert_eq!(exit_code(&Error::arg("x")), EXIT_INPUT);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn oracle_bvn_prints_both_estimates() {
        let (code, out, _) = run_args(&["--seed", "3", "oracle", "bvn", "0", "0", "0", "--samples", "10000"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("quadrature 0.250000000000"));
    }

    #[test]
    fn generate_to_stdout() {
        let (code, out, _) = run_args(&["generate", "--family", "cycle", "--n", "4"]);
        assert_eq!(code, 0);
        let inst = crate::instance::load_edge_list(&out).unwrap();
        assert_eq!(inst.n, 4);
        assert_eq!(run_args(&["generate", "--family", "cycle", "--n", "5"]).0, EXIT_INPUT);
    }
}
