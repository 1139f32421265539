//! Acceptance battery: one PASS/FAIL line per criterion.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use ccsp::bench::{run_bench, BenchConfig, BenchOutcome};
use ccsp::dictator::{build_gadget, completeness, soundness_triples, SoundnessMode};
use ccsp::independence::{alpha_independence, chain_rule_terms, condition, mutual_information};
use ccsp::instance::{generate, CspInstance, Family, ProblemKind};
use ccsp::landscape::{ratio_search, sqrt_eps_curve, Domain, PayoffKind, Regime, SearchConfig};
use ccsp::normal::{bvn_cdf, cdf, inv_cdf};
use ccsp::oracle::{exact_mixture_moments, mc_bvn};
use ccsp::rng::{rng_from_seed, sub_seed};
use ccsp::rounding::{pipeline, round_labels, BiasProfile, PipelineConfig};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn criterion_1_2(rep: &mut Report) {
    for (id, kind, name) in [(1, PayoffKind::Cut, "ratio certificate (cut)"), (2, PayoffKind::TWO_SAT, "ratio certificate (2-Sat)")] {
        let start = Instant::now();
        let cert = ratio_search(kind, Domain::Full, &SearchConfig::default()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let in_range = match kind {
            PayoffKind::Cut => (0.84..=0.87).contains(&cert.min_ratio),
            _ => cert.min_ratio >= 0.91,
        };
        rep.line(
            id,
            name,
            in_range && secs <= 300.0,
            format!(
                "min ratio {:.6} +- {:.1e} at ({:.4}, {:.4}, {:.4}), grid minimum {:.6}, {:.1}s",
                cert.min_ratio,
                cert.error_bar,
                cert.argmin.mu1,
                cert.argmin.mu2,
                cert.argmin.rho,
                cert.grid_min_ratio,
                secs
            ),
        );
    }
}

fn criterion_3(rep: &mut Report) {
    let start = Instant::now();
    let curve = sqrt_eps_curve(&[0.0025, 0.01, 0.04, 0.09], Regime::Min, 401).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pts: Vec<String> = curve
        .points
        .iter()
        .map(|p| format!("{}:{:.4}", p.eps, p.worst_separation))
        .collect();
    rep.line(
        3,
        "sqrt-eps law",
        (0.4..=0.6).contains(&curve.beta) && secs <= 120.0,
        format!("beta {:.4} (C {:.3}); worst separation {}; {:.1}s", curve.beta, curve.constant, pts.join(" "), secs),
    );
}

/// Golden-section minimum of `(arccos(rho) / pi) / ((1 - rho) / 2)` on `[-1, 1)`.
fn gw_oracle() -> f64 {
    let f = |r: f64| (r.acos() / PI) / ((1.0 - r) / 2.0);
    let (mut a, mut b) = (-1.0f64, 0.5f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn criterion_4(rep: &mut Report) {
    let cert = ratio_search(PayoffKind::Cut, Domain::Slice { mu1: 0.0, mu2: 0.0 }, &SearchConfig::default()).unwrap();
    let oracle = gw_oracle();
    let ok = (cert.min_ratio - 0.878_567_2).abs() <= 1e-4 && (cert.min_ratio - oracle).abs() <= 1e-4;
    rep.line(
        4,
        "slice mu1 = mu2 = 0",
        ok,
        format!("slice minimum {:.8}, 1-D oracle {:.8}", cert.min_ratio, oracle),
    );
}

fn criterion_5(rep: &mut Report) -> Vec<BenchOutcome> {
    let start = Instant::now();
    let cfg = BenchConfig::bundled();
    let out = run_bench(&cfg, Path::new("."), None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs <= 900.0 && out.len() == 12;
    let mut worst = f64::INFINITY;
    for o in &out {
        let r = &o.row;
        println!(
            "     {:<18} n {:>2} sdp {:.6} repaired {:.6} opt {:.6} ratio {:.4}",
            r.id, r.n, r.sdp_value, r.repaired_value, r.optimum, r.ratio
        );
        if r.kind == ProblemKind::MaxCutBisection.name() {
            worst = worst.min(r.ratio);
            ok &= r.repaired_value >= 0.84 * r.optimum;
        }
    }
    rep.line(
        5,
        "pipeline vs brute force",
        ok,
        format!("{} instances, worst ratio {:.4}, {:.1}s", out.len(), worst, secs),
    );
    out
}

fn criterion_6(rep: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.01, 0.05, 0.1] {
        let bound = 1.0 - 3.0 * f64::sqrt(eps);
        let mut worst = f64::INFINITY;
        for seed in 0..5u64 {
            let inst = generate(Family::Planted { eps, p_cross: 0.9 }, 12, seed, ProblemKind::MaxCutBisection).unwrap();
            let res = pipeline(&inst, &PipelineConfig { seed, ..PipelineConfig::default() }).unwrap();
            worst = worst.min(res.best.value);
            ok &= res.best.value >= bound && res.best.balance.abs() < 1e-12;
        }
        parts.push(format!("eps {eps}: worst {worst:.4} >= {bound:.4}"));
    }
    rep.line(6, "near-perfect regime", ok, parts.join("; "));
}

fn random_balanced(n: usize, rng: &mut impl Rng) -> Vec<u8> {
    let mut x: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        x.swap(i, j);
    }
    x
}

fn criterion_7(rep: &mut Report) {
    let mut rng = rng_from_seed(7);
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let n = 4 + 2 * (k as usize % 3);
        let family = if k % 2 == 0 { Family::Cycle } else { Family::Gnp { p: 0.6 } };
        let inst = generate(family, n, k, ProblemKind::MaxCutBisection).unwrap();
        let parts = 1 + rng.random_range(0..4usize);
        let raw: Vec<f64> = (0..parts).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let mut mixture: Vec<(Vec<u8>, f64)> = raw
            .iter()
            .map(|w| (random_balanced(n, &mut rng), w / total))
            .collect();
        let s: f64 = mixture.iter().map(|m| m.1).sum();
        mixture[0].1 += 1.0 - s;
        let sol = exact_mixture_moments(&inst, 3, &mixture).unwrap();
        for i in 0..n {
            let (lhs, rhs) = chain_rule_terms(&sol, &inst, i).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    let c4 = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
    let sol = exact_mixture_moments(&c4, 3, &[(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)]).unwrap();
    let before = alpha_independence(&sol, &c4, true).unwrap().average_mi;
    let after = alpha_independence(&condition(&sol, &c4, 0, 0).unwrap(), &c4, true)
        .unwrap()
        .average_mi;
    rep.line(
        7,
        "conditioning chain rule",
        worst <= 1e-9 && (before - 1.0).abs() <= 1e-12 && after <= 1e-9,
        format!("max chain-rule gap {worst:.2e} over 100 fixtures; mixture MI {before:.6} -> {after:.2e} bits"),
    );
}

fn criterion_8(rep: &mut Report, outcomes: &[BenchOutcome]) {
    let mut ok = !outcomes.is_empty();
    let (mut eig, mut cons, mut card, mut edge) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for o in outcomes {
        let f = &o.artifact.feasibility;
        eig = eig.min(f.min_eigenvalue);
        cons = cons.max(f.consistency).max(f.marginalization).max(f.normalization);
        card = card.max(f.cardinality);
        edge = edge.max(f.edge_identity);
    }
    ok &= eig >= -1e-5 && cons <= 1e-5 && card <= 1e-5 && edge <= 1e-6;
    rep.line(
        8,
        "feasibility invariants",
        ok,
        format!("min eigenvalue {eig:.2e}, consistency {cons:.2e}, cardinality {card:.2e}, edge identity {edge:.2e}"),
    );
}

fn criterion_9(rep: &mut Report) {
    let mut rng = rng_from_seed(9);
    let trials = 100_000u64;
    let mut worst_z = 0.0f64;
    let mut ok = true;
    for prof in 0..20u64 {
        let n = 3;
        let dim = 4;
        let mut mus = Vec::new();
        let mut ws = Vec::new();
        for _ in 0..n {
            let mu: f64 = rng.random_range(-0.9..0.9);
            let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = g.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            let scale = (1.0 - mu * mu).sqrt() / norm;
            mus.push(mu);
            ws.push(g.iter().map(|x| x * scale).collect::<Vec<f64>>());
        }
        let profile = BiasProfile::from_parts(&mus, &ws).unwrap();
        let mut plus = vec![0u64; n];
        for t in 0..trials {
            for (i, &y) in round_labels(&profile, sub_seed(1000 + prof, t)).iter().enumerate() {
                if y == 1 {
                    plus[i] += 1;
                }
            }
        }
        for i in 0..n {
            let p = 0.5 * (1.0 + mus[i]);
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let z = (plus[i] as f64 / trials as f64 - p).abs() / sigma;
            worst_z = worst_z.max(z);
            ok &= z <= 3.0;
        }
    }
    let mut violations = 0;
    for _ in 0..10_000 {
        let raw: Vec<f64> = (0..4).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let s: f64 = raw.iter().sum();
        let j: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let px = [j[0] + j[1], j[2] + j[3]];
        let py = [j[0] + j[2], j[1] + j[3]];
        let bound = (2.0 * mutual_information(&j, 2, 2) * LN_2).sqrt();
        for a in 0..2 {
            for b in 0..2 {
                if (j[a * 2 + b] - px[a] * py[b]).abs() > bound + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    rep.line(
        9,
        "bias preservation",
        ok && violations == 0,
        format!("worst |z| {worst_z:.2} over 60 vertices x 1e5 trials; {violations} distance-bound violations in 1e4 joints"),
    );
}

fn fixtures() -> Vec<(&'static str, CspInstance, Vec<(Vec<u8>, f64)>)> {
    let c4 = generate(Family::Cycle, 4, 0, ProblemKind::MaxCutBisection).unwrap();
    let k4 = generate(Family::Complete, 4, 0, ProblemKind::MaxCutBisection).unwrap();
    let tc = generate(Family::TwoCliques, 6, 0, ProblemKind::MaxCutBisection).unwrap();
    let mut k4_mix = Vec::new();
    for m in 0u8..16 {
        if m.count_ones() == 2 {
            k4_mix.push(((0..4).map(|i| (m >> i) & 1).collect(), 1.0 / 6.0));
        }
    }
    let tc_mix = vec![
        (vec![0, 1, 0, 1, 0, 1], 0.25),
        (vec![1, 0, 1, 0, 1, 0], 0.25),
        (vec![0, 0, 1, 1, 1, 0], 0.25),
        (vec![1, 1, 0, 0, 0, 1], 0.25),
    ];
    vec![
        ("c4", c4, vec![(vec![0, 1, 0, 1], 0.5), (vec![1, 0, 1, 0], 0.5)]),
        ("k4", k4, k4_mix),
        ("two_cliques_6", tc, tc_mix),
    ]
}

fn criterion_10(rep: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    let start = Instant::now();
    for (name, inst, mix) in fixtures() {
        let sol = exact_mixture_moments(&inst, 2, &mix).unwrap();
        for eps in [0.0, 0.1] {
            let g = build_gadget(&sol, &inst, eps, 3).unwrap();
            let c = completeness(&g, 1e-6);
            let bal = c.balances.iter().map(|b| b.abs()).fold(0.0, f64::max);
            ok &= bal <= 1e-9 && c.min_value >= g.sdp_value - 2.0 * eps - 1e-6;
            parts.push(format!("{name} eps {eps}: min dictator {:.6} vs val {:.6}", c.min_value, g.sdp_value));
        }
        let g = build_gadget(&sol, &inst, 0.1, 3).unwrap();
        let triples = soundness_triples(&g, &inst, &[0.25, 0.5, 1.0], SoundnessMode::BooleanExhaustive, 1e-9).unwrap();
        for t in &triples {
            ok &= t.max_value.is_none_or(|v| v <= t.opt + 1e-12) && t.slack == 0.0;
            println!(
                "     {name} tau {:<4} max value {:<10} opt {:.6} slack {:.3e} admissible {}",
                t.tau,
                t.max_value.map_or("none".into(), |v| format!("{v:.6}")),
                t.opt,
                t.slack,
                t.admissible
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 60.0;
    rep.line(10, "dictatorship completeness", ok, format!("{}; {:.2}s", parts.join("; "), secs));
}

fn criterion_11(rep: &mut Report) {
    let mut arcsine = 0.0f64;
    for k in 0..50 {
        let r = -0.98 + 1.96 * k as f64 / 49.0;
        arcsine = arcsine.max((bvn_cdf(0.0, 0.0, r) - (0.25 + r.asin() / (2.0 * PI))).abs());
    }
    let mut rng = rng_from_seed(11);
    let mut worst_sigma = 0.0f64;
    for k in 0..20 {
        let t1: f64 = rng.random_range(-2.0..2.0);
        let t2: f64 = rng.random_range(-2.0..2.0);
        let r: f64 = rng.random_range(-0.95..0.95);
        let mc = mc_bvn(t1, t2, r, 1_000_000, sub_seed(11, k)).unwrap();
        worst_sigma = worst_sigma.max((mc.estimate - bvn_cdf(t1, t2, r)).abs() / mc.sigma);
    }
    let bisect = |p: f64| {
        let (mut a, mut b) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut inv = 0.0f64;
    for k in 0..=400 {
        // log-spaced lower tail, then linear up to 1 - 1e-6
        let p = if k <= 200 {
            10f64.powf(-12.0 + 11.7 * k as f64 / 200.0)
        } else {
            0.5 + (0.5 - 1e-6) * (k - 200) as f64 / 200.0
        };
        let p = p.min(1.0 - 1e-6);
        inv = inv.max((inv_cdf(p) - bisect(p)).abs());
    }
    rep.line(
        11,
        "numerical kernels",
        arcsine <= 1e-8 && worst_sigma <= 4.0 && inv <= 1e-9,
        format!("arcsine gap {arcsine:.2e}, Monte Carlo worst {worst_sigma:.2} sigma, inverse CDF gap {inv:.2e}"),
    );
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes this
    // battery skips it
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if args.iter().any(|a| !"acceptance".contains(a.as_str())) {
        return;
    }
    let mut rep = Report { failures: 0 };
    criterion_1_2(&mut rep);
    criterion_3(&mut rep);
    criterion_4(&mut rep);
    let outcomes = criterion_5(&mut rep);
    criterion_6(&mut rep);
    criterion_7(&mut rep);
    criterion_8(&mut rep, &outcomes);
    criterion_9(&mut rep);
    criterion_10(&mut rep);
    criterion_11(&mut rep);
    println!("acceptance: {} of 11 criteria failed", rep.failures);
    if rep.failures > 0 {
        std::process::exit(1);
    }
}
