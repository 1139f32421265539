//! CSP instances with a single global cardinality constraint.
//!
//! Variables take values in `[q] = {0, .., q-1}`. For the boolean case the
//! label `0` is identified with the spin `+1` and the label `1` with `-1`;
//! [`spin`] and [`label_of_spin`] convert between the two.
//!
//! Payoff terms carry a weight; the term weights form a probability
//! distribution, so [`CspInstance::evaluate`] returns a value in `[0, 1]`.
//! Vertex weights form a second distribution used by the cardinality
//! constraint and by every `i ~ W` average in the rest of the crate.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Tolerance for "sums to one" checks on weights and proportions.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Serde helpers that write `f64` values as decimal strings.
pub(crate) mod decimal {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn parse(s: &str) -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("bad decimal {s:?}"))?;
        if !v.is_finite() {
            return Err(format!("non-finite decimal {s:?}"));
        }
        Ok(v)
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| parse(s).map_err(D::Error::custom))
                .collect()
        }
    }
}

/// Spin of a boolean label: `0 -> +1`, `1 -> -1`.
#[inline]
pub fn spin(label: u8) -> f64 {
    if label == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn label_of_spin(s: i8) -> u8 {
    if s >= 0 {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "maxcut-bisection")]
    MaxCutBisection,
    #[serde(rename = "mincut-bisection")]
    MinCutBisection,
    /// Max Cut with an `alpha` fraction of the vertex weight on the `+1` side.
    #[serde(rename = "alpha-cut")]
    AlphaCut,
    #[serde(rename = "max2sat")]
    Max2Sat,
}

impl ProblemKind {
    pub fn sense(self) -> Sense {
        match self {
            ProblemKind::MinCutBisection => Sense::Minimize,
            _ => Sense::Maximize,
        }
    }

    pub fn is_cut(self) -> bool {
        !matches!(self, ProblemKind::Max2Sat)
    }

    pub fn is_bisection(self) -> bool {
        matches!(
            self,
            ProblemKind::MaxCutBisection | ProblemKind::MinCutBisection
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::MaxCutBisection => "maxcut-bisection",
            ProblemKind::MinCutBisection => "mincut-bisection",
            ProblemKind::AlphaCut => "alpha-cut",
            ProblemKind::Max2Sat => "max2sat",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxcut-bisection" => Ok(ProblemKind::MaxCutBisection),
            "mincut-bisection" => Ok(ProblemKind::MinCutBisection),
            "alpha-cut" => Ok(ProblemKind::AlphaCut),
            "max2sat" => Ok(ProblemKind::Max2Sat),
            other => Err(Error::arg(format!("unknown problem kind {other:?}"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Target fraction of vertex weight carrying each domain value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityFunction {
    #[serde(with = "decimal::vec")]
    proportions: Vec<f64>,
}

impl CardinalityFunction {
    pub fn new(proportions: Vec<f64>) -> Result<Self> {
        if proportions.is_empty() {
            return Err(Error::invalid("cardinality function over an empty domain"));
        }
        if proportions.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::invalid("cardinality proportions must lie in [0,1]"));
        }
        let total: f64 = proportions.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid(format!(
                "cardinality proportions sum to {total}, expected 1"
            )));
        }
        Ok(Self { proportions })
    }

    pub fn bisection() -> Self {
        Self {
            proportions: vec![0.5, 0.5],
        }
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    /// Target of `E_{i~W}[x_i]` in spin units (boolean domain only).
    pub fn spin_target(&self) -> f64 {
        self.proportions[0] - self.proportions[1]
    }
}

/// A weighted payoff on a small ordered scope of variables.
///
/// `table` is indexed by the local assignment in little-endian base `q`:
/// the value of `scope[0]` is the least significant digit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffTerm {
    pub scope: Vec<usize>,
    #[serde(with = "decimal::vec")]
    pub table: Vec<f64>,
    #[serde(with = "decimal")]
    pub weight: f64,
}

impl PayoffTerm {
    /// Cut indicator on an edge.
    pub fn cut(u: usize, v: usize, weight: f64) -> Self {
        Self {
            scope: vec![u, v],
            table: vec![0.0, 1.0, 1.0, 0.0],
            weight,
        }
    }

    /// 2-Sat clause `(x_u = su) OR (x_v = sv)` on literal spins.
    pub fn clause(u: usize, su: i8, v: usize, sv: i8, weight: f64) -> Self {
        let mut table = vec![1.0; 4];
        // falsified exactly when both literals are false
        let a = label_of_spin(-su);
        let b = label_of_spin(-sv);
        table[(a + 2 * b) as usize] = 0.0;
        Self {
            scope: vec![u, v],
            table,
            weight,
        }
    }

    /// Payoff of the restriction of `assignment` to this scope.
    pub fn payoff(&self, q: usize, assignment: &[u8]) -> f64 {
        let mut idx = 0usize;
        let mut place = 1usize;
        for &v in &self.scope {
            idx += assignment[v] as usize * place;
            place *= q;
        }
        self.table[idx]
    }

    /// For binary scopes: literal spins when this term is a 2-Sat clause
    /// (a table with exactly one zero and ones elsewhere).
    pub fn clause_signs(&self) -> Option<(i8, i8)> {
        if self.scope.len() != 2 || self.table.len() != 4 {
            return None;
        }
        let zeros: Vec<usize> = (0..4).filter(|&i| self.table[i] == 0.0).collect();
        if zeros.len() != 1 || self.table.iter().any(|&t| t != 0.0 && t != 1.0) {
            return None;
        }
        let z = zeros[0];
        let s0 = -(spin((z % 2) as u8) as i8);
        let s1 = -(spin((z / 2) as u8) as i8);
        Some((s0, s1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspInstance {
    pub kind: ProblemKind,
    pub n: usize,
    pub q: usize,
    pub payoffs: Vec<PayoffTerm>,
    #[serde(with = "decimal::vec")]
    pub vertex_weights: Vec<f64>,
    pub cardinality: CardinalityFunction,
}

impl CspInstance {
    /// Validates every structural invariant. Term weights and vertex weights
    /// must already be normalized.
    pub fn new(
        kind: ProblemKind,
        n: usize,
        q: usize,
        payoffs: Vec<PayoffTerm>,
        vertex_weights: Vec<f64>,
        cardinality: CardinalityFunction,
    ) -> Result<Self> {
        let inst = Self {
            kind,
            n,
            q,
            payoffs,
            vertex_weights,
            cardinality,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("instance has no variables"));
        }
        if self.q < 2 {
            return Err(Error::invalid("domain size q must be at least 2"));
        }
        if self.cardinality.proportions().len() != self.q {
            return Err(Error::invalid("cardinality function length differs from q"));
        }
        if self.payoffs.is_empty() {
            return Err(Error::invalid("no payoff terms"));
        }
        let mut total = 0.0;
        for (t, term) in self.payoffs.iter().enumerate() {
            if term.scope.is_empty() {
                return Err(Error::invalid(format!("payoff {t} has an empty scope")));
            }
            if term.scope.iter().any(|&v| v >= self.n) {
                return Err(Error::invalid(format!("payoff {t} references a variable >= n")));
            }
            let mut s = term.scope.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != term.scope.len() {
                return Err(Error::invalid(format!("payoff {t} repeats a variable")));
            }
            if term.table.len() != self.q.pow(term.scope.len() as u32) {
                return Err(Error::invalid(format!("payoff {t} table has the wrong size")));
            }
            if term.table.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::invalid(format!("payoff {t} table leaves [0,1]")));
            }
            if !(term.weight >= 0.0) || !term.weight.is_finite() {
                return Err(Error::invalid(format!("payoff {t} has a negative weight")));
            }
            total += term.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid(format!("payoff weights sum to {total}, expected 1")));
        }
        if self.vertex_weights.len() != self.n {
            return Err(Error::invalid("vertex weight vector length differs from n"));
        }
        if self.vertex_weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("vertex weights must be nonnegative"));
        }
        let vw: f64 = self.vertex_weights.iter().sum();
        if (vw - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid(format!("vertex weights sum to {vw}, expected 1")));
        }
        Ok(())
    }

    /// Graph-style constructor: normalizes edge weights, uses uniform vertex
    /// weights when none are given.
    pub fn from_edges(
        kind: ProblemKind,
        n: usize,
        edges: &[(usize, usize, f64)],
        vertex_weights: Option<Vec<f64>>,
        cardinality: CardinalityFunction,
    ) -> Result<Self> {
        if kind == ProblemKind::Max2Sat {
            return Err(Error::arg("use from_clauses for max2sat instances"));
        }
        let terms = edges
            .iter()
            .map(|&(u, v, w)| {
                if u == v {
                    Err(Error::invalid(format!("self-loop on vertex {u}")))
                } else {
                    Ok(PayoffTerm::cut(u, v, w))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(kind, n, terms, vertex_weights, cardinality)
    }

    /// Clauses are `(u, su, v, sv, weight)` with literal spins `su, sv`.
    pub fn from_clauses(
        n: usize,
        clauses: &[(usize, i8, usize, i8, f64)],
        vertex_weights: Option<Vec<f64>>,
        cardinality: CardinalityFunction,
    ) -> Result<Self> {
        let terms = clauses
            .iter()
            .map(|&(u, su, v, sv, w)| PayoffTerm::clause(u, su, v, sv, w))
            .collect();
        Self::assemble(ProblemKind::Max2Sat, n, terms, vertex_weights, cardinality)
    }

    fn assemble(
        kind: ProblemKind,
        n: usize,
        mut terms: Vec<PayoffTerm>,
        vertex_weights: Option<Vec<f64>>,
        cardinality: CardinalityFunction,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("no payoff terms"));
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid("payoff weights must have a positive finite sum"));
        }
        for t in &mut terms {
            t.weight /= total;
        }
        let uniform = vertex_weights.is_none();
        let vw = match vertex_weights {
            Some(w) => {
                let s: f64 = w.iter().sum();
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::invalid("vertex weights must have a positive finite sum"));
                }
                w.into_iter().map(|x| x / s).collect()
            }
            None => vec![1.0 / n as f64; n],
        };
        if uniform && kind.is_bisection() && n % 2 == 1 {
            return Err(Error::invalid(format!(
                "bisection requires an even number of vertices, got {n}"
            )));
        }
        Self::new(kind, n, 2, terms, vw, cardinality)
    }

    pub fn sense(&self) -> Sense {
        self.kind.sense()
    }

    /// True when all vertex weights are equal.
    pub fn has_uniform_weights(&self) -> bool {
        let w0 = self.vertex_weights[0];
        self.vertex_weights.iter().all(|&w| (w - w0).abs() <= 1e-15)
    }

    pub(crate) fn require_boolean(&self) -> Result<()> {
        if self.q != 2 {
            return Err(Error::arg(format!(
                "operation supports boolean domains only, instance has q = {}",
                self.q
            )));
        }
        Ok(())
    }

    pub(crate) fn require_binary_scopes(&self) -> Result<()> {
        if self.payoffs.iter().any(|t| t.scope.len() > 2) {
            return Err(Error::arg("operation supports payoff scopes of size <= 2 only"));
        }
        Ok(())
    }

    /// `sum_S w_S P_S(x|_S)`.
    pub fn evaluate(&self, assignment: &[u8]) -> Result<f64> {
        if assignment.len() != self.n {
            return Err(Error::arg(format!(
                "assignment has length {}, instance has {} variables",
                assignment.len(),
                self.n
            )));
        }
        if assignment.iter().any(|&a| a as usize >= self.q) {
            return Err(Error::arg("assignment value outside [q]"));
        }
        Ok(self
            .payoffs
            .iter()
            .map(|t| t.weight * t.payoff(self.q, assignment))
            .sum())
    }

    /// Value of a spin assignment (boolean instances).
    pub fn evaluate_spins(&self, spins: &[i8]) -> Result<f64> {
        let labels: Vec<u8> = spins.iter().map(|&s| label_of_spin(s)).collect();
        self.evaluate(&labels)
    }

    /// Weighted frequency of each domain value: `sum_{i: x_i = a} W_i`.
    pub fn balance(&self, assignment: &[u8]) -> Result<Vec<f64>> {
        if assignment.len() != self.n {
            return Err(Error::arg("assignment length differs from n"));
        }
        let mut out = vec![0.0; self.q];
        for (i, &a) in assignment.iter().enumerate() {
            let a = a as usize;
            if a >= self.q {
                return Err(Error::arg("assignment value outside [q]"));
            }
            out[a] += self.vertex_weights[i];
        }
        Ok(out)
    }

    /// `E_{i~W}[y_i]` for a spin assignment.
    pub fn spin_balance(&self, spins: &[i8]) -> f64 {
        spins
            .iter()
            .zip(&self.vertex_weights)
            .map(|(&s, &w)| s as f64 * w)
            .sum()
    }

    /// Weighted degree: total weight of the payoff terms touching each variable.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for t in &self.payoffs {
            for &v in &t.scope {
                d[v] += t.weight;
            }
        }
        d
    }

    /// Edge list view of a binary-scope boolean instance.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.payoffs
            .iter()
            .filter(|t| t.scope.len() == 2)
            .map(|t| (t.scope[0], t.scope[1], t.weight))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    /// Reads a `.json` instance or an edge-list document, by extension.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            Self::from_json(&text)
        } else {
            load_edge_list(&text)
        }
    }
}

/// Parses the edge-list text format.
///
/// ```text
/// # comment
/// kind alpha-cut 0.3        (optional; default maxcut-bisection)
/// n 6                        (optional; default max id + 1)
/// 0 1
/// 1 2 2.5                    u v [weight]
/// ~0 3                       max2sat only: `~` negates a literal
/// vertex-weights             (optional section)
/// 0 0.4
/// ```
pub fn load_edge_list(text: &str) -> Result<CspInstance> {
    let mut kind = ProblemKind::MaxCutBisection;
    let mut alpha: Option<f64> = None;
    let mut c0: Option<f64> = None;
    let mut declared_n: Option<usize> = None;
    let mut in_weights = false;
    let mut weights: Vec<(usize, f64)> = Vec::new();
    let mut terms: Vec<(usize, i8, usize, i8, f64)> = Vec::new();
    let mut seen_data = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "kind" => {
                if seen_data {
                    return Err(Error::parse(line_no, "kind header must precede edges"));
                }
                let k: ProblemKind = toks
                    .get(1)
                    .ok_or_else(|| Error::parse(line_no, "kind header without a value"))?
                    .parse()
                    .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                kind = k;
                match (k, toks.get(2)) {
                    (ProblemKind::AlphaCut, Some(a)) => {
                        alpha = Some(parse_f64(a, line_no)?);
                    }
                    (ProblemKind::AlphaCut, None) => {
                        return Err(Error::parse(line_no, "alpha-cut requires a fraction"));
                    }
                    (ProblemKind::Max2Sat, Some(c)) => c0 = Some(parse_f64(c, line_no)?),
                    (_, Some(_)) => {
                        return Err(Error::parse(line_no, "unexpected token after kind"));
                    }
                    (_, None) => {}
                }
                if toks.len() > 3 {
                    return Err(Error::parse(line_no, "trailing tokens in kind header"));
                }
            }
            "n" => {
                let n = toks
                    .get(1)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(line_no, "n header requires a count"))?;
                declared_n = Some(n);
            }
            "vertex-weights" => {
                in_weights = true;
            }
            _ if in_weights => {
                if toks.len() != 2 {
                    return Err(Error::parse(line_no, "expected `vertex weight`"));
                }
                let v = parse_usize(toks[0], line_no)?;
                let w = parse_f64(toks[1], line_no)?;
                if w < 0.0 {
                    return Err(Error::parse(line_no, "negative vertex weight"));
                }
                weights.push((v, w));
            }
            _ => {
                seen_data = true;
                if toks.len() < 2 || toks.len() > 3 {
                    return Err(Error::parse(line_no, "expected `u v [weight]`"));
                }
                let (u, su) = parse_literal(toks[0], line_no)?;
                let (v, sv) = parse_literal(toks[1], line_no)?;
                let w = match toks.get(2) {
                    Some(t) => parse_f64(t, line_no)?,
                    None => 1.0,
                };
                if w < 0.0 {
                    return Err(Error::parse(line_no, "negative edge weight"));
                }
                if kind.is_cut() {
                    if su < 0 || sv < 0 {
                        return Err(Error::parse(line_no, "negated literal in a cut instance"));
                    }
                    if u == v {
                        return Err(Error::parse(line_no, format!("self-loop on vertex {u}")));
                    }
                } else if u == v {
                    return Err(Error::parse(line_no, "clause repeats a variable"));
                }
                terms.push((u, su, v, sv, w));
            }
        }
    }

    if terms.is_empty() {
        return Err(Error::invalid("no payoff terms"));
    }
    let max_id = terms
        .iter()
        .flat_map(|t| [t.0, t.2])
        .chain(weights.iter().map(|w| w.0))
        .max()
        .unwrap_or(0);
    let n = declared_n.unwrap_or(max_id + 1);
    if max_id >= n {
        return Err(Error::invalid(format!("vertex id {max_id} exceeds declared n = {n}")));
    }
    let vertex_weights = if weights.is_empty() {
        None
    } else {
        let mut w = vec![0.0; n];
        for (v, x) in weights {
            w[v] += x;
        }
        Some(w)
    };
    let cardinality = match kind {
        ProblemKind::AlphaCut => {
            let a = alpha.unwrap_or(0.5);
            CardinalityFunction::new(vec![a, 1.0 - a])?
        }
        ProblemKind::Max2Sat => {
            let c = c0.unwrap_or(0.5);
            CardinalityFunction::new(vec![c, 1.0 - c])?
        }
        _ => CardinalityFunction::bisection(),
    };
    if kind == ProblemKind::Max2Sat {
        CspInstance::from_clauses(n, &terms, vertex_weights, cardinality)
    } else {
        let edges: Vec<_> = terms.iter().map(|t| (t.0, t.2, t.4)).collect();
        CspInstance::from_edges(kind, n, &edges, vertex_weights, cardinality)
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    decimal::parse(tok).map_err(|m| Error::parse(line, m))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("bad vertex id {tok:?}")))
}

fn parse_literal(tok: &str, line: usize) -> Result<(usize, i8)> {
    match tok.strip_prefix('~') {
        Some(rest) => Ok((parse_usize(rest, line)?, -1)),
        None => Ok((parse_usize(tok, line)?, 1)),
    }
}

/// Writes an instance in the edge-list format. Only binary cut or clause
/// terms can be expressed.
pub fn write_edge_list(inst: &CspInstance) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let c = inst.cardinality.proportions();
    match inst.kind {
        ProblemKind::AlphaCut => writeln!(out, "kind alpha-cut {}", c[0]).unwrap(),
        ProblemKind::Max2Sat => writeln!(out, "kind max2sat {}", c[0]).unwrap(),
        k => writeln!(out, "kind {k}").unwrap(),
    }
    writeln!(out, "n {}", inst.n).unwrap();
    for t in &inst.payoffs {
        if inst.kind == ProblemKind::Max2Sat {
            let (su, sv) = t
                .clause_signs()
                .ok_or_else(|| Error::arg("term is not a 2-Sat clause"))?;
            let lit = |v: usize, s: i8| if s < 0 { format!("~{v}") } else { v.to_string() };
            writeln!(out, "{} {} {}", lit(t.scope[0], su), lit(t.scope[1], sv), t.weight).unwrap();
        } else {
            if t.scope.len() != 2 || t.table != [0.0, 1.0, 1.0, 0.0] {
                return Err(Error::arg("term is not a cut edge"));
            }
            writeln!(out, "{} {} {}", t.scope[0], t.scope[1], t.weight).unwrap();
        }
    }
    if !inst.has_uniform_weights() {
        writeln!(out, "vertex-weights").unwrap();
        for (v, w) in inst.vertex_weights.iter().enumerate() {
            writeln!(out, "{v} {w}").unwrap();
        }
    }
    Ok(out)
}

/// Instance families for [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cycle,
    Complete,
    Gnp { p: f64 },
    /// Two disjoint cliques on `n/2` vertices each.
    TwoCliques,
    /// A hidden balanced bipartition: cross edges with probability `p_cross`,
    /// then `floor(eps * cross / (1 - eps))` random edges inside the sides, so
    /// the hidden bisection has value at least `1 - eps`.
    Planted { eps: f64, p_cross: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Complete => "complete",
            Family::Gnp { .. } => "gnp",
            Family::TwoCliques => "two_cliques",
            Family::Planted { .. } => "planted",
        }
    }
}

/// Deterministic instance generator. Bisection kinds require even `n`.
pub fn generate(family: Family, n: usize, seed: u64, kind: ProblemKind) -> Result<CspInstance> {
    if n < 2 {
        return Err(Error::arg("generators require n >= 2"));
    }
    if kind.is_bisection() && n % 2 == 1 {
        return Err(Error::invalid(format!(
            "bisection requires an even number of vertices, got {n}"
        )));
    }
    if kind == ProblemKind::Max2Sat {
        return Err(Error::arg("graph families generate cut instances only"));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    match family {
        Family::Cycle => {
            if n == 2 {
                edges.push((0, 1, 1.0));
            } else {
                edges.extend((0..n).map(|i| (i, (i + 1) % n, 1.0)));
            }
        }
        Family::Complete => {
            for i in 0..n {
                for j in i + 1..n {
                    edges.push((i, j, 1.0));
                }
            }
        }
        Family::Gnp { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::arg("gnp edge probability must lie in (0,1]"));
            }
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((i, j, 1.0));
                    }
                }
            }
        }
        Family::TwoCliques => {
            if n < 4 || n % 2 == 1 {
                return Err(Error::arg("two_cliques requires even n >= 4"));
            }
            let h = n / 2;
            for base in [0, h] {
                for i in 0..h {
                    for j in i + 1..h {
                        edges.push((base + i, base + j, 1.0));
                    }
                }
            }
        }
        Family::Planted { eps, p_cross } => {
            if !(0.0..0.5).contains(&eps) {
                return Err(Error::arg("planted eps must lie in [0, 1/2)"));
            }
            if !(p_cross > 0.0 && p_cross <= 1.0) {
                return Err(Error::arg("planted p_cross must lie in (0,1]"));
            }
            if n % 2 == 1 {
                return Err(Error::arg("planted instances require even n"));
            }
            // hidden sides: a random half of the vertices
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let mut side = vec![false; n];
            for &v in &perm[..n / 2] {
                side[v] = true;
            }
            let mut inside = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if side[i] != side[j] {
                        if rng.random::<f64>() < p_cross {
                            edges.push((i, j, 1.0));
                        }
                    } else {
                        inside.push((i, j));
                    }
                }
            }
            let cross = edges.len() as f64;
            let k = ((eps * cross / (1.0 - eps)) + 1e-9).floor() as usize;
            let k = k.min(inside.len());
            for t in 0..k {
                let j = rng.random_range(t..inside.len());
                inside.swap(t, j);
                edges.push((inside[t].0, inside[t].1, 1.0));
            }
        }
    }
    CspInstance::from_edges(kind, n, &edges, None, CardinalityFunction::bisection())
}
