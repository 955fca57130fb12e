//! Instance files, solution lines, and the VC to IS dualization.
//!
//! Grammar, one record per line:
//!
//! ```text
//! p <vc|is|ais> <n> <m>
//! e <u> <v>            (m times, 1-indexed)
//! x <v1> ... <vr>      (optional modulator)
//! h <v1> ... <vs>      (optional, repeatable; ais only)
//! c <int>              (optional)
//! k <int> | t <int>    (exactly one)
//! ```
//!
//! Parsed graphs carry labels `1..=n`, so solution lines print file ids.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, Label, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Vc,
    Is,
    Ais,
}

impl Problem {
    pub fn keyword(self) -> &'static str {
        match self {
            Problem::Vc => "vc",
            Problem::Is => "is",
            Problem::Ais => "ais",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("budget k is required for vc and forbidden otherwise")]
    ParameterMismatch,
    #[error("modulator vertex {0} out of range")]
    ModulatorOutOfRange(usize),
    #[error("hyperedge outside modulator")]
    HyperedgeOutsideModulator,
    #[error("hyperedges are only allowed for ais instances")]
    HyperedgesNotAllowed,
    #[error("dualize needs a vc instance")]
    NotVc,
    #[error("budget k = {k} exceeds vertex count {n}")]
    BudgetTooLarge { k: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph plus the enumeration parameter and optional structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumInstance {
    pub graph: Graph,
    pub problem: Problem,
    pub budget_k: Option<usize>,
    pub target_t: Option<usize>,
    pub modulator: Option<VertexSet>,
    pub hyperedges: Vec<VertexSet>,
    pub c: Option<usize>,
}

impl EnumInstance {
    pub fn vc(graph: Graph, k: usize) -> Self {
        EnumInstance {
            graph,
            problem: Problem::Vc,
            budget_k: Some(k),
            target_t: None,
            modulator: None,
            hyperedges: Vec::new(),
            c: None,
        }
    }

    pub fn is(graph: Graph, t: usize) -> Self {
        EnumInstance {
            graph,
            problem: Problem::Is,
            budget_k: None,
            target_t: Some(t),
            modulator: None,
            hyperedges: Vec::new(),
            c: None,
        }
    }

    pub fn ais(graph: Graph, modulator: VertexSet, hyperedges: Vec<VertexSet>, t: usize) -> Self {
        let mut inst = EnumInstance::is(graph, t).with_modulator(modulator);
        inst.problem = Problem::Ais;
        inst.hyperedges = hyperedges;
        inst.normalize();
        inst
    }

    pub fn with_modulator(mut self, x: VertexSet) -> Self {
        self.modulator = Some(x);
        self
    }

    pub fn with_c(mut self, c: usize) -> Self {
        self.c = Some(c);
        self
    }

    /// `t` for IS/AIS, `k` for VC.
    pub fn parameter(&self) -> usize {
        self.target_t.or(self.budget_k).unwrap_or(0)
    }

    pub fn t(&self) -> usize {
        self.target_t.expect("instance has a target t")
    }

    pub fn k(&self) -> usize {
        self.budget_k.expect("instance has a budget k")
    }

    pub fn modulator(&self) -> VertexSet {
        self.modulator.clone().unwrap_or_default()
    }

    /// Sorts the hyperedge list and removes duplicates.
    pub fn normalize(&mut self) {
        self.hyperedges.sort();
        self.hyperedges.dedup();
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        match (self.problem, self.budget_k, self.target_t) {
            (Problem::Vc, Some(_), None) => {}
            (Problem::Is | Problem::Ais, None, Some(_)) => {}
            _ => return Err(InstanceError::ParameterMismatch),
        }
        let x = self.modulator();
        if let Some(&v) = x.iter().find(|&&v| v >= self.graph.n()) {
            return Err(InstanceError::ModulatorOutOfRange(v));
        }
        if !self.hyperedges.is_empty() && self.problem != Problem::Ais {
            return Err(InstanceError::HyperedgesNotAllowed);
        }
        if self.hyperedges.iter().any(|h| !h.is_subset(&x)) {
            return Err(InstanceError::HyperedgeOutsideModulator);
        }
        self.graph.audit()?;
        Ok(())
    }

    /// Membership in `Sol` for a set of internal ids.
    pub fn is_solution(&self, s: &[usize]) -> bool {
        match self.problem {
            Problem::Vc => {
                let set: VertexSet = s.iter().copied().collect();
                set.len() <= self.k()
                    && self
                        .graph
                        .edges()
                        .iter()
                        .all(|&(u, v)| set.contains(u) || set.contains(v))
            }
            Problem::Is => s.len() >= self.t() && self.graph.is_independent(s),
            Problem::Ais => {
                let set: VertexSet = s.iter().copied().collect();
                set.len() >= self.t()
                    && self.graph.is_independent(&set)
                    && !self.hyperedges.iter().any(|h| h.is_subset(&set))
            }
        }
    }

    /// Labels of the modulator.
    pub fn modulator_labels(&self) -> Vec<Label> {
        self.graph.labels_of(&self.modulator())
    }
}

/// One solution in external labels, sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub vertices: Vec<Label>,
}

impl SolutionRecord {
    pub fn new(mut vertices: Vec<Label>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        SolutionRecord { vertices }
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let line = line.trim();
        if line == "-" || line.is_empty() {
            return Ok(SolutionRecord::default());
        }
        line.split_whitespace()
            .map(|tok| tok.parse::<Label>().map_err(|e| format!("bad label {tok:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(SolutionRecord::new)
    }
}

impl fmt::Display for SolutionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vertices.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("hyperedge outside modulator")]
    HyperedgeOutsideModulator,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("missing header line")]
    MissingHeader,
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("exactly one of k or t is required")]
    Parameter,
    #[error("self-loop on vertex {0}")]
    Loop(usize),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses an instance file.
pub fn parse(text: &str) -> Result<EnumInstance, ParseError> {
    let mut header: Option<(Problem, usize, usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen_edges = std::collections::HashSet::new();
    let mut modulator: Option<(VertexSet, usize)> = None;
    let mut hyper: Vec<(VertexSet, usize)> = Vec::new();
    let mut c = None;
    let mut k = None;
    let mut t = None;
    let mut param_lines = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        last_line = ln;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let tag = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        let nums = || -> Result<Vec<usize>, ParseError> {
            rest.iter()
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| err(ln, ParseErrorKind::Malformed(raw.to_string())))
                })
                .collect()
        };
        if tag != "p" && header.is_none() {
            return Err(err(ln, ParseErrorKind::MissingHeader));
        }
        let n = header.map(|h| h.1).unwrap_or(0);
        let vertex = |v: usize| -> Result<usize, ParseError> {
            if v == 0 || v > n {
                Err(err(ln, ParseErrorKind::VertexOutOfRange(v)))
            } else {
                Ok(v - 1)
            }
        };
        match tag {
            "p" => {
                if header.is_some() || rest.len() != 3 {
                    return Err(err(ln, ParseErrorKind::Malformed(raw.to_string())));
                }
                let problem = match rest[0] {
                    "vc" => Problem::Vc,
                    "is" => Problem::Is,
                    "ais" => Problem::Ais,
                    _ => return Err(err(ln, ParseErrorKind::Malformed(raw.to_string()))),
                };
                let n = rest[1]
                    .parse()
                    .map_err(|_| err(ln, ParseErrorKind::Malformed(raw.to_string())))?;
                let m = rest[2]
                    .parse()
                    .map_err(|_| err(ln, ParseErrorKind::Malformed(raw.to_string())))?;
                header = Some((problem, n, m, ln));
            }
            "e" => {
                let v = nums()?;
                if v.len() != 2 {
                    return Err(err(ln, ParseErrorKind::Malformed(raw.to_string())));
                }
                let (a, b) = (vertex(v[0])?, vertex(v[1])?);
                if a == b {
                    return Err(err(ln, ParseErrorKind::Loop(v[0])));
                }
                if !seen_edges.insert((a.min(b), a.max(b))) {
                    return Err(err(ln, ParseErrorKind::DuplicateEdge(v[0], v[1])));
                }
                edges.push((a, b));
            }
            "x" => {
                if modulator.is_some() {
                    return Err(err(ln, ParseErrorKind::Malformed(raw.to_string())));
                }
                let set = nums()?
                    .into_iter()
                    .map(vertex)
                    .collect::<Result<VertexSet, _>>()?;
                modulator = Some((set, ln));
            }
            "h" => {
                let set = nums()?
                    .into_iter()
                    .map(vertex)
                    .collect::<Result<VertexSet, _>>()?;
                hyper.push((set, ln));
            }
            "c" | "k" | "t" => {
                let v = nums()?;
                if v.len() != 1 {
                    return Err(err(ln, ParseErrorKind::Malformed(raw.to_string())));
                }
                match tag {
                    "c" => c = Some(v[0]),
                    "k" => {
                        k = Some(v[0]);
                        param_lines += 1;
                    }
                    _ => {
                        t = Some(v[0]);
                        param_lines += 1;
                    }
                }
            }
            _ => return Err(err(ln, ParseErrorKind::Malformed(raw.to_string()))),
        }
    }

    let (problem, n, m, header_line) = header.ok_or(err(1, ParseErrorKind::MissingHeader))?;
    if edges.len() != m {
        return Err(err(
            header_line,
            ParseErrorKind::EdgeCount {
                expected: m,
                found: edges.len(),
            },
        ));
    }
    let param_ok = param_lines == 1
        && match problem {
            Problem::Vc => k.is_some(),
            _ => t.is_some(),
        };
    if !param_ok {
        return Err(err(last_line.max(1), ParseErrorKind::Parameter));
    }
    let x = modulator.as_ref().map(|(s, _)| s.clone()).unwrap_or_default();
    for (h, ln) in &hyper {
        if !h.is_subset(&x) || problem != Problem::Ais {
            return Err(err(*ln, ParseErrorKind::HyperedgeOutsideModulator));
        }
    }
    let labels: Vec<Label> = (1..=n as Label).collect();
    let graph = Graph::from_labeled_edges(labels, &edges)
        .map_err(|e| err(header_line, ParseErrorKind::Malformed(e.to_string())))?;
    let mut inst = EnumInstance {
        graph,
        problem,
        budget_k: k,
        target_t: t,
        modulator: modulator.map(|(s, _)| s),
        hyperedges: hyper.into_iter().map(|(h, _)| h).collect(),
        c,
    };
    inst.normalize();
    Ok(inst)
}

/// Canonical text: header, sorted edges, modulator, sorted hyperedges, `c`, parameter.
/// Vertices are written as `id + 1`.
pub fn serialize(inst: &EnumInstance) -> String {
    use std::fmt::Write;
    let g = &inst.graph;
    let mut out = String::new();
    let _ = writeln!(out, "p {} {} {}", inst.problem, g.n(), g.m());
    for &(u, v) in g.edges().iter() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    let join = |s: &VertexSet| {
        s.iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    if let Some(x) = &inst.modulator {
        if x.is_empty() {
            out.push_str("x\n");
        } else {
            let _ = writeln!(out, "x {}", join(x));
        }
    }
    let mut hs = inst.hyperedges.clone();
    hs.sort();
    hs.dedup();
    for h in &hs {
        let _ = writeln!(out, "h {}", join(h));
    }
    if let Some(c) = inst.c {
        let _ = writeln!(out, "c {c}");
    }
    match (inst.budget_k, inst.target_t) {
        (Some(k), _) => {
            let _ = writeln!(out, "k {k}");
        }
        (None, Some(t)) => {
            let _ = writeln!(out, "t {t}");
        }
        _ => {}
    }
    out
}

/// `(H, k)` to `(H, n - k)`: `S` is a cover of size at most `k` iff `V \ S` is
/// independent of size at least `n - k`.
pub fn dualize(inst: &EnumInstance) -> Result<EnumInstance, InstanceError> {
    if inst.problem != Problem::Vc {
        return Err(InstanceError::NotVc);
    }
    let n = inst.graph.n();
    let k = inst.k();
    if k > n {
        return Err(InstanceError::BudgetTooLarge { k, n });
    }
    Ok(EnumInstance {
        graph: inst.graph.clone(),
        problem: Problem::Is,
        budget_k: None,
        target_t: Some(n - k),
        modulator: inst.modulator.clone(),
        hyperedges: Vec::new(),
        c: inst.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_p3() {
        let inst = parse("p is 3 2\ne 1 2\ne 2 3\nt 2\n").unwrap();
        assert_eq!(inst.problem, Problem::Is);
        assert_eq!(inst.graph.n(), 3);
        assert_eq!(inst.graph.m(), 2);
        assert_eq!(inst.target_t, Some(2));
        assert_eq!(inst.graph.labels(), &[1, 2, 3]);
    }

    #[test]
    fn hyperedge_outside_modulator_is_rejected() {
        let e = parse("p ais 5 0\nx 1 2\nh 1 5\nt 1\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.kind, ParseErrorKind::HyperedgeOutsideModulator);
        assert_eq!(e.to_string(), "line 3: hyperedge outside modulator");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("p is 3 2\ne 1 2\ne 2 1\nt 1\n").unwrap_err();
        assert_eq!((e.line, e.kind), (3, ParseErrorKind::DuplicateEdge(2, 1)));
        let e = parse("p is 3 1\ne 1 4\nt 1\n").unwrap_err();
        assert_eq!((e.line, e.kind), (2, ParseErrorKind::VertexOutOfRange(4)));
        let e = parse("p is 3 0\nq\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse("p vc 2 0\nt 1\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Parameter);
    }

    #[test]
    fn serialize_is_canonical() {
        let text = "p ais 4 2\ne 3 4\ne 1 3\nx 2 1\nh 2 1\nc 1\nt 2\n";
        let inst = parse(text).unwrap();
        let canon = serialize(&inst);
        assert_eq!(canon, "p ais 4 2\ne 1 3\ne 3 4\nx 1 2\nh 1 2\nc 1\nt 2\n");
        assert_eq!(serialize(&parse(&canon).unwrap()), canon);
    }

    #[test]
    fn dualize_examples() {
        let p3 = parse("p vc 3 2\ne 1 2\ne 2 3\nk 1\n").unwrap();
        assert_eq!(dualize(&p3).unwrap().target_t, Some(2));
        let edgeless = parse("p vc 4 0\nk 0\n").unwrap();
        assert_eq!(dualize(&edgeless).unwrap().target_t, Some(4));
        let big = parse("p vc 2 0\nk 3\n").unwrap();
        assert_eq!(
            dualize(&big).unwrap_err(),
            InstanceError::BudgetTooLarge { k: 3, n: 2 }
        );
        let is = parse("p is 2 0\nt 1\n").unwrap();
        assert_eq!(dualize(&is).unwrap_err(), InstanceError::NotVc);
    }

    #[test]
    fn solution_records() {
        assert_eq!(SolutionRecord::default().to_string(), "-");
        assert_eq!(SolutionRecord::new(vec![3, 1]).to_string(), "1 3");
        assert_eq!(SolutionRecord::parse("-").unwrap(), SolutionRecord::default());
        assert_eq!(SolutionRecord::parse(" 4 2 ").unwrap().vertices, vec![2, 4]);
    }
}
