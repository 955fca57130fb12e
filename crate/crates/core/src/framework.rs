//! The PD-kernel abstraction: cores, rule logs, composed ePPT pipelines,
//! the generic runner and the partition verifier.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::DecompError;
use crate::flashlight::{
    enum_is_lex, BoxSource, FlatMapSource, SolutionSource, SolutionStream, Steps, StreamError,
    VertexOrder,
};
use crate::graph::{Graph, GraphError, Label, VertexSet};
use crate::io::{EnumInstance, InstanceError, Problem};
use crate::matching::CrownError;
use crate::mis::{AlphaOracle, MisError, MisOracle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Crown(#[from] CrownError),
    #[error(transparent)]
    Mis(#[from] MisError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invariant breached: {0}")]
    Invariant(String),
}

impl From<KernelError> for StreamError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Stream(s) => s,
            KernelError::Mis(m) => StreamError::Oracle(m),
            other => StreamError::Contract(other.to_string()),
        }
    }
}

/// Core `(Λ_H, λ)`: compressed vertices and their original counterparts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoreMap {
    pub core_in_h: VertexSet,
    /// `lambda[i]` is the original id of `core_in_h[i]`.
    pub lambda: Vec<usize>,
    pub core_in_g: VertexSet,
}

impl CoreMap {
    pub fn new(core_in_h: VertexSet, lambda: Vec<usize>) -> Result<Self, KernelError> {
        if core_in_h.len() != lambda.len() {
            return Err(KernelError::Invariant("core and lambda differ in length".into()));
        }
        let core_in_g: VertexSet = lambda.iter().copied().collect();
        if core_in_g.len() != lambda.len() {
            return Err(KernelError::Invariant("lambda is not injective".into()));
        }
        Ok(CoreMap {
            core_in_h,
            lambda,
            core_in_g,
        })
    }

    /// λ matches compressed vertices to original ones with the same label.
    pub fn by_labels(orig: &Graph, compressed: &Graph, core_in_h: VertexSet) -> Result<Self, KernelError> {
        let index = orig.label_index();
        let lambda = core_in_h
            .iter()
            .map(|&v| {
                index.get(&compressed.label(v)).copied().ok_or_else(|| {
                    KernelError::Invariant(format!("core label {} not in original", compressed.label(v)))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        CoreMap::new(core_in_h, lambda)
    }

    /// `λ(S' ∩ Λ_H)`.
    pub fn trace(&self, s_prime: &[usize]) -> VertexSet {
        let s: VertexSet = s_prime.iter().copied().collect();
        self.core_in_h
            .iter()
            .zip(&self.lambda)
            .filter(|(h, _)| s.contains(**h))
            .map(|(_, &g)| g)
            .collect()
    }

    /// `S ∩ Λ_G` for an original solution.
    pub fn original_trace(&self, s: &[usize]) -> VertexSet {
        s.iter().copied().filter(|&v| self.core_in_g.contains(v)).collect()
    }
}

/// One primitive edit, in external labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    DeleteVertices { labels: Vec<Label> },
    DeleteEdges { edges: Vec<(Label, Label)> },
    AddEdges { edges: Vec<(Label, Label)> },
    Identify { keep: Label, merge: Label },
    AddHyperedges { sets: Vec<Vec<Label>> },
    SetModulator { labels: Vec<Label> },
    /// Keep only the listed vertices.
    Restrict { labels: Vec<Label> },
    SetProblem { problem: Problem },
    DeltaT { delta: i64 },
    /// Replace the whole instance, used for the gadget construction.
    Replace { text: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub rule: String,
    pub edits: Vec<Edit>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl RuleEntry {
    pub fn new(rule: impl Into<String>, edits: Vec<Edit>) -> Self {
        RuleEntry {
            rule: rule.into(),
            edits,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogHeader {
    pub kernel: String,
    pub c: Option<usize>,
    pub degenerate: bool,
    /// Label of each vertex of the compressed instance, by id.
    pub compressed_labels: Vec<Label>,
}

/// Ordered provenance of rule applications.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleLog {
    pub header: LogHeader,
    pub entries: Vec<RuleEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LogLine {
    Header(LogHeader),
    Rule(RuleEntry),
}

impl RuleLog {
    pub fn push(&mut self, entry: RuleEntry) {
        self.entries.push(entry);
    }

    pub fn count(&self, rule: &str) -> usize {
        self.entries.iter().filter(|e| e.rule == rule).count()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&LogLine::Header(self.header.clone())).expect("json");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(&LogLine::Rule(e.clone())).expect("json"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, String> {
        let mut log = RuleLog::default();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            match serde_json::from_str::<LogLine>(line).map_err(|e| format!("line {}: {e}", i + 1))? {
                LogLine::Header(h) => {
                    log.header = h;
                    saw_header = true;
                }
                LogLine::Rule(r) => log.entries.push(r),
            }
        }
        if !saw_header {
            return Err("missing header line".into());
        }
        Ok(log)
    }

    /// Applies every edit to `orig`; the result should equal the compressed instance.
    pub fn replay(&self, orig: &EnumInstance) -> Result<EnumInstance, KernelError> {
        let mut inst = orig.clone();
        for entry in &self.entries {
            for edit in &entry.edits {
                inst = apply_edit(&inst, edit)?;
            }
        }
        Ok(inst)
    }
}

fn ids(g: &Graph, labels: &[Label]) -> Result<Vec<usize>, KernelError> {
    let index = g.label_index();
    labels
        .iter()
        .map(|l| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| KernelError::Invariant(format!("label {l} not present")))
        })
        .collect()
}

fn pairs(g: &Graph, edges: &[(Label, Label)]) -> Result<Vec<(usize, usize)>, KernelError> {
    edges
        .iter()
        .map(|&(a, b)| Ok((ids(g, &[a])?[0], ids(g, &[b])?[0])))
        .collect()
}

/// Label-level sets of an instance, used to rebuild it after vertex edits.
fn relabel_sets(inst: &EnumInstance, new: &Graph) -> Result<(Option<VertexSet>, Vec<VertexSet>), KernelError> {
    let old = &inst.graph;
    let index = new.label_index();
    let map = |s: &VertexSet| -> VertexSet {
        s.iter()
            .filter_map(|&v| index.get(&old.label(v)).copied())
            .collect()
    };
    let x = inst.modulator.as_ref().map(map);
    let hs = inst
        .hyperedges
        .iter()
        .filter(|h| h.iter().all(|&v| index.contains_key(&old.label(v))))
        .map(map)
        .collect();
    Ok((x, hs))
}

fn with_graph(inst: &EnumInstance, g: Graph) -> Result<EnumInstance, KernelError> {
    let (x, hs) = relabel_sets(inst, &g)?;
    let mut out = inst.clone();
    out.graph = g;
    out.modulator = x;
    out.hyperedges = hs;
    out.normalize();
    Ok(out)
}

pub fn apply_edit(inst: &EnumInstance, edit: &Edit) -> Result<EnumInstance, KernelError> {
    let g = &inst.graph;
    Ok(match edit {
        Edit::DeleteVertices { labels } => with_graph(inst, g.delete_vertices(&ids(g, labels)?)?)?,
        Edit::Restrict { labels } => with_graph(inst, g.induced_subgraph(&ids(g, labels)?)?.0)?,
        Edit::DeleteEdges { edges } => with_graph(inst, g.delete_edges(&pairs(g, edges)?)?)?,
        Edit::AddEdges { edges } => with_graph(inst, g.add_edges(&pairs(g, edges)?)?)?,
        Edit::Identify { keep, merge } => {
            let (k, m) = (ids(g, &[*keep])?[0], ids(g, &[*merge])?[0]);
            with_graph(inst, g.identify(k, m)?)?
        }
        Edit::AddHyperedges { sets } => {
            let mut out = inst.clone();
            for s in sets {
                out.hyperedges.push(ids(g, s)?.into_iter().collect());
            }
            out.normalize();
            out
        }
        Edit::SetModulator { labels } => {
            let mut out = inst.clone();
            out.modulator = Some(ids(g, labels)?.into_iter().collect());
            out
        }
        Edit::SetProblem { problem } => {
            let mut out = inst.clone();
            out.problem = *problem;
            out
        }
        Edit::DeltaT { delta } => {
            let mut out = inst.clone();
            let t = out.target_t.unwrap_or(0) as i64 + delta;
            out.target_t = Some(t.max(0) as usize);
            out
        }
        Edit::Replace { text } => {
            let parsed = crate::io::parse(text)
                .map_err(|e| KernelError::Invariant(format!("replace edit: {e}")))?;
            parsed
        }
    })
}

/// Output of a compression: the compressed instance and what lifting needs.
#[derive(Clone, Debug)]
pub struct Compression<S> {
    pub original: EnumInstance,
    pub compressed: EnumInstance,
    pub core: CoreMap,
    pub log: RuleLog,
    pub degenerate: bool,
    pub state: S,
}

/// A PD kernel. Solutions are vertex sets in internal ids of the respective instance.
pub trait PdKernel: Send + Sync {
    type State: Send + Sync + 'static;

    fn name(&self) -> &'static str;

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<Self::State>, KernelError>;

    /// Trace of a compressed solution in original ids; `None` if a backward
    /// transformation rejects it.
    fn trace_of(&self, comp: &Compression<Self::State>, s: &VertexSet) -> Result<Option<VertexSet>, KernelError> {
        Ok(Some(comp.core.trace(s)))
    }

    fn is_good_trace(&self, comp: &Compression<Self::State>, y: &VertexSet) -> Result<bool, KernelError>;

    /// Accepts exactly one compressed solution per good trace.
    fn canonical_check(&self, comp: &Compression<Self::State>, s: &VertexSet) -> Result<bool, KernelError>;

    /// Every original solution whose trace is `y`.
    fn lift(&self, comp: &Arc<Compression<Self::State>>, y: &VertexSet) -> Result<SolutionStream, KernelError>;

    fn compressed_solutions(&self, comp: &Compression<Self::State>) -> Result<SolutionStream, KernelError> {
        enumerate_solutions(&comp.compressed, MisOracle::global())
    }
}

struct FilterSource<F> {
    inner: BoxSource,
    keep: F,
}

impl<F: FnMut(&VertexSet) -> bool + Send> SolutionSource for FilterSource<F> {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError> {
        while let Some(s) = self.inner.next_solution(steps)? {
            if (self.keep)(&s) {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }
}

/// All solutions of an instance: flashlight for IS, complemented dual flashlight
/// for VC, hyperedge-filtered flashlight for AIS.
pub fn enumerate_solutions(
    inst: &EnumInstance,
    oracle: Arc<dyn AlphaOracle>,
) -> Result<SolutionStream, KernelError> {
    let g = &inst.graph;
    let sigma = VertexOrder::by_label(g);
    match inst.problem {
        Problem::Is => Ok(enum_is_lex(g, inst.t(), &sigma, &[], &[], oracle)?),
        Problem::Vc => {
            let n = g.n();
            let all = g.vertices();
            let stream = enum_is_lex(g, n.saturating_sub(inst.k()), &sigma, &[], &[], oracle)?;
            Ok(stream.map_sets(move |s| all.difference(&s)))
        }
        Problem::Ais => {
            let hs = inst.hyperedges.clone();
            let stream = enum_is_lex(g, inst.t(), &sigma, &[], &[], oracle)?;
            Ok(SolutionStream::new(Box::new(FilterSource {
                inner: stream.into_source(),
                keep: move |s: &VertexSet| !hs.iter().any(|h| h.is_subset(s)),
            })))
        }
    }
}

/// Streams `Sol(inst)` through the kernel: enumerate compressed solutions,
/// keep the canonical ones, lift their traces.
pub fn run_pd_kernel<K>(kernel: &K, inst: &EnumInstance) -> Result<SolutionStream, KernelError>
where
    K: PdKernel + Clone + 'static,
{
    let comp = Arc::new(kernel.compress(inst)?);
    run_compressed(kernel, comp)
}

/// Lifting phase of [`run_pd_kernel`] for an existing compression.
pub fn run_compressed<K>(kernel: &K, comp: Arc<Compression<K::State>>) -> Result<SolutionStream, KernelError>
where
    K: PdKernel + Clone + 'static,
{
    let outer = kernel.compressed_solutions(&comp)?.into_source();
    let k = kernel.clone();
    let expand = Box::new(move |s: VertexSet, _: &mut Steps| -> Result<Option<BoxSource>, StreamError> {
        if !k.canonical_check(&comp, &s)? {
            return Ok(None);
        }
        let y = k.trace_of(&comp, &s)?.ok_or_else(|| {
            StreamError::Contract(format!("canonical solution {s:?} has no trace"))
        })?;
        Ok(Some(k.lift(&comp, &y)?.into_source()))
    });
    Ok(SolutionStream::new(Box::new(FlatMapSource::new(outer, expand))))
}

/// Lifts one compressed solution given in compressed ids; empty if not canonical.
pub fn lift_solution<K>(kernel: &K, comp: &Arc<Compression<K::State>>, s: &VertexSet) -> Result<SolutionStream, KernelError>
where
    K: PdKernel,
{
    if !kernel.canonical_check(comp, s)? {
        return Ok(SolutionStream::empty());
    }
    match kernel.trace_of(comp, s)? {
        Some(y) => kernel.lift(comp, &y),
        None => Ok(SolutionStream::empty()),
    }
}

/// `compress = id`, `core = V`, every solution canonical.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityKernel;

impl PdKernel for IdentityKernel {
    type State = ();

    fn name(&self) -> &'static str {
        "identity"
    }

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<()>, KernelError> {
        let g = &inst.graph;
        let log = RuleLog {
            header: LogHeader {
                kernel: self.name().into(),
                c: inst.c,
                degenerate: false,
                compressed_labels: g.labels().to_vec(),
            },
            ..RuleLog::default()
        };
        Ok(Compression {
            original: inst.clone(),
            compressed: inst.clone(),
            core: CoreMap::new(g.vertices(), g.vertices().into_vec())?,
            log,
            degenerate: false,
            state: (),
        })
    }

    fn is_good_trace(&self, comp: &Compression<()>, y: &VertexSet) -> Result<bool, KernelError> {
        Ok(comp.original.is_solution(y))
    }

    fn canonical_check(&self, _: &Compression<()>, _: &VertexSet) -> Result<bool, KernelError> {
        Ok(true)
    }

    fn lift(&self, _: &Arc<Compression<()>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
        Ok(SolutionStream::once(y.clone()))
    }
}

/// A 0-ePPT: instance map whose solution sets coincide with the original's.
pub trait ForwardEppt: Send + Sync {
    fn map(&self, inst: &EnumInstance) -> Result<EnumInstance, KernelError>;
}

/// An ePPT whose lifting maps each solution to at most one preimage.
pub trait BackwardEppt: Send + Sync {
    fn map(&self, inst: &EnumInstance) -> Result<EnumInstance, KernelError>;

    /// Preimage of `s` in `source`, or `None` to reject.
    fn lift(&self, source: &EnumInstance, image: &EnumInstance, s: &VertexSet) -> Option<VertexSet>;

    /// Oracle for enumerating the image of `source`.
    fn oracle(&self, _source: &EnumInstance, _image: &EnumInstance) -> Arc<dyn AlphaOracle> {
        MisOracle::global()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityEppt;

impl ForwardEppt for IdentityEppt {
    fn map(&self, inst: &EnumInstance) -> Result<EnumInstance, KernelError> {
        Ok(inst.clone())
    }
}

impl BackwardEppt for IdentityEppt {
    fn map(&self, inst: &EnumInstance) -> Result<EnumInstance, KernelError> {
        Ok(inst.clone())
    }

    fn lift(&self, _: &EnumInstance, _: &EnumInstance, s: &VertexSet) -> Option<VertexSet> {
        Some(s.clone())
    }
}

/// State of a composed kernel: the inner compression and the backward map's input.
#[derive(Debug)]
pub struct ComposedState<S> {
    pub inner: Arc<Compression<S>>,
}

/// `backward ∘ inner ∘ forward`, with lifting processed online.
#[derive(Clone, Debug)]
pub struct EpptComposed<F, K, B> {
    pub forward: F,
    pub inner: K,
    pub backward: B,
    pub name: &'static str,
}

pub fn eppt_compose<F, K, B>(forward: F, inner: K, backward: B) -> EpptComposed<F, K, B> {
    EpptComposed {
        forward,
        inner,
        backward,
        name: "composed",
    }
}

impl<F, K, B> PdKernel for EpptComposed<F, K, B>
where
    F: ForwardEppt + Clone + 'static,
    K: PdKernel + Clone + 'static,
    B: BackwardEppt + Clone + 'static,
{
    type State = ComposedState<K::State>;

    fn name(&self) -> &'static str {
        self.name
    }

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<Self::State>, KernelError> {
        let mid = self.forward.map(inst)?;
        let inner = self.inner.compress(&mid)?;
        let image = self.backward.map(&inner.compressed)?;
        let mut log = inner.log.clone();
        log.header.kernel = self.name.into();
        log.header.compressed_labels = image.graph.labels().to_vec();
        log.push(RuleEntry::new(
            "backward-map",
            vec![Edit::Replace {
                text: crate::io::serialize(&image),
            }],
        ));
        Ok(Compression {
            original: inst.clone(),
            compressed: image,
            core: inner.core.clone(),
            log,
            degenerate: inner.degenerate,
            state: ComposedState {
                inner: Arc::new(inner),
            },
        })
    }

    fn trace_of(&self, comp: &Compression<Self::State>, s: &VertexSet) -> Result<Option<VertexSet>, KernelError> {
        let inner = &comp.state.inner;
        match self.backward.lift(&inner.compressed, &comp.compressed, s) {
            Some(pre) => self.inner.trace_of(inner, &pre),
            None => Ok(None),
        }
    }

    fn is_good_trace(&self, comp: &Compression<Self::State>, y: &VertexSet) -> Result<bool, KernelError> {
        self.inner.is_good_trace(&comp.state.inner, y)
    }

    fn canonical_check(&self, comp: &Compression<Self::State>, s: &VertexSet) -> Result<bool, KernelError> {
        let inner = &comp.state.inner;
        match self.backward.lift(&inner.compressed, &comp.compressed, s) {
            Some(pre) => self.inner.canonical_check(inner, &pre),
            None => Ok(false),
        }
    }

    fn lift(&self, comp: &Arc<Compression<Self::State>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
        self.inner.lift(&comp.state.inner, y)
    }

    fn compressed_solutions(&self, comp: &Compression<Self::State>) -> Result<SolutionStream, KernelError> {
        enumerate_solutions(&comp.compressed, self.backward.oracle(&comp.state.inner.compressed, &comp.compressed))
    }
}

/// Outcome of [`verify_partition`]; `failures` lists every violated check.
#[derive(Clone, Debug, Default)]
pub struct PartitionReport {
    pub solutions: usize,
    pub compressed_solutions: usize,
    pub rejected_by_backward: usize,
    pub canonical: usize,
    pub good_traces: usize,
    pub lifted_outputs: usize,
    pub union_ok: bool,
    pub disjoint_ok: bool,
    pub nonempty_equiv_ok: bool,
    pub canonical_ok: bool,
    pub condition1_ok: bool,
    pub condition3_ok: bool,
    pub failures: Vec<String>,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn fail(report: &mut PartitionReport, msg: String) {
    if report.failures.len() < 20 {
        report.failures.push(msg);
    }
}

/// Checks union, disjointness, nonemptiness equivalence, one canonical
/// solution per good trace, trace realisability and exact lifts.
pub fn verify_partition<K>(inst: &EnumInstance, kernel: &K) -> Result<PartitionReport, KernelError>
where
    K: PdKernel + Clone + 'static,
{
    let comp = Arc::new(kernel.compress(inst)?);
    verify_compression(kernel, comp)
}

pub fn verify_compression<K>(kernel: &K, comp: Arc<Compression<K::State>>) -> Result<PartitionReport, KernelError>
where
    K: PdKernel + Clone + 'static,
{
    let mut r = PartitionReport::default();
    let brute: BTreeSet<VertexSet> = crate::harness::brute_sol_ids(&comp.original)
        .map_err(|e| KernelError::Precondition(e.to_string()))?
        .into_iter()
        .collect();
    r.solutions = brute.len();
    let mut by_trace: BTreeMap<VertexSet, BTreeSet<VertexSet>> = BTreeMap::new();
    for s in &brute {
        by_trace.entry(comp.core.original_trace(s)).or_default().insert(s.clone());
    }
    r.good_traces = by_trace.len();

    let compressed = kernel.compressed_solutions(&comp)?.collect_all()?;
    r.compressed_solutions = compressed.len();
    let mut canon_per_trace: BTreeMap<VertexSet, usize> = BTreeMap::new();
    let mut realised: BTreeSet<VertexSet> = BTreeSet::new();
    let mut canonical_traces = Vec::new();
    for s in &compressed {
        let Some(y) = kernel.trace_of(&comp, s)? else {
            r.rejected_by_backward += 1;
            if kernel.canonical_check(&comp, s)? {
                fail(&mut r, format!("rejected solution {s:?} was accepted"));
            }
            continue;
        };
        realised.insert(y.clone());
        if kernel.canonical_check(&comp, s)? {
            *canon_per_trace.entry(y.clone()).or_default() += 1;
            canonical_traces.push(y);
        }
    }
    r.canonical = canonical_traces.len();

    r.nonempty_equiv_ok = brute.is_empty() == compressed.is_empty();
    if !r.nonempty_equiv_ok {
        fail(&mut r, format!("Sol nonempty {} but compressed nonempty {}", !brute.is_empty(), !compressed.is_empty()));
    }

    r.condition1_ok = by_trace.keys().all(|y| realised.contains(y));
    if !r.condition1_ok {
        let missing: Vec<_> = by_trace.keys().filter(|y| !realised.contains(*y)).collect();
        fail(&mut r, format!("good traces not realised: {missing:?}"));
    }

    r.canonical_ok = true;
    for y in by_trace.keys() {
        let c = canon_per_trace.get(y).copied().unwrap_or(0);
        if c != 1 {
            r.canonical_ok = false;
            fail(&mut r, format!("good trace {y:?} has {c} canonical solutions"));
        }
        if !kernel.is_good_trace(&comp, y)? {
            r.canonical_ok = false;
            fail(&mut r, format!("good trace {y:?} reported bad"));
        }
    }
    for (y, c) in &canon_per_trace {
        if !by_trace.contains_key(y) && *c > 0 {
            r.canonical_ok = false;
            fail(&mut r, format!("bad trace {y:?} has {c} canonical solutions"));
        }
    }

    let mut union: BTreeSet<VertexSet> = BTreeSet::new();
    r.disjoint_ok = true;
    r.condition3_ok = true;
    for y in &canonical_traces {
        let lifted = kernel.lift(&comp, y)?.collect_all()?;
        r.lifted_outputs += lifted.len();
        let mut mine = BTreeSet::new();
        for s in lifted {
            if !mine.insert(s.clone()) || union.contains(&s) {
                r.disjoint_ok = false;
                fail(&mut r, format!("solution {s:?} lifted twice"));
            }
            union.insert(s);
        }
        let expected = by_trace.get(y).cloned().unwrap_or_default();
        if mine != expected {
            r.condition3_ok = false;
            fail(&mut r, format!("lift of trace {y:?} has {} sets, expected {}", mine.len(), expected.len()));
        }
    }
    r.union_ok = union == brute;
    if !r.union_ok {
        fail(&mut r, format!("union of lifts has {} sets, Sol has {}", union.len(), brute.len()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse;

    #[derive(Clone)]
    struct DoubleLift;

    impl PdKernel for DoubleLift {
        type State = ();

        fn name(&self) -> &'static str {
            "double"
        }

        fn compress(&self, inst: &EnumInstance) -> Result<Compression<()>, KernelError> {
            IdentityKernel.compress(inst)
        }

        fn is_good_trace(&self, c: &Compression<()>, y: &VertexSet) -> Result<bool, KernelError> {
            IdentityKernel.is_good_trace(c, y)
        }

        fn canonical_check(&self, _: &Compression<()>, _: &VertexSet) -> Result<bool, KernelError> {
            Ok(true)
        }

        fn lift(&self, _: &Arc<Compression<()>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
            Ok(SolutionStream::from_sets(vec![y.clone(), y.clone()]))
        }
    }

    #[test]
    fn identity_kernel_passes() {
        let inst = parse("p is 4 3\ne 1 2\ne 2 3\ne 3 4\nt 2\n").unwrap();
        let r = verify_partition(&inst, &IdentityKernel).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let direct = enumerate_solutions(&inst, MisOracle::global()).unwrap().collect_all().unwrap();
        let via = run_pd_kernel(&IdentityKernel, &inst).unwrap().collect_all().unwrap();
        assert_eq!(direct, via);
    }

    #[test]
    fn double_lift_is_flagged() {
        let inst = parse("p is 3 1\ne 1 2\nt 1\n").unwrap();
        let r = verify_partition(&inst, &DoubleLift).unwrap();
        assert!(!r.disjoint_ok);
        assert!(!r.passed());
    }

    #[test]
    fn identity_composition_matches_inner() {
        let inst = parse("p is 4 2\ne 1 2\ne 3 4\nt 2\n").unwrap();
        let k = eppt_compose(IdentityEppt, IdentityKernel, IdentityEppt);
        let a = run_pd_kernel(&k, &inst).unwrap().collect_all().unwrap();
        let b = run_pd_kernel(&IdentityKernel, &inst).unwrap().collect_all().unwrap();
        assert_eq!(a, b);
        assert!(verify_partition(&inst, &k).unwrap().passed());
    }

    #[test]
    fn rule_log_round_trip() {
        let mut log = RuleLog::default();
        log.header.kernel = "vc".into();
        log.header.compressed_labels = vec![1, 2];
        log.push(RuleEntry::new("vc-isolated", vec![Edit::DeleteVertices { labels: vec![3] }]));
        let text = log.to_jsonl();
        assert_eq!(RuleLog::from_jsonl(&text).unwrap(), log);
        let inst = parse("p vc 3 1\ne 1 2\nk 1\n").unwrap();
        let out = log.replay(&inst).unwrap();
        assert_eq!(out.graph.labels(), &[1, 2]);
        assert_eq!(out.graph.m(), 1);
    }
}
