//! Independent set parameterized by a modulator to treedepth `c`, through the
//! annotated problem: forward ePPT, annotated kernel, gadget ePPT back to IS.

use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::decomp::treedepth;
use crate::flashlight::{
    flashlight_source, BoxSource, FlatMapSource, SolutionStream, Steps, StreamError, VertexOrder,
};
use crate::framework::{
    apply_edit, eppt_compose, BackwardEppt, Compression, CoreMap, Edit, EpptComposed, ForwardEppt,
    KernelError, PdKernel, RuleEntry, RuleLog,
};
use crate::graph::{Graph, Label, VertexSet};
use crate::io::{EnumInstance, Problem};
use crate::mis::{conflicts, enumerate_chunks, is_extension, AlphaOracle, ChunkSet, MisError, MisOracle};

use super::{finish_log, header, labels, rest_of};

/// Replaces every edge inside the modulator by a two-element hyperedge.
#[derive(Clone, Copy, Debug, Default)]
pub struct TdForward;

impl ForwardEppt for TdForward {
    fn map(&self, inst: &EnumInstance) -> Result<EnumInstance, KernelError> {
        forward_eppt(inst)
    }
}

pub fn forward_eppt(inst: &EnumInstance) -> Result<EnumInstance, KernelError> {
    if inst.problem != Problem::Is {
        return Err(KernelError::Precondition("forward map expects an is instance".into()));
    }
    let x = inst
        .modulator
        .clone()
        .ok_or_else(|| KernelError::Precondition("treedepth kernel needs a modulator".into()))?;
    let g = &inst.graph;
    let inside: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| x.contains(u) && x.contains(v))
        .collect();
    let graph = g.delete_edges(&inside)?;
    let hs = inside.iter().map(|&(u, v)| VertexSet::from(vec![u, v])).collect();
    let mut out = EnumInstance::ais(graph, x, hs, inst.t());
    out.c = inst.c;
    Ok(out)
}

/// The annotated kernel on its own: rules 1-3 and root moving, `c` levels.
#[derive(Clone, Copy, Debug, Default)]
pub struct AisTdKernel {
    pub c: Option<usize>,
}

/// What lifting needs from a compression run, in ids of the input instance.
#[derive(Clone, Debug, Default)]
pub struct TdState {
    /// Removed components with the target just before their removal, in order.
    pub removals: Vec<(VertexSet, usize)>,
    /// Modulator at the last level.
    pub final_modulator: VertexSet,
    /// Levels of recursion actually run.
    pub levels: usize,
}

fn chunks(inst: &EnumInstance, c: usize) -> ChunkSet {
    let size = 1usize.checked_shl(c as u32).unwrap_or(usize::MAX);
    enumerate_chunks(&inst.graph, &inst.modulator(), size, &inst.hyperedges)
}

fn alpha_rest(inst: &EnumInstance) -> Result<usize, KernelError> {
    let g = &inst.graph;
    Ok(MisOracle::global().alpha_of(g, &rest_of(inst))?)
}

/// Rule 1: `α(R) >= t` gives `(G[X], ℋ, 0)`.
pub fn rule_easy_td(inst: &EnumInstance) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    if alpha_rest(inst)? < inst.t() {
        return Ok(None);
    }
    let edits = vec![
        Edit::Restrict {
            labels: inst.modulator_labels(),
        },
        Edit::DeltaT {
            delta: -(inst.t() as i64),
        },
    ];
    let out = apply_all(inst, &edits)?;
    Ok(Some((out, RuleEntry::new("td-easy", edits))))
}

/// Rule 2: a chunk with more than `|X|` conflicts on `R` becomes a hyperedge.
pub fn rule_bad_chunk(inst: &EnumInstance, c: usize) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    let g = &inst.graph;
    let rest = rest_of(inst);
    let x = inst.modulator();
    let oracle = MisOracle::global();
    for y in chunks(inst, c).nonempty() {
        if conflicts(oracle.as_ref(), g, &rest, y)? > x.len() {
            let edits = vec![Edit::AddHyperedges {
                sets: vec![labels(g, y)],
            }];
            let out = apply_all(inst, &edits)?;
            return Ok(Some((out, RuleEntry::new("td-bad-chunk", edits))));
        }
    }
    Ok(None)
}

/// Rule 3: a component of `R` free of conflicts is removed, `t -= α`.
/// Also returns the removed component and the target before removal.
pub fn rule_good_component(
    inst: &EnumInstance,
    c: usize,
) -> Result<Option<(EnumInstance, RuleEntry, VertexSet)>, KernelError> {
    let g = &inst.graph;
    let rest = VertexSet::from(rest_of(inst));
    let oracle = MisOracle::global();
    let cs = chunks(inst, c);
    let mut comps = g.components_in(&rest.to_mask(g.n()));
    comps.sort_by_key(|c| c.iter().map(|&v| g.label(v)).min());
    'comp: for comp in comps {
        for y in cs.nonempty() {
            if conflicts(oracle.as_ref(), g, &comp, y)? > 0 {
                continue 'comp;
            }
        }
        let a = oracle.alpha_of(g, &comp)?;
        let edits = vec![
            Edit::DeleteVertices { labels: labels(g, &comp) },
            Edit::DeltaT { delta: -(a as i64) },
        ];
        let out = apply_all(inst, &edits)?;
        return Ok(Some((out, RuleEntry::new("td-good-component", edits), comp)));
    }
    Ok(None)
}

/// Moves the root of an optimal treedepth decomposition of each component
/// into the modulator; edges from the old modulator to the roots become
/// hyperedges.
pub fn move_roots(inst: &EnumInstance) -> Result<(EnumInstance, RuleEntry), KernelError> {
    let g = &inst.graph;
    let x = inst.modulator();
    let rest = VertexSet::from(rest_of(inst));
    let mut roots = VertexSet::new();
    for comp in g.components_in(&rest.to_mask(g.n())) {
        let (sub, _) = g.induced_subgraph(&comp)?;
        let (_, dec) = treedepth(&sub)?;
        roots.insert(comp[dec.roots[0]]);
    }
    let z: Vec<(Label, Label)> = g
        .edges()
        .iter()
        .filter(|&&(u, v)| (x.contains(u) && roots.contains(v)) || (x.contains(v) && roots.contains(u)))
        .map(|&(u, v)| (g.label(u), g.label(v)))
        .collect();
    let mut edits = Vec::new();
    if !z.is_empty() {
        edits.push(Edit::DeleteEdges { edges: z.clone() });
        edits.push(Edit::AddHyperedges {
            sets: z.iter().map(|&(a, b)| vec![a, b]).collect(),
        });
    }
    edits.push(Edit::SetModulator {
        labels: labels(g, &x.union(&roots)),
    });
    let out = apply_all(inst, &edits)?;
    Ok((out, RuleEntry::new("td-move-roots", edits)))
}

fn apply_all(inst: &EnumInstance, edits: &[Edit]) -> Result<EnumInstance, KernelError> {
    let mut cur = inst.clone();
    for e in edits {
        cur = apply_edit(&cur, e)?;
    }
    Ok(cur)
}

fn check_ais(inst: &EnumInstance) -> Result<(), KernelError> {
    if inst.problem != Problem::Ais || inst.modulator.is_none() {
        return Err(KernelError::Precondition("annotated kernel expects an ais instance with a modulator".into()));
    }
    inst.validate()?;
    Ok(())
}

/// Levels of the annotated compression; `c` is the treedepth bound of `G \ X`.
pub fn compress_ais_td(inst: &EnumInstance, c: usize) -> Result<Compression<TdState>, KernelError> {
    check_ais(inst)?;
    let orig = &inst.graph;
    let (rest_graph, _) = orig.induced_subgraph(&rest_of(inst))?;
    let td = treedepth(&rest_graph)?.0;
    if td > c {
        return Err(KernelError::Precondition(format!(
            "G \\ X has treedepth {td} > c = {c}"
        )));
    }
    let mut log = RuleLog::default();
    let mut state = TdState::default();
    let mut cur = inst.clone();
    let mut degenerate = false;
    if let Some((out, e)) = rule_easy_td(&cur)? {
        log.push(e);
        cur = out;
        degenerate = true;
    } else {
        let mut level = c;
        while level > 0 {
            log.push(RuleEntry::new("td-level", vec![]).with_note(format!("c = {level}")));
            while let Some((out, e)) = rule_bad_chunk(&cur, level)? {
                log.push(e);
                cur = out;
            }
            let mut t_before = cur.t();
            while let Some((out, e, comp)) = rule_good_component(&cur, level)? {
                log.push(e);
                state.removals.push((translate(&cur.graph, orig, &comp), t_before));
                cur = out;
                t_before = cur.t();
            }
            if alpha_rest(&cur)? >= cur.t() {
                return Err(KernelError::Invariant(format!("alpha(R) >= t at level {level}")));
            }
            let (out, e) = move_roots(&cur)?;
            log.push(e);
            cur = out;
            level -= 1;
            state.levels += 1;
        }
        if !rest_of(&cur).is_empty() {
            return Err(KernelError::Invariant("vertices outside the modulator after c levels".into()));
        }
    }
    state.final_modulator = translate(&cur.graph, orig, &cur.modulator());
    let core = CoreMap::by_labels(orig, &cur.graph, cur.graph.vertices())?;
    let log = finish_log(log, header("td-annotated", &cur, Some(c), degenerate));
    Ok(Compression {
        original: inst.clone(),
        compressed: cur,
        core,
        log,
        degenerate,
        state,
    })
}

fn translate(from: &Graph, to: &Graph, s: &[usize]) -> VertexSet {
    super::translate(from, to, s)
}

/// Some original solution meets the final modulator exactly in `y`.
pub fn is_good_td(comp: &Compression<TdState>, y: &VertexSet) -> Result<bool, KernelError> {
    let inst = &comp.original;
    let xf = &comp.state.final_modulator;
    if !y.is_subset(xf) || inst.hyperedges.iter().any(|h| h.is_subset(y)) {
        return Ok(false);
    }
    let avoid = xf.difference(y);
    Ok(is_extension(
        MisOracle::global().as_ref(),
        &inst.graph,
        y,
        &avoid,
        inst.t(),
    )?)
}

fn extend(g: &Arc<Graph>, s: &VertexSet, region: &VertexSet, t: usize) -> Result<BoxSource, StreamError> {
    let avoid: Vec<usize> = (0..g.n()).filter(|&v| !region.contains(v) && !s.contains(v)).collect();
    let sigma = VertexOrder::by_label(g);
    Ok(Box::new(flashlight_source(g, t, &sigma, &avoid, s, MisOracle::global())?))
}

fn lift_level(g: Arc<Graph>, removals: Arc<Vec<(VertexSet, usize)>>, j: usize, s: VertexSet) -> Result<BoxSource, StreamError> {
    if j == 0 {
        return Ok(SolutionStream::once(s).into_source());
    }
    let (region, t) = &removals[j - 1];
    let outer = extend(&g, &s, region, *t)?;
    let expand = Box::new(move |s: VertexSet, _: &mut Steps| -> Result<Option<BoxSource>, StreamError> {
        Ok(Some(lift_level(g.clone(), removals.clone(), j - 1, s)?))
    });
    Ok(Box::new(FlatMapSource::new(outer, expand)))
}

/// `{S ∈ Sol : S ∩ X_final = y}`: one flashlight level per removed component,
/// replayed in reverse; the degenerate case is a single level over `R`.
pub fn lift_ais_td(comp: &Compression<TdState>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
    let inst = &comp.original;
    let g = Arc::new(inst.graph.clone());
    if comp.degenerate {
        let rest = VertexSet::from(rest_of(inst));
        return Ok(SolutionStream::new(extend(&g, y, &rest, inst.t())?));
    }
    let removals = Arc::new(comp.state.removals.clone());
    let j = removals.len();
    Ok(SolutionStream::new(lift_level(g, removals, j, y.clone())?))
}

impl PdKernel for AisTdKernel {
    type State = TdState;

    fn name(&self) -> &'static str {
        "td-annotated"
    }

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<TdState>, KernelError> {
        let c = match self.c.or(inst.c) {
            Some(c) => c,
            None => {
                let (rest, _) = inst.graph.induced_subgraph(&rest_of(inst))?;
                treedepth(&rest)?.0
            }
        };
        compress_ais_td(inst, c)
    }

    fn is_good_trace(&self, comp: &Compression<TdState>, y: &VertexSet) -> Result<bool, KernelError> {
        is_good_td(comp, y)
    }

    fn canonical_check(&self, comp: &Compression<TdState>, s: &VertexSet) -> Result<bool, KernelError> {
        is_good_td(comp, &comp.core.trace(s))
    }

    fn lift(&self, comp: &Arc<Compression<TdState>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
        lift_ais_td(comp, y)
    }
}

/// Layout of the gadget built from an annotated instance whose vertices all
/// lie in the modulator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    /// Source vertices in label order; position is the index `i`.
    pub order: Vec<usize>,
    /// `(a_i, z_i, b_i)` in gadget ids.
    pub paths: Vec<[usize; 3]>,
    /// Per hyperedge, its parts `(i, W_H^i)`.
    pub blocks: Vec<Vec<(usize, Vec<usize>)>>,
    pub t_prime: usize,
    pub graph: Graph,
}

impl Gadget {
    /// Leftover graph edges are treated as two-element hyperedges.
    pub fn build(src: &EnumInstance) -> Result<Self, KernelError> {
        let g = &src.graph;
        let x = src.modulator();
        if x.len() != g.n() {
            return Err(KernelError::Precondition("gadget needs every vertex in the modulator".into()));
        }
        let mut order: Vec<usize> = g.vertices().into_vec();
        order.sort_by_key(|&v| g.label(v));
        let index: Vec<usize> = {
            let mut ix = vec![0; g.n()];
            for (i, &v) in order.iter().enumerate() {
                ix[v] = i;
            }
            ix
        };
        let mut hs: Vec<VertexSet> = src.hyperedges.clone();
        for &(u, v) in g.edges().iter() {
            hs.push(VertexSet::from(vec![u, v]));
        }
        hs.sort();
        hs.dedup();
        let k = order.len();
        let mut edges = Vec::new();
        let paths: Vec<[usize; 3]> = (0..k).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
        for p in &paths {
            edges.push((p[0], p[1]));
            edges.push((p[1], p[2]));
        }
        let mut next = 3 * k;
        let mut blocks = Vec::new();
        for h in &hs {
            let mut parts = Vec::new();
            for &v in h.iter() {
                let i = index[v];
                let part: Vec<usize> = (next..next + k).collect();
                next += k;
                for &w in &part {
                    edges.push((w, paths[i][0]));
                    edges.push((w, paths[i][2]));
                }
                parts.push((i, part));
            }
            parts.sort_by_key(|p| p.0);
            for a in 0..parts.len() {
                for b in a + 1..parts.len() {
                    for &u in &parts[a].1 {
                        for &w in &parts[b].1 {
                            edges.push((u, w));
                        }
                    }
                }
            }
            blocks.push(parts);
        }
        let labels: Vec<Label> = (1..=next as Label).collect();
        let graph = Graph::from_labeled_edges(labels, &edges)?;
        Ok(Gadget {
            order,
            paths,
            t_prime: k + src.t() + k * hs.len(),
            blocks,
            graph,
        })
    }

    pub fn instance(&self) -> EnumInstance {
        EnumInstance::is(self.graph.clone(), self.t_prime)
    }

    /// `σ(S)`: path ends for members, centres otherwise, and per hyperedge
    /// the part of the smallest index outside `S`.
    pub fn sigma(&self, s: &VertexSet) -> Option<VertexSet> {
        let inside: Vec<bool> = self.order.iter().map(|&v| s.contains(v)).collect();
        let mut out = VertexSet::new();
        for (i, p) in self.paths.iter().enumerate() {
            if inside[i] {
                out.insert(p[0]);
                out.insert(p[2]);
            } else {
                out.insert(p[1]);
            }
        }
        for parts in &self.blocks {
            let (_, part) = parts.iter().find(|(i, _)| !inside[*i])?;
            for &w in part {
                out.insert(w);
            }
        }
        Some(out)
    }

    /// `σ⁻¹(S')`, or `None` when `S'` is not maximal or a hyperedge block uses a
    /// part while a smaller-index part would also fit.
    pub fn sigma_inverse(&self, src: &EnumInstance, s: &VertexSet) -> Option<VertexSet> {
        let g = &self.graph;
        if !g.is_independent(s) {
            return None;
        }
        let blocked = g.closed_neighborhood(s);
        if blocked.len() != g.n() {
            return None;
        }
        let ends = |i: usize| s.contains(self.paths[i][0]) && s.contains(self.paths[i][2]);
        for parts in &self.blocks {
            let used = parts.iter().position(|(_, part)| part.iter().all(|&w| s.contains(w)))?;
            if parts[..used].iter().any(|(j, _)| !s.contains(self.paths[*j][0]) && !s.contains(self.paths[*j][2])) {
                return None;
            }
        }
        let pre: VertexSet = (0..self.order.len()).filter(|&i| ends(i)).map(|i| self.order[i]).collect();
        src.is_solution(&pre).then_some(pre)
    }
}

/// `α` of an alive subset of a gadget, by choosing which paths keep their ends.
#[derive(Clone, Debug)]
pub struct GadgetOracle {
    gadget: Arc<Gadget>,
}

impl GadgetOracle {
    pub fn new(gadget: Gadget) -> Self {
        GadgetOracle { gadget: Arc::new(gadget) }
    }
}

impl AlphaOracle for GadgetOracle {
    fn alpha(&self, g: &Graph, alive: &FixedBitSet) -> Result<usize, MisError> {
        let gd = &self.gadget;
        if g.n() != gd.graph.n() {
            return MisOracle::global().alpha(g, alive);
        }
        let on = |v: usize| alive.contains(v) as usize;
        let k = gd.paths.len();
        let ends: Vec<usize> = gd.paths.iter().map(|p| on(p[0]) + on(p[2])).collect();
        let mid: Vec<usize> = gd.paths.iter().map(|p| on(p[1])).collect();
        let sizes: Vec<Vec<(usize, usize)>> = gd
            .blocks
            .iter()
            .map(|parts| parts.iter().map(|(i, part)| (*i, part.iter().filter(|&&w| alive.contains(w)).count())).collect())
            .collect();
        let free: Vec<usize> = (0..k).filter(|&i| ends[i] > 0).collect();
        if free.len() > 24 {
            return MisOracle::global().alpha(g, alive);
        }
        let mut best = 0;
        for mask in 0u32..(1u32 << free.len()) {
            let mut chosen = vec![false; k];
            for (b, &i) in free.iter().enumerate() {
                chosen[i] = mask >> b & 1 == 1;
            }
            let mut total: usize = (0..k).map(|i| if chosen[i] { ends[i] } else { mid[i] }).sum();
            for parts in &sizes {
                total += parts.iter().filter(|(i, _)| !chosen[*i]).map(|p| p.1).max().unwrap_or(0);
            }
            best = best.max(total);
        }
        Ok(best)
    }
}

/// The gadget ePPT from the annotated problem back to plain IS.
#[derive(Clone, Copy, Debug, Default)]
pub struct GadgetBackward;

impl BackwardEppt for GadgetBackward {
    fn map(&self, inst: &EnumInstance) -> Result<EnumInstance, KernelError> {
        Ok(Gadget::build(inst)?.instance())
    }

    fn lift(&self, source: &EnumInstance, _image: &EnumInstance, s: &VertexSet) -> Option<VertexSet> {
        Gadget::build(source).ok()?.sigma_inverse(source, s)
    }

    fn oracle(&self, source: &EnumInstance, _image: &EnumInstance) -> Arc<dyn AlphaOracle> {
        match Gadget::build(source) {
            Ok(g) => Arc::new(GadgetOracle::new(g)),
            Err(_) => MisOracle::global(),
        }
    }
}

pub type TdPipeline = EpptComposed<TdForward, AisTdKernel, GadgetBackward>;

/// Forward map, annotated kernel and gadget map, composed.
pub fn pipeline_is_td(c: Option<usize>) -> TdPipeline {
    let mut p = eppt_compose(TdForward, AisTdKernel { c }, GadgetBackward);
    p.name = "td";
    p
}
