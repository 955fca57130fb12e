//! Independent set parameterized by a modulator to bridgedepth `c`.
//!
//! Rules 2-8 shrink each component of `R = G \ X`, then a lowering tree of
//! every component joins the modulator and the next level runs with `c - 1`.
//! The core stays the input modulator; lifting is one flashlight run on the
//! original graph.

use std::sync::Arc;

use crate::decomp::{bridgedepth_of, longest_path, BridgedepthSolver, TreeOfBridges};
use crate::flashlight::{flashlight_source, SolutionStream, VertexOrder};
use crate::framework::{apply_edit, Compression, CoreMap, Edit, KernelError, PdKernel, RuleEntry, RuleLog};
use crate::graph::{Graph, Label, VertexSet};
use crate::io::{EnumInstance, Problem};
use crate::mis::{conflicts, enumerate_chunks, is_almost_free, is_extension, ChunkSet, MisOracle};

use super::{finish_log, first_solution, header, labels, rest_of};

#[derive(Clone, Copy, Debug, Default)]
pub struct BdKernel {
    pub c: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexType {
    /// `α(H_v) = α(H_v - v)`.
    A,
    /// `α(H_v) = α(H_v - v) + 1`.
    B,
}

/// The component of `R' \ E(T)` hanging at a tree vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PendingComponent {
    pub root: usize,
    pub vertices: VertexSet,
    pub vtype: VertexType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Tree edge `v1 v2` with a type A end.
    Type1 { v1: usize, v2: usize },
    /// Path `u2 v1 v2 u1`, inner vertices of tree degree 2, both type B.
    Type2 { u2: usize, v1: usize, v2: usize, u1: usize },
    /// Type B leaf `u` with its parent.
    Type3 { u: usize, parent: usize },
    /// Type B leaf `v1`, type B parent `v2` of tree degree 2, next vertex `u`.
    Type4 { v1: usize, v2: usize, u: usize },
}

impl Shape {
    pub fn kind(&self) -> u8 {
        match self {
            Shape::Type1 { .. } => 1,
            Shape::Type2 { .. } => 2,
            Shape::Type3 { .. } => 3,
            Shape::Type4 { .. } => 4,
        }
    }

    /// Almost-freeness threshold, `|X| + 2` or `|X| + 1`.
    pub fn threshold(&self, x: usize) -> usize {
        match self {
            Shape::Type1 { .. } | Shape::Type3 { .. } => x + 2,
            Shape::Type2 { .. } | Shape::Type4 { .. } => x + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TConflictStructure {
    pub shape: Shape,
    pub vertices: VertexSet,
    pub almost_free: bool,
}

/// One invariant audit after a rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BdAudit {
    pub rule: String,
    pub alpha_rest: usize,
    pub t: usize,
    pub bd_before: usize,
    pub bd_after: usize,
}

#[derive(Clone, Debug, Default)]
pub struct BdState {
    pub audits: Vec<BdAudit>,
    /// `(components of R, |𝒳|·|X|)` each time Rules 2-3 were exhausted.
    pub component_checks: Vec<(usize, usize)>,
    pub levels: usize,
    /// Input modulator, original ids.
    pub modulator: VertexSet,
}

type Step = Option<(EnumInstance, RuleEntry)>;

fn oracle() -> Arc<MisOracle> {
    MisOracle::global()
}

fn apply_all(inst: &EnumInstance, edits: &[Edit]) -> Result<EnumInstance, KernelError> {
    let mut cur = inst.clone();
    for e in edits {
        cur = apply_edit(&cur, e)?;
    }
    Ok(cur)
}

fn chunks(inst: &EnumInstance, c: usize) -> ChunkSet {
    let size = 1usize.checked_shl(c as u32).unwrap_or(usize::MAX);
    enumerate_chunks(&inst.graph, &inst.modulator(), size, &[])
}

fn rest_components(inst: &EnumInstance) -> Vec<VertexSet> {
    let g = &inst.graph;
    let rest = VertexSet::from(rest_of(inst));
    let mut comps = g.components_in(&rest.to_mask(g.n()));
    comps.sort_by_key(|c| c.iter().map(|&v| g.label(v)).min());
    comps
}

fn alpha_rest(inst: &EnumInstance) -> Result<usize, KernelError> {
    Ok(oracle().alpha_of(&inst.graph, &rest_of(inst))?)
}

fn bd_rest(inst: &EnumInstance) -> Result<usize, KernelError> {
    Ok(bridgedepth_of(&inst.graph, &rest_of(inst))?)
}

/// Rule 1: `α(R) >= t` gives `(G[X], X, 0)`.
pub fn rule_easy_bd(inst: &EnumInstance) -> Result<Step, KernelError> {
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
    Ok(Some((out, RuleEntry::new("bd-easy", edits))))
}

/// Rule 2: a free component of `R` is removed, `t -= α`.
pub fn rule_comp_removal(inst: &EnumInstance, c: usize) -> Result<Step, KernelError> {
    let g = &inst.graph;
    let o = oracle();
    let cs = chunks(inst, c);
    'comp: for comp in rest_components(inst) {
        for y in cs.nonempty() {
            if conflicts(o.as_ref(), g, &comp, y)? > 0 {
                continue 'comp;
            }
        }
        let a = o.alpha_of(g, &comp)?;
        let edits = vec![
            Edit::DeleteVertices { labels: labels(g, &comp) },
            Edit::DeltaT { delta: -(a as i64) },
        ];
        let out = apply_all(inst, &edits)?;
        return Ok(Some((out, RuleEntry::new("bd-free-component", edits))));
    }
    Ok(None)
}

/// Rule 3: a component all of whose conflicting chunks have degree
/// `>= |X| + 1` loses its edges to `X`.
pub fn rule_many_confs(inst: &EnumInstance, c: usize) -> Result<Step, KernelError> {
    let g = &inst.graph;
    let x = inst.modulator();
    let o = oracle();
    let cs = chunks(inst, c);
    let comps = rest_components(inst);
    let mut degree: Vec<Option<usize>> = vec![None; cs.len()];
    for comp in &comps {
        let mut hit = false;
        let mut ok = true;
        for (i, y) in cs.chunks.iter().enumerate() {
            if y.is_empty() || conflicts(o.as_ref(), g, comp, y)? == 0 {
                continue;
            }
            hit = true;
            let d = match degree[i] {
                Some(d) => d,
                None => {
                    let d = crate::mis::chunk_degree(o.as_ref(), g, &comps, y)?;
                    degree[i] = Some(d);
                    d
                }
            };
            if d < x.len() + 1 {
                ok = false;
                break;
            }
        }
        if !hit || !ok {
            continue;
        }
        let cut: Vec<(Label, Label)> = g
            .edges()
            .iter()
            .filter(|&&(u, v)| (x.contains(u) && comp.contains(v)) || (x.contains(v) && comp.contains(u)))
            .map(|&(u, v)| (g.label(u), g.label(v)))
            .collect();
        if cut.is_empty() {
            continue;
        }
        let edits = vec![Edit::DeleteEdges { edges: cut }];
        let out = apply_all(inst, &edits)?;
        return Ok(Some((out, RuleEntry::new("bd-many-conflicts", edits))));
    }
    Ok(None)
}

/// Pending components of every vertex of `t`, typed with the exact oracle.
pub fn classify_pending(g: &Graph, comp: &[usize], t: &TreeOfBridges) -> Result<Vec<PendingComponent>, KernelError> {
    let (sub, map) = g.induced_subgraph(comp)?;
    let back: Vec<usize> = comp.iter().copied().collect::<VertexSet>().into_vec();
    let tree_edges: Vec<(usize, usize)> = t
        .edges
        .iter()
        .filter_map(|&(u, v)| Some((map[u]?, map[v]?)))
        .collect();
    let star = sub.delete_edges(&tree_edges)?;
    let parts = star.connected_components();
    let o = oracle();
    let mut out = Vec::with_capacity(t.len());
    for &v in t.vertices.iter() {
        let local = map[v].ok_or_else(|| KernelError::Invariant("tree vertex outside its component".into()))?;
        let part = parts
            .iter()
            .find(|p| p.contains(local))
            .expect("every vertex lies in a component");
        let vertices: VertexSet = part.iter().map(|&i| back[i]).collect();
        let mut without = vertices.clone();
        without.remove(v);
        let with_v = o.alpha_of(g, &vertices)?;
        let without_v = o.alpha_of(g, &without)?;
        let vtype = if with_v == without_v { VertexType::A } else { VertexType::B };
        out.push(PendingComponent { root: v, vertices, vtype });
    }
    Ok(out)
}

/// Every T-conflict structure of `t`, with almost-freeness at the rule's threshold.
pub fn find_structures(inst: &EnumInstance, c: usize, comp: &[usize], t: &TreeOfBridges) -> Result<Vec<TConflictStructure>, KernelError> {
    let g = &inst.graph;
    let pending = classify_pending(g, comp, t)?;
    let get = |v: usize| pending.iter().find(|p| p.root == v).expect("pending component of a tree vertex");
    let is_b = |v: usize| get(v).vtype == VertexType::B;
    let has_inner = t.vertices.iter().any(|&v| t.degree(v) >= 2);
    let mut shapes = Vec::new();
    for &(v1, v2) in t.edges.iter() {
        if !is_b(v1) || !is_b(v2) {
            shapes.push(Shape::Type1 { v1, v2 });
        }
    }
    for &(v1, v2) in t.edges.iter() {
        if t.degree(v1) == 2 && t.degree(v2) == 2 && is_b(v1) && is_b(v2) {
            let u2 = t.neighbors(v1).into_iter().find(|&w| w != v2).expect("degree two");
            let u1 = t.neighbors(v2).into_iter().find(|&w| w != v1).expect("degree two");
            if u1 != u2 {
                shapes.push(Shape::Type2 { u2, v1, v2, u1 });
            }
        }
    }
    if has_inner {
        for &u in t.vertices.iter() {
            if t.degree(u) == 1 && is_b(u) {
                shapes.push(Shape::Type3 { u, parent: t.neighbors(u)[0] });
            }
        }
        for &v1 in t.vertices.iter() {
            if t.degree(v1) != 1 || !is_b(v1) {
                continue;
            }
            let v2 = t.neighbors(v1)[0];
            if t.degree(v2) == 2 && is_b(v2) {
                let u = t.neighbors(v2).into_iter().find(|&w| w != v1).expect("degree two");
                shapes.push(Shape::Type4 { v1, v2, u });
            }
        }
    }
    let cs = chunks(inst, c);
    let rest = rest_of(inst);
    let x = inst.modulator().len();
    let o = oracle();
    let mut out = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let vertices = match shape {
            Shape::Type1 { v1, v2 } | Shape::Type2 { v1, v2, .. } | Shape::Type4 { v1, v2, .. } => {
                get(v1).vertices.union(&get(v2).vertices)
            }
            Shape::Type3 { u, .. } => get(u).vertices.clone(),
        };
        let almost_free = is_almost_free(o.as_ref(), g, &cs, &rest, &vertices, shape.threshold(x))?;
        out.push(TConflictStructure { shape, vertices, almost_free });
    }
    Ok(out)
}

fn usable(s: &TConflictStructure, kind: u8) -> Result<(), KernelError> {
    if s.shape.kind() != kind {
        return Err(KernelError::Precondition(format!("expected a type {kind} structure")));
    }
    if !s.almost_free {
        return Err(KernelError::Precondition("structure is not almost-free".into()));
    }
    Ok(())
}

/// Rule 4: cut the tree edge `v1 v2`.
pub fn rule_type1(inst: &EnumInstance, s: &TConflictStructure) -> Result<(EnumInstance, RuleEntry), KernelError> {
    usable(s, 1)?;
    let Shape::Type1 { v1, v2 } = s.shape else { unreachable!() };
    let g = &inst.graph;
    let edits = vec![Edit::DeleteEdges {
        edges: vec![(g.label(v1), g.label(v2))],
    }];
    Ok((apply_all(inst, &edits)?, RuleEntry::new("bd-type1", edits)))
}

/// Rule 5: identify `v1` into `u1` and `v2` into `u2`, `t -= 1`.
pub fn rule_type2(inst: &EnumInstance, s: &TConflictStructure) -> Result<(EnumInstance, RuleEntry), KernelError> {
    usable(s, 2)?;
    let Shape::Type2 { u2, v1, v2, u1 } = s.shape else { unreachable!() };
    let g = &inst.graph;
    let edits = vec![
        Edit::Identify { keep: g.label(u1), merge: g.label(v1) },
        Edit::Identify { keep: g.label(u2), merge: g.label(v2) },
        Edit::DeltaT { delta: -1 },
    ];
    Ok((apply_all(inst, &edits)?, RuleEntry::new("bd-type2", edits)))
}

/// Rule 7: delete the leaf and its parent, `t -= 1`.
pub fn rule_type3(inst: &EnumInstance, s: &TConflictStructure) -> Result<(EnumInstance, RuleEntry), KernelError> {
    usable(s, 3)?;
    let Shape::Type3 { u, parent } = s.shape else { unreachable!() };
    let g = &inst.graph;
    let edits = vec![
        Edit::DeleteVertices { labels: labels(g, &[u, parent]) },
        Edit::DeltaT { delta: -1 },
    ];
    Ok((apply_all(inst, &edits)?, RuleEntry::new("bd-type3", edits)))
}

/// Rule 8: delete `v2`, identify `v1` into `u`, `t -= 1`.
pub fn rule_type4(inst: &EnumInstance, s: &TConflictStructure) -> Result<(EnumInstance, RuleEntry), KernelError> {
    usable(s, 4)?;
    let Shape::Type4 { v1, v2, u } = s.shape else { unreachable!() };
    let g = &inst.graph;
    let edits = vec![
        Edit::DeleteVertices { labels: vec![g.label(v2)] },
        Edit::Identify { keep: g.label(u), merge: g.label(v1) },
        Edit::DeltaT { delta: -1 },
    ];
    Ok((apply_all(inst, &edits)?, RuleEntry::new("bd-type4", edits)))
}

/// Rule 6: for a tree vertex of degree `> 3|𝒳||X|`, exhaust Rules 2-3 with
/// `v` added to the modulator, then restore it. Inapplicable if neither
/// rule fires.
pub fn rule_degree(inst: &EnumInstance, c: usize, t: &TreeOfBridges) -> Result<Step, KernelError> {
    let g = &inst.graph;
    let x = inst.modulator();
    let bound = 3 * chunks(inst, c).len() * x.len();
    let Some(&v) = t.vertices.iter().find(|&&v| t.degree(v) > bound) else {
        return Ok(None);
    };
    let hub = g.label(v);
    let restore = inst.modulator_labels();
    let mut widened = inst.clone();
    widened.modulator = Some(x.union(&VertexSet::singleton(v)));
    let mut edits = Vec::new();
    loop {
        let step = match rule_comp_removal(&widened, c)? {
            Some(s) => Some(s),
            None => rule_many_confs(&widened, c)?,
        };
        let Some((out, e)) = step else { break };
        edits.extend(e.edits);
        widened = out;
    }
    if edits.is_empty() {
        return Ok(None);
    }
    let restore_edit = Edit::SetModulator { labels: restore };
    let out = apply_edit(&widened, &restore_edit)?;
    edits.push(restore_edit);
    Ok(Some((out, RuleEntry::new("bd-degree", edits).with_note(format!("hub {hub}")))))
}

/// `T` without its type A leaves that hang at a type B vertex; `T` itself
/// if it has no inner vertex.
pub fn prune_leaves(g: &Graph, comp: &[usize], t: &TreeOfBridges) -> Result<TreeOfBridges, KernelError> {
    if !t.vertices.iter().any(|&v| t.degree(v) >= 2) {
        return Ok(t.clone());
    }
    let pending = classify_pending(g, comp, t)?;
    let ty = |v: usize| pending.iter().find(|p| p.root == v).map(|p| p.vtype);
    let keep: VertexSet = t
        .vertices
        .iter()
        .copied()
        .filter(|&v| {
            !(t.degree(v) == 1 && ty(v) == Some(VertexType::A) && ty(t.neighbors(v)[0]) == Some(VertexType::B))
        })
        .collect();
    Ok(TreeOfBridges::induced(g, keep))
}

type RuleFn = fn(&EnumInstance, &TConflictStructure) -> Result<(EnumInstance, RuleEntry), KernelError>;

fn first_applicable(
    inst: &EnumInstance,
    structures: &[TConflictStructure],
    kind: u8,
    rule: RuleFn,
) -> Result<Step, KernelError> {
    match structures.iter().find(|s| s.shape.kind() == kind && s.almost_free) {
        Some(s) => Ok(Some(rule(inst, s)?)),
        None => Ok(None),
    }
}

/// One pass over the components with the tree rules; `Ok(Err(x1))` when
/// none applies, carrying the union of the lowering trees.
fn tree_rules(inst: &EnumInstance, c: usize) -> Result<Result<(EnumInstance, RuleEntry), VertexSet>, KernelError> {
    let g = &inst.graph;
    let mut solver = BridgedepthSolver::new(g)?;
    let mut x1 = VertexSet::new();
    for comp in rest_components(inst) {
        let t = solver.lowering_tree(&comp)?.tree;
        let path = longest_path(&t);
        let on_path = find_structures(inst, c, &comp, &path)?;
        if let Some(s) = first_applicable(inst, &on_path, 1, rule_type1)? {
            return Ok(Ok(s));
        }
        if let Some(s) = first_applicable(inst, &on_path, 2, rule_type2)? {
            return Ok(Ok(s));
        }
        if let Some(s) = rule_degree(inst, c, &t)? {
            return Ok(Ok(s));
        }
        let t1 = prune_leaves(g, &comp, &t)?;
        let on_t1 = find_structures(inst, c, &comp, &t1)?;
        for (kind, rule) in [
            (1u8, rule_type1 as fn(&EnumInstance, &TConflictStructure) -> _),
            (3, rule_type3),
            (4, rule_type4),
        ] {
            if let Some(s) = first_applicable(inst, &on_t1, kind, rule)? {
                return Ok(Ok(s));
            }
        }
        x1 = x1.union(&t.vertices);
    }
    Ok(Err(x1))
}

fn audit(before: &EnumInstance, after: &EnumInstance, rule: &str) -> Result<BdAudit, KernelError> {
    let a = BdAudit {
        rule: rule.to_string(),
        alpha_rest: alpha_rest(after)?,
        t: after.t(),
        bd_before: bd_rest(before)?,
        bd_after: bd_rest(after)?,
    };
    if a.alpha_rest >= a.t {
        return Err(KernelError::Invariant(format!("{rule}: alpha(R) = {} >= t = {}", a.alpha_rest, a.t)));
    }
    if a.bd_after > a.bd_before {
        return Err(KernelError::Invariant(format!(
            "{rule}: bridgedepth of R grew from {} to {}",
            a.bd_before, a.bd_after
        )));
    }
    Ok(a)
}

/// The level-by-level compression; `c` bounds the bridgedepth of `G \ X`.
pub fn compress_is_bd(inst: &EnumInstance, c: usize) -> Result<Compression<BdState>, KernelError> {
    if inst.problem != Problem::Is || inst.modulator.is_none() {
        return Err(KernelError::Precondition("bridgedepth kernel expects an is instance with a modulator".into()));
    }
    inst.validate()?;
    let orig = &inst.graph;
    let bd = bd_rest(inst)?;
    if bd > c {
        return Err(KernelError::Precondition(format!("G \\ X has bridgedepth {bd} > c = {c}")));
    }
    let mut log = RuleLog::default();
    let mut state = BdState {
        modulator: inst.modulator(),
        ..BdState::default()
    };
    let mut cur = inst.clone();
    let mut degenerate = false;
    if let Some((out, e)) = rule_easy_bd(&cur)? {
        log.push(e);
        cur = out;
        degenerate = true;
    } else {
        let cap = orig.n() * orig.m().max(1) * (c + 2) + orig.n();
        let mut steps = 0usize;
        let mut level = c;
        while level > 0 {
            log.push(RuleEntry::new("bd-level", vec![]).with_note(format!("c = {level}")));
            let x1 = loop {
                steps += 1;
                if steps > cap {
                    return Err(KernelError::Invariant(format!("rule cascade exceeded {cap} steps")));
                }
                let step = match rule_comp_removal(&cur, level)? {
                    Some(s) => Some(s),
                    None => rule_many_confs(&cur, level)?,
                };
                if let Some((out, e)) = step {
                    state.audits.push(audit(&cur, &out, &e.rule)?);
                    log.push(e);
                    cur = out;
                    continue;
                }
                let comps = rest_components(&cur).len();
                let bound = chunks(&cur, level).len() * cur.modulator().len();
                if comps > bound {
                    return Err(KernelError::Invariant(format!("{comps} components exceed |𝒳|·|X| = {bound}")));
                }
                state.component_checks.push((comps, bound));
                match tree_rules(&cur, level)? {
                    Ok((out, e)) => {
                        state.audits.push(audit(&cur, &out, &e.rule)?);
                        log.push(e);
                        cur = out;
                    }
                    Err(x1) => break x1,
                }
            };
            let edits = vec![Edit::SetModulator {
                labels: labels(&cur.graph, &cur.modulator().union(&x1)),
            }];
            cur = apply_all(&cur, &edits)?;
            log.push(RuleEntry::new("bd-move-trees", edits));
            level -= 1;
            state.levels += 1;
        }
        if !rest_of(&cur).is_empty() {
            return Err(KernelError::Invariant("vertices outside the modulator after c levels".into()));
        }
    }
    let core_h = cur.graph.ids_of(&inst.modulator_labels());
    if core_h.len() != state.modulator.len() {
        return Err(KernelError::Invariant("a modulator vertex was removed".into()));
    }
    let core = CoreMap::by_labels(orig, &cur.graph, core_h)?;
    let log = finish_log(log, header("bd", &cur, Some(c), degenerate));
    Ok(Compression {
        original: inst.clone(),
        compressed: cur,
        core,
        log,
        degenerate,
        state,
    })
}

/// Some original solution meets `X` exactly in `y`.
pub fn is_good_bd(comp: &Compression<BdState>, y: &VertexSet) -> Result<bool, KernelError> {
    let x = &comp.state.modulator;
    if !y.is_subset(x) {
        return Ok(false);
    }
    let g = &comp.original.graph;
    Ok(is_extension(oracle().as_ref(), g, y, &x.difference(y), comp.original.t())?)
}

/// Accepts `s` iff its trace is good and `s` is the lexicographically first
/// compressed solution with that trace.
pub fn choose_bd(comp: &Compression<BdState>, s: &VertexSet) -> Result<bool, KernelError> {
    if !is_good_bd(comp, &comp.core.trace(s))? {
        return Ok(false);
    }
    let h = &comp.compressed;
    let xh = &comp.core.core_in_h;
    let yh = s.intersection(xh);
    let first = first_solution(&h.graph, h.t(), &yh, &xh.difference(&yh), oracle())?;
    Ok(first.as_ref() == Some(s))
}

/// `{S ∈ Sol(G, t) : S ∩ X = y}` by flashlight on `G \ (X ∪ N(y))`.
pub fn lift_bd(comp: &Compression<BdState>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
    let g = &comp.original.graph;
    let avoid = comp.state.modulator.difference(y);
    let sigma = VertexOrder::by_label(g);
    let src = flashlight_source(g, comp.original.t(), &sigma, &avoid, y, oracle())?;
    Ok(SolutionStream::new(Box::new(src)))
}

impl PdKernel for BdKernel {
    type State = BdState;

    fn name(&self) -> &'static str {
        "bd"
    }

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<BdState>, KernelError> {
        let c = match self.c.or(inst.c) {
            Some(c) => c,
            None => bd_rest(inst)?,
        };
        compress_is_bd(inst, c)
    }

    fn is_good_trace(&self, comp: &Compression<BdState>, y: &VertexSet) -> Result<bool, KernelError> {
        is_good_bd(comp, y)
    }

    fn canonical_check(&self, comp: &Compression<BdState>, s: &VertexSet) -> Result<bool, KernelError> {
        choose_bd(comp, s)
    }

    fn lift(&self, comp: &Arc<Compression<BdState>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
        lift_bd(comp, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{run_pd_kernel, verify_partition};
    use crate::io::parse;

    fn tree(g: &Graph, vs: &[usize]) -> TreeOfBridges {
        TreeOfBridges::induced(g, vs.iter().copied().collect())
    }

    #[test]
    fn pending_types() {
        // 1-2 tree edge; 2 carries a triangle 2-3-4, 1 is bare.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let comp = [0, 1, 2, 3];
        let p = classify_pending(&g, &comp, &tree(&g, &[0, 1])).unwrap();
        assert_eq!(p[0].vertices, VertexSet::singleton(0));
        assert_eq!(p[0].vtype, VertexType::B);
        assert_eq!(p[1].vertices, VertexSet::from(vec![1, 2, 3]));
        assert_eq!(p[1].vtype, VertexType::A);
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let p = classify_pending(&edge, &[0, 1], &tree(&edge, &[0])).unwrap();
        assert_eq!(p[0].vtype, VertexType::A);
    }

    #[test]
    fn structures_found() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let inst = EnumInstance::is(g.clone(), 2).with_modulator(VertexSet::new());
        let s = find_structures(&inst, 1, &[0, 1, 2, 3], &tree(&g, &[0, 1])).unwrap();
        assert!(s.iter().any(|s| s.shape == Shape::Type1 { v1: 0, v2: 1 }));
        let single = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let inst = EnumInstance::is(single.clone(), 2).with_modulator(VertexSet::new());
        let s = find_structures(&inst, 1, &[0, 1, 2], &tree(&single, &[0])).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn easy_rule_degenerates() {
        let inst = parse("p is 3 2\ne 1 2\ne 2 3\nx 2\nt 2\n").unwrap();
        let comp = compress_is_bd(&inst, 1).unwrap();
        assert!(comp.degenerate);
        assert_eq!(comp.compressed.graph.n(), 1);
        assert_eq!(comp.compressed.t(), 0);
    }

    #[test]
    fn isolated_component_removed() {
        let inst = parse("p is 4 2\ne 1 2\ne 1 3\nx 1\nt 3\n").unwrap();
        let (out, e) = rule_comp_removal(&inst, 1).unwrap().unwrap();
        assert_eq!(e.rule, "bd-free-component");
        assert_eq!(out.graph.labels(), &[1, 2, 3]);
        assert_eq!(out.t(), 2);
    }

    #[test]
    fn type2_identifies_across() {
        // Path 1-2-3-4 in R plus a modulator vertex 5 on both ends.
        let inst = parse("p is 5 5\ne 1 2\ne 2 3\ne 3 4\ne 5 1\ne 5 4\nx 5\nt 3\n").unwrap();
        let g = &inst.graph;
        let t = tree(g, &[0, 1, 2, 3]);
        let s = find_structures(&inst, 1, &[0, 1, 2, 3], &t).unwrap();
        let two = s.iter().find(|s| s.shape.kind() == 2).expect("type 2 present");
        assert_eq!(two.shape, Shape::Type2 { u2: 0, v1: 1, v2: 2, u1: 3 });
        let forced = TConflictStructure { almost_free: true, ..two.clone() };
        let (out, _) = rule_type2(&inst, &forced).unwrap();
        assert_eq!(out.t(), 2);
        assert_eq!(out.graph.labels(), &[1, 4, 5]);
        assert!(out.graph.has_edge(0, 1));
    }

    #[test]
    fn type4_on_triangle_pendings() {
        // u = 1; v2 = 2 and v1 = 3 each see two corners of a triangle.
        let text = "p is 10 13\ne 1 2\ne 2 3\ne 2 4\ne 2 5\ne 4 5\ne 4 6\ne 5 6\n\
                    e 3 7\ne 3 8\ne 7 8\ne 7 9\ne 8 9\ne 10 1\nx 10\nt 4\n";
        let inst = parse(text).unwrap();
        let g = &inst.graph;
        let t = tree(g, &[0, 1, 2]);
        let s = find_structures(&inst, 1, &(0..9).collect::<Vec<_>>(), &t).unwrap();
        let want = Shape::Type4 { v1: 2, v2: 1, u: 0 };
        let four = s.iter().find(|s| s.shape == want).expect("type 4 present");
        let forced = TConflictStructure { almost_free: true, ..four.clone() };
        let (out, _) = rule_type4(&inst, &forced).unwrap();
        assert_eq!(out.t(), 3);
        let h = &out.graph;
        let id = |l| h.id_of(l).unwrap();
        assert!(h.id_of(2).is_none() && h.id_of(3).is_none());
        assert!(h.has_edge(id(1), id(7)) && h.has_edge(id(1), id(8)));
        assert!(h.has_edge(id(4), id(5)) && !h.has_edge(id(1), id(4)));
    }

    #[test]
    fn degree_rule_strips_hub() {
        // Hub 1 with seven leaves; modulator 9 sees only leaf 2.
        let mut text = String::from("p is 9 8\n");
        for l in 2..=8 {
            text.push_str(&format!("e 1 {l}\n"));
        }
        text.push_str("e 9 2\nx 9\nt 8\n");
        let inst = parse(&text).unwrap();
        let g = &inst.graph;
        let t = tree(g, &(0..8).collect::<Vec<_>>());
        let (out, e) = rule_degree(&inst, 1, &t).unwrap().expect("hub degree 7 > 6");
        assert_eq!(e.rule, "bd-degree");
        assert_eq!(out.modulator_labels(), vec![9]);
        assert!(out.graph.n() < inst.graph.n());
        let small = tree(g, &[0, 1, 2]);
        assert!(rule_degree(&inst, 1, &small).unwrap().is_none());
    }

    #[test]
    fn forest_end_to_end() {
        let text = "p is 7 6\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 6 2\ne 6 4\nx 6 7\nt 3\n";
        let inst = parse(text).unwrap();
        let r = verify_partition(&inst, &BdKernel { c: Some(1) }).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let out = run_pd_kernel(&BdKernel { c: Some(1) }, &inst).unwrap().collect_all().unwrap();
        assert!(out.iter().all(|s| inst.is_solution(s)));
    }
}
