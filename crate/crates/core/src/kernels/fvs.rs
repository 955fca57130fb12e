//! Independent set parameterized by a feedback vertex set: crown improvement,
//! six reduction rules, lex-min canonical solutions and two-stage lifting.

use std::sync::Arc;

use crate::flashlight::{
    flashlight_source, BoxSource, FlatMapSource, SolutionStream, Steps, StreamError, VertexOrder,
};
use crate::framework::{Compression, CoreMap, Edit, KernelError, PdKernel, RuleEntry, RuleLog, apply_edit};
use crate::graph::{Graph, VertexSet};
use crate::io::{EnumInstance, Problem};
use crate::matching::{forest_matching, improve_fvs, nt_crown};
use crate::mis::{alpha_forest_masked, conflicts, enumerate_chunks, is_extension, ChunkSet, MisOracle};

use super::{finish_log, first_solution, forest_oracle, header, labels, rest_of, translate};

pub const STAGE2_NOTE: &str =
    "crown extension enumerated in-repo with flashlight and the exact oracle; delay is FPT in |(H ∪ C) ∩ X|";

#[derive(Clone, Copy, Debug, Default)]
pub struct FvsKernel;

/// The post-crown instance `(G, X, t)` and the removed crown part, both
/// needed for lifting.
#[derive(Clone, Debug)]
pub struct FvsState {
    pub post: EnumInstance,
    /// Original id of each post-crown vertex.
    pub post_to_orig: Vec<usize>,
    /// `C ∪ H` of every crown step, original ids.
    pub removed: VertexSet,
}

fn alpha_f(inst: &EnumInstance) -> Result<usize, KernelError> {
    let rest = rest_of(inst);
    let g = &inst.graph;
    Ok(alpha_forest_masked(g, &VertexSet::from(rest).to_mask(g.n()))?)
}

fn chunks(inst: &EnumInstance) -> ChunkSet {
    enumerate_chunks(&inst.graph, &inst.modulator(), 2, &[])
}

fn apply_all(inst: &EnumInstance, edits: &[Edit]) -> Result<EnumInstance, KernelError> {
    let mut cur = inst.clone();
    for e in edits {
        cur = apply_edit(&cur, e)?;
    }
    Ok(cur)
}

/// Rule 1: `α(F) >= t` gives `(G[X], X, 0)`.
pub fn rule_easy_fvs(inst: &EnumInstance) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    if alpha_f(inst)? < inst.t() {
        return Ok(None);
    }
    let g = &inst.graph;
    let x = inst.modulator();
    let edits = vec![
        Edit::Restrict { labels: labels(g, &x) },
        Edit::DeltaT { delta: -(inst.t() as i64) },
    ];
    let out = apply_all(inst, &edits)?;
    Ok(Some((out, RuleEntry::new("fvs-easy", edits))))
}

/// Rule 2: restrict to the body of the LP crown, `t -= |C|`.
/// Returns the removed `C ∪ H` (ids of `inst`).
pub fn rule_crown_body(inst: &EnumInstance) -> Result<Option<(EnumInstance, VertexSet, RuleEntry)>, KernelError> {
    let g = &inst.graph;
    let cd = nt_crown(g);
    if cd.crown.is_empty() {
        return Ok(None);
    }
    let gone = cd.crown.union(&cd.head);
    let edits = vec![
        Edit::DeleteVertices { labels: labels(g, &gone) },
        Edit::DeltaT { delta: -(cd.crown.len() as i64) },
    ];
    let out = apply_all(inst, &edits)?;
    Ok(Some((out, gone, RuleEntry::new("fvs-crown", edits))))
}

/// Rule 3: a chunk with at least `|X|` conflicts on `F` is deleted (one vertex)
/// or made adjacent (two vertices).
pub fn rule_chunk_removal(inst: &EnumInstance) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    let g = &inst.graph;
    let x = inst.modulator();
    let rest = rest_of(inst);
    let oracle = forest_oracle();
    for c in chunks(inst).nonempty() {
        if conflicts(oracle.as_ref(), g, &rest, c)? < x.len() {
            continue;
        }
        let edit = match c.as_slice() {
            [v] => Edit::DeleteVertices { labels: vec![g.label(*v)] },
            [a, b] => Edit::AddEdges { edges: vec![(g.label(*a), g.label(*b))] },
            _ => unreachable!("chunks have at most two vertices"),
        };
        let edits = vec![edit];
        let out = apply_all(inst, &edits)?;
        return Ok(Some((out, RuleEntry::new("fvs-chunk", edits))));
    }
    Ok(None)
}

/// Rule 4: a forest component no chunk conflicts with is removed, `t -= α`.
pub fn rule_tree_removal(inst: &EnumInstance) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    let g = &inst.graph;
    let rest = VertexSet::from(rest_of(inst));
    let oracle = forest_oracle();
    let cs = chunks(inst);
    let mut comps = g.components_in(&rest.to_mask(g.n()));
    comps.sort_by_key(|c| c.iter().map(|&v| g.label(v)).min());
    'comp: for comp in comps {
        for c in cs.nonempty() {
            if conflicts(oracle.as_ref(), g, &comp, c)? > 0 {
                continue 'comp;
            }
        }
        let a = oracle.alpha(g, &comp.to_mask(g.n()))?;
        let edits = vec![
            Edit::DeleteVertices { labels: labels(g, &comp) },
            Edit::DeltaT { delta: -(a as i64) },
        ];
        let out = apply_all(inst, &edits)?;
        return Ok(Some((out, RuleEntry::new("fvs-tree", edits))));
    }
    Ok(None)
}

/// Some chunk has both `a` and `b` in its neighbourhood.
fn blockable(g: &Graph, cs: &ChunkSet, a: usize, b: usize) -> bool {
    cs.nonempty().any(|c| {
        let n = g.neighborhood(c);
        n.contains(a) && n.contains(b)
    })
}

fn forest_nbrs(g: &Graph, x: &VertexSet, v: usize) -> Vec<usize> {
    g.neighbors(v).iter().copied().filter(|w| !x.contains(*w)).collect()
}

fn modulator_nbrs(g: &Graph, x: &VertexSet, v: usize) -> Vec<usize> {
    g.neighbors(v).iter().copied().filter(|w| x.contains(*w)).collect()
}

fn join(g: &Graph, a: usize, bs: &[usize]) -> Vec<(u32, u32)> {
    bs.iter().filter(|&&b| b != a).map(|&b| (g.label(a), g.label(b))).collect()
}

/// Rule 5: a forest edge `uv` with `deg_F <= 2` on both ends and `u, v` not
/// blockable; its neighbours `z` (of `u`) and `w` (of `v`) inherit the
/// opposite modulator neighbourhoods, `zw` is added, `u, v` go, `t -= 1`.
pub fn rule_deg2_edge(inst: &EnumInstance) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    let g = &inst.graph;
    let x = inst.modulator();
    let cs = chunks(inst);
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !x.contains(u) && !x.contains(v))
        .collect();
    edges.sort_by_key(|&(u, v)| (g.label(u).min(g.label(v)), g.label(u).max(g.label(v))));
    for (u, v) in edges {
        let (fu, fv) = (forest_nbrs(g, &x, u), forest_nbrs(g, &x, v));
        if fu.len() > 2 || fv.len() > 2 || blockable(g, &cs, u, v) {
            continue;
        }
        let z = fu.iter().copied().find(|&a| a != v);
        let w = fv.iter().copied().find(|&a| a != u);
        let mut add = Vec::new();
        if let Some(z) = z {
            add.extend(join(g, z, &modulator_nbrs(g, &x, v)));
        }
        if let Some(w) = w {
            add.extend(join(g, w, &modulator_nbrs(g, &x, u)));
        }
        if let (Some(z), Some(w)) = (z, w) {
            add.push((g.label(z), g.label(w)));
        }
        let mut edits = Vec::new();
        if !add.is_empty() {
            edits.push(Edit::AddEdges { edges: add });
        }
        edits.push(Edit::DeleteVertices { labels: labels(g, &[u, v]) });
        edits.push(Edit::DeltaT { delta: -1 });
        let out = apply_all(inst, &edits)?;
        return Ok(Some((out, RuleEntry::new("fvs-deg2", edits))));
    }
    Ok(None)
}

/// Rule 6: `uv` with `deg_F(u) = deg_F(v) = 3`, forest leaves `z ~ u`, `w ~ v`
/// and third neighbours `p, q`; `{u,z}, {v,w}, {z,w}` not blockable. `p` and `q`
/// inherit `N_X(z)` and `N_X(w)`, `z, u, v, w` go, `t -= 2`.
pub fn rule_deg3_gadget(inst: &EnumInstance) -> Result<Option<(EnumInstance, RuleEntry)>, KernelError> {
    let g = &inst.graph;
    let x = inst.modulator();
    let cs = chunks(inst);
    let leaf_and_other = |u: usize, v: usize| -> Option<(usize, usize)> {
        let mut others: Vec<usize> = forest_nbrs(g, &x, u).into_iter().filter(|&a| a != v).collect();
        others.sort_by_key(|&a| g.label(a));
        let z = others.iter().copied().find(|&a| forest_nbrs(g, &x, a) == [u])?;
        let p = others.iter().copied().find(|&a| a != z)?;
        Some((z, p))
    };
    let mut order: Vec<usize> = rest_of(inst);
    order.sort_by_key(|&v| g.label(v));
    for &u in &order {
        if forest_nbrs(g, &x, u).len() != 3 {
            continue;
        }
        let mut vs = forest_nbrs(g, &x, u);
        vs.sort_by_key(|&v| g.label(v));
        for v in vs {
            if forest_nbrs(g, &x, v).len() != 3 {
                continue;
            }
            let (Some((z, p)), Some((w, q))) = (leaf_and_other(u, v), leaf_and_other(v, u)) else {
                continue;
            };
            if blockable(g, &cs, u, z) || blockable(g, &cs, v, w) || blockable(g, &cs, z, w) {
                continue;
            }
            let mut add = join(g, p, &modulator_nbrs(g, &x, z));
            add.extend(join(g, q, &modulator_nbrs(g, &x, w)));
            let mut edits = Vec::new();
            if !add.is_empty() {
                edits.push(Edit::AddEdges { edges: add });
            }
            edits.push(Edit::DeleteVertices { labels: labels(g, &[z, u, v, w]) });
            edits.push(Edit::DeltaT { delta: -2 });
            let out = apply_all(inst, &edits)?;
            return Ok(Some((out, RuleEntry::new("fvs-deg3", edits))));
        }
    }
    Ok(None)
}

fn check_is_fvs(inst: &EnumInstance) -> Result<(), KernelError> {
    if inst.problem != Problem::Is {
        return Err(KernelError::Precondition("fvs kernel needs an is instance".into()));
    }
    if inst.modulator.is_none() {
        return Err(KernelError::Precondition("fvs kernel needs a modulator".into()));
    }
    inst.validate()?;
    let (f, _) = inst.graph.induced_subgraph(&rest_of(inst))?;
    if !f.is_forest() {
        return Err(KernelError::Precondition("modulator is not a feedback vertex set".into()));
    }
    Ok(())
}

fn audit(inst: &EnumInstance, what: &str) -> Result<(), KernelError> {
    if alpha_f(inst)? >= inst.t() {
        return Err(KernelError::Invariant(format!("alpha(F) >= t after {what}")));
    }
    Ok(())
}

/// Runs the full pipeline. On a degenerate outcome the compressed instance is
/// `(G[X], X, 0)` of the post-crown instance.
pub fn compress_is_fvs(inst: &EnumInstance) -> Result<Compression<FvsState>, KernelError> {
    check_is_fvs(inst)?;
    let orig = &inst.graph;
    let mut log = RuleLog::default();
    log.push(RuleEntry::new("fvs-stage2", vec![]).with_note(STAGE2_NOTE));

    let imp = improve_fvs(orig, &inst.modulator())?;
    let crown = &imp.crown;
    let mut removed = crown.crown.union(&crown.head);
    let mut post = inst.clone();
    {
        let edits = vec![
            Edit::DeleteVertices { labels: labels(orig, &removed) },
            Edit::DeltaT { delta: -(crown.crown.len() as i64) },
            Edit::SetModulator { labels: labels(&imp.graph, &imp.modulator) },
        ];
        post = apply_all(&post, &edits)?;
        log.push(RuleEntry::new("fvs-improve", edits).with_note(format!(
            "crown {} head {}",
            crown.crown.len(),
            crown.head.len()
        )));
    }
    let forest = rest_of(&post);
    if forest_matching(&post.graph, &forest).len() * 2 != forest.len() {
        return Err(KernelError::Invariant("post-crown forest has no perfect matching".into()));
    }

    let mut degenerate = None;
    if let Some((out, e)) = rule_easy_fvs(&post)? {
        log.push(e);
        degenerate = Some(out);
    } else if let Some((out, gone, e)) = rule_crown_body(&post)? {
        log.push(e);
        let gone_orig = translate(&post.graph, orig, &gone);
        removed = removed.union(&gone_orig);
        post = out;
        if let Some((out, e)) = rule_easy_fvs(&post)? {
            log.push(e);
            degenerate = Some(out);
        }
    }

    let is_degenerate = degenerate.is_some();
    let post_to_orig: Vec<usize> = translate(&post.graph, orig, &post.graph.vertices()).into_vec();
    let compressed = match degenerate {
        Some(d) => d,
        None => {
            let mut cur = post.clone();
            while let Some((out, e)) = rule_chunk_removal(&cur)? {
                log.push(e);
                cur = out;
                audit(&cur, "rule 3")?;
            }
            loop {
                let step = if let Some(s) = rule_chunk_removal(&cur)? {
                    Some(s)
                } else if let Some(s) = rule_tree_removal(&cur)? {
                    Some(s)
                } else if let Some(s) = rule_deg2_edge(&cur)? {
                    Some(s)
                } else {
                    rule_deg3_gadget(&cur)?
                };
                let Some((out, e)) = step else { break };
                let name = e.rule.clone();
                log.push(e);
                cur = out;
                audit(&cur, &name)?;
            }
            cur
        }
    };
    let core = CoreMap::by_labels(orig, &compressed.graph, compressed.modulator())?;
    let log = finish_log(log, header("fvs", &compressed, None, is_degenerate));
    Ok(Compression {
        original: inst.clone(),
        compressed,
        core,
        log,
        degenerate: is_degenerate,
        state: FvsState {
            post,
            post_to_orig,
            removed,
        },
    })
}

fn post_trace(comp: &Compression<FvsState>, y: &VertexSet) -> VertexSet {
    translate(&comp.original.graph, &comp.state.post.graph, y)
}

/// Good-trace test on the post-crown instance with the forest oracle.
pub fn is_good_fvs(comp: &Compression<FvsState>, y: &VertexSet) -> Result<bool, KernelError> {
    if !y.is_subset(&comp.core.core_in_g) {
        return Ok(false);
    }
    let post = &comp.state.post;
    let yp = post_trace(comp, y);
    let avoid = post.modulator().difference(&yp);
    Ok(is_extension(forest_oracle().as_ref(), &post.graph, &yp, &avoid, post.t())?)
}

/// Accepts `s` iff its trace is good and it is the lex-first compressed
/// solution with that trace.
pub fn choose_fvs(comp: &Compression<FvsState>, s: &VertexSet) -> Result<bool, KernelError> {
    let y = comp.core.trace(s);
    if !is_good_fvs(comp, &y)? {
        return Ok(false);
    }
    if comp.degenerate {
        return Ok(true);
    }
    let h = &comp.compressed;
    let xh = h.modulator();
    let yh = s.intersection(&xh);
    let avoid = xh.difference(&yh);
    let first = first_solution(&h.graph, h.t(), &yh, &avoid, forest_oracle())?;
    Ok(first.as_ref() == Some(s))
}

/// `{S ∈ Sol(G*, X*, t*) : S ∩ X' = y}`.
pub fn lift_fvs(comp: &Arc<Compression<FvsState>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
    let post = &comp.state.post;
    let yp = post_trace(comp, y);
    let avoid = post.modulator().difference(&yp);
    let sigma = VertexOrder::by_label(&post.graph);
    let stage1 = flashlight_source(&post.graph, post.t(), &sigma, &avoid, &yp, forest_oracle())?;
    let c = comp.clone();
    let expand = Box::new(move |p: VertexSet, _: &mut Steps| -> Result<Option<BoxSource>, StreamError> {
        let g = &c.original.graph;
        let p_orig: VertexSet = p.iter().map(|&v| c.state.post_to_orig[v]).collect();
        let outside: Vec<usize> = (0..g.n())
            .filter(|&v| !c.state.removed.contains(v) && !p_orig.contains(v))
            .collect();
        let sigma = VertexOrder::by_label(g);
        let src = flashlight_source(g, c.original.t(), &sigma, &outside, &p_orig, MisOracle::global())?;
        Ok(Some(Box::new(src) as BoxSource))
    });
    Ok(SolutionStream::new(Box::new(FlatMapSource::new(Box::new(stage1), expand))))
}

impl PdKernel for FvsKernel {
    type State = FvsState;

    fn name(&self) -> &'static str {
        "fvs"
    }

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<FvsState>, KernelError> {
        compress_is_fvs(inst)
    }

    fn is_good_trace(&self, comp: &Compression<FvsState>, y: &VertexSet) -> Result<bool, KernelError> {
        is_good_fvs(comp, y)
    }

    fn canonical_check(&self, comp: &Compression<FvsState>, s: &VertexSet) -> Result<bool, KernelError> {
        choose_fvs(comp, s)
    }

    fn lift(&self, comp: &Arc<Compression<FvsState>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
        lift_fvs(comp, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::verify_partition;
    use crate::io::parse;

    #[test]
    fn easy_rule_on_forest() {
        let inst = parse("p is 4 3\ne 1 2\ne 2 3\ne 3 4\nx\nt 2\n").unwrap();
        let (out, _) = rule_easy_fvs(&inst).unwrap().unwrap();
        assert_eq!(out.graph.n(), 0);
        assert_eq!(out.t(), 0);
        let tight = parse("p is 4 3\ne 1 2\ne 2 3\ne 3 4\nx\nt 3\n").unwrap();
        assert!(rule_easy_fvs(&tight).unwrap().is_none());
    }

    #[test]
    fn star_crown() {
        let inst = parse("p is 4 3\ne 1 2\ne 1 3\ne 1 4\nx 1\nt 3\n").unwrap();
        let comp = compress_is_fvs(&inst).unwrap();
        assert!(comp.degenerate);
        let r = verify_partition(&inst, &FvsKernel).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn bare_edge_deg2() {
        let inst = parse("p is 2 1\ne 1 2\nx\nt 2\n").unwrap();
        let (out, e) = rule_deg2_edge(&inst).unwrap().unwrap();
        assert_eq!(out.graph.n(), 0);
        assert_eq!(out.t(), 1);
        assert_eq!(e.rule, "fvs-deg2");
    }

    #[test]
    fn dominating_modulator_vertex_removed() {
        // x = 7 sees the whole path 1..6; conf = 3 >= |X| = 1.
        let inst = parse(
            "p is 7 11\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 6\ne 7 1\ne 7 2\ne 7 3\ne 7 4\ne 7 5\ne 7 6\nx 7\nt 4\n",
        )
        .unwrap();
        let (out, _) = rule_chunk_removal(&inst).unwrap().unwrap();
        assert_eq!(out.graph.n(), 6);
    }

    #[test]
    fn cycle_with_chord_partition() {
        let inst = parse("p is 6 7\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 6\ne 6 1\ne 1 4\nx 1\nt 2\n").unwrap();
        let r = verify_partition(&inst, &FvsKernel).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }
}
