//! Vertex cover parameterized by solution size: at most `3k` compressed vertices.

use std::sync::Arc;

use crate::flashlight::{enum_subsets_le, SolutionStream, VertexOrder};
use crate::framework::{Compression, CoreMap, Edit, KernelError, PdKernel, RuleEntry, RuleLog};
use crate::graph::VertexSet;
use crate::io::{parse, EnumInstance, Problem};
use crate::matching::{heavy_crown_or_matching, CrownOrMatching, HeavyCrown};

use super::{finish_log, header, labels};

/// Fixed witness for "no vertex cover of size k".
pub const TRIVIAL_NO: &str = "p vc 2 1\ne 1 2\nk 0\n";

#[derive(Clone, Copy, Debug, Default)]
pub struct VcKernel;

/// Removed vertices `L` (original ids), kept for closure and lifting.
#[derive(Clone, Debug, Default)]
pub struct VcState {
    pub removed: VertexSet,
    pub trivial_no: bool,
}

fn require_vc(inst: &EnumInstance) -> Result<(), KernelError> {
    if inst.problem != Problem::Vc {
        return Err(KernelError::Precondition(format!(
            "vc kernel needs a vc instance, got {}",
            inst.problem.keyword()
        )));
    }
    Ok(())
}

/// Deletes every isolated vertex; `k` is untouched.
pub fn rule_isolated(inst: &EnumInstance) -> Result<(EnumInstance, Option<RuleEntry>), KernelError> {
    require_vc(inst)?;
    let g = &inst.graph;
    let iso: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == 0).collect();
    if iso.is_empty() {
        return Ok((inst.clone(), None));
    }
    let mut out = inst.clone();
    out.graph = g.delete_vertices(&iso)?;
    let entry = RuleEntry::new(
        "vc-isolated",
        vec![Edit::DeleteVertices {
            labels: labels(g, &iso),
        }],
    );
    Ok((out, Some(entry)))
}

/// Deletes `L = C \ V(M*)` of a heavy crown.
pub fn rule_unmatched_crown(
    inst: &EnumInstance,
    hc: &HeavyCrown,
) -> Result<(EnumInstance, VertexSet, RuleEntry), KernelError> {
    require_vc(inst)?;
    let g = &inst.graph;
    hc.validate(g)?;
    if hc.t > inst.k() {
        return Err(KernelError::Precondition(format!("crown width bound {} exceeds k={}", hc.t, inst.k())));
    }
    let matched = hc.base.saturating.vertices();
    let l: VertexSet = hc.base.crown.iter().copied().filter(|&v| !matched.contains(v)).collect();
    if !g.is_independent(&l) || !g.neighborhood(&l).is_subset(&hc.base.head) {
        return Err(KernelError::Invariant("unmatched crown part is not a crown".into()));
    }
    let mut out = inst.clone();
    out.graph = g.delete_vertices(&l)?;
    let entry = RuleEntry::new(
        "vc-unmatched-crown",
        vec![Edit::DeleteVertices { labels: labels(g, &l) }],
    )
    .with_note(format!("crown {} head {} body {}", hc.base.crown.len(), hc.base.head.len(), hc.base.body.len()));
    Ok((out, l, entry))
}

/// Isolated-vertex removal, the `3k` size gate, then one heavy-crown step.
pub fn compress_vc_by_k(inst: &EnumInstance) -> Result<Compression<VcState>, KernelError> {
    require_vc(inst)?;
    inst.validate()?;
    let k = inst.k();
    let mut log = RuleLog::default();
    let (mut cur, iso) = rule_isolated(inst)?;
    if let Some(e) = iso {
        log.push(e);
    }
    let mut trivial_no = false;
    if cur.graph.n() > 3 * k {
        match heavy_crown_or_matching(&cur.graph, k)? {
            CrownOrMatching::Matching(m) => {
                let text = TRIVIAL_NO.to_string();
                log.push(
                    RuleEntry::new("vc-matching", vec![Edit::Replace { text: text.clone() }])
                        .with_note(format!("matching of size {} > k", m.len())),
                );
                cur = parse(&text).map_err(|e| KernelError::Invariant(e.to_string()))?;
                trivial_no = true;
            }
            CrownOrMatching::Crown(hc) => {
                let (next, _, entry) = rule_unmatched_crown(&cur, &hc)?;
                log.push(entry);
                cur = next;
            }
        }
    }
    let (core, removed) = if trivial_no {
        (CoreMap::default(), VertexSet::new())
    } else {
        let core = CoreMap::by_labels(&inst.graph, &cur.graph, cur.graph.vertices())?;
        let removed = inst.graph.vertices().difference(&core.core_in_g);
        (core, removed)
    };
    let log = finish_log(log, header("vc", &cur, None, false));
    Ok(Compression {
        original: inst.clone(),
        compressed: cur,
        core,
        log,
        degenerate: false,
        state: VcState { removed, trivial_no },
    })
}

/// Mandatory closure `Y' ∪ (L ∩ N(V(G') \ Y'))` of a trace, in original ids.
pub fn closure(comp: &Compression<VcState>, y: &VertexSet) -> VertexSet {
    let g = &comp.original.graph;
    let uncovered = comp.core.core_in_g.difference(y);
    let forced = g.neighborhood(&uncovered).intersection(&comp.state.removed);
    y.union(&forced)
}

/// `Some(closure)` iff the trace of `s` has a closure of size at most `k`.
pub fn choose_vc(comp: &Compression<VcState>, s: &VertexSet) -> Option<VertexSet> {
    if comp.state.trivial_no {
        return None;
    }
    let y = closure(comp, &comp.core.trace(s));
    (y.len() <= comp.original.k()).then_some(y)
}

/// `{Y ∪ J : J ⊆ L \ Y, |Y ∪ J| <= k}`.
pub fn lift_vc(comp: &Compression<VcState>, y: &VertexSet) -> SolutionStream {
    let k = comp.original.k();
    if y.len() > k {
        return SolutionStream::empty();
    }
    let free = comp.state.removed.difference(y);
    let sigma = VertexOrder::by_label(&comp.original.graph);
    let base = y.clone();
    enum_subsets_le(&free, k - y.len(), &sigma).map_sets(move |j| base.union(&j))
}

impl PdKernel for VcKernel {
    type State = VcState;

    fn name(&self) -> &'static str {
        "vc"
    }

    fn compress(&self, inst: &EnumInstance) -> Result<Compression<VcState>, KernelError> {
        compress_vc_by_k(inst)
    }

    fn is_good_trace(&self, comp: &Compression<VcState>, y: &VertexSet) -> Result<bool, KernelError> {
        if comp.state.trivial_no || !y.is_subset(&comp.core.core_in_g) {
            return Ok(false);
        }
        let g = &comp.original.graph;
        let core = &comp.core.core_in_g;
        let covers_core = g
            .edges()
            .iter()
            .filter(|&&(u, v)| core.contains(u) && core.contains(v))
            .all(|&(u, v)| y.contains(u) || y.contains(v));
        Ok(covers_core && closure(comp, y).len() <= comp.original.k())
    }

    fn canonical_check(&self, comp: &Compression<VcState>, s: &VertexSet) -> Result<bool, KernelError> {
        Ok(choose_vc(comp, s).is_some())
    }

    fn lift(&self, comp: &Arc<Compression<VcState>>, y: &VertexSet) -> Result<SolutionStream, KernelError> {
        Ok(lift_vc(comp, &closure(comp, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{run_pd_kernel, verify_partition};

    fn star4() -> EnumInstance {
        parse("p vc 5 4\ne 1 2\ne 1 3\ne 1 4\ne 1 5\nk 1\n").unwrap()
    }

    #[test]
    fn isolated_removed() {
        let inst = parse("p vc 3 1\ne 1 2\nk 1\n").unwrap();
        let (out, e) = rule_isolated(&inst).unwrap();
        assert_eq!(out.graph.labels(), &[1, 2]);
        assert!(e.is_some());
        let edgeless = parse("p vc 3 0\nk 0\n").unwrap();
        let (out, _) = rule_isolated(&edgeless).unwrap();
        assert_eq!(out.graph.n(), 0);
    }

    #[test]
    fn star_compresses_to_an_edge() {
        let comp = compress_vc_by_k(&star4()).unwrap();
        assert_eq!(comp.compressed.graph.n(), 2);
        assert_eq!(comp.compressed.graph.m(), 1);
        let center = VertexSet::singleton(0);
        assert_eq!(closure(&comp, &center), center);
        let leaf_h = VertexSet::singleton(1);
        let y = choose_vc(&comp, &leaf_h);
        assert!(y.is_none());
        let lifted = lift_vc(&comp, &center).collect_all().unwrap();
        assert_eq!(lifted, vec![center]);
    }

    #[test]
    fn p3_left_alone() {
        let inst = parse("p vc 3 2\ne 1 2\ne 2 3\nk 1\n").unwrap();
        let comp = compress_vc_by_k(&inst).unwrap();
        assert_eq!(comp.compressed.graph.n(), 3);
    }

    #[test]
    fn matching_gives_trivial_no() {
        let inst = parse("p vc 8 4\ne 1 2\ne 3 4\ne 5 6\ne 7 8\nk 2\n").unwrap();
        let comp = compress_vc_by_k(&inst).unwrap();
        assert!(comp.state.trivial_no);
        assert!(run_pd_kernel(&VcKernel, &inst).unwrap().collect_all().unwrap().is_empty());
        assert!(verify_partition(&inst, &VcKernel).unwrap().passed());
    }

    #[test]
    fn subsets_counted() {
        let inst = parse("p vc 4 1\ne 1 2\nk 3\n").unwrap();
        let comp = compress_vc_by_k(&inst).unwrap();
        let r = verify_partition(&inst, &VcKernel).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let y = comp.core.core_in_g.clone();
        assert_eq!(lift_vc(&comp, &y).collect_all().unwrap().len(), 3);
        let one = VertexSet::singleton(0);
        assert_eq!(lift_vc(&comp, &one).collect_all().unwrap().len(), 4);
    }

    #[test]
    fn star_partition() {
        let r = verify_partition(&star4(), &VcKernel).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }
}
