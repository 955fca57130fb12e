use std::collections::BTreeSet;
use std::sync::Arc;

use enumkern_core::decomp::{bridgedepth, bridgedepth_of, lowering_tree, treedepth};
use enumkern_core::flashlight::{enum_is_lex, lex_compare, VertexOrder};
use enumkern_core::framework::{PdKernel, RuleLog};
use enumkern_core::graph::{Graph, VertexSet};
use enumkern_core::harness::{brute_sol_ids, generate, GenSpec, Model, TargetPolicy};
use enumkern_core::io::{dualize, parse, serialize, EnumInstance, Problem};
use enumkern_core::kernels::{pipeline_is_td, BdKernel, FvsKernel, VcKernel};
use enumkern_core::matching::{heavy_crown_or_matching, konig_cover, CrownOrMatching};
use enumkern_core::mis::{alpha_forest, conflicts, enumerate_chunks, MisOracle};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn graph_from(n: usize, bits: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut i = 0;
    for u in 0..n {
        for v in u + 1..n {
            if bits[i] {
                edges.push((u, v));
            }
            i += 1;
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn graphs(max_n: usize) -> impl Strategy<Value = Graph> {
    (0..=max_n, 0.05f64..0.7).prop_flat_map(|(n, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), n * n.saturating_sub(1) / 2)
            .prop_map(move |bits| graph_from(n, &bits))
    })
}

fn forests(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((any::<bool>(), any::<prop::sample::Index>()), n).prop_map(move |parents| {
            let edges: Vec<(usize, usize)> = (1..n)
                .filter(|&v| parents[v].0)
                .map(|v| (parents[v].1.index(v), v))
                .collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn brute_alpha(g: &Graph, keep: &[usize]) -> usize {
    (0u32..1 << keep.len())
        .filter_map(|m| {
            let s: Vec<usize> = (0..keep.len()).filter(|&i| m >> i & 1 == 1).map(|i| keep[i]).collect();
            g.is_independent(&s).then_some(s.len())
        })
        .max()
        .unwrap_or(0)
}

fn subset(n: usize, mask: u32) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn edits_keep_graph_simple(g in graphs(10), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>(), mask in any::<u32>()) {
        prop_assume!(g.n() >= 2);
        let n = g.n();
        let (u, v) = (a.index(n), b.index(n));
        let dropped = subset(n, mask & ((1 << n) - 1) & !(1 << u));
        let deleted = g.delete_vertices(&dropped).unwrap();
        deleted.audit().unwrap();
        let kept: BTreeSet<_> = deleted.labels().iter().copied().collect();
        prop_assert_eq!(kept.len(), n - dropped.len());
        prop_assert!(kept.contains(&g.label(u)));
        if u != v {
            let h = g.identify(u, v).unwrap();
            h.audit().unwrap();
            prop_assert_eq!(h.n(), n - 1);
            prop_assert!(h.id_of(g.label(u)).is_some());
            prop_assert!(h.id_of(g.label(v)).is_none());
            let m = g.m();
            if g.has_edge(u, v) {
                prop_assert!(h.m() + g.degree(v) >= m && h.m() < m);
            } else {
                prop_assert!(h.m() + g.degree(v) >= m && h.m() <= m);
            }
            let added = g.add_edges(&[(u, v)]).unwrap();
            added.audit().unwrap();
            prop_assert!(added.has_edge(u, v));
            let removed = added.delete_edges(&[(u, v)]).unwrap();
            removed.audit().unwrap();
            prop_assert!(!removed.has_edge(u, v));
        }
    }

    #[test]
    fn bridge_contraction_is_a_fixpoint(g in graphs(12)) {
        let (cb, pre) = g.contract_bridges();
        cb.audit().unwrap();
        let mut all: Vec<usize> = pre.iter().flat_map(|p| p.iter().copied()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..g.n()).collect::<Vec<_>>());
        let (cb2, _) = cb.contract_bridges();
        prop_assert_eq!(cb2.n(), cb.n());
        for p in &pre {
            let (h, _) = g.induced_subgraph(p).unwrap();
            prop_assert!(h.is_connected() && h.is_forest());
        }
    }

    #[test]
    fn vc_solutions_complement_dual_is(g in graphs(10), k in 0usize..10) {
        let k = k.min(g.n());
        let vc = EnumInstance::vc(g.clone(), k);
        let is = dualize(&vc).unwrap();
        prop_assert_eq!(is.t(), g.n() - k);
        let all = g.vertices();
        let mut comp: Vec<VertexSet> = brute_sol_ids(&is).unwrap().iter().map(|s| all.difference(s)).collect();
        comp.sort();
        prop_assert_eq!(brute_sol_ids(&vc).unwrap(), comp);
    }

    #[test]
    fn serialization_round_trips(g in graphs(10), t in 0usize..6, mask in any::<u32>()) {
        let x = VertexSet::from(subset(g.n(), mask));
        let inst = EnumInstance::is(g, t).with_modulator(x);
        let text = serialize(&inst);
        let back = parse(&text).unwrap();
        prop_assert_eq!(serialize(&back), text);
        prop_assert_eq!(back.graph.m(), inst.graph.m());
        prop_assert_eq!(back.modulator().len(), inst.modulator().len());
    }

    #[test]
    fn alpha_matches_exhaustive(g in graphs(14)) {
        let all: Vec<usize> = (0..g.n()).collect();
        prop_assert_eq!(MisOracle::global().alpha_exact(&g).unwrap(), brute_alpha(&g, &all));
    }

    #[test]
    fn forest_alpha_matches_exact(g in forests(24)) {
        prop_assert_eq!(alpha_forest(&g).unwrap(), MisOracle::global().alpha_exact(&g).unwrap());
    }

    #[test]
    fn conflicts_bounded_by_region(g in graphs(11), split in any::<u32>(), probe in any::<u32>()) {
        let n = g.n();
        let region = subset(n, split);
        let probe: Vec<usize> = subset(n, probe & !split);
        let c = conflicts(MisOracle::global().as_ref(), &g, &region, &probe).unwrap();
        prop_assert!(c <= region.len());
        let want = brute_alpha(&g, &region) - brute_alpha(&g, &region.iter().copied().filter(|&v| !g.neighborhood(&probe).contains(v)).collect::<Vec<_>>());
        prop_assert_eq!(c, want);
        if g.neighborhood(&probe).is_disjoint(&VertexSet::from(region.clone())) {
            prop_assert_eq!(c, 0);
        }
    }

    #[test]
    fn chunks_match_filtered_subsets(g in graphs(9), xm in any::<u32>(), max in 0usize..5, forb in proptest::collection::vec(any::<u32>(), 0..3)) {
        let x = subset(g.n(), xm);
        let forbidden: Vec<VertexSet> = forb
            .iter()
            .map(|&m| VertexSet::from(subset(g.n(), m & xm)))
            .filter(|h| !h.is_empty())
            .collect();
        let got = enumerate_chunks(&g, &x, max, &forbidden);
        let mut got_sorted = got.chunks.clone();
        got_sorted.sort();
        let before = got_sorted.len();
        got_sorted.dedup();
        prop_assert_eq!(before, got_sorted.len());
        let mut want: Vec<VertexSet> = (0u32..1 << x.len())
            .map(|m| VertexSet::from(subset(x.len(), m).into_iter().map(|i| x[i]).collect::<Vec<_>>()))
            .filter(|s| s.len() <= max && g.is_independent(s) && forbidden.iter().all(|h| !h.is_subset(s)))
            .collect();
        want.sort();
        prop_assert_eq!(got_sorted, want);
    }

    #[test]
    fn heavy_crown_or_large_matching(g in graphs(16), t in 0usize..6) {
        let iso: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == 0).collect();
        let g = g.delete_vertices(&iso).unwrap();
        prop_assume!(g.n() > 3 * t);
        match heavy_crown_or_matching(&g, t).unwrap() {
            CrownOrMatching::Crown(hc) => {
                prop_assert!(hc.validate(&g).is_ok());
                prop_assert!(hc.base.body.len() + 2 * hc.base.head.len() <= 3 * t);
            }
            CrownOrMatching::Matching(m) => {
                prop_assert!(m.is_valid(&g));
                prop_assert!(m.len() > t);
            }
        }
    }

    #[test]
    fn konig_cover_is_minimum(g in graphs(6)) {
        let n = g.n();
        let mut edges = Vec::new();
        for (u, v) in g.edges().iter().copied() {
            edges.push((u, n + v));
            edges.push((v, n + u));
        }
        let dc = Graph::from_edges(2 * n, &edges).unwrap();
        let left: Vec<usize> = (0..n).collect();
        let right: Vec<usize> = (n..2 * n).collect();
        let (cover, m) = konig_cover(&dc, &left, &right);
        prop_assert!(m.is_valid(&dc));
        prop_assert_eq!(cover.len(), m.len());
        prop_assert!(dc.edges().iter().all(|&(u, v)| cover.contains(u) || cover.contains(v)));
        let best = (0u32..1 << (2 * n))
            .filter(|&s| dc.edges().iter().all(|&(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1))
            .map(|s| s.count_ones() as usize)
            .min()
            .unwrap();
        prop_assert_eq!(cover.len(), best);
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn bridgedepth_is_minor_monotone(g in graphs(9), a in any::<prop::sample::Index>()) {
        prop_assume!(g.n() > 0);
        let bd = bridgedepth(&g).unwrap();
        let v = a.index(g.n());
        prop_assert!(bridgedepth(&g.delete_vertices(&[v]).unwrap()).unwrap() <= bd);
        if let Some(&w) = g.neighbors(v).first() {
            prop_assert!(bridgedepth(&g.delete_edges(&[(v, w)]).unwrap()).unwrap() <= bd);
        }
        prop_assert_eq!(bridgedepth(&g.contract_bridges().0).unwrap(), bd);
    }

    #[test]
    fn modulator_bounds_bridgedepth(g in graphs(9), xm in any::<u32>()) {
        let x = subset(g.n(), xm);
        let rest: Vec<usize> = (0..g.n()).filter(|v| !x.contains(v)).collect();
        prop_assert!(bridgedepth(&g).unwrap() <= x.len() + bridgedepth_of(&g, &rest).unwrap());
    }

    #[test]
    fn lowering_trees_drop_by_one(g in graphs(9)) {
        for comp in g.connected_components() {
            let lt = lowering_tree(&g, &comp).unwrap();
            prop_assert!(lt.tree.validate(&g));
            let rest: Vec<usize> = comp.iter().copied().filter(|&v| !lt.tree.vertices.contains(v)).collect();
            let drop = bridgedepth_of(&g, &comp).unwrap() - bridgedepth_of(&g, &rest).unwrap();
            prop_assert_eq!(drop, 1);
            prop_assert_eq!(lt.drop, 1);
        }
    }

    #[test]
    fn treedepth_decomposition_is_valid(g in graphs(9)) {
        let (td, dec) = treedepth(&g).unwrap();
        prop_assert!(dec.validate(&g));
        prop_assert_eq!(dec.depth, td);
        prop_assert!(bridgedepth(&g).unwrap() <= td);
    }

    #[test]
    fn flashlight_follows_any_order(g in graphs(10), t in 0usize..5, perm in Just(()).prop_perturb(|_, mut rng| rng.next_u64())) {
        let n = g.n();
        let mut order: Vec<usize> = (0..n).collect();
        let mut state = perm;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let sigma = VertexOrder::from_order(order);
        let got = enum_is_lex(&g, t, &sigma, &[], &[], MisOracle::global()).unwrap().collect_all().unwrap();
        let set: BTreeSet<&VertexSet> = got.iter().collect();
        prop_assert_eq!(set.len(), got.len());
        let mut want = brute_sol_ids(&EnumInstance::is(g.clone(), t)).unwrap();
        want.sort_by(|a, b| lex_compare(a, b, &sigma));
        prop_assert_eq!(got, want);
    }
}

fn spec(model: Model, seed: u64, n: usize, x: usize, c: usize) -> GenSpec {
    GenSpec {
        model,
        problem: Problem::Is,
        n,
        modulator: x.min(n),
        density: 0.3,
        c,
        target: TargetPolicy::Random,
        seed,
    }
}

fn replay_matches<K: PdKernel>(kernel: &K, inst: &EnumInstance) -> Result<(), TestCaseError> {
    let a = kernel.compress(inst).unwrap();
    let b = kernel.compress(inst).unwrap();
    prop_assert_eq!(&a.compressed, &b.compressed);
    prop_assert_eq!(a.log.to_jsonl(), b.log.to_jsonl());
    let log = RuleLog::from_jsonl(&a.log.to_jsonl()).unwrap();
    prop_assert_eq!(&log, &a.log);
    let mut replayed = log.replay(inst).unwrap();
    let mut want = a.compressed.clone();
    replayed.normalize();
    want.normalize();
    prop_assert_eq!(serialize(&replayed), serialize(&want));
    Ok(())
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn logs_replay_to_the_compressed_instance(seed in 0u64..10_000, n in 4usize..13, x in 1usize..5, c in 1usize..3) {
        let vc = generate(&GenSpec { problem: Problem::Vc, n, seed, ..GenSpec::default() }).unwrap();
        replay_matches(&VcKernel, &vc)?;
        replay_matches(&FvsKernel, &generate(&spec(Model::Fvs, seed, n, x, 1)).unwrap())?;
        replay_matches(&pipeline_is_td(None), &generate(&spec(Model::Td, seed, n, x, c)).unwrap())?;
        replay_matches(&BdKernel::default(), &generate(&spec(Model::Bd, seed, n, x, c)).unwrap())?;
    }

    #[test]
    fn large_conflicts_force_alpha_of_rest(seed in 0u64..10_000, n in 4usize..12, x in 1usize..5, c in 1usize..3) {
        let inst = generate(&spec(Model::Bd, seed, n, x, c)).unwrap();
        let g = &inst.graph;
        let xs = inst.modulator();
        let rest: Vec<usize> = (0..g.n()).filter(|&v| !xs.contains(v)).collect();
        let alpha_r = brute_alpha(g, &rest);
        let oracle = MisOracle::global();
        for s in brute_sol_ids(&inst).unwrap() {
            let sx: Vec<usize> = s.iter().copied().filter(|&v| xs.contains(v)).collect();
            let conf = conflicts(oracle.as_ref(), g, &rest, &sx).unwrap();
            if conf >= sx.len() {
                prop_assert!(alpha_r >= inst.t(), "conf {} >= |S_X| {} but alpha(R) {} < t {}", conf, sx.len(), alpha_r, inst.t());
            }
        }
    }
}

#[test]
fn oracle_is_shared() {
    assert!(Arc::ptr_eq(&MisOracle::global(), &MisOracle::global()));
}
