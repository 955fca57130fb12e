use std::collections::{BTreeMap, BTreeSet};

use enumkern_core::framework::{run_pd_kernel, verify_partition, PdKernel};
use enumkern_core::graph::VertexSet;
use enumkern_core::harness::{brute_sol_ids, generate, GenSpec, Model, TargetPolicy};
use enumkern_core::io::{EnumInstance, Problem};
use enumkern_core::kernels::{BdKernel, FvsKernel, VcKernel};

fn check<K: PdKernel + Clone + 'static>(kernel: &K, inst: &EnumInstance, tag: &str) {
    let brute: BTreeSet<VertexSet> = brute_sol_ids(inst).unwrap().into_iter().collect();
    let out = run_pd_kernel(kernel, inst).unwrap().collect_all().unwrap();
    let set: BTreeSet<VertexSet> = out.iter().cloned().collect();
    assert_eq!(set.len(), out.len(), "{tag}: duplicate output");
    assert_eq!(set, brute, "{tag}: output differs from brute force");
    let r = verify_partition(inst, kernel).unwrap();
    assert!(r.passed(), "{tag}: {:?}", r.failures);
}

#[test]
fn vc_sweep() {
    for seed in 0..120u64 {
        let spec = GenSpec {
            problem: Problem::Vc,
            n: 4 + (seed % 9) as usize,
            density: [0.15, 0.3, 0.5][seed as usize % 3],
            seed,
            ..GenSpec::default()
        };
        let inst = generate(&spec).unwrap();
        check(&VcKernel, &inst, &format!("vc seed {seed}"));
    }
}

#[test]
fn fvs_sweep() {
    for seed in 0..150u64 {
        let spec = GenSpec {
            model: Model::Fvs,
            problem: Problem::Is,
            n: 5 + (seed % 8) as usize,
            modulator: 1 + (seed % 4) as usize,
            density: [0.2, 0.35, 0.5][seed as usize % 3],
            target: TargetPolicy::Random,
            seed,
            ..GenSpec::default()
        };
        let inst = generate(&spec).unwrap();
        check(&FvsKernel, &inst, &format!("fvs seed {seed}"));
    }
}

fn fvs_spec(seed: u64) -> GenSpec {
    GenSpec {
        model: Model::Fvs,
        problem: Problem::Is,
        n: 8 + (seed % 9) as usize,
        modulator: 1 + (seed % 4) as usize,
        density: [0.05, 0.1, 0.2, 0.3][seed as usize % 4],
        target: if seed % 2 == 0 { TargetPolicy::Optimum } else { TargetPolicy::Slack(1) },
        seed,
        ..GenSpec::default()
    }
}

// Seeds found by scanning 20000 generator outputs for the rarely firing rules.
#[test]
fn fvs_rare_rules_fire_and_stay_exact() {
    for seed in [2931u64, 3086, 6027, 16538] {
        let inst = generate(&fvs_spec(seed)).unwrap();
        let c = FvsKernel.compress(&inst).unwrap();
        assert_eq!(c.log.count("fvs-deg3"), 1, "seed {seed}");
        check(&FvsKernel, &inst, &format!("fvs seed {seed}"));
    }
    let inst = generate(&fvs_spec(12866)).unwrap();
    assert_eq!(FvsKernel.compress(&inst).unwrap().log.count("fvs-chunk"), 2);
    check(&FvsKernel, &inst, "fvs seed 12866");
}

#[test]
fn fvs_sparse_sweep() {
    for seed in 0..120u64 {
        let inst = generate(&fvs_spec(seed)).unwrap();
        check(&FvsKernel, &inst, &format!("fvs sparse seed {seed}"));
    }
}

fn td_spec(seed: u64) -> GenSpec {
    GenSpec {
        model: Model::Td,
        problem: Problem::Is,
        n: 5 + (seed % 8) as usize,
        modulator: 1 + (seed % 4) as usize,
        density: [0.15, 0.3, 0.45][seed as usize % 3],
        c: 1 + (seed % 2) as usize,
        target: TargetPolicy::Random,
        seed,
    }
}

#[test]
fn td_sweep() {
    use enumkern_core::kernels::pipeline_is_td;
    use std::time::Instant;
    for seed in 0..150u64 {
        let inst = generate(&td_spec(seed)).unwrap();
        let start = Instant::now();
        check(&pipeline_is_td(None), &inst, &format!("td seed {seed}"));
        let ms = start.elapsed().as_millis();
        if ms > 200 {
            println!("td seed {seed} n {} took {ms} ms", inst.graph.n());
        }
    }
}

#[test]
fn td_rules_fire() {
    use enumkern_core::kernels::pipeline_is_td;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for seed in 0..150u64 {
        let inst = generate(&td_spec(seed)).unwrap();
        let c = pipeline_is_td(None).compress(&inst).unwrap();
        for e in &c.log.entries {
            *counts.entry(e.rule.clone()).or_default() += 1;
        }
    }
    for rule in ["td-easy", "td-bad-chunk", "td-good-component", "td-move-roots"] {
        assert!(counts.get(rule).copied().unwrap_or(0) > 0, "{rule} never fired: {counts:?}");
    }
}

fn bd_spec(seed: u64) -> GenSpec {
    GenSpec {
        model: Model::Bd,
        problem: Problem::Is,
        n: 5 + (seed % 8) as usize,
        modulator: 1 + (seed % 4) as usize,
        density: [0.1, 0.25, 0.4][seed as usize % 3],
        c: 1 + (seed % 2) as usize,
        target: TargetPolicy::Random,
        seed,
    }
}

#[test]
fn bd_sweep() {
    for seed in 0..150u64 {
        let inst = generate(&bd_spec(seed)).unwrap();
        check(&BdKernel::default(), &inst, &format!("bd seed {seed}"));
    }
}

#[test]
fn bd_rules_fire_and_stay_exact() {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for seed in 150..1500u64 {
        let inst = generate(&bd_spec(seed)).unwrap();
        check(&BdKernel::default(), &inst, &format!("bd seed {seed}"));
        let c = BdKernel::default().compress(&inst).unwrap();
        for e in &c.log.entries {
            *counts.entry(e.rule.clone()).or_default() += 1;
        }
    }
    for rule in [
        "bd-easy",
        "bd-free-component",
        "bd-many-conflicts",
        "bd-type1",
        "bd-type2",
        "bd-type3",
        "bd-type4",
    ] {
        assert!(counts.get(rule).copied().unwrap_or(0) > 0, "{rule} never fired: {counts:?}");
    }
}

#[test]
fn bd_larger_sweep() {
    for seed in 0..300u64 {
        let spec = GenSpec {
            n: 10 + (seed % 7) as usize,
            target: TargetPolicy::Optimum,
            ..bd_spec(seed)
        };
        let inst = generate(&spec).unwrap();
        check(&BdKernel::default(), &inst, &format!("bd large seed {seed}"));
    }
}
