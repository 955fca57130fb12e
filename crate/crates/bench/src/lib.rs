//! Seeded fixtures shared by the benches.

use enumkern_core::graph::Graph;
use enumkern_core::harness::{generate, GenSpec, Model, TargetPolicy};
use enumkern_core::io::{EnumInstance, Problem};

/// `m` disjoint edges with `t = m`: `2^m` solutions.
pub fn disjoint_edges(m: usize) -> EnumInstance {
    let edges: Vec<(usize, usize)> = (0..m).map(|i| (2 * i, 2 * i + 1)).collect();
    EnumInstance::is(Graph::from_edges(2 * m, &edges).expect("valid edges"), m)
}

/// Instance for one of the kernels: `vc`, `fvs`, `td` or `bd`.
pub fn kernel_instance(kind: &str, n: usize, modulator: usize, seed: u64) -> EnumInstance {
    let (model, problem) = match kind {
        "vc" => (Model::Plain, Problem::Vc),
        "fvs" => (Model::Fvs, Problem::Is),
        "td" => (Model::Td, Problem::Is),
        "bd" => (Model::Bd, Problem::Is),
        other => panic!("unknown kernel {other}"),
    };
    let spec = GenSpec {
        model,
        problem,
        n,
        modulator: if model == Model::Plain { 0 } else { modulator },
        density: 0.25,
        c: 2,
        target: TargetPolicy::Slack(1),
        seed,
    };
    generate(&spec).expect("generator spec within caps")
}
