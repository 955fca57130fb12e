//! Brute-force solution sets, seeded instance generators and the delay profiler.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::{bridgedepth_of, treedepth_of};
use crate::flashlight::SolutionStream;
use crate::graph::{Graph, Label, VertexSet};
use crate::io::{EnumInstance, Problem, SolutionRecord};
use crate::mis::MisOracle;

pub const BRUTE_FORCE_CAP: usize = 20;
const GEN_RETRIES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("brute force needs n <= {cap}, got {n}")]
    TooLarge { n: usize, cap: usize },
    #[error("could not generate an instance meeting the {0} promise")]
    Promise(&'static str),
    #[error("invalid generator spec: {0}")]
    Spec(String),
}

/// Every solution in internal ids, by exhaustive subset scan.
pub fn brute_sol_ids(inst: &EnumInstance) -> Result<Vec<VertexSet>, HarnessError> {
    let g = &inst.graph;
    let n = g.n();
    if n > BRUTE_FORCE_CAP {
        return Err(HarnessError::TooLarge {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut out: Vec<VertexSet> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|&v| mask >> v & 1 == 1).collect::<VertexSet>())
        .filter(|s| inst.is_solution(s))
        .collect();
    out.sort();
    Ok(out)
}

/// Every solution in external labels, sorted.
pub fn brute_sol(inst: &EnumInstance) -> Result<Vec<SolutionRecord>, HarnessError> {
    let mut out: Vec<SolutionRecord> = brute_sol_ids(inst)?
        .into_iter()
        .map(|s| SolutionRecord::new(inst.graph.labels_of(&s)))
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Plain,
    Fvs,
    Td,
    Bd,
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" => Ok(Model::Plain),
            "fvs" => Ok(Model::Fvs),
            "td" => Ok(Model::Td),
            "bd" => Ok(Model::Bd),
            _ => Err(format!("unknown model {s:?}")),
        }
    }
}

/// How the parameter is chosen relative to the optimum
/// (`α` for IS, minimum cover size for VC).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetPolicy {
    /// Exactly optimal.
    Optimum,
    /// `t = α - s` or `k = τ + s`.
    Slack(usize),
    Fixed(usize),
    /// Slack 0..=2, with an infeasible parameter one time in five.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub model: Model,
    pub problem: Problem,
    pub n: usize,
    pub modulator: usize,
    pub density: f64,
    pub c: usize,
    pub target: TargetPolicy,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            model: Model::Plain,
            problem: Problem::Is,
            n: 8,
            modulator: 0,
            density: 0.3,
            c: 1,
            target: TargetPolicy::Random,
            seed: 0,
        }
    }
}

/// Seeded instance satisfying the model's structural promise.
pub fn generate(spec: &GenSpec) -> Result<EnumInstance, HarnessError> {
    if spec.modulator > spec.n {
        return Err(HarnessError::Spec("modulator larger than n".into()));
    }
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(HarnessError::Spec("density outside [0, 1]".into()));
    }
    if spec.problem == Problem::Ais {
        return Err(HarnessError::Spec("generators emit vc or is".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..GEN_RETRIES {
        if let Some(inst) = attempt(spec, &mut rng) {
            return Ok(inst);
        }
    }
    Err(HarnessError::Promise(match spec.model {
        Model::Plain => "plain",
        Model::Fvs => "fvs",
        Model::Td => "td",
        Model::Bd => "bd",
    }))
}

fn attempt(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Option<EnumInstance> {
    let n = spec.n;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let x: VertexSet = perm[..spec.modulator].iter().copied().collect();
    let rest: Vec<usize> = perm[spec.modulator..].to_vec();
    let p = spec.density;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let coin = |rng: &mut ChaCha8Rng, q: f64| rng.gen_bool(q.clamp(0.0, 1.0));
    // modulator edges, common to all models
    for &u in x.iter() {
        for v in 0..n {
            if v != u && (!x.contains(v) || v > u) && coin(rng, p) {
                edges.push((u, v));
            }
        }
    }
    match spec.model {
        Model::Plain => {
            for (i, &u) in rest.iter().enumerate() {
                for &v in &rest[i + 1..] {
                    if coin(rng, p) {
                        edges.push((u, v));
                    }
                }
            }
        }
        Model::Fvs => random_forest(&rest, 0.8, rng, &mut edges),
        Model::Td => {
            let c = spec.c.max(1);
            let mut depth = vec![0usize; n];
            let mut anc: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (i, &v) in rest.iter().enumerate() {
                let parents: Vec<usize> = rest[..i].iter().copied().filter(|&u| depth[u] < c).collect();
                if parents.is_empty() || coin(rng, 0.25) {
                    depth[v] = 1;
                    continue;
                }
                let par = parents[rng.gen_range(0..parents.len())];
                depth[v] = depth[par] + 1;
                let mut a = anc[par].clone();
                a.push(par);
                edges.push((par, v));
                for &u in &a[..a.len() - 1] {
                    if coin(rng, p) {
                        edges.push((u, v));
                    }
                }
                anc[v] = a;
            }
        }
        Model::Bd => {
            random_forest(&rest, 0.8, rng, &mut edges);
            let extra = ((rest.len() as f64) * p).round() as usize;
            for _ in 0..extra {
                if rest.len() < 2 {
                    break;
                }
                let u = rest[rng.gen_range(0..rest.len())];
                let v = rest[rng.gen_range(0..rest.len())];
                if u != v {
                    edges.push((u, v));
                }
            }
        }
    }
    let labels: Vec<Label> = (1..=n as Label).collect();
    let g = Graph::from_labeled_edges(labels, &edges).ok()?;
    let ok = match spec.model {
        Model::Plain => true,
        Model::Fvs => g.induced_subgraph(&rest).ok()?.0.is_forest(),
        Model::Td => treedepth_of(&g, &rest).ok()? <= spec.c.max(1),
        Model::Bd => bridgedepth_of(&g, &rest).ok()? <= spec.c.max(1),
    };
    if !ok {
        return None;
    }
    let alpha = MisOracle::global().alpha_exact(&g).ok()?;
    let slack = match spec.target {
        TargetPolicy::Optimum => 0i64,
        TargetPolicy::Slack(s) => s as i64,
        TargetPolicy::Fixed(_) => 0,
        TargetPolicy::Random => {
            if rng.gen_ratio(1, 5) {
                -1
            } else {
                rng.gen_range(0..=2)
            }
        }
    };
    let mut inst = match spec.problem {
        Problem::Vc => {
            let k = match spec.target {
                TargetPolicy::Fixed(k) => k,
                _ => ((n - alpha) as i64 + slack).clamp(0, n as i64) as usize,
            };
            EnumInstance::vc(g, k)
        }
        _ => {
            let t = match spec.target {
                TargetPolicy::Fixed(t) => t,
                _ => (alpha as i64 - slack).max(0) as usize,
            };
            EnumInstance::is(g, t)
        }
    };
    if spec.model != Model::Plain || spec.modulator > 0 {
        inst = inst.with_modulator(x);
    }
    if matches!(spec.model, Model::Td | Model::Bd) {
        inst = inst.with_c(spec.c.max(1));
    }
    Some(inst)
}

fn random_forest(vs: &[usize], attach: f64, rng: &mut ChaCha8Rng, edges: &mut Vec<(usize, usize)>) {
    for i in 1..vs.len() {
        if rng.gen_bool(attach) {
            let j = rng.gen_range(0..i);
            edges.push((vs[j], vs[i]));
        }
    }
}

/// Per-output step gaps of a drained stream.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    /// Steps between each output and the previous one (or the stream start).
    pub delays: Vec<u64>,
    pub max_delay: u64,
    pub mean_delay: f64,
    pub precalc_steps: u64,
    /// Steps after the last output until exhaustion.
    pub postcalc_steps: u64,
    pub outputs: u64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

pub fn profile_delay(stream: SolutionStream) -> DelayReport {
    profile_delay_with(stream, 0)
}

/// Drains `stream`; `precalc_steps` is work done before it was created.
pub fn profile_delay_with(mut stream: SolutionStream, precalc_steps: u64) -> DelayReport {
    let start = Instant::now();
    let mut r = DelayReport {
        precalc_steps,
        ..Default::default()
    };
    let mut last = stream.steps();
    loop {
        match stream.try_next() {
            Ok(Some(_)) => {
                r.delays.push(stream.steps() - last);
                last = stream.steps();
            }
            Ok(None) => break,
            Err(e) => {
                r.error = Some(e.to_string());
                break;
            }
        }
    }
    r.postcalc_steps = stream.steps() - last;
    r.outputs = r.delays.len() as u64;
    r.max_delay = r.delays.iter().copied().chain([r.postcalc_steps]).max().unwrap_or(0);
    r.mean_delay = if r.delays.is_empty() {
        0.0
    } else {
        r.delays.iter().sum::<u64>() as f64 / r.delays.len() as f64
    };
    r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flashlight::enum_is;
    use crate::io::parse;

    #[test]
    fn brute_examples() {
        let k3 = parse("p is 3 3\ne 1 2\ne 2 3\ne 1 3\nt 1\n").unwrap();
        let got: Vec<String> = brute_sol(&k3).unwrap().iter().map(|r| r.to_string()).collect();
        assert_eq!(got, vec!["1", "2", "3"]);
        let ais = parse("p ais 2 0\nx 1 2\nh 1 2\nt 2\n").unwrap();
        assert!(brute_sol(&ais).unwrap().is_empty());
        let p3 = parse("p vc 3 2\ne 1 2\ne 2 3\nk 1\n").unwrap();
        let got: Vec<String> = brute_sol(&p3).unwrap().iter().map(|r| r.to_string()).collect();
        assert_eq!(got, vec!["2"]);
    }

    #[test]
    fn generators_keep_promises() {
        for (model, seed) in [(Model::Fvs, 1), (Model::Td, 2), (Model::Bd, 3), (Model::Plain, 4)] {
            let spec = GenSpec {
                model,
                n: 10,
                modulator: 3,
                c: 2,
                seed,
                ..GenSpec::default()
            };
            let a = generate(&spec).unwrap();
            let b = generate(&spec).unwrap();
            assert_eq!(crate::io::serialize(&a), crate::io::serialize(&b));
            let x = a.modulator();
            let rest: Vec<usize> = (0..a.graph.n()).filter(|v| !x.contains(*v)).collect();
            match model {
                Model::Fvs => assert!(a.graph.induced_subgraph(&rest).unwrap().0.is_forest()),
                Model::Td => assert!(treedepth_of(&a.graph, &rest).unwrap() <= 2),
                Model::Bd => assert!(bridgedepth_of(&a.graph, &rest).unwrap() <= 2),
                Model::Plain => {}
            }
        }
    }

    #[test]
    fn delay_profiles() {
        let r = profile_delay(SolutionStream::empty());
        assert_eq!(r.outputs, 0);
        let r = profile_delay(SolutionStream::once(VertexSet::new()));
        assert_eq!(r.delays.len(), 1);
        let g = Graph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let r = profile_delay(enum_is(&g, 3));
        assert_eq!(r.outputs, 8);
        assert!(r.max_delay > 0);
    }
}
