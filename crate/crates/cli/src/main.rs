//! `enumkern`: generate instances, run the PD kernels, lift solutions and
//! measure delays.

use std::error::Error;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use enumkern_core::flashlight::SolutionStream;
use enumkern_core::framework::{
    enumerate_solutions, lift_solution, run_pd_kernel, verify_partition, PdKernel, RuleLog,
};
use enumkern_core::graph::{Graph, VertexSet};
use enumkern_core::harness::{brute_sol_ids, generate, profile_delay, DelayReport, GenSpec, Model, TargetPolicy};
use enumkern_core::io::{parse, serialize, EnumInstance, Problem, SolutionRecord};
use enumkern_core::kernels::{pipeline_is_td, BdKernel, FvsKernel, VcKernel};
use enumkern_core::mis::MisOracle;

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "enumkern", version, about = "Polynomial-delay enumeration kernels for vertex cover and independent set")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Compress an instance and write the rule log.
    Kernelize(KernelizeArgs),
    /// Enumerate all solutions of an instance by flashlight search.
    Enumerate(EnumerateArgs),
    /// Lift one solution of a compressed instance back to the original.
    Lift(LiftArgs),
    /// Compress, enumerate and lift: stream every solution of the original.
    PdkernelRun(RunArgs),
    /// Compare a kernel against brute force on seeded instances.
    Verify(VerifyArgs),
    /// Delay measurements.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Param {
    /// Vertex cover by solution size.
    K,
    /// Independent set by feedback vertex set.
    Fvs,
    /// Independent set by a modulator to treedepth c.
    Td,
    /// Independent set by a modulator to bridgedepth c.
    Bd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Plain,
    Fvs,
    Td,
    Bd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProblemArg {
    Vc,
    Is,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Lex,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "plain")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "is")]
    problem: ProblemArg,
    #[arg(short, long, default_value_t = 10)]
    n: usize,
    /// Size of the planted modulator.
    #[arg(short = 'x', long, default_value_t = 0)]
    modulator: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 1)]
    c: usize,
    /// optimum, random, slack:N or fixed:N
    #[arg(long, default_value = "random", value_parser = parse_target)]
    target: TargetPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct KernelizeArgs {
    #[arg(long, value_enum)]
    param: Param,
    /// Depth bound for td and bd; defaults to the instance's `c` line.
    #[arg(long)]
    c: Option<usize>,
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lex")]
    order: Order,
    #[arg(long)]
    max: Option<usize>,
}

#[derive(Args)]
struct LiftArgs {
    /// The original instance.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    log: PathBuf,
    /// A solution of the compressed instance, in the labels of the file
    /// `kernelize` wrote; `-` for the empty set.
    #[arg(long, allow_hyphen_values = true)]
    solution: String,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    param: Param,
    #[arg(long)]
    c: Option<usize>,
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long)]
    max: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    param: Param,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, default_value_t = 12)]
    nmax: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Per-instance delay profile as CSV on stdout.
    Delay(DelayArgs),
}

#[derive(Args)]
struct DelayArgs {
    /// Run through a kernel; plain flashlight when omitted.
    #[arg(long, value_enum)]
    param: Option<Param>,
    #[arg(long)]
    c: Option<usize>,
    /// Instance files.
    #[arg(short, long)]
    input: Vec<PathBuf>,
    /// Range `A..B` of disjoint-edge graphs with t = m.
    #[arg(long, value_parser = parse_range)]
    disjoint_edges: Option<(usize, usize)>,
}

fn parse_target(s: &str) -> Result<TargetPolicy, String> {
    let num = |v: &str| v.parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    match s.split_once(':') {
        None if s == "optimum" => Ok(TargetPolicy::Optimum),
        None if s == "random" => Ok(TargetPolicy::Random),
        Some(("slack", v)) => Ok(TargetPolicy::Slack(num(v)?)),
        Some(("fixed", v)) => Ok(TargetPolicy::Fixed(num(v)?)),
        _ => Err(format!("unknown target {s:?}; use optimum, random, slack:N or fixed:N")),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: usize = a.parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

fn read_instance(path: Option<&Path>) -> Res<EnumInstance> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let inst = parse(&text)?;
    inst.validate()?;
    Ok(inst)
}

fn write_text(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// A computation generic over the kernel type.
trait KernelJob {
    type Out;
    fn run<K: PdKernel + Clone + 'static>(self, kernel: &K) -> Self::Out;
}

fn dispatch<J: KernelJob>(param: Param, c: Option<usize>, job: J) -> J::Out {
    match param {
        Param::K => job.run(&VcKernel),
        Param::Fvs => job.run(&FvsKernel),
        Param::Td => job.run(&pipeline_is_td(c)),
        Param::Bd => job.run(&BdKernel { c }),
    }
}

fn param_of_log(log: &RuleLog) -> Res<Param> {
    match log.header.kernel.as_str() {
        "vc" => Ok(Param::K),
        "fvs" => Ok(Param::Fvs),
        "bd" => Ok(Param::Bd),
        k if k.starts_with("td") => Ok(Param::Td),
        k => Err(format!("log was written by unknown kernel {k:?}").into()),
    }
}

/// Writes up to `max` solutions in labels of `g`; a stream error is fatal.
fn drain(mut stream: SolutionStream, g: &Graph, max: Option<usize>) -> Res<u64> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut count = 0u64;
    while max.map_or(true, |m| count < m as u64) {
        match stream.try_next()? {
            Some(s) => {
                writeln!(out, "{}", SolutionRecord::new(g.labels_of(&s)))?;
                count += 1;
            }
            None => break,
        }
    }
    out.flush()?;
    Ok(count)
}

struct Kernelize<'a> {
    inst: &'a EnumInstance,
}

impl KernelJob for Kernelize<'_> {
    type Out = Res<(EnumInstance, RuleLog)>;
    fn run<K: PdKernel + Clone + 'static>(self, kernel: &K) -> Self::Out {
        let comp = kernel.compress(self.inst)?;
        Ok((comp.compressed, comp.log))
    }
}

fn cmd_kernelize(a: KernelizeArgs) -> Res<()> {
    let inst = read_instance(a.input.as_deref())?;
    let (compressed, log) = dispatch(a.param, a.c, Kernelize { inst: &inst })?;
    write_text(a.output.as_deref(), &serialize(&compressed))?;
    if let Some(p) = &a.log {
        fs::write(p, log.to_jsonl()).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    eprintln!(
        "compressed {} -> {} vertices, {} rule entries{}",
        inst.graph.n(),
        compressed.graph.n(),
        log.entries.len(),
        if log.header.degenerate { ", degenerate" } else { "" }
    );
    Ok(())
}

fn cmd_enumerate(a: EnumerateArgs) -> Res<()> {
    let Order::Lex = a.order;
    let inst = read_instance(a.input.as_deref())?;
    let stream = enumerate_solutions(&inst, MisOracle::global())?.with_env_cap();
    drain(stream, &inst.graph, a.max)?;
    Ok(())
}

struct Lift<'a> {
    inst: &'a EnumInstance,
    log: &'a RuleLog,
    solution: &'a SolutionRecord,
}

impl KernelJob for Lift<'_> {
    type Out = Res<u64>;
    fn run<K: PdKernel + Clone + 'static>(self, kernel: &K) -> Self::Out {
        let comp = Arc::new(kernel.compress(self.inst)?);
        if comp.log != *self.log {
            return Err("the log does not match this instance".into());
        }
        let h = &comp.compressed;
        // File labels are positions in the written instance.
        let names = &self.log.header.compressed_labels;
        let s: VertexSet = self
            .solution
            .vertices
            .iter()
            .map(|&l| {
                (l as usize)
                    .checked_sub(1)
                    .and_then(|i| names.get(i))
                    .and_then(|&name| h.graph.id_of(name))
                    .ok_or(format!("label {l} is not in the compressed instance"))
            })
            .collect::<Result<_, _>>()?;
        if !h.is_solution(&s) {
            return Err("not a solution of the compressed instance".into());
        }
        if !kernel.canonical_check(&comp, &s)? {
            eprintln!("not canonical: no original solutions are attributed to it");
        }
        let stream = lift_solution(kernel, &comp, &s)?.with_env_cap();
        drain(stream, &self.inst.graph, None)
    }
}

fn cmd_lift(a: LiftArgs) -> Res<()> {
    let inst = read_instance(Some(&a.input))?;
    let text = fs::read_to_string(&a.log).map_err(|e| format!("{}: {e}", a.log.display()))?;
    let log = RuleLog::from_jsonl(&text)?;
    let solution = SolutionRecord::parse(&a.solution)?;
    let param = param_of_log(&log)?;
    dispatch(param, log.header.c, Lift { inst: &inst, log: &log, solution: &solution })?;
    Ok(())
}

struct Run<'a> {
    inst: &'a EnumInstance,
    max: Option<usize>,
}

impl KernelJob for Run<'_> {
    type Out = Res<u64>;
    fn run<K: PdKernel + Clone + 'static>(self, kernel: &K) -> Self::Out {
        let stream = run_pd_kernel(kernel, self.inst)?.with_env_cap();
        drain(stream, &self.inst.graph, self.max)
    }
}

fn cmd_run(a: RunArgs) -> Res<()> {
    let inst = read_instance(a.input.as_deref())?;
    dispatch(a.param, a.c, Run { inst: &inst, max: a.max })?;
    Ok(())
}

fn verify_spec(param: Param, c: Option<usize>, nmax: usize, seed: u64, i: u64) -> GenSpec {
    let lo = 4.min(nmax);
    let n = lo + (i as usize) % (nmax - lo + 1);
    let (model, problem) = match param {
        Param::K => (Model::Plain, Problem::Vc),
        Param::Fvs => (Model::Fvs, Problem::Is),
        Param::Td => (Model::Td, Problem::Is),
        Param::Bd => (Model::Bd, Problem::Is),
    };
    GenSpec {
        model,
        problem,
        n,
        modulator: if model == Model::Plain { 0 } else { (1 + (i % 4) as usize).min(n) },
        density: [0.15, 0.3, 0.45][(i % 3) as usize],
        c: c.unwrap_or(1 + (i % 2) as usize),
        target: TargetPolicy::Random,
        seed: seed.wrapping_add(i),
    }
}

struct Check<'a> {
    inst: &'a EnumInstance,
}

impl KernelJob for Check<'_> {
    type Out = Res<()>;
    fn run<K: PdKernel + Clone + 'static>(self, kernel: &K) -> Self::Out {
        let mut out = run_pd_kernel(kernel, self.inst)?.collect_all()?;
        out.sort();
        let brute = brute_sol_ids(self.inst)?;
        if out != brute {
            return Err(format!("{} outputs, {} brute-force solutions", out.len(), brute.len()).into());
        }
        let r = verify_partition(self.inst, kernel)?;
        if !r.passed() {
            return Err(format!("partition check: {}", r.failures.join("; ")).into());
        }
        Ok(())
    }
}

fn cmd_verify(a: VerifyArgs) -> Res<bool> {
    let mut failures = 0;
    for i in 0..a.trials {
        let spec = verify_spec(a.param, a.c, a.nmax, a.seed, i);
        let inst = generate(&spec)?;
        if let Err(e) = dispatch(a.param, a.c, Check { inst: &inst }) {
            failures += 1;
            println!("FAIL seed {} n {}: {e}", spec.seed, spec.n);
        }
    }
    println!("{} trials, {} failures", a.trials, failures);
    Ok(failures == 0)
}

struct Delay<'a> {
    inst: &'a EnumInstance,
}

impl KernelJob for Delay<'_> {
    type Out = Res<DelayReport>;
    fn run<K: PdKernel + Clone + 'static>(self, kernel: &K) -> Self::Out {
        let start = Instant::now();
        let stream = run_pd_kernel(kernel, self.inst)?.with_env_cap();
        let mut r = profile_delay(stream);
        r.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
        Ok(r)
    }
}

fn cmd_delay(a: DelayArgs) -> Res<()> {
    let mut cases: Vec<(String, EnumInstance)> = Vec::new();
    for p in &a.input {
        cases.push((p.display().to_string(), read_instance(Some(p))?));
    }
    if let Some((lo, hi)) = a.disjoint_edges {
        for m in lo..=hi {
            let edges: Vec<(usize, usize)> = (0..m).map(|i| (2 * i, 2 * i + 1)).collect();
            let g = Graph::from_labeled_edges((1..=2 * m as u32).collect(), &edges)?;
            cases.push((format!("disjoint-edges-{m}"), EnumInstance::is(g, m)));
        }
    }
    if cases.is_empty() {
        return Err("no instances: pass -i FILE or --disjoint-edges A..B".into());
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "instance,outputs,max_delay_steps,mean_delay_steps,precalc_steps,wall_ms")?;
    for (name, inst) in &cases {
        let r = match a.param {
            Some(p) => dispatch(p, a.c, Delay { inst })?,
            None => {
                let start = Instant::now();
                let mut r = profile_delay(enumerate_solutions(inst, MisOracle::global())?.with_env_cap());
                r.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
                r
            }
        };
        if let Some(e) = &r.error {
            eprintln!("{name}: stopped early: {e}");
        }
        writeln!(
            out,
            "{},{},{},{:.3},{},{:.3}",
            name, r.outputs, r.max_delay, r.mean_delay, r.precalc_steps, r.wall_ms
        )?;
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Res<()> {
    let spec = GenSpec {
        model: match a.model {
            ModelArg::Plain => Model::Plain,
            ModelArg::Fvs => Model::Fvs,
            ModelArg::Td => Model::Td,
            ModelArg::Bd => Model::Bd,
        },
        problem: match a.problem {
            ProblemArg::Vc => Problem::Vc,
            ProblemArg::Is => Problem::Is,
        },
        n: a.n,
        modulator: a.modulator,
        density: a.density,
        c: a.c,
        target: a.target,
        seed: a.seed,
    };
    write_text(a.output.as_deref(), &serialize(&generate(&spec)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a).map(|_| true),
        Cmd::Kernelize(a) => cmd_kernelize(a).map(|_| true),
        Cmd::Enumerate(a) => cmd_enumerate(a).map(|_| true),
        Cmd::Lift(a) => cmd_lift(a).map(|_| true),
        Cmd::PdkernelRun(a) => cmd_run(a).map(|_| true),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(BenchCmd::Delay(a)) => cmd_delay(a).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
