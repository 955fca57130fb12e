//! The four PD kernels.

pub mod bd;
pub mod fvs;
pub mod td;
pub mod vc;

use std::sync::Arc;

use crate::flashlight::{flashlight_source, SolutionSource, Steps, VertexOrder};
use crate::framework::{KernelError, LogHeader, RuleLog};
use crate::graph::{Graph, Label, VertexSet};
use crate::io::EnumInstance;
use crate::mis::{AlphaOracle, ForestOracle};

pub use bd::BdKernel;
pub use fvs::FvsKernel;
pub use td::{pipeline_is_td, AisTdKernel, TdPipeline};
pub use vc::VcKernel;

pub(crate) fn forest_oracle() -> Arc<dyn AlphaOracle> {
    Arc::new(ForestOracle)
}

pub(crate) fn labels(g: &Graph, s: &[usize]) -> Vec<Label> {
    g.labels_of(s)
}

/// Re-expresses `s` (ids of `from`) in ids of `to`, dropping absent labels.
pub(crate) fn translate(from: &Graph, to: &Graph, s: &[usize]) -> VertexSet {
    let index = to.label_index();
    s.iter()
        .filter_map(|&v| index.get(&from.label(v)).copied())
        .collect()
}

/// Lexicographically first independent `S ⊇ require`, `S ∩ avoid = ∅`, `|S| >= t`.
pub(crate) fn first_solution(
    g: &Graph,
    t: usize,
    require: &[usize],
    avoid: &[usize],
    oracle: Arc<dyn AlphaOracle>,
) -> Result<Option<VertexSet>, KernelError> {
    let sigma = VertexOrder::by_label(g);
    let mut src = flashlight_source(g, t, &sigma, avoid, require, oracle)?;
    Ok(src.next_solution(&mut Steps::default())?)
}

/// Vertices outside the modulator.
pub(crate) fn rest_of(inst: &EnumInstance) -> Vec<usize> {
    let x = inst.modulator();
    (0..inst.graph.n()).filter(|&v| !x.contains(v)).collect()
}

pub(crate) fn header(kernel: &str, compressed: &EnumInstance, c: Option<usize>, degenerate: bool) -> LogHeader {
    LogHeader {
        kernel: kernel.into(),
        c,
        degenerate,
        compressed_labels: compressed.graph.labels().to_vec(),
    }
}

pub(crate) fn finish_log(mut log: RuleLog, h: LogHeader) -> RuleLog {
    log.header = h;
    log
}
