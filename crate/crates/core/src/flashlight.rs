//! Lexicographic flashlight enumeration of independent sets and the
//! pull-based solution streams every lifting algorithm returns.

use std::cmp::Ordering;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::graph::{Graph, Label, VertexSet};
use crate::io::SolutionRecord;
use crate::mis::{AlphaOracle, MisError, MisOracle};

/// Environment variable read by [`SolutionStream::with_env_cap`].
pub const STEP_CAP_ENV: &str = "ENUMKERN_STEP_CAP";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error(transparent)]
    Oracle(#[from] MisError),
    #[error("step cap of {0} exceeded")]
    StepCap(u64),
    #[error("required set is not independent")]
    RequireNotIndependent,
    #[error("require and avoid overlap")]
    RequireAvoidOverlap,
    #[error("kernel contract violated: {0}")]
    Contract(String),
}

/// Step counter shared by a stream and every source nested inside it.
#[derive(Clone, Debug, Default)]
pub struct Steps {
    count: u64,
    cap: Option<u64>,
}

impl Steps {
    pub fn new(cap: Option<u64>) -> Self {
        Steps { count: 0, cap }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn tick(&mut self) -> Result<(), StreamError> {
        self.add(1)
    }

    pub fn add(&mut self, k: u64) -> Result<(), StreamError> {
        self.count += k;
        match self.cap {
            Some(cap) if self.count > cap => Err(StreamError::StepCap(cap)),
            _ => Ok(()),
        }
    }
}

/// A producer of vertex sets. `Ok(None)` means exhausted.
pub trait SolutionSource: Send {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError>;
}

pub type BoxSource = Box<dyn SolutionSource>;

/// Pull-based stream with per-output step counters. Exhaustion and errors are final.
pub struct SolutionStream {
    source: BoxSource,
    steps: Steps,
    last_output_at: u64,
    outputs: u64,
    error: Option<StreamError>,
    done: bool,
}

impl std::fmt::Debug for SolutionStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolutionStream")
            .field("steps", &self.steps.count)
            .field("outputs", &self.outputs)
            .field("done", &self.done)
            .finish()
    }
}

impl SolutionStream {
    pub fn new(source: BoxSource) -> Self {
        SolutionStream {
            source,
            steps: Steps::default(),
            last_output_at: 0,
            outputs: 0,
            error: None,
            done: false,
        }
    }

    pub fn empty() -> Self {
        Self::from_sets(Vec::new())
    }

    pub fn once(s: VertexSet) -> Self {
        Self::from_sets(vec![s])
    }

    pub fn from_sets(sets: Vec<VertexSet>) -> Self {
        SolutionStream::new(Box::new(VecSource(sets.into_iter())))
    }

    pub fn with_step_cap(mut self, cap: Option<u64>) -> Self {
        self.steps.cap = cap;
        self
    }

    /// Applies the cap from `ENUMKERN_STEP_CAP` when it is set and parses.
    pub fn with_env_cap(self) -> Self {
        let cap = std::env::var(STEP_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok());
        match cap {
            Some(c) => self.with_step_cap(Some(c)),
            None => self,
        }
    }

    pub fn into_source(self) -> BoxSource {
        self.source
    }

    pub fn steps(&self) -> u64 {
        self.steps.count
    }

    pub fn steps_since_output(&self) -> u64 {
        self.steps.count - self.last_output_at
    }

    pub fn outputs(&self) -> u64 {
        self.outputs
    }

    pub fn error(&self) -> Option<&StreamError> {
        self.error.as_ref()
    }

    pub fn is_exhausted(&self) -> bool {
        self.done
    }

    pub fn try_next(&mut self) -> Result<Option<VertexSet>, StreamError> {
        if let Some(e) = &self.error {
            return Err(e.clone());
        }
        if self.done {
            return Ok(None);
        }
        match self.source.next_solution(&mut self.steps) {
            Ok(Some(s)) => {
                self.outputs += 1;
                self.last_output_at = self.steps.count;
                Ok(Some(s))
            }
            Ok(None) => {
                self.done = true;
                Ok(None)
            }
            Err(e) => {
                self.done = true;
                self.error = Some(e.clone());
                Err(e)
            }
        }
    }

    /// Drains the stream, failing on the first error.
    pub fn collect_all(mut self) -> Result<Vec<VertexSet>, StreamError> {
        let mut out = Vec::new();
        while let Some(s) = self.try_next()? {
            out.push(s);
        }
        Ok(out)
    }

    /// Converts sets to records using the labels of `g`.
    pub fn records(self, g: &Graph) -> impl Iterator<Item = SolutionRecord> + '_ {
        self.map(move |s| SolutionRecord::new(g.labels_of(&s)))
    }

    pub fn map_sets<F>(self, f: F) -> SolutionStream
    where
        F: FnMut(VertexSet) -> VertexSet + Send + 'static,
    {
        SolutionStream::new(Box::new(MapSource {
            inner: self.source,
            f,
        }))
    }
}

impl Iterator for SolutionStream {
    type Item = VertexSet;

    fn next(&mut self) -> Option<VertexSet> {
        self.try_next().ok().flatten()
    }
}

struct VecSource(std::vec::IntoIter<VertexSet>);

impl SolutionSource for VecSource {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError> {
        steps.tick()?;
        Ok(self.0.next())
    }
}

struct MapSource<F> {
    inner: BoxSource,
    f: F,
}

impl<F: FnMut(VertexSet) -> VertexSet + Send> SolutionSource for MapSource<F> {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError> {
        Ok(self.inner.next_solution(steps)?.map(&mut self.f))
    }
}

/// Callback deciding, per outer item, which inner source (if any) to run.
pub type Expand = Box<dyn FnMut(VertexSet, &mut Steps) -> Result<Option<BoxSource>, StreamError> + Send>;

/// Runs an inner source for every outer item, online.
pub struct FlatMapSource {
    outer: BoxSource,
    expand: Expand,
    current: Option<BoxSource>,
}

impl FlatMapSource {
    pub fn new(outer: BoxSource, expand: Expand) -> Self {
        FlatMapSource {
            outer,
            expand,
            current: None,
        }
    }
}

impl SolutionSource for FlatMapSource {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError> {
        loop {
            if let Some(inner) = &mut self.current {
                if let Some(s) = inner.next_solution(steps)? {
                    return Ok(Some(s));
                }
                self.current = None;
            }
            match self.outer.next_solution(steps)? {
                None => return Ok(None),
                Some(item) => self.current = (self.expand)(item, steps)?,
            }
        }
    }
}

/// A total order σ on the vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOrder {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl VertexOrder {
    /// Ascending external label.
    pub fn by_label(g: &Graph) -> Self {
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.sort_by_key(|&v| g.label(v));
        Self::from_order(order)
    }

    /// `order[i]` is the vertex of rank `i`. Panics unless it is a permutation.
    pub fn from_order(order: Vec<usize>) -> Self {
        let mut rank = vec![usize::MAX; order.len()];
        for (i, &v) in order.iter().enumerate() {
            assert!(v < order.len() && rank[v] == usize::MAX, "not a permutation");
            rank[v] = i;
        }
        VertexOrder { order, rank }
    }

    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// `X < Y` if `X` is a proper prefix of `Y` in σ-order or the σ-least element
/// of the symmetric difference lies in `X`.
pub fn lex_compare(a: &[usize], b: &[usize], sigma: &VertexOrder) -> Ordering {
    let key = |s: &[usize]| {
        let mut r: Vec<usize> = s.iter().map(|&v| sigma.rank(v)).collect();
        r.sort_unstable();
        r.dedup();
        r
    };
    key(a).cmp(&key(b))
}

/// Same order on label sets, with σ the natural label order.
pub fn lex_compare_labels(a: &[Label], b: &[Label]) -> Ordering {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    x.sort_unstable();
    y.sort_unstable();
    x.cmp(&y)
}

#[derive(Clone)]
struct Frame {
    m: Vec<usize>,
    blocked: FixedBitSet,
    emit: bool,
}

/// Explicit-stack flashlight search: branch on the σ-least free vertex,
/// keep a branch only if the extension oracle says it can reach `t`.
pub struct Flashlight {
    g: Arc<Graph>,
    oracle: Arc<dyn AlphaOracle>,
    t: usize,
    order: VertexOrder,
    stack: Vec<Frame>,
    started: bool,
    root: Option<Frame>,
}

impl Flashlight {
    fn extends(&self, frame: &Frame, steps: &mut Steps) -> Result<bool, StreamError> {
        if frame.m.len() >= self.t {
            return Ok(true);
        }
        steps.tick()?;
        let mut alive = frame.blocked.clone();
        alive.toggle_range(..);
        Ok(self.oracle.alpha(&self.g, &alive)? >= self.t - frame.m.len())
    }
}

impl SolutionSource for Flashlight {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError> {
        if !self.started {
            self.started = true;
            if let Some(root) = self.root.take() {
                if self.extends(&root, steps)? {
                    self.stack.push(root);
                }
            }
        }
        while let Some(frame) = self.stack.pop() {
            steps.tick()?;
            let v = self
                .order
                .order()
                .iter()
                .copied()
                .find(|&v| !frame.blocked.contains(v));
            if let Some(v) = v {
                let mut right = frame.clone();
                right.blocked.insert(v);
                right.emit = false;
                let mut left = frame.clone();
                left.m.push(v);
                left.blocked.insert(v);
                for &w in self.g.neighbors(v) {
                    left.blocked.insert(w);
                }
                left.emit = left.m.len() >= self.t;
                if self.extends(&right, steps)? {
                    self.stack.push(right);
                }
                if self.extends(&left, steps)? {
                    self.stack.push(left);
                }
            }
            if frame.emit {
                return Ok(Some(frame.m.iter().copied().collect()));
            }
        }
        Ok(None)
    }
}

/// Streams every independent `S ⊇ require`, `S ∩ avoid = ∅`, `|S| >= t`,
/// in lexicographic order with respect to σ.
pub fn enum_is_lex(
    g: &Graph,
    t: usize,
    sigma: &VertexOrder,
    avoid: &[usize],
    require: &[usize],
    oracle: Arc<dyn AlphaOracle>,
) -> Result<SolutionStream, StreamError> {
    Ok(SolutionStream::new(Box::new(flashlight_source(
        g, t, sigma, avoid, require, oracle,
    )?)))
}

pub fn flashlight_source(
    g: &Graph,
    t: usize,
    sigma: &VertexOrder,
    avoid: &[usize],
    require: &[usize],
    oracle: Arc<dyn AlphaOracle>,
) -> Result<Flashlight, StreamError> {
    if !g.is_independent(require) {
        return Err(StreamError::RequireNotIndependent);
    }
    let req: VertexSet = require.iter().copied().collect();
    if avoid.iter().any(|&v| req.contains(v)) {
        return Err(StreamError::RequireAvoidOverlap);
    }
    let mut blocked = g.closed_neighborhood(&req).to_mask(g.n());
    for &v in avoid {
        blocked.insert(v);
    }
    let root = Frame {
        m: req.into_vec(),
        blocked,
        emit: false,
    };
    let emit = root.m.len() >= t;
    Ok(Flashlight {
        g: Arc::new(g.clone()),
        oracle,
        t,
        order: sigma.clone(),
        stack: Vec::new(),
        started: false,
        root: Some(Frame { emit, ..root }),
    })
}

/// Flashlight with label order and the shared exact oracle.
pub fn enum_is(g: &Graph, t: usize) -> SolutionStream {
    enum_is_lex(g, t, &VertexOrder::by_label(g), &[], &[], MisOracle::global())
        .expect("empty require is independent")
}

/// All subsets of `ground` of size at most `r`, in σ-lexicographic order.
pub fn enum_subsets_le(ground: &[usize], r: usize, sigma: &VertexOrder) -> SolutionStream {
    let mut items: Vec<usize> = ground.iter().copied().collect::<VertexSet>().into_vec();
    items.sort_by_key(|&v| sigma.rank(v));
    SolutionStream::new(Box::new(SubsetSource {
        items,
        r,
        stack: vec![(Vec::new(), 0)],
    }))
}

struct SubsetSource {
    items: Vec<usize>,
    r: usize,
    stack: Vec<(Vec<usize>, usize)>,
}

impl SolutionSource for SubsetSource {
    fn next_solution(&mut self, steps: &mut Steps) -> Result<Option<VertexSet>, StreamError> {
        let Some((set, from)) = self.stack.pop() else {
            return Ok(None);
        };
        steps.tick()?;
        if set.len() < self.r {
            for i in (from..self.items.len()).rev() {
                let mut next = set.clone();
                next.push(self.items[i]);
                self.stack.push((next, i + 1));
            }
        }
        Ok(Some(set.into_iter().collect()))
    }
}
