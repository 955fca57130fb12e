//! Exact maximum independent set and the quantities derived from it:
//! extension feasibility, conflicts, chunks, chunk degrees, freeness.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::graph::{Graph, VertexSet};

pub const DEFAULT_ALPHA_CAP: usize = 40;
/// Components up to this many vertices are memoized.
pub const CACHE_ADMISSION: usize = 16;
const HARD_LIMIT: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MisError {
    #[error("component of {size} vertices exceeds the exact solver cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("graph is not a forest")]
    NotForest,
    #[error("probe and region overlap")]
    Overlap,
}

/// Anything that can report `α` of an induced subgraph.
pub trait AlphaOracle: Send + Sync {
    fn alpha(&self, g: &Graph, alive: &FixedBitSet) -> Result<usize, MisError>;
}

/// Memo table keyed by the sorted edge list of a relabelled component.
#[derive(Debug, Default)]
pub struct AlphaCache {
    map: RwLock<HashMap<Vec<u8>, usize>>,
}

impl AlphaCache {
    pub fn len(&self) -> usize {
        self.map.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &[u8]) -> Option<usize> {
        self.map.read().ok()?.get(key).copied()
    }

    fn put(&self, key: Vec<u8>, value: usize) {
        if let Ok(mut m) = self.map.write() {
            m.insert(key, value);
        }
    }
}

/// Branch-and-reduce solver with a per-component size cap.
#[derive(Debug)]
pub struct MisOracle {
    cap: usize,
    cache: AlphaCache,
}

impl Default for MisOracle {
    fn default() -> Self {
        MisOracle::with_cap(DEFAULT_ALPHA_CAP)
    }
}

impl MisOracle {
    pub fn with_cap(cap: usize) -> Self {
        MisOracle {
            cap: cap.min(HARD_LIMIT),
            cache: AlphaCache::default(),
        }
    }

    /// Process-wide oracle with the default cap.
    pub fn global() -> Arc<MisOracle> {
        static GLOBAL: OnceLock<Arc<MisOracle>> = OnceLock::new();
        GLOBAL.get_or_init(|| Arc::new(MisOracle::default())).clone()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn cache(&self) -> &AlphaCache {
        &self.cache
    }

    pub fn alpha_exact(&self, g: &Graph) -> Result<usize, MisError> {
        self.alpha_masked(g, &g.vertices().to_mask(g.n()))
    }

    pub fn alpha_of(&self, g: &Graph, s: &[usize]) -> Result<usize, MisError> {
        let mut mask = FixedBitSet::with_capacity(g.n());
        for &v in s {
            mask.insert(v);
        }
        self.alpha_masked(g, &mask)
    }

    pub fn alpha_masked(&self, g: &Graph, alive: &FixedBitSet) -> Result<usize, MisError> {
        let mut total = 0;
        for comp in g.components_in(alive) {
            if comp.len() > self.cap {
                return Err(MisError::CapExceeded {
                    size: comp.len(),
                    cap: self.cap,
                });
            }
            total += self.solve_component(g, &comp);
        }
        Ok(total)
    }

    fn solve_component(&self, g: &Graph, comp: &[usize]) -> usize {
        let mut local = vec![usize::MAX; g.n()];
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let adj: Vec<u128> = comp
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| local[w] != usize::MAX)
                    .fold(0u128, |acc, &w| acc | (1u128 << local[w]))
            })
            .collect();
        let all = if comp.len() == 128 {
            u128::MAX
        } else {
            (1u128 << comp.len()) - 1
        };
        self.solve(&adj, all)
    }

    fn solve(&self, adj: &[u128], mut alive: u128) -> usize {
        let mut taken = 0;
        loop {
            let mut changed = false;
            let mut it = alive;
            while it != 0 {
                let v = it.trailing_zeros() as usize;
                it &= it - 1;
                if alive >> v & 1 == 0 {
                    continue;
                }
                if (adj[v] & alive).count_ones() <= 1 {
                    taken += 1;
                    alive &= !(adj[v] | 1u128 << v);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if alive == 0 {
            return taken;
        }
        let comp = component_of(adj, alive, alive.trailing_zeros() as usize);
        if comp != alive {
            return taken + self.solve_connected(adj, comp) + self.solve(adj, alive & !comp);
        }
        taken + self.solve_connected(adj, alive)
    }

    fn solve_connected(&self, adj: &[u128], alive: u128) -> usize {
        let size = alive.count_ones() as usize;
        let key = if size <= CACHE_ADMISSION {
            let key = canonical_key(adj, alive);
            if let Some(v) = self.cache.get(&key) {
                return v;
            }
            Some(key)
        } else {
            None
        };
        let mut best_v = 0;
        let mut best_d = 0;
        let mut it = alive;
        while it != 0 {
            let v = it.trailing_zeros() as usize;
            it &= it - 1;
            let d = (adj[v] & alive).count_ones();
            if d > best_d {
                best_d = d;
                best_v = v;
            }
        }
        let without = self.solve(adj, alive & !(1u128 << best_v));
        let with = 1 + self.solve(adj, alive & !(adj[best_v] | 1u128 << best_v));
        let value = without.max(with);
        if let Some(key) = key {
            self.cache.put(key, value);
        }
        value
    }
}

fn component_of(adj: &[u128], alive: u128, start: usize) -> u128 {
    let mut comp = 1u128 << start;
    let mut frontier = comp;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & alive & !comp;
        comp |= new;
        frontier |= new;
    }
    comp
}

fn canonical_key(adj: &[u128], alive: u128) -> Vec<u8> {
    let mut idx = [0u8; 128];
    let mut it = alive;
    let mut k = 0u8;
    while it != 0 {
        let v = it.trailing_zeros() as usize;
        it &= it - 1;
        idx[v] = k;
        k += 1;
    }
    let mut key = vec![k];
    let mut it = alive;
    while it != 0 {
        let v = it.trailing_zeros() as usize;
        it &= it - 1;
        let mut nb = adj[v] & alive & !((1u128 << v) | ((1u128 << v) - 1));
        while nb != 0 {
            let w = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            key.push(idx[v]);
            key.push(idx[w]);
        }
    }
    key
}

impl AlphaOracle for MisOracle {
    fn alpha(&self, g: &Graph, alive: &FixedBitSet) -> Result<usize, MisError> {
        self.alpha_masked(g, alive)
    }
}

/// Linear-time tree DP; rejects inputs with a cycle.
#[derive(Debug, Default, Clone, Copy)]
pub struct ForestOracle;

impl AlphaOracle for ForestOracle {
    fn alpha(&self, g: &Graph, alive: &FixedBitSet) -> Result<usize, MisError> {
        alpha_forest_masked(g, alive)
    }
}

pub fn alpha_forest(g: &Graph) -> Result<usize, MisError> {
    alpha_forest_masked(g, &g.vertices().to_mask(g.n()))
}

pub fn alpha_forest_masked(g: &Graph, alive: &FixedBitSet) -> Result<usize, MisError> {
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut seen = FixedBitSet::with_capacity(n);
    let mut take = vec![0usize; n];
    let mut skip = vec![0usize; n];
    let mut total = 0;
    for root in alive.ones().filter(|&v| v < n) {
        if seen.contains(root) {
            continue;
        }
        let mut order = Vec::new();
        let mut stack = vec![root];
        seen.insert(root);
        while let Some(u) = stack.pop() {
            order.push(u);
            for &w in g.neighbors(u) {
                if !alive.contains(w) || w == parent[u] {
                    continue;
                }
                if seen.contains(w) {
                    return Err(MisError::NotForest);
                }
                seen.insert(w);
                parent[w] = u;
                stack.push(w);
            }
        }
        for &u in order.iter().rev() {
            take[u] += 1;
            let p = parent[u];
            if p != usize::MAX {
                take[p] += skip[u];
                skip[p] += take[u].max(skip[u]);
            }
        }
        total += take[root].max(skip[root]);
    }
    Ok(total)
}

fn mask_without(g: &Graph, removed: &[usize]) -> FixedBitSet {
    let mut mask = FixedBitSet::with_capacity(g.n());
    mask.insert_range(..);
    for &v in removed {
        mask.set(v, false);
    }
    mask
}

/// Does an independent set of size `>= t` exist that contains `m` and avoids `p`?
pub fn is_extension(
    oracle: &dyn AlphaOracle,
    g: &Graph,
    m: &[usize],
    p: &[usize],
    t: usize,
) -> Result<bool, MisError> {
    if !g.is_independent(m) {
        return Ok(false);
    }
    if m.len() >= t {
        return Ok(true);
    }
    let mut gone: Vec<usize> = g.closed_neighborhood(m).into_vec();
    gone.extend_from_slice(p);
    let alive = mask_without(g, &gone);
    Ok(oracle.alpha(g, &alive)? >= t - m.len())
}

/// `α(g[region]) - α(g[region \ N(probe)])`.
pub fn conflicts(
    oracle: &dyn AlphaOracle,
    g: &Graph,
    region: &[usize],
    probe: &[usize],
) -> Result<usize, MisError> {
    let region: VertexSet = region.iter().copied().collect();
    let probe: VertexSet = probe.iter().copied().collect();
    if !region.is_disjoint(&probe) {
        return Err(MisError::Overlap);
    }
    let full = region.to_mask(g.n());
    let hit = g.neighborhood(&probe);
    let mut rest = full.clone();
    let mut touched = false;
    for &v in hit.iter() {
        if rest.contains(v) {
            rest.set(v, false);
            touched = true;
        }
    }
    if !touched {
        return Ok(0);
    }
    Ok(oracle.alpha(g, &full)? - oracle.alpha(g, &rest)?)
}

/// All chunks of a modulator: independent subsets up to `max_size` that
/// contain no forbidden set. Includes the empty chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkSet {
    pub chunks: Vec<VertexSet>,
    pub max_size: usize,
}

impl ChunkSet {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn nonempty(&self) -> impl Iterator<Item = &VertexSet> {
        self.chunks.iter().filter(|c| !c.is_empty())
    }
}

pub fn enumerate_chunks(
    g: &Graph,
    x: &[usize],
    max_size: usize,
    forbidden: &[VertexSet],
) -> ChunkSet {
    let x: Vec<usize> = x.iter().copied().collect::<VertexSet>().into_vec();
    let mut chunks = vec![VertexSet::new()];
    let mut layer = vec![(VertexSet::new(), 0usize)];
    for _ in 0..max_size.min(x.len()) {
        let mut next = Vec::new();
        for (set, from) in &layer {
            for (i, &v) in x.iter().enumerate().skip(*from) {
                if set.iter().any(|&u| g.has_edge(u, v)) {
                    continue;
                }
                let mut bigger = set.clone();
                bigger.insert(v);
                if forbidden.iter().any(|h| h.is_subset(&bigger)) {
                    continue;
                }
                next.push((bigger, i + 1));
            }
        }
        chunks.extend(next.iter().map(|(s, _)| s.clone()));
        layer = next;
    }
    ChunkSet { chunks, max_size }
}

/// Number of components of `components` on which `chunk` has a conflict.
pub fn chunk_degree(
    oracle: &dyn AlphaOracle,
    g: &Graph,
    components: &[VertexSet],
    chunk: &[usize],
) -> Result<usize, MisError> {
    let mut d = 0;
    for comp in components {
        if conflicts(oracle, g, comp, chunk)? > 0 {
            d += 1;
        }
    }
    Ok(d)
}

/// `z` is free if no chunk conflicts with it.
pub fn is_free(
    oracle: &dyn AlphaOracle,
    g: &Graph,
    chunks: &ChunkSet,
    z: &[usize],
) -> Result<bool, MisError> {
    for y in chunks.nonempty() {
        if conflicts(oracle, g, z, y)? > 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every chunk conflicting with `z` has at least `y` conflicts on the whole
/// rest `rest = V \ X`.
pub fn is_almost_free(
    oracle: &dyn AlphaOracle,
    g: &Graph,
    chunks: &ChunkSet,
    rest: &[usize],
    z: &[usize],
    y: usize,
) -> Result<bool, MisError> {
    if y == 0 {
        return Ok(true);
    }
    for chunk in chunks.nonempty() {
        if conflicts(oracle, g, z, chunk)? > 0 && conflicts(oracle, g, rest, chunk)? < y {
            return Ok(false);
        }
    }
    Ok(true)
}
