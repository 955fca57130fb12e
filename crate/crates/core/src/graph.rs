//! Simple undirected graphs with stable external labels.
//!
//! Internal ids are dense and 0-based; every edit returns a new graph and
//! re-densifies ids, while [`Label`]s survive unchanged. `identify` keeps the
//! label of the surviving vertex.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// External vertex name. Solutions are always reported in labels.
pub type Label = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex id {0} out of range (n = {1})")]
    OutOfRange(usize, usize),
    #[error("self-loop on vertex {0}")]
    Loop(usize),
    #[error("cannot identify vertex {0} with itself")]
    IdenticalVertices(usize),
    #[error("duplicate label {0}")]
    DuplicateLabel(Label),
    #[error("adjacency of {0} is not symmetric")]
    Asymmetric(usize),
    #[error("graph is not a forest")]
    NotForest,
}

/// Sorted, duplicate-free set of internal vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(vec![v])
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn insert(&mut self, v: usize) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: usize) -> bool {
        match self.0.binary_search(&v) {
            Ok(i) => {
                self.0.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).copied().collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.iter().all(|&v| !other.contains(v))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn to_mask(&self, n: usize) -> FixedBitSet {
        let mut mask = FixedBitSet::with_capacity(n);
        for &v in &self.0 {
            mask.insert(v);
        }
        mask
    }

    pub fn from_mask(mask: &FixedBitSet) -> Self {
        VertexSet(mask.ones().collect())
    }
}

impl Deref for VertexSet {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Set of unordered vertex pairs, stored as `(min, max)` in sorted order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSet(Vec<(usize, usize)>);

impl EdgeSet {
    pub fn new() -> Self {
        EdgeSet(Vec::new())
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.0.binary_search(&norm(u, v)).is_ok()
    }

    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        let e = norm(u, v);
        match self.0.binary_search(&e) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, e);
                true
            }
        }
    }

    pub fn vertices(&self) -> VertexSet {
        self.0.iter().flat_map(|&(u, v)| [u, v]).collect()
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.0
    }
}

impl Deref for EdgeSet {
    type Target = [(usize, usize)];
    fn deref(&self) -> &[(usize, usize)] {
        &self.0
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut v: Vec<(usize, usize)> = iter.into_iter().map(|(a, b)| norm(a, b)).collect();
        v.sort_unstable();
        v.dedup();
        EdgeSet(v)
    }
}

fn norm(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Immutable simple undirected graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<Label>,
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<(Label, Label)> = self
            .edges()
            .iter()
            .map(|&(u, v)| (self.labels[u], self.labels[v]))
            .collect();
        f.debug_struct("Graph")
            .field("labels", &self.labels)
            .field("edges", &edges)
            .finish()
    }
}

impl Graph {
    /// Edgeless graph on `n` vertices labelled `0..n`.
    pub fn new(n: usize) -> Self {
        Graph {
            labels: (0..n as Label).collect(),
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn with_labels(labels: Vec<Label>) -> Result<Self, GraphError> {
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for &l in &labels {
            if !seen.insert(l) {
                return Err(GraphError::DuplicateLabel(l));
            }
        }
        let n = labels.len();
        Ok(Graph {
            labels,
            adj: vec![Vec::new(); n],
            m: 0,
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Graph::new(n).add_edges(edges)
    }

    pub fn from_labeled_edges(
        labels: Vec<Label>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        Graph::with_labels(labels)?.add_edges(edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> Label {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Internal id carrying `label`, if present.
    pub fn id_of(&self, label: Label) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn label_index(&self) -> HashMap<Label, usize> {
        self.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect()
    }

    /// Internal ids of `labels`, silently dropping labels not in the graph.
    pub fn ids_of(&self, labels: &[Label]) -> VertexSet {
        let idx = self.label_index();
        labels.iter().filter_map(|l| idx.get(l).copied()).collect()
    }

    /// Sorted labels of `set`.
    pub fn labels_of(&self, set: &[usize]) -> Vec<Label> {
        let mut out: Vec<Label> = set.iter().map(|&v| self.labels[v]).collect();
        out.sort_unstable();
        out
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> EdgeSet {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        EdgeSet(out)
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet((0..self.n()).collect())
    }

    /// Open neighborhood `N(S)`, excluding `S` itself.
    pub fn neighborhood(&self, s: &[usize]) -> VertexSet {
        let inside: VertexSet = s.iter().copied().collect();
        s.iter()
            .flat_map(|&v| self.adj[v].iter().copied())
            .filter(|v| !inside.contains(*v))
            .collect()
    }

    /// Closed neighborhood `N[S]`.
    pub fn closed_neighborhood(&self, s: &[usize]) -> VertexSet {
        s.iter()
            .copied()
            .chain(s.iter().flat_map(|&v| self.adj[v].iter().copied()))
            .collect()
    }

    pub fn is_independent(&self, s: &[usize]) -> bool {
        s.iter()
            .enumerate()
            .all(|(i, &u)| s[i + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::OutOfRange(v, self.n()))
        }
    }

    /// Subgraph induced by `s`; the second component maps old ids to new ids.
    pub fn induced_subgraph(&self, s: &[usize]) -> Result<(Graph, Vec<Option<usize>>), GraphError> {
        for &v in s {
            self.check(v)?;
        }
        let keep: VertexSet = s.iter().copied().collect();
        let mut map = vec![None; self.n()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = Some(new);
        }
        let labels: Vec<Label> = keep.iter().map(|&v| self.labels[v]).collect();
        let mut adj = Vec::with_capacity(keep.len());
        let mut m2 = 0;
        for &old in keep.iter() {
            let row: Vec<usize> = self.adj[old].iter().filter_map(|&w| map[w]).collect();
            m2 += row.len();
            adj.push(row);
        }
        Ok((
            Graph {
                labels,
                adj,
                m: m2 / 2,
            },
            map,
        ))
    }

    /// Induced subgraph on the vertices set in `mask`.
    pub fn induced_by_mask(&self, mask: &FixedBitSet) -> (Graph, Vec<Option<usize>>) {
        let s: Vec<usize> = mask.ones().filter(|&v| v < self.n()).collect();
        self.induced_subgraph(&s).expect("mask ids are in range")
    }

    pub fn delete_vertices(&self, s: &[usize]) -> Result<Graph, GraphError> {
        for &v in s {
            self.check(v)?;
        }
        let gone: VertexSet = s.iter().copied().collect();
        let keep: Vec<usize> = (0..self.n()).filter(|&v| !gone.contains(v)).collect();
        Ok(self.induced_subgraph(&keep)?.0)
    }

    pub fn delete_edges(&self, e: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        for &(u, v) in e {
            g.check(u)?;
            g.check(v)?;
            if let Ok(i) = g.adj[u].binary_search(&v) {
                g.adj[u].remove(i);
                let j = g.adj[v].binary_search(&u).expect("symmetric adjacency");
                g.adj[v].remove(j);
                g.m -= 1;
            }
        }
        Ok(g)
    }

    /// Adds edges; existing edges are left untouched.
    pub fn add_edges(&self, e: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        for &(u, v) in e {
            g.check(u)?;
            g.check(v)?;
            if u == v {
                return Err(GraphError::Loop(u));
            }
            if let Err(i) = g.adj[u].binary_search(&v) {
                g.adj[u].insert(i, v);
                let j = g.adj[v].binary_search(&u).unwrap_err();
                g.adj[v].insert(j, u);
                g.m += 1;
            }
        }
        Ok(g)
    }

    /// Appends a vertex with the given label and neighbors; returns its id.
    pub fn add_vertex(&self, label: Label, nbrs: &[usize]) -> Result<(Graph, usize), GraphError> {
        if self.labels.contains(&label) {
            return Err(GraphError::DuplicateLabel(label));
        }
        let mut g = self.clone();
        g.labels.push(label);
        g.adj.push(Vec::new());
        let id = g.n() - 1;
        let edges: Vec<(usize, usize)> = nbrs.iter().map(|&w| (id, w)).collect();
        Ok((g.add_edges(&edges)?, id))
    }

    /// Merges `merge` into `keep`; the result is simple and `keep` keeps its label.
    pub fn identify(&self, keep: usize, merge: usize) -> Result<Graph, GraphError> {
        self.check(keep)?;
        self.check(merge)?;
        if keep == merge {
            return Err(GraphError::IdenticalVertices(keep));
        }
        let extra: Vec<(usize, usize)> = self.adj[merge]
            .iter()
            .filter(|&&w| w != keep)
            .map(|&w| (keep, w))
            .collect();
        self.add_edges(&extra)?.delete_vertices(&[merge])
    }

    /// Vertex sets of the connected components, ordered by smallest id.
    pub fn connected_components(&self) -> Vec<VertexSet> {
        let all = self.vertices().to_mask(self.n());
        self.components_in(&all)
    }

    /// Components of the subgraph induced by `alive`.
    pub fn components_in(&self, alive: &FixedBitSet) -> Vec<VertexSet> {
        let n = self.n();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in alive.ones().filter(|&v| v < n) {
            if seen.contains(s) {
                continue;
            }
            seen.insert(s);
            stack.push(s);
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &w in &self.adj[u] {
                    if alive.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp.into_iter().collect());
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    pub fn is_forest(&self) -> bool {
        self.m + self.connected_components().len() == self.n()
    }

    /// Bridges via iterative low-link DFS.
    pub fn bridges(&self) -> EdgeSet {
        let n = self.n();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        let mut out = Vec::new();
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // (vertex, parent, next neighbor index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (u, p, ref mut i)) = stack.last_mut() {
                if *i < self.adj[u].len() {
                    let w = self.adj[u][*i];
                    *i += 1;
                    if w == p {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, u, 0));
                    } else {
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if p != usize::MAX {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            out.push((p, u));
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Contracts every bridge. Returns the contracted graph and, per contracted
    /// vertex, the original vertices it absorbed (a maximal tree-of-bridges).
    pub fn contract_bridges(&self) -> (Graph, Vec<VertexSet>) {
        let n = self.n();
        let bridges = self.bridges();
        let mut uf = UnionFind::new(n);
        for &(u, v) in bridges.iter() {
            uf.union(u, v);
        }
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = uf.find(v);
            if class_of[r] == usize::MAX {
                class_of[r] = classes.len();
                classes.push(Vec::new());
            }
            classes[class_of[r]].push(v);
        }
        let cls = |v: usize, uf: &mut UnionFind| class_of[uf.find(v)];
        let labels: Vec<Label> = classes
            .iter()
            .map(|c| c.iter().map(|&v| self.labels[v]).min().expect("nonempty class"))
            .collect();
        let mut edges = Vec::new();
        for &(u, v) in self.edges().iter() {
            let (a, b) = (cls(u, &mut uf), cls(v, &mut uf));
            if a != b {
                edges.push((a, b));
            }
        }
        let g = Graph::from_labeled_edges(labels, &edges).expect("contraction is simple");
        (g, classes.into_iter().map(VertexSet).collect())
    }

    /// Full simplicity audit: symmetric, loop-free, duplicate-free, distinct labels.
    pub fn audit(&self) -> Result<(), GraphError> {
        let mut seen = std::collections::HashSet::new();
        for &l in &self.labels {
            if !seen.insert(l) {
                return Err(GraphError::DuplicateLabel(l));
            }
        }
        let mut deg_sum = 0;
        for u in 0..self.n() {
            let row = &self.adj[u];
            deg_sum += row.len();
            for (i, &w) in row.iter().enumerate() {
                self.check(w)?;
                if w == u {
                    return Err(GraphError::Loop(u));
                }
                if i > 0 && row[i - 1] >= w {
                    return Err(GraphError::Asymmetric(u));
                }
                if self.adj[w].binary_search(&u).is_err() {
                    return Err(GraphError::Asymmetric(u));
                }
            }
        }
        if deg_sum != 2 * self.m {
            return Err(GraphError::Asymmetric(0));
        }
        Ok(())
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
