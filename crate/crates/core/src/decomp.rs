//! Exact treedepth and bridgedepth, trees of bridges, lowering trees.
//!
//! Both depths are computed by memoized recursion over vertex subsets of a
//! fixed host graph, so memo keys are plain `u64` masks.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::graph::{EdgeSet, Graph, VertexSet};

pub const DEFAULT_DEPTH_CAP: usize = 20;
const MASK_LIMIT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompError {
    #[error("graph of {size} vertices exceeds the depth cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("vertex set is not a connected nonempty component")]
    NotConnected,
}

fn check_cap(size: usize, cap: usize) -> Result<(), DecompError> {
    let cap = cap.min(MASK_LIMIT);
    if size > cap {
        Err(DecompError::CapExceeded { size, cap })
    } else {
        Ok(())
    }
}

fn adjacency_masks(g: &Graph) -> Vec<u64> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect()
}

fn mask_components(adj: &[u64], mask: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rest = mask;
    while rest != 0 {
        let mut comp = rest & rest.wrapping_neg();
        let mut frontier = comp;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[v] & mask & !comp;
            comp |= new;
            frontier |= new;
        }
        out.push(comp);
        rest &= !comp;
    }
    out
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

fn to_set(m: u64) -> VertexSet {
    bits(m).collect()
}

fn to_mask(s: &[usize]) -> u64 {
    s.iter().fold(0, |m, &v| m | 1 << v)
}

/// Rooted forest whose ancestor relation covers every edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreedepthDecomposition {
    pub roots: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    pub depth: usize,
}

impl TreedepthDecomposition {
    fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        loop {
            if a == b {
                return true;
            }
            match self.parent[b] {
                Some(p) => b = p,
                None => return false,
            }
        }
    }

    fn depth_of(&self, mut v: usize) -> usize {
        let mut d = 1;
        while let Some(p) = self.parent[v] {
            d += 1;
            v = p;
        }
        d
    }

    /// Every edge joins an ancestor-descendant pair and `depth` is the longest root path.
    pub fn validate(&self, g: &Graph) -> bool {
        let edges_ok = g
            .edges()
            .iter()
            .all(|&(u, v)| self.is_ancestor(u, v) || self.is_ancestor(v, u));
        let d = (0..g.n()).map(|v| self.depth_of(v)).max().unwrap_or(0);
        edges_ok && d == self.depth
    }
}

struct TdSolver<'a> {
    g: &'a Graph,
    adj: Vec<u64>,
    memo: HashMap<u64, (usize, usize)>,
}

impl TdSolver<'_> {
    /// Depth of a mask; for connected masks also the chosen root.
    fn td(&mut self, mask: u64) -> usize {
        if mask == 0 {
            return 0;
        }
        let comps = mask_components(&self.adj, mask);
        if comps.len() > 1 {
            return comps.into_iter().map(|c| self.td(c)).max().unwrap_or(0);
        }
        self.td_connected(mask).0
    }

    fn td_connected(&mut self, mask: u64) -> (usize, usize) {
        if let Some(&hit) = self.memo.get(&mask) {
            return hit;
        }
        let mut best = (usize::MAX, usize::MAX);
        for v in bits(mask) {
            let d = 1 + self.td(mask & !(1 << v));
            let better = d < best.0
                || (d == best.0 && self.g.label(v) < self.g.label(best.1));
            if better {
                best = (d, v);
            }
        }
        self.memo.insert(mask, best);
        best
    }

    fn build(&mut self, mask: u64, parent: Option<usize>, out: &mut TreedepthDecomposition) {
        for comp in mask_components(&self.adj, mask) {
            let (_, root) = self.td_connected(comp);
            out.parent[root] = parent;
            if parent.is_none() {
                out.roots.push(root);
            }
            self.build(comp & !(1 << root), Some(root), out);
        }
    }
}

pub fn treedepth(g: &Graph) -> Result<(usize, TreedepthDecomposition), DecompError> {
    treedepth_with_cap(g, DEFAULT_DEPTH_CAP)
}

/// Minimum depth with an optimal decomposition; root ties go to the smallest label.
pub fn treedepth_with_cap(
    g: &Graph,
    cap: usize,
) -> Result<(usize, TreedepthDecomposition), DecompError> {
    check_cap(g.n(), cap)?;
    let mut solver = TdSolver {
        g,
        adj: adjacency_masks(g),
        memo: HashMap::new(),
    };
    let all = to_mask(&g.vertices());
    let depth = solver.td(all);
    let mut dec = TreedepthDecomposition {
        roots: Vec::new(),
        parent: vec![None; g.n()],
        depth,
    };
    solver.build(all, None, &mut dec);
    Ok((depth, dec))
}

/// Treedepth of `g[s]`.
pub fn treedepth_of(g: &Graph, s: &[usize]) -> Result<usize, DecompError> {
    let (sub, _) = g.induced_subgraph(s).map_err(|_| DecompError::NotConnected)?;
    Ok(treedepth(&sub)?.0)
}

/// Memoized bridgedepth over subsets of a host graph.
pub struct BridgedepthSolver<'a> {
    g: &'a Graph,
    adj: Vec<u64>,
    memo: HashMap<u64, usize>,
}

impl<'a> BridgedepthSolver<'a> {
    pub fn new(g: &'a Graph) -> Result<Self, DecompError> {
        Self::with_cap(g, DEFAULT_DEPTH_CAP)
    }

    pub fn with_cap(g: &'a Graph, cap: usize) -> Result<Self, DecompError> {
        check_cap(g.n(), cap)?;
        Ok(BridgedepthSolver {
            g,
            adj: adjacency_masks(g),
            memo: HashMap::new(),
        })
    }

    pub fn bd_set(&mut self, s: &[usize]) -> usize {
        self.bd(to_mask(s))
    }

    fn bd(&mut self, mask: u64) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = self.memo.get(&mask) {
            return v;
        }
        let comps = mask_components(&self.adj, mask);
        let value = if comps.len() > 1 {
            comps.into_iter().map(|c| self.bd(c)).max().unwrap_or(0)
        } else {
            let trees = self.preimages(mask);
            1 + trees
                .into_iter()
                .map(|t| self.bd(mask & !t))
                .min()
                .unwrap_or(0)
        };
        self.memo.insert(mask, value);
        value
    }

    /// Vertex sets of the maximal trees of bridges of `g[mask]`.
    fn preimages(&self, mask: u64) -> Vec<u64> {
        let set = to_set(mask);
        let (sub, _) = self.g.induced_subgraph(&set).expect("mask within host");
        let (_, pre) = sub.contract_bridges();
        pre.iter()
            .map(|p| p.iter().fold(0u64, |m, &i| m | 1 << set[i]))
            .collect()
    }

    /// Lowering tree of a connected vertex set: the tree of bridges whose
    /// removal leaves the smallest bridgedepth, ties to the smallest label.
    pub fn lowering_tree(&mut self, comp: &[usize]) -> Result<LoweringTree, DecompError> {
        let mask = to_mask(comp);
        if mask == 0 || mask_components(&self.adj, mask).len() != 1 {
            return Err(DecompError::NotConnected);
        }
        let before = self.bd(mask);
        let g = self.g;
        let min_label = |t: u64| bits(t).map(|v| g.label(v)).min().unwrap_or(u32::MAX);
        let mut best: Option<(usize, u32, u64)> = None;
        for t in self.preimages(mask) {
            let key = (self.bd(mask & !t), min_label(t));
            if best.map_or(true, |(d, l, _)| key < (d, l)) {
                best = Some((key.0, key.1, t));
            }
        }
        let (after, _, t) = best.expect("connected set has a tree");
        let vertices = to_set(t);
        let tree = TreeOfBridges::induced(g, vertices);
        let drop = before - after;
        assert_eq!(drop, 1, "lowering tree must drop bridgedepth by one");
        Ok(LoweringTree { tree, drop })
    }
}

pub fn bridgedepth(g: &Graph) -> Result<usize, DecompError> {
    Ok(BridgedepthSolver::new(g)?.bd_set(&g.vertices()))
}

/// Bridgedepth of `g[s]`.
pub fn bridgedepth_of(g: &Graph, s: &[usize]) -> Result<usize, DecompError> {
    let (sub, _) = g.induced_subgraph(s).map_err(|_| DecompError::NotConnected)?;
    bridgedepth(&sub)
}

/// A connected vertex set whose induced edges are all bridges of the host.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeOfBridges {
    pub vertices: VertexSet,
    pub edges: EdgeSet,
}

impl TreeOfBridges {
    pub fn induced(g: &Graph, vertices: VertexSet) -> Self {
        let edges = g
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| vertices.contains(u) && vertices.contains(v))
            .collect();
        TreeOfBridges { vertices, edges }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .copied()
            .filter(|&v| self.degree(v) <= 1)
            .collect()
    }

    /// Connected, acyclic, and every edge a bridge of `g`.
    pub fn validate(&self, g: &Graph) -> bool {
        let bridges = g.bridges();
        let n = self.vertices.len();
        if n == 0 {
            return self.edges.is_empty();
        }
        if self.edges.len() != n - 1 || !self.edges.iter().all(|&(u, v)| bridges.contains(u, v)) {
            return false;
        }
        let start = self.vertices[0];
        let mut seen = VertexSet::singleton(start);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for w in self.neighbors(u) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen == self.vertices
    }

    fn bfs(&self, s: usize) -> (usize, HashMap<usize, usize>) {
        let mut prev = HashMap::from([(s, s)]);
        let mut queue = VecDeque::from([s]);
        let mut last = s;
        while let Some(u) = queue.pop_front() {
            last = u;
            for w in self.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                    e.insert(u);
                    queue.push_back(w);
                }
            }
        }
        (last, prev)
    }
}

/// A tree of bridges whose deletion lowers bridgedepth by exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoweringTree {
    pub tree: TreeOfBridges,
    pub drop: usize,
}

pub fn lowering_tree(g: &Graph, comp: &[usize]) -> Result<LoweringTree, DecompError> {
    BridgedepthSolver::new(g)?.lowering_tree(comp)
}

/// A diameter path by double BFS.
pub fn longest_path(t: &TreeOfBridges) -> TreeOfBridges {
    let Some(&start) = t.vertices.first() else {
        return t.clone();
    };
    let (a, _) = t.bfs(start);
    let (b, prev) = t.bfs(a);
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = prev[&cur];
        path.push(cur);
    }
    let edges = path.windows(2).map(|w| (w[0], w[1])).collect();
    TreeOfBridges {
        vertices: path.into_iter().collect(),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn treedepth_examples() {
        assert_eq!(treedepth(&Graph::new(1)).unwrap().0, 1);
        assert_eq!(treedepth(&Graph::new(4)).unwrap().0, 1);
        assert_eq!(treedepth(&Graph::new(0)).unwrap().0, 0);
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let (d, dec) = treedepth(&p3).unwrap();
        assert_eq!(d, 2);
        assert_eq!(dec.roots, vec![1]);
        assert!(dec.validate(&p3));
        let c5 = cycle(5);
        let (d, dec) = treedepth(&c5).unwrap();
        assert_eq!(d, 4);
        assert!(dec.validate(&c5));
    }

    #[test]
    fn bridgedepth_examples() {
        assert_eq!(bridgedepth(&Graph::new(0)).unwrap(), 0);
        let tree = Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(bridgedepth(&tree).unwrap(), 1);
        assert_eq!(bridgedepth(&cycle(4)).unwrap(), 2);
        assert_eq!(bridgedepth(&Graph::new(3)).unwrap(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::new(5);
        assert_eq!(
            treedepth_with_cap(&g, 4).unwrap_err(),
            DecompError::CapExceeded { size: 5, cap: 4 }
        );
    }

    #[test]
    fn lowering_trees() {
        let tree = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let lt = lowering_tree(&tree, &[0, 1, 2, 3]).unwrap();
        assert_eq!(lt.tree.vertices.len(), 4);
        assert!(lt.tree.validate(&tree));
        let c4 = cycle(4);
        let lt = lowering_tree(&c4, &[0, 1, 2, 3]).unwrap();
        assert_eq!(lt.tree.vertices.as_slice(), &[0]);
        // triangles 0-1-2 and 3-4-5 joined by bridge 2-3
        let g = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        )
        .unwrap();
        let lt = lowering_tree(&g, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(lt.tree.vertices.as_slice(), &[2, 3]);
        let mut solver = BridgedepthSolver::new(&g).unwrap();
        let rest: Vec<usize> = (0..6).filter(|v| !lt.tree.vertices.contains(*v)).collect();
        assert_eq!(solver.bd_set(&(0..6).collect::<Vec<_>>()), 1 + solver.bd_set(&rest));
    }

    #[test]
    fn longest_paths() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let t = TreeOfBridges::induced(&star, star.vertices());
        let p = longest_path(&t);
        assert_eq!(p.vertices.len(), 3);
        assert!(p.vertices.contains(0));
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = TreeOfBridges::induced(&path, path.vertices());
        assert_eq!(longest_path(&t), t);
        let single = TreeOfBridges::induced(&Graph::new(1), VertexSet::singleton(0));
        assert_eq!(longest_path(&single), single);
    }
}
