//! Bipartite matching, crown decompositions and the feedback vertex set
//! improvement step.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{EdgeSet, Graph, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrownError {
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("graph has {n} vertices, need at least 3t + 1 = {need}")]
    TooSmall { n: usize, need: usize },
    #[error("modulator is not a feedback vertex set")]
    NotFvs,
    #[error("invalid crown decomposition: {0}")]
    Invalid(&'static str),
}

/// A set of pairwise disjoint edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pub edges: EdgeSet,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn vertices(&self) -> VertexSet {
        self.edges.vertices()
    }

    pub fn partner(&self, v: usize) -> Option<usize> {
        self.edges.iter().find_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Edges exist in `g` and no vertex is covered twice.
    pub fn is_valid(&self, g: &Graph) -> bool {
        let mut seen = VertexSet::new();
        self.edges
            .iter()
            .all(|&(u, v)| g.has_edge(u, v) && seen.insert(u) && seen.insert(v))
    }

    fn truncated(&self, k: usize) -> Matching {
        Matching {
            edges: self.edges.iter().take(k).copied().collect(),
        }
    }
}

/// Maximum matching between `left` and `right` using only edges of `g`
/// that join the two sides.
pub fn hopcroft_karp(g: &Graph, left: &[usize], right: &[usize]) -> Matching {
    let (mate_l, _) = hk_mates(g, left, right);
    Matching {
        edges: left
            .iter()
            .enumerate()
            .filter_map(|(i, &u)| mate_l[i].map(|j| (u, right[j])))
            .collect(),
    }
}

/// Returns `(mate of left index, mate of right index)` as indices.
fn hk_mates(g: &Graph, left: &[usize], right: &[usize]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut ridx = vec![usize::MAX; g.n()];
    for (j, &v) in right.iter().enumerate() {
        ridx[v] = j;
    }
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|&u| {
            g.neighbors(u)
                .iter()
                .filter_map(|&w| (ridx[w] != usize::MAX).then_some(ridx[w]))
                .collect()
        })
        .collect();
    let (nl, nr) = (left.len(), right.len());
    let mut mate_l: Vec<Option<usize>> = vec![None; nl];
    let mut mate_r: Vec<Option<usize>> = vec![None; nr];
    let mut dist = vec![usize::MAX; nl];
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for i in 0..nl {
            if mate_l[i].is_none() {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                match mate_r[j] {
                    None => found = true,
                    Some(k) if dist[k] == usize::MAX => {
                        dist[k] = dist[i] + 1;
                        queue.push_back(k);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for i in 0..nl {
            if mate_l[i].is_none() {
                augment(i, &adj, &mut mate_l, &mut mate_r, &mut dist);
            }
        }
    }
    (mate_l, mate_r)
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    mate_l: &mut [Option<usize>],
    mate_r: &mut [Option<usize>],
    dist: &mut [usize],
) -> bool {
    for &j in &adj[i] {
        let ok = match mate_r[j] {
            None => true,
            Some(k) => dist[k] == dist[i] + 1 && augment(k, adj, mate_l, mate_r, dist),
        };
        if ok {
            mate_l[i] = Some(j);
            mate_r[j] = Some(i);
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}

/// Minimum vertex cover of the bipartite graph `(left, right)` by König's
/// theorem, together with the maximum matching it was read from.
pub fn konig_cover(g: &Graph, left: &[usize], right: &[usize]) -> (VertexSet, Matching) {
    let (mate_l, mate_r) = hk_mates(g, left, right);
    let mut ridx = vec![usize::MAX; g.n()];
    for (j, &v) in right.iter().enumerate() {
        ridx[v] = j;
    }
    let mut zl = vec![false; left.len()];
    let mut zr = vec![false; right.len()];
    let mut queue: VecDeque<usize> = (0..left.len()).filter(|&i| mate_l[i].is_none()).collect();
    for &i in &queue {
        zl[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &w in g.neighbors(left[i]) {
            let j = ridx[w];
            if j == usize::MAX || zr[j] || mate_l[i] == Some(j) {
                continue;
            }
            zr[j] = true;
            if let Some(k) = mate_r[j] {
                if !zl[k] {
                    zl[k] = true;
                    queue.push_back(k);
                }
            }
        }
    }
    let cover: VertexSet = left
        .iter()
        .enumerate()
        .filter(|&(i, _)| !zl[i])
        .map(|(_, &v)| v)
        .chain(right.iter().enumerate().filter(|&(j, _)| zr[j]).map(|(_, &v)| v))
        .collect();
    let matching = Matching {
        edges: left
            .iter()
            .enumerate()
            .filter_map(|(i, &u)| mate_l[i].map(|j| (u, right[j])))
            .collect(),
    };
    (cover, matching)
}

/// `(C, H, B)` with `C` independent, `N(C) = H` and an `H`-saturating matching into `C`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrownDecomposition {
    pub crown: VertexSet,
    pub head: VertexSet,
    pub body: VertexSet,
    pub saturating: Matching,
}

impl CrownDecomposition {
    pub fn width(&self) -> usize {
        self.head.len()
    }

    pub fn validate(&self, g: &Graph) -> Result<(), CrownError> {
        let n = g.n();
        let total = self.crown.len() + self.head.len() + self.body.len();
        let union = self.crown.union(&self.head).union(&self.body);
        if total != n || union.len() != n {
            return Err(CrownError::Invalid("parts do not partition V"));
        }
        if !g.is_independent(&self.crown) {
            return Err(CrownError::Invalid("crown is not independent"));
        }
        if g.neighborhood(&self.crown) != self.head {
            return Err(CrownError::Invalid("N(C) differs from H"));
        }
        let m = &self.saturating;
        let ok = m.is_valid(g)
            && m.len() == self.head.len()
            && m.edges.iter().all(|&(a, b)| {
                (self.head.contains(a) && self.crown.contains(b))
                    || (self.head.contains(b) && self.crown.contains(a))
            });
        if !ok {
            return Err(CrownError::Invalid("matching does not saturate H into C"));
        }
        Ok(())
    }
}

/// Crown decomposition with `|B| + 2|H| <= 3t` for the parameter `t` it was built with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeavyCrown {
    pub base: CrownDecomposition,
    pub t: usize,
}

impl HeavyCrown {
    pub fn validate(&self, g: &Graph) -> Result<(), CrownError> {
        self.base.validate(g)?;
        if self.base.width() > self.t {
            return Err(CrownError::Invalid("width exceeds t"));
        }
        if self.base.body.len() + 2 * self.base.head.len() > 3 * self.t {
            return Err(CrownError::Invalid("|B| + 2|H| > 3t"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrownOrMatching {
    Matching(Matching),
    Crown(HeavyCrown),
}

fn greedy_matching(g: &Graph) -> Matching {
    let mut used = vec![false; g.n()];
    let mut edges = Vec::new();
    for u in 0..g.n() {
        if used[u] {
            continue;
        }
        if let Some(&w) = g.neighbors(u).iter().find(|&&w| !used[w]) {
            used[u] = true;
            used[w] = true;
            edges.push((u, w));
        }
    }
    Matching {
        edges: edges.into_iter().collect(),
    }
}

/// Either a matching of size `t + 1` or a heavy crown of width at most `t`.
///
/// Two-matching construction: a greedy maximal matching `M1`, then a maximum
/// matching between `V(M1)` and the independent rest `I`, then König heads.
/// Body vertices whose whole neighborhood lies in the head are moved into the
/// crown afterwards.
pub fn heavy_crown_or_matching(g: &Graph, t: usize) -> Result<CrownOrMatching, CrownError> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(CrownError::IsolatedVertex(v));
    }
    if g.n() < 3 * t + 1 {
        return Err(CrownError::TooSmall {
            n: g.n(),
            need: 3 * t + 1,
        });
    }
    let m1 = greedy_matching(g);
    if m1.len() > t {
        return Ok(CrownOrMatching::Matching(m1.truncated(t + 1)));
    }
    let vm1 = m1.vertices();
    let rest: Vec<usize> = (0..g.n()).filter(|&v| !vm1.contains(v)).collect();
    let (cover, m2) = konig_cover(g, &vm1, &rest);
    if m2.len() > t {
        return Ok(CrownOrMatching::Matching(m2.truncated(t + 1)));
    }
    let head: VertexSet = cover.intersection(&vm1);
    let mut crown: VertexSet = rest.iter().copied().filter(|&v| !cover.contains(v)).collect();
    let mut body: VertexSet = (0..g.n())
        .filter(|&v| !head.contains(v) && !crown.contains(v))
        .collect();
    let movable: Vec<usize> = body
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().all(|&w| head.contains(w)))
        .collect();
    for v in movable {
        body.remove(v);
        crown.insert(v);
    }
    let saturating = hopcroft_karp(g, &head, &crown);
    let hc = HeavyCrown {
        base: CrownDecomposition {
            crown,
            head,
            body,
            saturating,
        },
        t,
    };
    hc.validate(g)?;
    Ok(CrownOrMatching::Crown(hc))
}

/// Half-integral LP optimum via König on the bipartite double cover:
/// `x_v = |{v_L, v_R} ∩ K| / 2`. Returns `(zeros, ones, halves)`.
pub fn nt_lp(g: &Graph) -> (VertexSet, VertexSet, VertexSet) {
    let n = g.n();
    let labels: Vec<u32> = (0..2 * n as u32).collect();
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .flat_map(|&(u, v)| [(u, n + v), (v, n + u)])
        .collect();
    let cover_graph = Graph::from_labeled_edges(labels, &edges).expect("double cover is simple");
    let left: Vec<usize> = (0..n).collect();
    let right: Vec<usize> = (n..2 * n).collect();
    let (k, _) = konig_cover(&cover_graph, &left, &right);
    let mut zeros = VertexSet::new();
    let mut ones = VertexSet::new();
    let mut halves = VertexSet::new();
    for v in 0..n {
        match k.contains(v) as u8 + k.contains(n + v) as u8 {
            0 => zeros.insert(v),
            2 => ones.insert(v),
            _ => halves.insert(v),
        };
    }
    (zeros, ones, halves)
}

/// Nemhauser-Trotter crown, re-extracted on the body until nothing changes.
pub fn nt_crown(g: &Graph) -> CrownDecomposition {
    let mut crown = VertexSet::new();
    let mut head = VertexSet::new();
    let mut body = g.vertices();
    loop {
        let (sub, _) = g.induced_subgraph(&body).expect("body ids are valid");
        let (zeros, ones, _) = nt_lp(&sub);
        if zeros.is_empty() && ones.is_empty() {
            break;
        }
        let back = |s: &VertexSet| -> VertexSet { s.iter().map(|&v| body[v]).collect() };
        let (c2, h2) = (back(&zeros), back(&ones));
        crown = crown.union(&c2);
        head = head.union(&h2);
        body = body.difference(&c2).difference(&h2);
    }
    let saturating = hopcroft_karp(g, &head, &crown);
    let cd = CrownDecomposition {
        crown,
        head,
        body,
        saturating,
    };
    debug_assert!(cd.validate(g).is_ok(), "LP crown must be valid: {cd:?}");
    cd
}

/// Result of [`improve_fvs`]; `graph` is `g[B]` with its own dense ids.
#[derive(Clone, Debug)]
pub struct ImprovedFvs {
    pub graph: Graph,
    pub modulator: VertexSet,
    pub crown: CrownDecomposition,
}

/// Maximum matching of a forest, via a proper 2-colouring and Hopcroft-Karp.
pub fn forest_matching(g: &Graph, vertices: &[usize]) -> Matching {
    let alive = VertexSet::from(vertices.to_vec());
    let mut color = vec![u8::MAX; g.n()];
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &s in alive.iter() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if alive.contains(w) && color[w] == u8::MAX {
                    color[w] = 1 - color[u];
                    queue.push_back(w);
                }
            }
        }
    }
    for &v in alive.iter() {
        if color[v] == 0 {
            left.push(v);
        } else {
            right.push(v);
        }
    }
    hopcroft_karp(g, &left, &right)
}

/// Crown removal plus matching repair: `X_new = (X ∩ B) ∪ I` where `I` is the
/// set of vertices left unmatched by a maximum matching of `g[B] \ X`.
pub fn improve_fvs(g: &Graph, x: &[usize]) -> Result<ImprovedFvs, CrownError> {
    let xs = VertexSet::from(x.to_vec());
    let forest: Vec<usize> = (0..g.n()).filter(|&v| !xs.contains(v)).collect();
    if !g.induced_subgraph(&forest).map_err(|_| CrownError::NotFvs)?.0.is_forest() {
        return Err(CrownError::NotFvs);
    }
    let crown = nt_crown(g);
    let (sub, map) = g
        .induced_subgraph(&crown.body)
        .expect("body ids are valid");
    let x_hat: VertexSet = xs.iter().filter_map(|&v| map[v]).collect();
    let f_prime: Vec<usize> = (0..sub.n()).filter(|&v| !x_hat.contains(v)).collect();
    let m = forest_matching(&sub, &f_prime);
    let matched = m.vertices();
    let modulator = x_hat.union(&f_prime.iter().copied().filter(|&v| !matched.contains(v)).collect());
    Ok(ImprovedFvs {
        graph: sub,
        modulator,
        crown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hk_examples() {
        let k22 = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert_eq!(hopcroft_karp(&k22, &[0, 1], &[2, 3]).len(), 2);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(hopcroft_karp(&star, &[0], &[1, 2, 3]).len(), 1);
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(hopcroft_karp(&p4, &[0, 2], &[1, 3]).len(), 2);
    }

    #[test]
    fn heavy_crown_star() {
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        match heavy_crown_or_matching(&star, 1).unwrap() {
            CrownOrMatching::Crown(hc) => {
                assert_eq!(hc.base.crown.as_slice(), &[1, 2, 3, 4]);
                assert_eq!(hc.base.head.as_slice(), &[0]);
                assert!(hc.base.body.is_empty());
                assert_eq!(hc.base.saturating.edges.as_slice(), &[(0, 1)]);
            }
            other => panic!("expected crown, got {other:?}"),
        }
    }

    #[test]
    fn heavy_crown_matchings() {
        let four = Graph::from_edges(8, &[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap();
        match heavy_crown_or_matching(&four, 2).unwrap() {
            CrownOrMatching::Matching(m) => {
                assert_eq!(m.len(), 3);
                assert!(m.is_valid(&four));
            }
            other => panic!("expected matching, got {other:?}"),
        }
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        match heavy_crown_or_matching(&p4, 1).unwrap() {
            CrownOrMatching::Matching(m) => assert_eq!(m.len(), 2),
            other => panic!("expected matching, got {other:?}"),
        }
    }

    #[test]
    fn heavy_crown_preconditions() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            heavy_crown_or_matching(&g, 1).unwrap_err(),
            CrownError::IsolatedVertex(3)
        );
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            heavy_crown_or_matching(&p3, 1).unwrap_err(),
            CrownError::TooSmall { .. }
        ));
    }

    #[test]
    fn nt_examples() {
        let e = Graph::new(3);
        let cd = nt_crown(&e);
        assert_eq!(cd.crown.len(), 3);
        assert!(cd.head.is_empty() && cd.body.is_empty());
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let cd = nt_crown(&k3);
        assert!(cd.crown.is_empty() && cd.head.is_empty());
        assert_eq!(cd.body.len(), 3);
        let k13 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let cd = nt_crown(&k13);
        assert_eq!(cd.crown.as_slice(), &[1, 2, 3]);
        assert_eq!(cd.head.as_slice(), &[0]);
        cd.validate(&k13).unwrap();
    }

    #[test]
    fn improve_fvs_examples() {
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let r = improve_fvs(&c4, &[0]).unwrap();
        assert!(r.modulator.len() <= 2);
        let rest: Vec<usize> = (0..r.graph.n()).filter(|v| !r.modulator.contains(*v)).collect();
        let m = forest_matching(&r.graph, &rest);
        assert_eq!(2 * m.len(), rest.len());
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(improve_fvs(&k3, &[]).unwrap_err(), CrownError::NotFvs);
    }
}
