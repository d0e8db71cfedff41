//! Cluster exploration, pivotal points, double connections and thinnings.

use std::collections::{HashMap, HashSet, VecDeque};

use super::geometry::{BoxSpec, PointSet};
use super::graph::{phi_between, GraphView};
use super::marks::Marks;
use super::SamplerError;
use crate::model::ConnectionFunction;

/// Limits on a cluster exploration. Hitting one marks the result censored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_size: usize,
    pub max_depth: usize,
}

impl Caps {
    pub fn size(max_size: usize) -> Self {
        Caps { max_size, max_depth: usize::MAX }
    }

    pub fn unbounded() -> Self {
        Caps { max_size: usize::MAX, max_depth: usize::MAX }
    }
}

impl Default for Caps {
    fn default() -> Self {
        Caps::size(1_000_000)
    }
}

/// Result of a breadth-first exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Members in discovery order; the start vertex comes first.
    pub members: Vec<usize>,
    /// Number of BFS generations, i.e. the eccentricity of the start vertex
    /// within its cluster.
    pub depth: usize,
    /// Some member lies within interaction range of a free boundary.
    pub touched_boundary: bool,
    /// Exploration stopped at a cap.
    pub censored: bool,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }
}

/// Explores the cluster of `start`, restricted to vertices accepted by
/// `alive` (the start vertex is always kept).
pub fn explore_cluster<G: GraphView + ?Sized>(
    g: &G,
    start: usize,
    alive: Option<&dyn Fn(usize) -> bool>,
    caps: Caps,
) -> Cluster {
    let mut seen: HashSet<usize> = HashSet::new();
    let mut members = vec![start];
    seen.insert(start);
    let mut touched = g.near_boundary(start);
    let mut depth = 0usize;
    let mut frontier = 0..1;
    while !frontier.is_empty() {
        if depth >= caps.max_depth {
            let mut more = false;
            for head in frontier.clone() {
                g.for_each_neighbor(members[head], &mut |w| {
                    more |= !seen.contains(&w) && alive.is_none_or(|a| a(w));
                });
            }
            return Cluster { members, depth, touched_boundary: touched, censored: more };
        }
        let begin = members.len();
        for head in frontier.clone() {
            let v = members[head];
            let mut found = Vec::new();
            g.for_each_neighbor(v, &mut |w| found.push(w));
            for w in found {
                if seen.contains(&w) {
                    continue;
                }
                if let Some(a) = alive {
                    if !a(w) {
                        continue;
                    }
                }
                seen.insert(w);
                members.push(w);
                touched |= g.near_boundary(w);
                if members.len() >= caps.max_size {
                    return Cluster { members, depth: depth + 1, touched_boundary: touched, censored: true };
                }
            }
        }
        frontier = begin..members.len();
        if !frontier.is_empty() {
            depth += 1;
        }
    }
    Cluster { members, depth, touched_boundary: touched, censored: false }
}

/// Whether `u` and `v` are connected through vertices accepted by `alive`.
/// Returns `None` when the exploration hits `cap` first.
pub fn connected<G: GraphView + ?Sized>(
    g: &G,
    u: usize,
    v: usize,
    alive: Option<&dyn Fn(usize) -> bool>,
    cap: usize,
) -> Option<bool> {
    if u == v {
        return Some(true);
    }
    if let Some(a) = alive {
        if !a(v) {
            return Some(false);
        }
    }
    let mut seen: HashSet<usize> = HashSet::new();
    seen.insert(u);
    let mut queue = VecDeque::from([u]);
    let mut count = 1usize;
    while let Some(x) = queue.pop_front() {
        let mut found = Vec::new();
        g.for_each_neighbor(x, &mut |w| found.push(w));
        for w in found {
            if w == v {
                return Some(true);
            }
            if seen.contains(&w) {
                continue;
            }
            if let Some(a) = alive {
                if !a(w) {
                    continue;
                }
            }
            seen.insert(w);
            queue.push_back(w);
            count += 1;
            if count >= cap {
                return None;
            }
        }
    }
    Some(false)
}

/// Local copy of a cluster with compact vertex indices.
struct Local {
    global: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

fn local_cluster<G: GraphView + ?Sized>(g: &G, start: usize, cap: usize) -> Option<(Local, HashMap<usize, usize>)> {
    let c = explore_cluster(g, start, None, Caps::size(cap));
    if c.censored {
        return None;
    }
    let map: HashMap<usize, usize> = c.members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj = c
        .members
        .iter()
        .map(|&v| {
            let mut a = Vec::new();
            g.for_each_neighbor(v, &mut |w| a.push(map[&w]));
            a
        })
        .collect();
    Some((Local { global: c.members, adj }, map))
}

/// Vertex sets of the biconnected blocks of a connected graph.
fn blocks(adj: &[Vec<usize>], root: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0usize;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::new();
    // Frames: (vertex, parent, next neighbour position).
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
    disc[root] = time;
    low[root] = time;
    time += 1;
    while let Some(top) = stack.last_mut() {
        let (v, parent) = (top.0, top.1);
        if top.2 < adj[v].len() {
            let w = adj[v][top.2];
            top.2 += 1;
            if disc[w] == usize::MAX {
                disc[w] = time;
                low[w] = time;
                time += 1;
                edges.push((v, w));
                stack.push((w, v, 0));
            } else if w != parent && disc[w] < disc[v] {
                edges.push((v, w));
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if parent != usize::MAX {
                low[parent] = low[parent].min(low[v]);
                if low[v] >= disc[parent] {
                    let mut block = Vec::new();
                    while let Some((a, b)) = edges.pop() {
                        block.push(a);
                        block.push(b);
                        if a == parent && b == v {
                            break;
                        }
                    }
                    block.sort_unstable();
                    block.dedup();
                    out.push(block);
                }
            }
        }
    }
    out
}

/// Outcome of a pivotal-point query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pivotal {
    pub connected: bool,
    /// Vertices other than `u`, `v` lying on every `u`-`v` path, in the order
    /// they are met from `u`. Empty when not connected.
    pub points: Vec<usize>,
    /// The cluster of `u` exceeded the size cap; nothing else is meaningful.
    pub censored: bool,
}

fn check_vertex<G: GraphView + ?Sized>(g: &G, v: usize) -> Result<(), SamplerError> {
    if v >= g.vertex_count() {
        return Err(SamplerError::VertexOutOfRange { index: v, count: g.vertex_count() });
    }
    Ok(())
}

/// Pivotal points for `u ↔ v`, from the block-cut tree of the cluster of `u`.
pub fn pivotal_points<G: GraphView + ?Sized>(g: &G, u: usize, v: usize, cap: usize) -> Result<Pivotal, SamplerError> {
    check_vertex(g, u)?;
    check_vertex(g, v)?;
    if u == v {
        return Ok(Pivotal { connected: true, points: Vec::new(), censored: false });
    }
    let Some((local, map)) = local_cluster(g, u, cap) else {
        return Ok(Pivotal { connected: false, points: Vec::new(), censored: true });
    };
    let Some(&lv) = map.get(&v) else {
        return Ok(Pivotal { connected: false, points: Vec::new(), censored: false });
    };
    let lu = 0usize;
    let tree = BcTree::new(&local.adj, lu);
    let points = tree
        .path(tree.node(lu), tree.node(lv))
        .into_iter()
        .filter_map(|p| tree.cut_of(p))
        .filter(|&x| x != lu && x != lv)
        .map(|x| local.global[x])
        .collect();
    Ok(Pivotal { connected: true, points, censored: false })
}

/// Block-cut tree of a connected graph. Tree nodes `0..nb` are blocks and
/// the rest are cut vertices.
struct BcTree {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<Vec<usize>>,
    cut_node: Vec<usize>,
    cut_vertex: Vec<usize>,
    tree: Vec<Vec<usize>>,
}

impl BcTree {
    fn new(adj: &[Vec<usize>], root: usize) -> Self {
        let blocks = blocks(adj, root);
        let n = adj.len();
        let mut block_of: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (b, blk) in blocks.iter().enumerate() {
            for &x in blk {
                block_of[x].push(b);
            }
        }
        let nb = blocks.len();
        let mut cut_node = vec![usize::MAX; n];
        let mut cut_vertex = Vec::new();
        for x in 0..n {
            if block_of[x].len() >= 2 {
                cut_node[x] = nb + cut_vertex.len();
                cut_vertex.push(x);
            }
        }
        let mut tree = vec![Vec::new(); nb + cut_vertex.len()];
        for (ci, &x) in cut_vertex.iter().enumerate() {
            for &b in &block_of[x] {
                tree[nb + ci].push(b);
                tree[b].push(nb + ci);
            }
        }
        BcTree { blocks, block_of, cut_node, cut_vertex, tree }
    }

    /// Tree node holding vertex `x` (needs at least one edge in the graph).
    fn node(&self, x: usize) -> usize {
        if self.cut_node[x] != usize::MAX {
            self.cut_node[x]
        } else {
            self.block_of[x][0]
        }
    }

    fn cut_of(&self, node: usize) -> Option<usize> {
        node.checked_sub(self.blocks.len()).map(|i| self.cut_vertex[i])
    }

    fn path(&self, s: usize, t: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.tree.len()];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(a) = queue.pop_front() {
            if a == t {
                break;
            }
            for &b in &self.tree[a] {
                if prev[b] == usize::MAX {
                    prev[b] = a;
                    queue.push_back(b);
                }
            }
        }
        let mut path = vec![t];
        let mut cur = t;
        while cur != s {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Where a path with tree route `route` from `from` to `to` enters and
    /// leaves block `b`.
    fn ends_in(&self, route: &[usize], b: usize, from: usize, to: usize) -> (usize, usize) {
        let i = route.iter().position(|&x| x == b).expect("block on route");
        let entry = if i == 0 { from } else { self.cut_of(route[i - 1]).expect("cut node") };
        let exit = if i + 1 == route.len() { to } else { self.cut_of(route[i + 1]).expect("cut node") };
        (entry, exit)
    }
}

/// `u ⇔ v`: equal, adjacent, or joined by two paths sharing only their
/// endpoints. `Ok(None)` when the cluster exceeds `cap`.
pub fn double_connected<G: GraphView + ?Sized>(g: &G, u: usize, v: usize, cap: usize) -> Result<Option<bool>, SamplerError> {
    check_vertex(g, u)?;
    check_vertex(g, v)?;
    if u == v {
        return Ok(Some(true));
    }
    match connected(g, u, v, None, cap) {
        None => Ok(None),
        Some(false) => Ok(Some(false)),
        Some(true) => {
            let p = pivotal_points(g, u, v, cap)?;
            Ok(if p.censored { None } else { Some(p.points.is_empty()) })
        }
    }
}

/// Whether `{a ↔ b}` and `{c ↔ d}` occur on disjoint vertex sets. Simple
/// `a`-`b` paths are searched with pruning; `None` when the search needs more
/// than `path_cap` steps (or a cluster is larger than `cap`).
pub fn disjoint_connections<G: GraphView + ?Sized>(
    g: &G,
    (a, b): (usize, usize),
    (c, d): (usize, usize),
    cap: usize,
    path_cap: usize,
) -> Option<bool> {
    let ab = connected(g, a, b, None, cap)?;
    let cd = connected(g, c, d, None, cap)?;
    if !ab || !cd {
        return Some(false);
    }
    let ca = explore_cluster(g, a, None, Caps::size(cap));
    if ca.censored {
        return None;
    }
    if !ca.members.contains(&c) {
        return Some(true);
    }
    let map: HashMap<usize, usize> = ca.members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = ca
        .members
        .iter()
        .map(|&v| {
            let mut out = Vec::new();
            g.for_each_neighbor(v, &mut |w| out.push(map[&w]));
            out
        })
        .collect();
    let (la, lb, lc, ld) = (map[&a], map[&b], map[&c], map[&d]);
    if la == lc || la == ld || lb == lc || lb == ld {
        return Some(false);
    }
    // A simple path visits exactly the blocks on its block-cut tree route,
    // so the two connections can only interfere in blocks both routes use.
    let tree = BcTree::new(&adj, la);
    let r1 = tree.path(tree.node(la), tree.node(lb));
    let r2 = tree.path(tree.node(lc), tree.node(ld));
    let nb = tree.blocks.len();
    if r1.iter().any(|x| *x >= nb && r2.contains(x)) {
        return Some(false);
    }
    // Routes sharing no cut vertex share at most one block.
    let Some(&shared) = r1.iter().find(|x| **x < nb && r2.contains(x)) else {
        return Some(true);
    };
    let (s1, t1) = tree.ends_in(&r1, shared, la, lb);
    let (s2, t2) = tree.ends_in(&r2, shared, lc, ld);
    if s1 == s2 || s1 == t2 || t1 == s2 || t1 == t2 {
        return Some(false);
    }
    let members = &tree.blocks[shared];
    let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let block_adj: Vec<Vec<usize>> =
        members.iter().map(|&v| adj[v].iter().filter_map(|w| local.get(w).copied()).collect()).collect();
    let mut search = PathSearch {
        adj: &block_adj,
        on_path: vec![false; members.len()],
        steps: 0,
        cap: path_cap,
        target: local[&t1],
        cd: (local[&s2], local[&t2]),
    };
    search.on_path[local[&s1]] = true;
    search.dfs(local[&s1])
}

/// Depth-first search over simple paths to `target`, pruning any branch
/// whose partial path already separates the pair `cd`, or can no longer
/// reach `target`.
struct PathSearch<'a> {
    adj: &'a [Vec<usize>],
    on_path: Vec<bool>,
    steps: usize,
    cap: usize,
    target: usize,
    cd: (usize, usize),
}

impl PathSearch<'_> {
    fn reachable(&self, from: usize, to: usize, allow_path_end: Option<usize>) -> bool {
        let blocked = |x: usize| self.on_path[x] && Some(x) != allow_path_end;
        if blocked(from) || (blocked(to) && Some(to) != allow_path_end) {
            return false;
        }
        let mut seen = vec![false; self.adj.len()];
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            for &w in &self.adj[x] {
                if !seen[w] && !blocked(w) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    fn dfs(&mut self, x: usize) -> Option<bool> {
        self.steps += 1;
        if self.steps > self.cap {
            return None;
        }
        let (c, d) = self.cd;
        if self.on_path[c] || self.on_path[d] || !self.reachable(c, d, None) {
            return Some(false);
        }
        if x == self.target {
            return Some(true);
        }
        if !self.reachable(x, self.target, Some(x)) {
            return Some(false);
        }
        for i in 0..self.adj[x].len() {
            let w = self.adj[x][i];
            if self.on_path[w] {
                continue;
            }
            self.on_path[w] = true;
            let r = self.dfs(w);
            self.on_path[w] = false;
            match r {
                Some(false) => {}
                other => return other,
            }
        }
        Some(false)
    }
}

/// Survival of a point under an `A`-thinning: it is kept iff
/// `Y_{w,j} > φ(a_j - w)` for every point `a_j` of `A`, where `j` is the id
/// of `a_j`.
pub fn survives_thinning(
    cf: &ConnectionFunction,
    bx: &BoxSpec,
    cutoff: f64,
    marks: &Marks,
    id: u64,
    x: &[f64],
    a: &PointSet,
) -> bool {
    for j in 0..a.len() {
        let p = phi_between(cf, bx, cutoff, a.pos(j), x);
        if p > 0.0 && marks.thinning(id, a.ids[j]) <= p {
            return false;
        }
    }
    true
}

/// Applies an `A`-thinning to every point of `targets`; returns the survival flags.
pub fn a_thinning(
    cf: &ConnectionFunction,
    bx: &BoxSpec,
    cutoff: f64,
    marks: &Marks,
    targets: &PointSet,
    a: &PointSet,
) -> Vec<bool> {
    (0..targets.len()).map(|i| survives_thinning(cf, bx, cutoff, marks, targets.ids[i], targets.pos(i), a)).collect()
}

/// `φ̄(A, x) = ∏_{a ∈ A} (1 - φ(a - x))`, the survival probability.
pub fn thinning_survival_probability(cf: &ConnectionFunction, bx: &BoxSpec, a: &PointSet, x: &[f64]) -> f64 {
    (0..a.len()).map(|j| 1.0 - phi_between(cf, bx, f64::INFINITY, a.pos(j), x)).product()
}

/// Positions and ids of a vertex subset, as a point set.
pub fn collect_points<G: GraphView + ?Sized>(g: &G, vertices: &[usize]) -> PointSet {
    let mut out = PointSet::new(if vertices.is_empty() { 0 } else { g.pos(vertices[0]).len() });
    for &v in vertices {
        out.push(g.id(v), g.pos(v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Adj(Vec<Vec<usize>>, Vec<[f64; 1]>);

    impl GraphView for Adj {
        fn vertex_count(&self) -> usize {
            self.0.len()
        }
        fn id(&self, v: usize) -> u64 {
            v as u64
        }
        fn pos(&self, v: usize) -> &[f64] {
            &self.1[v]
        }
        fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize)) {
            for &w in &self.0[v] {
                f(w)
            }
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> Adj {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        Adj(adj, vec![[0.0]; n])
    }

    fn piv(g: &Adj, u: usize, v: usize) -> Option<Vec<usize>> {
        let p = pivotal_points(g, u, v, 100).unwrap();
        p.connected.then_some(p.points)
    }

    #[test]
    fn pivotal_on_a_chain_of_cycles() {
        // 0 - 1 = {2,3} = 4 - 5, where {1,2,4} and {1,3,4} form a cycle.
        let g = graph(6, &[(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 5)]);
        assert_eq!(piv(&g, 0, 5), Some(vec![1, 4]));
        assert_eq!(piv(&g, 5, 0), Some(vec![4, 1]));
        assert_eq!(piv(&g, 1, 4), Some(vec![]));
        assert_eq!(double_connected(&g, 1, 4, 100).unwrap(), Some(true));
        assert_eq!(double_connected(&g, 0, 4, 100).unwrap(), Some(false));
    }

    #[test]
    fn disconnected_pairs() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(piv(&g, 0, 3), None);
        assert_eq!(connected(&g, 0, 3, None, 100), Some(false));
        assert_eq!(double_connected(&g, 0, 1, 100).unwrap(), Some(true));
        assert!(pivotal_points(&g, 0, 9, 100).is_err());
    }

    #[test]
    fn depth_and_caps() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let c = explore_cluster(&g, 0, None, Caps::unbounded());
        assert_eq!((c.len(), c.depth, c.censored), (4, 3, false));
        let c = explore_cluster(&g, 1, None, Caps::unbounded());
        assert_eq!(c.depth, 2);
        let c = explore_cluster(&g, 0, None, Caps { max_size: usize::MAX, max_depth: 2 });
        assert!(c.censored);
        assert_eq!(c.len(), 3);
        let c = explore_cluster(&g, 0, None, Caps { max_size: usize::MAX, max_depth: 3 });
        assert!(!c.censored);
        let c = explore_cluster(&g, 0, None, Caps::size(2));
        assert!(c.censored);
    }

    #[test]
    fn disjoint_connections_on_small_graphs() {
        // A path 0-4-1 and a path 2-4-3 share vertex 4.
        let g = graph(5, &[(0, 4), (4, 1), (2, 4), (4, 3)]);
        assert_eq!(disjoint_connections(&g, (0, 1), (2, 3), 100, 1000), Some(false));
        let h = graph(6, &[(0, 4), (4, 1), (2, 5), (5, 3), (4, 5)]);
        assert_eq!(disjoint_connections(&h, (0, 1), (2, 3), 100, 1000), Some(true));
    }
}
