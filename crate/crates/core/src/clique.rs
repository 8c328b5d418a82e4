//! Exact maximum-weight clique search.
//!
//! Branch and bound over a smallest-last (degeneracy) vertex order: each
//! clique is grown only from its earliest vertex in that order, and a branch
//! is cut when the current weight plus a greedy-colouring bound on the
//! candidates cannot reach the incumbent. Among cliques whose weights agree
//! within [`EPS`](crate::model::EPS) the larger one wins, then the one whose
//! sorted vertex list is lexicographically smallest.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Result, RsncError};
use crate::graph::{CodingGraph, Vertex, VertexState};
use crate::model::EPS;

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CliqueResult {
    pub members: BTreeSet<Vertex>,
    pub weight: f64,
}

impl CliqueResult {
    pub fn empty() -> Self {
        CliqueResult { members: BTreeSet::new(), weight: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Maximum-weight clique of the subgraph induced by vertices passing `filter`.
pub fn max_weight_clique(graph: &CodingGraph, filter: impl Fn(Vertex, &VertexState) -> bool) -> CliqueResult {
    let (dense, vertices) = DenseGraph::from_coding_graph(graph, filter);
    let (members, weight) = dense.max_weight_clique();
    CliqueResult { members: members.into_iter().map(|i| vertices[i]).collect(), weight }
}

/// All nonempty cliques of `graph`, ordered by size and then lexicographically.
pub fn enumerate_cliques(graph: &CodingGraph) -> Result<Vec<BTreeSet<Vertex>>> {
    enumerate_cliques_capped(graph, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_cliques_capped(graph: &CodingGraph, cap: usize) -> Result<Vec<BTreeSet<Vertex>>> {
    let (dense, vertices) = DenseGraph::from_coding_graph(graph, |_, _| true);
    Ok(dense.enumerate_cliques(cap)?.into_iter().map(|c| c.into_iter().map(|i| vertices[i]).collect()).collect())
}

/// Compares two cliques under the search's preference order; `Greater` means
/// `a` is preferred.
pub fn compare_cliques(a_weight: f64, a: &[usize], b_weight: f64, b: &[usize]) -> Ordering {
    if a_weight > b_weight + EPS {
        return Ordering::Greater;
    }
    if b_weight > a_weight + EPS {
        return Ordering::Less;
    }
    a.len().cmp(&b.len()).then_with(|| b.cmp(a))
}

/// Weighted undirected graph on `0..n`, adjacency as bitsets.
#[derive(Clone, Debug)]
pub struct DenseGraph {
    weights: Vec<f64>,
    adj: Vec<Bits>,
}

type Bits = Vec<u64>;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn bit(bits: &Bits, i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(bits: &mut Bits, i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn clear_bit(bits: &mut Bits, i: usize) {
    bits[i / 64] &= !(1 << (i % 64));
}

fn ones(bits: &Bits) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let tz = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + tz)
        })
    })
}

fn and(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn is_zero(bits: &Bits) -> bool {
    bits.iter().all(|&w| w == 0)
}

impl DenseGraph {
    pub fn new(weights: Vec<f64>) -> Self {
        let n = weights.len();
        DenseGraph { adj: vec![vec![0; words(n)]; n], weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self loops are not allowed");
        set_bit(&mut self.adj[u], v);
        set_bit(&mut self.adj[v], u);
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        bit(&self.adj[u], v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_clique(&self, members: &[usize]) -> bool {
        members.iter().enumerate().all(|(x, &u)| members[x + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    /// Dense copy of the filtered subgraph; index `i` maps to `vertices[i]`,
    /// which preserves (dest, packet) order.
    pub fn from_coding_graph(
        graph: &CodingGraph,
        filter: impl Fn(Vertex, &VertexState) -> bool,
    ) -> (DenseGraph, Vec<Vertex>) {
        let vertices: Vec<Vertex> =
            graph.vertices().filter(|&v| filter(v, graph.state(v).expect("listed vertex"))).collect();
        let mut dense = DenseGraph::new(vertices.iter().map(|&v| graph.weight(v)).collect());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if graph.adjacent(u, v) {
                    dense.add_edge(i, j);
                }
            }
        }
        (dense, vertices)
    }

    /// Smallest-last order: repeatedly peel a minimum-degree vertex.
    fn degeneracy_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut degree: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut alive = vec![true; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (degree[v], v)).unwrap();
            alive[v] = false;
            order.push(v);
            for u in ones(&self.adj[v]) {
                if alive[u] {
                    degree[u] -= 1;
                }
            }
        }
        order
    }

    /// Returns (sorted members, total weight). The empty clique for an empty graph.
    pub fn max_weight_clique(&self) -> (Vec<usize>, f64) {
        let n = self.len();
        if n == 0 {
            return (Vec::new(), 0.0);
        }
        let order = self.degeneracy_order();
        let mut position = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            position[v] = k;
        }
        let mut search =
            Search { graph: self, position: &position, best: Vec::new(), best_weight: 0.0, current: Vec::new() };
        for &v in &order {
            let mut later = vec![0; words(n)];
            for u in ones(&self.adj[v]) {
                if position[u] > position[v] {
                    set_bit(&mut later, u);
                }
            }
            search.current.push(v);
            search.expand(self.weights[v], later);
            search.current.pop();
        }
        let mut best = search.best;
        best.sort_unstable();
        let weight = best.iter().map(|&i| self.weights[i]).sum();
        (best, weight)
    }

    /// Every nonempty clique, each once, sorted by size then lexicographically.
    pub fn enumerate_cliques(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        if self.len() > cap {
            return Err(RsncError::EnumerationCap { vertices: self.len(), cap });
        }
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.extend_all(0, &mut current, &mut out);
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    fn extend_all(&self, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for v in from..self.len() {
            if current.iter().all(|&u| self.adjacent(u, v)) {
                current.push(v);
                out.push(current.clone());
                self.extend_all(v + 1, current, out);
                current.pop();
            }
        }
    }
}

struct Search<'a> {
    graph: &'a DenseGraph,
    position: &'a [usize],
    best: Vec<usize>,
    best_weight: f64,
    current: Vec<usize>,
}

impl Search<'_> {
    fn consider(&mut self, weight: f64) {
        let mut sorted = self.current.clone();
        sorted.sort_unstable();
        if self.best.is_empty() || compare_cliques(weight, &sorted, self.best_weight, &self.best) == Ordering::Greater {
            self.best = sorted;
            self.best_weight = weight;
        }
    }

    /// Greedy colouring of `candidates`: (sum of heaviest vertex per colour
    /// class, number of classes). Both bound any clique inside `candidates`.
    fn colour_bound(&self, candidates: &Bits) -> (f64, usize) {
        let mut classes: Vec<(Bits, f64)> = Vec::new();
        for v in ones(candidates) {
            let w = self.graph.weights[v];
            match classes.iter_mut().find(|(members, _)| is_zero(&and(members, &self.graph.adj[v]))) {
                Some((members, heaviest)) => {
                    set_bit(members, v);
                    *heaviest = heaviest.max(w);
                }
                None => {
                    let mut members = vec![0; candidates.len()];
                    set_bit(&mut members, v);
                    classes.push((members, w));
                }
            }
        }
        (classes.iter().map(|(_, w)| w).sum(), classes.len())
    }

    fn expand(&mut self, weight: f64, mut candidates: Bits) {
        self.consider(weight);
        if is_zero(&candidates) {
            return;
        }
        let (extra, colours) = self.colour_bound(&candidates);
        let bound = weight + extra;
        if bound < self.best_weight - EPS {
            return;
        }
        if bound <= self.best_weight + EPS && self.current.len() + colours < self.best.len() {
            return;
        }
        let mut pending: Vec<usize> = ones(&candidates).collect();
        pending.sort_unstable_by_key(|&v| self.position[v]);
        for v in pending {
            clear_bit(&mut candidates, v);
            let next = and(&candidates, &self.graph.adj[v]);
            self.current.push(v);
            self.expand(weight + self.graph.weights[v], next);
            self.current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::model::{Request, Scenario};

    fn v(i: usize, j: usize) -> Vertex {
        Request::new(i, j)
    }

    #[test]
    fn example_with_low_threshold() {
        let g = build_graph(&Scenario::three_node_example()).unwrap();
        let q = max_weight_clique(&g, |_, s| s.max_rate >= 2_000.0);
        assert_eq!(q.members, [v(1, 1), v(2, 2)].into());
        assert_eq!(q.weight, 2.0);
    }

    #[test]
    fn example_with_high_threshold() {
        let g = build_graph(&Scenario::three_node_example()).unwrap();
        let q = max_weight_clique(&g, |_, s| s.max_rate >= 5_000.0);
        assert_eq!(q.members, [v(0, 0)].into());
        assert_eq!(q.weight, 1.0);
    }

    #[test]
    fn empty_graph_gives_empty_clique() {
        let g = build_graph(&Scenario::three_node_example()).unwrap();
        let q = max_weight_clique(&g, |_, _| false);
        assert_eq!(q, CliqueResult::empty());
        assert_eq!(DenseGraph::new(vec![]).max_weight_clique(), (vec![], 0.0));
    }

    #[test]
    fn enumerate_example() {
        let g = build_graph(&Scenario::three_node_example()).unwrap();
        let all = enumerate_cliques(&g).unwrap();
        let expected: Vec<BTreeSet<Vertex>> =
            vec![[v(0, 0)].into(), [v(1, 1)].into(), [v(2, 2)].into(), [v(1, 1), v(2, 2)].into()];
        assert_eq!(all, expected);
    }

    #[test]
    fn triangle_has_seven_cliques() {
        let mut g = DenseGraph::new(vec![1.0; 3]);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(0, 2);
        assert_eq!(g.enumerate_cliques(20).unwrap().len(), 7);
        assert_eq!(g.max_weight_clique(), (vec![0, 1, 2], 3.0));
    }

    #[test]
    fn enumeration_cap() {
        let g = DenseGraph::new(vec![1.0; 21]);
        assert!(matches!(
            g.enumerate_cliques(DEFAULT_ENUMERATION_CAP),
            Err(RsncError::EnumerationCap { vertices: 21, cap: 20 })
        ));
    }

    #[test]
    fn ties_prefer_larger_then_lexicographic() {
        // {0} weighs 2, {1,2} weighs 2: the pair wins on size
        let mut g = DenseGraph::new(vec![2.0, 1.0, 1.0, 1.0, 1.0]);
        g.add_edge(1, 2);
        g.add_edge(3, 4);
        assert_eq!(g.max_weight_clique(), (vec![1, 2], 2.0));

        // two disjoint equal edges: lexicographically smaller one
        let mut g = DenseGraph::new(vec![1.0; 4]);
        g.add_edge(2, 3);
        g.add_edge(0, 1);
        assert_eq!(g.max_weight_clique().0, vec![0, 1]);
    }

    #[test]
    fn heavy_vertex_beats_light_clique() {
        let mut g = DenseGraph::new(vec![5.0, 1.0, 1.0, 1.0]);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(1, 3);
        assert_eq!(g.max_weight_clique(), (vec![0], 5.0));
    }
}
