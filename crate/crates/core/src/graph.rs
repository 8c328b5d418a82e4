//! The rate- and deadline-aware coding graph.
//!
//! A vertex `(d, p)` exists when `d` wants `p` and the deadline can still be
//! met at `d`'s own link limit. Two vertices are joined when they belong to
//! different destinations, each destination already holds the other's packet
//! (or both want the same packet), and each deadline can be met at the other
//! destination's link limit. Any clique, XORed and sent at the slowest member
//! rate, is then received, decoded, and on time at every member.
//!
//! All rate conditions are evaluated in the time domain (`B / r <= T`), which
//! is the same comparison the delivery ledger makes.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::{Result, RsncError};
use crate::model::{fits, receives, DestId, PacketId, Request, Scenario, Transmission, EPS};

pub type Vertex = Request;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// Vertex and edge rules include the rate/deadline checks.
    RateAware,
    /// Only "wants" and side-information rules; every link assumed usable.
    RateAgnostic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexState {
    /// Remaining time until the deadline.
    pub deadline: f64,
    pub max_rate: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodingGraph {
    kind: GraphKind,
    packet_size: f64,
    nodes: BTreeMap<Vertex, VertexState>,
    adjacency: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

pub fn build_graph(scenario: &Scenario) -> Result<CodingGraph> {
    scenario.ensure_valid()?;
    Ok(CodingGraph::construct(scenario, GraphKind::RateAware))
}

/// The graph without the rate conditions, as used by rate-oblivious coding.
pub fn build_rate_agnostic_graph(scenario: &Scenario) -> Result<CodingGraph> {
    scenario.ensure_valid()?;
    Ok(CodingGraph::construct(scenario, GraphKind::RateAgnostic))
}

impl CodingGraph {
    fn construct(scenario: &Scenario, kind: GraphKind) -> Self {
        let b = scenario.packet_size;
        let mut nodes = BTreeMap::new();
        for r in scenario.requests() {
            let deadline = scenario.deadline(r).expect("wanted packets carry deadlines");
            let max_rate = scenario.dest(r.dest).max_rate;
            let admitted = match kind {
                GraphKind::RateAware => deadline > EPS && fits(b / max_rate, deadline),
                GraphKind::RateAgnostic => true,
            };
            if admitted {
                nodes.insert(r, VertexState { deadline, max_rate, weight: scenario.benefit(r.packet) });
            }
        }

        let mut adjacency: BTreeMap<Vertex, BTreeSet<Vertex>> = nodes.keys().map(|&v| (v, BTreeSet::new())).collect();
        let list: Vec<(Vertex, VertexState)> = nodes.iter().map(|(v, s)| (*v, *s)).collect();
        for (x, &(u, su)) in list.iter().enumerate() {
            for &(v, sv) in &list[x + 1..] {
                if u.dest == v.dest {
                    continue;
                }
                let side_info = u.packet == v.packet
                    || (scenario.dest(v.dest).has.contains(&u.packet) && scenario.dest(u.dest).has.contains(&v.packet));
                if !side_info {
                    continue;
                }
                if kind == GraphKind::RateAware && !rates_compatible(b, &su, &sv) {
                    continue;
                }
                adjacency.get_mut(&u).unwrap().insert(v);
                adjacency.get_mut(&v).unwrap().insert(u);
            }
        }
        CodingGraph { kind, packet_size: b, nodes, adjacency }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn packet_size(&self) -> f64 {
        self.packet_size
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Vertices in (dest, packet) order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.nodes.keys().copied()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn state(&self, v: Vertex) -> Option<&VertexState> {
        self.nodes.get(&v)
    }

    pub fn weight(&self, v: Vertex) -> f64 {
        self.nodes[&v].weight
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency.get(&u).is_some_and(|n| n.contains(&v))
    }

    /// Minimum rate that still meets `v`'s remaining deadline.
    pub fn r_min(&self, v: Vertex) -> f64 {
        let t = self.nodes[&v].deadline;
        if t <= EPS {
            f64::INFINITY
        } else {
            self.packet_size / t
        }
    }

    pub fn is_clique<'a>(&self, members: impl IntoIterator<Item = &'a Vertex>) -> bool {
        let members: Vec<Vertex> = members.into_iter().copied().collect();
        members.iter().all(|v| self.contains(*v))
            && members.iter().enumerate().all(|(x, &u)| members[x + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    pub fn set_weights(&mut self, mut weight: impl FnMut(Vertex, &VertexState) -> f64) {
        for (v, s) in self.nodes.iter_mut() {
            s.weight = weight(*v, s);
        }
    }

    /// The graph with `removed` vertices (and their edges) deleted.
    pub fn without(&self, removed: &BTreeSet<Vertex>) -> CodingGraph {
        let mut next = self.clone();
        next.remove_all(removed);
        next
    }

    fn remove_all(&mut self, removed: &BTreeSet<Vertex>) {
        self.nodes.retain(|v, _| !removed.contains(v));
        self.adjacency.retain(|v, _| !removed.contains(v));
        for n in self.adjacency.values_mut() {
            n.retain(|v| !removed.contains(v));
        }
    }

    /// Adjacency dump keyed `"i:j"`, in (dest, packet) order.
    pub fn dump(&self) -> GraphDump<'_> {
        GraphDump(self)
    }
}

fn rates_compatible(packet_size: f64, a: &VertexState, b: &VertexState) -> bool {
    fits(packet_size / b.max_rate, a.deadline) && fits(packet_size / a.max_rate, b.deadline)
}

/// Turns a clique into the XOR broadcast it represents, sent at the slowest
/// member link limit.
pub fn clique_to_transmission(
    graph: &CodingGraph,
    clique: &BTreeSet<Vertex>,
    scenario: &Scenario,
) -> Result<Transmission> {
    if clique.is_empty() {
        return Err(RsncError::NotAClique("empty vertex set".into()));
    }
    if let Some(v) = clique.iter().find(|v| !graph.contains(**v)) {
        return Err(RsncError::NotAClique(format!("{v} is not in the graph")));
    }
    let members: Vec<Vertex> = clique.iter().copied().collect();
    for (x, &u) in members.iter().enumerate() {
        if let Some(&v) = members[x + 1..].iter().find(|&&v| !graph.adjacent(u, v)) {
            return Err(RsncError::NotAClique(format!("{u} and {v} are not adjacent")));
        }
    }
    let rate = members.iter().map(|v| graph.nodes[v].max_rate).fold(f64::INFINITY, f64::min);
    Transmission::new(
        members.iter().map(|v| v.packet).collect(),
        rate,
        members.iter().map(|v| v.dest).collect(),
        scenario.packet_size,
    )
}

/// The wanted packet `d` recovers from `tx`, if any: `d` must receive at the
/// transmission rate and hold every other packet in the XOR.
pub fn decodes(scenario: &Scenario, d: DestId, tx: &Transmission) -> Option<PacketId> {
    if !receives(scenario, d, tx.rate) {
        return None;
    }
    let state = scenario.dest(d);
    tx.coded_set
        .iter()
        .filter(|p| state.wants.contains(p))
        .find(|&&p| tx.coded_set.iter().all(|q| *q == p || state.has.contains(q)))
        .copied()
}

/// Advances the graph by `elapsed` seconds and drops `served` and `doomed`
/// vertices. Vertices that can no longer meet their deadline are dropped and
/// edge rate conditions are re-evaluated against the shortened deadlines.
pub fn update_graph(
    graph: &CodingGraph,
    elapsed: f64,
    served: &BTreeSet<Vertex>,
    doomed: &BTreeSet<Vertex>,
) -> CodingGraph {
    let mut next = graph.clone();
    for s in next.nodes.values_mut() {
        s.deadline -= elapsed;
    }
    let b = next.packet_size;
    let aware = next.kind == GraphKind::RateAware;
    let mut removed: BTreeSet<Vertex> = served | doomed;
    for (v, s) in &next.nodes {
        let expired = s.deadline <= EPS || (aware && !fits(b / s.max_rate, s.deadline));
        if expired {
            removed.insert(*v);
        }
    }
    next.remove_all(&removed);

    if aware {
        let nodes = &next.nodes;
        for (u, n) in next.adjacency.iter_mut() {
            let su = &nodes[u];
            n.retain(|v| rates_compatible(b, su, &nodes[v]));
        }
    }
    next
}

pub struct GraphDump<'a>(&'a CodingGraph);

impl Serialize for GraphDump<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let key = |v: &Vertex| format!("{}:{}", v.dest.0, v.packet.0);
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (v, n) in &self.0.adjacency {
            let list: Vec<String> = n.iter().map(key).collect();
            map.serialize_entry(&key(v), &list)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DestinationState;

    fn v(i: usize, j: usize) -> Vertex {
        Request::new(i, j)
    }

    fn set(vs: &[Vertex]) -> BTreeSet<Vertex> {
        vs.iter().copied().collect()
    }

    #[test]
    fn example_graph_has_one_edge() {
        let s = Scenario::three_node_example();
        let g = build_graph(&s).unwrap();
        assert_eq!(g.vertices().collect::<Vec<_>>(), vec![v(0, 0), v(1, 1), v(2, 2)]);
        assert_eq!(g.edge_count(), 1);
        assert!(g.adjacent(v(1, 1), v(2, 2)));
        assert!(g.adjacent(v(2, 2), v(1, 1)));
        // r_min(d0,p0) = 2.5k > 2k at d1
        assert!(!g.adjacent(v(0, 0), v(1, 1)));
        assert!(!g.is_clique(&[v(0, 0), v(1, 1), v(2, 2)]));
        assert!(g.vertices().all(|x| g.weight(x) == 1.0));
    }

    #[test]
    fn rate_agnostic_graph_is_a_triangle() {
        let g = build_rate_agnostic_graph(&Scenario::three_node_example()).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.is_clique(&[v(0, 0), v(1, 1), v(2, 2)]));
    }

    #[test]
    fn infeasible_request_has_no_vertex() {
        let mut s = Scenario::three_node_example();
        // 10k at 2k/s takes 5 s
        s.destinations[1].deadlines.insert(PacketId(1), 4.0);
        let g = build_graph(&s).unwrap();
        assert!(!g.contains(v(1, 1)));
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn single_request_single_vertex() {
        let s = Scenario::new(10.0, 1, vec![DestinationState::new(10.0).want(0, 100.0)]).unwrap();
        let g = build_graph(&s).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn invalid_scenario_rejected() {
        let mut s = Scenario::three_node_example();
        s.destinations[0].has.insert(PacketId(0));
        assert!(matches!(build_graph(&s), Err(RsncError::InvalidScenario(_))));
    }

    #[test]
    fn same_packet_shares_an_edge_without_side_info() {
        let s = Scenario::new(
            1.0,
            1,
            vec![DestinationState::new(1.0).want(0, 10.0), DestinationState::new(2.0).want(0, 10.0)],
        )
        .unwrap();
        let g = build_graph(&s).unwrap();
        assert!(g.adjacent(v(0, 0), v(1, 0)));
        let tx = clique_to_transmission(&g, &set(&[v(0, 0), v(1, 0)]), &s).unwrap();
        assert_eq!(tx.coded_set, [PacketId(0)].into());
        assert_eq!(tx.rate, 1.0);
    }

    #[test]
    fn clique_transmissions_on_example() {
        let s = Scenario::three_node_example();
        let g = build_graph(&s).unwrap();
        let tx = clique_to_transmission(&g, &set(&[v(1, 1), v(2, 2)]), &s).unwrap();
        assert_eq!(tx.coded_set, [PacketId(1), PacketId(2)].into());
        assert_eq!(tx.intended, [DestId(1), DestId(2)].into());
        assert_eq!(tx.rate, 2_000.0);
        assert_eq!(tx.delay, 5.0);

        let tx = clique_to_transmission(&g, &set(&[v(0, 0)]), &s).unwrap();
        assert_eq!(tx.coded_set, [PacketId(0)].into());
        assert_eq!(tx.rate, 5_000.0);
        assert_eq!(tx.delay, 2.0);

        let err = clique_to_transmission(&g, &set(&[v(0, 0), v(1, 1)]), &s).unwrap_err();
        assert!(matches!(err, RsncError::NotAClique(_)));
        assert!(clique_to_transmission(&g, &BTreeSet::new(), &s).is_err());
        assert!(clique_to_transmission(&g, &set(&[v(0, 1)]), &s).is_err());
    }

    #[test]
    fn decoding_rules() {
        let s = Scenario::three_node_example();
        let mk = |ps: &[usize], rate: f64| {
            Transmission::new(ps.iter().map(|&p| PacketId(p)).collect(), rate, BTreeSet::new(), 10_000.0).unwrap()
        };
        assert_eq!(decodes(&s, DestId(1), &mk(&[1, 2], 2_000.0)), Some(PacketId(1)));
        assert_eq!(decodes(&s, DestId(2), &mk(&[1, 2], 2_000.0)), Some(PacketId(2)));
        assert_eq!(decodes(&s, DestId(0), &mk(&[1, 2], 2_000.0)), None);
        assert_eq!(decodes(&s, DestId(1), &mk(&[0, 1, 2], 5_000.0)), None);
        assert_eq!(decodes(&s, DestId(0), &mk(&[0, 1, 2], 5_000.0)), Some(PacketId(0)));
    }

    #[test]
    fn update_after_first_transmission() {
        let s = Scenario::three_node_example();
        let g = build_graph(&s).unwrap();
        let next = update_graph(&g, 2.0, &set(&[v(0, 0)]), &BTreeSet::new());
        assert_eq!(next.len(), 2);
        assert_eq!(next.state(v(1, 1)).unwrap().deadline, 6.0);
        assert_eq!(next.state(v(2, 2)).unwrap().deadline, 6.0);
        assert!((next.r_min(v(1, 1)) - 10_000.0 / 6.0).abs() < 1e-9);
        assert!(next.adjacent(v(1, 1), v(2, 2)));
    }

    #[test]
    fn update_identity() {
        let s = Scenario::three_node_example();
        let g = build_graph(&s).unwrap();
        assert_eq!(update_graph(&g, 0.0, &BTreeSet::new(), &BTreeSet::new()), g);
    }

    #[test]
    fn update_expires_vertices() {
        let s = Scenario::three_node_example();
        let g = build_graph(&s).unwrap();
        let next = update_graph(&g, 4.0, &BTreeSet::new(), &BTreeSet::new());
        // d0 has 0 s left; d1, d2 have 4 s but need 5 s
        assert!(next.is_empty());
        let agnostic = build_rate_agnostic_graph(&s).unwrap();
        let next = update_graph(&agnostic, 4.0, &BTreeSet::new(), &BTreeSet::new());
        assert_eq!(next.vertices().collect::<Vec<_>>(), vec![v(1, 1), v(2, 2)]);
    }

    #[test]
    fn update_drops_edges_that_lose_rate_compatibility() {
        // d0 fast, d1 slow; both want p0. Edge needs B/r(d1) = 5 <= T(d0).
        let s = Scenario::new(
            10.0,
            1,
            vec![DestinationState::new(10.0).want(0, 6.0), DestinationState::new(2.0).want(0, 20.0)],
        )
        .unwrap();
        let g = build_graph(&s).unwrap();
        assert!(g.adjacent(v(0, 0), v(1, 0)));
        let next = update_graph(&g, 2.0, &BTreeSet::new(), &BTreeSet::new());
        assert!(next.contains(v(0, 0)) && next.contains(v(1, 0)));
        assert!(!next.adjacent(v(0, 0), v(1, 0)));
        assert_eq!(next, build_graph(&s.advanced(2.0)).unwrap());
    }

    #[test]
    fn dump_is_ordered_by_dest_then_packet() {
        let dests = (0..12).map(|_| DestinationState::new(1.0).want(0, 100.0)).collect();
        let s = Scenario::new(1.0, 1, dests).unwrap();
        let g = build_graph(&s).unwrap();
        let text = serde_json::to_string(&g.dump()).unwrap();
        let p2 = text.find("\"2:0\":").unwrap();
        let p10 = text.find("\"10:0\":").unwrap();
        assert!(p2 < p10);

        let ex = serde_json::to_string(&build_graph(&Scenario::three_node_example()).unwrap().dump()).unwrap();
        assert_eq!(ex, r#"{"0:0":[],"1:1":["2:2"],"2:2":["1:1"]}"#);
    }
}
