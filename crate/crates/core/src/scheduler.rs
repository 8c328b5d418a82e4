//! Joint rate selection and XOR coding, one propagation at a time.
//!
//! For a candidate broadcast, `f` collects the requests it satisfies on time
//! and `l` the outstanding requests it dooms: those whose remaining deadline
//! cannot absorb this delay plus one more packet at their own link limit.
//! The net benefit is `U = Σα(f) − Σα(l)`.
//!
//! [`plan_one_propagation`] walks the ladder of distinct link rates from the
//! slowest up. At rung `k` only destinations reachable at `Tr_k` or faster
//! are eligible; the maximum-weight clique among their vertices is sent at its
//! slowest member rate and scored. The best `U` wins, then the smaller loss,
//! then the lower rung. [`run_rsnc`] repeats this until the graph is empty.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::accounting::Ledger;
use crate::clique::{max_weight_clique, CliqueResult};
use crate::error::{Result, RsncError};
use crate::graph::{build_graph, clique_to_transmission, decodes, update_graph, CodingGraph, Vertex};
use crate::model::{fits, receives, Algorithm, Request, Scenario, Transmission, TransmissionLog, EPS};

/// Distinct link limits `r(s, d_i)` in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct RateLadder {
    rates: Vec<f64>,
}

impl RateLadder {
    pub fn new(scenario: &Scenario) -> Self {
        let mut rates: Vec<f64> = scenario.destinations.iter().map(|d| d.max_rate).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        RateLadder { rates }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// `Tr_k` for a zero-based rung index.
    pub fn threshold(&self, k: usize) -> f64 {
        self.rates[k]
    }

    pub fn index_of(&self, rate: f64) -> Option<usize> {
        self.rates.iter().position(|&r| (r - rate).abs() <= EPS)
    }
}

/// Score of one ladder rung.
#[derive(Clone, Debug, PartialEq)]
pub struct RungEvaluation {
    pub threshold: f64,
    pub clique: CliqueResult,
    /// Slowest member link limit, or the threshold itself when no clique exists.
    pub rate: f64,
    pub f: BTreeSet<Request>,
    pub l: BTreeSet<Request>,
    pub u: f64,
    pub loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationDecision {
    pub clique: CliqueResult,
    pub transmission: Transmission,
    pub u_value: f64,
    pub f: BTreeSet<Request>,
    pub l: BTreeSet<Request>,
    /// Zero-based rung of the chosen threshold.
    pub chosen_rate_index: usize,
    pub rungs: Vec<RungEvaluation>,
}

/// Requests delivered on time by `tx`, judged on the current deadlines.
pub fn compute_f(scenario: &Scenario, tx: &Transmission) -> BTreeSet<Request> {
    scenario
        .dest_ids()
        .filter(|&d| receives(scenario, d, tx.rate))
        .filter_map(|d| decodes(scenario, d, tx).map(|p| Request { dest: d, packet: p }))
        .filter(|&r| scenario.deadline(r).is_some_and(|t| fits(tx.delay, t)))
        .collect()
}

/// `delay` now plus the fastest possible next delivery overshoots `deadline`.
pub fn definitely_misses(delay: f64, packet_size: f64, max_rate: f64, deadline: f64) -> bool {
    !fits(delay + packet_size / max_rate, deadline)
}

/// Outstanding requests outside `f` that `tx` dooms.
pub fn compute_l(scenario: &Scenario, tx: &Transmission, f: &BTreeSet<Request>) -> BTreeSet<Request> {
    scenario
        .requests()
        .filter(|r| !f.contains(r))
        .filter(|&r| {
            let deadline = scenario.deadline(r).expect("wanted packets carry deadlines");
            definitely_misses(tx.delay, scenario.packet_size, scenario.dest(r.dest).max_rate, deadline)
        })
        .collect()
}

pub fn metric_u(scenario: &Scenario, f: &BTreeSet<Request>, l: &BTreeSet<Request>) -> Result<f64> {
    let overlap = f.intersection(l).count();
    if overlap > 0 {
        return Err(RsncError::OverlappingSets(overlap));
    }
    Ok(benefit(scenario, f) - benefit(scenario, l))
}

fn benefit(scenario: &Scenario, set: &BTreeSet<Request>) -> f64 {
    // fold from +0.0: an empty f64 sum is -0.0
    set.iter().fold(0.0, |acc, r| acc + scenario.benefit(r.packet))
}

/// Vertices of `graph` outside `served` doomed by a broadcast lasting `delay`.
pub(crate) fn doomed_vertices(graph: &CodingGraph, delay: f64, served: &BTreeSet<Vertex>) -> BTreeSet<Vertex> {
    let b = graph.packet_size();
    graph
        .vertices()
        .filter(|v| !served.contains(v))
        .filter(|&v| {
            let s = graph.state(v).expect("listed vertex");
            definitely_misses(delay, b, s.max_rate, s.deadline)
        })
        .collect()
}

fn evaluate_rung(scenario: &Scenario, graph: &CodingGraph, threshold: f64) -> RungEvaluation {
    let clique = max_weight_clique(graph, |_, s| s.max_rate >= threshold - EPS);
    let rate =
        clique.members.iter().map(|&v| graph.state(v).expect("clique member").max_rate).fold(f64::INFINITY, f64::min);
    let rate = if clique.is_empty() { threshold } else { rate };
    let f = clique.members.clone();
    let l = doomed_vertices(graph, graph.packet_size() / rate, &f);
    let gain = benefit(scenario, &f);
    let loss = benefit(scenario, &l);
    RungEvaluation { threshold, clique, rate, f, l, u: gain - loss, loss }
}

/// Prefers higher `U`, then smaller loss; `Greater` means `a` wins.
fn compare_rungs(a: &RungEvaluation, b: &RungEvaluation) -> Ordering {
    if a.u > b.u + EPS {
        Ordering::Greater
    } else if b.u > a.u + EPS {
        Ordering::Less
    } else if a.loss < b.loss - EPS {
        Ordering::Greater
    } else if b.loss < a.loss - EPS {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Chooses the XOR payload and rate for the next broadcast.
///
/// Rungs whose filtered subgraph yields no clique are scored (with `f = ∅`
/// and `l` evaluated at the threshold rate) but never chosen.
pub fn plan_one_propagation(scenario: &Scenario, graph: &CodingGraph) -> Result<PropagationDecision> {
    if graph.is_empty() {
        return Err(RsncError::EmptyGraph);
    }
    let ladder = RateLadder::new(scenario);
    let rungs: Vec<RungEvaluation> = ladder.rates().iter().map(|&t| evaluate_rung(scenario, graph, t)).collect();

    let mut chosen: Option<usize> = None;
    for (k, rung) in rungs.iter().enumerate() {
        if rung.clique.is_empty() {
            continue;
        }
        let better = match chosen {
            None => true,
            Some(c) => compare_rungs(rung, &rungs[c]) == Ordering::Greater,
        };
        if better {
            chosen = Some(k);
        }
    }
    // every vertex's own link limit is a rung, so some rung keeps a vertex
    let k = chosen.ok_or(RsncError::EmptyGraph)?;
    let rung = &rungs[k];
    let transmission = clique_to_transmission(graph, &rung.clique.members, scenario)?;
    Ok(PropagationDecision {
        clique: rung.clique.clone(),
        transmission,
        u_value: rung.u,
        f: rung.f.clone(),
        l: rung.l.clone(),
        chosen_rate_index: k,
        rungs,
    })
}

/// Step-by-step execution of the whole transmission process.
#[derive(Clone, Debug)]
pub struct RsncRun<'a> {
    scenario: &'a Scenario,
    graph: CodingGraph,
    ledger: Ledger,
}

impl<'a> RsncRun<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let graph = build_graph(scenario)?;
        let mut run = RsncRun { scenario, graph, ledger: Ledger::new(scenario) };
        run.abandon_unreachable();
        Ok(run)
    }

    pub fn graph(&self) -> &CodingGraph {
        &self.graph
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn is_done(&self) -> bool {
        self.graph.is_empty()
    }

    /// Plans and performs one broadcast; `None` once the graph is empty.
    pub fn step(&mut self) -> Result<Option<PropagationDecision>> {
        if self.graph.is_empty() {
            return Ok(None);
        }
        let decision = plan_one_propagation(self.scenario, &self.graph)?;
        let deliveries = self.ledger.transmit(decision.transmission.clone());
        let served: BTreeSet<Vertex> = deliveries.iter().map(|d| d.request).collect();
        for &r in &decision.l {
            self.ledger.give_up(r);
        }
        self.graph = update_graph(&self.graph, decision.transmission.delay, &served, &decision.l);
        self.abandon_unreachable();
        Ok(Some(decision))
    }

    /// Outstanding requests without a vertex can no longer be met.
    fn abandon_unreachable(&mut self) {
        let lost: Vec<Request> = self.ledger.outstanding().filter(|r| !self.graph.contains(*r)).collect();
        for r in lost {
            self.ledger.give_up(r);
        }
    }

    pub fn finish(self) -> TransmissionLog {
        self.ledger.finish(Algorithm::Rsnc)
    }
}

pub fn run_rsnc(scenario: &Scenario) -> Result<TransmissionLog> {
    let mut run = RsncRun::new(scenario)?;
    while run.step()?.is_some() {}
    Ok(run.finish())
}
