//! Comparison policies, run through the same ledger as the main scheduler.
//!
//! * DSF: rate-oblivious coding. Each round sends the maximum-weight clique of
//!   the graph built from side information alone, weighting a vertex by the
//!   reciprocal of its remaining deadline, at the slowest member rate.
//! * SIN-1: no coding. Each round sends the packet minimising
//!   (most urgent remaining deadline) / (number of requests), counting only
//!   requests that can still be met.

use std::collections::{BTreeMap, BTreeSet};

use crate::accounting::Ledger;
use crate::clique::max_weight_clique;
use crate::error::Result;
use crate::graph::{build_rate_agnostic_graph, clique_to_transmission, update_graph, Vertex};
use crate::model::{fits, Algorithm, DestId, PacketId, Scenario, Transmission, TransmissionLog, EPS};

pub fn run_dsf(scenario: &Scenario) -> Result<TransmissionLog> {
    let mut graph = build_rate_agnostic_graph(scenario)?;
    let mut ledger = Ledger::new(scenario);
    while !graph.is_empty() {
        graph.set_weights(|_, s| 1.0 / s.deadline);
        let clique = max_weight_clique(&graph, |_, _| true);
        let tx = clique_to_transmission(&graph, &clique.members, scenario)?;
        let delay = tx.delay;
        let served: BTreeSet<Vertex> = ledger.transmit(tx).into_iter().map(|d| d.request).collect();
        graph = update_graph(&graph, delay, &served, &BTreeSet::new());
    }
    Ok(ledger.finish(Algorithm::Dsf))
}

pub fn run_sin1(scenario: &Scenario) -> Result<TransmissionLog> {
    scenario.ensure_valid()?;
    let b = scenario.packet_size;
    let mut ledger = Ledger::new(scenario);
    loop {
        // packet -> (requesters whose deadline is still reachable, their tightest deadline)
        let mut meetable: BTreeMap<PacketId, (Vec<DestId>, f64)> = BTreeMap::new();
        let current = ledger.current();
        for r in current.requests() {
            let deadline = current.deadline(r).expect("wanted packets carry deadlines");
            if deadline > EPS && fits(b / current.dest(r.dest).max_rate, deadline) {
                let entry = meetable.entry(r.packet).or_insert((Vec::new(), f64::INFINITY));
                entry.0.push(r.dest);
                entry.1 = entry.1.min(deadline);
            }
        }
        let mut best: Option<(PacketId, f64)> = None;
        for (&p, (dests, urgent)) in &meetable {
            let score = urgent / dests.len() as f64;
            if best.is_none_or(|(_, s)| score < s - EPS) {
                best = Some((p, score));
            }
        }
        let Some((packet, _)) = best else { break };
        let dests = &meetable[&packet].0;
        let rate = dests.iter().map(|&d| current.dest(d).max_rate).fold(f64::INFINITY, f64::min);
        let tx = Transmission::new([packet].into(), rate, dests.iter().copied().collect(), b)?;
        ledger.transmit(tx);
    }
    Ok(ledger.finish(Algorithm::Sin1))
}
