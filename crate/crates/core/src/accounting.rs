//! Delivery bookkeeping shared by every scheduling policy.
//!
//! A [`Ledger`] replays transmissions against a scenario: it advances the
//! clock, decrements the remaining deadlines of outstanding requests, and
//! resolves a request the first time its destination decodes it. Whether a
//! delivery was on time is judged against the original deadline and the
//! cumulative arrival time, never against the decremented copy.

use std::collections::BTreeMap;

use crate::graph::decodes;
use crate::model::{fits, Algorithm, Request, RequestOutcome, Scenario, Transmission, TransmissionLog};

#[derive(Clone, Debug)]
pub struct Ledger {
    original: BTreeMap<Request, f64>,
    current: Scenario,
    elapsed: f64,
    transmissions: Vec<Transmission>,
    resolved: BTreeMap<Request, Option<f64>>,
}

/// A request resolved by one transmission.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Delivery {
    pub request: Request,
    pub at: f64,
    pub on_time: bool,
}

impl Ledger {
    pub fn new(scenario: &Scenario) -> Self {
        let original =
            scenario.requests().map(|r| (r, scenario.deadline(r).expect("wanted packets carry deadlines"))).collect();
        Ledger {
            original,
            current: scenario.clone(),
            elapsed: 0.0,
            transmissions: Vec::new(),
            resolved: BTreeMap::new(),
        }
    }

    /// Scenario restricted to outstanding requests, with remaining deadlines.
    pub fn current(&self) -> &Scenario {
        &self.current
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn is_outstanding(&self, r: Request) -> bool {
        self.current.destinations[r.dest.0].wants.contains(&r.packet)
    }

    pub fn outstanding(&self) -> impl Iterator<Item = Request> + '_ {
        self.current.requests()
    }

    pub fn original_deadline(&self, r: Request) -> f64 {
        self.original[&r]
    }

    /// Requests already settled as misses.
    pub fn missed_so_far(&self) -> usize {
        self.resolved.iter().filter(|(r, at)| at.is_none_or(|t| !fits(t, self.original[r]))).count()
    }

    /// Sends `tx`, resolving every outstanding request it lets its destination
    /// decode. Deadlines of the requests left outstanding shrink by the delay.
    pub fn transmit(&mut self, tx: Transmission) -> Vec<Delivery> {
        let arrival = self.elapsed + tx.delay;
        let mut deliveries = Vec::new();
        for d in self.current.dest_ids() {
            if let Some(p) = decodes(&self.current, d, &tx) {
                let request = Request { dest: d, packet: p };
                let on_time = fits(arrival, self.original[&request]);
                deliveries.push(Delivery { request, at: arrival, on_time });
            }
        }
        for delivery in &deliveries {
            self.settle(delivery.request, Some(arrival));
        }
        for dest in &mut self.current.destinations {
            for t in dest.deadlines.values_mut() {
                *t -= tx.delay;
            }
        }
        self.elapsed = arrival;
        self.transmissions.push(tx);
        deliveries
    }

    /// Abandons an outstanding request; it will be reported as missed.
    pub fn give_up(&mut self, r: Request) {
        if self.is_outstanding(r) {
            self.settle(r, None);
        }
    }

    fn settle(&mut self, r: Request, at: Option<f64>) {
        let dest = &mut self.current.destinations[r.dest.0];
        dest.wants.remove(&r.packet);
        dest.deadlines.remove(&r.packet);
        self.resolved.insert(r, at);
    }

    pub fn finish(self, algorithm: Algorithm) -> TransmissionLog {
        let outcomes = self
            .original
            .iter()
            .map(|(&r, &deadline)| {
                let delivered_at = self.resolved.get(&r).copied().flatten();
                RequestOutcome {
                    dest: r.dest,
                    packet: r.packet,
                    delivered_at,
                    missed: delivered_at.is_none_or(|t| !fits(t, deadline)),
                }
            })
            .collect();
        TransmissionLog { algorithm, transmissions: self.transmissions, outcomes }
    }
}
