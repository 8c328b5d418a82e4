//! Exhaustive ground truth for tiny instances.
//!
//! [`optimal_schedule`] searches every ordered sequence of cliques, each taken
//! from the coding graph as it stands when that broadcast starts, and scores
//! complete schedules by missed requests under the shared ledger. A request
//! counts as met iff its cumulative arrival time is within its deadline, so no
//! big-constant linearisation is needed. Branches whose settled misses already
//! reach the incumbent are cut; this never discards a strictly better schedule.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::accounting::Ledger;
use crate::clique::{compare_cliques, enumerate_cliques_capped, CliqueResult};
use crate::error::{Result, RsncError};
use crate::graph::{build_graph, clique_to_transmission, update_graph, CodingGraph, Vertex};
use crate::model::{fits, receives, Algorithm, Scenario, Transmission, TransmissionLog, EPS};
use crate::scheduler::{doomed_vertices, RateLadder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    /// Schedule length cap; `None` means one broadcast per initial vertex.
    pub max_transmissions: Option<usize>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 8, max_transmissions: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub best_log: TransmissionLog,
    pub min_misses: usize,
    /// Complete schedules scored.
    pub schedules_explored: u64,
}

fn check_limits(graph: &CodingGraph, limits: &OracleLimits) -> Result<()> {
    if graph.len() > limits.max_vertices {
        return Err(RsncError::OracleLimit { vertices: graph.len(), max: limits.max_vertices });
    }
    Ok(())
}

pub fn optimal_schedule(scenario: &Scenario, limits: OracleLimits) -> Result<OracleResult> {
    let graph = build_graph(scenario)?;
    check_limits(&graph, &limits)?;
    let mut ledger = Ledger::new(scenario);
    abandon_unreachable(&graph, &mut ledger);

    let mut search = Search {
        scenario,
        cap: limits.max_vertices,
        max_depth: limits.max_transmissions.unwrap_or(graph.len()),
        best: None,
        explored: 0,
    };
    search.explore(&graph, &ledger, 0)?;
    let best_log = search.best.expect("the empty schedule is always scored");
    Ok(OracleResult { min_misses: best_log.misses(), best_log, schedules_explored: search.explored })
}

fn abandon_unreachable(graph: &CodingGraph, ledger: &mut Ledger) {
    let lost: Vec<_> = ledger.outstanding().filter(|r| !graph.contains(*r)).collect();
    for r in lost {
        ledger.give_up(r);
    }
}

struct Search<'a> {
    scenario: &'a Scenario,
    cap: usize,
    max_depth: usize,
    best: Option<TransmissionLog>,
    explored: u64,
}

impl Search<'_> {
    fn score_leaf(&mut self, ledger: &Ledger) {
        self.explored += 1;
        let log = ledger.clone().finish(Algorithm::Oracle);
        if self.best.as_ref().is_none_or(|b| log.misses() < b.misses()) {
            self.best = Some(log);
        }
    }

    fn explore(&mut self, graph: &CodingGraph, ledger: &Ledger, depth: usize) -> Result<()> {
        if let Some(best) = &self.best {
            if ledger.missed_so_far() >= best.misses() {
                return Ok(());
            }
        }
        if graph.is_empty() || depth == self.max_depth {
            self.score_leaf(ledger);
            return Ok(());
        }
        let cliques = enumerate_cliques_capped(graph, self.cap)?;
        for clique in cliques.iter().rev() {
            let tx = clique_to_transmission(graph, clique, self.scenario)?;
            let delay = tx.delay;
            let mut next_ledger = ledger.clone();
            let served: BTreeSet<Vertex> = next_ledger.transmit(tx).into_iter().map(|d| d.request).collect();
            let next_graph = update_graph(graph, delay, &served, &BTreeSet::new());
            abandon_unreachable(&next_graph, &mut next_ledger);
            self.explore(&next_graph, &next_ledger, depth + 1)?;
        }
        // stopping early leaves the remaining vertices unserved
        self.score_leaf(ledger);
        Ok(())
    }
}

/// Exact `U` maximiser over every clique of `graph`.
#[derive(Clone, Debug, PartialEq)]
pub struct UMaximum {
    pub clique: CliqueResult,
    /// Rung of the broadcast rate in the scenario's rate ladder; `None` for
    /// the empty graph.
    pub rate_index: Option<usize>,
    pub u: f64,
    pub loss: f64,
}

/// Vertices of `graph` that `tx` delivers on time, members or not.
fn satisfied(scenario: &Scenario, graph: &CodingGraph, tx: &Transmission) -> BTreeSet<Vertex> {
    graph
        .vertices()
        .filter(|&v| {
            let s = graph.state(v).expect("listed vertex");
            receives(scenario, v.dest, tx.rate)
                && tx.coded_set.contains(&v.packet)
                && tx.coded_set.iter().all(|q| *q == v.packet || scenario.dest(v.dest).has.contains(q))
                && fits(tx.delay, s.deadline)
        })
        .collect()
}

pub fn brute_force_u_max(scenario: &Scenario, graph: &CodingGraph, limits: OracleLimits) -> Result<UMaximum> {
    check_limits(graph, &limits)?;
    let ladder = RateLadder::new(scenario);
    let mut best: Option<(UMaximum, Vec<Vertex>)> = None;
    for clique in enumerate_cliques_capped(graph, limits.max_vertices)? {
        let tx = clique_to_transmission(graph, &clique, scenario)?;
        let f = satisfied(scenario, graph, &tx);
        let l = doomed_vertices(graph, tx.delay, &f);
        let gain = f.iter().fold(0.0, |acc, v| acc + scenario.benefit(v.packet));
        let loss = l.iter().fold(0.0, |acc, v| acc + scenario.benefit(v.packet));
        let weight = clique.iter().map(|&v| graph.weight(v)).sum();
        let candidate = UMaximum {
            rate_index: ladder.index_of(tx.rate),
            clique: CliqueResult { members: clique.clone(), weight },
            u: gain - loss,
            loss,
        };
        let members: Vec<Vertex> = clique.into_iter().collect();
        let better = match &best {
            None => true,
            Some((incumbent, inc_members)) => prefer(&candidate, &members, incumbent, inc_members) == Ordering::Greater,
        };
        if better {
            best = Some((candidate, members));
        }
    }
    Ok(best.map(|(b, _)| b).unwrap_or(UMaximum { clique: CliqueResult::empty(), rate_index: None, u: 0.0, loss: 0.0 }))
}

fn prefer(a: &UMaximum, a_members: &[Vertex], b: &UMaximum, b_members: &[Vertex]) -> Ordering {
    if a.u > b.u + EPS {
        return Ordering::Greater;
    }
    if b.u > a.u + EPS {
        return Ordering::Less;
    }
    if a.loss < b.loss - EPS {
        return Ordering::Greater;
    }
    if b.loss < a.loss - EPS {
        return Ordering::Less;
    }
    match b.rate_index.cmp(&a.rate_index) {
        Ordering::Equal => {}
        other => return other,
    }
    // both lists share the (dest, packet) order, so ranks compare like vertices
    let universe: BTreeSet<Vertex> = a_members.iter().chain(b_members).copied().collect();
    let rank = |v: &Vertex| universe.iter().position(|u| u == v).unwrap();
    let ra: Vec<usize> = a_members.iter().map(rank).collect();
    let rb: Vec<usize> = b_members.iter().map(rank).collect();
    compare_cliques(a.clique.weight, &ra, b.clique.weight, &rb)
}

/// Checks that every broadcast in `log` is exactly a clique of the coding
/// graph at the moment it is sent, advancing the graph the way the oracle does.
pub fn replay_as_cliques(scenario: &Scenario, log: &TransmissionLog) -> Result<()> {
    let mut graph = build_graph(scenario)?;
    let mut ledger = Ledger::new(scenario);
    for (h, tx) in log.transmissions.iter().enumerate() {
        let members: BTreeSet<Vertex> = tx
            .intended
            .iter()
            .filter_map(|&d| {
                let mut wanted = tx.coded_set.iter().filter(|p| ledger.current().dest(d).wants.contains(p));
                match (wanted.next(), wanted.next()) {
                    (Some(&p), None) => Some(Vertex { dest: d, packet: p }),
                    _ => None,
                }
            })
            .collect();
        let coded: BTreeSet<_> = members.iter().map(|v| v.packet).collect();
        if members.len() != tx.intended.len() || coded != tx.coded_set || !graph.is_clique(&members) {
            return Err(RsncError::NotAClique(format!("broadcast {h} is not a clique of the current graph")));
        }
        let expected = clique_to_transmission(&graph, &members, scenario)?;
        if (expected.rate - tx.rate).abs() > EPS {
            return Err(RsncError::InvalidTransmission(format!("broadcast {h} uses rate {}", tx.rate)));
        }
        let served: BTreeSet<Vertex> = ledger.transmit(tx.clone()).into_iter().map(|d| d.request).collect();
        graph = update_graph(&graph, tx.delay, &served, &BTreeSet::new());
        abandon_unreachable(&graph, &mut ledger);
    }
    Ok(())
}
