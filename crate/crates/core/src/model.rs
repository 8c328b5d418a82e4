//! Domain types for a single-hop broadcast instance: one source, a set of
//! neighbouring destinations, and per-destination wanted/overheard packet
//! sets with reception deadlines and link rate limits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RsncError};

/// Absolute tolerance for comparisons between derived reals (rates, times).
pub const EPS: f64 = 1e-9;

/// `delay` fits within `deadline`, up to [`EPS`].
#[inline]
pub fn fits(delay: f64, deadline: f64) -> bool {
    delay <= deadline + EPS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PacketId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DestId(pub usize);

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for DestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// A (destination, wanted packet) pair. Doubles as the coding-graph vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Request {
    pub dest: DestId,
    pub packet: PacketId,
}

impl Request {
    pub fn new(dest: usize, packet: usize) -> Self {
        Request { dest: DestId(dest), packet: PacketId(packet) }
    }
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dest, self.packet)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DestinationState {
    pub wants: BTreeSet<PacketId>,
    pub has: BTreeSet<PacketId>,
    /// Reception deadline in seconds, keyed exactly by `wants`.
    pub deadlines: BTreeMap<PacketId, f64>,
    /// Highest rate (bits/s) this destination can still receive at.
    pub max_rate: f64,
}

impl DestinationState {
    pub fn new(max_rate: f64) -> Self {
        DestinationState { wants: BTreeSet::new(), has: BTreeSet::new(), deadlines: BTreeMap::new(), max_rate }
    }

    pub fn want(mut self, packet: usize, deadline: f64) -> Self {
        self.wants.insert(PacketId(packet));
        self.deadlines.insert(PacketId(packet), deadline);
        self
    }

    pub fn holding(mut self, packets: impl IntoIterator<Item = usize>) -> Self {
        self.has.extend(packets.into_iter().map(PacketId));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// Packet size B in bits.
    pub packet_size: f64,
    pub n_packets: usize,
    pub destinations: Vec<DestinationState>,
    /// Benefit of each packet, indexed by `PacketId`.
    pub benefits: Vec<f64>,
}

impl Scenario {
    /// Builds a scenario with unit benefits and validates it.
    pub fn new(packet_size: f64, n_packets: usize, destinations: Vec<DestinationState>) -> Result<Self> {
        Self::with_benefits(packet_size, vec![1.0; n_packets], destinations)
    }

    pub fn with_benefits(packet_size: f64, benefits: Vec<f64>, destinations: Vec<DestinationState>) -> Result<Self> {
        let scenario = Scenario { packet_size, n_packets: benefits.len(), destinations, benefits };
        scenario.ensure_valid()?;
        Ok(scenario)
    }

    /// The three-destination example: B = 10 kbit, link limits 5/2/2 kbit/s,
    /// d_i wants p_i and has the other two packets; deadlines 4, 8, 8 s.
    pub fn three_node_example() -> Self {
        let dests = vec![
            DestinationState::new(5_000.0).want(0, 4.0).holding([1, 2]),
            DestinationState::new(2_000.0).want(1, 8.0).holding([0, 2]),
            DestinationState::new(2_000.0).want(2, 8.0).holding([0, 1]),
        ];
        Scenario::new(10_000.0, 3, dests).expect("example scenario is valid")
    }

    pub fn dest(&self, d: DestId) -> &DestinationState {
        &self.destinations[d.0]
    }

    pub fn dest_ids(&self) -> impl Iterator<Item = DestId> + '_ {
        (0..self.destinations.len()).map(DestId)
    }

    pub fn benefit(&self, p: PacketId) -> f64 {
        self.benefits[p.0]
    }

    pub fn deadline(&self, r: Request) -> Option<f64> {
        self.destinations.get(r.dest.0)?.deadlines.get(&r.packet).copied()
    }

    /// Every (destination, wanted packet) pair in (dest, packet) order.
    pub fn requests(&self) -> impl Iterator<Item = Request> + '_ {
        self.destinations
            .iter()
            .enumerate()
            .flat_map(|(i, d)| d.wants.iter().map(move |&p| Request { dest: DestId(i), packet: p }))
    }

    pub fn request_count(&self) -> usize {
        self.destinations.iter().map(|d| d.wants.len()).sum()
    }

    /// Transmission time of one packet at `rate`.
    pub fn delay_at(&self, rate: f64) -> f64 {
        self.packet_size / rate
    }

    /// Copy with all deadlines shifted `elapsed` seconds closer. Requests whose
    /// deadline is no longer positive are dropped.
    pub fn advanced(&self, elapsed: f64) -> Scenario {
        let mut next = self.clone();
        for d in &mut next.destinations {
            for t in d.deadlines.values_mut() {
                *t -= elapsed;
            }
            d.deadlines.retain(|_, t| *t > EPS);
            d.wants.retain(|p| d.deadlines.contains_key(p));
        }
        next
    }

    pub fn validate(&self) -> ValidationReport {
        validate_scenario(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(RsncError::InvalidScenario(report.to_string()))
        }
    }
}

/// Minimum rate that still meets the current deadline of `p` at `d`.
/// Infinite once the deadline has passed.
pub fn r_min(scenario: &Scenario, d: DestId, p: PacketId) -> Result<f64> {
    let deadline = scenario
        .destinations
        .get(d.0)
        .filter(|s| s.wants.contains(&p))
        .and_then(|s| s.deadlines.get(&p))
        .ok_or(RsncError::NotWanted { dest: d, packet: p })?;
    if *deadline <= EPS {
        return Ok(f64::INFINITY);
    }
    Ok(scenario.packet_size / deadline)
}

/// A transmission at `rate` is received by `d` iff `rate <= r(s, d)`.
pub fn receives(scenario: &Scenario, d: DestId, rate: f64) -> bool {
    rate <= scenario.dest(d).max_rate + EPS
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonPositivePacketSize,
    NonPositiveBenefit(PacketId),
    NonPositiveRate(DestId),
    UnknownPacket(DestId, PacketId),
    HasWantsOverlap(DestId, PacketId),
    MissingDeadline(DestId, PacketId),
    StrayDeadline(DestId, PacketId),
    NonPositiveDeadline(DestId, PacketId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositivePacketSize => write!(f, "nonpositive packet size"),
            Violation::NonPositiveBenefit(p) => write!(f, "nonpositive benefit for {p}"),
            Violation::NonPositiveRate(d) => write!(f, "nonpositive max rate at {d}"),
            Violation::UnknownPacket(d, p) => write!(f, "{d} references unknown packet {p}"),
            Violation::HasWantsOverlap(d, p) => write!(f, "has∩wants nonempty at {d}: {p}"),
            Violation::MissingDeadline(d, p) => write!(f, "no deadline for wanted {p} at {d}"),
            Violation::StrayDeadline(d, p) => write!(f, "deadline for unwanted {p} at {d}"),
            Violation::NonPositiveDeadline(d, p) => write!(f, "nonpositive deadline for {p} at {d}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_scenario(scenario: &Scenario) -> ValidationReport {
    let mut violations = Vec::new();
    if !(scenario.packet_size > 0.0) {
        violations.push(Violation::NonPositivePacketSize);
    }
    for (j, &a) in scenario.benefits.iter().enumerate() {
        if !(a > 0.0) {
            violations.push(Violation::NonPositiveBenefit(PacketId(j)));
        }
    }
    let n = scenario.n_packets;
    for (i, d) in scenario.destinations.iter().enumerate() {
        let id = DestId(i);
        if !(d.max_rate > 0.0) {
            violations.push(Violation::NonPositiveRate(id));
        }
        for &p in d.wants.iter().chain(d.has.iter()).chain(d.deadlines.keys()) {
            if p.0 >= n {
                violations.push(Violation::UnknownPacket(id, p));
            }
        }
        for &p in d.wants.intersection(&d.has) {
            violations.push(Violation::HasWantsOverlap(id, p));
        }
        for &p in &d.wants {
            match d.deadlines.get(&p) {
                None => violations.push(Violation::MissingDeadline(id, p)),
                Some(t) if !(*t > 0.0) => violations.push(Violation::NonPositiveDeadline(id, p)),
                Some(_) => {}
            }
        }
        for p in d.deadlines.keys() {
            if !d.wants.contains(p) {
                violations.push(Violation::StrayDeadline(id, *p));
            }
        }
    }
    violations.dedup();
    ValidationReport { violations }
}

/// One broadcast: the XOR of `coded_set`, sent at `rate` towards `intended`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub coded_set: BTreeSet<PacketId>,
    pub rate: f64,
    pub intended: BTreeSet<DestId>,
    /// Always `packet_size / rate`.
    pub delay: f64,
}

impl Transmission {
    pub fn new(coded_set: BTreeSet<PacketId>, rate: f64, intended: BTreeSet<DestId>, packet_size: f64) -> Result<Self> {
        if coded_set.is_empty() {
            return Err(RsncError::InvalidTransmission("empty coded set".into()));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(RsncError::InvalidTransmission(format!("rate {rate} is not positive")));
        }
        Ok(Transmission { coded_set, rate, intended, delay: packet_size / rate })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestOutcome {
    pub dest: DestId,
    pub packet: PacketId,
    pub delivered_at: Option<f64>,
    pub missed: bool,
}

impl RequestOutcome {
    pub fn request(&self) -> Request {
        Request { dest: self.dest, packet: self.packet }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rsnc,
    Dsf,
    Sin1,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Rsnc, Algorithm::Dsf, Algorithm::Sin1, Algorithm::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rsnc => "rsnc",
            Algorithm::Dsf => "dsf",
            Algorithm::Sin1 => "sin1",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = RsncError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| RsncError::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionLog {
    pub algorithm: Algorithm,
    pub transmissions: Vec<Transmission>,
    /// One entry per request, in (dest, packet) order.
    pub outcomes: Vec<RequestOutcome>,
}

impl TransmissionLog {
    pub fn misses(&self) -> usize {
        self.outcomes.iter().filter(|o| o.missed).count()
    }

    pub fn outcome(&self, r: Request) -> Option<&RequestOutcome> {
        self.outcomes.iter().find(|o| o.request() == r)
    }

    /// Completion time of every transmission, in order.
    pub fn arrival_times(&self) -> Vec<f64> {
        self.transmissions
            .iter()
            .scan(0.0, |t, tx| {
                *t += tx.delay;
                Some(*t)
            })
            .collect()
    }
}
