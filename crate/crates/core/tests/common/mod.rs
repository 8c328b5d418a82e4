#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use rsnc::model::{DestinationState, PacketId, Request, Scenario};

/// Scenario drawn without the crate's generator: per (dest, packet) a cell is
/// wanted, held or absent.
pub fn random_scenario<R: Rng>(rng: &mut R, max_n: usize, max_m: usize) -> Scenario {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let packet_size = [1.0, 10.0, 100.0][rng.gen_range(0..3)];
    let want_p = rng.gen_range(0.1..0.6);
    let dests = (0..m)
        .map(|_| {
            // a few repeated link limits so ties between rates actually occur
            let rate = if rng.gen_bool(0.3) { 10.0 } else { rng.gen_range(1.0..50.0) };
            let mut d = DestinationState::new(rate);
            for j in 0..n {
                let x: f64 = rng.gen();
                if x < want_p {
                    let t = if rng.gen_bool(0.1) { packet_size / rate } else { rng.gen_range(0.05..3.0) * packet_size };
                    d = d.want(j, t);
                } else if x < want_p + (1.0 - want_p) * 0.5 {
                    d = d.holding([j]);
                }
            }
            d
        })
        .collect();
    let benefits = (0..n).map(|_| if rng.gen_bool(0.7) { 1.0 } else { rng.gen_range(0.5..2.0) }).collect();
    Scenario::with_benefits(packet_size, benefits, dests).expect("constructed valid")
}

pub fn arb_scenario(max_n: usize, max_m: usize) -> impl Strategy<Value = Scenario> {
    any::<u64>().prop_map(move |seed| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        random_scenario(&mut rng, max_n, max_m)
    })
}

/// Vertex set straight from the definition.
pub fn reference_vertices(s: &Scenario) -> BTreeSet<Request> {
    let mut out = BTreeSet::new();
    for (i, d) in s.destinations.iter().enumerate() {
        for (&p, &t) in &d.deadlines {
            if t > 1e-9 && s.packet_size / d.max_rate <= t + 1e-9 {
                out.insert(Request::new(i, p.0));
            }
        }
    }
    out
}

/// Edge predicate straight from the definition.
pub fn reference_edge(s: &Scenario, a: Request, b: Request) -> bool {
    if a.dest == b.dest {
        return false;
    }
    let (da, db) = (s.dest(a.dest), s.dest(b.dest));
    let side = a.packet == b.packet || (db.has.contains(&a.packet) && da.has.contains(&b.packet));
    let ta = da.deadlines[&a.packet];
    let tb = db.deadlines[&b.packet];
    side && s.packet_size / db.max_rate <= ta + 1e-9 && s.packet_size / da.max_rate <= tb + 1e-9
}

pub fn packets(ids: &[usize]) -> BTreeSet<PacketId> {
    ids.iter().map(|&j| PacketId(j)).collect()
}
