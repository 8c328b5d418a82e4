//! Acceptance suite. Runs every criterion at its stated size and tolerance,
//! prints one PASS/FAIL line each, and exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsnc::accounting::Ledger;
use rsnc::clique::{enumerate_cliques_capped, DenseGraph};
use rsnc::graph::{build_graph, clique_to_transmission, decodes, update_graph};
use rsnc::harness::{
    generate_scenario, run_experiment, spearman, ExperimentConfig, GenConfig, ResultsTable, TradeoffMetric,
};
use rsnc::model::{fits, receives, Algorithm, DestId, PacketId, Request, Scenario, Transmission};
use rsnc::oracle::{optimal_schedule, OracleLimits};
use rsnc::{run_dsf, run_rsnc, run_sin1};

const MASTER_SEED: u64 = 1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: impl Into<String>, fail: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(fail.into())
    }
}

fn within(elapsed: Duration, budget: Duration, what: &str) -> Outcome {
    check(elapsed < budget, "", format!("{what} took {elapsed:?}, budget {budget:?}"))
}

fn motivating_example() -> Outcome {
    let start = Instant::now();
    let s = Scenario::three_node_example();
    let log = run_rsnc(&s).map_err(|e| e.to_string())?;
    let mut ledger = Ledger::new(&s);
    let all = Transmission::new(
        [PacketId(0), PacketId(1), PacketId(2)].into(),
        2_000.0,
        [DestId(0), DestId(1), DestId(2)].into(),
        s.packet_size,
    )
    .unwrap();
    ledger.transmit(all);
    let forced = ledger.finish(Algorithm::Rsnc);
    let elapsed = start.elapsed();

    let sent: Vec<(BTreeSet<PacketId>, f64)> =
        log.transmissions.iter().map(|t| (t.coded_set.clone(), t.rate)).collect();
    let expected = vec![([PacketId(0)].into(), 5_000.0), ([PacketId(1), PacketId(2)].into(), 2_000.0)];
    check(sent == expected, "", format!("schedule {sent:?}"))?;
    check(log.misses() == 0, "", format!("{} misses", log.misses()))?;
    check(forced.misses() == 1, "", format!("forced all-in-one gave {} misses", forced.misses()))?;
    within(elapsed, Duration::from_millis(10), "example")?;
    Ok(format!("p0@5k then p1+p2@2k, 0 misses; forced 1 miss; {elapsed:?}"))
}

fn clique_validity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let (mut scenarios, mut cliques, mut violations) = (0, 0usize, 0usize);
    while scenarios < 1000 {
        let s = if scenarios % 2 == 0 {
            common::random_scenario(&mut rng, 10, 10)
        } else {
            let mut cfg = GenConfig::new(rng.gen_range(1..=10), rng.gen_range(1..=10), (10.0, 100.0), (10.0, 50.0));
            cfg.wants_density = rng.gen_range(0.1..0.5);
            generate_scenario(&cfg.with_seed(rng.gen())).unwrap()
        };
        let g = build_graph(&s).unwrap();
        if g.len() > 15 {
            continue;
        }
        scenarios += 1;
        for clique in enumerate_cliques_capped(&g, 15).map_err(|e| e.to_string())? {
            cliques += 1;
            let tx = clique_to_transmission(&g, &clique, &s).map_err(|e| e.to_string())?;
            for v in &clique {
                let ok = tx.intended.contains(&v.dest)
                    && receives(&s, v.dest, tx.rate)
                    && decodes(&s, v.dest, &tx) == Some(v.packet)
                    && fits(tx.delay, s.deadline(*v).unwrap());
                violations += usize::from(!ok);
            }
        }
    }
    let elapsed = start.elapsed();
    check(violations == 0, "", format!("{violations} violations"))?;
    within(elapsed, Duration::from_secs(60), "clique validity")?;
    Ok(format!("{scenarios} scenarios, {cliques} cliques, 0 violations; {elapsed:?}"))
}

fn oracle_dominance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 1);
    let limits = OracleLimits { max_vertices: 8, max_transmissions: None };
    let (mut scenarios, mut hard, mut soft) = (0, 0, 0);
    while scenarios < 200 {
        let s = if scenarios % 2 == 0 {
            common::random_scenario(&mut rng, 5, 5)
        } else {
            let cfg = GenConfig::new(rng.gen_range(2..=6), rng.gen_range(2..=6), (10.0, 100.0), (10.0, 50.0));
            generate_scenario(&cfg.with_seed(rng.gen())).unwrap()
        };
        let v = build_graph(&s).unwrap().len();
        if v == 0 || v > 8 {
            continue;
        }
        scenarios += 1;
        let oracle = optimal_schedule(&s, limits).map_err(|e| e.to_string())?.min_misses;
        let rsnc = run_rsnc(&s).unwrap().misses();
        let baseline = run_dsf(&s).unwrap().misses().max(run_sin1(&s).unwrap().misses());
        hard += usize::from(oracle > rsnc);
        soft += usize::from(rsnc <= baseline);
    }
    let elapsed = start.elapsed();
    check(hard == 0, "", format!("oracle worse than rsnc on {hard} scenarios"))?;
    within(elapsed, Duration::from_secs(120), "oracle dominance")?;
    Ok(format!(
        "{scenarios} scenarios, oracle <= rsnc always; rsnc <= max(dsf, sin1) on {soft}/{scenarios}; {elapsed:?}"
    ))
}

fn rebuild_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 2);
    let mut mismatches = 0;
    for _ in 0..500 {
        let s = common::random_scenario(&mut rng, 8, 8);
        let g = build_graph(&s).unwrap();
        let vs: Vec<Request> = g.vertices().collect();
        // half the time advance by a real broadcast delay
        let elapsed = if rng.gen_bool(0.5) && !vs.is_empty() {
            s.packet_size / s.dest(vs[rng.gen_range(0..vs.len())].dest).max_rate
        } else {
            rng.gen_range(0.0..2.0) * s.packet_size
        };
        let removed: BTreeSet<Request> = vs.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
        let (served, doomed): (BTreeSet<Request>, BTreeSet<Request>) = removed.iter().partition(|_| rng.gen_bool(0.5));
        let updated = update_graph(&g, elapsed, &served, &doomed);
        let rebuilt = build_graph(&s.advanced(elapsed)).unwrap().without(&removed);
        mismatches += usize::from(updated != rebuilt);
    }
    check(mismatches == 0, "500 triples, all equal", format!("{mismatches}/500 mismatches"))
}

fn exhaustive_max(g: &DenseGraph) -> f64 {
    let n = g.len();
    let mut best = 0.0f64;
    let mut members = Vec::with_capacity(n);
    for mask in 1u32..(1 << n) {
        members.clear();
        members.extend((0..n).filter(|i| mask >> i & 1 == 1));
        if g.is_clique(&members) {
            best = best.max(members.iter().map(|&i| g.weight(i)).sum());
        }
    }
    best
}

fn clique_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 3);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=15);
        let density = rng.gen_range(0.1..0.95);
        let weights = (0..n).map(|_| if rng.gen_bool(0.3) { 1.0 } else { rng.gen_range(0.001..10.0) }).collect();
        let mut g = DenseGraph::new(weights);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(density) {
                    g.add_edge(u, v);
                }
            }
        }
        let (members, weight) = g.max_weight_clique();
        if !g.is_clique(&members) {
            return Err("solver returned a non-clique".into());
        }
        worst = worst.max((weight - exhaustive_max(&g)).abs());
    }
    check(worst <= 1e-9, format!("500 graphs, max |error| {worst:e}"), format!("max |error| {worst:e}"))
}

fn rsnc_means(table: &ResultsTable, labels: &[String]) -> Vec<f64> {
    labels.iter().map(|l| table.row(l, Algorithm::Rsnc).unwrap().mean_miss_ratio).collect()
}

fn inversions(series: &[f64]) -> usize {
    series.windows(2).filter(|w| w[1] < w[0]).count()
}

fn preset(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(name).unwrap();
    cfg.samples = 100;
    cfg.seed = MASTER_SEED;
    cfg
}

fn trends() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();

    let tradeoff = run_experiment(&preset("single-tx-tradeoff"), false).map_err(|e| e.to_string())?;
    for metric in [TradeoffMetric::Satisfied, TradeoffMetric::Failed] {
        let rows = tradeoff.tradeoff_series(metric);
        let rates: Vec<f64> = rows.iter().map(|r| r.rate).collect();
        let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
        let rho = spearman(&rates, &means);
        check(rho <= -0.8, "", format!("(a) {} Spearman {rho:.3}", metric.name()))?;
        notes.push(format!("(a) {} rho={rho:.3}", metric.name()));
    }

    let rate = run_experiment(&preset("rate-sweep"), false).map_err(|e| e.to_string())?;
    for point in rate.rows.iter().filter(|r| r.algorithm == Algorithm::Rsnc) {
        for other in [Algorithm::Dsf, Algorithm::Sin1] {
            let theirs = rate.row(&point.grid_point, other).unwrap().mean_miss_ratio;
            check(
                point.mean_miss_ratio < theirs,
                "",
                format!("(b) at {} rsnc {:.4} vs {other} {theirs:.4}", point.grid_point, point.mean_miss_ratio),
            )?;
        }
    }
    notes.push(format!("(b) rsnc lowest at all {} points", rate.rows.len() / 3));

    let m_cfg = preset("m-sweep");
    let m = run_experiment(&m_cfg, false).map_err(|e| e.to_string())?;
    for series in m_cfg.grid.chunks(11) {
        let labels: Vec<String> = series.iter().map(|p| p.label.clone()).collect();
        let inv = inversions(&rsnc_means(&m, &labels));
        check(inv <= 1, "", format!("(c) m-sweep {} has {inv} inversions", labels[0]))?;
    }

    let n_cfg = preset("n-sweep");
    let n = run_experiment(&n_cfg, false).map_err(|e| e.to_string())?;
    let halves: Vec<Vec<String>> = n_cfg.grid.chunks(7).map(|c| c.iter().map(|p| p.label.clone()).collect()).collect();
    let (t50, t80) = (rsnc_means(&n, &halves[0]), rsnc_means(&n, &halves[1]));
    for series in [&t50, &t80] {
        let inv = inversions(series);
        check(inv <= 1, "", format!("(c) n-sweep has {inv} inversions"))?;
    }
    for (i, (a, b)) in t50.iter().zip(&t80).enumerate() {
        check(b < a, "", format!("(c) Tmax=80 not lower at point {i}: {b:.4} vs {a:.4}"))?;
    }
    notes.push("(c) monotone in m and n, Tmax=80 lower everywhere".into());

    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(600), "trend sweeps")?;
    notes.push(format!("{elapsed:?}"));
    Ok(notes.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_rsnc"))
            .args(["sweep", "--experiment", "m-sweep", "--samples", "100", "--seed", &MASTER_SEED.to_string(), "-o"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        check(status.success(), "", "sweep failed")?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1],
        format!("two m-sweep runs, {} identical bytes", outputs[0].len()),
        "CSV outputs differ",
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 motivating example", motivating_example),
        ("2 clique transmissions are valid", clique_validity),
        ("3 oracle dominance", oracle_dominance),
        ("4 graph update equals rebuild", rebuild_consistency),
        ("5 clique solver correctness", clique_correctness),
        ("6 trend reproduction", trends),
        ("7 sweep determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 7 acceptance criteria passed");
}
