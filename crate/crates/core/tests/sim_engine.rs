use std::io::Cursor;

use linksched::sim::{
    is_half_duplex_clean, run_slots, verify_physics, Action, Agent, NodeRng, SimConfig, SimNode, SimTrace,
};
use linksched::{Duplex, Error, Node, SinrParams};
use proptest::prelude::*;
use rand::Rng;

/// Flips a coin each slot: transmit or sense, for a fixed number of slots.
#[derive(Clone, Debug)]
struct Coin {
    power: f64,
    slots: u64,
    full: bool,
    heard: Vec<Option<f64>>,
}

impl Agent for Coin {
    fn act(&mut self, _slot: u64, rng: &mut NodeRng) -> Action {
        match (rng.random_bool(0.5), self.full) {
            (true, true) => Action::TransmitAndSense { power: self.power },
            (true, false) => Action::Transmit { power: self.power },
            (false, _) => Action::Sense,
        }
    }

    fn observe(&mut self, _slot: u64, sensed: Option<f64>) {
        self.heard.push(sensed);
    }

    fn is_terminal(&self) -> bool {
        self.heard.len() as u64 >= self.slots
    }
}

fn network(positions: &[(f64, f64)], power: f64, slots: u64, full: bool) -> Vec<SimNode<Coin>> {
    positions
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| SimNode {
            node: Node::new(i as u32, x, y),
            agent: Coin {
                power,
                slots,
                full,
                heard: Vec::new(),
            },
        })
        .collect()
}

fn config(duplex: Duplex, seed: u64, power: f64) -> SimConfig {
    SimConfig {
        duplex,
        seed,
        context_tag: 0,
        max_slots: 1000,
        power_levels: vec![power],
        capture_trace: true,
    }
}

fn run(positions: &[(f64, f64)], duplex: Duplex, seed: u64) -> (Vec<SimNode<Coin>>, SimTrace) {
    let params = SinrParams::default_for(1.0);
    let mut nodes = network(positions, params.power, 20, duplex == Duplex::Full);
    let out = run_slots(&mut nodes, &config(duplex, seed, params.power), &params).unwrap();
    assert_eq!(out.slots_run, 20);
    assert!(!out.timed_out);
    (nodes, out.trace.unwrap())
}

fn positions() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // distinct grid cells, so no two radios share a position
    prop::collection::btree_set((0u8..20, 0u8..20), 1..12)
        .prop_map(|cells| cells.into_iter().map(|(x, y)| (x as f64 * 1.5, y as f64 * 1.5)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sensed_values_match_physics(pos in positions(), seed in any::<u64>(), full in any::<bool>()) {
        let duplex = if full { Duplex::Full } else { Duplex::Half };
        let (nodes, trace) = run(&pos, duplex, seed);
        let radios: Vec<Node> = nodes.iter().map(|n| n.node).collect();
        let mismatches = verify_physics(&trace, &radios, &SinrParams::default_for(1.0)).unwrap();
        prop_assert!(mismatches.is_empty(), "{:?}", mismatches);
        if !full {
            prop_assert!(is_half_duplex_clean(&trace));
        }
    }

    #[test]
    fn same_seed_same_trace(pos in positions(), seed in any::<u64>()) {
        let (_, a) = run(&pos, Duplex::Half, seed);
        let (_, b) = run(&pos, Duplex::Half, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ndjson_round_trips(pos in positions(), seed in any::<u64>()) {
        let (_, trace) = run(&pos, Duplex::Full, seed);
        let mut buf = Vec::new();
        trace.write_ndjson(&mut buf).unwrap();
        prop_assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 20);
        let back = SimTrace::read_ndjson(Cursor::new(&buf)).unwrap();
        prop_assert_eq!(back, trace);
    }
}

#[test]
fn seeds_change_the_coin_flips() {
    let pos: Vec<(f64, f64)> = (0..8).map(|i| (i as f64 * 3.0, 0.0)).collect();
    let (_, a) = run(&pos, Duplex::Half, 1);
    let (_, b) = run(&pos, Duplex::Half, 2);
    assert_ne!(a, b);
}

#[test]
fn half_duplex_rejects_transmit_and_sense() {
    let params = SinrParams::default_for(1.0);
    let mut nodes = network(&[(0.0, 0.0), (5.0, 0.0)], params.power, 40, true);
    let err = run_slots(&mut nodes, &config(Duplex::Half, 0, params.power), &params).unwrap_err();
    assert!(matches!(err, Error::ProtocolViolation { .. }), "{err}");
}

#[test]
fn unconfigured_power_is_rejected() {
    let params = SinrParams::default_for(1.0);
    let mut nodes = network(&[(0.0, 0.0)], params.power * 2.0, 40, false);
    let mut seen = false;
    for seed in 0..8 {
        if run_slots(&mut nodes, &config(Duplex::Half, seed, params.power), &params).is_err() {
            seen = true;
            break;
        }
    }
    assert!(seen);
}

#[test]
fn timeout_is_reported() {
    let params = SinrParams::default_for(1.0);
    let mut nodes = network(&[(0.0, 0.0), (1.0, 1.0)], params.power, u64::MAX, false);
    let cfg = SimConfig {
        max_slots: 7,
        ..config(Duplex::Half, 0, params.power)
    };
    let out = run_slots(&mut nodes, &cfg, &params).unwrap();
    assert!(out.timed_out);
    assert_eq!(out.slots_run, 7);
}

#[test]
fn sensed_power_excludes_own_transmission() {
    // a lone full-duplex node only ever hears the noise floor
    let params = SinrParams::default_for(1.0);
    let mut nodes = network(&[(0.0, 0.0)], params.power, 30, true);
    run_slots(&mut nodes, &config(Duplex::Full, 3, params.power), &params).unwrap();
    assert!(nodes[0].agent.heard.iter().all(|h| *h == Some(params.noise)));
}
