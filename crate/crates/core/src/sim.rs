//! Slot-synchronous simulator of radios that can only transmit, sense the
//! total received power, or stay idle.
//!
//! There are no message payloads: the only information an agent ever
//! receives is the analog power sum delivered to [`Agent::observe`].

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Node, NodeId};
use crate::sinr::{sensed_power, SinrParams};

/// Per-node random stream.
pub type NodeRng = ChaCha8Rng;

/// Deterministic stream keyed by `(master_seed, node_id, context_tag)`.
pub fn derive_node_rng(master_seed: u64, node_id: u64, context_tag: u64) -> NodeRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&node_id.to_le_bytes());
    key[16..24].copy_from_slice(&context_tag.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    Half,
    #[default]
    Full,
}

impl std::str::FromStr for Duplex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Self::Half),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidParams(format!("unknown duplex mode {other:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Action {
    Idle,
    Sense,
    Transmit { power: f64 },
    /// Full duplex only.
    TransmitAndSense { power: f64 },
}

impl Action {
    pub fn power(&self) -> Option<f64> {
        match *self {
            Action::Transmit { power } | Action::TransmitAndSense { power } => Some(power),
            _ => None,
        }
    }

    pub fn senses(&self) -> bool {
        matches!(self, Action::Sense | Action::TransmitAndSense { .. })
    }

    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Idle => ActionKind::Idle,
            Action::Sense => ActionKind::Sense,
            Action::Transmit { .. } => ActionKind::Transmit,
            Action::TransmitAndSense { .. } => ActionKind::TransmitAndSense,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Idle,
    Sense,
    Transmit,
    TransmitAndSense,
}

/// A per-node protocol state machine.
pub trait Agent {
    fn act(&mut self, slot: u64, rng: &mut NodeRng) -> Action;
    /// Called after every slot; `sensed` is present exactly when the agent
    /// sensed in that slot.
    fn observe(&mut self, slot: u64, sensed: Option<f64>);
    fn is_terminal(&self) -> bool;
}

/// An agent bound to a radio position.
#[derive(Clone, Debug)]
pub struct SimNode<A> {
    pub node: Node,
    pub agent: A,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub duplex: Duplex,
    pub seed: u64,
    /// Separates the random streams of distinct runs under one seed.
    pub context_tag: u64,
    pub max_slots: u64,
    pub power_levels: Vec<f64>,
    pub capture_trace: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_slots == 0 {
            return Err(Error::InvalidParams("max_slots must be positive".into()));
        }
        if self.power_levels.is_empty() {
            return Err(Error::InvalidParams("at least one power level is required".into()));
        }
        if let Some(p) = self.power_levels.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidParams(format!("power level {p} is not positive")));
        }
        Ok(())
    }
}

/// One slot: every non-idle action, and the sensed power of every sensing
/// node. Idle nodes are omitted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    pub actions: BTreeMap<NodeId, Action>,
    pub sensed: BTreeMap<NodeId, f64>,
}

impl SlotRecord {
    /// Transmitting nodes with their powers, in node-id order.
    pub fn transmitters(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.actions.iter().filter_map(|(&n, a)| a.power().map(|p| (n, p)))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub slots: Vec<SlotRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutcome {
    pub slots_run: u64,
    /// `max_slots` was reached with some agent still non-terminal.
    pub timed_out: bool,
    pub trace: Option<SimTrace>,
}

/// Runs `nodes` slot by slot until all agents are terminal or
/// `config.max_slots` slots have elapsed.
pub fn run_slots<A: Agent>(nodes: &mut [SimNode<A>], config: &SimConfig, params: &SinrParams) -> Result<SimOutcome> {
    config.validate()?;
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&i| nodes[i].node.id);
    if let Some(w) = order.windows(2).find(|w| nodes[w[0]].node.id == nodes[w[1]].node.id) {
        return Err(Error::InvalidInstance(format!(
            "{} appears twice in one simulation",
            nodes[w[0]].node.id
        )));
    }
    let mut rngs: Vec<NodeRng> = nodes
        .iter()
        .map(|n| derive_node_rng(config.seed, n.node.id.0 as u64, config.context_tag))
        .collect();
    let mut trace = config.capture_trace.then(SimTrace::default);
    let mut actions = vec![Action::Idle; nodes.len()];
    let mut slot = 0u64;
    loop {
        if nodes.iter().all(|n| n.agent.is_terminal()) {
            break;
        }
        if slot >= config.max_slots {
            return Ok(SimOutcome {
                slots_run: slot,
                timed_out: true,
                trace,
            });
        }
        for &i in &order {
            let n = &mut nodes[i];
            let a = if n.agent.is_terminal() {
                Action::Idle
            } else {
                n.agent.act(slot, &mut rngs[i])
            };
            if let Some(p) = a.power() {
                if !config.power_levels.contains(&p) {
                    return Err(Error::ProtocolViolation {
                        slot,
                        node: n.node.id,
                        reason: format!("power {p} is not a configured level"),
                    });
                }
            }
            if config.duplex == Duplex::Half && matches!(a, Action::TransmitAndSense { .. }) {
                return Err(Error::ProtocolViolation {
                    slot,
                    node: n.node.id,
                    reason: "transmit-and-sense in half duplex mode".into(),
                });
            }
            actions[i] = a;
        }
        let transmitters: Vec<(NodeId, crate::geometry::Point, f64)> = order
            .iter()
            .filter_map(|&i| actions[i].power().map(|p| (nodes[i].node.id, nodes[i].node.pos(), p)))
            .collect();
        let mut record = SlotRecord {
            slot,
            ..SlotRecord::default()
        };
        for &i in &order {
            let id = nodes[i].node.id;
            let sensed = if actions[i].senses() {
                let at = nodes[i].node.pos();
                let v = sensed_power(
                    transmitters.iter().filter(|t| t.0 != id).map(|t| (t.1, t.2)),
                    at,
                    params,
                )?;
                Some(v)
            } else {
                None
            };
            if trace.is_some() {
                if actions[i] != Action::Idle {
                    record.actions.insert(id, actions[i]);
                }
                if let Some(v) = sensed {
                    record.sensed.insert(id, v);
                }
            }
            if actions[i] != Action::Idle || !nodes[i].agent.is_terminal() {
                nodes[i].agent.observe(slot, sensed);
            }
        }
        if let Some(t) = trace.as_mut() {
            t.slots.push(record);
        }
        slot += 1;
    }
    Ok(SimOutcome {
        slots_run: slot,
        timed_out: false,
        trace,
    })
}

/// Offline check that every sensed value in `trace` equals the sensed power
/// recomputed from that slot's transmitters. Returns the offending
/// `(slot, node)` pairs.
pub fn verify_physics(trace: &SimTrace, nodes: &[Node], params: &SinrParams) -> Result<Vec<(u64, NodeId)>> {
    let pos: BTreeMap<NodeId, crate::geometry::Point> = nodes.iter().map(|n| (n.id, n.pos())).collect();
    let lookup = |id: NodeId| pos.get(&id).copied().ok_or(Error::UnknownNode(id));
    let mut bad = Vec::new();
    for rec in &trace.slots {
        for (&id, &got) in &rec.sensed {
            let mut tx = Vec::new();
            for (n, p) in rec.transmitters().filter(|t| t.0 != id) {
                tx.push((lookup(n)?, p));
            }
            let want = sensed_power(tx, lookup(id)?, params)?;
            if want != got {
                bad.push((rec.slot, id));
            }
        }
    }
    Ok(bad)
}

/// True when no node both transmitted and sensed in any slot.
pub fn is_half_duplex_clean(trace: &SimTrace) -> bool {
    trace
        .slots
        .iter()
        .all(|r| r.actions.values().all(|a| !matches!(a, Action::TransmitAndSense { .. })))
}

/// One trace line per slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub slot: u64,
    pub events: Vec<TraceEvent>,
}

/// Field order is fixed: `node`, `action`, `power`, `sensed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub node: NodeId,
    pub action: ActionKind,
    pub power: Option<f64>,
    pub sensed: Option<f64>,
}

impl SimTrace {
    /// Writes one JSON object per line; slots without events are written
    /// with an empty event list so slot numbering is preserved.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> Result<()> {
        for rec in &self.slots {
            let events = rec
                .actions
                .iter()
                .map(|(&node, a)| TraceEvent {
                    node,
                    action: a.kind(),
                    power: a.power(),
                    sensed: rec.sensed.get(&node).copied(),
                })
                .collect();
            serde_json::to_writer(&mut out, &TraceLine { slot: rec.slot, events })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(input: R) -> Result<Self> {
        let mut slots = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let tl: TraceLine = serde_json::from_str(&line)?;
            let mut rec = SlotRecord {
                slot: tl.slot,
                ..SlotRecord::default()
            };
            for e in tl.events {
                let action = match (e.action, e.power) {
                    (ActionKind::Idle, _) => Action::Idle,
                    (ActionKind::Sense, _) => Action::Sense,
                    (ActionKind::Transmit, Some(power)) => Action::Transmit { power },
                    (ActionKind::TransmitAndSense, Some(power)) => Action::TransmitAndSense { power },
                    (kind, None) => {
                        return Err(Error::InvalidInstance(format!(
                            "trace slot {}: {kind:?} event for {} lacks a power",
                            tl.slot, e.node
                        )))
                    }
                };
                rec.actions.insert(e.node, action);
                if let Some(s) = e.sensed {
                    rec.sensed.insert(e.node, s);
                }
            }
            slots.push(rec);
        }
        Ok(Self { slots })
    }
}
