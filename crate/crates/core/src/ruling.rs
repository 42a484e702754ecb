//! Randomized distributed construction of an `(omega1, omega2)`-ruling by
//! carrier sensing alone.
//!
//! Every participant follows the same fixed schedule of phases and rounds.
//! In phase `k` an active node of `W1` volunteers with probability
//! `2^(k-2) / b_max`; volunteers that sense another volunteer within
//! `omega1` withdraw, the survivors transmit and join `R`, and every active
//! node that senses them above `Thres(omega1)` joins `Z`.
//!
//! With full duplex radios the withdrawal test is one transmit-and-sense
//! slot. With half duplex radios it becomes `C5 * ceil(log2 n)` slots in
//! which each volunteer transmits or senses on a fair coin; two volunteers
//! within `omega1` both survive only if they flip identically every time.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Node, NodeId};
use crate::sim::{run_slots, Action, Agent, Duplex, NodeRng, SimConfig, SimNode, SimTrace};
use crate::sinr::SinrParams;

pub const DEFAULT_C4: u32 = 8;
pub const DEFAULT_C5: u32 = 2;
pub const DEFAULT_ETA: f64 = 1.0;
/// Simulations stop after this many times the protocol's own slot budget.
pub const MAX_SLOTS_FACTOR: u64 = 64;

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Exponent applied to `36 (alpha-1)/(alpha-2)` in the `omega2 / omega1`
/// coverage requirement. The coverage argument appears with both forms; they
/// coincide at `alpha = 3`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageExponent {
    /// `alpha - 2`
    #[default]
    AlphaMinusTwo,
    /// `1 / (alpha - 2)`
    InverseAlphaMinusTwo,
}

impl CoverageExponent {
    pub fn value(self, alpha: f64) -> f64 {
        match self {
            Self::AlphaMinusTwo => alpha - 2.0,
            Self::InverseAlphaMinusTwo => 1.0 / (alpha - 2.0),
        }
    }
}

/// The `omega2 / omega1` ratio that guarantees every `Z` member is
/// `omega2`-covered by `R`, with the default exponent.
pub fn coverage_ratio(alpha: f64) -> f64 {
    coverage_ratio_with(alpha, CoverageExponent::default())
}

pub fn coverage_ratio_with(alpha: f64, exponent: CoverageExponent) -> f64 {
    (36.0 * (alpha - 1.0) / (alpha - 2.0)).powf(exponent.value(alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RulingConfig {
    pub omega1: f64,
    pub omega2: f64,
    /// Upper estimate of the number of `W1` nodes in any `omega1` ball.
    pub b_max: usize,
    pub c4: u32,
    pub c5: u32,
    /// Analysis-only neighbourhood factor; validated, never used by the protocol.
    pub eta: f64,
    /// Power of the ruling's own transmissions; thresholds are evaluated at it.
    pub scheduling_power: f64,
    /// Enforce the `omega2 >= coverage_ratio * omega1` requirement.
    pub theory_safe: bool,
}

impl RulingConfig {
    /// A theory-safe configuration at `omega1` with the default constants.
    pub fn theory_safe(omega1: f64, b_max: usize, params: &SinrParams) -> Self {
        Self {
            omega1,
            omega2: coverage_ratio(params.alpha) * omega1,
            b_max,
            c4: DEFAULT_C4,
            c5: DEFAULT_C5,
            eta: DEFAULT_ETA,
            scheduling_power: params.power,
            theory_safe: true,
        }
    }

    pub fn validate(&self, params: &SinrParams) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.omega1 > 0.0 && self.omega1.is_finite()) {
            return bad(format!("omega1 must be positive, got {}", self.omega1));
        }
        if !(self.omega2 > self.omega1) || !self.omega2.is_finite() {
            return bad(format!("omega2 ({}) must exceed omega1 ({})", self.omega2, self.omega1));
        }
        if self.theory_safe {
            let need = coverage_ratio(params.alpha) * self.omega1;
            // relative slack for values computed by the same formula
            if self.omega2 < need * (1.0 - 1e-12) {
                return bad(format!("theory-safe mode needs omega2 >= {need}, got {}", self.omega2));
            }
        }
        let eta_floor = (96.0 * (params.alpha - 1.0) / (params.alpha - 2.0)).powf(-1.0 / params.alpha);
        if !(self.eta > eta_floor) {
            return bad(format!("eta must exceed {eta_floor}, got {}", self.eta));
        }
        if self.b_max == 0 {
            return bad("b_max must be at least 1".into());
        }
        if self.c4 == 0 || self.c5 == 0 {
            return bad("C4 and C5 must be at least 1".into());
        }
        if !(self.scheduling_power > 0.0 && self.scheduling_power.is_finite()) {
            return bad(format!("scheduling power must be positive, got {}", self.scheduling_power));
        }
        Ok(())
    }

    /// Number of phases, `ceil(log2 b_max) + 2`.
    pub fn phases(&self) -> u64 {
        ceil_log2(self.b_max) as u64 + 2
    }

    fn join_probability(&self, phase: u64) -> f64 {
        (2f64.powi(phase as i32 - 2) / self.b_max as f64).clamp(0.0, 1.0)
    }
}

/// Rounds per phase and sensing slots per half duplex round both scale with
/// `ceil(log2 n)`, clamped to at least 1.
pub fn log_rounds(n: usize) -> u64 {
    (ceil_log2(n) as u64).max(1)
}

pub fn slots_per_round(n: usize, config: &RulingConfig, duplex: Duplex) -> u64 {
    match duplex {
        Duplex::Full => 2,
        Duplex::Half => 2 + config.c5 as u64 * log_rounds(n),
    }
}

/// Exact slot count of a complete run over `n` participants.
pub fn slot_budget(n: usize, config: &RulingConfig, duplex: Duplex) -> u64 {
    config.phases() * config.c4 as u64 * log_rounds(n) * slots_per_round(n, config, duplex)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Joined {
    R,
    Z,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JoinEvent {
    pub node: NodeId,
    pub slot: u64,
    pub set: Joined,
    /// Power sensed in the deciding slot (absent for `R`).
    pub sensed: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RulingResult {
    pub r_hat: Vec<NodeId>,
    pub z_hat: Vec<NodeId>,
    pub slots_used: u64,
    pub budget: u64,
    /// Some `W1` node was still active when the schedule ended.
    pub timed_out: bool,
    pub joins: Vec<JoinEvent>,
    /// The threshold `Thres(omega1)` at the scheduling power.
    pub threshold: f64,
    pub trace: Option<SimTrace>,
}

impl RulingResult {
    /// Nodes of `ground` that had not joined either set by the start of `slot`.
    pub fn active_at(&self, ground: &[Node], slot: u64) -> Vec<Node> {
        ground
            .iter()
            .filter(|n| !self.joins.iter().any(|j| j.node == n.id && j.slot < slot))
            .copied()
            .collect()
    }
}

/// Options that do not affect the protocol itself.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub duplex: Duplex,
    pub seed: u64,
    /// Separates the random streams of several runs under one seed.
    pub tag: u64,
    pub capture_trace: bool,
}

impl RunOptions {
    pub fn new(duplex: Duplex, seed: u64) -> Self {
        Self {
            duplex,
            seed,
            tag: 0,
            capture_trace: false,
        }
    }
}

#[derive(Clone, Debug)]
struct Schedule {
    duplex: Duplex,
    rounds: u64,
    round_len: u64,
    budget: u64,
    threshold: f64,
    power: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RulingAgent {
    id: NodeId,
    in_w1: bool,
    sched: Schedule,
    probs: Vec<f64>,
    volunteer: bool,
    joined: Option<Joined>,
    join: Option<JoinEvent>,
    next_slot: u64,
}

enum Step {
    Framing,
    Withdraw,
    Decide,
}

impl RulingAgent {
    fn locate(&self, slot: u64) -> (u64, Step) {
        let phase = slot / (self.sched.rounds * self.sched.round_len);
        let offset = slot % self.sched.round_len;
        let step = match self.sched.duplex {
            Duplex::Full if offset == 0 => Step::Withdraw,
            Duplex::Half if offset == 0 => Step::Framing,
            _ if offset == self.sched.round_len - 1 => Step::Decide,
            _ => Step::Withdraw,
        };
        (phase, step)
    }
}

impl Agent for RulingAgent {
    fn act(&mut self, slot: u64, rng: &mut NodeRng) -> Action {
        let (phase, step) = self.locate(slot);
        let p = self.sched.power;
        let starts_round = match self.sched.duplex {
            Duplex::Full => matches!(step, Step::Withdraw),
            Duplex::Half => matches!(step, Step::Framing),
        };
        if starts_round {
            self.volunteer = self.in_w1 && rng.random_bool(self.probs[phase as usize]);
        }
        match step {
            Step::Framing => Action::Idle,
            Step::Withdraw if !self.volunteer => Action::Idle,
            Step::Withdraw => match self.sched.duplex {
                Duplex::Full => Action::TransmitAndSense { power: p },
                Duplex::Half if rng.random_bool(0.5) => Action::Transmit { power: p },
                Duplex::Half => Action::Sense,
            },
            Step::Decide if self.volunteer => Action::Transmit { power: p },
            Step::Decide => Action::Sense,
        }
    }

    fn observe(&mut self, slot: u64, sensed: Option<f64>) {
        self.next_slot = slot + 1;
        let (_, step) = self.locate(slot);
        match step {
            Step::Framing => {}
            Step::Withdraw => {
                if sensed.is_some_and(|i| i > self.sched.threshold) {
                    self.volunteer = false;
                }
            }
            Step::Decide => {
                if self.volunteer {
                    self.joined = Some(Joined::R);
                } else if sensed.is_some_and(|i| i > self.sched.threshold) {
                    self.joined = Some(Joined::Z);
                }
                if let Some(set) = self.joined {
                    self.join = Some(JoinEvent {
                        node: self.id,
                        slot,
                        set,
                        sensed: if set == Joined::Z { sensed } else { None },
                    });
                }
            }
        }
    }

    fn is_terminal(&self) -> bool {
        self.joined.is_some() || self.next_slot >= self.sched.budget
    }
}

fn check_inputs(w1: &[Node], w2: &[Node]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in w1.iter().chain(w2) {
        if !seen.insert(n.id) {
            return Err(Error::InvalidInstance(format!(
                "{} appears more than once among the ruling participants",
                n.id
            )));
        }
    }
    Ok(())
}

/// Runs the ruling protocol with `W1 = w1` and `W2 = w2` and a trace.
pub fn construct_ruling(
    w1: &[Node],
    w2: &[Node],
    config: &RulingConfig,
    params: &SinrParams,
    duplex: Duplex,
    seed: u64,
) -> Result<RulingResult> {
    let opts = RunOptions {
        capture_trace: true,
        ..RunOptions::new(duplex, seed)
    };
    construct_ruling_with(w1, w2, config, params, &opts)
}

pub fn construct_ruling_with(
    w1: &[Node],
    w2: &[Node],
    config: &RulingConfig,
    params: &SinrParams,
    opts: &RunOptions,
) -> Result<RulingResult> {
    config.validate(params)?;
    check_inputs(w1, w2)?;
    let n = w1.len() + w2.len();
    let budget = slot_budget(n, config, opts.duplex);
    let threshold = params.thres_at(config.scheduling_power, config.omega1)?;
    let sched = Schedule {
        duplex: opts.duplex,
        rounds: config.c4 as u64 * log_rounds(n),
        round_len: slots_per_round(n, config, opts.duplex),
        budget,
        threshold,
        power: config.scheduling_power,
    };
    let probs: Vec<f64> = (0..config.phases()).map(|k| config.join_probability(k)).collect();
    let mut nodes: Vec<SimNode<RulingAgent>> = w1
        .iter()
        .map(|n| (n, true))
        .chain(w2.iter().map(|n| (n, false)))
        .map(|(n, in_w1)| SimNode {
            node: *n,
            agent: RulingAgent {
                id: n.id,
                in_w1,
                sched: sched.clone(),
                probs: probs.clone(),
                volunteer: false,
                joined: None,
                join: None,
                next_slot: 0,
            },
        })
        .collect();
    let sim = SimConfig {
        duplex: opts.duplex,
        seed: opts.seed,
        context_tag: opts.tag,
        max_slots: MAX_SLOTS_FACTOR * budget.max(1),
        power_levels: vec![config.scheduling_power],
        capture_trace: opts.capture_trace,
    };
    let outcome = run_slots(&mut nodes, &sim, params)?;
    let mut joins: Vec<JoinEvent> = nodes.iter().filter_map(|n| n.agent.join).collect();
    joins.sort_by_key(|j| (j.slot, j.node));
    let pick = |set: Joined| {
        let mut v: Vec<NodeId> = joins.iter().filter(|j| j.set == set).map(|j| j.node).collect();
        v.sort_unstable();
        v
    };
    let timed_out = outcome.timed_out || nodes.iter().any(|n| n.agent.in_w1 && n.agent.joined.is_none());
    Ok(RulingResult {
        r_hat: pick(Joined::R),
        z_hat: pick(Joined::Z),
        slots_used: outcome.slots_run,
        budget,
        timed_out,
        joins,
        threshold,
        trace: outcome.trace,
    })
}

/// Exact checks of a ruling run against the protocol's guarantees.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RulingAudit {
    /// `R` nodes outside `W1`.
    pub r_outside_w1: Vec<NodeId>,
    /// Nodes in both `R` and `Z`.
    pub r_and_z: Vec<NodeId>,
    /// Pairs of `R` nodes closer than `omega1`.
    pub close_pairs: Vec<(NodeId, NodeId)>,
    /// `W1` nodes in neither set.
    pub w1_unresolved: Vec<NodeId>,
    /// `Z` members that joined without sensing above the threshold.
    pub z_without_signal: Vec<NodeId>,
    /// `W2` nodes within `omega1` of `R` but not in `Z`.
    pub w2_missed: Vec<NodeId>,
    /// `Z` members of `W2` farther than `omega2` from every `R` node.
    pub w2_uncovered: Vec<NodeId>,
}

impl RulingAudit {
    /// All nodes of `R` are at least `omega1` apart.
    pub fn all_good(&self) -> bool {
        self.close_pairs.is_empty()
    }

    /// Everything the protocol promises with certainty.
    pub fn exact_ok(&self) -> bool {
        self.r_outside_w1.is_empty() && self.r_and_z.is_empty() && self.z_without_signal.is_empty()
    }

    /// The full ruling statement: exact properties, separation, completion
    /// and both `W2` inclusions.
    pub fn passed(&self) -> bool {
        self.exact_ok()
            && self.all_good()
            && self.w1_unresolved.is_empty()
            && self.w2_missed.is_empty()
            && self.w2_uncovered.is_empty()
    }
}

pub fn audit_ruling(result: &RulingResult, w1: &[Node], w2: &[Node], omega1: f64, omega2: f64) -> RulingAudit {
    let w1_ids: BTreeSet<NodeId> = w1.iter().map(|n| n.id).collect();
    let r: BTreeSet<NodeId> = result.r_hat.iter().copied().collect();
    let z: BTreeSet<NodeId> = result.z_hat.iter().copied().collect();
    let r_nodes: Vec<Node> = w1.iter().chain(w2).filter(|n| r.contains(&n.id)).copied().collect();
    let near = |v: &Node, radius: f64| r_nodes.iter().any(|u| u.id != v.id && u.pos().distance(v.pos()) <= radius);

    let mut audit = RulingAudit {
        r_outside_w1: r.difference(&w1_ids).copied().collect(),
        r_and_z: r.intersection(&z).copied().collect(),
        ..Default::default()
    };
    for (i, a) in r_nodes.iter().enumerate() {
        for b in &r_nodes[i + 1..] {
            if a.pos().distance(b.pos()) < omega1 {
                audit.close_pairs.push((a.id, b.id));
            }
        }
    }
    audit.w1_unresolved = w1
        .iter()
        .filter(|n| !r.contains(&n.id) && !z.contains(&n.id))
        .map(|n| n.id)
        .collect();
    audit.z_without_signal = result
        .joins
        .iter()
        .filter(|j| j.set == Joined::Z && !j.sensed.is_some_and(|s| s > result.threshold))
        .map(|j| j.node)
        .collect();
    for v in w2 {
        if z.contains(&v.id) {
            if !near(v, omega2) {
                audit.w2_uncovered.push(v.id);
            }
        } else if !r.contains(&v.id) && near(v, omega1) {
            audit.w2_missed.push(v.id);
        }
    }
    audit
}
