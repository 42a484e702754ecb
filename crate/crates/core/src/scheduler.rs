//! One-shot maximum link scheduling, one phase per length class, run as a
//! distributed protocol on the simulator.
//!
//! Phase `i` handles the still-alive links of class `i` (`J_i`) and of all
//! longer classes (`J_>`):
//!
//! 1. every sender measures the power of the links already selected and
//!    keeps its link only if the reverse affectance stays below `psi'`;
//! 2. the surviving class-`i` senders build an `(omega1, omega2)`-ruling,
//!    `omega_k = gamma_k d_i`, which also knocks out nearby longer links;
//! 3. ruling members are selected; every other class-`i` link and every
//!    discarded longer link leaves for good.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{verify_ruling, LinkClasses, LinkId, Node, NodeId};
use crate::instance::Instance;
use crate::oracle::{affectance_constant, smallest_bin_capacity, spatial_constant, OptResult};
use crate::ruling::{
    construct_ruling_with, coverage_ratio, RulingConfig, RunOptions, DEFAULT_C4, DEFAULT_C5, DEFAULT_ETA,
    MAX_SLOTS_FACTOR,
};
use crate::sim::{run_slots, Action, Agent, Duplex, NodeRng, SimConfig, SimNode, SimTrace};
use crate::sinr::{affectance_set, SinrParams};

pub const DEFAULT_PSI: f64 = 0.5;

/// `(36 beta / (1 - psi) * (alpha-1)/(alpha-2) * (1+phi)/phi)^(1/alpha) + 2`,
/// the separation factor that makes every selection independent.
pub fn gamma1_theory(psi: f64, params: &SinrParams) -> f64 {
    let a = params.alpha;
    let inner = 36.0 * params.beta / (1.0 - psi) * (a - 1.0) / (a - 2.0) * (1.0 + params.phi) / params.phi;
    inner.powf(1.0 / a) + 2.0
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Constants for which every guarantee is proved.
    #[default]
    TheorySafe,
    /// Small separation factors for demonstrations; guarantees are checked,
    /// not implied.
    Practical,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory-safe" => Ok(Self::TheorySafe),
            "practical" => Ok(Self::Practical),
            other => Err(Error::InvalidParams(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub psi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c4: u32,
    pub c5: u32,
    pub eta: f64,
    pub theory_safe: bool,
    pub duplex: Duplex,
    pub seed: u64,
    /// Keep every simulator trace in the result.
    pub capture_traces: bool,
}

impl SchedulerConfig {
    pub fn preset(preset: Preset, params: &SinrParams, duplex: Duplex, seed: u64) -> Self {
        let (gamma1, gamma2, theory_safe) = match preset {
            Preset::TheorySafe => {
                let g1 = gamma1_theory(DEFAULT_PSI, params);
                (g1, coverage_ratio(params.alpha) * g1, true)
            }
            Preset::Practical => (3.0, 6.0, false),
        };
        Self {
            psi: DEFAULT_PSI,
            gamma1,
            gamma2,
            c4: DEFAULT_C4,
            c5: DEFAULT_C5,
            eta: DEFAULT_ETA,
            theory_safe,
            duplex,
            seed,
            capture_traces: false,
        }
    }

    pub fn validate(&self, params: &SinrParams) -> Result<()> {
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::InvalidParams(format!("psi must lie in (0, 1), got {}", self.psi)));
        }
        if !(self.gamma1 > 1.0 && self.gamma2 > self.gamma1 && self.gamma2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need gamma2 > gamma1 > 1, got gamma1 = {}, gamma2 = {}",
                self.gamma1, self.gamma2
            )));
        }
        if self.theory_safe {
            let g1 = gamma1_theory(self.psi, params);
            if self.gamma1 < g1 * (1.0 - 1e-12) {
                return Err(Error::InvalidParams(format!(
                    "theory-safe mode needs gamma1 >= {g1}, got {}",
                    self.gamma1
                )));
            }
        }
        Ok(())
    }

    pub fn psi_prime(&self, params: &SinrParams) -> f64 {
        params.reverse_affectance_threshold(self.psi)
    }

    /// Ruling parameters for a phase with class bound `d_i`, cover radius
    /// `gamma_cover * d_i` and density estimate `b_max`.
    pub fn ruling_config(&self, d_i: f64, gamma_cover: f64, b_max: usize, power: f64) -> RulingConfig {
        RulingConfig {
            omega1: self.gamma1 * d_i,
            omega2: gamma_cover * d_i,
            b_max,
            c4: self.c4,
            c5: self.c5,
            eta: self.eta,
            scheduling_power: power,
            theory_safe: self.theory_safe,
        }
    }
}

/// The four-way split produced by the affectance check, as link ids.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AffectancePartition {
    pub y_a: Vec<LinkId>,
    pub y_b: Vec<LinkId>,
    pub y_a_bar: Vec<LinkId>,
    pub y_b_bar: Vec<LinkId>,
}

fn check_disjoint(sets: &[&[LinkId]]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in sets {
        for &l in *s {
            if !seen.insert(l) {
                return Err(Error::Precondition(format!("{l} appears in more than one input set")));
            }
        }
    }
    Ok(())
}

/// The affectance split evaluated directly: `l` passes iff
/// `A(S, reverse(l)) <= psi'`.
pub fn affectance_partition_offline(
    instance: &Instance,
    y: &[LinkId],
    y_prime: &[LinkId],
    s: &[LinkId],
    psi_prime: f64,
) -> Result<AffectancePartition> {
    check_disjoint(&[y, y_prime, s])?;
    let chosen = instance.placed_set(s);
    let p = &instance.params;
    let passes = |l: LinkId| -> Result<bool> {
        Ok(affectance_set(&chosen, &instance.placed(l).reversed(), p)? <= psi_prime)
    };
    let mut out = AffectancePartition::default();
    for &l in y {
        if passes(l)? { out.y_a.push(l) } else { out.y_a_bar.push(l) }
    }
    for &l in y_prime {
        if passes(l)? { out.y_b.push(l) } else { out.y_b_bar.push(l) }
    }
    Ok(out)
}

/// Sensing distance whose threshold encodes the affectance test for a link
/// of length `d`: `(beta (1 - d^alpha beta N / P) / psi')^(1/alpha) * d`.
pub fn affectance_sensing_distance(d: f64, psi_prime: f64, params: &SinrParams) -> f64 {
    (params.beta * params.feasibility_margin(d) / psi_prime).powf(1.0 / params.alpha) * d
}

/// A node that performs one fixed action in slot 0.
struct OneShot {
    action: Action,
    sensed: Option<f64>,
    done: bool,
}

impl Agent for OneShot {
    fn act(&mut self, _: u64, _: &mut NodeRng) -> Action {
        self.action
    }
    fn observe(&mut self, _: u64, sensed: Option<f64>) {
        self.sensed = sensed;
        self.done = true;
    }
    fn is_terminal(&self) -> bool {
        self.done
    }
}

/// One-slot distributed affectance check: senders of `s` transmit at the
/// data power, senders of `y` and `y_prime` sense and compare against
/// `Thres` at [`affectance_sensing_distance`].
pub fn check_affectance(
    instance: &Instance,
    y: &[LinkId],
    y_prime: &[LinkId],
    s: &[LinkId],
    psi_prime: f64,
    sim: &SimConfig,
) -> Result<(AffectancePartition, Option<SimTrace>)> {
    check_disjoint(&[y, y_prime, s])?;
    let p = &instance.params;
    let mut nodes: Vec<SimNode<OneShot>> = Vec::with_capacity(y.len() + y_prime.len() + s.len());
    let mut push = |l: LinkId, action: Action| {
        nodes.push(SimNode {
            node: *instance.node(instance.sender(l)),
            agent: OneShot {
                action,
                sensed: None,
                done: false,
            },
        })
    };
    for &l in s {
        push(l, Action::Transmit { power: p.power });
    }
    for &l in y.iter().chain(y_prime) {
        push(l, Action::Sense);
    }
    let outcome = run_slots(&mut nodes, sim, p)?;
    let mut out = AffectancePartition::default();
    for (k, &l) in y.iter().chain(y_prime).enumerate() {
        let sensed = nodes[s.len() + k]
            .agent
            .sensed
            .ok_or_else(|| Error::Precondition(format!("sender of {l} did not sense")))?;
        let limit = p.thres(affectance_sensing_distance(instance.length(l), psi_prime, p))?;
        let pass = sensed <= limit;
        match (k < y.len(), pass) {
            (true, true) => out.y_a.push(l),
            (true, false) => out.y_a_bar.push(l),
            (false, true) => out.y_b.push(l),
            (false, false) => out.y_b_bar.push(l),
        }
    }
    Ok((out, outcome.trace))
}

/// Everything decided in one phase, by link id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub class: usize,
    pub d_i: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Alive class-`i` links at the start of the phase.
    pub j_i: Vec<LinkId>,
    /// Alive longer links at the start of the phase.
    pub j_longer: Vec<LinkId>,
    pub j_a: Vec<LinkId>,
    pub j_b: Vec<LinkId>,
    pub j_a_bar: Vec<LinkId>,
    pub j_b_bar: Vec<LinkId>,
    pub j_r: Vec<LinkId>,
    pub j_z: Vec<LinkId>,
    /// Links of `j_a` the ruling left undecided (only after a timeout).
    pub unresolved: Vec<LinkId>,
    /// Dominating set used by the adaptive variant, as link ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominating: Option<Vec<LinkId>>,
    /// Schedule length of the phase: one affectance slot plus the ruling's
    /// full slot budget (and any pre/post-processing charge).
    pub slots: u64,
    /// Slots the ruling simulation actually ran before every node was done.
    pub active_slots: u64,
    pub ruling_ran: bool,
    pub timed_out: bool,
    #[serde(skip)]
    pub traces: Vec<SimTrace>,
}

/// Exact checks on one phase record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseAudit {
    pub bookkeeping: bool,
    pub ruling: bool,
    pub z_on_candidates: bool,
    pub z_longer_lower: bool,
    pub z_longer_upper: bool,
}

impl PhaseAudit {
    pub fn passed(&self) -> bool {
        self.bookkeeping && self.ruling && self.z_on_candidates && self.z_longer_lower && self.z_longer_upper
    }
}

fn set(v: &[LinkId]) -> BTreeSet<LinkId> {
    v.iter().copied().collect()
}

impl PhaseRecord {
    /// Bookkeeping identities, the ruling property of `X(J_r)` over
    /// `X(J_a)`, and the inclusions of `J_z`.
    pub fn audit(&self, instance: &Instance) -> PhaseAudit {
        let (ji, jl, ja, jb, jab, jbb, jr, jz) = (
            set(&self.j_i),
            set(&self.j_longer),
            set(&self.j_a),
            set(&self.j_b),
            set(&self.j_a_bar),
            set(&self.j_b_bar),
            set(&self.j_r),
            set(&self.j_z),
        );
        let union = |a: &BTreeSet<LinkId>, b: &BTreeSet<LinkId>| a.union(b).copied().collect::<BTreeSet<_>>();
        let bookkeeping = union(&ja, &jab) == ji
            && ja.is_disjoint(&jab)
            && union(&jb, &jbb) == jl
            && jb.is_disjoint(&jbb)
            && jr.is_subset(&ja)
            && jr.is_disjoint(&jz);
        let x = |ids: &BTreeSet<LinkId>| -> Vec<Node> { ids.iter().map(|&l| *instance.node(instance.sender(l))).collect() };
        let r_nodes = x(&jr);
        let ruling = verify_ruling(&r_nodes, &x(&ja), self.omega1, self.omega2).passed();
        let ja_minus_jr: BTreeSet<LinkId> = ja.difference(&jr).copied().collect();
        let z_on_candidates = jz.intersection(&ja).copied().collect::<BTreeSet<_>>() == ja_minus_jr;
        let near = |l: LinkId, radius: f64| {
            let v = instance.pos(instance.sender(l));
            r_nodes.iter().any(|r| r.pos().distance(v) <= radius)
        };
        let z_longer_lower = jb.iter().filter(|&&l| near(l, self.omega1)).all(|l| jz.contains(l));
        let z_longer_upper = jz.intersection(&jb).all(|&l| near(l, self.omega2));
        PhaseAudit {
            bookkeeping,
            ruling,
            z_on_candidates,
            z_longer_lower,
            z_longer_upper,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub selected: Vec<LinkId>,
    pub phases: Vec<PhaseRecord>,
    pub total_slots: u64,
    pub timed_out: bool,
}

impl ScheduleResult {
    /// Every phase passes [`PhaseRecord::audit`].
    pub fn rulings_valid(&self, instance: &Instance) -> bool {
        self.phases.iter().all(|p| p.audit(instance).passed())
    }

    /// Every link leaves in exactly one way: selected, discarded by the
    /// affectance check, discarded by proximity, or left unresolved.
    pub fn exits_partition(&self, instance: &Instance) -> bool {
        let mut seen = BTreeSet::new();
        for p in &self.phases {
            let exits = p
                .j_r
                .iter()
                .chain(&p.j_a_bar)
                .chain(&p.j_b_bar)
                .chain(&p.j_z)
                .chain(&p.unresolved);
            for &l in exits {
                if !seen.insert(l) {
                    return false;
                }
            }
        }
        seen == set(&instance.link_ids())
    }
}

/// What the second step of a phase decided, by sender node.
pub(crate) struct Step2 {
    pub r: Vec<NodeId>,
    pub z: Vec<NodeId>,
    pub dominating: Option<Vec<NodeId>>,
    pub slots: u64,
    pub active_slots: u64,
    pub timed_out: bool,
    pub traces: Vec<SimTrace>,
}

/// Context handed to a second-step implementation.
pub(crate) struct PhaseCtx<'a> {
    pub class: usize,
    pub d_i: f64,
    pub m: usize,
    pub w1: &'a [Node],
    pub w2: &'a [Node],
}

pub(crate) fn tag(class: usize, part: u64) -> u64 {
    (class as u64) << 8 | part
}

/// The phase loop shared by both distributed variants. `omega2` is the
/// phase's cover factor; `step2` builds the ruling for one phase.
pub(crate) fn run_phases<F>(instance: &Instance, config: &SchedulerConfig, mut step2: F) -> Result<ScheduleResult>
where
    F: FnMut(&PhaseCtx<'_>) -> Result<Step2>,
{
    instance.validate()?;
    let params = &instance.params;
    config.validate(params)?;
    let classes: LinkClasses = instance.classes()?;
    let psi_prime = config.psi_prime(params);
    let by_sender: BTreeMap<NodeId, LinkId> = instance.links.iter().map(|l| (l.sender, l.id)).collect();
    let links_of = |nodes: &[NodeId]| -> Vec<LinkId> {
        let mut v: Vec<LinkId> = nodes.iter().filter_map(|n| by_sender.get(n).copied()).collect();
        v.sort_unstable();
        v
    };
    let mut alive = vec![true; instance.m()];
    let mut selected: Vec<LinkId> = Vec::new();
    let mut result = ScheduleResult::default();
    let g = classes.diversity();
    for i in 1..=g {
        let d_i = classes.upper_bound(i);
        let j_i: Vec<LinkId> = classes.class(i).iter().copied().filter(|l| alive[l.index()]).collect();
        let j_longer: Vec<LinkId> = (i + 1..=g)
            .flat_map(|j| classes.class(j).iter().copied())
            .filter(|l| alive[l.index()])
            .collect();
        let sim = SimConfig {
            duplex: config.duplex,
            seed: config.seed,
            context_tag: tag(i, 0),
            max_slots: MAX_SLOTS_FACTOR,
            power_levels: vec![params.power],
            capture_trace: config.capture_traces,
        };
        let (part, check_trace) = check_affectance(instance, &j_i, &j_longer, &selected, psi_prime, &sim)?;
        let mut rec = PhaseRecord {
            class: i,
            d_i,
            omega1: config.gamma1 * d_i,
            omega2: config.gamma2 * d_i,
            j_i: j_i.clone(),
            j_longer: j_longer.clone(),
            slots: 1,
            ..PhaseRecord::default()
        };
        rec.traces.extend(check_trace);
        if !(part.y_a.is_empty() && part.y_b.is_empty()) {
            let w1 = instance.senders(&part.y_a);
            let w2 = instance.senders(&part.y_b);
            let out = step2(&PhaseCtx {
                class: i,
                d_i,
                m: instance.m(),
                w1: &w1,
                w2: &w2,
            })?;
            rec.ruling_ran = true;
            rec.j_r = links_of(&out.r);
            rec.j_z = links_of(&out.z);
            rec.dominating = out.dominating.map(|d| links_of(&d));
            rec.slots += out.slots;
            rec.active_slots = out.active_slots;
            rec.timed_out = out.timed_out;
            rec.traces.extend(out.traces);
        }
        let decided: BTreeSet<LinkId> = rec.j_r.iter().chain(&rec.j_z).copied().collect();
        rec.unresolved = part.y_a.iter().copied().filter(|l| !decided.contains(l)).collect();
        rec.j_a = part.y_a;
        rec.j_b = part.y_b;
        rec.j_a_bar = part.y_a_bar;
        rec.j_b_bar = part.y_b_bar;
        for &l in rec.j_i.iter().chain(&rec.j_b_bar).chain(&rec.j_z) {
            alive[l.index()] = false;
        }
        selected.extend(&rec.j_r);
        selected.sort_unstable();
        result.total_slots += rec.slots;
        result.timed_out |= rec.timed_out;
        result.phases.push(rec);
    }
    result.selected = selected;
    Ok(result)
}

/// Distributed scheduling with one uniform power level: rulings run at the
/// data power with `b_max = m`.
pub fn max_link_schedule(instance: &Instance, config: &SchedulerConfig) -> Result<ScheduleResult> {
    let params = instance.params;
    if config.theory_safe && config.gamma2 < coverage_ratio(params.alpha) * config.gamma1 * (1.0 - 1e-12) {
        return Err(Error::InvalidParams(format!(
            "theory-safe mode needs gamma2 >= {}",
            coverage_ratio(params.alpha) * config.gamma1
        )));
    }
    run_phases(instance, config, |ctx| {
        let rc = config.ruling_config(ctx.d_i, config.gamma2, ctx.m, params.power);
        let opts = RunOptions {
            duplex: config.duplex,
            seed: config.seed,
            tag: tag(ctx.class, 1),
            capture_trace: config.capture_traces,
        };
        let r = construct_ruling_with(ctx.w1, ctx.w2, &rc, &params, &opts)?;
        Ok(Step2 {
            r: r.r_hat,
            z: r.z_hat,
            dominating: None,
            slots: r.budget,
            active_slots: r.slots_used,
            timed_out: r.timed_out,
            traces: r.trace.into_iter().collect(),
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCertificate {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Bin capacity `C2` was evaluated at.
    pub b: usize,
    pub opt: usize,
    pub selected: usize,
    /// `|OPT| / |S|`; absent when both are empty.
    pub ratio: Option<f64>,
    pub holds: bool,
}

/// `C3 = C1(gamma2) + C2(psi')`, compared with the observed `|OPT| / |S|`.
pub fn approx_ratio_certificate(
    result: &ScheduleResult,
    opt: &OptResult,
    config: &SchedulerConfig,
    params: &SinrParams,
) -> RatioCertificate {
    let c1 = spatial_constant(config.gamma2, params);
    let b = smallest_bin_capacity(params);
    let c2 = affectance_constant(config.psi_prime(params), b, params);
    let c3 = c1 + c2;
    let s = result.selected.len();
    let ratio = match (opt.size, s) {
        (0, 0) => None,
        (_, 0) => Some(f64::INFINITY),
        (o, s) => Some(o as f64 / s as f64),
    };
    RatioCertificate {
        c1,
        c2,
        c3,
        b,
        opt: opt.size,
        selected: s,
        ratio,
        holds: opt.size as f64 <= c3 * s as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::sinr::{affectance, is_independent};

    fn params() -> SinrParams {
        SinrParams::default_for(1.0)
    }

    fn seg(sx: f64, sy: f64, rx: f64, ry: f64) -> (Point, Point) {
        (Point::new(sx, sy), Point::new(rx, ry))
    }

    #[test]
    fn gamma1_default_value() {
        let g1 = gamma1_theory(0.5, &params());
        assert!((g1 - (576f64.cbrt() + 2.0)).abs() < 1e-12);
        assert!((g1 - 10.3203).abs() < 1e-4);
    }

    fn sim() -> SimConfig {
        SimConfig {
            duplex: Duplex::Half,
            seed: 0,
            context_tag: 0,
            max_slots: 4,
            power_levels: vec![params().power],
            capture_trace: false,
        }
    }

    #[test]
    fn affectance_check_examples() {
        let p = params();
        let psi_prime = p.reverse_affectance_threshold(0.5);
        // l has sender at the origin; chosen links place their senders at
        // 100 d(l) and 1.01 d(l) from it.
        for (dist, pass) in [(100.0, true), (1.01, false)] {
            let inst = Instance::from_segments(
                p,
                &[seg(0.0, 0.0, 0.5, 0.0), seg(0.0, dist * 0.5, 0.0, dist * 0.5 + 0.3)],
            )
            .unwrap();
            let a = affectance(&inst.placed(LinkId(1)), &inst.placed(LinkId(0)).reversed(), &p).unwrap();
            assert_eq!(a <= psi_prime, pass);
            let (part, _) = check_affectance(&inst, &[LinkId(0)], &[], &[LinkId(1)], psi_prime, &sim()).unwrap();
            assert_eq!(part.y_a.len() == 1, pass);
            let off = affectance_partition_offline(&inst, &[LinkId(0)], &[], &[LinkId(1)], psi_prime).unwrap();
            assert_eq!(part, off);
        }
        let inst = Instance::from_segments(p, &[seg(0.0, 0.0, 0.5, 0.0), seg(5.0, 0.0, 5.5, 0.0)]).unwrap();
        let (part, _) = check_affectance(&inst, &[LinkId(0)], &[LinkId(1)], &[], psi_prime, &sim()).unwrap();
        assert_eq!(part.y_a, vec![LinkId(0)]);
        assert_eq!(part.y_b, vec![LinkId(1)]);
        assert!(check_affectance(&inst, &[LinkId(0)], &[LinkId(0)], &[], psi_prime, &sim()).is_err());
    }

    #[test]
    fn single_link() {
        let inst = Instance::from_segments(params(), &[seg(0.0, 0.0, 1.0, 0.0)]).unwrap();
        for seed in 0..10 {
            let c = SchedulerConfig::preset(Preset::TheorySafe, &inst.params, Duplex::Full, seed);
            let r = max_link_schedule(&inst, &c).unwrap();
            assert_eq!(r.selected, vec![LinkId(0)]);
            assert_eq!(r.phases.len(), 1);
            assert!(r.rulings_valid(&inst));
            assert!(r.exits_partition(&inst));
        }
    }

    #[test]
    fn near_and_far_pairs() {
        let p = SinrParams::default_for(1.0);
        let near = Instance::from_segments(p, &[seg(0.0, 0.0, 0.9, 0.0), seg(0.0, 3.0, 0.9, 3.0)]).unwrap();
        let far = Instance::from_segments(p, &[seg(0.0, 0.0, 0.9, 0.0), seg(2000.0, 0.0, 2000.9, 0.0)]).unwrap();
        for seed in 0..100 {
            let c = SchedulerConfig::preset(Preset::TheorySafe, &p, Duplex::Full, seed);
            let r = max_link_schedule(&near, &c).unwrap();
            assert_eq!(r.selected.len(), 1, "seed {seed}");
            let r = max_link_schedule(&far, &c).unwrap();
            assert_eq!(r.selected.len(), 2, "seed {seed}");
            assert!(is_independent(&far.placed_set(&r.selected), &p).passed());
        }
    }

    #[test]
    fn certificate_examples() {
        let p = params();
        let c = SchedulerConfig::preset(Preset::TheorySafe, &p, Duplex::Full, 0);
        let result = ScheduleResult {
            selected: vec![LinkId(0)],
            ..Default::default()
        };
        let opt = OptResult {
            best_set: vec![LinkId(0)],
            size: 1,
            subsets_examined: 1,
        };
        let cert = approx_ratio_certificate(&result, &opt, &c, &p);
        assert_eq!(cert.ratio, Some(1.0));
        assert!(cert.holds);
        let g2 = 72.0 * (576f64.cbrt() + 2.0);
        assert!((cert.c1 - (2.0 * g2 + 1.0).powi(3) / 2.0).abs() < 1e-6 * cert.c1);
    }
}
