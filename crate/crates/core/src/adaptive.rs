//! Scheduling with one extra power level per length class.
//!
//! The second step of each phase is replaced by three sub-steps: a
//! constant-density dominating set of the class-`i` candidates at range
//! `omega3`, a ruling over that set only (so `b_max` is a constant), and a
//! one-slot postprocessing that retires every candidate not in the ruling.
//! Rulings transmit at `P_i = beta N (gamma3 d_i)^alpha`; data transmission
//! still uses the uniform power.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_covered, LinkClasses, Node, NodeId};
use crate::instance::Instance;
use crate::oracle::{sequential_dominating_set, DominatingSet};
use crate::ruling::{construct_ruling_with, coverage_ratio, RulingResult, RunOptions};
use crate::scheduler::{run_phases, tag, Preset, ScheduleResult, SchedulerConfig, Step2};
use crate::sim::Duplex;
use crate::sinr::SinrParams;

/// Packing bound for a greedy dominating set: members are pairwise more than
/// the range apart, so `(2 * 1 + 1)^2` of them fit in any range ball.
pub const DEFAULT_C9: usize = 9;
pub const DEFAULT_C_PRE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub gamma3: f64,
    pub gamma4: f64,
    pub c9: usize,
    /// The dominating-set step is charged `ceil(c_pre * log2 m)` slots.
    pub c_pre: f64,
}

impl AdaptiveConfig {
    /// Scheduler and adaptive constants that satisfy each other's
    /// requirements: `gamma3 = gamma1`, so the density bound at range
    /// `omega3` also bounds every `omega1` ball, and `gamma2 = gamma3 + gamma4`.
    pub fn preset(preset: Preset, params: &SinrParams, duplex: Duplex, seed: u64) -> (SchedulerConfig, Self) {
        let mut sched = SchedulerConfig::preset(preset, params, duplex, seed);
        let gamma3 = sched.gamma1;
        let gamma4 = match preset {
            Preset::TheorySafe => coverage_ratio(params.alpha) * sched.gamma1,
            Preset::Practical => 2.0 * sched.gamma1,
        };
        sched.gamma2 = gamma3 + gamma4;
        (
            sched,
            Self {
                gamma3,
                gamma4,
                c9: DEFAULT_C9,
                c_pre: DEFAULT_C_PRE,
            },
        )
    }

    pub fn validate(&self, sched: &SchedulerConfig, params: &SinrParams) -> Result<()> {
        if !(self.gamma3 > 0.0 && self.gamma3.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma3 must be positive, got {}", self.gamma3)));
        }
        if !(self.gamma4 > sched.gamma1) {
            return Err(Error::InvalidParams(format!(
                "gamma4 ({}) must exceed gamma1 ({})",
                self.gamma4, sched.gamma1
            )));
        }
        if sched.theory_safe {
            let need = coverage_ratio(params.alpha) * sched.gamma1;
            if self.gamma4 < need * (1.0 - 1e-12) {
                return Err(Error::InvalidParams(format!(
                    "theory-safe mode needs gamma4 >= {need}, got {}",
                    self.gamma4
                )));
            }
        }
        if sched.gamma2 < (self.gamma3 + self.gamma4) * (1.0 - 1e-12) {
            return Err(Error::InvalidParams(format!(
                "gamma2 ({}) must be at least gamma3 + gamma4 ({})",
                sched.gamma2,
                self.gamma3 + self.gamma4
            )));
        }
        if self.c9 == 0 {
            return Err(Error::InvalidParams("C9 must be at least 1".into()));
        }
        if !(self.c_pre > 0.0 && self.c_pre.is_finite()) {
            return Err(Error::InvalidParams(format!("C_pre must be positive, got {}", self.c_pre)));
        }
        Ok(())
    }

    /// The per-class scheduling powers `P_1 .. P_g`.
    pub fn power_levels(&self, classes: &LinkClasses, params: &SinrParams) -> Vec<f64> {
        (1..=classes.diversity())
            .map(|i| params.beta * params.noise * (self.gamma3 * classes.upper_bound(i)).powf(params.alpha))
            .collect()
    }

    /// Slots charged for the dominating-set step with `m` links.
    pub fn preprocessing_slots(&self, m: usize) -> u64 {
        let log_m = if m <= 1 { 0.0 } else { (m as f64).log2() };
        ((self.c_pre * log_m).ceil() as u64).max(1)
    }
}

/// `P_i = beta N (gamma3 d_i)^alpha`, whose transmission range is
/// `gamma3 d_i`.
pub fn power_level_for_class(i: usize, gamma3: f64, classes: &LinkClasses, params: &SinrParams) -> Result<f64> {
    if i == 0 || i > classes.diversity() {
        return Err(Error::Domain(format!(
            "class index {i} outside 1..={}",
            classes.diversity()
        )));
    }
    Ok(params.beta * params.noise * (gamma3 * classes.upper_bound(i)).powf(params.alpha))
}

/// Radii of one phase.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRadii {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub omega4: f64,
}

impl PhaseRadii {
    pub fn new(d_i: f64, sched: &SchedulerConfig, adaptive: &AdaptiveConfig) -> Self {
        Self {
            omega1: sched.gamma1 * d_i,
            omega2: sched.gamma2 * d_i,
            omega3: adaptive.gamma3 * d_i,
            omega4: adaptive.gamma4 * d_i,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveStep {
    pub radii: PhaseRadii,
    pub power: f64,
    pub dominating: DominatingSet,
    pub ruling: RulingResult,
    /// `Z ∪ (W1 \ R)`.
    pub z_prime: Vec<NodeId>,
    /// Preprocessing charge + ruling budget + one postprocessing slot.
    pub slots: u64,
}

/// The three sub-steps for one phase with class bound `d_i`. `w1` are the
/// class candidates' senders, `w2` the surviving longer links' senders and
/// `m` the instance size used for the preprocessing charge.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_phase_step2(
    w1: &[Node],
    w2: &[Node],
    d_i: f64,
    m: usize,
    sched: &SchedulerConfig,
    adaptive: &AdaptiveConfig,
    params: &SinrParams,
    opts: &RunOptions,
) -> Result<AdaptiveStep> {
    adaptive.validate(sched, params)?;
    let radii = PhaseRadii::new(d_i, sched, adaptive);
    let power = params.beta * params.noise * radii.omega3.powf(params.alpha);
    let dominating = sequential_dominating_set(w1, radii.omega3, adaptive.c9)?;
    if !dominating.within_limit() {
        return Err(Error::Precondition(format!(
            "dominating set density {} exceeds C9 = {}",
            dominating.max_density, adaptive.c9
        )));
    }
    let rc = sched.ruling_config(d_i, adaptive.gamma4, adaptive.c9, power);
    let ruling = construct_ruling_with(&dominating.members, w2, &rc, params, opts)?;
    let r: BTreeSet<NodeId> = ruling.r_hat.iter().copied().collect();
    let mut z_prime: BTreeSet<NodeId> = ruling.z_hat.iter().copied().collect();
    z_prime.extend(w1.iter().map(|n| n.id).filter(|id| !r.contains(id)));
    let slots = adaptive.preprocessing_slots(m) + ruling.budget + 1;
    Ok(AdaptiveStep {
        radii,
        power,
        dominating,
        ruling,
        z_prime: z_prime.into_iter().collect(),
        slots,
    })
}

/// Exact checks on one adaptive second step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveAudit {
    /// Dominating set is a subset of the candidates.
    pub dom_subset: bool,
    /// Every candidate is `omega3`-covered by the dominating set.
    pub dom_covers: bool,
    /// Every candidate sees between 1 and `C9` dominating nodes within `omega3`.
    pub dom_density: bool,
    /// `Z' ∩ W1 = W1 \ R`.
    pub post_candidates: bool,
    /// `omega1`-covered members of `W2` are in `Z'`.
    pub post_lower: bool,
    /// Members of `Z' ∩ W2` are `omega2`-covered by `R`.
    pub post_upper: bool,
}

impl AdaptiveAudit {
    pub fn passed(&self) -> bool {
        self.dom_subset && self.dom_covers && self.dom_density && self.post_candidates && self.post_lower && self.post_upper
    }
}

pub fn audit_adaptive_step(step: &AdaptiveStep, w1: &[Node], w2: &[Node], c9: usize) -> AdaptiveAudit {
    let PhaseRadii { omega1, omega2, omega3, .. } = step.radii;
    let w1_ids: BTreeSet<NodeId> = w1.iter().map(|n| n.id).collect();
    let dom = &step.dominating.members;
    let r_ids: BTreeSet<NodeId> = step.ruling.r_hat.iter().copied().collect();
    let r_nodes: Vec<Node> = w1.iter().filter(|n| r_ids.contains(&n.id)).copied().collect();
    let z: BTreeSet<NodeId> = step.z_prime.iter().copied().collect();
    let density = |v: &Node| dom.iter().filter(|d| d.pos().distance(v.pos()) <= omega3).count();
    let z_w1: BTreeSet<NodeId> = z.intersection(&w1_ids).copied().collect();
    let w1_minus_r: BTreeSet<NodeId> = w1_ids.difference(&r_ids).copied().collect();
    AdaptiveAudit {
        dom_subset: dom.iter().all(|d| w1_ids.contains(&d.id)),
        dom_covers: w1.iter().all(|v| is_covered(v.pos(), dom, omega3)),
        dom_density: w1.iter().all(|v| (1..=c9).contains(&density(v))),
        post_candidates: z_w1 == w1_minus_r,
        post_lower: w2
            .iter()
            .filter(|v| is_covered(v.pos(), &r_nodes, omega1))
            .all(|v| z.contains(&v.id)),
        post_upper: w2
            .iter()
            .filter(|v| z.contains(&v.id))
            .all(|v| is_covered(v.pos(), &r_nodes, omega2)),
    }
}

/// Distributed scheduling with per-class scheduling power.
pub fn adaptive_max_link_schedule(
    instance: &Instance,
    sched: &SchedulerConfig,
    adaptive: &AdaptiveConfig,
) -> Result<ScheduleResult> {
    let params = instance.params;
    adaptive.validate(sched, &params)?;
    run_phases(instance, sched, |ctx| {
        let opts = RunOptions {
            duplex: sched.duplex,
            seed: sched.seed,
            tag: tag(ctx.class, 2),
            capture_trace: sched.capture_traces,
        };
        let step = adaptive_phase_step2(ctx.w1, ctx.w2, ctx.d_i, ctx.m, sched, adaptive, &params, &opts)?;
        Ok(Step2 {
            r: step.ruling.r_hat,
            z: step.z_prime,
            dominating: Some(step.dominating.members.iter().map(|n| n.id).collect()),
            slots: step.slots,
            active_slots: step.ruling.slots_used,
            timed_out: step.ruling.timed_out,
            traces: step.ruling.trace.into_iter().collect(),
        })
    })
}
