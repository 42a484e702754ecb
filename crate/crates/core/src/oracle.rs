//! Ground-truth baselines and checkers: exhaustive optimum, the sequential
//! greedy scheduler, sequential ruling and dominating-set constructors, and
//! executable forms of the two counting lemmas behind the approximation
//! bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkId, Node, PlacedLink};
use crate::instance::Instance;
use crate::sinr::{affectance_set, SinrParams};

pub const DEFAULT_MAX_M: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_set: Vec<LinkId>,
    pub size: usize,
    pub subsets_examined: u64,
}

/// Exhaustive maximum independent subset of all links in `instance`.
pub fn brute_force_opt(instance: &Instance, max_m: usize) -> Result<OptResult> {
    brute_force_opt_over(instance, &instance.link_ids(), max_m)
}

/// Exhaustive maximum independent subset of `candidates`.
///
/// Subsets are visited by decreasing size and, within a size, in
/// lexicographic order of sorted link ids; the first independent one wins,
/// so ties resolve to the lexicographically smallest id set.
pub fn brute_force_opt_over(instance: &Instance, candidates: &[LinkId], max_m: usize) -> Result<OptResult> {
    let mut ids = candidates.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let m = ids.len();
    if m > max_m {
        return Err(Error::TooLarge { m, max_m });
    }
    let p = &instance.params;
    let links = instance.placed_set(&ids);
    let signal: Vec<f64> = links.iter().map(|l| p.received(p.power, l.length())).collect();
    // cross[j][i]: power from sender j at receiver i
    let cross: Vec<Vec<f64>> = links
        .iter()
        .map(|src| {
            links
                .iter()
                .map(|dst| p.received(p.power, src.sender.distance(dst.receiver)))
                .collect()
        })
        .collect();

    let feasible = |chosen: &[usize]| {
        chosen.iter().all(|&i| {
            let interference: f64 = chosen.iter().filter(|&&j| j != i).map(|&j| cross[j][i]).sum();
            signal[i] / (interference + p.noise) >= p.beta
        })
    };

    let mut examined = 0u64;
    for k in (1..=m).rev() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            examined += 1;
            if feasible(&idx) {
                let best_set: Vec<LinkId> = idx.iter().map(|&i| ids[i]).collect();
                return Ok(OptResult {
                    size: k,
                    best_set,
                    subsets_examined: examined,
                });
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    Ok(OptResult {
        best_set: Vec::new(),
        size: 0,
        subsets_examined: examined,
    })
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Sequential greedy over links in non-decreasing length order. Each round
/// selects the shortest remaining link `l`, drops every remaining link whose
/// affectance from the selection reaches `c0`, then drops every remaining
/// link whose sender is within `c1 * d(l)` of `l`'s receiver.
///
/// Equal lengths resolve by lower link id.
pub fn centralized_greedy(instance: &Instance, c0: f64, c1: f64) -> Result<Vec<LinkId>> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::InvalidParams(format!("c0 must lie in (0, 1), got {c0}")));
    }
    if !(c1 > 1.0) {
        return Err(Error::InvalidParams(format!("c1 must exceed 1, got {c1}")));
    }
    let p = &instance.params;
    let mut remaining: Vec<PlacedLink> = instance.placed_set(&instance.link_ids());
    remaining.sort_by(|a, b| a.length().total_cmp(&b.length()).then(a.id.cmp(&b.id)));
    let mut selected: Vec<PlacedLink> = Vec::new();
    while !remaining.is_empty() {
        let l = remaining.remove(0);
        selected.push(l);
        let mut kept = Vec::with_capacity(remaining.len());
        for other in remaining {
            if affectance_set(&selected, &other, p)? >= c0 {
                continue;
            }
            if other.sender.distance(l.receiver) <= c1 * l.length() {
                continue;
            }
            kept.push(other);
        }
        remaining = kept;
    }
    let mut ids: Vec<LinkId> = selected.iter().map(|l| l.id).collect();
    ids.sort_unstable();
    Ok(ids)
}

/// Sequential ruling: repeatedly take the lowest-id node not yet within
/// `omega` of a chosen node. The result is pairwise more than `omega` apart
/// and `omega`-covers `ground`.
pub fn greedy_ruling(ground: &[Node], omega: f64) -> Vec<Node> {
    let mut order = ground.to_vec();
    order.sort_by_key(|n| n.id);
    let mut chosen: Vec<Node> = Vec::new();
    for n in order {
        if !chosen.iter().any(|c| c.pos().distance(n.pos()) <= omega) {
            chosen.push(n);
        }
    }
    chosen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominatingSet {
    pub members: Vec<Node>,
    /// Largest number of members inside `B(v, range)` over `v` in the ground set.
    pub max_density: usize,
    /// Smallest such count; at least 1 whenever the ground set is covered.
    pub min_density: usize,
    pub density_limit: usize,
}

impl DominatingSet {
    pub fn within_limit(&self) -> bool {
        self.max_density <= self.density_limit
    }
}

/// Constant-density dominating set of `ground` at `range`, built with
/// [`greedy_ruling`]. Packing bounds the density by 9 in the plane; the
/// achieved extremes are reported for the caller to check against `c9`.
pub fn sequential_dominating_set(ground: &[Node], range: f64, c9: usize) -> Result<DominatingSet> {
    if !(range > 0.0) {
        return Err(Error::InvalidParams(format!("range must be positive, got {range}")));
    }
    if c9 == 0 {
        return Err(Error::InvalidParams("density limit must be at least 1".into()));
    }
    let members = greedy_ruling(ground, range);
    let densities = ground.iter().map(|v| {
        members
            .iter()
            .filter(|d| d.pos().distance(v.pos()) <= range)
            .count()
    });
    let max_density = densities.clone().max().unwrap_or(0);
    let min_density = densities.min().unwrap_or(0);
    Ok(DominatingSet {
        members,
        max_density,
        min_density,
        density_limit: c9,
    })
}

/// `(2 gamma + 1)^alpha / beta`: the most links of similar or longer length
/// an independent set can place with senders inside a `gamma d_i` ball.
pub fn spatial_constant(gamma: f64, params: &SinrParams) -> f64 {
    (2.0 * gamma + 1.0).powf(params.alpha) / params.beta
}

/// `(2 (beta b)^(1/alpha) / ((beta b)^(1/alpha) - 1))^alpha / psi' + 1`.
pub fn affectance_constant(psi_prime: f64, b: usize, params: &SinrParams) -> f64 {
    let root = (params.beta * b as f64).powf(1.0 / params.alpha);
    (2.0 * root / (root - 1.0)).powf(params.alpha) / psi_prime + 1.0
}

/// Smallest integer `b >= 1` with `beta b > 1`. The affectance constant is
/// decreasing in `b`, so evaluating it here bounds every admissible bin
/// capacity.
pub fn smallest_bin_capacity(params: &SinrParams) -> usize {
    let mut b = 1;
    while !(params.beta * b as f64 > 1.0) {
        b += 1;
    }
    b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCheck {
    pub link: LinkId,
    pub ball: Vec<LinkId>,
    pub opt: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialVerdict {
    pub bound: f64,
    pub balls: Vec<BallCheck>,
}

impl SpatialVerdict {
    pub fn passed(&self) -> bool {
        self.balls.iter().all(|b| b.opt as f64 <= self.bound)
    }
}

/// For each `l` in `chosen`, brute-forces the optimum over the links of the
/// same or a longer class whose senders lie within `gamma d_i` of `l`'s
/// sender, and compares it with [`spatial_constant`].
pub fn check_lemma_spatial(instance: &Instance, chosen: &[LinkId], gamma: f64, max_m: usize) -> Result<SpatialVerdict> {
    if !(gamma > 1.0) {
        return Err(Error::Precondition(format!("gamma must exceed 1, got {gamma}")));
    }
    let classes = instance.classes()?;
    let mut balls = Vec::with_capacity(chosen.len());
    for &l in chosen {
        let i = classes.class_of(l).ok_or(Error::UnknownLink(l))?;
        let radius = gamma * classes.upper_bound(i);
        let centre = instance.pos(instance.sender(l));
        let ball: Vec<LinkId> = (i..=classes.diversity())
            .flat_map(|j| classes.class(j).iter().copied())
            .filter(|&k| instance.pos(instance.sender(k)).distance(centre) <= radius)
            .collect();
        let opt = brute_force_opt_over(instance, &ball, max_m)?.size;
        let mut ball = ball;
        ball.sort_unstable();
        balls.push(BallCheck { link: l, ball, opt });
    }
    Ok(SpatialVerdict {
        bound: spatial_constant(gamma, &instance.params),
        balls,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffectanceLemmaVerdict {
    /// Bin capacity the constant was evaluated at.
    pub b: usize,
    pub constant: f64,
    pub opt: usize,
    pub blockers: usize,
    /// The proof's own bin capacity for this instance, `ceil(opt / blockers) - 1`.
    pub packing_b: Option<usize>,
}

impl AffectanceLemmaVerdict {
    pub fn passed(&self) -> bool {
        self.opt as f64 <= self.constant * self.blockers as f64
    }
}

/// Checks `|OPT(blocked)| <= C2(psi') |blockers|` where every blocked link
/// suffers reverse affectance above `psi'` from `blockers`.
pub fn check_lemma_affectance(
    instance: &Instance,
    blockers: &[LinkId],
    blocked: &[LinkId],
    psi_prime: f64,
    max_m: usize,
) -> Result<AffectanceLemmaVerdict> {
    if !(psi_prime > 0.0) {
        return Err(Error::Precondition(format!("psi' must be positive, got {psi_prime}")));
    }
    if let Some(l) = blocked.iter().find(|l| blockers.contains(l)) {
        return Err(Error::Precondition(format!("{l} is in both link sets")));
    }
    let p = &instance.params;
    let from = instance.placed_set(blockers);
    for &l in blocked {
        let a = affectance_set(&from, &instance.placed(l).reversed(), p)?;
        if !(a > psi_prime) {
            return Err(Error::Precondition(format!(
                "{l} has reverse affectance {a} from the blockers, not above {psi_prime}"
            )));
        }
    }
    let opt = brute_force_opt_over(instance, blocked, max_m)?.size;
    let b = smallest_bin_capacity(p);
    let packing_b = (!blockers.is_empty() && opt > 0).then(|| opt.div_ceil(blockers.len()) - 1);
    Ok(AffectanceLemmaVerdict {
        b,
        constant: affectance_constant(psi_prime, b, p),
        opt,
        blockers: blockers.len(),
        packing_b,
    })
}
