//! SINR physics: feasibility, independence, affectance, sensed power and the
//! carrier-sensing thresholds derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkId, PlacedLink, Point};

/// Path-loss and reception constants plus the uniform data power.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinrParams {
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// SINR reception threshold, > 1.
    pub beta: f64,
    /// Background noise, > 0.
    pub noise: f64,
    /// Noise margin, > 0.
    pub phi: f64,
    /// Uniform data transmission power.
    pub power: f64,
}

impl SinrParams {
    /// The default constants (alpha 3, beta 2, noise 1, phi 1) with the
    /// smallest power that keeps every link of length up to `d_max` feasible.
    pub fn default_for(d_max: f64) -> Self {
        let mut p = Self {
            alpha: 3.0,
            beta: 2.0,
            noise: 1.0,
            phi: 1.0,
            power: 0.0,
        };
        p.power = p.min_feasible_power(d_max);
        p
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, what: &str| {
            if c {
                Ok(())
            } else {
                Err(Error::InvalidParams(what.to_string()))
            }
        };
        ok(self.alpha.is_finite() && self.alpha > 2.0, "alpha must exceed 2")?;
        ok(self.beta.is_finite() && self.beta > 1.0, "beta must exceed 1")?;
        ok(self.noise.is_finite() && self.noise > 0.0, "noise must be positive")?;
        ok(self.phi.is_finite() && self.phi > 0.0, "phi must be positive")?;
        ok(self.power.is_finite() && self.power > 0.0, "power must be positive")
    }

    /// `beta * N * (1 + phi) * d_max^alpha`; ignores `self.power`.
    pub fn min_feasible_power(&self, d_max: f64) -> f64 {
        self.beta * self.noise * (1.0 + self.phi) * d_max.powf(self.alpha)
    }

    /// Received power from one transmitter at distance `d`.
    pub fn received(&self, power: f64, d: f64) -> f64 {
        power / d.powf(self.alpha)
    }

    /// `P / d^alpha + N` at the data power.
    pub fn thres(&self, d: f64) -> Result<f64> {
        self.thres_at(self.power, d)
    }

    /// `Thres(d)` for an arbitrary transmission power.
    pub fn thres_at(&self, power: f64, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::Domain(format!("threshold distance must be positive, got {d}")));
        }
        Ok(self.received(power, d) + self.noise)
    }

    /// Distance at which a lone transmitter at `power` is just decodable
    /// over noise: `(power / (beta N))^(1/alpha)`.
    pub fn transmission_range(&self, power: f64) -> f64 {
        (power / (self.beta * self.noise)).powf(1.0 / self.alpha)
    }

    /// `1 - d^alpha / (P / (beta N))`, positive exactly when a link of length
    /// `d` clears noise alone.
    pub fn feasibility_margin(&self, length: f64) -> f64 {
        1.0 - length.powf(self.alpha) * self.beta * self.noise / self.power
    }

    /// Whether `length` satisfies the individual feasibility bound with margin phi.
    pub fn is_transmittable(&self, length: f64) -> bool {
        self.received(self.power, length) / (self.noise * (1.0 + self.phi)) >= self.beta
    }

    /// Affectance threshold used by the first scheduling step:
    /// `psi * (1 - (phi / (beta (1 + phi)))^(1/alpha))^alpha`.
    pub fn reverse_affectance_threshold(&self, psi: f64) -> f64 {
        let inner = (self.phi / (self.beta * (1.0 + self.phi))).powf(1.0 / self.alpha);
        psi * (1.0 - inner).powf(self.alpha)
    }

    /// `36 (alpha - 1) / (alpha - 2)`, the ring-packing constant in the
    /// interference bound.
    pub fn ring_constant(&self) -> f64 {
        36.0 * (self.alpha - 1.0) / (self.alpha - 2.0)
    }
}

/// Total received power at `at` from `(position, power)` transmitters, plus
/// noise once.
pub fn sensed_power<I>(transmitters: I, at: Point, params: &SinrParams) -> Result<f64>
where
    I: IntoIterator<Item = (Point, f64)>,
{
    let mut sum = 0.0;
    for (pos, power) in transmitters {
        let d = pos.distance(at);
        if d == 0.0 {
            return Err(Error::Domain(format!(
                "transmitter coincides with sensing position ({}, {})",
                at.x, at.y
            )));
        }
        sum += params.received(power, d);
    }
    Ok(sum + params.noise)
}

/// Sensed power when every transmitter uses the data power.
pub fn sensed_power_uniform(transmitters: &[Point], at: Point, params: &SinrParams) -> Result<f64> {
    sensed_power(transmitters.iter().map(|&p| (p, params.power)), at, params)
}

/// `A(interferer, victim)`: the interference from `interferer`'s sender at
/// `victim`'s receiver, normalized so that a set is feasible for `victim`
/// exactly when the affectances sum to at most 1.
pub fn affectance(interferer: &PlacedLink, victim: &PlacedLink, params: &SinrParams) -> Result<f64> {
    let margin = params.feasibility_margin(victim.length());
    if !(margin > 0.0) {
        return Err(Error::InfeasibleLink(victim.id));
    }
    let cross = interferer.sender.distance(victim.receiver);
    if cross == 0.0 {
        return Err(Error::Domain(format!(
            "sender of {} coincides with receiver of {}",
            interferer.id, victim.id
        )));
    }
    let ratio = victim.length() / cross;
    Ok(params.beta / margin * ratio.powf(params.alpha))
}

/// Sum of affectances from `interferers` on `victim`. The victim itself is
/// skipped if present.
pub fn affectance_set(interferers: &[PlacedLink], victim: &PlacedLink, params: &SinrParams) -> Result<f64> {
    let mut total = 0.0;
    for l in interferers.iter().filter(|l| l.id != victim.id) {
        total += affectance(l, victim, params)?;
    }
    Ok(total)
}

/// A link that fails a feasibility test, with the offending value: the SINR
/// for [`is_independent`], the total affectance for
/// [`independence_via_affectance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkFailure {
    pub link: LinkId,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IndependenceVerdict {
    pub failures: Vec<LinkFailure>,
}

impl IndependenceVerdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failing_links(&self) -> Vec<LinkId> {
        self.failures.iter().map(|f| f.link).collect()
    }
}

/// SINR at `link`'s receiver when all of `set` transmit at the data power.
pub fn sinr(link: &PlacedLink, set: &[PlacedLink], params: &SinrParams) -> f64 {
    let signal = params.received(params.power, link.length());
    let interference: f64 = set
        .iter()
        .filter(|o| o.id != link.id)
        .map(|o| params.received(params.power, o.sender.distance(link.receiver)))
        .sum();
    signal / (interference + params.noise)
}

/// Direct SINR check: every link in `set` reaches SINR at least beta.
pub fn is_independent(set: &[PlacedLink], params: &SinrParams) -> IndependenceVerdict {
    let failures = set
        .iter()
        .filter_map(|l| {
            let value = sinr(l, set, params);
            (!(value >= params.beta)).then_some(LinkFailure { link: l.id, value })
        })
        .collect();
    IndependenceVerdict { failures }
}

/// The same decision as [`is_independent`], reached through affectance sums:
/// `A(set \ {l}, l) <= 1` for each member.
pub fn independence_via_affectance(set: &[PlacedLink], params: &SinrParams) -> IndependenceVerdict {
    let failures = set
        .iter()
        .filter_map(|l| {
            let value = affectance_set(set, l, params).unwrap_or(f64::INFINITY);
            (!(value <= 1.0)).then_some(LinkFailure { link: l.id, value })
        })
        .collect();
    IndependenceVerdict { failures }
}

/// Upper bound on the power sensed at `v` from a set of transmitters that are
/// pairwise at least `rho1` apart and at least `rho2` from `v`:
/// `36 (alpha - 1)/(alpha - 2) * rho2^2 / rho1^2 * P / rho2^alpha + N`.
///
/// The geometric preconditions are checked and reported by name.
pub fn interference_bound(
    transmitters: &[Point],
    v: Point,
    rho1: f64,
    rho2: f64,
    params: &SinrParams,
) -> Result<f64> {
    if !(rho1 > 0.0) {
        return Err(Error::Precondition(format!("rho1 must be positive, got {rho1}")));
    }
    if !(rho2 > rho1 / 2.0) {
        return Err(Error::Precondition(format!(
            "rho2 ({rho2}) must exceed rho1 / 2 ({})",
            rho1 / 2.0
        )));
    }
    for (i, a) in transmitters.iter().enumerate() {
        let dv = a.distance(v);
        if dv < rho2 {
            return Err(Error::Precondition(format!(
                "transmitter {i} is {dv} from the sensing node, closer than rho2 = {rho2}"
            )));
        }
        for (j, b) in transmitters.iter().enumerate().skip(i + 1) {
            let d = a.distance(*b);
            if d < rho1 {
                return Err(Error::Precondition(format!(
                    "transmitters {i} and {j} are {d} apart, closer than rho1 = {rho1}"
                )));
            }
        }
    }
    Ok(params.ring_constant() * (rho2 * rho2) / (rho1 * rho1) * params.power / rho2.powf(params.alpha)
        + params.noise)
}
