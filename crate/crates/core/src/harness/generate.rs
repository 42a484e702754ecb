use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{class_upper_bound, diversity, Point};
use crate::instance::{Instance, LengthBounds};
use crate::sinr::SinrParams;

/// Placement attempts per link before giving up.
pub const MAX_TRIES: usize = 10_000;
/// Lengths within this relative distance of a class boundary are redrawn.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub m: usize,
    pub side: f64,
    pub d_min: f64,
    pub d_max: f64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if !(self.d_min > 0.0 && self.d_min <= self.d_max && self.d_max.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need 0 < d_min <= d_max, got [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        if !(self.side > 2.0 * self.d_max && self.side.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "side ({}) must exceed 2 d_max ({})",
                self.side,
                2.0 * self.d_max
            )));
        }
        Ok(())
    }
}

/// Random instance: senders uniform in `[0, side]^2`, lengths log-uniform in
/// `[d_min, d_max]`, directions uniform. Uses the default physical constants
/// with the smallest power that keeps `d_max` feasible, and records the
/// bounds so the class structure does not depend on the draw.
pub fn generate_instance(seed: u64, spec: &GenSpec) -> Result<Instance> {
    spec.validate()?;
    let params = SinrParams::default_for(spec.d_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = diversity(spec.d_min, spec.d_max);
    let boundaries: Vec<f64> = (0..=g).map(|i| class_upper_bound(spec.d_min, i)).collect();
    let min_gap = 1e-6 * spec.d_min;
    let ratio = spec.d_max / spec.d_min;
    let mut segments: Vec<(Point, Point)> = Vec::with_capacity(spec.m);
    for k in 0..spec.m {
        let mut placed = None;
        for _ in 0..MAX_TRIES {
            let s = Point::new(rng.random_range(0.0..spec.side), rng.random_range(0.0..spec.side));
            let length = spec.d_min * ratio.powf(rng.random::<f64>());
            let theta = rng.random_range(0.0..TAU);
            let r = Point::new(s.x + length * theta.cos(), s.y + length * theta.sin());
            let d = s.distance(r);
            let knife_edge = boundaries[1..]
                .iter()
                .any(|&b| (d - b).abs() <= BOUNDARY_MARGIN * b);
            if knife_edge || d < spec.d_min || d > spec.d_max || !params.is_transmittable(d) {
                continue;
            }
            let crowded = segments
                .iter()
                .flat_map(|(a, b)| [*a, *b])
                .any(|p| p.distance(s) < min_gap || p.distance(r) < min_gap);
            if crowded {
                continue;
            }
            placed = Some((s, r));
            break;
        }
        let seg = placed.ok_or_else(|| {
            Error::Generation(format!("could not place link {k} after {MAX_TRIES} attempts"))
        })?;
        segments.push(seg);
    }
    Instance::from_segments(params, &segments)?.with_bounds(LengthBounds {
        d_min: spec.d_min,
        d_max: spec.d_max,
    })
}
