//! Euclidean node and link model, length classes, and the cover / ruling
//! predicates the protocols are judged against.
//!
//! All comparisons are exact floating-point comparisons. Instances produced
//! by the generator keep lengths away from class boundaries, so verdicts do
//! not depend on a tolerance.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A transceiver at a fixed position.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn new(id: u32, x: f64, y: f64) -> Self {
        Self { id: NodeId(id), x, y }
    }

    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// A directed transmission request from `sender` to `receiver`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub sender: NodeId,
    pub receiver: NodeId,
}

/// A link with its endpoints resolved to coordinates.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PlacedLink {
    pub id: LinkId,
    pub sender: Point,
    pub receiver: Point,
}

impl PlacedLink {
    pub fn length(&self) -> f64 {
        self.sender.distance(self.receiver)
    }

    /// The same link with its direction inverted.
    pub fn reversed(&self) -> Self {
        Self {
            id: self.id,
            sender: self.receiver,
            receiver: self.sender,
        }
    }
}

/// Euclidean distance between two nodes looked up by id in `nodes`, where
/// ids are dense indices.
pub fn distance(nodes: &[Node], u: NodeId, v: NodeId) -> Result<f64> {
    let a = nodes.get(u.index()).ok_or(Error::UnknownNode(u))?;
    let b = nodes.get(v.index()).ok_or(Error::UnknownNode(v))?;
    Ok(a.pos().distance(b.pos()))
}

/// Links grouped into length classes `L_1..L_g`, where class `i` holds
/// lengths in `[2^(i-1) d_min, 2^i d_min)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkClasses {
    pub d_min: f64,
    pub d_max: f64,
    /// `classes[i - 1]` is `L_i`, with ids sorted ascending.
    pub classes: Vec<Vec<LinkId>>,
}

impl LinkClasses {
    /// Partitions `(id, length)` pairs into length classes.
    ///
    /// A length equal to `d_max` goes to the top class even when `d_max` is an
    /// exact power-of-two multiple of `d_min`, and a degenerate range with
    /// `d_min == d_max` yields one class.
    pub fn partition(links: &[(LinkId, f64)], d_min: f64, d_max: f64) -> Result<Self> {
        if !(d_min > 0.0 && d_min.is_finite() && d_max.is_finite() && d_min <= d_max) {
            return Err(Error::InvalidParams(format!(
                "length bounds must satisfy 0 < d_min <= d_max, got [{d_min}, {d_max}]"
            )));
        }
        let g = diversity(d_min, d_max).max(1);
        let mut classes = vec![Vec::new(); g];
        for &(id, length) in links {
            if !(length >= d_min && length <= d_max) {
                return Err(Error::LinkOutOfBounds {
                    link: id,
                    length,
                    d_min,
                    d_max,
                });
            }
            classes[class_index(length, d_min, g) - 1].push(id);
        }
        for class in &mut classes {
            class.sort_unstable();
            class.dedup();
        }
        Ok(Self {
            d_min,
            d_max,
            classes,
        })
    }

    /// Number of classes, `g(L)` (at least one).
    pub fn diversity(&self) -> usize {
        self.classes.len()
    }

    /// Upper length bound `d_i = 2^i d_min` of class `i` (1-based).
    pub fn upper_bound(&self, i: usize) -> f64 {
        class_upper_bound(self.d_min, i)
    }

    /// Class index (1-based) holding `link`, if any.
    pub fn class_of(&self, link: LinkId) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.binary_search(&link).is_ok())
            .map(|p| p + 1)
    }

    pub fn class(&self, i: usize) -> &[LinkId] {
        &self.classes[i - 1]
    }
}

/// `ceil(log2(d_max / d_min))`, computed by doubling so exact powers of two
/// land on integers.
pub fn diversity(d_min: f64, d_max: f64) -> usize {
    let mut g = 0;
    while class_upper_bound(d_min, g) < d_max {
        g += 1;
    }
    g
}

pub fn class_upper_bound(d_min: f64, i: usize) -> f64 {
    d_min * 2f64.powi(i as i32)
}

fn class_index(length: f64, d_min: f64, g: usize) -> usize {
    (1..=g)
        .find(|&i| length < class_upper_bound(d_min, i))
        .unwrap_or(g)
}

/// True iff some member of `cover` lies within distance `omega` of `v`.
pub fn is_covered(v: Point, cover: &[Node], omega: f64) -> bool {
    cover.iter().any(|c| v.distance(c.pos()) <= omega)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RulingViolation {
    /// A ruling member that is not in the ground set.
    NotInGroundSet { node: NodeId },
    /// Two ruling members closer than the separation radius.
    TooClose { a: NodeId, b: NodeId, distance: f64 },
    /// A ground node with no ruling member within the cover radius. `nearest`
    /// names the closest ruling member, if the ruling is non-empty.
    Uncovered {
        node: NodeId,
        nearest: Option<(NodeId, f64)>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RulingVerdict {
    pub violations: Vec<RulingViolation>,
}

impl RulingVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three ruling conditions: `ruling ⊆ ground`, members pairwise at
/// least `omega1` apart, and every ground node `omega2`-covered by the ruling.
pub fn verify_ruling(ruling: &[Node], ground: &[Node], omega1: f64, omega2: f64) -> RulingVerdict {
    let mut violations = Vec::new();
    let ground_ids: BTreeSet<NodeId> = ground.iter().map(|n| n.id).collect();
    for r in ruling {
        if !ground_ids.contains(&r.id) {
            violations.push(RulingViolation::NotInGroundSet { node: r.id });
        }
    }
    for (i, a) in ruling.iter().enumerate() {
        for b in &ruling[i + 1..] {
            let d = a.pos().distance(b.pos());
            if d < omega1 {
                violations.push(RulingViolation::TooClose {
                    a: a.id,
                    b: b.id,
                    distance: d,
                });
            }
        }
    }
    for w in ground {
        let nearest = ruling
            .iter()
            .map(|r| (r.id, w.pos().distance(r.pos())))
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        match nearest {
            Some((_, d)) if d <= omega2 => {}
            _ => violations.push(RulingViolation::Uncovered {
                node: w.id,
                nearest,
            }),
        }
    }
    RulingVerdict { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(v: &[u32]) -> Vec<LinkId> {
        v.iter().copied().map(LinkId).collect()
    }

    #[test]
    fn distance_examples() {
        let nodes = [
            Node::new(0, 0.0, 0.0),
            Node::new(1, 0.0, 0.0),
            Node::new(2, 3.0, 4.0),
            Node::new(3, 1.0, 1.0),
            Node::new(4, 4.0, 5.0),
        ];
        assert_eq!(distance(&nodes, NodeId(0), NodeId(1)).unwrap(), 0.0);
        assert_eq!(distance(&nodes, NodeId(0), NodeId(2)).unwrap(), 5.0);
        assert_eq!(distance(&nodes, NodeId(3), NodeId(4)).unwrap(), 5.0);
        assert_eq!(
            distance(&nodes, NodeId(2), NodeId(0)).unwrap(),
            distance(&nodes, NodeId(0), NodeId(2)).unwrap()
        );
        assert!(matches!(
            distance(&nodes, NodeId(0), NodeId(9)),
            Err(Error::UnknownNode(NodeId(9)))
        ));
    }

    #[test]
    fn partition_power_of_two_bounds() {
        let links = [(LinkId(0), 1.0), (LinkId(1), 3.0), (LinkId(2), 7.0)];
        let c = LinkClasses::partition(&links, 1.0, 8.0).unwrap();
        assert_eq!(c.diversity(), 3);
        assert_eq!(c.classes, vec![ids(&[0]), ids(&[1]), ids(&[2])]);
        assert_eq!(c.upper_bound(3), 8.0);
    }

    #[test]
    fn partition_degenerate_single_class() {
        let c = LinkClasses::partition(&[(LinkId(0), 1.0)], 1.0, 1.0).unwrap();
        assert_eq!(diversity(1.0, 1.0), 0);
        assert_eq!(c.diversity(), 1);
        assert_eq!(c.class(1), &ids(&[0])[..]);
    }

    #[test]
    fn partition_non_power_range() {
        let links = [(LinkId(0), 0.5), (LinkId(1), 0.9), (LinkId(2), 2.0)];
        let c = LinkClasses::partition(&links, 0.5, 6.0).unwrap();
        // ceil(log2 12) = 4
        assert_eq!(c.diversity(), 4);
        assert_eq!(c.class(1), &ids(&[0, 1])[..]);
        assert!(c.class(2).is_empty());
        assert_eq!(c.class(3), &ids(&[2])[..]);
        assert_eq!(c.class_of(LinkId(2)), Some(3));
    }

    #[test]
    fn partition_top_boundary_goes_to_top_class() {
        let links = [(LinkId(0), 8.0), (LinkId(1), 4.0)];
        let c = LinkClasses::partition(&links, 1.0, 8.0).unwrap();
        assert_eq!(c.class_of(LinkId(0)), Some(3));
        assert_eq!(c.class_of(LinkId(1)), Some(3));
    }

    #[test]
    fn partition_rejects_out_of_range() {
        let err = LinkClasses::partition(&[(LinkId(4), 9.0)], 1.0, 8.0).unwrap_err();
        assert!(matches!(err, Error::LinkOutOfBounds { link: LinkId(4), .. }));
        let err = LinkClasses::partition(&[(LinkId(5), 0.5)], 1.0, 8.0).unwrap_err();
        assert!(matches!(err, Error::LinkOutOfBounds { link: LinkId(5), .. }));
    }

    #[test]
    fn cover_examples() {
        let v = Node::new(0, 0.0, 0.0);
        assert!(is_covered(v.pos(), &[v], 0.0));
        assert!(!is_covered(v.pos(), &[], 10.0));
        let w = [Node::new(1, 3.0, 4.0)];
        assert!(is_covered(v.pos(), &w, 5.0));
        assert!(!is_covered(v.pos(), &w, 4.9));
    }

    #[test]
    fn ruling_examples() {
        let v = Node::new(0, 1.0, 1.0);
        assert!(verify_ruling(&[v], &[v], 0.5, 2.0).passed());

        let a = Node::new(0, 0.0, 0.0);
        let b = Node::new(1, 3.0, 0.0);
        let verdict = verify_ruling(&[a, b], &[a, b], 4.0, 5.0);
        assert_eq!(
            verdict.violations,
            vec![RulingViolation::TooClose {
                a: a.id,
                b: b.id,
                distance: 3.0
            }]
        );
        assert!(verify_ruling(&[a], &[a, b], 2.0, 4.0).passed());
        assert!(verify_ruling(&[b], &[a, b], 2.0, 4.0).passed());
    }

    #[test]
    fn ruling_reports_uncovered_and_foreign() {
        let a = Node::new(0, 0.0, 0.0);
        let b = Node::new(1, 10.0, 0.0);
        let c = Node::new(2, 50.0, 0.0);
        let verdict = verify_ruling(&[a, c], &[a, b], 1.0, 5.0);
        assert!(verdict
            .violations
            .contains(&RulingViolation::NotInGroundSet { node: c.id }));
        assert!(verdict.violations.contains(&RulingViolation::Uncovered {
            node: b.id,
            nearest: Some((a.id, 10.0)),
        }));
    }

    fn arb_nodes() -> impl Strategy<Value = Vec<Node>> {
        prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 1..25).prop_map(|pts| {
            pts.into_iter()
                .enumerate()
                .map(|(i, (x, y))| Node::new(i as u32, x, y))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn ruling_verdict_monotone_in_radii(
            nodes in arb_nodes(),
            mask in prop::collection::vec(any::<bool>(), 25),
            w1 in 0.0f64..5.0,
            w2 in 0.0f64..10.0,
            shrink in 0.0f64..1.0,
            grow in 1.0f64..3.0,
        ) {
            let ruling: Vec<Node> = nodes.iter().zip(&mask).filter(|(_, &m)| m).map(|(n, _)| *n).collect();
            if verify_ruling(&ruling, &nodes, w1, w2).passed() {
                prop_assert!(verify_ruling(&ruling, &nodes, w1 * shrink, w2 * grow).passed());
            }
        }

        #[test]
        fn partition_order_independent_and_bounded(
            lengths in prop::collection::vec(1.0f64..=40.0, 1..40),
            rot in 0usize..40,
        ) {
            let links: Vec<(LinkId, f64)> = lengths.iter().enumerate().map(|(i, &d)| (LinkId(i as u32), d)).collect();
            let c = LinkClasses::partition(&links, 1.0, 40.0).unwrap();
            let mut rotated = links.clone();
            rotated.rotate_left(rot % links.len());
            rotated.reverse();
            prop_assert_eq!(&c, &LinkClasses::partition(&rotated, 1.0, 40.0).unwrap());
            let total: usize = c.classes.iter().map(Vec::len).sum();
            prop_assert_eq!(total, links.len());
            for &(id, d) in &links {
                let i = c.class_of(id).unwrap();
                prop_assert!(c.upper_bound(i) / 2.0 <= d && d <= c.upper_bound(i));
            }
        }
    }
}
