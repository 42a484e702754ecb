use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Link, LinkClasses, LinkId, Node, NodeId, PlacedLink, Point};
use crate::sinr::SinrParams;

/// Shared estimates of the shortest and longest possible link lengths.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub d_min: f64,
    pub d_max: f64,
}

/// A scheduling problem: the physical constants, node positions and the
/// directed link requests.
///
/// Node and link ids are dense from zero, so `nodes[i].id == NodeId(i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub params: SinrParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<LengthBounds>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
}

impl Instance {
    pub fn new(params: SinrParams, nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let inst = Self {
            params,
            bounds: None,
            nodes,
            links,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_bounds(mut self, bounds: LengthBounds) -> Result<Self> {
        self.bounds = Some(bounds);
        self.validate()?;
        Ok(self)
    }

    /// Builds an instance from `(sender, receiver)` coordinate pairs, creating
    /// two fresh nodes per link.
    pub fn from_segments(params: SinrParams, segments: &[(Point, Point)]) -> Result<Self> {
        let mut nodes = Vec::with_capacity(segments.len() * 2);
        let mut links = Vec::with_capacity(segments.len());
        for (i, (s, r)) in segments.iter().enumerate() {
            let sid = nodes.len() as u32;
            nodes.push(Node::new(sid, s.x, s.y));
            nodes.push(Node::new(sid + 1, r.x, r.y));
            links.push(Link {
                id: LinkId(i as u32),
                sender: NodeId(sid),
                receiver: NodeId(sid + 1),
            });
        }
        Self::new(params, nodes, links)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id.index() != i {
                return Err(Error::InvalidInstance(format!(
                    "node ids must be dense from 0; position {i} holds {}",
                    n.id
                )));
            }
            if !n.pos().is_finite() {
                return Err(Error::InvalidInstance(format!("{} has non-finite coordinates", n.id)));
            }
        }
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                if a.pos() == b.pos() {
                    return Err(Error::InvalidInstance(format!(
                        "{} and {} are coincident",
                        a.id, b.id
                    )));
                }
            }
        }
        let mut senders = BTreeSet::new();
        let mut receivers = BTreeSet::new();
        for (i, l) in self.links.iter().enumerate() {
            if l.id.index() != i {
                return Err(Error::InvalidInstance(format!(
                    "link ids must be dense from 0; position {i} holds {}",
                    l.id
                )));
            }
            for end in [l.sender, l.receiver] {
                if end.index() >= self.nodes.len() {
                    return Err(Error::UnknownNode(end));
                }
            }
            if l.sender == l.receiver {
                return Err(Error::InvalidInstance(format!("{} has sender equal to receiver", l.id)));
            }
            if !senders.insert(l.sender) {
                return Err(Error::InvalidInstance(format!(
                    "{} is the sender of more than one link",
                    l.sender
                )));
            }
            receivers.insert(l.receiver);
        }
        if let Some(n) = senders.intersection(&receivers).next() {
            return Err(Error::InvalidInstance(format!(
                "{n} is both a sender and a receiver"
            )));
        }
        for l in &self.links {
            if !self.params.is_transmittable(self.length(l.id)) {
                return Err(Error::InfeasibleLink(l.id));
            }
        }
        if let Some(b) = self.bounds {
            if !(b.d_min > 0.0 && b.d_min <= b.d_max && b.d_max.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "length bounds [{}, {}] are not a valid range",
                    b.d_min, b.d_max
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    pub fn pos(&self, id: NodeId) -> Point {
        self.node(id).pos()
    }

    pub fn placed(&self, id: LinkId) -> PlacedLink {
        let l = self.link(id);
        PlacedLink {
            id,
            sender: self.pos(l.sender),
            receiver: self.pos(l.receiver),
        }
    }

    pub fn placed_set(&self, ids: &[LinkId]) -> Vec<PlacedLink> {
        ids.iter().map(|&id| self.placed(id)).collect()
    }

    pub fn length(&self, id: LinkId) -> f64 {
        self.placed(id).length()
    }

    pub fn sender(&self, id: LinkId) -> NodeId {
        self.link(id).sender
    }

    pub fn link_ids(&self) -> Vec<LinkId> {
        self.links.iter().map(|l| l.id).collect()
    }

    /// Sender nodes of `links`, in the given order.
    pub fn senders(&self, links: &[LinkId]) -> Vec<Node> {
        links.iter().map(|&l| *self.node(self.sender(l))).collect()
    }

    /// The declared length bounds, or the observed extremes when none were
    /// declared.
    pub fn length_bounds(&self) -> LengthBounds {
        if let Some(b) = self.bounds {
            return b;
        }
        let lengths = self.links.iter().map(|l| self.length(l.id));
        let d_min = lengths.clone().fold(f64::INFINITY, f64::min);
        let d_max = lengths.fold(0.0, f64::max);
        if self.links.is_empty() {
            LengthBounds { d_min: 1.0, d_max: 1.0 }
        } else {
            LengthBounds { d_min, d_max }
        }
    }

    pub fn classes(&self) -> Result<LinkClasses> {
        let b = self.length_bounds();
        let lengths: Vec<(LinkId, f64)> = self.links.iter().map(|l| (l.id, self.length(l.id))).collect();
        LinkClasses::partition(&lengths, b.d_min, b.d_max)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SinrParams {
        SinrParams::default_for(1.0)
    }

    #[test]
    fn rejects_coincident_nodes() {
        let nodes = vec![Node::new(0, 0.0, 0.0), Node::new(1, 1.0, 0.0), Node::new(2, 0.0, 0.0)];
        let e = Instance::new(params(), nodes, vec![]).unwrap_err();
        assert!(e.to_string().contains("coincident"));
    }

    #[test]
    fn rejects_shared_sender_and_role_overlap() {
        let nodes = vec![Node::new(0, 0.0, 0.0), Node::new(1, 1.0, 0.0), Node::new(2, 0.0, 1.0)];
        let links = vec![
            Link { id: LinkId(0), sender: NodeId(0), receiver: NodeId(1) },
            Link { id: LinkId(1), sender: NodeId(0), receiver: NodeId(2) },
        ];
        let e = Instance::new(params(), nodes.clone(), links).unwrap_err();
        assert!(e.to_string().contains("more than one link"));

        let links = vec![
            Link { id: LinkId(0), sender: NodeId(0), receiver: NodeId(1) },
            Link { id: LinkId(1), sender: NodeId(1), receiver: NodeId(2) },
        ];
        let e = Instance::new(params(), nodes, links).unwrap_err();
        assert!(e.to_string().contains("both a sender and a receiver"));
    }

    #[test]
    fn rejects_infeasible_and_unknown() {
        let nodes = vec![Node::new(0, 0.0, 0.0), Node::new(1, 2.0, 0.0)];
        let links = vec![Link { id: LinkId(0), sender: NodeId(0), receiver: NodeId(1) }];
        assert!(matches!(
            Instance::new(params(), nodes.clone(), links),
            Err(Error::InfeasibleLink(LinkId(0)))
        ));
        let links = vec![Link { id: LinkId(0), sender: NodeId(0), receiver: NodeId(7) }];
        assert!(matches!(
            Instance::new(params(), nodes, links),
            Err(Error::UnknownNode(NodeId(7)))
        ));
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::from_segments(
            params(),
            &[(Point::new(0.0, 0.0), Point::new(1.0, 0.0)), (Point::new(10.0, 0.1), Point::new(10.3, 0.9))],
        )
        .unwrap();
        let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(inst, back);
    }
}
