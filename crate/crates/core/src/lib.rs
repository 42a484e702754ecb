// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Distributed maximum link scheduling under the SINR model with physical
//! carrier sensing.
//!
//! The crate is layered bottom-up: [`geometry`] and [`sinr`] hold the pure
//! physics, [`sim`] is a slot-synchronous radio simulator, [`ruling`],
//! [`scheduler`] and [`adaptive`] are the distributed protocols running on
//! it, [`oracle`] holds exact and sequential baselines, and [`harness`]
//! generates instances and runs experiments.

pub mod adaptive;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod ruling;
pub mod scheduler;
pub mod sim;
pub mod sinr;

pub use error::{Error, Result};
pub use geometry::{Link, LinkClasses, LinkId, Node, NodeId, PlacedLink, Point};
pub use instance::{Instance, LengthBounds};
pub use sim::Duplex;
pub use sinr::SinrParams;
