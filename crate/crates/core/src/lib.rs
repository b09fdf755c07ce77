//! Blossoming trees, their closure into d-regular bipartite planar maps, and
//! the local limit of uniform such maps.

pub mod bgw;
pub mod closure;
pub mod error;
pub mod experiments;
pub mod gf;
pub mod map;
pub mod sampler;
pub mod tree;

pub use error::{Error, Result};
pub use tree::{BlossomTree, CanonicalCode, ChargeReport, Color, Node, Slot, StemKind, TreeBall};
pub use map::{Corner, HalfEdge, MapBall, MapCode, MapVertex, PlanarMap};
