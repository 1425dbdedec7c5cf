//! Tessellations of constant-curvature surfaces and their tile graphs.
//!
//! The pipeline is: a base `{p,3}` tiling (a geometric patch, a platonic
//! solid, or a quotient given by a [`GluingTable`]) is turned into a
//! [`BaseTiling`], which is then subdivided by the Goldberg–Coxeter
//! construction into a [`TileGraph`].

mod base;
pub mod catalog;
mod eisenstein;
mod goldberg;
mod graph;
mod map;
mod symmetry;
mod zigzag;

use std::fmt;

use thiserror::Error;

use crate::geometry::GeometryClass;

pub use base::{build_base, build_disk, build_quotient, goldberg_coxeter, BaseTiling};
pub use graph::{Covering, DistanceTable, TileGraph, TileMeta};
pub use map::{FaceMap, Gluing, GluingTable};
pub use symmetry::{orbits, symmetries, Orbits};
pub use zigzag::{components_without, line_regions, separating_lines, zigzag_lines, ZigZagLine};

#[derive(Debug, Error)]
pub enum TessellationError {
    #[error("invalid Schläfli symbol {{{p},{q}}}: {reason}")]
    InvalidSchlafli { p: usize, q: usize, reason: String },
    #[error("gluing table parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("side {side} of face {face} is not glued to anything")]
    UnpairedSide { face: usize, side: usize },
    #[error("side {side} of face {face} is glued more than once")]
    SideGluedTwice { face: usize, side: usize },
    #[error("face {face} referenced in a gluing does not exist (or side {side} out of range)")]
    BadFaceReference { face: usize, side: usize },
    #[error("vertex valence {valence} found where 3 was expected")]
    BadValence { valence: usize },
    #[error("all faces must have the same number of sides")]
    MixedFaces,
    #[error("Goldberg-Coxeter parameters ({a},{b}) are not allowed here: {reason}")]
    IllegalGoldberg { a: u32, b: u32, reason: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("tile count must be at least 1")]
    EmptyDisk,
    #[error("operation requires a disk, got a closed manifold")]
    NotADisk,
    #[error("operation requires a closed manifold, got a disk")]
    NotClosed,
    #[error("zig-zag lines need valence-3 vertices")]
    NotTrivalent,
    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("internal construction error: {0}")]
    Internal(String),
}

/// A regular tessellation `{p,q}`: `p`-gons, `q` around each vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schlafli {
    pub p: usize,
    pub q: usize,
}

impl Schlafli {
    pub fn new(p: usize, q: usize) -> Result<Schlafli, TessellationError> {
        if p < 3 || q < 3 {
            return Err(TessellationError::InvalidSchlafli {
                p,
                q,
                reason: "both entries must be at least 3".into(),
            });
        }
        Ok(Schlafli { p, q })
    }

    pub fn geometry(&self) -> GeometryClass {
        GeometryClass::of_schlafli(self.p, self.q)
    }
}

impl fmt::Display for Schlafli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.p, self.q)
    }
}

/// Number of tiles of `GC(a,b)` applied to a closed `{p,3}` map with `u` faces.
///
/// Every dual triangle contributes `(A−1)/2` new hexagons, where
/// `A = ((2a+b)² + 3b²)/4 = a² + ab + b²`.
pub fn goldberg_tile_count(u: usize, p: usize, a: u32, b: u32) -> usize {
    let (a, b) = (a as usize, b as usize);
    let area = ((2 * a + b).pow(2) + 3 * b * b) / 4;
    let triangles = p * u / 3;
    u + (area - 1) * triangles / 2
}
