//! Self-organizing maps whose neurons are the tiles of spherical, Euclidean
//! and hyperbolic tessellations, closed or open.
//!
//! * [`geometry`]: model surfaces, distances, isometries, projections.
//! * [`tessellation`]: base tilings, Goldberg–Coxeter subdivision, quotients,
//!   disks, zig-zag lines and the shipped manifold catalog.
//! * [`dispersion`]: random-walk dispersion tables and the Gaussian baseline.
//! * [`som`]: training and U-matrices.
//! * [`datagen`]: synthetic datasets obtained by embedding a manifold.
//! * [`metrics`]: embedding quality measures and the Wilcoxon test.
//! * [`render`]: SVG output.
//! * [`harness`]: experiment configuration, runs and comparisons.

pub mod datagen;
pub mod dispersion;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod render;
pub mod som;
pub mod tessellation;
