//! SVG drawings of tessellations: shaded tiles (U-matrices) and embedding
//! overlays. Closed quotients are drawn as their fundamental domain plus one
//! ring of copies under the deck transformations.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{GeometryClass, GeometryError, Isometry, Point, Projection, ProjectionKind};
use crate::metrics::Embedding;
use crate::tessellation::TileGraph;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("`{0}` has no tile coordinates")]
    NoGeometry(String),
    #[error("center tile {0} out of range")]
    BadCenter(usize),
    #[error("shading has {got} values for {expected} tiles")]
    ShadingLength { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shading {
    Uniform,
    /// Per-tile scalars in grayscale, minimum black and maximum white.
    Gray(Vec<f64>),
    /// Per-tile class indices drawn from a fixed palette.
    Categories(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// Defaults to the conventional projection of the geometry.
    pub projection: Option<ProjectionKind>,
    pub center_tile: usize,
    pub shading: Shading,
    /// Draw the ring of periodic copies around a closed quotient.
    pub copies: bool,
    /// Canvas side in pixels.
    pub size: f64,
    pub stroke: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            projection: None,
            center_tile: 0,
            shading: Shading::Uniform,
            copies: true,
            size: 800.0,
            stroke: 0.5,
        }
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Stereographic images farther out than this are dropped.
const STEREO_LIMIT: f64 = 8.0;

struct Canvas {
    projection: Projection,
    geometry: GeometryClass,
    half: f64,
    size: f64,
}

impl Canvas {
    fn new(g: &TileGraph, spec: &RenderSpec) -> Result<Canvas, RenderError> {
        let centers = g.centers().ok_or_else(|| RenderError::NoGeometry(g.name().into()))?;
        let c = centers
            .get(spec.center_tile)
            .ok_or(RenderError::BadCenter(spec.center_tile))?;
        let geometry = c.geometry();
        let kind = spec.projection.unwrap_or(ProjectionKind::default_for(geometry));
        Ok(Canvas {
            projection: Projection::new(kind, *c)?,
            geometry,
            half: 1.0,
            size: spec.size,
        })
    }

    /// Projected polygon, or `None` when it falls outside the drawable part.
    fn polygon(&self, pts: &[Point]) -> Option<Vec<[f64; 2]>> {
        let mut out = Vec::with_capacity(pts.len());
        for p in pts {
            if self.projection.kind() == ProjectionKind::Orthographic && self.recentered_z(p) < 0.0 {
                return None;
            }
            let q = self.projection.project(p).ok()?;
            if self.projection.kind() == ProjectionKind::Stereographic && q[0].hypot(q[1]) > STEREO_LIMIT {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    fn recentered_z(&self, p: &Point) -> f64 {
        self.projection.recentered(p).coords()[2]
    }

    fn fit(&mut self, polys: &[Vec<[f64; 2]>]) {
        if self.projection.kind() == ProjectionKind::PoincareDisk {
            self.half = 1.02;
            return;
        }
        let m = polys
            .iter()
            .flatten()
            .map(|p| p[0].abs().max(p[1].abs()))
            .fold(0.0, f64::max);
        self.half = if m > 0.0 { m * 1.02 } else { 1.0 };
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let s = self.size / (2.0 * self.half);
        ((p[0] + self.half) * s, (self.half - p[1]) * s)
    }

    fn path(&self, poly: &[[f64; 2]]) -> String {
        let mut s = String::new();
        for (i, &p) in poly.iter().enumerate() {
            let (x, y) = self.px(p);
            let _ = write!(s, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
        }
        s
    }
}

fn fills(g: &TileGraph, shading: &Shading) -> Result<Vec<String>, RenderError> {
    let n = g.len();
    let check = |got: usize| {
        if got == n {
            Ok(())
        } else {
            Err(RenderError::ShadingLength { expected: n, got })
        }
    };
    Ok(match shading {
        Shading::Uniform => vec!["#dddddd".to_string(); n],
        Shading::Gray(v) => {
            check(v.len())?;
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v.iter()
                .map(|&x| {
                    let s = if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
                    let c = (s * 255.0).round() as u8;
                    format!("#{c:02x}{c:02x}{c:02x}")
                })
                .collect()
        }
        Shading::Categories(c) => {
            check(c.len())?;
            c.iter().map(|&k| PALETTE[k % PALETTE.len()].to_string()).collect()
        }
    })
}

/// The isometries whose images of the fundamental domain are drawn.
fn copies(g: &TileGraph, spec: &RenderSpec) -> Vec<Isometry> {
    match g.covering() {
        Some(cov) if spec.copies => cov.deck.clone(),
        _ => Vec::new(),
    }
}

struct Layers {
    tiles: Vec<(usize, Vec<[f64; 2]>)>,
    copies: Vec<(usize, Vec<[f64; 2]>)>,
}

fn layers(g: &TileGraph, canvas: &Canvas, spec: &RenderSpec) -> Result<Layers, RenderError> {
    let outlines = g.outlines().ok_or_else(|| RenderError::NoGeometry(g.name().into()))?;
    let tiles = outlines
        .iter()
        .enumerate()
        .filter_map(|(t, o)| canvas.polygon(o).map(|p| (t, p)))
        .collect();
    let mut copy_polys = Vec::new();
    for h in copies(g, spec) {
        for (t, o) in outlines.iter().enumerate() {
            let moved: Vec<Point> = o.iter().map(|p| h.apply(p)).collect();
            if let Some(p) = canvas.polygon(&moved) {
                copy_polys.push((t, p));
            }
        }
    }
    Ok(Layers {
        tiles,
        copies: copy_polys,
    })
}

fn header(out: &mut String, size: f64) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
}

fn disk_boundary(out: &mut String, canvas: &Canvas) {
    if canvas.projection.kind() == ProjectionKind::PoincareDisk {
        let (cx, cy) = canvas.px([0.0, 0.0]);
        let r = canvas.size / (2.0 * canvas.half);
        let _ = writeln!(
            out,
            r#"<circle class="boundary" cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="none" stroke="black"/>"#
        );
    }
}

fn draw_tiles(out: &mut String, canvas: &Canvas, layers: &Layers, fill: &[String], stroke: f64, copy_opacity: f64) {
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="{stroke}">"#);
    for (t, poly) in &layers.tiles {
        let _ = writeln!(
            out,
            r#"<polygon class="tile" data-tile="{t}" fill="{}" points="{}"/>"#,
            fill[*t],
            canvas.path(poly)
        );
    }
    for (t, poly) in &layers.copies {
        let _ = writeln!(
            out,
            r#"<polygon class="copy" data-tile="{t}" fill="{}" fill-opacity="{copy_opacity}" points="{}"/>"#,
            fill[*t],
            canvas.path(poly)
        );
    }
    let _ = writeln!(out, "</g>");
}

fn domain_outline(out: &mut String, g: &TileGraph, canvas: &Canvas) {
    let Some(cov) = g.covering() else {
        return;
    };
    let _ = writeln!(out, r#"<g class="domain" stroke="red" stroke-width="2" fill="none">"#);
    for seg in &cov.domain_boundary {
        if let Some(p) = canvas.polygon(seg) {
            let (x1, y1) = canvas.px(p[0]);
            let (x2, y2) = canvas.px(p[1]);
            let _ = writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
        }
    }
    let _ = writeln!(out, "</g>");
}

/// Tiles of `g` shaded per `spec`. One `polygon.tile` per drawable tile and
/// one `polygon.copy` per drawable tile of each periodic copy.
pub fn render_manifold(g: &TileGraph, spec: &RenderSpec) -> Result<String, RenderError> {
    let fill = fills(g, &spec.shading)?;
    let mut canvas = Canvas::new(g, spec)?;
    let layers = layers(g, &canvas, spec)?;
    let mut all: Vec<Vec<[f64; 2]>> = layers.tiles.iter().map(|t| t.1.clone()).collect();
    all.extend(layers.copies.iter().map(|t| t.1.clone()));
    canvas.fit(&all);
    let mut out = String::new();
    header(&mut out, spec.size);
    disk_boundary(&mut out, &canvas);
    draw_tiles(&mut out, &canvas, &layers, &fill, spec.stroke, 0.6);
    domain_outline(&mut out, g, &canvas);
    out.push_str("</svg>\n");
    Ok(out)
}

/// The target tiling in outline, one circle per origin tile at its image and
/// a segment per origin edge. Segments between images that are adjacent
/// across the domain boundary go to the nearest periodic copy.
pub fn render_embedding(emb: &Embedding, spec: &RenderSpec) -> Result<String, RenderError> {
    let g = emb.target;
    let centers = g.centers().ok_or_else(|| RenderError::NoGeometry(g.name().into()))?;
    let mut canvas = Canvas::new(g, spec)?;
    let layers = layers(g, &canvas, spec)?;
    let mut all: Vec<Vec<[f64; 2]>> = layers.tiles.iter().map(|t| t.1.clone()).collect();
    all.extend(layers.copies.iter().map(|t| t.1.clone()));
    canvas.fit(&all);
    let fill = vec!["#f4f4f4".to_string(); g.len()];
    let mut out = String::new();
    header(&mut out, spec.size);
    disk_boundary(&mut out, &canvas);
    draw_tiles(&mut out, &canvas, &layers, &fill, spec.stroke, 0.4);

    // neighbors across a corner of the domain need a product of two side pairings
    let mut images = vec![Isometry::identity(canvas.geometry)];
    if let Some(cov) = g.covering() {
        images.extend(cov.deck.iter().copied());
        for h in &cov.deck {
            images.extend(cov.deck.iter().map(|k| h.compose(k)));
        }
    }
    let _ = writeln!(out, r#"<g class="edges" stroke="blue" stroke-width="1">"#);
    for (a, b) in emb.origin.edges() {
        let (ta, tb) = (emb.assignment[a], emb.assignment[b]);
        let pa = centers[ta];
        let pb = images
            .iter()
            .map(|h| h.apply(&centers[tb]))
            .min_by(|x, y| {
                let dx = pa.distance(x).unwrap_or(f64::INFINITY);
                let dy = pa.distance(y).unwrap_or(f64::INFINITY);
                dx.total_cmp(&dy)
            })
            .unwrap_or(centers[tb]);
        let (Ok(qa), Ok(qb)) = (canvas.projection.project(&pa), canvas.projection.project(&pb)) else {
            continue;
        };
        let (x1, y1) = canvas.px(qa);
        let (x2, y2) = canvas.px(qb);
        let _ = writeln!(
            out,
            r#"<line class="edge" data-edge="{a}-{b}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g class="circles" fill="white" stroke="blue" stroke-width="1">"#
    );
    for (o, &t) in emb.assignment.iter().enumerate() {
        let Ok(q) = canvas.projection.project(&centers[t]) else {
            continue;
        };
        let r = layers
            .tiles
            .iter()
            .find(|(u, _)| *u == t)
            .map(|(_, poly)| {
                let d = poly
                    .iter()
                    .map(|v| (v[0] - q[0]).hypot(v[1] - q[1]))
                    .fold(f64::INFINITY, f64::min);
                0.3 * d * canvas.size / (2.0 * canvas.half)
            })
            .unwrap_or(2.0);
        let (cx, cy) = canvas.px(q);
        let _ = writeln!(
            out,
            r#"<circle class="image" data-origin="{o}" cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");
    domain_outline(&mut out, g, &canvas);
    out.push_str("</svg>\n");
    Ok(out)
}
