//! Synthetic datasets: one sample per tile of an original manifold, placed
//! in `R^d` by one of three embeddings.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::geometry::GeometryClass;
use crate::som::{Dataset, SomError};
use crate::tessellation::catalog::{DefaultEmbedding, ManifestEntry, SignpostRule};
use crate::tessellation::{separating_lines, zigzag_lines, TessellationError, TileGraph};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("no natural embedding for `{0}` (spheres and tori only)")]
    NoNaturalEmbedding(String),
    #[error("only {0} signposts available, at least 2 needed")]
    TooFewSignposts(usize),
    #[error("landscape embeddings need a disk")]
    NotADisk,
    #[error("landscape dimension must be at least 1")]
    ZeroDimension,
    #[error("torus lattice could not be recovered: {0}")]
    Lattice(String),
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv: {0}")]
    CsvFormat(String),
}

/// How the samples were produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Natural,
    Signpost(SignpostRule),
    LandscapeRandom { dim: usize, seed: u64 },
    LandscapeDeterministic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Natural => "natural",
            Method::Signpost(_) => "signpost",
            Method::LandscapeRandom { .. } => "landscape",
            Method::LandscapeDeterministic => "landscape-det",
        }
    }
}

/// A dataset whose `i`-th sample is the image of tile `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldDataset {
    pub data: Dataset,
    pub method: Method,
}

fn finish(samples: Vec<Vec<f64>>, method: Method) -> Result<ManifoldDataset, DatagenError> {
    let n = samples.len();
    let data = Dataset::new(samples)?.with_source_tiles((0..n).collect());
    Ok(ManifoldDataset { data, method })
}

/// Reduced basis of the translation lattice of a Euclidean torus.
fn torus_basis(g: &TileGraph) -> Result<([f64; 2], [f64; 2]), DatagenError> {
    let cov = g
        .covering()
        .ok_or_else(|| DatagenError::Lattice("no covering data".into()))?;
    let mut vecs: Vec<[f64; 2]> = cov
        .deck
        .iter()
        .map(|d| {
            let m = d.matrix();
            [m[0][2], m[1][2]]
        })
        .filter(|v| v[0].hypot(v[1]) > 1e-9)
        .collect();
    let len = |v: &[f64; 2]| v[0].hypot(v[1]);
    vecs.sort_by(|a, b| len(a).total_cmp(&len(b)));
    let v1 = *vecs
        .first()
        .ok_or_else(|| DatagenError::Lattice("no translations".into()))?;
    let v2 = *vecs
        .iter()
        .find(|v| (v1[0] * v[1] - v1[1] * v[0]).abs() > 1e-6 * len(&v1) * len(v))
        .ok_or_else(|| DatagenError::Lattice("translations are parallel".into()))?;
    let (mut a, mut b) = (v1, v2);
    // Lagrange–Gauss reduction
    loop {
        if len(&a) > len(&b) {
            std::mem::swap(&mut a, &mut b);
        }
        let mu = ((a[0] * b[0] + a[1] * b[1]) / (a[0] * a[0] + a[1] * a[1])).round();
        if mu == 0.0 {
            break;
        }
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
    }
    let det = a[0] * b[1] - a[1] * b[0];
    for v in &vecs {
        let x = (v[0] * b[1] - v[1] * b[0]) / det;
        let y = (a[0] * v[1] - a[1] * v[0]) / det;
        if (x - x.round()).abs() > 1e-6 || (y - y.round()).abs() > 1e-6 {
            return Err(DatagenError::Lattice("translations generate a finer lattice".into()));
        }
    }
    Ok((a, b))
}

/// Sphere: tile centers. Tori: one circle per lattice direction (three for
/// the hexagonal lattice), of radius loop length / 2π in units of the tile
/// spacing, so neighboring tiles are roughly unit distance apart.
pub fn natural_embedding(g: &TileGraph) -> Result<ManifoldDataset, DatagenError> {
    let meta = g.meta();
    let centers = g
        .centers()
        .ok_or_else(|| DatagenError::NoNaturalEmbedding(g.name().to_string()))?;
    match meta.geometry {
        GeometryClass::Spherical if meta.closed && meta.orientable => {
            let samples = centers.iter().map(|c| c.coords().to_vec()).collect();
            finish(samples, Method::Natural)
        }
        GeometryClass::Euclidean if meta.closed && meta.orientable => {
            let (a, b) = torus_basis(g)?;
            let spacing = g
                .edges()
                .iter()
                .map(|&(i, j)| centers[i].distance(&centers[j]).unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min);
            let len = |v: &[f64; 2]| v[0].hypot(v[1]);
            let cos = (a[0] * b[0] + a[1] * b[1]) / (len(&a) * len(&b));
            let hexagonal = (len(&a) - len(&b)).abs() < 1e-6 * len(&a) && (cos.abs() - 0.5).abs() < 1e-6;
            let det = a[0] * b[1] - a[1] * b[0];
            let origin = centers[0].coords();
            let samples = centers
                .iter()
                .map(|c| {
                    let [x, y, _] = c.coords();
                    let (x, y) = (x - origin[0], y - origin[1]);
                    let alpha = (x * b[1] - y * b[0]) / det;
                    let beta = (a[0] * y - a[1] * x) / det;
                    let mut circles = vec![(alpha, len(&a)), (beta, len(&b))];
                    if hexagonal {
                        // third axis: the lattice vector a ∓ b of the same length
                        let gamma = if cos > 0.0 { -(alpha + beta) } else { beta - alpha };
                        circles.push((gamma, len(&a)));
                    }
                    circles
                        .into_iter()
                        .flat_map(|(phase, period)| {
                            let r = period / spacing / (2.0 * PI);
                            let th = 2.0 * PI * phase;
                            [r * th.cos(), r * th.sin()]
                        })
                        .collect()
                })
                .collect();
            finish(samples, Method::Natural)
        }
        _ => Err(DatagenError::NoNaturalEmbedding(g.name().to_string())),
    }
}

/// Tiles chosen as signposts by `rule`.
pub fn signposts(g: &TileGraph, rule: &SignpostRule) -> Vec<usize> {
    let irregular = || (0..g.len()).filter(|&t| g.sides(t) != 6);
    let mut out: Vec<usize> = match *rule {
        SignpostRule::Irregular => irregular().collect(),
        SignpostRule::IrregularAndVertices => irregular().chain(g.base_vertex_tiles().iter().copied()).collect(),
        SignpostRule::Grid {
            cols,
            col_step,
            row_step,
        } => {
            let faces = g.base_face_tiles();
            (0..faces.len())
                .filter(|&f| (f % cols) % col_step.max(1) == 0 && (f / cols) % row_step.max(1) == 0)
                .map(|f| faces[f])
                .collect()
        }
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Coordinates are the hop distances to each signpost.
pub fn signpost_embedding(g: &TileGraph, rule: &SignpostRule) -> Result<ManifoldDataset, DatagenError> {
    let posts = signposts(g, rule);
    if posts.len() < 2 {
        return Err(DatagenError::TooFewSignposts(posts.len()));
    }
    let dist: Vec<Vec<u32>> = posts.iter().map(|&s| g.bfs(s)).collect();
    let samples = (0..g.len())
        .map(|t| dist.iter().map(|d| d[t] as f64).collect())
        .collect();
    finish(samples, Method::Signpost(*rule))
}

/// `m(t) = Σ v_l` over the zig-zag lines `l` separating `t` from the central
/// tile 0. Random mode draws every `v_l` from a standard normal in `R^dim`.
pub fn landscape_embedding(g: &TileGraph, dim: usize, seed: u64) -> Result<ManifoldDataset, DatagenError> {
    if dim == 0 {
        return Err(DatagenError::ZeroDimension);
    }
    let (lines, sep) = landscape_lines(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<Vec<f64>> = (0..lines)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let samples = sep
        .iter()
        .map(|ls| {
            let mut m = vec![0.0; dim];
            for &l in ls {
                for (mi, vi) in m.iter_mut().zip(&vectors[l]) {
                    *mi += vi;
                }
            }
            m
        })
        .collect();
    finish(samples, Method::LandscapeRandom { dim, seed })
}

/// Landscape with a distinct unit vector per line, so the dimension equals
/// the number of lines.
pub fn landscape_deterministic(g: &TileGraph) -> Result<ManifoldDataset, DatagenError> {
    let (lines, sep) = landscape_lines(g)?;
    if lines == 0 {
        return Err(DatagenError::ZeroDimension);
    }
    let samples = sep
        .iter()
        .map(|ls| {
            let mut m = vec![0.0; lines];
            for &l in ls {
                m[l] = 1.0;
            }
            m
        })
        .collect();
    finish(samples, Method::LandscapeDeterministic)
}

fn landscape_lines(g: &TileGraph) -> Result<(usize, Vec<Vec<usize>>), DatagenError> {
    if g.is_closed() {
        return Err(DatagenError::NotADisk);
    }
    let lines = zigzag_lines(g)?;
    let sep = separating_lines(g, &lines, 0);
    Ok((lines.len(), sep))
}

/// Default landscape dimension.
pub const LANDSCAPE_DIM: usize = 60;

/// The manifest's embedding for a shipped manifold.
pub fn default_embedding(g: &TileGraph, entry: &ManifestEntry, seed: u64) -> Result<ManifoldDataset, DatagenError> {
    match entry.embedding {
        DefaultEmbedding::Natural => natural_embedding(g),
        DefaultEmbedding::Signpost => signpost_embedding(g, &entry.signposts.unwrap_or(SignpostRule::Irregular)),
        DefaultEmbedding::Landscape => landscape_embedding(g, LANDSCAPE_DIM, seed),
    }
}

/// Writes one row per sample: coordinates `x0..`, then `tile_id`.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<(), DatagenError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..data.dim()).map(|i| format!("x{i}")).collect();
    header.push("tile_id".into());
    w.write_record(&header)?;
    for (i, s) in data.samples().enumerate() {
        let mut row: Vec<String> = s.iter().map(|v| format!("{v:?}")).collect();
        row.push(data.source_tiles().map_or(i, |t| t[i]).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| DatagenError::CsvFormat(e.to_string()))?;
    Ok(())
}

/// Reads a CSV with a header row. Numeric columns become coordinates; a
/// `tile_id` column becomes the source tiles and at most one non-numeric
/// column becomes the labels.
pub fn read_csv(path: &Path) -> Result<Dataset, DatagenError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let rows: Vec<csv::StringRecord> = r.records().collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(DatagenError::Som(SomError::EmptyDataset));
    }
    let numeric = |c: usize| {
        rows.iter()
            .all(|row| row.get(c).is_some_and(|v| v.trim().parse::<f64>().is_ok()))
    };
    let tile_col = header.iter().position(|h| h == "tile_id");
    let label_cols: Vec<usize> = (0..header.len())
        .filter(|&c| Some(c) != tile_col && !numeric(c))
        .collect();
    if label_cols.len() > 1 {
        return Err(DatagenError::CsvFormat(format!(
            "{} non-numeric columns, at most one allowed",
            label_cols.len()
        )));
    }
    let value_cols: Vec<usize> = (0..header.len())
        .filter(|&c| Some(c) != tile_col && !label_cols.contains(&c))
        .collect();
    let samples = rows
        .iter()
        .map(|row| {
            value_cols
                .iter()
                .map(|&c| row[c].trim().parse::<f64>().unwrap())
                .collect()
        })
        .collect();
    let mut data = Dataset::new(samples)?;
    if let Some(&c) = label_cols.first() {
        data = data.with_labels(rows.iter().map(|row| row[c].to_string()).collect());
    }
    if let Some(c) = tile_col {
        let tiles: Result<Vec<usize>, _> = rows.iter().map(|row| row[c].trim().parse::<usize>()).collect();
        let tiles = tiles.map_err(|_| DatagenError::CsvFormat("bad tile_id".into()))?;
        data = data.with_source_tiles(tiles);
    }
    Ok(data)
}
