//! Named manifolds shipped with the library.

use std::sync::OnceLock;

use super::{
    build_base, build_disk, build_quotient, goldberg_coxeter, GluingTable, Schlafli, TessellationError, TileGraph,
};

const MANIFEST: &str = include_str!("../../data/manifolds/manifest.txt");

const TABLES: &[(&str, &str)] = &[
    ("bolza.glue", include_str!("../../data/manifolds/bolza.glue")),
    ("bolza2.glue", include_str!("../../data/manifolds/bolza2.glue")),
    ("elliptic.glue", include_str!("../../data/manifolds/elliptic.glue")),
    ("klein-sq.glue", include_str!("../../data/manifolds/klein-sq.glue")),
    ("kq.glue", include_str!("../../data/manifolds/kq.glue")),
    ("minimal.glue", include_str!("../../data/manifolds/minimal.glue")),
    ("torus-hex.glue", include_str!("../../data/manifolds/torus-hex.glue")),
    ("torus-rec.glue", include_str!("../../data/manifolds/torus-rec.glue")),
    ("torus-sq.glue", include_str!("../../data/manifolds/torus-sq.glue")),
    ("zebra.glue", include_str!("../../data/manifolds/zebra.glue")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Disk,
    Base,
    Table(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultEmbedding {
    Natural,
    Signpost,
    Landscape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignpostRule {
    /// Tiles whose degree is not 6.
    Irregular,
    /// Irregular tiles plus the tiles at the vertices of the base tiling.
    IrregularAndVertices,
    /// A regular grid over a row-major `cols`-wide tile numbering.
    Grid {
        cols: usize,
        col_step: usize,
        row_step: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub source: Source,
    pub schlafli: Schlafli,
    pub goldberg: (u32, u32),
    pub tiles: usize,
    pub edges: usize,
    pub euler_characteristic: Option<i64>,
    pub orientable: bool,
    pub diameter: Option<u32>,
    pub curvature: f64,
    pub embedding: DefaultEmbedding,
    pub signposts: Option<SignpostRule>,
}

impl ManifestEntry {
    pub fn is_disk(&self) -> bool {
        self.source == Source::Disk
    }
}

fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, TessellationError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| TessellationError::Manifest(format!("line {}: bad {what}", i + 1));
        if w.len() != 14 {
            return Err(bad("column count"));
        }
        let int = |s: &str, what: &str| s.parse::<i64>().map_err(|_| bad(what));
        let source = match w[1] {
            "disk" => Source::Disk,
            "base" => Source::Base,
            f => Source::Table(f.to_string()),
        };
        let signposts = match w[13] {
            "-" => None,
            "irregular" => Some(SignpostRule::Irregular),
            "irregular+vertices" => Some(SignpostRule::IrregularAndVertices),
            s if s.starts_with("grid:") => {
                let parts: Vec<&str> = s[5..].split(':').collect();
                if parts.len() != 3 {
                    return Err(bad("signpost grid"));
                }
                Some(SignpostRule::Grid {
                    cols: int(parts[0], "grid")? as usize,
                    col_step: int(parts[1], "grid")? as usize,
                    row_step: int(parts[2], "grid")? as usize,
                })
            }
            _ => return Err(bad("signposts")),
        };
        out.push(ManifestEntry {
            id: w[0].to_string(),
            source,
            schlafli: Schlafli::new(int(w[2], "p")? as usize, int(w[3], "q")? as usize)?,
            goldberg: (int(w[4], "a")? as u32, int(w[5], "b")? as u32),
            tiles: int(w[6], "tiles")? as usize,
            edges: int(w[7], "edges")? as usize,
            euler_characteristic: if w[8] == "-" { None } else { Some(int(w[8], "chi")?) },
            orientable: match w[9] {
                "yes" => true,
                "no" => false,
                _ => return Err(bad("orientable")),
            },
            diameter: if w[10] == "-" {
                None
            } else {
                Some(int(w[10], "diameter")? as u32)
            },
            curvature: w[11].parse().map_err(|_| bad("curvature"))?,
            embedding: match w[12] {
                "natural" => DefaultEmbedding::Natural,
                "signpost" => DefaultEmbedding::Signpost,
                "landscape" => DefaultEmbedding::Landscape,
                _ => return Err(bad("embedding")),
            },
            signposts,
        });
    }
    Ok(out)
}

/// All shipped manifolds, in manifest order.
pub fn manifest() -> &'static [ManifestEntry] {
    static CELL: OnceLock<Vec<ManifestEntry>> = OnceLock::new();
    CELL.get_or_init(|| parse_manifest(MANIFEST).expect("shipped manifest is well-formed"))
}

/// Looks up a manifest entry; names are case-insensitive.
pub fn entry(id: &str) -> Result<&'static ManifestEntry, TessellationError> {
    let lower = id.to_ascii_lowercase();
    manifest()
        .iter()
        .find(|e| e.id == lower)
        .ok_or_else(|| TessellationError::UnknownManifold(id.to_string()))
}

/// Text of a shipped gluing table.
pub fn gluing_table(file: &str) -> Option<&'static str> {
    TABLES.iter().find(|(f, _)| *f == file).map(|(_, t)| *t)
}

fn build_entry(e: &ManifestEntry, goldberg: (u32, u32), tiles: usize) -> Result<TileGraph, TessellationError> {
    let mut g = match &e.source {
        Source::Disk => build_disk(e.schlafli, goldberg, tiles)?,
        Source::Base => {
            let base = build_base(e.schlafli, 0)?;
            goldberg_coxeter(&base, goldberg.0, goldberg.1)?
        }
        Source::Table(file) => {
            let text = gluing_table(file)
                .ok_or_else(|| TessellationError::Manifest(format!("missing gluing table {file}")))?;
            build_quotient(&GluingTable::parse(text)?, goldberg)?
        }
    };
    g.set_name(&e.id);
    Ok(g)
}

/// Builds a shipped manifold by name.
pub fn build(id: &str) -> Result<TileGraph, TessellationError> {
    let e = entry(id)?;
    build_entry(e, e.goldberg, e.tiles)
}

/// The double-density variant: both Goldberg parameters doubled (and four
/// times as many tiles for disks).
pub fn build_double(id: &str) -> Result<TileGraph, TessellationError> {
    let e = entry(id)?;
    let (a, b) = e.goldberg;
    let mut g = build_entry(e, (2 * a, 2 * b), 4 * e.tiles)?;
    g.set_name(&format!("{}-x2", e.id));
    Ok(g)
}

/// Resolves a manifold name, accepting the `-x2` suffix for double density.
pub fn resolve(name: &str) -> Result<TileGraph, TessellationError> {
    match name.strip_suffix("-x2") {
        Some(base) => build_double(base),
        None => build(name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parses() {
        assert_eq!(manifest().len(), 19);
        assert_eq!(entry("KQ").unwrap().tiles, 528);
        assert!(matches!(entry("nope"), Err(TessellationError::UnknownManifold(_))));
    }

    #[test]
    fn every_table_is_shipped() {
        for e in manifest() {
            if let Source::Table(f) = &e.source {
                assert!(gluing_table(f).is_some(), "{f}");
            }
        }
    }
}
