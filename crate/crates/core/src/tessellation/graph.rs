use std::collections::VecDeque;

use rayon::prelude::*;

use super::{Schlafli, TessellationError};
use crate::geometry::{GeometryClass, Isometry, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct TileMeta {
    pub name: String,
    pub geometry: GeometryClass,
    pub closed: bool,
    pub orientable: bool,
    pub euler_characteristic: Option<i64>,
    pub schlafli: Schlafli,
    pub goldberg: (u32, u32),
}

/// How a closed quotient sits in its covering space: the deck transformations
/// that map the unfolded fundamental domain to its neighbors, and the outline
/// of that domain.
#[derive(Debug, Clone)]
pub struct Covering {
    pub deck: Vec<Isometry>,
    pub domain_boundary: Vec<[Point; 2]>,
}

/// A finite tessellation seen as a graph: tiles are vertices, tiles sharing a
/// side are adjacent.
#[derive(Debug, Clone)]
pub struct TileGraph {
    rotation: Vec<Vec<Option<usize>>>,
    adjacency: Vec<Vec<usize>>,
    centers: Option<Vec<Point>>,
    outlines: Option<Vec<Vec<Point>>>,
    base_faces: Vec<usize>,
    base_vertices: Vec<usize>,
    covering: Option<Covering>,
    meta: TileMeta,
}

impl TileGraph {
    /// Builds a graph from cyclic neighbor lists. `None` entries stand for
    /// neighbors outside the sample (disk boundaries).
    pub fn from_rotation(rotation: Vec<Vec<Option<usize>>>, meta: TileMeta) -> Result<TileGraph, TessellationError> {
        let n = rotation.len();
        let mut adjacency = Vec::with_capacity(n);
        for (i, rot) in rotation.iter().enumerate() {
            let mut adj: Vec<usize> = Vec::with_capacity(rot.len());
            for &j in rot.iter().flatten() {
                if j >= n || j == i {
                    return Err(TessellationError::Internal(format!("bad neighbor {j} of tile {i}")));
                }
                if !adj.contains(&j) {
                    adj.push(j);
                }
            }
            adjacency.push(adj);
        }
        for (i, adj) in adjacency.iter().enumerate() {
            for &j in adj {
                if !adjacency[j].contains(&i) {
                    return Err(TessellationError::Internal(format!(
                        "adjacency not symmetric between {i} and {j}"
                    )));
                }
            }
        }
        Ok(TileGraph {
            rotation,
            adjacency,
            centers: None,
            outlines: None,
            base_faces: Vec::new(),
            base_vertices: Vec::new(),
            covering: None,
            meta,
        })
    }

    /// A plain graph with no phantom neighbors, mainly for small examples.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, name: &str) -> Result<TileGraph, TessellationError> {
        let rotation = adjacency.iter().map(|a| a.iter().map(|&j| Some(j)).collect()).collect();
        TileGraph::from_rotation(
            rotation,
            TileMeta {
                name: name.to_string(),
                geometry: GeometryClass::Euclidean,
                closed: true,
                orientable: true,
                euler_characteristic: None,
                schlafli: Schlafli { p: 6, q: 3 },
                goldberg: (1, 0),
            },
        )
    }

    pub(crate) fn set_centers(&mut self, centers: Vec<Point>) {
        debug_assert_eq!(centers.len(), self.len());
        self.centers = Some(centers);
    }

    pub(crate) fn set_outlines(&mut self, outlines: Vec<Vec<Point>>) {
        self.outlines = Some(outlines);
    }

    pub(crate) fn set_landmarks(&mut self, base_faces: Vec<usize>, base_vertices: Vec<usize>) {
        self.base_faces = base_faces;
        self.base_vertices = base_vertices;
    }

    pub(crate) fn set_covering(&mut self, covering: Covering) {
        self.covering = Some(covering);
    }

    pub fn meta(&self) -> &TileMeta {
        &self.meta
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.meta.name = name.to_string();
    }

    pub fn len(&self) -> usize {
        self.rotation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotation.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.meta.closed
    }

    /// Polygon size of a tile (including sides facing outside a disk).
    pub fn sides(&self, t: usize) -> usize {
        self.rotation[t].len()
    }

    pub fn neighbors(&self, t: usize) -> &[usize] {
        &self.adjacency[t]
    }

    pub fn rotation(&self, t: usize) -> &[Option<usize>] {
        &self.rotation[t]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &j in adj {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn centers(&self) -> Option<&[Point]> {
        self.centers.as_deref()
    }

    pub fn outlines(&self) -> Option<&[Vec<Point>]> {
        self.outlines.as_deref()
    }

    pub fn covering(&self) -> Option<&Covering> {
        self.covering.as_ref()
    }

    /// Tiles that come from faces of the base tiling before subdivision.
    pub fn base_face_tiles(&self) -> &[usize] {
        &self.base_faces
    }

    /// Tiles sitting at (or closest to) the vertices of the base tiling.
    pub fn base_vertex_tiles(&self) -> &[usize] {
        &self.base_vertices
    }

    /// Number of tiles with each polygon size, indexed by side count.
    pub fn side_histogram(&self) -> Vec<usize> {
        let max = self.rotation.iter().map(Vec::len).max().unwrap_or(0);
        let mut h = vec![0; max + 1];
        for r in &self.rotation {
            h[r.len()] += 1;
        }
        h
    }

    /// `V − E + F` of the tiling, for closed manifolds with trivalent vertices.
    pub fn computed_euler_characteristic(&self) -> Option<i64> {
        if !self.meta.closed {
            return None;
        }
        let corners: usize = self.rotation.iter().map(Vec::len).sum();
        if !corners.is_multiple_of(3) {
            return None;
        }
        Some(self.len() as i64 - self.edge_count() as i64 + (corners / 3) as i64)
    }

    /// `2q/(q−2) − v` with `v` the mean polygon size.
    pub fn discrete_curvature(&self) -> f64 {
        let q = self.meta.schlafli.q as f64;
        let mean = self.rotation.iter().map(Vec::len).sum::<usize>() as f64 / self.len() as f64;
        2.0 * q / (q - 2.0) - mean
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.bfs(0).iter().all(|&d| d != u32::MAX)
    }

    /// Hop distances from `src`; `u32::MAX` marks unreachable tiles.
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distances(&self) -> Result<DistanceTable, TessellationError> {
        let n = self.len();
        let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|i| self.bfs(i)).collect();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.contains(&u32::MAX) {
                return Err(TessellationError::Disconnected);
            }
            data.extend(row.into_iter().map(|d| d as u16));
        }
        Ok(DistanceTable { n, data })
    }
}

/// All-pairs hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    data: Vec<u16>,
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j] as u32
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0) as u32
    }

    pub fn mean(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let s: u64 = self.data.iter().map(|&d| d as u64).sum();
        s as f64 / (self.n * (self.n - 1)) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> TileGraph {
        let adj = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
        TileGraph::from_adjacency(adj, "cycle").unwrap()
    }

    #[test]
    fn cycle_distances() {
        let g = cycle(7);
        let d = g.distances().unwrap();
        assert_eq!(d.diameter(), 3);
        assert_eq!(d.get(0, 4), 3);
        assert_eq!(d.get(2, 2), 0);
        assert_eq!(g.edge_count(), 7);
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        assert!(TileGraph::from_adjacency(vec![vec![1], vec![]], "bad").is_err());
    }

    #[test]
    fn disconnected_distances_fail() {
        let g = TileGraph::from_adjacency(vec![vec![], vec![]], "two").unwrap();
        assert!(matches!(g.distances(), Err(TessellationError::Disconnected)));
        assert!(!g.is_connected());
    }
}
