//! Combinatorial Goldberg–Coxeter subdivision.
//!
//! Every trivalent vertex of the base map is dual to a triangle whose corners
//! are the centers of the three faces around it. Each triangle gets a chart
//! on the Eisenstein lattice with corners `0`, `z`, `zρ` where `z = a + bρ`.
//! Lattice points of all charts, with points on shared edges and corners
//! identified, are the tiles of the subdivided tessellation; two tiles are
//! adjacent when their lattice points differ by a unit.

use std::collections::{BTreeSet, HashMap};

use super::eisenstein::{Eis, LatticeMap, UNITS};
use super::map::FaceMap;
use super::TessellationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum TileKey {
    Face(usize),
    Point(usize, Eis),
}

#[derive(Debug, Clone)]
pub(crate) struct Triangle {
    /// Flags around the dual vertex; `flags[2k]` and `flags[2k+1]` belong to
    /// the face at corner `k`.
    pub flags: [usize; 6],
    /// Neighbor across chart edge `k` (corner `k` → corner `k+1`), with the
    /// map from this chart to the neighbor's chart.
    pub nbr: [Option<(usize, LatticeMap)>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Corner(usize),
    Edge(usize),
    Interior,
}

enum Step {
    Hit(TileKey),
    Outside,
    Leaves(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct GcComplex {
    pub corners: [Eis; 3],
    pub triangles: Vec<Triangle>,
    pub flag_tri: Vec<Option<(usize, usize)>>,
    pub tiles: Vec<TileKey>,
    pub index: HashMap<TileKey, usize>,
    /// Cyclic neighbor order; `None` for tiles at the fringe of a patch whose
    /// neighborhood is not fully known. Inner `None` = neighbor outside.
    pub rotation: Vec<Option<Vec<Option<usize>>>>,
    /// Wedges `(triangle, entry flag index)` around each face tile, in
    /// rotation order.
    pub wedges: HashMap<usize, Vec<(usize, usize)>>,
    /// Tile at (or nearest to) the centroid of each dual triangle.
    pub vertex_tiles: Vec<usize>,
    pub face_tiles: Vec<Option<usize>>,
}

fn points_in(corners: &[Eis; 3]) -> Vec<(Eis, Place)> {
    let lo0 = corners.iter().map(|c| c.0).min().unwrap();
    let hi0 = corners.iter().map(|c| c.0).max().unwrap();
    let lo1 = corners.iter().map(|c| c.1).min().unwrap();
    let hi1 = corners.iter().map(|c| c.1).max().unwrap();
    let mut out = Vec::new();
    for x0 in lo0..=hi0 {
        for x1 in lo1..=hi1 {
            let x = Eis(x0, x1);
            if let Some(place) = classify(corners, x) {
                out.push((x, place));
            }
        }
    }
    out
}

fn edge_cross(corners: &[Eis; 3], k: usize, x: Eis) -> i64 {
    let p = corners[k];
    (corners[(k + 1) % 3] - p).cross(x - p)
}

fn classify(corners: &[Eis; 3], x: Eis) -> Option<Place> {
    let c = [0, 1, 2].map(|k| edge_cross(corners, k, x));
    if c.iter().any(|&v| v < 0) {
        return None;
    }
    if let Some(k) = corners.iter().position(|&p| p == x) {
        return Some(Place::Corner(k));
    }
    if let Some(k) = c.iter().position(|&v| v == 0) {
        return Some(Place::Edge(k));
    }
    Some(Place::Interior)
}

impl GcComplex {
    pub fn build(map: &FaceMap, a: u32, b: u32) -> Result<GcComplex, TessellationError> {
        if a == 0 && b == 0 {
            return Err(TessellationError::IllegalGoldberg {
                a,
                b,
                reason: "(0,0) is degenerate".into(),
            });
        }
        let colors = map.orientation();
        if colors.is_none() && !(b == 0 || a == b) {
            return Err(TessellationError::IllegalGoldberg {
                a,
                b,
                reason: "non-orientable surfaces need b = 0 or b = a".into(),
            });
        }
        let z = Eis(a as i64, b as i64);
        let corners = [Eis::ZERO, z, z.mul(Eis::RHO)];

        let (orbits, _) = map.vertices();
        let mut triangles = Vec::new();
        let mut flag_tri = vec![None; map.flag_count()];
        for orbit in &orbits {
            if orbit.len() != 6 {
                continue;
            }
            let start = orbit
                .iter()
                .copied()
                .filter(|&f| colors.as_ref().is_none_or(|c| c[f] == 0))
                .min()
                .unwrap();
            let mut flags = [start; 6];
            let mut complete = true;
            for i in 1..6 {
                let next = if i % 2 == 1 {
                    Some(map.sigma1(flags[i - 1]))
                } else {
                    map.sigma2(flags[i - 1])
                };
                match next {
                    Some(f) => flags[i] = f,
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete || map.sigma2(flags[5]) != Some(flags[0]) {
                continue;
            }
            let t = triangles.len();
            for (i, &f) in flags.iter().enumerate() {
                flag_tri[f] = Some((t, i));
            }
            triangles.push(Triangle { flags, nbr: [None; 3] });
        }

        for t in 0..triangles.len() {
            for k in 0..3 {
                let fl = triangles[t].flags;
                let g1 = map.sigma0(fl[2 * k + 1]);
                let g2 = map.sigma0(fl[(2 * k + 2) % 6]);
                let (Some((t1, m1)), Some((t2, m2))) = (flag_tri[g1], flag_tri[g2]) else {
                    continue;
                };
                if t1 != t2 {
                    return Err(TessellationError::Internal(
                        "edge neighbors disagree on the adjacent triangle".into(),
                    ));
                }
                let (ca, cb) = (m1 / 2, m2 / 2);
                let cc = 3 - ca - cb;
                let p = [corners[k], corners[(k + 1) % 3], corners[(k + 2) % 3]];
                let q = [corners[ca], corners[cb], corners[cc]];
                let m = LatticeMap::gluing(p, q).ok_or(TessellationError::IllegalGoldberg {
                    a,
                    b,
                    reason: "triangle charts cannot be glued consistently".into(),
                })?;
                triangles[t].nbr[k] = Some((t1, m));
            }
        }

        let mut gc = GcComplex {
            corners,
            triangles,
            flag_tri,
            tiles: Vec::new(),
            index: HashMap::new(),
            rotation: Vec::new(),
            wedges: HashMap::new(),
            vertex_tiles: Vec::new(),
            face_tiles: vec![None; map.face_count()],
        };

        let pts = points_in(&corners);
        let mut faces = BTreeSet::new();
        let mut others = BTreeSet::new();
        for t in 0..gc.triangles.len() {
            for &(x, place) in &pts {
                match gc.key_at(map, t, x, place) {
                    TileKey::Face(f) => faces.insert(f),
                    k => others.insert(k),
                };
            }
        }
        for f in faces {
            gc.face_tiles[f] = Some(gc.tiles.len());
            gc.index.insert(TileKey::Face(f), gc.tiles.len());
            gc.tiles.push(TileKey::Face(f));
        }
        for k in others {
            gc.index.insert(k, gc.tiles.len());
            gc.tiles.push(k);
        }

        // first wedge of each face tile
        let mut first_wedge: HashMap<usize, (usize, usize)> = HashMap::new();
        for (t, tri) in gc.triangles.iter().enumerate() {
            for c in 0..3 {
                let f = map.flag_face(tri.flags[2 * c]);
                first_wedge.entry(f).or_insert((t, 2 * c + 1));
            }
        }

        let mut rotation = Vec::with_capacity(gc.tiles.len());
        for i in 0..gc.tiles.len() {
            let rot = match gc.tiles[i] {
                TileKey::Face(f) => {
                    let start = first_wedge[&f];
                    match gc.walk_face(map, start)? {
                        Some((rot, wedges)) => {
                            gc.wedges.insert(i, wedges);
                            Some(rot)
                        }
                        None => None,
                    }
                }
                TileKey::Point(t, x) => gc.point_rotation(map, t, x)?,
            };
            rotation.push(rot);
        }
        gc.rotation = rotation;

        for t in 0..gc.triangles.len() {
            let c = gc.centroid_point();
            let place = classify(&corners, c).expect("centroid lies in the triangle");
            let key = gc.key_at(map, t, c, place);
            gc.vertex_tiles.push(gc.index[&key]);
        }
        Ok(gc)
    }

    fn key_at(&self, map: &FaceMap, t: usize, x: Eis, place: Place) -> TileKey {
        match place {
            Place::Corner(k) => TileKey::Face(map.flag_face(self.triangles[t].flags[2 * k])),
            Place::Edge(k) => {
                let here = TileKey::Point(t, x);
                match self.triangles[t].nbr[k] {
                    Some((t2, m)) => here.min(TileKey::Point(t2, m.apply(x))),
                    None => here,
                }
            }
            Place::Interior => TileKey::Point(t, x),
        }
    }

    pub fn key(&self, map: &FaceMap, t: usize, x: Eis) -> Option<TileKey> {
        classify(&self.corners, x).map(|p| self.key_at(map, t, x, p))
    }

    /// The lattice point of a chart closest to its centroid.
    pub fn centroid_point(&self) -> Eis {
        let s = self.corners[0] + self.corners[1] + self.corners[2];
        if s.0 % 3 == 0 && s.1 % 3 == 0 {
            return Eis(s.0 / 3, s.1 / 3);
        }
        let [cx, cy] = s.to_real();
        let (cx, cy) = (cx / 3.0, cy / 3.0);
        points_in(&self.corners)
            .into_iter()
            .map(|(x, _)| {
                let [px, py] = x.to_real();
                (((px - cx).powi(2) + (py - cy).powi(2)), x)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .unwrap()
            .1
    }

    fn step(&self, map: &FaceMap, t: usize, x: Eis, dir: Eis) -> Result<Step, TessellationError> {
        let y = x + dir;
        if let Some(place) = classify(&self.corners, y) {
            return Ok(Step::Hit(self.key_at(map, t, y, place)));
        }
        let mut best: Option<(usize, i64, i64)> = None;
        for k in 0..3 {
            let cy = edge_cross(&self.corners, k, y);
            if cy >= 0 {
                continue;
            }
            let cx = edge_cross(&self.corners, k, x);
            if cx == 0 {
                return Ok(Step::Leaves(k));
            }
            let (num, den) = (cx, cx - cy);
            best = match best {
                None => Some((k, num, den)),
                Some((bk, bn, bd)) => {
                    let lhs = num * bd;
                    let rhs = bn * den;
                    if lhs == rhs {
                        return Err(TessellationError::Internal(
                            "lattice step passes through a triangle corner".into(),
                        ));
                    }
                    if lhs < rhs {
                        Some((k, num, den))
                    } else {
                        Some((bk, bn, bd))
                    }
                }
            };
        }
        let (k, _, _) = best.expect("point outside the triangle crosses some edge");
        let Some((t2, m)) = self.triangles[t].nbr[k] else {
            return Ok(Step::Outside);
        };
        let y2 = m.apply(y);
        match classify(&self.corners, y2) {
            Some(place) => Ok(Step::Hit(self.key_at(map, t2, y2, place))),
            None => Err(TessellationError::Internal(
                "lattice step crosses more than two triangles".into(),
            )),
        }
    }

    fn point_rotation(&self, map: &FaceMap, t: usize, x: Eis) -> Result<Option<Vec<Option<usize>>>, TessellationError> {
        let mut rot = Vec::with_capacity(6);
        for dir in UNITS {
            let key = match self.step(map, t, x, dir)? {
                Step::Hit(k) => Some(k),
                Step::Outside => None,
                Step::Leaves(k) => match self.triangles[t].nbr[k] {
                    None => None,
                    Some((t2, m)) => match self.step(map, t2, m.apply(x), m.linear(dir))? {
                        Step::Hit(k) => Some(k),
                        Step::Outside => None,
                        Step::Leaves(_) => {
                            return Err(TessellationError::Internal(
                                "edge point leaves both adjacent triangles".into(),
                            ))
                        }
                    },
                },
            };
            rot.push(key.map(|k| self.index[&k]));
        }
        Ok(Some(rot))
    }

    /// Units pointing into the wedge at corner `c`, from the entry ray
    /// (included) to the exit ray (excluded).
    pub fn wedge_units(&self, m: usize) -> Vec<Eis> {
        let c = m / 2;
        let pc = self.corners[c];
        let next = self.corners[(c + 1) % 3] - pc;
        let prev = self.corners[(c + 2) % 3] - pc;
        let ccw = m % 2 == 1;
        let (r1, r2) = if ccw { (next, prev) } else { (prev, next) };
        let mut units: Vec<Eis> = UNITS
            .iter()
            .copied()
            .filter(|&u| {
                let (a, b) = (r1.cross(u), u.cross(r2));
                let inside = if ccw { a >= 0 && b >= 0 } else { a <= 0 && b <= 0 };
                inside && b != 0
            })
            .collect();
        units.sort_by_key(|&u| r1.cross(u).abs());
        units
    }

    /// Sector directions (sums of consecutive units) inside a wedge; these
    /// point at the corners of the face tile's outline.
    pub fn wedge_sectors(&self, m: usize) -> Vec<Eis> {
        let c = m / 2;
        let pc = self.corners[c];
        let next = self.corners[(c + 1) % 3] - pc;
        let prev = self.corners[(c + 2) % 3] - pc;
        let ccw = m % 2 == 1;
        let (r1, r2) = if ccw { (next, prev) } else { (prev, next) };
        let mut dirs: Vec<Eis> = (0..6)
            .map(|k| UNITS[k] + UNITS[(k + 1) % 6])
            .filter(|&u| {
                let (a, b) = (r1.cross(u), u.cross(r2));
                let inside = if ccw { a >= 0 && b >= 0 } else { a <= 0 && b <= 0 };
                inside && b != 0
            })
            .collect();
        dirs.sort_by_key(|&u| r1.cross(u).abs());
        dirs
    }

    #[allow(clippy::type_complexity)]
    fn walk_face(
        &self,
        map: &FaceMap,
        start: (usize, usize),
    ) -> Result<Option<(Vec<Option<usize>>, Vec<(usize, usize)>)>, TessellationError> {
        let mut rot = Vec::new();
        let mut wedges = Vec::new();
        let (mut t, mut m) = start;
        for _ in 0..=map.flag_count() {
            wedges.push((t, m));
            let pc = self.corners[m / 2];
            for u in self.wedge_units(m) {
                let key = self
                    .key(map, t, pc + u)
                    .ok_or_else(|| TessellationError::Internal("wedge neighbor outside its triangle".into()))?;
                rot.push(Some(self.index[&key]));
            }
            let exit = if m % 2 == 1 { m - 1 } else { m + 1 };
            let g = map.sigma0(self.triangles[t].flags[exit]);
            match self.flag_tri[g] {
                None => return Ok(None),
                Some(next) if next == start => return Ok(Some((rot, wedges))),
                Some(next) => (t, m) = next,
            }
        }
        Err(TessellationError::Internal("face walk did not close".into()))
    }
}
