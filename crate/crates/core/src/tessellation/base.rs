//! Base tilings with geometry, and their Goldberg–Coxeter subdivisions.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use super::eisenstein::{Eis, UNITS};
use super::goldberg::{GcComplex, TileKey};
use super::graph::{Covering, TileGraph, TileMeta};
use super::map::{FaceMap, GluingTable};
use super::{Schlafli, TessellationError};
use crate::geometry::{regular_polygon_radii, GeometryClass, Isometry, Point};

const MAX_PATCH_FACES: usize = 200_000;

/// A `{p,q}` map together with a placement of every face in the covering
/// surface (one lift per face).
#[derive(Debug, Clone)]
pub struct BaseTiling {
    map: FaceMap,
    frames: Vec<Isometry>,
    schlafli: Schlafli,
    orientable: bool,
    /// Darts whose gluing is not realized by the placement (quotients only).
    cut_darts: Vec<usize>,
    name: String,
}

fn side_angle(p: usize, s: usize) -> f64 {
    2.0 * PI * (s as f64 + 0.5) / p as f64
}

fn corner_angle(p: usize, k: usize) -> f64 {
    2.0 * PI * k as f64 / p as f64
}

/// Spatial hash of face centers; lookups tolerate rounding noise.
#[derive(Default)]
struct CenterIndex {
    cells: HashMap<(i64, i64, i64), Vec<(Point, usize)>>,
}

impl CenterIndex {
    const CELL: f64 = 1e-2;

    fn cell(p: &Point) -> (i64, i64, i64) {
        let [x, y, z] = p.coords();
        let r = |v: f64| (v / Self::CELL).floor() as i64;
        (r(x), r(y), r(z))
    }

    fn insert(&mut self, p: Point, face: usize) {
        self.cells.entry(Self::cell(&p)).or_default().push((p, face));
    }

    fn find(&self, p: &Point) -> Option<usize> {
        let (cx, cy, cz) = Self::cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(v) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) else {
                        continue;
                    };
                    for (q, f) in v {
                        if q.distance(p).is_ok_and(|d| d < 1e-4) {
                            return Some(*f);
                        }
                    }
                }
            }
        }
        None
    }
}

impl BaseTiling {
    pub fn map(&self) -> &FaceMap {
        &self.map
    }

    pub fn schlafli(&self) -> Schlafli {
        self.schlafli
    }

    pub fn geometry(&self) -> GeometryClass {
        self.schlafli.geometry()
    }

    pub fn is_closed(&self) -> bool {
        self.map.is_closed()
    }

    pub fn is_orientable(&self) -> bool {
        self.orientable
    }

    pub fn frame(&self, face: usize) -> &Isometry {
        &self.frames[face]
    }

    pub fn face_center(&self, face: usize) -> Point {
        self.frames[face].apply(&Point::origin(self.geometry()))
    }

    fn radii(&self) -> (f64, f64) {
        regular_polygon_radii(self.schlafli.p, self.schlafli.q)
    }

    /// Frame of the face across side `side` of a face placed at `frame`.
    fn neighbor_frame(&self, frame: &Isometry, side: usize, other_side: usize, reversed: bool) -> Isometry {
        let g = self.geometry();
        let p = self.schlafli.p;
        let (_, r_in) = self.radii();
        let mut f = frame
            .compose(&Isometry::rotation(g, side_angle(p, side)))
            .compose(&Isometry::translation_x(g, 2.0 * r_in))
            .compose(&Isometry::rotation(g, PI));
        if reversed {
            f = f.compose(&Isometry::reflection_y(g));
        }
        f.compose(&Isometry::rotation(g, -side_angle(p, other_side)))
    }

    /// Center of the face across `side` of `face`, in `face`'s lift.
    fn neighbor_center(&self, frame: &Isometry, side: usize) -> Point {
        let (_, r_in) = self.radii();
        frame.apply(&Point::polar(
            self.geometry(),
            2.0 * r_in,
            side_angle(self.schlafli.p, side),
        ))
    }

    /// Places a closed quotient given by a gluing table, unfolding it from face 0
    /// along a breadth-first spanning tree.
    pub fn from_table(table: &GluingTable, name: &str) -> Result<BaseTiling, TessellationError> {
        let map = FaceMap::from_table(table)?;
        map.check_trivalent()?;
        let p = table.faces[0];
        if table.faces.iter().any(|&s| s != p) {
            return Err(TessellationError::MixedFaces);
        }
        let schlafli = Schlafli::new(p, 3)?;
        let g = schlafli.geometry();
        let orientable = map.orientation().is_some();
        let mut base = BaseTiling {
            frames: vec![Isometry::identity(g); map.face_count()],
            map,
            schlafli,
            orientable,
            cut_darts: Vec::new(),
            name: name.to_string(),
        };
        let mut placed = vec![false; base.map.face_count()];
        let mut tree = vec![false; base.map.dart_count()];
        placed[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            for s in 0..p {
                let d = base.map.dart(f, s);
                let m = base.map.mate(d).expect("closed map");
                let (fb, sb) = base.map.face_side(m.dart);
                if placed[fb] {
                    continue;
                }
                placed[fb] = true;
                tree[d] = true;
                tree[m.dart] = true;
                base.frames[fb] = base.neighbor_frame(&base.frames[f], s, sb, m.reversed);
                queue.push_back(fb);
            }
        }
        if placed.iter().any(|&x| !x) {
            return Err(TessellationError::Disconnected);
        }
        base.cut_darts = (0..base.map.dart_count()).filter(|&d| !tree[d]).collect();
        Ok(base)
    }

    /// Geometric patch of `{p,q}` made of the faces whose centers lie within
    /// `radius` of the origin (the whole sphere for spherical symbols).
    fn patch(schlafli: Schlafli, radius: f64) -> Result<BaseTiling, TessellationError> {
        let g = schlafli.geometry();
        let p = schlafli.p;
        let mut base = BaseTiling {
            map: FaceMap::with_faces(vec![p]),
            frames: vec![Isometry::identity(g)],
            schlafli,
            orientable: true,
            cut_darts: Vec::new(),
            name: format!("{schlafli}"),
        };
        let mut lookup = CenterIndex::default();
        lookup.insert(Point::origin(g), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            for s in 0..p {
                let d = base.map.dart(f, s);
                if base.map.mate(d).is_some() {
                    continue;
                }
                let frame = base.frames[f];
                let c = base.neighbor_center(&frame, s);
                if let Some(fb) = lookup.find(&c) {
                    let local = base.frames[fb].inverse().apply(&base.face_center(f));
                    let [x, y, _] = local.coords();
                    let phi = y.atan2(x).rem_euclid(2.0 * PI);
                    let sb = ((phi * p as f64 / (2.0 * PI) - 0.5).round() as i64).rem_euclid(p as i64) as usize;
                    let db = base.map.dart(fb, sb);
                    if base.map.mate(db).is_some() {
                        return Err(TessellationError::Internal("patch sides matched twice".into()));
                    }
                    base.map.set_mate(d, db, false);
                } else if g == GeometryClass::Spherical || c.distance_from_origin() <= radius {
                    if base.map.face_count() >= MAX_PATCH_FACES {
                        return Err(TessellationError::Internal("patch too large".into()));
                    }
                    let fb = base.map.push_face(p);
                    base.frames.push(base.neighbor_frame(&frame, s, 0, false));
                    lookup.insert(c, fb);
                    base.map.set_mate(d, base.map.dart(fb, 0), false);
                    queue.push_back(fb);
                }
            }
        }
        Ok(base)
    }

    /// Face adjacency graph of the base tiling itself.
    pub fn tile_graph(&self) -> Result<TileGraph, TessellationError> {
        let rotation: Vec<Vec<Option<usize>>> = (0..self.map.face_count())
            .map(|f| {
                (0..self.map.sides(f))
                    .map(|s| self.map.mate(self.map.dart(f, s)).map(|m| self.map.face_side(m.dart).0))
                    .collect()
            })
            .collect();
        let closed = self.is_closed();
        let mut g = TileGraph::from_rotation(rotation, self.meta((1, 0), closed))?;
        let centers = (0..self.map.face_count()).map(|f| self.face_center(f)).collect();
        g.set_centers(centers);
        let outlines = (0..self.map.face_count()).map(|f| self.face_outline(f)).collect();
        g.set_outlines(outlines);
        g.set_landmarks((0..self.map.face_count()).collect(), Vec::new());
        if closed {
            g.set_covering(self.covering());
        }
        Ok(g)
    }

    fn face_outline(&self, f: usize) -> Vec<Point> {
        let (r_out, _) = self.radii();
        let p = self.map.sides(f);
        (0..p)
            .map(|k| self.frames[f].apply(&Point::polar(self.geometry(), r_out, corner_angle(p, k))))
            .collect()
    }

    fn meta(&self, goldberg: (u32, u32), closed: bool) -> TileMeta {
        TileMeta {
            name: self.name.clone(),
            geometry: self.geometry(),
            closed,
            orientable: self.orientable,
            euler_characteristic: closed.then(|| self.map.euler_characteristic()),
            schlafli: self.schlafli,
            goldberg,
        }
    }

    fn covering(&self) -> Covering {
        let g = self.geometry();
        let (r_out, _) = self.radii();
        let p = self.schlafli.p;
        let mut deck: Vec<Isometry> = Vec::new();
        let mut domain_boundary = Vec::new();
        let same = |a: &Isometry, b: &Isometry| {
            let (a, b) = (a.matrix(), b.matrix());
            (0..3).all(|i| (0..3).all(|j| (a[i][j] - b[i][j]).abs() < 1e-6 * (1.0 + a[i][j].abs())))
        };
        let identity = Isometry::identity(g);
        for &d in &self.cut_darts {
            let (fa, sa) = self.map.face_side(d);
            let m = self.map.mate(d).expect("closed map");
            let (fb, sb) = self.map.face_side(m.dart);
            let lifted = self.neighbor_frame(&self.frames[fa], sa, sb, m.reversed);
            let h = lifted.compose(&self.frames[fb].inverse());
            // cut darts glued without a deck transformation lie inside the domain
            if same(&h, &identity) {
                continue;
            }
            for k in [h, h.inverse()] {
                if !deck.iter().any(|x| same(x, &k)) {
                    deck.push(k);
                }
            }
            let c0 = self.frames[fa].apply(&Point::polar(g, r_out, corner_angle(p, sa)));
            let c1 = self.frames[fa].apply(&Point::polar(g, r_out, corner_angle(p, sa + 1)));
            domain_boundary.push([c0, c1]);
        }
        Covering { deck, domain_boundary }
    }

    /// Positions of the three corners of dual triangle `t`, developed from the
    /// face at chart corner `c` placed at `frame`. Indexed by chart corner.
    fn develop(&self, gc: &GcComplex, t: usize, c: usize, frame: &Isometry) -> [Point; 3] {
        let tri = &gc.triangles[t];
        let side_next = self.map.face_side(self.map.flag_dart(tri.flags[2 * c + 1])).1;
        let side_prev = self.map.face_side(self.map.flag_dart(tri.flags[2 * c])).1;
        let here = frame.apply(&Point::origin(self.geometry()));
        let next = self.neighbor_center(frame, side_next);
        let prev = self.neighbor_center(frame, side_prev);
        let mut out = [here; 3];
        out[(c + 1) % 3] = next;
        out[(c + 2) % 3] = prev;
        out
    }

    fn chart_point(&self, gc: &GcComplex, corners: &[Point; 3], xy: [f64; 2]) -> Point {
        let [a, b, c] = gc.corners.map(|e| e.to_real());
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((xy[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (xy[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (xy[1] - a[1]) - (xy[0] - a[0]) * (b[1] - a[1])) / det;
        let l0 = 1.0 - l1 - l2;
        let mut v = [0.0; 3];
        for (p, l) in corners.iter().zip([l0, l1, l2]) {
            for (vi, ci) in v.iter_mut().zip(p.coords()) {
                *vi += l * ci;
            }
        }
        Point::normalized(self.geometry(), v)
    }

    fn tile_center(&self, gc: &GcComplex, tile: usize) -> Point {
        match gc.tiles[tile] {
            TileKey::Face(f) => self.face_center(f),
            TileKey::Point(t, x) => {
                let f0 = self.map.flag_face(gc.triangles[t].flags[0]);
                let corners = self.develop(gc, t, 0, &self.frames[f0]);
                self.chart_point(gc, &corners, x.to_real())
            }
        }
    }

    fn tile_outline(&self, gc: &GcComplex, tile: usize) -> Vec<Point> {
        let third = |base: Eis, dir: Eis| {
            let [bx, by] = base.to_real();
            let [dx, dy] = dir.to_real();
            [bx + dx / 3.0, by + dy / 3.0]
        };
        match gc.tiles[tile] {
            TileKey::Face(f) => {
                let mut out = Vec::new();
                for &(t, m) in &gc.wedges[&tile] {
                    let c = m / 2;
                    let corners = self.develop(gc, t, c, &self.frames[f]);
                    for dir in gc.wedge_sectors(m) {
                        out.push(self.chart_point(gc, &corners, third(gc.corners[c], dir)));
                    }
                }
                out
            }
            TileKey::Point(t, x) => {
                let f0 = self.map.flag_face(gc.triangles[t].flags[0]);
                let corners = self.develop(gc, t, 0, &self.frames[f0]);
                (0..6)
                    .map(|k| self.chart_point(gc, &corners, third(x, UNITS[k] + UNITS[(k + 1) % 6])))
                    .collect()
            }
        }
    }

    /// Assembles the tile graph of the tiles in `keep` (in that order).
    fn assemble(
        &self,
        gc: &GcComplex,
        keep: &[usize],
        goldberg: (u32, u32),
        closed: bool,
    ) -> Result<TileGraph, TessellationError> {
        let mut new_id = vec![usize::MAX; gc.tiles.len()];
        for (i, &t) in keep.iter().enumerate() {
            new_id[t] = i;
        }
        let mut rotation = Vec::with_capacity(keep.len());
        for &t in keep {
            let rot = gc.rotation[t]
                .as_ref()
                .ok_or_else(|| TessellationError::Internal("selected tile has unknown neighbors".into()))?;
            rotation.push(
                rot.iter()
                    .map(|n| n.and_then(|j| (new_id[j] != usize::MAX).then_some(new_id[j])))
                    .collect(),
            );
        }
        let mut g = TileGraph::from_rotation(rotation, self.meta(goldberg, closed))?;
        g.set_centers(keep.iter().map(|&t| self.tile_center(gc, t)).collect());
        g.set_outlines(keep.iter().map(|&t| self.tile_outline(gc, t)).collect());
        let faces = gc
            .face_tiles
            .iter()
            .flatten()
            .filter(|&&t| new_id[t] != usize::MAX)
            .map(|&t| new_id[t])
            .collect();
        let mut verts: Vec<usize> = gc
            .vertex_tiles
            .iter()
            .filter(|&&t| new_id[t] != usize::MAX)
            .map(|&t| new_id[t])
            .collect();
        verts.sort_unstable();
        verts.dedup();
        g.set_landmarks(faces, verts);
        if closed {
            g.set_covering(self.covering());
        }
        Ok(g)
    }
}

/// The base tiling `{p,q}`: the whole platonic solid for spherical symbols,
/// otherwise the faces within `extent` steps of a central face.
pub fn build_base(schlafli: Schlafli, extent: usize) -> Result<BaseTiling, TessellationError> {
    let (_, r_in) = regular_polygon_radii(schlafli.p, schlafli.q);
    let radius = extent as f64 * 2.0 * r_in * (1.0 + 1e-9) + 1e-9;
    BaseTiling::patch(schlafli, radius)
}

/// Goldberg–Coxeter subdivision `GC(a,b)` of a closed base tiling.
pub fn goldberg_coxeter(base: &BaseTiling, a: u32, b: u32) -> Result<TileGraph, TessellationError> {
    if base.schlafli.q != 3 {
        return Err(TessellationError::InvalidSchlafli {
            p: base.schlafli.p,
            q: base.schlafli.q,
            reason: "Goldberg-Coxeter needs trivalent vertices".into(),
        });
    }
    if !base.is_closed() {
        return Err(TessellationError::NotClosed);
    }
    let gc = GcComplex::build(&base.map, a, b)?;
    let keep: Vec<usize> = (0..gc.tiles.len()).collect();
    base.assemble(&gc, &keep, (a, b), true)
}

/// Closed quotient manifold from a gluing table, subdivided by `GC(a,b)`.
pub fn build_quotient(table: &GluingTable, goldberg: (u32, u32)) -> Result<TileGraph, TessellationError> {
    let name = table.title.clone().unwrap_or_else(|| "quotient".into());
    let base = BaseTiling::from_table(table, &name)?;
    goldberg_coxeter(&base, goldberg.0, goldberg.1)
}

/// The `n` tiles of `GC(a,b)` of `{p,3}` closest to the central tile.
///
/// Tiles are ranked by the geometric distance of their centers from the
/// origin. When a ring of equidistant tiles only partially fits, tiles are
/// added one at a time preferring those with the most already selected
/// neighbors, then the lowest breadth-first (spiral) index.
pub fn build_disk(schlafli: Schlafli, goldberg: (u32, u32), n: usize) -> Result<TileGraph, TessellationError> {
    if n == 0 {
        return Err(TessellationError::EmptyDisk);
    }
    if schlafli.geometry() == GeometryClass::Spherical {
        return Err(TessellationError::InvalidSchlafli {
            p: schlafli.p,
            q: schlafli.q,
            reason: "disks are built in the plane or the hyperbolic plane".into(),
        });
    }
    if schlafli.q != 3 {
        return Err(TessellationError::InvalidSchlafli {
            p: schlafli.p,
            q: schlafli.q,
            reason: "disks are built from trivalent tilings".into(),
        });
    }
    let (a, b) = goldberg;
    let (_, r_in) = regular_polygon_radii(schlafli.p, schlafli.q);
    let mut extent = 2usize;
    loop {
        let mut base = build_base(schlafli, extent)?;
        base.name = format!("disk {schlafli} GC({a},{b}) n={n}");
        let gc = GcComplex::build(&base.map, a, b)?;
        if let Some(keep) = select_disk(&base, &gc, n)? {
            return base.assemble(&gc, &keep, goldberg, false);
        }
        extent += 1;
        if extent as f64 * 2.0 * r_in > 60.0 {
            return Err(TessellationError::Internal("disk does not fit in a patch".into()));
        }
    }
}

fn select_disk(base: &BaseTiling, gc: &GcComplex, n: usize) -> Result<Option<Vec<usize>>, TessellationError> {
    let m = gc.tiles.len();
    let dist: Vec<f64> = (0..m).map(|t| base.tile_center(gc, t).distance_from_origin()).collect();
    // tiles at or beyond the first incomplete tile cannot be trusted
    let safe = (0..m)
        .filter(|&t| match &gc.rotation[t] {
            None => true,
            Some(r) => r.iter().any(Option::is_none),
        })
        .map(|t| dist[t])
        .fold(f64::INFINITY, f64::min);
    let key = |d: f64| (d * 1e7).round() as i64;
    let center = gc.face_tiles[0].ok_or_else(|| TessellationError::Internal("no central tile".into()))?;

    // spiral order: breadth-first from the center following rotations
    let mut spiral = vec![usize::MAX; m];
    let mut queue = VecDeque::from([center]);
    spiral[center] = 0;
    let mut next = 1;
    while let Some(v) = queue.pop_front() {
        if let Some(rot) = &gc.rotation[v] {
            for w in rot.iter().flatten() {
                if spiral[*w] == usize::MAX {
                    spiral[*w] = next;
                    next += 1;
                    queue.push_back(*w);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&t| (key(dist[t]), spiral[t]));
    let mut selected = vec![false; m];
    let mut keep = Vec::with_capacity(n);
    let mut i = 0;
    while keep.len() < n {
        if i >= m {
            return Ok(None);
        }
        let k = key(dist[order[i]]);
        let mut j = i;
        while j < m && key(dist[order[j]]) == k {
            j += 1;
        }
        if dist[order[i]] >= safe - 1e-6 {
            return Ok(None);
        }
        let group = &order[i..j];
        if keep.len() + group.len() <= n {
            for &t in group {
                selected[t] = true;
                keep.push(t);
            }
        } else {
            let mut rest: Vec<usize> = group.to_vec();
            while keep.len() < n {
                let (pos, _) = rest
                    .iter()
                    .enumerate()
                    .map(|(pos, &t)| {
                        let rot = gc.rotation[t].as_ref().expect("complete tile");
                        let c = rot.iter().flatten().filter(|&&w| selected[w]).count();
                        (pos, (std::cmp::Reverse(c), spiral[t]))
                    })
                    .min_by_key(|&(_, k)| k)
                    .unwrap();
                let t = rest.remove(pos);
                selected[t] = true;
                keep.push(t);
            }
        }
        i = j;
    }
    // the neighbors of selected tiles must be complete too, so that their
    // outside-sample entries are genuine
    if keep.iter().any(|&t| dist[t] >= safe - 1e-6) {
        return Ok(None);
    }
    Ok(Some(keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn platonic_solids() {
        let dodeca = build_base(Schlafli::new(5, 3).unwrap(), 0).unwrap();
        assert!(dodeca.is_closed());
        let g = dodeca.tile_graph().unwrap();
        assert_eq!(g.len(), 12);
        assert!((0..12).all(|t| g.neighbors(t).len() == 5));
        assert_eq!(g.computed_euler_characteristic(), Some(2));

        let cube = build_base(Schlafli::new(4, 3).unwrap(), 0).unwrap();
        assert_eq!(cube.tile_graph().unwrap().len(), 6);
    }

    #[test]
    fn dodecahedron_centers_equidistant() {
        let g = build_base(Schlafli::new(5, 3).unwrap(), 0)
            .unwrap()
            .tile_graph()
            .unwrap();
        let c = g.centers().unwrap();
        let d0 = c[g.edges()[0].0].distance(&c[g.edges()[0].1]).unwrap();
        for (i, j) in g.edges() {
            assert!((c[i].distance(&c[j]).unwrap() - d0).abs() < 1e-9);
        }
        assert_eq!(g.edges().len(), 30);
    }

    #[test]
    fn gc_identity_matches_base() {
        let base = build_base(Schlafli::new(5, 3).unwrap(), 0).unwrap();
        let a = base.tile_graph().unwrap();
        let b = goldberg_coxeter(&base, 1, 0).unwrap();
        assert_eq!(a.len(), b.len());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn glued_corners_coincide() {
        let text = include_str!("../../data/manifolds/kq.glue");
        let table = GluingTable::parse(text).unwrap();
        let base = BaseTiling::from_table(&table, "kq").unwrap();
        let (r_out, _) = base.radii();
        let g = base.geometry();
        let p = 7;
        let corner = |f: usize, k: usize| base.frames[f].apply(&Point::polar(g, r_out, corner_angle(p, k)));
        for d in 0..base.map.dart_count() {
            if base.cut_darts.contains(&d) {
                continue;
            }
            let (fa, sa) = base.map.face_side(d);
            let m = base.map.mate(d).unwrap();
            let (fb, sb) = base.map.face_side(m.dart);
            let partner = if m.reversed { sb } else { sb + 1 };
            assert!(corner(fa, sa).distance(&corner(fb, partner)).unwrap() < 1e-9);
        }
    }

    #[test]
    fn hyperbolic_patch_grows() {
        let small = build_base(Schlafli::new(7, 3).unwrap(), 1).unwrap();
        assert_eq!(small.map.face_count(), 8);
        assert!(!small.is_closed());
    }

    #[test]
    fn single_tile_disk() {
        let g = build_disk(Schlafli::new(7, 3).unwrap(), (1, 0), 1).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.sides(0), 7);
        assert!(build_disk(Schlafli::new(7, 3).unwrap(), (1, 0), 0).is_err());
    }
}
