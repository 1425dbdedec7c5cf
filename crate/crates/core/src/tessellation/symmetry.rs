//! Symmetries of tile graphs that respect the local cyclic order of
//! neighbors (rotations and reflections of the underlying map).

use std::collections::VecDeque;

use super::TileGraph;

/// Tile orbits under the symmetry group, with one group element per tile
/// that carries the orbit representative onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbits {
    n: usize,
    reps: Vec<usize>,
    rep_index: Vec<u32>,
    /// Row `i`: the inverse of a symmetry mapping `reps[rep_index[i]]` to `i`.
    pull: Vec<u32>,
}

impl Orbits {
    /// The trivial decomposition: every tile is its own representative.
    pub fn trivial(n: usize) -> Orbits {
        let mut pull = Vec::with_capacity(n * n);
        for _ in 0..n {
            pull.extend(0..n as u32);
        }
        Orbits {
            n,
            reps: (0..n).collect(),
            rep_index: (0..n as u32).collect(),
            pull,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Orbit representatives, in increasing order.
    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    /// Position in [`Orbits::reps`] of the representative of `tile`'s orbit.
    pub fn rep_index(&self, tile: usize) -> usize {
        self.rep_index[tile] as usize
    }

    /// `g⁻¹`, where `g` maps the representative of `tile` onto `tile`, so that
    /// any symmetric quantity satisfies `Q[tile][j] = Q[rep][pull(tile)[j]]`.
    pub fn pull(&self, tile: usize) -> &[u32] {
        &self.pull[tile * self.n..(tile + 1) * self.n]
    }

    pub fn is_transitive(&self) -> bool {
        self.reps.len() == 1
    }
}

fn position(rot: &[Option<usize>], t: usize) -> Option<usize> {
    rot.iter().position(|&x| x == Some(t))
}

/// Tries to extend `0 ↦ target`, with neighbor `k` of tile 0 sent to neighbor
/// `offset + dir·k` of the target, to a full symmetry.
fn extend(g: &TileGraph, target: usize, offset: usize, dir: isize) -> Option<Vec<u32>> {
    let n = g.len();
    let mut image = vec![u32::MAX; n];
    let mut frame = vec![(0usize, 0isize); n];
    image[0] = target as u32;
    frame[0] = (offset, dir);
    let mut queue = VecDeque::from([0usize]);
    let at = |rot: &[Option<usize>], k: isize| rot[k.rem_euclid(rot.len() as isize) as usize];
    while let Some(x) = queue.pop_front() {
        let xi = image[x] as usize;
        let (o, d) = frame[x];
        let (rx, ri) = (g.rotation(x), g.rotation(xi));
        if rx.len() != ri.len() {
            return None;
        }
        for k in 0..rx.len() as isize {
            let mapped = at(ri, o as isize + d * k);
            let Some(y) = at(rx, k) else {
                if mapped.is_some() {
                    return None;
                }
                continue;
            };
            let yi = mapped?;
            if image[y] != u32::MAX {
                if image[y] as usize != yi {
                    return None;
                }
                continue;
            }
            let (ry, ryi) = (g.rotation(y), g.rotation(yi));
            if ry.len() != ryi.len() {
                return None;
            }
            let ky = position(ry, x)? as isize;
            let kyi = position(ryi, xi)? as isize;
            // a tile sharing a corner with x and y fixes the direction at y
            let mut dy = None;
            for step in [1isize, -1] {
                let (Some(z), Some(zi)) = (at(rx, k + step), at(ri, o as isize + d * (k + step))) else {
                    continue;
                };
                let side = |rot: &[Option<usize>], base: isize, t: usize| {
                    if at(rot, base + 1) == Some(t) {
                        Some(1isize)
                    } else if at(rot, base - 1) == Some(t) {
                        Some(-1)
                    } else {
                        None
                    }
                };
                let (Some(e), Some(ei)) = (side(ry, ky, z), side(ryi, kyi, zi)) else {
                    continue;
                };
                dy = Some(e * ei);
                break;
            }
            // with two neighbors both directions give the same frame
            let dy = if ry.len() <= 2 { dy.unwrap_or(1) } else { dy? };
            image[y] = yi as u32;
            frame[y] = ((kyi - dy * ky).rem_euclid(ry.len() as isize) as usize, dy);
            queue.push_back(y);
        }
    }
    if image.contains(&u32::MAX) {
        return None;
    }
    let mut hit = vec![false; n];
    for &v in &image {
        if std::mem::replace(&mut hit[v as usize], true) {
            return None;
        }
    }
    for x in 0..n {
        let xi = image[x] as usize;
        let mut a: Vec<u32> = g.neighbors(x).iter().map(|&y| image[y]).collect();
        let mut b: Vec<u32> = g.neighbors(xi).iter().map(|&y| y as u32).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b || g.sides(x) != g.sides(xi) {
            return None;
        }
    }
    Some(image)
}

/// Every symmetry of `g` that preserves or reverses the cyclic neighbor order
/// at each tile. Each returned permutation is a graph automorphism.
pub fn symmetries(g: &TileGraph) -> Vec<Vec<u32>> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let profile = |t: usize| {
        let mut h = Vec::new();
        for d in g.bfs(t) {
            let d = if d == u32::MAX { 0 } else { d as usize + 1 };
            if h.len() <= d {
                h.resize(d + 1, 0usize);
            }
            h[d] += 1;
        }
        (g.sides(t), g.neighbors(t).len(), h)
    };
    let p0 = profile(0);
    let s = g.rotation(0).len();
    let mut out = Vec::new();
    for target in 0..n {
        if profile(target) != p0 {
            continue;
        }
        for offset in 0..s.max(1) {
            for dir in [1isize, -1] {
                if let Some(img) = extend(g, target, offset, dir) {
                    if !out.contains(&img) {
                        out.push(img);
                    }
                }
            }
        }
    }
    out
}

/// Orbits of the tiles of a connected graph under [`symmetries`].
pub fn orbits(g: &TileGraph) -> Orbits {
    let n = g.len();
    let group = symmetries(g);
    let mut rep_index = vec![u32::MAX; n];
    let mut push: Vec<Option<usize>> = vec![None; n];
    let mut reps = Vec::new();
    for t in 0..n {
        if rep_index[t] != u32::MAX {
            continue;
        }
        let r = reps.len() as u32;
        reps.push(t);
        for (gi, perm) in group.iter().enumerate() {
            let u = perm[t] as usize;
            if rep_index[u] == u32::MAX {
                rep_index[u] = r;
                push[u] = Some(gi);
            }
        }
        if rep_index[t] == u32::MAX {
            rep_index[t] = r;
        }
    }
    let mut pull = vec![0u32; n * n];
    for t in 0..n {
        let row = &mut pull[t * n..(t + 1) * n];
        match push[t] {
            Some(gi) => {
                for (j, &v) in group[gi].iter().enumerate() {
                    row[v as usize] = j as u32;
                }
            }
            None => {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = j as u32;
                }
            }
        }
    }
    Orbits {
        n,
        reps,
        rep_index,
        pull,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tessellation::catalog;

    fn cycle(n: usize) -> TileGraph {
        let adj = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
        TileGraph::from_adjacency(adj, "cycle").unwrap()
    }

    fn check_automorphism(g: &TileGraph, perm: &[u32]) {
        for (a, b) in g.edges() {
            assert!(g.neighbors(perm[a] as usize).contains(&(perm[b] as usize)));
        }
    }

    #[test]
    fn cycle_has_dihedral_symmetry() {
        let g = cycle(7);
        let group = symmetries(&g);
        assert_eq!(group.len(), 14);
        for p in &group {
            check_automorphism(&g, p);
        }
        assert!(orbits(&g).is_transitive());
    }

    #[test]
    fn dodecahedron_has_120_symmetries() {
        let base = crate::tessellation::build_base(crate::tessellation::Schlafli::new(5, 3).unwrap(), 0).unwrap();
        let g = base.tile_graph().unwrap();
        assert_eq!(symmetries(&g).len(), 120);
    }

    #[test]
    fn hex_torus_is_transitive() {
        let g = catalog::build("torus-hex").unwrap();
        let o = orbits(&g);
        assert!(o.is_transitive());
        let d = g.distances().unwrap();
        for t in [1, 77, 300] {
            let pull = o.pull(t);
            for j in 0..g.len() {
                assert_eq!(d.get(t, j), d.get(0, pull[j] as usize));
            }
        }
    }

    #[test]
    fn disk_orbits_follow_rotations() {
        // two full rings around a heptagon
        let s = crate::tessellation::Schlafli::new(7, 3).unwrap();
        let g = crate::tessellation::build_disk(s, (1, 0), 29).unwrap();
        assert_eq!(symmetries(&g).len(), 14);
        let o = orbits(&g);
        // center, first ring, and the two kinds of second-ring tiles
        assert_eq!(o.reps().len(), 4);
        let d = g.distances().unwrap();
        for t in 0..g.len() {
            let r = o.reps()[o.rep_index(t)];
            let pull = o.pull(t);
            for j in (0..g.len()).step_by(13) {
                assert_eq!(d.get(t, j), d.get(r, pull[j] as usize));
            }
        }
    }
}
