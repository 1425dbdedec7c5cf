//! Zig-zag (Petrie) lines: paths along tile boundaries that turn alternately
//! left and right at every vertex.

use std::collections::{HashSet, VecDeque};

use super::{TessellationError, TileGraph};

/// A zig-zag line, recorded as the ordered list of tile pairs whose shared
/// side it runs along.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigZagLine {
    pub id: usize,
    pub edges: Vec<(usize, usize)>,
    pub closed: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct State {
    left: usize,
    right: usize,
    left_turn_next: bool,
}

fn after(g: &TileGraph, around: usize, t: usize) -> Result<Option<usize>, TessellationError> {
    let rot = g.rotation(around);
    let pos = rot
        .iter()
        .position(|&x| x == Some(t))
        .ok_or(TessellationError::NotTrivalent)?;
    Ok(rot[(pos + 1) % rot.len()])
}

fn check_trivalent(g: &TileGraph) -> Result<(), TessellationError> {
    for t in 0..g.len() {
        let rot = g.rotation(t);
        for k in 0..rot.len() {
            if let (Some(x), Some(y)) = (rot[k], rot[(k + 1) % rot.len()]) {
                // t, x, y meet at one corner, so seen from x the next tile
                // after y is t again
                if !g.neighbors(x).contains(&y) || after(g, x, y)? != Some(t) {
                    return Err(TessellationError::NotTrivalent);
                }
            }
        }
    }
    Ok(())
}

fn advance(g: &TileGraph, s: State) -> Result<Option<State>, TessellationError> {
    let Some(ahead) = after(g, s.left, s.right)? else {
        return Ok(None);
    };
    Ok(Some(if s.left_turn_next {
        State {
            left: s.left,
            right: ahead,
            left_turn_next: false,
        }
    } else {
        State {
            left: ahead,
            right: s.right,
            left_turn_next: true,
        }
    }))
}

fn trace(g: &TileGraph, start: State, limit: usize) -> Result<(Vec<(usize, usize)>, bool), TessellationError> {
    let mut out = Vec::new();
    let mut s = start;
    for _ in 0..limit {
        match advance(g, s)? {
            None => return Ok((out, false)),
            Some(n) if n == start => return Ok((out, true)),
            Some(n) => {
                out.push((n.left, n.right));
                s = n;
            }
        }
    }
    Err(TessellationError::Internal("zig-zag trace did not terminate".into()))
}

fn canonical(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    v.sort_unstable();
    v
}

/// All zig-zag lines of a disk.
pub fn zigzag_lines(g: &TileGraph) -> Result<Vec<ZigZagLine>, TessellationError> {
    if g.is_closed() {
        return Err(TessellationError::NotADisk);
    }
    check_trivalent(g)?;
    let limit = 4 * g.edge_count() + 8;
    let mut seen: HashSet<Vec<(usize, usize)>> = HashSet::new();
    let mut lines = Vec::new();
    for (a, b) in g.edges() {
        for left_first in [true, false] {
            let fwd = State {
                left: a,
                right: b,
                left_turn_next: left_first,
            };
            let (ahead, closed) = trace(g, fwd, limit)?;
            let mut edges = Vec::new();
            if !closed {
                let bwd = State {
                    left: b,
                    right: a,
                    left_turn_next: left_first,
                };
                let (behind, _) = trace(g, bwd, limit)?;
                edges.extend(behind.into_iter().rev().map(|(l, r)| (r, l)));
            }
            edges.push((a, b));
            edges.extend(ahead);
            let key = canonical(&edges);
            if seen.insert(key) {
                lines.push(ZigZagLine {
                    id: lines.len(),
                    edges,
                    closed,
                });
            }
        }
    }
    Ok(lines)
}

/// For every tile, the ids of the lines separating it from `center`: removing
/// the adjacencies a line runs along puts the tile and `center` in different
/// components.
pub fn separating_lines(g: &TileGraph, lines: &[ZigZagLine], center: usize) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut out = vec![Vec::new(); n];
    for line in lines {
        let cut: HashSet<(usize, usize)> = canonical(&line.edges).into_iter().collect();
        let mut seen = vec![false; n];
        seen[center] = true;
        let mut queue = VecDeque::from([center]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !seen[w] && !cut.contains(&(v.min(w), v.max(w))) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        for (t, s) in seen.iter().enumerate() {
            if !s {
                out[t].push(line.id);
            }
        }
    }
    out
}

/// Number of distinct regions the lines cut the disk into.
pub fn line_regions(g: &TileGraph, lines: &[ZigZagLine], center: usize) -> usize {
    let sep = separating_lines(g, lines, center);
    sep.into_iter().collect::<HashSet<_>>().len()
}

/// Number of connected components after removing the adjacencies along `line`.
pub fn components_without(g: &TileGraph, line: &ZigZagLine) -> usize {
    let cut: HashSet<(usize, usize)> = canonical(&line.edges).into_iter().collect();
    let n = g.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !seen[w] && !cut.contains(&(v.min(w), v.max(w))) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}
