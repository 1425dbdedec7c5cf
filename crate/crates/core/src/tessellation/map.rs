//! Combinatorial maps: polygons glued along their sides.
//!
//! Sides of a `p`-gon are numbered cyclically; side `k` runs from corner `k`
//! to corner `k+1`. A normal (`N`) gluing of side `sA` to side `sB` identifies
//! corner `sA` with corner `sB+1`, which is what two consistently oriented
//! neighbors look like. A reversed (`R`) gluing identifies corner `sA` with
//! corner `sB`.

use std::fmt::Write as _;

use super::TessellationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub face_a: usize,
    pub side_a: usize,
    pub face_b: usize,
    pub side_b: usize,
    pub reversed: bool,
}

/// Text description of a quotient surface.
///
/// ```text
/// # optional comment lines
/// faces 2
/// face 0 6
/// face 1 6
/// glue 0 0 1 3 N
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GluingTable {
    pub title: Option<String>,
    pub faces: Vec<usize>,
    pub gluings: Vec<Gluing>,
}

impl GluingTable {
    pub fn parse(text: &str) -> Result<GluingTable, TessellationError> {
        let mut table = GluingTable::default();
        let mut declared: Option<usize> = None;
        let mut faces: Vec<Option<usize>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: &str| TessellationError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if table.title.is_none() {
                    table.title = Some(comment.trim().to_string());
                }
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<usize, TessellationError> {
                words
                    .get(i)
                    .ok_or_else(|| err("missing field"))?
                    .parse::<usize>()
                    .map_err(|_| err("expected a nonnegative integer"))
            };
            match words[0] {
                "faces" => {
                    if declared.is_some() {
                        return Err(err("duplicate `faces` header"));
                    }
                    let n = num(1)?;
                    declared = Some(n);
                    faces = vec![None; n];
                }
                "face" => {
                    if declared.is_none() {
                        return Err(err("`face` before `faces` header"));
                    }
                    let (id, sides) = (num(1)?, num(2)?);
                    if id >= faces.len() {
                        return Err(err("face id out of range"));
                    }
                    if sides < 3 {
                        return Err(err("a face needs at least 3 sides"));
                    }
                    if faces[id].replace(sides).is_some() {
                        return Err(err("face declared twice"));
                    }
                }
                "glue" => {
                    if declared.is_none() {
                        return Err(err("`glue` before `faces` header"));
                    }
                    let reversed = match words.get(5).copied() {
                        Some("N") => false,
                        Some("R") => true,
                        _ => return Err(err("gluing kind must be N or R")),
                    };
                    table.gluings.push(Gluing {
                        face_a: num(1)?,
                        side_a: num(2)?,
                        face_b: num(3)?,
                        side_b: num(4)?,
                        reversed,
                    });
                }
                other => return Err(err(&format!("unknown keyword `{other}`"))),
            }
        }
        if declared.is_none() {
            return Err(TessellationError::Parse {
                line: 0,
                msg: "missing `faces` header".into(),
            });
        }
        table.faces = faces
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or(TessellationError::Parse {
                    line: 0,
                    msg: format!("face {i} never declared"),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(t) = &self.title {
            let _ = writeln!(out, "# {t}");
        }
        let _ = writeln!(out, "faces {}", self.faces.len());
        for (i, s) in self.faces.iter().enumerate() {
            let _ = writeln!(out, "face {i} {s}");
        }
        for g in &self.gluings {
            let kind = if g.reversed { 'R' } else { 'N' };
            let _ = writeln!(out, "glue {} {} {} {} {kind}", g.face_a, g.side_a, g.face_b, g.side_b);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mate {
    pub dart: usize,
    pub reversed: bool,
}

/// Polygons with (partially) paired sides.
///
/// A dart is a (face, side) pair; a flag is a dart together with one of its
/// two ends (`0` = the corner at the start of the side, `1` = at the end).
/// Flag `f` encodes dart `f / 2` and end `f % 2`.
#[derive(Debug, Clone)]
pub struct FaceMap {
    sides: Vec<usize>,
    offset: Vec<usize>,
    mate: Vec<Option<Mate>>,
}

impl FaceMap {
    pub(crate) fn with_faces(sides: Vec<usize>) -> FaceMap {
        let mut offset = Vec::with_capacity(sides.len() + 1);
        let mut acc = 0;
        for &s in &sides {
            offset.push(acc);
            acc += s;
        }
        offset.push(acc);
        FaceMap {
            sides,
            offset,
            mate: vec![None; acc],
        }
    }

    /// Builds and validates the closed map described by a gluing table.
    pub fn from_table(table: &GluingTable) -> Result<FaceMap, TessellationError> {
        let mut map = FaceMap::with_faces(table.faces.clone());
        for g in &table.gluings {
            for (f, s) in [(g.face_a, g.side_a), (g.face_b, g.side_b)] {
                if f >= map.face_count() || s >= map.sides[f] {
                    return Err(TessellationError::BadFaceReference { face: f, side: s });
                }
            }
            let da = map.dart(g.face_a, g.side_a);
            let db = map.dart(g.face_b, g.side_b);
            if da == db {
                return Err(TessellationError::SideGluedTwice {
                    face: g.face_a,
                    side: g.side_a,
                });
            }
            for (d, f, s) in [(da, g.face_a, g.side_a), (db, g.face_b, g.side_b)] {
                if map.mate[d].is_some() {
                    return Err(TessellationError::SideGluedTwice { face: f, side: s });
                }
            }
            map.mate[da] = Some(Mate {
                dart: db,
                reversed: g.reversed,
            });
            map.mate[db] = Some(Mate {
                dart: da,
                reversed: g.reversed,
            });
        }
        for d in 0..map.dart_count() {
            if map.mate[d].is_none() {
                let (face, side) = map.face_side(d);
                return Err(TessellationError::UnpairedSide { face, side });
            }
        }
        Ok(map)
    }

    pub(crate) fn set_mate(&mut self, a: usize, b: usize, reversed: bool) {
        self.mate[a] = Some(Mate { dart: b, reversed });
        self.mate[b] = Some(Mate { dart: a, reversed });
    }

    pub(crate) fn push_face(&mut self, sides: usize) -> usize {
        let id = self.sides.len();
        self.sides.push(sides);
        let end = *self.offset.last().unwrap() + sides;
        self.offset.push(end);
        self.mate.resize(end, None);
        id
    }

    pub fn face_count(&self) -> usize {
        self.sides.len()
    }

    pub fn dart_count(&self) -> usize {
        self.mate.len()
    }

    pub fn sides(&self, face: usize) -> usize {
        self.sides[face]
    }

    pub fn dart(&self, face: usize, side: usize) -> usize {
        self.offset[face] + side % self.sides[face]
    }

    pub fn face_side(&self, dart: usize) -> (usize, usize) {
        let face = self.offset.partition_point(|&o| o <= dart) - 1;
        (face, dart - self.offset[face])
    }

    pub fn mate(&self, dart: usize) -> Option<Mate> {
        self.mate[dart]
    }

    pub fn is_closed(&self) -> bool {
        self.mate.iter().all(Option::is_some)
    }

    pub fn flag_count(&self) -> usize {
        2 * self.dart_count()
    }

    pub fn flag_face(&self, flag: usize) -> usize {
        self.face_side(flag / 2).0
    }

    pub fn flag_dart(&self, flag: usize) -> usize {
        flag / 2
    }

    /// Same side, other end.
    pub fn sigma0(&self, flag: usize) -> usize {
        flag ^ 1
    }

    /// Same face and corner, other side.
    pub fn sigma1(&self, flag: usize) -> usize {
        let (face, side) = self.face_side(flag / 2);
        let p = self.sides[face];
        if flag.is_multiple_of(2) {
            2 * self.dart(face, side + p - 1) + 1
        } else {
            2 * self.dart(face, side + 1)
        }
    }

    /// Same side and corner, other face.
    pub fn sigma2(&self, flag: usize) -> Option<usize> {
        let m = self.mate[flag / 2]?;
        let end = flag % 2;
        let end = if m.reversed { end } else { 1 - end };
        Some(2 * m.dart + end)
    }

    /// Two-coloring of the flags in which every involution changes color.
    /// `None` if the map is not orientable.
    pub fn orientation(&self) -> Option<Vec<u8>> {
        let n = self.flag_count();
        let mut color = vec![u8::MAX; n];
        let mut ok = true;
        let mut stack = Vec::new();
        for start in 0..n {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            stack.push(start);
            while let Some(f) = stack.pop() {
                let c = color[f];
                let nbrs = [Some(self.sigma0(f)), Some(self.sigma1(f)), self.sigma2(f)];
                for g in nbrs.into_iter().flatten() {
                    if color[g] == u8::MAX {
                        color[g] = 1 - c;
                        stack.push(g);
                    } else if color[g] == c {
                        ok = false;
                    }
                }
            }
        }
        ok.then_some(color)
    }

    /// Orbits of flags under σ1 and σ2, i.e. the vertices of the map, together
    /// with a flag → vertex index.
    pub fn vertices(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = self.flag_count();
        let mut vid = vec![usize::MAX; n];
        let mut orbits = Vec::new();
        for start in 0..n {
            if vid[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut orbit = vec![start];
            vid[start] = id;
            let mut i = 0;
            while i < orbit.len() {
                let f = orbit[i];
                i += 1;
                for g in [Some(self.sigma1(f)), self.sigma2(f)].into_iter().flatten() {
                    if vid[g] == usize::MAX {
                        vid[g] = id;
                        orbit.push(g);
                    }
                }
            }
            orbits.push(orbit);
        }
        (orbits, vid)
    }

    /// Checks that every vertex of a closed map has valence 3.
    pub fn check_trivalent(&self) -> Result<(), TessellationError> {
        let (orbits, _) = self.vertices();
        for o in &orbits {
            if o.len() != 6 {
                return Err(TessellationError::BadValence { valence: o.len() / 2 });
            }
        }
        Ok(())
    }

    /// `V − E + F` of a closed map.
    pub fn euler_characteristic(&self) -> i64 {
        let (orbits, _) = self.vertices();
        orbits.len() as i64 - (self.dart_count() / 2) as i64 + self.face_count() as i64
    }

    pub fn to_table(&self, title: Option<String>) -> GluingTable {
        let mut gluings = Vec::new();
        for d in 0..self.dart_count() {
            if let Some(m) = self.mate[d] {
                if d < m.dart {
                    let (fa, sa) = self.face_side(d);
                    let (fb, sb) = self.face_side(m.dart);
                    gluings.push(Gluing {
                        face_a: fa,
                        side_a: sa,
                        face_b: fb,
                        side_b: sb,
                        reversed: m.reversed,
                    });
                }
            }
        }
        GluingTable {
            title,
            faces: self.sides.clone(),
            gluings,
        }
    }
}
