//! Neighborhood influence for SOM training: the simulated random-walk
//! dispersion and the classical Gaussian baseline.
//!
//! The walk moves a unit of mass with probability `p` across every side of
//! every tile per step:
//!
//! `P[i][j][t+1] = P[i][j][t] + p · Σ_{k ∈ N(j)} (P[i][k][t] − P[i][j][t])`
//!
//! Rows are only evolved for one representative per symmetry orbit; the
//! remaining rows are read through the symmetry that carries the
//! representative onto them.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::GeometryClass;
use crate::tessellation::{orbits, Orbits, TileGraph};

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("step probability {p} is unstable for maximum degree {degree} (p·degree must be below 1)")]
    Unstable { p: f64, degree: usize },
    #[error("stop ratio must exceed 1, got {0}")]
    BadStopRatio(f64),
    #[error("dispersion did not settle within {0} steps")]
    NoConvergence(u64),
    #[error("graph symmetries do not act transitively on tiles")]
    NotTransitive,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("geometric distances are only offered for disks and spheres")]
    GeometricUnsupported,
    #[error("graph has no tile centers")]
    NoCenters,
    #[error("cache file {path}: {msg}")]
    Cache { path: PathBuf, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionParams {
    /// Probability of crossing one given side in one step.
    pub p: f64,
    /// The horizon is the first step where every row has max/min at most this.
    pub stop_ratio: f64,
    /// Number of stored snapshots (besides step 0) when the horizon is larger.
    pub snapshots: usize,
    /// Memory cap for stored snapshots, in bytes.
    pub max_bytes: usize,
    pub max_steps: u64,
}

impl Default for DispersionParams {
    fn default() -> Self {
        DispersionParams {
            p: 1e-4,
            stop_ratio: 1.6,
            snapshots: 1000,
            max_bytes: 512 << 20,
            max_steps: 10_000_000,
        }
    }
}

impl DispersionParams {
    fn validate(&self, g: &TileGraph) -> Result<(), DispersionError> {
        let degree = g.max_degree();
        if !(self.p > 0.0) || self.p * degree as f64 >= 1.0 {
            return Err(DispersionError::Unstable { p: self.p, degree });
        }
        if !(self.stop_ratio > 1.0) {
            return Err(DispersionError::BadStopRatio(self.stop_ratio));
        }
        if !g.is_connected() {
            return Err(DispersionError::Disconnected);
        }
        Ok(())
    }
}

/// `round(T·(1 − t/t_max)²)`, clamped to `[0, T]`.
pub fn schedule_f(t: u64, t_max: u64, horizon: u64) -> u64 {
    if t_max == 0 {
        return 0;
    }
    let x = 1.0 - (t.min(t_max) as f64) / t_max as f64;
    ((horizon as f64) * x * x).round().clamp(0.0, horizon as f64) as u64
}

/// Rows of the walk for a set of sources, stored column-major so that the
/// update of one target tile touches a contiguous block.
#[derive(Clone)]
struct Walk<'a> {
    offsets: &'a [usize],
    targets: &'a [u32],
    p: f64,
    rows: usize,
    cur: Vec<f64>,
    next: Vec<f64>,
    acc: Vec<f64>,
    /// Running maximum of every entry, same layout as `cur`.
    max: Vec<f64>,
}

/// Neighbor lists in compressed form.
fn csr(g: &TileGraph) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0];
    let mut targets = Vec::new();
    for j in 0..g.len() {
        targets.extend(g.neighbors(j).iter().map(|&k| k as u32));
        offsets.push(targets.len());
    }
    (offsets, targets)
}

impl<'a> Walk<'a> {
    fn new(adj: &'a (Vec<usize>, Vec<u32>), p: f64, sources: &[usize]) -> Walk<'a> {
        let n = adj.0.len() - 1;
        let rows = sources.len();
        let mut cur = vec![0.0; n * rows];
        for (a, &s) in sources.iter().enumerate() {
            cur[s * rows + a] = 1.0;
        }
        Walk {
            offsets: &adj.0,
            targets: &adj.1,
            p,
            rows,
            next: cur.clone(),
            max: cur.clone(),
            cur,
            acc: vec![0.0; rows],
        }
    }

    fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    fn step(&mut self, track: bool) {
        let r = self.rows;
        let p = self.p;
        for j in 0..self.n() {
            let nbrs = &self.targets[self.offsets[j]..self.offsets[j + 1]];
            let own = &self.cur[j * r..(j + 1) * r];
            let out = &mut self.next[j * r..(j + 1) * r];
            if r == 1 {
                let c = own[0];
                let mut s = 0.0;
                for &k in nbrs {
                    s += self.cur[k as usize] - c;
                }
                out[0] = c + p * s;
            } else {
                self.acc.iter_mut().for_each(|s| *s = 0.0);
                for &k in nbrs {
                    let k = k as usize;
                    let other = &self.cur[k * r..(k + 1) * r];
                    for ((s, &o), &w) in self.acc.iter_mut().zip(other).zip(own) {
                        *s += o - w;
                    }
                }
                for ((o, &w), &s) in out.iter_mut().zip(own).zip(&self.acc) {
                    *o = w + p * s;
                }
            }
            if track {
                for (m, &v) in self.max[j * r..(j + 1) * r].iter_mut().zip(out.iter()) {
                    *m = m.max(v);
                }
            }
        }
        std::mem::swap(&mut self.cur, &mut self.next);
    }

    fn value(&self, row: usize, j: usize) -> f64 {
        self.cur[j * self.rows + row]
    }

    /// Whether every row has max/min within `ratio`.
    fn settled(&self, ratio: f64) -> bool {
        let r = self.rows;
        let mut lo = vec![f64::INFINITY; r];
        let mut hi = vec![0.0f64; r];
        for col in self.cur.chunks_exact(r) {
            for a in 0..r {
                lo[a] = lo[a].min(col[a]);
                hi[a] = hi[a].max(col[a]);
            }
        }
        (0..r).all(|a| lo[a] > 0.0 && hi[a] <= ratio * lo[a])
    }

    /// Running maxima as `[row][j]`.
    fn maxima(&self) -> Vec<f64> {
        let (n, r) = (self.n(), self.rows);
        let mut out = vec![0.0; n * r];
        for j in 0..n {
            for a in 0..r {
                out[a * n + j] = self.max[j * r + a];
            }
        }
        out
    }
}

const CHUNK: usize = 64;
const CHECK_EVERY: u64 = 128;

/// First step at which every row of the chunk has settled. The max/min
/// ratio of a row never increases, so settling is checked on a coarse grid
/// and then pinned down step by step from the last unsettled checkpoint.
fn chunk_horizon(
    adj: &(Vec<usize>, Vec<u32>),
    params: &DispersionParams,
    chunk: &[usize],
) -> Result<u64, DispersionError> {
    let mut w = Walk::new(adj, params.p, chunk);
    let mut t = 0u64;
    if w.settled(params.stop_ratio) {
        return Ok(0);
    }
    loop {
        let saved = w.cur.clone();
        for _ in 0..CHECK_EVERY {
            w.step(false);
        }
        if w.settled(params.stop_ratio) {
            w.cur = saved;
            loop {
                w.step(false);
                t += 1;
                if w.settled(params.stop_ratio) {
                    return Ok(t);
                }
            }
        }
        t += CHECK_EVERY;
        if t >= params.max_steps {
            return Err(DispersionError::NoConvergence(params.max_steps));
        }
    }
}

fn find_horizon(g: &TileGraph, params: &DispersionParams, sources: &[usize]) -> Result<u64, DispersionError> {
    let adj = csr(g);
    let parts: Vec<Result<u64, DispersionError>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| chunk_horizon(&adj, params, chunk))
        .collect();
    let mut horizon = 0;
    for part in parts {
        horizon = horizon.max(part?);
    }
    Ok(horizon)
}

/// Full rows `[source][j]` at each of the (increasing) `steps`, plus the
/// running maxima `[source][j]` over `0..=last step`.
fn record(g: &TileGraph, p: f64, sources: &[usize], steps: &[u64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let adj = csr(g);
    let parts: Vec<(Vec<Vec<f64>>, Vec<f64>)> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut w = Walk::new(&adj, p, chunk);
            let mut snaps = Vec::with_capacity(steps.len());
            let mut t = 0u64;
            for &s in steps {
                while t < s {
                    w.step(true);
                    t += 1;
                }
                let mut snap = vec![0.0; chunk.len() * n];
                for a in 0..chunk.len() {
                    for j in 0..n {
                        snap[a * n + j] = w.value(a, j);
                    }
                }
                snaps.push(snap);
            }
            (snaps, w.maxima())
        })
        .collect();
    let mut snaps = vec![Vec::with_capacity(sources.len() * n); steps.len()];
    let mut rowmax = Vec::with_capacity(sources.len() * n);
    for (s, m) in parts {
        for (dst, src) in snaps.iter_mut().zip(s) {
            dst.extend(src);
        }
        rowmax.extend(m);
    }
    (snaps, rowmax)
}

/// The walk started from every tile, as full `n×n` matrices at `steps`.
/// This is the plain dynamic program with no horizon or symmetry involved.
pub fn walk_matrices(g: &TileGraph, p: f64, steps: &[u64]) -> Vec<Vec<f64>> {
    let mut sorted = steps.to_vec();
    sorted.sort_unstable();
    let sources: Vec<usize> = (0..g.len()).collect();
    let (snaps, _) = record(g, p, &sources, &sorted);
    steps
        .iter()
        .map(|s| snaps[sorted.iter().position(|x| x == s).unwrap()].clone())
        .collect()
}

/// `P[i][j][t]` at a set of snapshot steps up to the horizon `T`.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    n: usize,
    p: f64,
    stop_ratio: f64,
    horizon: u64,
    /// Snapshot steps. Either every step `0..=T`, or `round(T(1−m/K)²)` for
    /// `m = 0..=K` (decreasing).
    steps: Vec<u64>,
    dense: bool,
    orbits: Orbits,
    /// `[snapshot][rep][j]`
    values: Vec<f64>,
    /// `[rep][j]`, maximum over all steps `0..=T`.
    rowmax: Vec<f64>,
}

fn build_table(g: &TileGraph, params: &DispersionParams, orbits: Orbits) -> Result<DispersionTable, DispersionError> {
    params.validate(g)?;
    let n = g.len();
    let reps = orbits.reps().to_vec();
    let horizon = find_horizon(g, params, &reps)?;
    let per_snapshot = (reps.len() * n * 8).max(1);
    let budget = (params.max_bytes / per_snapshot).max(2) - 1;
    let k = params.snapshots.max(1).min(budget);
    let (steps, dense) = if horizon as usize <= k {
        ((0..=horizon).collect::<Vec<u64>>(), true)
    } else {
        let steps = (0..=k)
            .map(|m| {
                let x = 1.0 - m as f64 / k as f64;
                (horizon as f64 * x * x).round() as u64
            })
            .collect();
        (steps, false)
    };
    let mut increasing = steps.clone();
    increasing.sort_unstable();
    increasing.dedup();
    let (snaps, rowmax) = record(g, params.p, &reps, &increasing);
    let mut values = Vec::with_capacity(steps.len() * reps.len() * n);
    for s in &steps {
        let idx = increasing.binary_search(s).expect("snapshot step recorded");
        values.extend_from_slice(&snaps[idx]);
    }
    Ok(DispersionTable {
        n,
        p: params.p,
        stop_ratio: params.stop_ratio,
        horizon,
        steps,
        dense,
        orbits,
        values,
        rowmax,
    })
}

/// Generic dispersion: every row is simulated.
pub fn simulate(g: &TileGraph, params: &DispersionParams) -> Result<DispersionTable, DispersionError> {
    build_table(g, params, Orbits::trivial(g.len()))
}

/// Dispersion for graphs whose symmetries reach every tile (tori): a single
/// row is simulated and translated.
pub fn simulate_symmetric(g: &TileGraph, params: &DispersionParams) -> Result<DispersionTable, DispersionError> {
    let o = orbits(g);
    if !o.is_transitive() {
        return Err(DispersionError::NotTransitive);
    }
    build_table(g, params, o)
}

/// Dispersion using all map symmetries: one simulated row per tile orbit.
pub fn simulate_orbits(g: &TileGraph, params: &DispersionParams) -> Result<DispersionTable, DispersionError> {
    build_table(g, params, orbits(g))
}

impl DispersionTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn stop_ratio(&self) -> f64 {
        self.stop_ratio
    }

    /// Steps at which the table holds exact values.
    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    /// Number of simulated rows.
    pub fn simulated_rows(&self) -> usize {
        self.orbits.reps().len()
    }

    /// Snapshot used at training iteration `t` of `t_max`: exactly
    /// `schedule_f(t)` when every step is stored, otherwise the grid point
    /// `round(K·t/t_max)` of the quadratic grid.
    pub fn snapshot_for(&self, t: u64, t_max: u64) -> usize {
        if self.dense {
            return schedule_f(t, t_max, self.horizon) as usize;
        }
        let k = (self.steps.len() - 1) as f64;
        if t_max == 0 {
            return 0;
        }
        ((t.min(t_max) as f64 / t_max as f64) * k).round() as usize
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> (usize, usize) {
        (self.orbits.rep_index(i), self.orbits.pull(i)[j] as usize)
    }

    /// `P[i][j]` at snapshot `m`.
    pub fn get(&self, i: usize, j: usize, m: usize) -> f64 {
        let (r, jj) = self.slot(i, j);
        let reps = self.orbits.reps().len();
        self.values[(m * reps + r) * self.n + jj]
    }

    /// `max_t P[i][j][t]` over `0..=T`.
    pub fn rowmax(&self, i: usize, j: usize) -> f64 {
        let (r, jj) = self.slot(i, j);
        self.rowmax[r * self.n + jj]
    }

    /// Full row `P[i][·]` at snapshot `m`.
    pub fn row(&self, i: usize, m: usize, out: &mut [f64]) {
        let r = self.orbits.rep_index(i);
        let reps = self.orbits.reps().len();
        let src = &self.values[(m * reps + r) * self.n..(m * reps + r + 1) * self.n];
        for (o, &jj) in out.iter_mut().zip(self.orbits.pull(i)) {
            *o = src[jj as usize];
        }
    }

    /// Update factors `η·P[i][j][f(t)] / max_t P[i][j][t]` for winner `i`.
    pub fn factors(&self, winner: usize, t: u64, t_max: u64, eta: f64, out: &mut [f64]) {
        let m = self.snapshot_for(t, t_max);
        let r = self.orbits.rep_index(winner);
        let reps = self.orbits.reps().len();
        let src = &self.values[(m * reps + r) * self.n..(m * reps + r + 1) * self.n];
        let max = &self.rowmax[r * self.n..(r + 1) * self.n];
        for (o, &jj) in out.iter_mut().zip(self.orbits.pull(winner)) {
            let jj = jj as usize;
            *o = if max[jj] > 0.0 { eta * src[jj] / max[jj] } else { 0.0 };
        }
    }

    const MAGIC: &'static [u8; 8] = b"TSDISP01";

    /// Writes the table as little-endian binary. The symmetry data is not
    /// stored; [`DispersionTable::load`] recomputes it from the graph.
    pub fn save(&self, path: &Path) -> Result<(), DispersionError> {
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            w.write_all(Self::MAGIC)?;
            let reps = self.orbits.reps();
            for v in [
                self.n as u64,
                reps.len() as u64,
                self.steps.len() as u64,
                self.horizon,
                self.dense as u64,
            ] {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in [self.p, self.stop_ratio] {
                w.write_all(&v.to_le_bytes())?;
            }
            for &r in reps {
                w.write_all(&(r as u64).to_le_bytes())?;
            }
            for &s in &self.steps {
                w.write_all(&s.to_le_bytes())?;
            }
            for &v in self.rowmax.iter().chain(&self.values) {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads a table written by [`DispersionTable::save`] for graph `g`,
    /// built with the same symmetry mode.
    pub fn load(path: &Path, g: &TileGraph, symmetric: bool) -> Result<DispersionTable, DispersionError> {
        let bad = |msg: &str| DispersionError::Cache {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        };
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(bad("not a dispersion table"));
        }
        let mut word = [0u8; 8];
        let mut u = |r: &mut BufReader<File>| -> Result<u64, std::io::Error> {
            r.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let n = u(&mut r)? as usize;
        let nreps = u(&mut r)? as usize;
        let nsteps = u(&mut r)? as usize;
        let horizon = u(&mut r)?;
        let dense = u(&mut r)? != 0;
        let p = f64::from_bits(u(&mut r)?);
        let stop_ratio = f64::from_bits(u(&mut r)?);
        if n != g.len() {
            return Err(bad("tile count differs from graph"));
        }
        let orbits = if symmetric { orbits(g) } else { Orbits::trivial(n) };
        let mut reps = Vec::with_capacity(nreps);
        for _ in 0..nreps {
            reps.push(u(&mut r)? as usize);
        }
        if reps != orbits.reps() {
            return Err(bad("orbit representatives differ from graph"));
        }
        let mut steps = Vec::with_capacity(nsteps);
        for _ in 0..nsteps {
            steps.push(u(&mut r)?);
        }
        let floats = |count: usize, r: &mut BufReader<File>| -> Result<Vec<f64>, std::io::Error> {
            let mut buf = vec![0u8; count * 8];
            r.read_exact(&mut buf)?;
            Ok(buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let rowmax = floats(nreps * n, &mut r)?;
        let values = floats(nsteps * nreps * n, &mut r)?;
        Ok(DispersionTable {
            n,
            p,
            stop_ratio,
            horizon,
            steps,
            dense,
            orbits,
            values,
            rowmax,
        })
    }
}

/// Cache file name for a table of manifold `name`.
pub fn cache_file(dir: &Path, name: &str, params: &DispersionParams, symmetric: bool) -> PathBuf {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update(params.p.to_le_bytes());
    h.update(params.stop_ratio.to_le_bytes());
    h.update((params.snapshots as u64).to_le_bytes());
    h.update((params.max_bytes as u64).to_le_bytes());
    h.update([symmetric as u8]);
    let digest = h.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{name}-{hex}.disp"))
}

/// Loads the table from `cache_dir` when present, otherwise simulates it
/// (using symmetries) and stores it there.
pub fn cached(
    g: &TileGraph,
    params: &DispersionParams,
    cache_dir: Option<&Path>,
) -> Result<DispersionTable, DispersionError> {
    let Some(dir) = cache_dir else {
        return simulate_orbits(g, params);
    };
    let path = cache_file(dir, g.name(), params, true);
    if path.exists() {
        if let Ok(t) = DispersionTable::load(&path, g, true) {
            return Ok(t);
        }
    }
    let table = simulate_orbits(g, params)?;
    std::fs::create_dir_all(dir)?;
    table.save(&path)?;
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceMode {
    /// Graph distance in hops.
    Hops,
    /// Distance between tile centers in the covering surface.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub eta: f64,
    pub sigma0: f64,
    pub mode: DistanceMode,
}

/// `η·exp(−r²/(2σ(t)²))` with `σ(t) = σ₀(1 − t/t_max)`. When `σ(t) = 0` only
/// `r = 0` receives `η`.
pub fn gaussian_factor(r: f64, t: u64, t_max: u64, params: &GaussianParams) -> f64 {
    let frac = if t_max == 0 {
        1.0
    } else {
        t.min(t_max) as f64 / t_max as f64
    };
    let sigma = params.sigma0 * (1.0 - frac);
    if sigma <= 0.0 {
        return if r == 0.0 { params.eta } else { 0.0 };
    }
    params.eta * (-(r * r) / (2.0 * sigma * sigma)).exp()
}

/// Pairwise distances between tile centers, `n×n` row-major.
pub fn geometric_distances(g: &TileGraph) -> Result<Vec<f64>, DispersionError> {
    if g.is_closed() && g.meta().geometry != GeometryClass::Spherical {
        return Err(DispersionError::GeometricUnsupported);
    }
    let c = g.centers().ok_or(DispersionError::NoCenters)?;
    let n = c.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| c[i].distance(&c[j]).unwrap_or(f64::INFINITY)).collect())
        .collect();
    Ok(rows.concat())
}
