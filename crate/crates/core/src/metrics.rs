//! Quality of an embedding `e: T_O → T_E` produced by a trained map, and the
//! Wilcoxon signed-rank test used to compare dispersion modes.

use std::collections::VecDeque;

use thiserror::Error;

use crate::som::{Dataset, SomState};
use crate::tessellation::{DistanceTable, TileGraph};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("assignment covers {got} tiles, origin has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("tile {0} is not a tile of the target")]
    BadTile(usize),
    #[error("{0} is undefined for this input")]
    Undefined(&'static str),
    #[error("tears are only defined when both manifolds are closed")]
    NotClosed,
    #[error("no data samples")]
    NoSamples,
    #[error("weights have dimension {weights}, data {data}")]
    DimensionMismatch { weights: usize, data: usize },
}

/// An embedding of the tiles of `origin` into the tiles of `target`, with
/// both distance tables. `assignment[t]` is the image of origin tile `t`.
#[derive(Debug, Clone, Copy)]
pub struct Embedding<'a> {
    pub origin: &'a TileGraph,
    pub target: &'a TileGraph,
    pub origin_dist: &'a DistanceTable,
    pub target_dist: &'a DistanceTable,
    pub assignment: &'a [usize],
}

impl<'a> Embedding<'a> {
    pub fn new(
        origin: &'a TileGraph,
        target: &'a TileGraph,
        origin_dist: &'a DistanceTable,
        target_dist: &'a DistanceTable,
        assignment: &'a [usize],
    ) -> Result<Embedding<'a>, MetricsError> {
        if assignment.len() != origin.len() {
            return Err(MetricsError::LengthMismatch {
                expected: origin.len(),
                got: assignment.len(),
            });
        }
        if let Some(&bad) = assignment.iter().find(|&&t| t >= target.len()) {
            return Err(MetricsError::BadTile(bad));
        }
        Ok(Embedding {
            origin,
            target,
            origin_dist,
            target_dist,
            assignment,
        })
    }

    fn image_distance(&self, a: usize, b: usize) -> u32 {
        self.target_dist.get(self.assignment[a], self.assignment[b])
    }
}

/// Mean of `δ_E(e(t), e(t'))² − 1` over the edges of the origin; 0 when every
/// edge lands on an edge.
pub fn energy(emb: &Embedding) -> f64 {
    let edges = emb.origin.edges();
    if edges.is_empty() {
        return 0.0;
    }
    let sum: f64 = edges
        .iter()
        .map(|&(a, b)| {
            let d = emb.image_distance(a, b) as f64;
            d * d - 1.0
        })
        .sum();
    sum / edges.len() as f64
}

/// `100(1 − k)`, where `k` compares origin and target distances over all
/// pairs of tile pairs whose origin distances differ.
pub fn kendall_unfitness(emb: &Embedding) -> Result<f64, MetricsError> {
    let n = emb.origin.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((emb.origin_dist.get(i, j), emb.image_distance(i, j)));
        }
    }
    kendall_from_pairs(&mut pairs)
}

/// Unfitness of `(d_O, d_E)` pairs. Sorts the input. Concordant and discordant
/// counts come from a Fenwick tree over `d_E`, one `d_O` group at a time.
pub fn kendall_from_pairs(pairs: &mut [(u32, u32)]) -> Result<f64, MetricsError> {
    pairs.sort_unstable();
    let top = pairs.iter().map(|p| p.1).max().unwrap_or(0) as usize + 1;
    let mut tree = vec![0u64; top + 1];
    let prefix = |tree: &[u64], mut i: usize| {
        let mut s = 0;
        while i > 0 {
            s += tree[i];
            i &= i - 1;
        }
        s
    };
    let (mut concordant, mut discordant, mut comparable) = (0u64, 0u64, 0u64);
    let mut seen = 0u64;
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start;
        while end < pairs.len() && pairs[end].0 == pairs[start].0 {
            end += 1;
        }
        for &(_, de) in &pairs[start..end] {
            let below = prefix(&tree, de as usize);
            let upto = prefix(&tree, de as usize + 1);
            concordant += below;
            discordant += seen - upto;
        }
        comparable += seen * (end - start) as u64;
        for &(_, de) in &pairs[start..end] {
            let mut i = de as usize + 1;
            while i <= top {
                tree[i] += 1;
                i += i & i.wrapping_neg();
            }
        }
        seen += (end - start) as u64;
        start = end;
    }
    if comparable == 0 {
        return Err(MetricsError::Undefined("Kendall unfitness"));
    }
    let k = (concordant as f64 - discordant as f64) / comparable as f64;
    Ok(100.0 * (1.0 - k))
}

/// Quadratic reference implementation of [`kendall_from_pairs`].
pub fn kendall_brute_force(pairs: &[(u32, u32)]) -> Result<f64, MetricsError> {
    let (mut score, mut comparable) = (0i64, 0i64);
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i + 1..] {
            if a.0 == b.0 {
                continue;
            }
            comparable += 1;
            let o = (a.0 as i64 - b.0 as i64).signum();
            let e = (a.1 as i64 - b.1 as i64).signum();
            score += o * e;
        }
    }
    if comparable == 0 {
        return Err(MetricsError::Undefined("Kendall unfitness"));
    }
    Ok(100.0 * (1.0 - score as f64 / comparable as f64))
}

/// Number of empty target tiles lying within `r` of two occupied tiles on a
/// shortest path between them.
pub fn tears(emb: &Embedding, r: u32) -> Result<usize, MetricsError> {
    if !emb.origin.is_closed() || !emb.target.is_closed() {
        return Err(MetricsError::NotClosed);
    }
    let m = emb.target.len();
    let mut occupied = vec![false; m];
    for &t in emb.assignment {
        occupied[t] = true;
    }
    let d = emb.target_dist;
    let mut count = 0;
    for t in (0..m).filter(|&t| !occupied[t]) {
        let near: Vec<usize> = (0..m).filter(|&u| occupied[u] && d.get(t, u) <= r).collect();
        let torn = near
            .iter()
            .enumerate()
            .any(|(i, &a)| near[i + 1..].iter().any(|&b| d.get(t, a) + d.get(t, b) == d.get(a, b)));
        if torn {
            count += 1;
        }
    }
    Ok(count)
}

/// Samples closer than this to two sites count as lying on both cells.
pub const VILLMANN_TIE: f64 = 1e-9;

/// Villmann measures below this are treated as error-free.
pub const VILLMANN_CENSOR: u32 = 8;

/// The Villmann measure with the continuous Voronoi cells replaced by cells
/// of data samples. Sample `i` must come from origin tile `i`, or from the
/// tile recorded in the dataset's source tiles.
pub fn villmann(emb: &Embedding, weights: &SomState, data: &Dataset) -> Result<u32, MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::NoSamples);
    }
    if weights.dim() != data.dim() {
        return Err(MetricsError::DimensionMismatch {
            weights: weights.dim(),
            data: data.dim(),
        });
    }
    let m = emb.target.len();
    if weights.len() != m {
        return Err(MetricsError::LengthMismatch {
            expected: m,
            got: weights.len(),
        });
    }
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();

    // site of each tile: the sample nearest to its weight
    let site: Vec<usize> = (0..m)
        .map(|t| {
            let w = weights.weight(t);
            let mut best = (f64::INFINITY, 0);
            for (i, s) in data.samples().enumerate() {
                let d = sq(w, s);
                if d < best.0 {
                    best = (d, i);
                }
            }
            best.1
        })
        .collect();
    let mut sites: Vec<usize> = site.clone();
    sites.sort_unstable();
    sites.dedup();
    let mut tiles_at = vec![Vec::new(); data.len()];
    for (t, &s) in site.iter().enumerate() {
        tiles_at[s].push(t);
    }

    // cells: each sample belongs to every tile whose site is nearest, up to ties
    let owners: Vec<Vec<usize>> = data
        .samples()
        .map(|x| {
            let ds: Vec<f64> = sites.iter().map(|&s| sq(x, data.sample(s)).sqrt()).collect();
            let min = ds.iter().copied().fold(f64::INFINITY, f64::min);
            sites
                .iter()
                .zip(&ds)
                .filter(|&(_, &d)| d <= min + VILLMANN_TIE)
                .flat_map(|(&s, _)| tiles_at[s].iter().copied())
                .collect()
        })
        .collect();

    let mut adj = vec![Vec::new(); m];
    let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for own in &owners {
        for (i, &a) in own.iter().enumerate() {
            for &b in &own[i + 1..] {
                link(a, b, &mut adj);
            }
        }
    }
    let samples_of = |tile: usize| -> Vec<usize> {
        match data.source_tiles() {
            Some(src) => (0..data.len()).filter(|&i| src[i] == tile).collect(),
            None if tile < data.len() => vec![tile],
            None => Vec::new(),
        }
    };
    let origin_samples: Vec<Vec<usize>> = (0..emb.origin.len()).map(samples_of).collect();
    for (a, b) in emb.origin.edges() {
        for &sa in &origin_samples[a] {
            for &sb in &origin_samples[b] {
                for &ta in &owners[sa] {
                    for &tb in &owners[sb] {
                        link(ta, tb, &mut adj);
                    }
                }
            }
        }
    }

    let bfs = |src: usize| {
        let mut dist = vec![u32::MAX; m];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    };
    let dv: Vec<Vec<u32>> = (0..m).map(bfs).collect();
    let diam_v = dv
        .iter()
        .flatten()
        .copied()
        .filter(|&d| d != u32::MAX)
        .max()
        .unwrap_or(0);
    let penalty = emb.target_dist.diameter() + diam_v + 1;
    let first = emb
        .target
        .edges()
        .iter()
        .map(|&(a, b)| if dv[a][b] == u32::MAX { penalty } else { dv[a][b] })
        .max()
        .unwrap_or(0);
    let second = (0..m)
        .flat_map(|a| adj[a].iter().map(move |&b| (a, b)))
        .map(|(a, b)| emb.target_dist.get(a, b))
        .max()
        .unwrap_or(0);
    // the ideal value of each term is 1
    Ok((first + second).saturating_sub(2))
}

pub fn censor_villmann(v: u32) -> u32 {
    if v < VILLMANN_CENSOR {
        0
    } else {
        v
    }
}

/// All measures of one trained map.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub energy: f64,
    pub kendall_unfitness: Option<f64>,
    pub tears1: Option<usize>,
    pub villmann: u32,
    pub villmann_censored: u32,
    pub seed: u64,
    pub runtime_ms: u64,
}

/// Computes every measure; tears only when both manifolds are closed. The
/// runtime is left at 0 for the caller to fill in.
pub fn evaluate(emb: &Embedding, weights: &SomState, data: &Dataset, seed: u64) -> Result<QualityReport, MetricsError> {
    let kendall = match kendall_unfitness(emb) {
        Ok(k) => Some(k),
        Err(MetricsError::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    let tears1 = match tears(emb, 1) {
        Ok(n) => Some(n),
        Err(MetricsError::NotClosed) => None,
        Err(e) => return Err(e),
    };
    let v = villmann(emb, weights, data)?;
    Ok(QualityReport {
        energy: energy(emb),
        kendall_unfitness: kendall,
        tears1,
        villmann: v,
        villmann_censored: censor_villmann(v),
        seed,
        runtime_ms: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alternative {
    TwoSided,
    /// Differences tend to be negative.
    Less,
    /// Differences tend to be positive.
    Greater,
}

/// Largest sample size for which the exact null distribution is used.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// Wilcoxon signed-rank p-value. Zero differences are dropped and tied
/// magnitudes get average ranks; the statistic is the positive rank sum.
pub fn wilcoxon_signed_rank(diffs: &[f64], alt: Alternative) -> Result<f64, MetricsError> {
    let mut nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    if nz.is_empty() || nz.iter().any(|d| !d.is_finite()) {
        return Err(MetricsError::Undefined("Wilcoxon signed-rank test"));
    }
    nz.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let n = nz.len();
    // doubled average ranks keep everything integral
    let mut ranks2 = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && nz[j].abs() == nz[i].abs() {
            j += 1;
        }
        for r in &mut ranks2[i..j] {
            *r = (i + 1 + j) as u64;
        }
        ties.push((j - i) as f64);
        i = j;
    }
    let w2: u64 = nz.iter().zip(&ranks2).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let (p_greater, p_less) = if n <= WILCOXON_EXACT_MAX {
        let dist = signed_rank_distribution(&ranks2);
        let total: f64 = dist.iter().sum();
        let ge: f64 = dist[w2 as usize..].iter().sum();
        let le: f64 = dist[..=w2 as usize].iter().sum();
        (ge / total, le / total)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|t| t * t * t - t).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        if var <= 0.0 {
            return Err(MetricsError::Undefined("Wilcoxon signed-rank test"));
        }
        let z = (w2 as f64 / 2.0 - mean) / var.sqrt();
        (normal_sf(z), normal_sf(-z))
    };
    Ok(match alt {
        Alternative::Greater => p_greater,
        Alternative::Less => p_less,
        Alternative::TwoSided => (2.0 * p_greater.min(p_less)).min(1.0),
    })
}

/// Number of sign patterns giving each doubled positive rank sum.
fn signed_rank_distribution(ranks2: &[u64]) -> Vec<f64> {
    let top: u64 = ranks2.iter().sum();
    let mut dist = vec![0.0; top as usize + 1];
    dist[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if dist[s] != 0.0 {
                dist[s + r] += dist[s];
            }
        }
        reach += r;
    }
    dist
}

fn normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}
