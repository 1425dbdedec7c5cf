//! Self-organizing map training on a tile graph.

use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dispersion::{gaussian_factor, DispersionTable, GaussianParams};
use crate::tessellation::TileGraph;

#[derive(Debug, Error)]
pub enum SomError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("expected vectors of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in sample {0}")]
    NonFinite(usize),
    #[error("neighborhood covers {table} tiles but the map has {map}")]
    SizeMismatch { table: usize, map: usize },
    #[error("learning rate must lie in (0, 1], got {0}")]
    BadEta(f64),
    #[error("weight file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Samples in `R^k`, optionally labeled and tied to the tiles they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    source_tiles: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Dataset, SomError> {
        let dim = samples.first().ok_or(SomError::EmptyDataset)?.len();
        let mut values = Vec::with_capacity(samples.len() * dim);
        for (i, s) in samples.iter().enumerate() {
            if s.len() != dim {
                return Err(SomError::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(SomError::NonFinite(i));
            }
            values.extend_from_slice(s);
        }
        Ok(Dataset {
            dim,
            values,
            labels: None,
            source_tiles: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Dataset {
        assert_eq!(labels.len(), self.len());
        self.labels = Some(labels);
        self
    }

    pub fn with_source_tiles(mut self, tiles: Vec<usize>) -> Dataset {
        assert_eq!(tiles.len(), self.len());
        self.source_tiles = Some(tiles);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn source_tiles(&self) -> Option<&[usize]> {
        self.source_tiles.as_deref()
    }

    /// Per-coordinate `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for s in self.samples() {
            for (bi, &v) in b.iter_mut().zip(s) {
                bi.0 = bi.0.min(v);
                bi.1 = bi.1.max(v);
            }
        }
        b
    }

    /// Zero mean and unit variance per coordinate; constant coordinates are
    /// only centered.
    pub fn standardized(&self) -> Dataset {
        let n = self.len() as f64;
        let mut out = self.clone();
        for c in 0..self.dim {
            let mean = self.samples().map(|s| s[c]).sum::<f64>() / n;
            let var = self.samples().map(|s| (s[c] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            for i in 0..self.len() {
                let v = &mut out.values[i * self.dim + c];
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitMode {
    /// Each coordinate uniform between the data's minimum and maximum.
    UniformBox,
    /// Each weight a copy of a random sample.
    SampleCopy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub t_max: u64,
    pub eta: f64,
    pub seed: u64,
    pub init: InitMode,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            t_max: 30_000,
            eta: 0.1,
            seed: 0,
            init: InitMode::UniformBox,
        }
    }
}

/// How the winner's update spreads to the other neurons.
#[derive(Debug, Clone, Copy)]
pub enum Neighborhood<'a> {
    /// `η·P[i][j][f(t)] / max_t P[i][j][t]`.
    Simulated(&'a DispersionTable),
    /// Gaussian of a distance given as a row-major `n×n` matrix.
    Gaussian {
        params: GaussianParams,
        distances: &'a [f64],
    },
}

impl Neighborhood<'_> {
    fn len(&self) -> usize {
        match self {
            Neighborhood::Simulated(t) => t.len(),
            Neighborhood::Gaussian { distances, .. } => (distances.len() as f64).sqrt().round() as usize,
        }
    }

    /// Update factors for all neurons when `winner` wins at iteration `t`.
    pub fn factors(&self, winner: usize, t: u64, t_max: u64, eta: f64, out: &mut [f64]) {
        match self {
            Neighborhood::Simulated(table) => table.factors(winner, t, t_max, eta, out),
            Neighborhood::Gaussian { params, distances } => {
                let n = out.len();
                let params = GaussianParams { eta, ..*params };
                for (j, o) in out.iter_mut().enumerate() {
                    *o = gaussian_factor(distances[winner * n + j], t, t_max, &params);
                }
            }
        }
    }
}

/// Weights of every neuron (tile), row-major `n×k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SomState {
    n: usize,
    k: usize,
    weights: Vec<f64>,
    pub iteration: u64,
}

impl SomState {
    pub fn from_weights(n: usize, k: usize, weights: Vec<f64>) -> SomState {
        assert_eq!(weights.len(), n * k);
        SomState {
            n,
            k,
            weights,
            iteration: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn weight(&self, i: usize) -> &[f64] {
        &self.weights[i * self.k..(i + 1) * self.k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Neuron whose weight is nearest to `x`; the lowest index wins ties.
    pub fn best_matching_unit(&self, x: &[f64]) -> Result<usize, SomError> {
        if x.len() != self.k {
            return Err(SomError::DimensionMismatch {
                expected: self.k,
                got: x.len(),
            });
        }
        Ok(self.bmu(x))
    }

    fn bmu(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, w) in self.weights.chunks_exact(self.k).enumerate() {
            let d: f64 = w.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// One competition and adaptation step on sample `x`; `factors` is scratch
    /// space of length `n`. Returns the winner.
    pub fn train_step(
        &mut self,
        x: &[f64],
        t: u64,
        t_max: u64,
        eta: f64,
        nb: &Neighborhood,
        factors: &mut [f64],
    ) -> Result<usize, SomError> {
        let winner = self.best_matching_unit(x)?;
        nb.factors(winner, t, t_max, eta, factors);
        for (w, &f) in self.weights.chunks_exact_mut(self.k).zip(factors.iter()) {
            if f == 0.0 {
                continue;
            }
            for (wi, &xi) in w.iter_mut().zip(x) {
                *wi += f * (xi - *wi);
            }
        }
        self.iteration = t + 1;
        Ok(winner)
    }

    /// Best matching unit of every sample.
    pub fn assign(&self, data: &Dataset) -> Vec<usize> {
        data.samples().map(|s| self.bmu(s)).collect()
    }

    /// Writes `som <manifold> <n> <k> <seed>` followed by one line per neuron.
    pub fn write_weights<W: Write>(&self, mut w: W, manifold: &str, seed: u64) -> Result<(), SomError> {
        writeln!(w, "som {manifold} {} {} {seed}", self.n, self.k)?;
        for row in self.weights.chunks_exact(self.k) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Reads a weight dump; returns the state, manifold name and seed.
    pub fn read_weights<R: BufRead>(r: R) -> Result<(SomState, String, u64), SomError> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| SomError::Parse("empty file".into()))??;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "som" {
            return Err(SomError::Parse(format!("bad header `{header}`")));
        }
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| SomError::Parse(format!("bad number `{s}`")))
        };
        let (n, k, seed) = (num(h[2])? as usize, num(h[3])? as usize, num(h[4])?);
        let mut weights = Vec::with_capacity(n * k);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| SomError::Parse(format!("missing row {i}")))??;
            let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let row = row.map_err(|_| SomError::Parse(format!("bad row {i}")))?;
            if row.len() != k {
                return Err(SomError::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            weights.extend(row);
        }
        Ok((SomState::from_weights(n, k, weights), h[1].to_string(), seed))
    }
}

/// Initial weights for `n` neurons, deterministic in `rng`.
pub fn init_weights(n: usize, data: &Dataset, mode: InitMode, rng: &mut ChaCha8Rng) -> Result<SomState, SomError> {
    if data.is_empty() {
        return Err(SomError::EmptyDataset);
    }
    let k = data.dim();
    let mut weights = Vec::with_capacity(n * k);
    match mode {
        InitMode::UniformBox => {
            let bounds = data.bounds();
            for _ in 0..n {
                for &(lo, hi) in &bounds {
                    weights.push(if hi > lo { rng.gen_range(lo..=hi) } else { lo });
                }
            }
        }
        InitMode::SampleCopy => {
            for _ in 0..n {
                weights.extend_from_slice(data.sample(rng.gen_range(0..data.len())));
            }
        }
    }
    Ok(SomState::from_weights(n, k, weights))
}

/// A trained map together with the final best matching unit of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub state: SomState,
    pub assignment: Vec<usize>,
}

/// Initializes and trains a map on the tiles of `graph`. One random
/// generator seeded from `params.seed` drives initialization and then the
/// choice of sample at each of the `t_max` iterations.
pub fn train(graph: &TileGraph, data: &Dataset, params: &TrainParams, nb: &Neighborhood) -> Result<Trained, SomError> {
    if !(params.eta > 0.0 && params.eta <= 1.0) {
        return Err(SomError::BadEta(params.eta));
    }
    let n = graph.len();
    if nb.len() != n {
        return Err(SomError::SizeMismatch {
            table: nb.len(),
            map: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = init_weights(n, data, params.init, &mut rng)?;
    let mut factors = vec![0.0; n];
    for t in 0..params.t_max {
        let i = rng.gen_range(0..data.len());
        state.train_step(data.sample(i), t, params.t_max, params.eta, nb, &mut factors)?;
    }
    let assignment = state.assign(data);
    Ok(Trained { state, assignment })
}

/// Mean distance between each neuron's weight and its neighbors' weights.
pub fn umatrix(state: &SomState, graph: &TileGraph) -> Vec<f64> {
    (0..state.len())
        .map(|i| {
            let nb = graph.neighbors(i);
            if nb.is_empty() {
                return 0.0;
            }
            let wi = state.weight(i);
            nb.iter()
                .map(|&j| {
                    wi.iter()
                        .zip(state.weight(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum::<f64>()
                / nb.len() as f64
        })
        .collect()
}
