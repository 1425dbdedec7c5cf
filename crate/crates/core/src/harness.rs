//! Experiments: every (origin, target, dispersion mode, repetition) run is
//! a dataset built from the origin, a map trained on the target and a
//! quality report. Results go to CSV; paired runs are compared with the
//! Wilcoxon test.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::datagen::{self, DatagenError, ManifoldDataset, LANDSCAPE_DIM};
use crate::dispersion::{self, DispersionError, DispersionParams, DispersionTable, DistanceMode, GaussianParams};
use crate::metrics::{self, Alternative, Embedding, MetricsError};
use crate::som::{self, InitMode, Neighborhood, SomError, TrainParams};
use crate::tessellation::{catalog, DistanceTable, TessellationError, TileGraph};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Whether the error comes from bad input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Toml(_)
                | HarnessError::Tessellation(TessellationError::UnknownManifold(_))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionMode {
    Simulated,
    GaussianDiscrete,
    GaussianGeometric,
}

impl DispersionMode {
    pub const ALL: [DispersionMode; 3] = [
        DispersionMode::Simulated,
        DispersionMode::GaussianDiscrete,
        DispersionMode::GaussianGeometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DispersionMode::Simulated => "simulated",
            DispersionMode::GaussianDiscrete => "gaussian_discrete",
            DispersionMode::GaussianGeometric => "gaussian_geometric",
        }
    }

    pub fn is_gaussian(self) -> bool {
        self != DispersionMode::Simulated
    }
}

impl fmt::Display for DispersionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DispersionMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DispersionMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown dispersion mode `{s}`")))
    }
}

/// Dataset generator for an origin manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Natural,
    Signpost,
    Landscape,
    LandscapeDeterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatagenSpec {
    pub method: MethodKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    LANDSCAPE_DIM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub origin: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub t_max: u64,
    pub eta: f64,
    pub init: InitKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    UniformBox,
    SampleCopy,
}

impl From<InitKind> for InitMode {
    fn from(k: InitKind) -> InitMode {
        match k {
            InitKind::UniformBox => InitMode::UniformBox,
            InitKind::SampleCopy => InitMode::SampleCopy,
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainParams::default();
        TrainSection {
            t_max: d.t_max,
            eta: d.eta,
            init: InitKind::UniformBox,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    pub p: f64,
    pub stop_ratio: f64,
    pub snapshots: usize,
    pub max_steps: u64,
    /// Initial Gaussian radius; the target's diameter when absent.
    pub sigma0: Option<f64>,
}

impl Default for DispersionSection {
    fn default() -> Self {
        let d = DispersionParams::default();
        DispersionSection {
            p: d.p,
            stop_ratio: d.stop_ratio,
            snapshots: d.snapshots,
            max_steps: d.max_steps,
            sigma0: None,
        }
    }
}

impl DispersionSection {
    pub fn params(&self) -> DispersionParams {
        DispersionParams {
            p: self.p,
            stop_ratio: self.stop_ratio,
            snapshots: self.snapshots,
            max_steps: self.max_steps,
            ..DispersionParams::default()
        }
    }
}

/// Experiment description, read from TOML.
///
/// Pairs are the explicit `pairs` plus the cross product of `origins` and
/// `targets`, in that order, without duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub origins: Vec<String>,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default)]
    pub pairs: Vec<PairSpec>,
    #[serde(default = "default_modes")]
    pub modes: Vec<DispersionMode>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub dispersion: DispersionSection,
    /// Generator overrides keyed by origin name.
    #[serde(default)]
    pub datagen: BTreeMap<String, DatagenSpec>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_modes() -> Vec<DispersionMode> {
    vec![DispersionMode::Simulated, DispersionMode::GaussianDiscrete]
}

pub const CONFIG_VERSION: u32 = 1;

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<ExperimentConfig, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn pair_list(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .pairs
            .iter()
            .map(|p| (p.origin.clone(), p.target.clone()))
            .collect();
        for o in &self.origins {
            for t in &self.targets {
                out.push((o.clone(), t.clone()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|p| seen.insert(p.clone()));
        out
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.version != CONFIG_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Config("repetitions must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(HarnessError::Config("no dispersion modes".into()));
        }
        let pairs = self.pair_list();
        if pairs.is_empty() {
            return Err(HarnessError::Config("no manifold pairs".into()));
        }
        for (o, t) in &pairs {
            for name in [o, t] {
                let base = name.strip_suffix("-x2").unwrap_or(name);
                catalog::entry(base)?;
            }
        }
        if !(self.train.eta > 0.0 && self.train.eta <= 1.0) {
            return Err(HarnessError::Config(format!(
                "eta must lie in (0, 1], got {}",
                self.train.eta
            )));
        }
        if matches!(self.dispersion.sigma0, Some(s) if s <= 0.0) {
            return Err(HarnessError::Config("sigma0 must be positive".into()));
        }
        Ok(())
    }

    pub fn total_runs(&self) -> usize {
        self.pair_list().len() * self.repetitions * self.modes.len()
    }
}

/// Seed derived from the base seed and a list of labels.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Seed for training repetition `rep` of a pair. The mode is not part of it,
/// so runs of different modes share dataset, initial weights and sample order.
pub fn run_seed(base: u64, origin: &str, target: &str, rep: usize) -> u64 {
    derive_seed(base, &["run", origin, target, &rep.to_string()])
}

/// Seed for the dataset of repetition `rep` of an origin.
pub fn data_seed(base: u64, origin: &str, rep: usize) -> u64 {
    derive_seed(base, &["data", origin, &rep.to_string()])
}

/// The dataset for `origin` under `spec`, or the manifest default.
pub fn make_dataset(g: &TileGraph, spec: Option<&DatagenSpec>, seed: u64) -> Result<ManifoldDataset, HarnessError> {
    let base = g.name().strip_suffix("-x2").unwrap_or(g.name());
    let entry = catalog::entry(base)?;
    let d = match spec {
        None => datagen::default_embedding(g, entry, seed)?,
        Some(s) => match s.method {
            MethodKind::Natural => datagen::natural_embedding(g)?,
            MethodKind::Signpost => {
                let rule = entry.signposts.unwrap_or(catalog::SignpostRule::Irregular);
                datagen::signpost_embedding(g, &rule)?
            }
            MethodKind::Landscape => datagen::landscape_embedding(g, s.dim, seed)?,
            MethodKind::LandscapeDeterministic => datagen::landscape_deterministic(g)?,
        },
    };
    Ok(d)
}

/// A manifold with what the runs need from it.
pub struct Prepared {
    pub graph: TileGraph,
    pub dist: DistanceTable,
    pub table: Option<DispersionTable>,
    pub hops: Option<Vec<f64>>,
    pub geometric: Option<Vec<f64>>,
}

impl Prepared {
    pub fn new(
        name: &str,
        modes: &[DispersionMode],
        params: &DispersionParams,
        cache_dir: Option<&Path>,
    ) -> Result<Prepared, HarnessError> {
        let graph = catalog::resolve(name)?;
        let dist = graph.distances()?;
        let mut p = Prepared {
            graph,
            dist,
            table: None,
            hops: None,
            geometric: None,
        };
        if modes.contains(&DispersionMode::Simulated) {
            p.table = Some(dispersion::cached(&p.graph, params, cache_dir)?);
        }
        if modes.contains(&DispersionMode::GaussianDiscrete) {
            let n = p.graph.len();
            p.hops = Some((0..n * n).map(|k| p.dist.get(k / n, k % n) as f64).collect());
        }
        if modes.contains(&DispersionMode::GaussianGeometric) {
            p.geometric = dispersion::geometric_distances(&p.graph).ok();
        }
        Ok(p)
    }

    /// The neighborhood function of `mode`; `sigma0` defaults to the largest
    /// distance of the matching kind.
    pub fn neighborhood<'a>(
        &'a self,
        mode: DispersionMode,
        eta: f64,
        sigma0: Option<f64>,
    ) -> Result<Neighborhood<'a>, HarnessError> {
        let gaussian = |distances: &'a [f64], kind| gaussian_neighborhood(distances, kind, eta, sigma0);
        match mode {
            DispersionMode::Simulated => self
                .table
                .as_ref()
                .map(Neighborhood::Simulated)
                .ok_or_else(|| HarnessError::Config("dispersion table not prepared".into())),
            DispersionMode::GaussianDiscrete => self
                .hops
                .as_deref()
                .map(|d| gaussian(d, DistanceMode::Hops))
                .ok_or_else(|| HarnessError::Config("hop distances not prepared".into())),
            DispersionMode::GaussianGeometric => self
                .geometric
                .as_deref()
                .map(|d| gaussian(d, DistanceMode::Geometric))
                .ok_or(HarnessError::Dispersion(DispersionError::GeometricUnsupported)),
        }
    }
}

fn gaussian_neighborhood(distances: &[f64], mode: DistanceMode, eta: f64, sigma0: Option<f64>) -> Neighborhood<'_> {
    let sigma0 = sigma0.unwrap_or_else(|| distances.iter().copied().fold(0.0, f64::max));
    Neighborhood::Gaussian {
        params: GaussianParams { eta, sigma0, mode },
        distances,
    }
}

/// Header of the run CSV, in [`RunRow`] field order.
pub const CSV_COLUMNS: [&str; 12] = [
    "origin",
    "target",
    "method",
    "dispersion_mode",
    "seed",
    "energy",
    "kendall_unfitness",
    "tears1",
    "villmann",
    "villmann_censored",
    "runtime_ms",
    "error",
];

/// One CSV row. Measures are empty when undefined or when the run failed;
/// `error` is empty on success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub origin: String,
    pub target: String,
    pub method: String,
    pub dispersion_mode: DispersionMode,
    pub seed: u64,
    pub energy: Option<f64>,
    pub kendall_unfitness: Option<f64>,
    pub tears1: Option<usize>,
    pub villmann: Option<u32>,
    pub villmann_censored: Option<u32>,
    pub runtime_ms: u64,
    #[serde(default)]
    pub error: String,
}

impl RunRow {
    pub fn ok(&self) -> bool {
        self.error.is_empty()
    }

    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Energy => self.energy,
            Metric::KendallUnfitness => self.kendall_unfitness,
            Metric::Tears1 => self.tears1.map(|v| v as f64),
            Metric::Villmann => self.villmann.map(f64::from),
            Metric::VillmannCensored => self.villmann_censored.map(f64::from),
        }
    }
}

/// Everything one run needs; shared across runs.
pub struct RunInputs<'a> {
    pub origin: &'a Prepared,
    pub target: &'a Prepared,
    pub data: &'a ManifoldDataset,
    pub mode: DispersionMode,
    pub seed: u64,
    pub train: &'a TrainSection,
    pub sigma0: Option<f64>,
}

/// A trained map with its embedding and report.
pub struct RunOutput {
    pub trained: som::Trained,
    pub assignment: Vec<usize>,
    pub report: metrics::QualityReport,
}

/// Trains and evaluates one map.
pub fn run_one(inp: &RunInputs) -> Result<RunOutput, HarnessError> {
    let start = Instant::now();
    let nb = inp.target.neighborhood(inp.mode, inp.train.eta, inp.sigma0)?;
    let params = TrainParams {
        t_max: inp.train.t_max,
        eta: inp.train.eta,
        seed: inp.seed,
        init: inp.train.init.into(),
    };
    let trained = som::train(&inp.target.graph, &inp.data.data, &params, &nb)?;
    let assignment = origin_assignment(&inp.data.data, &trained.assignment, inp.origin.graph.len())?;
    let emb = Embedding::new(
        &inp.origin.graph,
        &inp.target.graph,
        &inp.origin.dist,
        &inp.target.dist,
        &assignment,
    )?;
    let mut report = metrics::evaluate(&emb, &trained.state, &inp.data.data, inp.seed)?;
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(RunOutput {
        trained,
        assignment,
        report,
    })
}

/// Image of each origin tile, from the per-sample assignment.
pub fn origin_assignment(
    data: &som::Dataset,
    per_sample: &[usize],
    n_origin: usize,
) -> Result<Vec<usize>, HarnessError> {
    let mut out = vec![usize::MAX; n_origin];
    match data.source_tiles() {
        Some(src) => {
            for (&t, &a) in src.iter().zip(per_sample) {
                if t < n_origin && out[t] == usize::MAX {
                    out[t] = a;
                }
            }
        }
        None => {
            for (o, &a) in out.iter_mut().zip(per_sample) {
                *o = a;
            }
        }
    }
    if out.contains(&usize::MAX) {
        return Err(HarnessError::Config("dataset does not cover every origin tile".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub cache_dir: Option<PathBuf>,
}

/// Runs every (pair, repetition, mode). Failed runs become rows with an
/// error message. Rows are ordered by pair, repetition and mode, whatever
/// the completion order. `progress` sees each finished row.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    progress: Option<&(dyn Fn(&RunRow) + Sync)>,
) -> Result<Vec<RunRow>, HarnessError> {
    cfg.validate()?;
    let pairs = cfg.pair_list();
    let dparams = cfg.dispersion.params();

    let mut names: Vec<&String> = pairs.iter().flat_map(|(o, t)| [o, t]).collect();
    names.sort();
    names.dedup();
    let mut prepared: HashMap<String, Result<Prepared, String>> = HashMap::new();
    for name in names {
        let as_target = pairs.iter().any(|(_, t)| t == name);
        let modes: &[DispersionMode] = if as_target { &cfg.modes } else { &[] };
        let p = Prepared::new(name, modes, &dparams, opts.cache_dir.as_deref()).map_err(|e| e.to_string());
        prepared.insert(name.clone(), p);
    }

    let origins: Vec<&String> = {
        let mut o: Vec<&String> = pairs.iter().map(|(o, _)| o).collect();
        o.sort();
        o.dedup();
        o
    };
    let mut datasets: HashMap<(String, usize), Result<ManifoldDataset, String>> = HashMap::new();
    for o in origins {
        for rep in 0..cfg.repetitions {
            let d = match &prepared[o] {
                Ok(p) => {
                    make_dataset(&p.graph, cfg.datagen.get(o), data_seed(cfg.seed, o, rep)).map_err(|e| e.to_string())
                }
                Err(e) => Err(e.clone()),
            };
            datasets.insert((o.clone(), rep), d);
        }
    }

    let mut jobs = Vec::new();
    for (pi, (o, t)) in pairs.iter().enumerate() {
        for rep in 0..cfg.repetitions {
            for (mi, &mode) in cfg.modes.iter().enumerate() {
                jobs.push((pi, rep, mi, o, t, mode));
            }
        }
    }
    let mut rows: Vec<((usize, usize, usize), RunRow)> = jobs
        .par_iter()
        .map(|&(pi, rep, mi, o, t, mode)| {
            let seed = run_seed(cfg.seed, o, t, rep);
            let data = &datasets[&(o.clone(), rep)];
            let method = match data {
                Ok(d) => d.method.name().to_string(),
                Err(_) => cfg
                    .datagen
                    .get(o)
                    .map_or("default".into(), |s| format!("{:?}", s.method).to_lowercase()),
            };
            let result = (|| {
                let origin = prepared[o].as_ref().map_err(Clone::clone)?;
                let target = prepared[t].as_ref().map_err(Clone::clone)?;
                let data = data.as_ref().map_err(Clone::clone)?;
                run_one(&RunInputs {
                    origin,
                    target,
                    data,
                    mode,
                    seed,
                    train: &cfg.train,
                    sigma0: cfg.dispersion.sigma0,
                })
                .map_err(|e| e.to_string())
            })();
            let row = match result {
                Ok(out) => {
                    let r = out.report;
                    RunRow {
                        origin: o.clone(),
                        target: t.clone(),
                        method,
                        dispersion_mode: mode,
                        seed,
                        energy: Some(r.energy),
                        kendall_unfitness: r.kendall_unfitness,
                        tears1: r.tears1,
                        villmann: Some(r.villmann),
                        villmann_censored: Some(r.villmann_censored),
                        runtime_ms: r.runtime_ms,
                        error: String::new(),
                    }
                }
                Err(e) => RunRow {
                    origin: o.clone(),
                    target: t.clone(),
                    method,
                    dispersion_mode: mode,
                    seed,
                    energy: None,
                    kendall_unfitness: None,
                    tears1: None,
                    villmann: None,
                    villmann_censored: None,
                    runtime_ms: 0,
                    error: e,
                },
            };
            if let Some(cb) = progress {
                cb(&row);
            }
            ((pi, rep, mi), row)
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// Writes the header and one line per row; the header is written even when
/// there are no rows.
pub fn write_rows<W: Write>(w: W, rows: &[RunRow]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<RunRow>, HarnessError> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

/// Writes the rows to `path` through a temporary file in the same directory.
pub fn write_rows_atomic(path: &Path, rows: &[RunRow]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("csv.tmp");
    write_rows(std::fs::File::create(&tmp)?, rows)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Energy,
    KendallUnfitness,
    Tears1,
    Villmann,
    VillmannCensored,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Energy,
        Metric::KendallUnfitness,
        Metric::Tears1,
        Metric::Villmann,
        Metric::VillmannCensored,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Energy => "energy",
            Metric::KendallUnfitness => "kendall_unfitness",
            Metric::Tears1 => "tears1",
            Metric::Villmann => "villmann",
            Metric::VillmannCensored => "villmann_censored",
        }
    }
}

/// Significance level for the "simulated better" flag.
pub const SIGNIFICANCE: f64 = 0.01;

/// Paired comparison of one Gaussian mode against simulated dispersion for
/// one metric and one group of runs. Differences are Gaussian − simulated,
/// so positive values favor simulated dispersion (all measures are
/// lower-is-better).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonLine {
    pub group: String,
    pub metric: &'static str,
    pub gaussian_mode: DispersionMode,
    pub n: usize,
    pub median_simulated: Option<f64>,
    pub median_gaussian: Option<f64>,
    pub mean_simulated: Option<f64>,
    pub mean_gaussian: Option<f64>,
    pub median_difference: Option<f64>,
    pub p_two_sided: Option<f64>,
    pub p_less: Option<f64>,
    pub p_greater: Option<f64>,
    /// `p_greater` below [`SIGNIFICANCE`].
    pub simulated_better: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    pub lines: Vec<ComparisonLine>,
    /// Successful rows without a partner of the other mode.
    pub orphans: Vec<String>,
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Pairs rows on (origin, target, seed) and compares each Gaussian mode with
/// simulated dispersion, per pair and pooled over all pairs (`all`).
pub fn compare_dispersions(rows: &[RunRow]) -> ComparisonReport {
    type Key = (String, String, u64);
    let mut by_mode: BTreeMap<DispersionMode, BTreeMap<Key, &RunRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.ok()) {
        by_mode
            .entry(r.dispersion_mode)
            .or_default()
            .insert((r.origin.clone(), r.target.clone(), r.seed), r);
    }
    let empty = BTreeMap::new();
    let sim = by_mode.get(&DispersionMode::Simulated).unwrap_or(&empty);
    let mut report = ComparisonReport::default();
    let mut matched: std::collections::HashSet<Key> = std::collections::HashSet::new();

    for (&mode, gauss) in by_mode.iter().filter(|(m, _)| m.is_gaussian()) {
        for (k, r) in gauss {
            if !sim.contains_key(k) {
                report
                    .orphans
                    .push(format!("{} {} seed {} {}", r.origin, r.target, r.seed, mode));
            } else {
                matched.insert(k.clone());
            }
        }
        let mut groups: BTreeMap<String, Vec<(&RunRow, &RunRow)>> = BTreeMap::new();
        for (k, g) in gauss {
            if let Some(s) = sim.get(k) {
                groups.entry(format!("{}->{}", k.0, k.1)).or_default().push((s, g));
                groups.entry("all".into()).or_default().push((s, g));
            }
        }
        for (group, pairs) in &groups {
            for m in Metric::ALL {
                let both: Vec<(f64, f64)> = pairs
                    .iter()
                    .filter_map(|(s, g)| Some((s.metric(m)?, g.metric(m)?)))
                    .collect();
                if both.is_empty() {
                    continue;
                }
                let sv: Vec<f64> = both.iter().map(|p| p.0).collect();
                let gv: Vec<f64> = both.iter().map(|p| p.1).collect();
                let diffs: Vec<f64> = both.iter().map(|(s, g)| g - s).collect();
                let p = |alt| metrics::wilcoxon_signed_rank(&diffs, alt).ok();
                let p_greater = p(Alternative::Greater);
                report.lines.push(ComparisonLine {
                    group: group.clone(),
                    metric: m.name(),
                    gaussian_mode: mode,
                    n: both.len(),
                    median_simulated: median(&sv),
                    median_gaussian: median(&gv),
                    mean_simulated: mean(&sv),
                    mean_gaussian: mean(&gv),
                    median_difference: median(&diffs),
                    p_two_sided: p(Alternative::TwoSided),
                    p_less: p(Alternative::Less),
                    p_greater,
                    simulated_better: p_greater.is_some_and(|p| p < SIGNIFICANCE),
                });
            }
        }
    }
    if by_mode.keys().any(|m| m.is_gaussian()) {
        for (k, r) in sim {
            if !matched.contains(k) {
                report
                    .orphans
                    .push(format!("{} {} seed {} simulated", r.origin, r.target, r.seed));
            }
        }
    }
    report
}

impl ComparisonReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(w);
        for l in &self.lines {
            w.serialize(l)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table; undefined tests print as `-`.
    pub fn to_table(&self) -> String {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut s = format!(
            "{:<28} {:<18} {:<18} {:>4} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}  flag\n",
            "group", "metric", "gaussian", "n", "med_sim", "med_gauss", "med_diff", "p_two", "p_less", "p_great"
        );
        for l in &self.lines {
            s += &format!(
                "{:<28} {:<18} {:<18} {:>4} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}  {}\n",
                l.group,
                l.metric,
                l.gaussian_mode.name(),
                l.n,
                f(l.median_simulated),
                f(l.median_gaussian),
                f(l.median_difference),
                f(l.p_two_sided),
                f(l.p_less),
                f(l.p_greater),
                if l.p_greater.is_none() {
                    "undefined"
                } else if l.simulated_better {
                    "simulated better"
                } else {
                    "not significant"
                }
            );
        }
        for o in &self.orphans {
            s += &format!("orphan: {o}\n");
        }
        s
    }

    pub fn line(&self, group: &str, metric: Metric, mode: DispersionMode) -> Option<&ComparisonLine> {
        self.lines
            .iter()
            .find(|l| l.group == group && l.metric == metric.name() && l.gaussian_mode == mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(o: &str, seed: u64, mode: DispersionMode, villmann: u32) -> RunRow {
        RunRow {
            origin: o.into(),
            target: o.into(),
            method: "natural".into(),
            dispersion_mode: mode,
            seed,
            energy: Some(0.5),
            kendall_unfitness: Some(10.0),
            tears1: None,
            villmann: Some(villmann),
            villmann_censored: Some(metrics::censor_villmann(villmann)),
            runtime_ms: 1,
            error: String::new(),
        }
    }

    #[test]
    fn config_parsing_and_validation() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            version = 1
            repetitions = 2
            origins = ["kq"]
            targets = ["kq", "sphere"]
            pairs = [{ origin = "kq", target = "kq" }]
            [train]
            t_max = 100
            "#,
        )
        .unwrap();
        assert_eq!(cfg.pair_list().len(), 2);
        assert_eq!(cfg.total_runs(), 8);
        assert_eq!(cfg.train.eta, 0.1);
        let empty = ExperimentConfig::from_toml("version = 1\nrepetitions = 1\n");
        assert!(matches!(empty, Err(ref e) if e.is_validation()));
        let unknown = ExperimentConfig::from_toml("version = 1\nrepetitions = 1\norigins=['x']\ntargets=['kq']\n");
        assert!(matches!(unknown, Err(ref e) if e.is_validation()));
        assert!(ExperimentConfig::from_toml("version = 1\nrepetitions = 1\nbogus = 3\n").is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(run_seed(1, "a", "b", 0), run_seed(1, "a", "b", 0));
        assert_ne!(run_seed(1, "a", "b", 0), run_seed(1, "a", "b", 1));
        assert_ne!(run_seed(1, "a", "b", 0), run_seed(1, "b", "a", 0));
        assert_ne!(run_seed(1, "a", "b", 0), run_seed(2, "a", "b", 0));
    }

    #[test]
    fn simulated_better_in_all_pairs() {
        let mut rows = Vec::new();
        for s in 0..10 {
            rows.push(row("kq", s, DispersionMode::Simulated, 0));
            rows.push(row("kq", s, DispersionMode::GaussianDiscrete, 1 + s as u32));
        }
        let rep = compare_dispersions(&rows);
        let l = rep
            .line("all", Metric::Villmann, DispersionMode::GaussianDiscrete)
            .unwrap();
        assert_eq!(l.n, 10);
        assert!((l.p_greater.unwrap() - 2f64.powi(-10)).abs() < 1e-15);
        assert!(l.simulated_better);
        // identical energies: the test is undefined and not flagged
        let e = rep
            .line("all", Metric::Energy, DispersionMode::GaussianDiscrete)
            .unwrap();
        assert!(e.p_greater.is_none() && !e.simulated_better);
        assert!(rep.orphans.is_empty());
    }

    #[test]
    fn pooled_group_is_the_union() {
        let mut rows = Vec::new();
        for (o, k) in [("kq", 3), ("sphere", 4)] {
            for s in 0..k {
                rows.push(row(o, s, DispersionMode::Simulated, 2));
                rows.push(row(o, s, DispersionMode::GaussianDiscrete, 3));
            }
        }
        rows.push(row("sphere", 99, DispersionMode::Simulated, 1));
        let rep = compare_dispersions(&rows);
        let n = |g: &str| {
            rep.line(g, Metric::Villmann, DispersionMode::GaussianDiscrete)
                .unwrap()
                .n
        };
        assert_eq!(n("all"), n("kq->kq") + n("sphere->sphere"));
        assert_eq!(rep.orphans.len(), 1);
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let mut rows = vec![row("kq", 7, DispersionMode::Simulated, 3)];
        rows.push(RunRow {
            error: "boom, with comma".into(),
            energy: None,
            villmann: None,
            villmann_censored: None,
            ..row("kq", 7, DispersionMode::GaussianDiscrete, 0)
        });
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "origin,target,method,dispersion_mode,seed,energy,kendall_unfitness,tears1,villmann,villmann_censored,runtime_ms,error"
        ));
        assert_eq!(read_rows(&buf[..]).unwrap(), rows);
    }
}
