use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tilesom::datagen::{self, DatagenError, LANDSCAPE_DIM};
use tilesom::dispersion::DispersionParams;
use tilesom::geometry::ProjectionKind;
use tilesom::harness::{
    self, DatagenSpec, DispersionMode, ExperimentConfig, HarnessError, InitKind, MethodKind, Prepared, RunOptions,
};
use tilesom::metrics::{self, Embedding};
use tilesom::render::{self, RenderSpec, Shading};
use tilesom::som::{self, SomState, TrainParams};
use tilesom::tessellation::{catalog, TessellationError};

/// Environment variable naming the dispersion cache directory.
const CACHE_ENV: &str = "TILESOM_CACHE_DIR";

#[derive(Parser)]
#[command(name = "tilesom", version, about = "Self-organizing maps on tessellated manifolds")]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dispersion table cache (default: $TILESOM_CACHE_DIR, else no cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the shipped manifolds.
    #[command(subcommand)]
    Manifold(ManifoldCmd),
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Train a map on a target manifold and write its weights.
    Train(TrainArgs),
    /// Measure the quality of a trained map.
    Eval(EvalArgs),
    /// Run experiments from a config file.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Compare Gaussian and simulated dispersion in an experiment CSV.
    Compare(CompareArgs),
    /// Draw manifolds and embeddings as SVG.
    #[command(subcommand)]
    Render(RenderCmd),
}

#[derive(Subcommand)]
enum ManifoldCmd {
    /// List the shipped manifolds.
    List,
    /// Build a manifold and print its statistics.
    Info { name: String },
    /// Build manifolds and compare them with the manifest (all if none given).
    Check { names: Vec<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Natural,
    Signpost,
    Landscape,
    LandscapeDeterministic,
}

impl From<MethodArg> for MethodKind {
    fn from(m: MethodArg) -> MethodKind {
        match m {
            MethodArg::Natural => MethodKind::Natural,
            MethodArg::Signpost => MethodKind::Signpost,
            MethodArg::Landscape => MethodKind::Landscape,
            MethodArg::LandscapeDeterministic => MethodKind::LandscapeDeterministic,
        }
    }
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Embed the tiles of an origin manifold into R^d and write a CSV.
    Gen {
        origin: String,
        /// Generator (default: the manifest's choice for the origin).
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Landscape dimension.
        #[arg(long, default_value_t = LANDSCAPE_DIM)]
        dim: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simulated,
    GaussianDiscrete,
    GaussianGeometric,
}

impl From<ModeArg> for DispersionMode {
    fn from(m: ModeArg) -> DispersionMode {
        match m {
            ModeArg::Simulated => DispersionMode::Simulated,
            ModeArg::GaussianDiscrete => DispersionMode::GaussianDiscrete,
            ModeArg::GaussianGeometric => DispersionMode::GaussianGeometric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    UniformBox,
    SampleCopy,
}

#[derive(Args)]
struct TrainArgs {
    /// Target manifold (the map's neurons).
    target: String,
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "simulated")]
    mode: ModeArg,
    #[arg(long, default_value_t = TrainParams::default().t_max)]
    t_max: u64,
    #[arg(long, default_value_t = TrainParams::default().eta)]
    eta: f64,
    #[arg(long, value_enum, default_value = "uniform-box")]
    init: InitArg,
    /// Dispersion step probability.
    #[arg(long, default_value_t = DispersionParams::default().p)]
    p: f64,
    #[arg(long, default_value_t = DispersionParams::default().stop_ratio)]
    stop_ratio: f64,
    /// Initial Gaussian radius (default: the largest distance).
    #[arg(long)]
    sigma0: Option<f64>,
    /// Standardize coordinates: `yes`, `no`, or `auto` (only for CSVs without
    /// a tile_id column).
    #[arg(long, default_value = "auto")]
    standardize: Standardize,
    /// Weight file to write.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Standardize {
    Yes,
    No,
    Auto,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    origin: String,
    #[arg(long)]
    target: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    weights: PathBuf,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run every configured (pair, repetition, mode) and write the results CSV.
    Run {
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the dispersion comparison table here.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CompareArgs {
    results: PathBuf,
    /// Write the comparison as CSV instead of printing a table.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectionArg {
    Poincare,
    Orthographic,
    Stereographic,
    Planar,
}

impl From<ProjectionArg> for ProjectionKind {
    fn from(p: ProjectionArg) -> ProjectionKind {
        match p {
            ProjectionArg::Poincare => ProjectionKind::PoincareDisk,
            ProjectionArg::Orthographic => ProjectionKind::Orthographic,
            ProjectionArg::Stereographic => ProjectionKind::Stereographic,
            ProjectionArg::Planar => ProjectionKind::PlanarIdentity,
        }
    }
}

#[derive(Args)]
struct ViewArgs {
    /// Tile placed at the center of the picture.
    #[arg(long, default_value_t = 0)]
    center: usize,
    #[arg(long, value_enum)]
    projection: Option<ProjectionArg>,
    /// Skip the ring of periodic copies around closed quotients.
    #[arg(long)]
    no_copies: bool,
    #[arg(long, default_value_t = 800.0)]
    size: f64,
}

impl ViewArgs {
    fn spec(&self, shading: Shading) -> RenderSpec {
        RenderSpec {
            projection: self.projection.map(Into::into),
            center_tile: self.center,
            shading,
            copies: !self.no_copies,
            size: self.size,
            ..RenderSpec::default()
        }
    }
}

#[derive(Subcommand)]
enum RenderCmd {
    /// Tiles of a manifold, shaded by the U-matrix of a weight file if given.
    Manifold {
        name: String,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Images of the origin tiles on the target, with the origin's edges.
    Embedding {
        #[arg(long)]
        origin: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    /// Bad input: unknown names, malformed files or configs.
    Validation(String),
    /// Something went wrong while doing valid work.
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Failure {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<TessellationError> for Failure {
    fn from(e: TessellationError) -> Failure {
        match e {
            TessellationError::UnknownManifold(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<DatagenError> for Failure {
    fn from(e: DatagenError) -> Failure {
        match e {
            DatagenError::Csv(ref c) if c.is_io_error() => Failure::Runtime(e.to_string()),
            DatagenError::Csv(_) | DatagenError::CsvFormat(_) | DatagenError::Som(_) => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn validation(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Validation(m) | Failure::Runtime(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn cache_dir(cli: &Cli) -> Option<PathBuf> {
    cli.cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Manifold(cmd) => manifold(cmd),
        Command::Dataset(DatasetCmd::Gen {
            origin,
            method,
            dim,
            out,
        }) => {
            let g = catalog::resolve(origin)?;
            let spec = method.map(|m| DatagenSpec {
                method: m.into(),
                dim: *dim,
            });
            let d = harness::make_dataset(&g, spec.as_ref(), cli.seed)?;
            datagen::write_csv(&d.data, out)?;
            println!(
                "{}: {} samples of dimension {} ({})",
                out.display(),
                d.data.len(),
                d.data.dim(),
                d.method.name()
            );
            Ok(())
        }
        Command::Train(args) => train(cli, args),
        Command::Eval(args) => eval(args),
        Command::Experiment(ExperimentCmd::Run { config, out, compare }) => {
            let cfg = ExperimentConfig::load(config)?;
            let total = cfg.total_runs();
            let done = std::sync::atomic::AtomicUsize::new(0);
            let progress = |r: &harness::RunRow| {
                let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                let status = if r.ok() {
                    format!("villmann {}", r.villmann.unwrap_or(0))
                } else {
                    format!("error: {}", r.error)
                };
                eprintln!(
                    "[{k}/{total}] {} -> {} {} {}",
                    r.origin, r.target, r.dispersion_mode, status
                );
            };
            let opts = RunOptions {
                cache_dir: cache_dir(cli),
            };
            let rows = harness::run_experiment(&cfg, &opts, Some(&progress))?;
            harness::write_rows_atomic(out, &rows)?;
            let failed = rows.iter().filter(|r| !r.ok()).count();
            println!("{}: {} rows, {} failed", out.display(), rows.len(), failed);
            if let Some(path) = compare {
                let rep = harness::compare_dispersions(&rows);
                rep.write_csv(File::create(path).map_err(runtime)?)?;
            }
            Ok(())
        }
        Command::Compare(args) => {
            let rows = harness::read_rows(File::open(&args.results).map_err(runtime)?).map_err(validation)?;
            let rep = harness::compare_dispersions(&rows);
            match &args.out {
                Some(path) => rep.write_csv(File::create(path).map_err(runtime)?)?,
                None => print!("{}", rep.to_table()),
            }
            Ok(())
        }
        Command::Render(cmd) => render_cmd(cmd),
    }
}

fn manifold(cmd: &ManifoldCmd) -> Result<(), Failure> {
    match cmd {
        ManifoldCmd::List => {
            println!(
                "{:<12} {:>6} {:>6} {:>4} {:>5} {:>10}  embedding",
                "id", "tiles", "edges", "chi", "orient", "curvature"
            );
            for e in catalog::manifest() {
                println!(
                    "{:<12} {:>6} {:>6} {:>4} {:>5} {:>10.6}  {:?}",
                    e.id,
                    e.tiles,
                    e.edges,
                    e.euler_characteristic.map_or("-".into(), |c| c.to_string()),
                    if e.orientable { "yes" } else { "no" },
                    e.curvature,
                    e.embedding
                );
            }
            Ok(())
        }
        ManifoldCmd::Info { name } => {
            let g = catalog::resolve(name)?;
            let m = g.meta();
            let d = g.distances().map_err(runtime)?;
            println!("name: {}", g.name());
            println!("geometry: {}", m.geometry);
            println!("schlafli: {{{},{}}}", m.schlafli.p, m.schlafli.q);
            println!("goldberg: ({},{})", m.goldberg.0, m.goldberg.1);
            println!("closed: {}", m.closed);
            println!("orientable: {}", m.orientable);
            println!("n={}", g.len());
            println!("edges={}", g.edge_count());
            match g.computed_euler_characteristic() {
                Some(chi) => println!("χ={chi}"),
                None => println!("χ=-"),
            }
            println!("curvature={:.7}", g.discrete_curvature());
            println!("diameter={}", d.diameter());
            let hist: Vec<String> = g
                .side_histogram()
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(s, c)| format!("{s}:{c}"))
                .collect();
            println!("sides: {}", hist.join(" "));
            Ok(())
        }
        ManifoldCmd::Check { names } => {
            let entries: Vec<_> = if names.is_empty() {
                catalog::manifest().iter().collect()
            } else {
                names.iter().map(|n| catalog::entry(n)).collect::<Result<_, _>>()?
            };
            let mut bad = 0;
            for e in entries {
                let g = catalog::build(&e.id)?;
                let diam = g.distances().map_err(runtime)?.diameter();
                let mut issues = Vec::new();
                if g.len() != e.tiles {
                    issues.push(format!("tiles {} != {}", g.len(), e.tiles));
                }
                if g.edge_count() != e.edges {
                    issues.push(format!("edges {} != {}", g.edge_count(), e.edges));
                }
                if g.computed_euler_characteristic() != e.euler_characteristic {
                    issues.push(format!(
                        "chi {:?} != {:?}",
                        g.computed_euler_characteristic(),
                        e.euler_characteristic
                    ));
                }
                if (g.discrete_curvature() - e.curvature).abs() > 1e-6 {
                    issues.push(format!("curvature {:.7} != {:.7}", g.discrete_curvature(), e.curvature));
                }
                if e.diameter.is_some_and(|d| d != diam) {
                    issues.push(format!("diameter {diam} != {}", e.diameter.unwrap_or(0)));
                }
                if issues.is_empty() {
                    println!("{:<12} ok", e.id);
                } else {
                    bad += 1;
                    println!("{:<12} MISMATCH {}", e.id, issues.join("; "));
                }
            }
            if bad > 0 {
                return Err(Failure::Runtime(format!("{bad} manifolds differ from the manifest")));
            }
            Ok(())
        }
    }
}

fn load_data(path: &Path) -> Result<som::Dataset, Failure> {
    Ok(datagen::read_csv(path)?)
}

fn load_weights(path: &Path) -> Result<(SomState, String, u64), Failure> {
    let f = File::open(path).map_err(runtime)?;
    SomState::read_weights(BufReader::new(f)).map_err(validation)
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<(), Failure> {
    let mut data = load_data(&args.data)?;
    let standardize = match args.standardize {
        Standardize::Yes => true,
        Standardize::No => false,
        Standardize::Auto => data.source_tiles().is_none(),
    };
    if standardize {
        data = data.standardized();
    }
    let mode: DispersionMode = args.mode.into();
    let params = DispersionParams {
        p: args.p,
        stop_ratio: args.stop_ratio,
        ..DispersionParams::default()
    };
    let target = Prepared::new(&args.target, &[mode], &params, cache_dir(cli).as_deref())?;
    let nb = target.neighborhood(mode, args.eta, args.sigma0)?;
    let init = match args.init {
        InitArg::UniformBox => InitKind::UniformBox,
        InitArg::SampleCopy => InitKind::SampleCopy,
    };
    let tp = TrainParams {
        t_max: args.t_max,
        eta: args.eta,
        seed: cli.seed,
        init: init.into(),
    };
    let trained = som::train(&target.graph, &data, &tp, &nb).map_err(validation)?;
    let mut w = BufWriter::new(File::create(&args.out).map_err(runtime)?);
    trained
        .state
        .write_weights(&mut w, target.graph.name(), cli.seed)
        .map_err(runtime)?;
    w.flush().map_err(runtime)?;
    let used = {
        let mut u = trained.assignment.clone();
        u.sort_unstable();
        u.dedup();
        u.len()
    };
    println!(
        "{}: {} neurons, {} samples on {} distinct tiles",
        args.out.display(),
        trained.state.len(),
        data.len(),
        used
    );
    Ok(())
}

struct Loaded {
    origin: Prepared,
    target: Prepared,
    data: som::Dataset,
    state: SomState,
    seed: u64,
    assignment: Vec<usize>,
}

fn load_embedding(origin: &str, target: &str, data: &Path, weights: &Path) -> Result<Loaded, Failure> {
    let data = load_data(data)?;
    let (state, _, seed) = load_weights(weights)?;
    let params = DispersionParams::default();
    let origin = Prepared::new(origin, &[], &params, None)?;
    let target = Prepared::new(target, &[], &params, None)?;
    if state.len() != target.graph.len() {
        return Err(validation(format!(
            "weight file has {} neurons, {} has {} tiles",
            state.len(),
            target.graph.name(),
            target.graph.len()
        )));
    }
    if state.dim() != data.dim() {
        return Err(validation(format!(
            "weights have dimension {}, data {}",
            state.dim(),
            data.dim()
        )));
    }
    let per_sample = state.assign(&data);
    let assignment = harness::origin_assignment(&data, &per_sample, origin.graph.len())?;
    Ok(Loaded {
        origin,
        target,
        data,
        state,
        seed,
        assignment,
    })
}

fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let l = load_embedding(&args.origin, &args.target, &args.data, &args.weights)?;
    let emb = Embedding::new(
        &l.origin.graph,
        &l.target.graph,
        &l.origin.dist,
        &l.target.dist,
        &l.assignment,
    )
    .map_err(validation)?;
    let r = metrics::evaluate(&emb, &l.state, &l.data, l.seed).map_err(runtime)?;
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    println!("energy={}", r.energy);
    println!("kendall_unfitness={}", opt(r.kendall_unfitness.map(|v| v.to_string())));
    println!("tears1={}", opt(r.tears1.map(|v| v.to_string())));
    println!("villmann={}", r.villmann);
    println!("villmann_censored={}", r.villmann_censored);
    Ok(())
}

fn render_cmd(cmd: &RenderCmd) -> Result<(), Failure> {
    let (svg, out) = match cmd {
        RenderCmd::Manifold {
            name,
            weights,
            view,
            out,
        } => {
            let g = catalog::resolve(name)?;
            let shading = match weights {
                Some(w) => {
                    let (state, _, _) = load_weights(w)?;
                    if state.len() != g.len() {
                        return Err(validation(format!(
                            "weight file has {} neurons, {} has {} tiles",
                            state.len(),
                            g.name(),
                            g.len()
                        )));
                    }
                    Shading::Gray(som::umatrix(&state, &g))
                }
                None => Shading::Uniform,
            };
            (
                render::render_manifold(&g, &view.spec(shading)).map_err(validation)?,
                out,
            )
        }
        RenderCmd::Embedding {
            origin,
            target,
            data,
            weights,
            view,
            out,
        } => {
            let l = load_embedding(origin, target, data, weights)?;
            let emb = Embedding::new(
                &l.origin.graph,
                &l.target.graph,
                &l.origin.dist,
                &l.target.dist,
                &l.assignment,
            )
            .map_err(validation)?;
            (
                render::render_embedding(&emb, &view.spec(Shading::Uniform)).map_err(validation)?,
                out,
            )
        }
    };
    std::fs::write(out, svg).map_err(runtime)?;
    println!("{}", out.display());
    Ok(())
}
