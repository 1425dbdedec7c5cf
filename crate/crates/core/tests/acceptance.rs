//! One line per acceptance criterion. Runs without the libtest harness so the
//! report is printed even when everything passes.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilesom::datagen::{natural_embedding, signpost_embedding};
use tilesom::dispersion::{
    simulate, simulate_orbits, simulate_symmetric, walk_matrices, DispersionParams, DispersionTable, DistanceMode,
    GaussianParams,
};
use tilesom::harness::{
    compare_dispersions, run_experiment, write_rows, DispersionMode, ExperimentConfig, Metric, RunOptions, RunRow,
};
use tilesom::metrics::{
    energy, kendall_brute_force, kendall_from_pairs, kendall_unfitness, tears, wilcoxon_signed_rank, Alternative,
    Embedding,
};
use tilesom::render::{render_embedding, render_manifold, RenderSpec, Shading};
use tilesom::som::{train, umatrix, InitMode, Neighborhood, TrainParams};
use tilesom::tessellation::{catalog, TileGraph};

struct Outcome {
    pass: bool,
    detail: String,
    /// The criterion allows a reported failure (it only demands the report).
    soft: bool,
}

impl Outcome {
    fn hard(pass: bool, detail: String) -> Outcome {
        Outcome {
            pass,
            detail,
            soft: false,
        }
    }
}

fn census() -> Outcome {
    let rows = [
        ("sphere", 522, 1560),
        ("kq", 528, 1596),
        ("bolza", 502, 1512),
        ("torus-hex", 529, 1587),
        ("elliptic", 541, 1620),
        ("disk10", 520, 1214),
        ("disk-euclid", 520, 1479),
    ];
    let start = Instant::now();
    let graphs: Vec<TileGraph> = rows.iter().map(|(id, ..)| catalog::build(id).unwrap()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut bad = Vec::new();
    for ((id, n, e), g) in rows.iter().zip(&graphs) {
        if g.len() != *n || g.edge_count() != *e {
            bad.push(format!("{id} {}/{}", g.len(), g.edge_count()));
        }
    }
    for (id, m) in [("torus-hex", 15), ("kq", 13)] {
        let g = &graphs[rows.iter().position(|r| r.0 == id).unwrap()];
        let d = g.distances().unwrap().diameter();
        if d != m {
            bad.push(format!("{id} diameter {d}"));
        }
    }
    for (id, k) in [("torus-hex", 0.0), ("kq", -0.0454545), ("sphere", 0.0229885)] {
        let g = &graphs[rows.iter().position(|r| r.0 == id).unwrap()];
        let c = g.discrete_curvature();
        if (c - k).abs() > 1e-6 {
            bad.push(format!("{id} curvature {c}"));
        }
    }
    if elapsed >= 1.0 {
        bad.push(format!("took {elapsed:.2}s"));
    }
    Outcome::hard(
        bad.is_empty(),
        if bad.is_empty() {
            format!("7 manifolds match, built in {elapsed:.2}s")
        } else {
            bad.join(", ")
        },
    )
}

fn structure() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for e in catalog::manifest() {
        let Some(chi) = e.euler_characteristic else { continue };
        if e.schlafli.q != 3 {
            continue;
        }
        let g = catalog::build(&e.id).unwrap();
        let hist = g.side_histogram();
        let balance: i64 = hist.iter().enumerate().map(|(s, &c)| (6 - s as i64) * c as i64).sum();
        let p = e.schlafli.p;
        let irregular = hist
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != 6)
            .map(|(_, &c)| c as i64)
            .sum::<i64>();
        let expected = if p == 6 { 0 } else { 6 * chi / (6 - p as i64) };
        if balance != 6 * chi || irregular != expected || hist.get(p).copied().unwrap_or(0) as i64 != expected && p != 6
        {
            bad.push(format!("{} histogram {hist:?} χ={chi}", e.id));
        }
        checked += 1;
    }
    let kq = catalog::build("kq").unwrap().side_histogram();
    if kq.get(7).copied().unwrap_or(0) != 24 || kq.get(5).copied().unwrap_or(0) != 0 {
        bad.push(format!("kq histogram {kq:?}"));
    }
    let mut doubled = 0;
    for e in catalog::manifest() {
        let torus = e.schlafli.p == 6 && e.euler_characteristic == Some(0) && e.orientable;
        if !(e.is_disk() || torus) {
            continue;
        }
        let (one, two) = (catalog::build(&e.id).unwrap(), catalog::build_double(&e.id).unwrap());
        if two.len() != 4 * one.len() {
            bad.push(format!("{}: {} -> {}", e.id, one.len(), two.len()));
        }
        doubled += 1;
    }
    Outcome::hard(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{checked} closed trivalent manifolds balance 6χ; {doubled} disks/tori quadruple when doubled")
        } else {
            bad.join(", ")
        },
    )
}

fn random_graph(rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = rng.gen_range(2..=20);
    let mut adj = vec![Vec::new(); n];
    let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for i in 1..n {
        let p = rng.gen_range(0..i);
        link(i, p, &mut adj);
    }
    for _ in 0..rng.gen_range(0..2 * n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        link(a, b, &mut adj);
    }
    adj
}

fn matrix_power_error(adj: &[Vec<usize>], p: f64, t: u64) -> f64 {
    let n = adj.len();
    let g = TileGraph::from_adjacency(adj.to_vec(), "random").unwrap();
    let dp = &walk_matrices(&g, p, &[t])[0];
    let mut step = vec![vec![0.0; n]; n];
    for i in 0..n {
        step[i][i] = 1.0 - p * adj[i].len() as f64;
        for &j in &adj[i] {
            step[i][j] = p;
        }
    }
    let mut acc: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..t {
        acc = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| acc[i][k] * step[k][j]).sum()).collect())
            .collect();
    }
    (0..n * n)
        .map(|x| (dp[x] - acc[x / n][x % n]).abs())
        .fold(0.0, f64::max)
}

fn table_errors(t: &DispersionTable) -> (f64, f64) {
    let n = t.len();
    let (mut mass, mut sym) = (0.0f64, 0.0f64);
    for m in 0..t.steps().len() {
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = t.get(i, j, m);
                sum += v;
                if j > i {
                    sym = sym.max((v - t.get(j, i, m)).abs());
                }
            }
            mass = mass.max((sum - 1.0).abs());
        }
    }
    (mass, sym)
}

fn dispersion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut oracle = 0.0f64;
    for _ in 0..50 {
        let adj = random_graph(&mut rng);
        let deg = adj.iter().map(Vec::len).max().unwrap() as f64;
        let p = rng.gen_range(0.05..0.95) / deg;
        let t = rng.gen_range(0..=50);
        oracle = oracle.max(matrix_power_error(&adj, p, t));
    }
    let mut bad = Vec::new();
    if oracle > 1e-10 {
        bad.push(format!("DP vs matrix power {oracle:e}"));
    }
    let mut detail = vec![format!("oracle {oracle:.1e}")];
    for id in ["torus-hex", "kq"] {
        let g = catalog::build(id).unwrap();
        let t = simulate_orbits(&g, &DispersionParams::default()).unwrap();
        let (mass, sym) = table_errors(&t);
        if mass > 1e-9 || sym > 1e-12 {
            bad.push(format!("{id}: mass {mass:e} symmetry {sym:e}"));
        }
        detail.push(format!("{id} T={} mass {mass:.1e} sym {sym:.1e}", t.horizon()));
    }
    let fast = DispersionParams {
        p: 0.05,
        ..DispersionParams::default()
    };
    for id in ["torus-hex", "torus-sq"] {
        let g = catalog::build(id).unwrap();
        let (a, b) = (simulate(&g, &fast).unwrap(), simulate_symmetric(&g, &fast).unwrap());
        // the generic table may keep fewer snapshots, so compare at shared steps
        let mut diff = 0.0f64;
        let mut shared = 0;
        for (ma, sa) in a.steps().iter().enumerate() {
            let Some(mb) = b.steps().iter().position(|sb| sb == sa) else {
                continue;
            };
            shared += 1;
            for i in 0..g.len() {
                for j in 0..g.len() {
                    diff = diff.max((a.get(i, j, ma) - b.get(i, j, mb)).abs());
                }
            }
        }
        for i in 0..g.len() {
            for j in 0..g.len() {
                diff = diff.max((a.rowmax(i, j) - b.rowmax(i, j)).abs());
            }
        }
        if a.horizon() != b.horizon() || shared < 2 {
            diff = f64::INFINITY;
        }
        if diff > 1e-12 {
            bad.push(format!("{id} symmetric vs generic {diff:e}"));
        }
        detail.push(format!("{id} symmetric {diff:.1e} over {shared} shared steps"));
    }
    Outcome::hard(
        bad.is_empty(),
        if bad.is_empty() {
            detail.join("; ")
        } else {
            bad.join(", ")
        },
    )
}

fn metric_oracles() -> Outcome {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let len = rng.gen_range(2..=200);
        let pairs: Vec<(u32, u32)> = (0..len).map(|_| (rng.gen_range(0..6), rng.gen_range(0..8))).collect();
        let slow = kendall_brute_force(&pairs).ok();
        let fast = kendall_from_pairs(&mut pairs.clone()).ok();
        if slow != fast {
            bad.push(format!("kendall {fast:?} vs {slow:?}"));
            break;
        }
    }
    let p = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], Alternative::Greater).unwrap();
    if p != 1.0 / 64.0 {
        bad.push(format!("wilcoxon {p}"));
    }
    let g = catalog::build("kq").unwrap();
    let d = g.distances().unwrap();
    let id: Vec<usize> = (0..g.len()).collect();
    let emb = Embedding::new(&g, &g, &d, &d, &id).unwrap();
    if energy(&emb) != 0.0 || tears(&emb, 1).unwrap() != 0 || kendall_unfitness(&emb).unwrap() != 0.0 {
        bad.push("identity embedding not perfect".into());
    }
    let mut anti: Vec<(u32, u32)> = (0..20).map(|i| (i, 100 - i)).collect();
    let k = kendall_from_pairs(&mut anti).unwrap();
    if k != 200.0 {
        bad.push(format!("anti-monotone unfitness {k}"));
    }
    Outcome::hard(
        bad.is_empty(),
        if bad.is_empty() {
            "kendall 500/500, wilcoxon 1/64, energy 0, unfitness 200, tears 0".into()
        } else {
            bad.join(", ")
        },
    )
}

fn cache_dir() -> PathBuf {
    std::env::var_os("TILESOM_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("tilesom-cache"))
}

fn self_pair_rows() -> Vec<RunRow> {
    let cfg = ExperimentConfig::from_toml(
        r#"
        version = 1
        name = "acceptance"
        repetitions = 10
        seed = 7
        pairs = [
            { origin = "torus-hex", target = "torus-hex" },
            { origin = "sphere", target = "sphere" },
            { origin = "kq", target = "kq" },
        ]
        modes = ["simulated", "gaussian_discrete"]
        "#,
    )
    .unwrap();
    let opts = RunOptions {
        cache_dir: Some(cache_dir()),
    };
    run_experiment(&cfg, &opts, None).unwrap()
}

fn topology_recovery(rows: &[RunRow]) -> Outcome {
    let runs: Vec<&RunRow> = rows
        .iter()
        .filter(|r| r.origin == "torus-hex" && r.dispersion_mode == DispersionMode::Simulated)
        .collect();
    let good = runs.iter().filter(|r| r.villmann.is_some_and(|v| v < 8)).count();
    let slowest = runs.iter().map(|r| r.runtime_ms).max().unwrap_or(0);
    let values: Vec<String> = runs
        .iter()
        .map(|r| r.villmann.map_or(format!("error({})", r.error), |v| v.to_string()))
        .collect();
    Outcome::hard(
        runs.len() == 10 && good >= 7 && slowest <= 300_000,
        format!(
            "{good}/{} runs with Villmann < 8 [{}], slowest {slowest} ms",
            runs.len(),
            values.join(" ")
        ),
    )
}

fn mode_comparison(rows: &[RunRow]) -> Outcome {
    let report = compare_dispersions(rows);
    println!("{}", report.to_table());
    let errors = rows.iter().filter(|r| !r.ok()).count();
    let line = report.line("all", Metric::Villmann, DispersionMode::GaussianDiscrete);
    let (pass, detail) = match line {
        Some(l) => {
            let med = l.median_difference.unwrap_or(f64::NAN);
            let p = l.p_greater;
            (
                med >= 0.0 && p.is_some_and(|p| p < 0.05),
                format!(
                    "pooled Villmann over {} pairs: median difference {med}, one-sided p {}",
                    l.n,
                    p.map_or("undefined (all differences zero)".into(), |p| format!("{p:.4}"))
                ),
            )
        }
        None => (false, "no Villmann comparison line".into()),
    };
    let emitted = !report.lines.is_empty() && report.orphans.is_empty() && errors == 0;
    Outcome {
        pass: pass && emitted,
        detail: format!(
            "{detail}; table emitted with {} lines, {errors} error rows",
            report.lines.len()
        ),
        soft: emitted,
    }
}

fn configs() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut bad = Vec::new();
    let desk = ExperimentConfig::load(&dir.join("desk.toml"));
    let paper = ExperimentConfig::load(&dir.join("paper.toml"));
    match &desk {
        Ok(c) => {
            let mut names: Vec<&String> = c.origins.iter().chain(&c.targets).collect();
            names.sort();
            names.dedup();
            if names.len() != 6 || c.repetitions != 10 {
                bad.push(format!("desk: {} manifolds, {} reps", names.len(), c.repetitions));
            }
        }
        Err(e) => bad.push(format!("desk: {e}")),
    }
    let paper_text = std::fs::read_to_string(dir.join("paper.toml")).unwrap_or_default();
    match &paper {
        Ok(c) if !paper_text.contains("LONG-RUNNING") => {
            bad.push(format!("paper: {} runs, not marked long-running", c.total_runs()))
        }
        Ok(_) => {}
        Err(e) => bad.push(format!("paper: {e}")),
    }
    let mut header = Vec::new();
    write_rows(&mut header, &[]).unwrap();
    let header = String::from_utf8(header).unwrap();
    for col in [
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
    ] {
        if !header.split(',').any(|h| h.trim() == col) {
            bad.push(format!("csv column {col} missing"));
        }
    }
    Outcome::hard(
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "desk {} runs, paper {} runs (long-running), csv schema complete",
                desk.unwrap().total_runs(),
                paper.unwrap().total_runs()
            )
        } else {
            bad.join(", ")
        },
    )
}

fn count_class(doc: &roxmltree::Document, tag: &str, class: &str) -> usize {
    doc.descendants()
        .filter(|n| n.has_tag_name(tag) && n.attribute("class") == Some(class))
        .count()
}

fn torus_umatrix_svg() -> String {
    let g = catalog::build("torus-hex").unwrap();
    let data = natural_embedding(&g).unwrap().data;
    let d = g.distances().unwrap();
    let hops: Vec<f64> = (0..g.len() * g.len())
        .map(|x| d.get(x / g.len(), x % g.len()) as f64)
        .collect();
    let nb = Neighborhood::Gaussian {
        params: GaussianParams {
            eta: 0.1,
            sigma0: d.diameter() as f64,
            mode: DistanceMode::Hops,
        },
        distances: &hops,
    };
    let params = TrainParams {
        t_max: 3000,
        eta: 0.1,
        seed: 11,
        init: InitMode::UniformBox,
    };
    let trained = train(&g, &data, &params, &nb).unwrap();
    let spec = RenderSpec {
        shading: Shading::Gray(umatrix(&trained.state, &g)),
        ..RenderSpec::default()
    };
    render_manifold(&g, &spec).unwrap()
}

fn kq_embedding_svg() -> String {
    let g = catalog::build("kq").unwrap();
    let rule = catalog::entry("kq").unwrap().signposts.unwrap();
    let data = signpost_embedding(&g, &rule).unwrap().data;
    let d = g.distances().unwrap();
    let hops: Vec<f64> = (0..g.len() * g.len())
        .map(|x| d.get(x / g.len(), x % g.len()) as f64)
        .collect();
    let nb = Neighborhood::Gaussian {
        params: GaussianParams {
            eta: 0.1,
            sigma0: d.diameter() as f64,
            mode: DistanceMode::Hops,
        },
        distances: &hops,
    };
    let params = TrainParams {
        t_max: 3000,
        eta: 0.1,
        seed: 12,
        init: InitMode::UniformBox,
    };
    let trained = train(&g, &data, &params, &nb).unwrap();
    let emb = Embedding::new(&g, &g, &d, &d, &trained.assignment).unwrap();
    render_embedding(&emb, &RenderSpec::default()).unwrap()
}

fn rendering() -> Outcome {
    let mut bad = Vec::new();
    let mut detail = Vec::new();
    for (name, tiles, make) in [
        ("torus-hex U-matrix", 529, torus_umatrix_svg as fn() -> String),
        ("kq embedding", 528, kq_embedding_svg),
    ] {
        let svg = make();
        if svg != make() {
            bad.push(format!("{name}: reruns differ"));
        }
        match roxmltree::Document::parse(&svg) {
            Ok(doc) => {
                let (t, c) = (
                    count_class(&doc, "polygon", "tile"),
                    count_class(&doc, "polygon", "copy"),
                );
                if t != tiles || c == 0 {
                    bad.push(format!("{name}: {t} tile polygons, {c} copies"));
                }
                detail.push(format!("{name}: {t} tiles + {c} copies, {} bytes", svg.len()));
            }
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    Outcome::hard(
        bad.is_empty(),
        if bad.is_empty() {
            detail.join("; ")
        } else {
            bad.join(", ")
        },
    )
}

fn main() {
    let rows = self_pair_rows();
    let outcomes = [
        ("manifold census", census()),
        ("structural invariants", structure()),
        ("dispersion correctness", dispersion()),
        ("metric oracles", metric_oracles()),
        ("topology recovery", topology_recovery(&rows)),
        ("dispersion-mode comparison", mode_comparison(&rows)),
        ("configs and schema", configs()),
        ("rendering", rendering()),
    ];
    let mut hard_failures = 0;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        let verdict = match (o.pass, o.soft) {
            (true, _) => "PASS",
            (false, true) => "FAIL (reported)",
            (false, false) => "FAIL",
        };
        println!("criterion {}: {verdict}: {name}: {}", i + 1, o.detail);
        if !o.pass && !o.soft {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
