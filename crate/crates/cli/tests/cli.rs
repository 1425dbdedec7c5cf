use std::path::Path;
use std::process::{Command, Output};

fn tilesom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilesom"))
        .args(args)
        .env_remove("TILESOM_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn manifold_info_reports_table_counts() {
    let kq = tilesom(&["manifold", "info", "kq"]);
    assert!(kq.status.success());
    let out = stdout(&kq);
    for line in ["n=528", "edges=1596", "χ=-4"] {
        assert!(out.lines().any(|l| l == line), "{line} missing from\n{out}");
    }
    let bolza = stdout(&tilesom(&["manifold", "info", "bolza"]));
    assert!(bolza.contains("n=502") && bolza.contains("edges=1512"));
}

#[test]
fn manifold_list_and_check() {
    let list = stdout(&tilesom(&["manifold", "list"]));
    assert!(list.contains("torus-hex") && list.contains("kq"));
    let check = tilesom(&["manifold", "check", "torus-hex", "sphere"]);
    assert!(check.status.success(), "{}", String::from_utf8_lossy(&check.stderr));
}

#[test]
fn exit_codes() {
    assert_eq!(tilesom(&["--help"]).status.code(), Some(0));
    assert_eq!(tilesom(&["manifold", "info", "no-such-surface"]).status.code(), Some(1));
    assert_eq!(tilesom(&["frobnicate"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "version = 1\nrepetitions = 3\n").unwrap();
    let out = dir.path().join("rows.csv");
    assert_eq!(
        tilesom(&["experiment", "run", arg(&empty), "-o", arg(&out)])
            .status
            .code(),
        Some(1)
    );

    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "version = 1\nrepetitions = [\n").unwrap();
    assert_eq!(
        tilesom(&["experiment", "run", arg(&broken), "-o", arg(&out)])
            .status
            .code(),
        Some(1)
    );

    let missing = dir.path().join("missing.csv");
    let code = tilesom(&["compare", arg(&missing)]).status.code();
    assert_eq!(code, Some(2));
}

#[test]
fn dataset_train_eval_render_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let w1 = dir.path().join("w1.txt");
    let w2 = dir.path().join("w2.txt");
    let svg = dir.path().join("map.svg");

    let gen = tilesom(&["dataset", "gen", "torus-hex", "--method", "natural", "-o", arg(&data)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    for w in [&w1, &w2] {
        let train = tilesom(&[
            "--seed",
            "5",
            "train",
            "torus-hex",
            "--data",
            arg(&data),
            "--mode",
            "gaussian-discrete",
            "--t-max",
            "2000",
            "-o",
            arg(w),
        ]);
        assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    }
    assert_eq!(std::fs::read(&w1).unwrap(), std::fs::read(&w2).unwrap());

    let eval = tilesom(&[
        "eval",
        "--origin",
        "torus-hex",
        "--target",
        "torus-hex",
        "--data",
        arg(&data),
        "--weights",
        arg(&w1),
    ]);
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    assert!(stdout(&eval).contains("villmann"));

    let render = tilesom(&[
        "render",
        "manifold",
        "torus-hex",
        "--weights",
        arg(&w1),
        "-o",
        arg(&svg),
    ]);
    assert!(render.status.success(), "{}", String::from_utf8_lossy(&render.stderr));
    assert!(
        std::fs::read_to_string(&svg).unwrap().starts_with("<?xml")
            || std::fs::read_to_string(&svg).unwrap().starts_with("<svg")
    );
}

#[test]
fn experiment_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        r#"
version = 1
repetitions = 2
seed = 3
pairs = [{ origin = "torus-hex", target = "torus-hex" }]
modes = ["gaussian_discrete", "gaussian_geometric"]

[train]
t_max = 500
"#,
    )
    .unwrap();
    let rows = dir.path().join("rows.csv");
    let run = tilesom(&["experiment", "run", arg(&cfg), "-o", arg(&rows)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&rows).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("origin,target,method,dispersion_mode,seed,energy"));
    // geometric distances are not offered for tori: recorded as error rows
    assert_eq!(lines.len(), 1 + 4);
    assert_eq!(lines.iter().filter(|l| l.contains("gaussian_geometric")).count(), 2);

    let again = dir.path().join("again.csv");
    assert!(tilesom(&["experiment", "run", arg(&cfg), "-o", arg(&again)])
        .status
        .success());
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(10);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip(&text), strip(&std::fs::read_to_string(&again).unwrap()));

    let cmp = tilesom(&["compare", arg(&rows)]);
    assert!(cmp.status.success(), "{}", String::from_utf8_lossy(&cmp.stderr));
}
