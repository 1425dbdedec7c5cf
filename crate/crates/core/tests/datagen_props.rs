use proptest::prelude::*;
use tilesom::datagen::{landscape_deterministic, landscape_embedding, natural_embedding, signpost_embedding};
use tilesom::tessellation::{build_base, catalog, goldberg_coxeter, separating_lines, zigzag_lines, Schlafli};

#[test]
fn signpost_coordinates_are_bounded_integers() {
    for id in ["kq", "bolza", "klein-sq"] {
        let g = catalog::build(id).unwrap();
        let diameter = g.distances().unwrap().diameter() as f64;
        let rule = catalog::entry(id).unwrap().signposts.unwrap();
        let ds = signpost_embedding(&g, &rule).unwrap();
        for s in ds.data.samples() {
            for &c in s {
                assert!(c >= 0.0 && c <= diameter && c.fract() == 0.0, "{id}: {c}");
            }
        }
    }
}

#[test]
fn landscape_norms() {
    let g = catalog::build("disk10").unwrap();
    let lines = zigzag_lines(&g).unwrap();
    let sep = separating_lines(&g, &lines, 0);

    let det = landscape_deterministic(&g).unwrap();
    for (s, l) in det.data.samples().zip(&sep) {
        assert_eq!(s.iter().map(|x| x * x).sum::<f64>(), l.len() as f64);
    }

    let dim = 60;
    let seeds = 100;
    let mut mean = vec![0.0; g.len()];
    for seed in 0..seeds {
        let ds = landscape_embedding(&g, dim, seed).unwrap();
        for (m, s) in mean.iter_mut().zip(ds.data.samples()) {
            *m += s.iter().map(|x| x * x).sum::<f64>() / seeds as f64;
        }
    }
    for (t, (m, l)) in mean.iter().zip(&sep).enumerate() {
        let expected = (l.len() * dim) as f64;
        if expected == 0.0 {
            assert_eq!(*m, 0.0);
        } else {
            assert!((m / expected - 1.0).abs() < 0.2, "tile {t}: {m} vs {expected}");
        }
    }
}

#[test]
fn dodecahedron_neighbors_are_equally_far() {
    let base = build_base(Schlafli::new(5, 3).unwrap(), 0).unwrap();
    let g = goldberg_coxeter(&base, 1, 0).unwrap();
    let ds = natural_embedding(&g).unwrap();
    let chords: Vec<f64> = g
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (ds.data.sample(a), ds.data.sample(b));
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
        })
        .collect();
    let lo = chords.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = chords.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.05, "{lo} {hi}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn datasets_are_deterministic(seed in any::<u64>()) {
        let g = catalog::build("disk-euclid").unwrap();
        prop_assert_eq!(landscape_embedding(&g, 7, seed).unwrap(), landscape_embedding(&g, 7, seed).unwrap());
        let s = catalog::build("sphere").unwrap();
        prop_assert_eq!(natural_embedding(&s).unwrap(), natural_embedding(&s).unwrap());
    }
}
