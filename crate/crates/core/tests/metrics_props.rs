use std::sync::OnceLock;

use proptest::prelude::*;
use tilesom::metrics::{
    energy, kendall_brute_force, kendall_from_pairs, kendall_unfitness, tears, wilcoxon_signed_rank, Alternative,
    Embedding,
};
use tilesom::tessellation::{catalog, symmetries, DistanceTable, TileGraph};

fn cycle(n: usize) -> TileGraph {
    let adj = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
    TileGraph::from_adjacency(adj, "cycle").unwrap()
}

#[test]
fn occupying_more_tiles_can_open_a_tear() {
    let target = cycle(6);
    let td = target.distances().unwrap();
    let origin = cycle(3);
    let od = origin.distances().unwrap();
    let sparse = tears(&Embedding::new(&origin, &target, &od, &td, &[0, 0, 0]).unwrap(), 1).unwrap();
    let denser = tears(&Embedding::new(&origin, &target, &od, &td, &[0, 0, 2]).unwrap(), 1).unwrap();
    assert_eq!((sparse, denser), (0, 1));
}

struct Torus {
    graph: TileGraph,
    dist: DistanceTable,
    autos: Vec<Vec<u32>>,
}

fn torus() -> &'static Torus {
    static T: OnceLock<Torus> = OnceLock::new();
    T.get_or_init(|| {
        let graph = catalog::build("torus-hex").unwrap();
        let dist = graph.distances().unwrap();
        let autos = symmetries(&graph);
        Torus { graph, dist, autos }
    })
}

/// Exact tail probabilities by enumerating every sign pattern over the
/// average ranks of the magnitudes.
fn enumerate_wilcoxon(diffs: &[f64]) -> (f64, f64, Vec<(f64, f64)>) {
    let nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nz.len();
    let ranks: Vec<f64> = nz
        .iter()
        .map(|d| {
            let below = nz.iter().filter(|e| e.abs() < d.abs()).count() as f64;
            let equal = nz.iter().filter(|e| e.abs() == d.abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (1u64 << n) as f64;
    let mut pmf: Vec<(f64, f64)> = Vec::new();
    let (mut ge, mut le) = (0.0, 0.0);
    for mask in 0u64..1 << n {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w >= observed - 1e-9 {
            ge += 1.0;
        }
        if w <= observed + 1e-9 {
            le += 1.0;
        }
        match pmf.iter_mut().find(|(v, _)| (v - w).abs() < 1e-9) {
            Some((_, c)) => *c += 1.0 / total,
            None => pmf.push((w, 1.0 / total)),
        }
    }
    (ge / total, le / total, pmf)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fast_kendall_matches_brute_force(pairs in proptest::collection::vec((0u32..6, 0u32..8), 2..=200)) {
        let mut fast_input = pairs.clone();
        let fast = kendall_from_pairs(&mut fast_input);
        let slow = kendall_brute_force(&pairs);
        match (fast, slow) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "fast {a:?} vs brute {b:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wilcoxon_exact_matches_enumeration(diffs in proptest::collection::vec((-4i32..=4).prop_map(f64::from), 1..=10)) {
        prop_assume!(diffs.iter().any(|&d| d != 0.0));
        let (ge, le, pmf) = enumerate_wilcoxon(&diffs);
        let mass: f64 = pmf.iter().map(|(_, p)| p).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
        let greater = wilcoxon_signed_rank(&diffs, Alternative::Greater).unwrap();
        let less = wilcoxon_signed_rank(&diffs, Alternative::Less).unwrap();
        let two = wilcoxon_signed_rank(&diffs, Alternative::TwoSided).unwrap();
        prop_assert!((greater - ge).abs() < 1e-12);
        prop_assert!((less - le).abs() < 1e-12);
        prop_assert!((two - (2.0 * ge.min(le)).min(1.0)).abs() < 1e-12);
        let negated: Vec<f64> = diffs.iter().map(|d| -d).collect();
        prop_assert!((wilcoxon_signed_rank(&negated, Alternative::TwoSided).unwrap() - two).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_p_values_are_probabilities(diffs in proptest::collection::vec(-100.0..100.0f64, 1..60)) {
        for alt in [Alternative::Greater, Alternative::Less, Alternative::TwoSided] {
            let p = wilcoxon_signed_rank(&diffs, alt).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tears_grow_with_radius_and_stay_below_empty_count(assignment in proptest::collection::vec(0usize..529, 20..300)) {
        let t = torus();
        let origin = cycle(assignment.len());
        let od = origin.distances().unwrap();
        let emb = Embedding::new(&origin, &t.graph, &od, &t.dist, &assignment).unwrap();
        let mut occupied = vec![false; t.graph.len()];
        for &a in &assignment {
            occupied[a] = true;
        }
        let empty = occupied.iter().filter(|o| !**o).count();
        let mut prev = 0;
        for r in 1..=4 {
            let c = tears(&emb, r).unwrap();
            prop_assert!(c >= prev);
            prop_assert!(c <= empty);
            prev = c;
        }
    }

    #[test]
    fn energy_and_kendall_ignore_target_automorphisms(
        assignment in proptest::collection::vec(0usize..529, 40),
        which in any::<prop::sample::Index>(),
    ) {
        let t = torus();
        let origin = cycle(assignment.len());
        let od = origin.distances().unwrap();
        let sigma = &t.autos[which.index(t.autos.len())];
        let moved: Vec<usize> = assignment.iter().map(|&a| sigma[a] as usize).collect();
        let a = Embedding::new(&origin, &t.graph, &od, &t.dist, &assignment).unwrap();
        let b = Embedding::new(&origin, &t.graph, &od, &t.dist, &moved).unwrap();
        prop_assert_eq!(energy(&a), energy(&b));
        prop_assert_eq!(kendall_unfitness(&a).unwrap(), kendall_unfitness(&b).unwrap());
    }

    #[test]
    fn automorphic_bijections_are_perfect(which in any::<prop::sample::Index>()) {
        let t = torus();
        let sigma = &t.autos[which.index(t.autos.len())];
        let assignment: Vec<usize> = sigma.iter().map(|&s| s as usize).collect();
        let emb = Embedding::new(&t.graph, &t.graph, &t.dist, &t.dist, &assignment).unwrap();
        prop_assert_eq!(energy(&emb), 0.0);
        prop_assert_eq!(kendall_unfitness(&emb).unwrap(), 0.0);
        prop_assert_eq!(tears(&emb, 1).unwrap(), 0);
    }
}
