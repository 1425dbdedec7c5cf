use proptest::prelude::*;
use tilesom::dispersion::{schedule_f, walk_matrices};
use tilesom::tessellation::TileGraph;

/// A random connected graph: a random tree plus extra edges.
fn connected_graph(max_n: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                proptest::collection::vec((0..n, 0..n), 0..2 * n),
            )
        })
        .prop_map(|(n, parents, extra)| {
            let mut adj = vec![Vec::new(); n];
            let mut link = |a: usize, b: usize| {
                if a != b && !adj[a].contains(&b) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            };
            for (i, p) in parents.iter().enumerate() {
                link(i + 1, p.index(i + 1));
            }
            for (a, b) in extra {
                link(a, b);
            }
            adj
        })
}

fn one_step(adj: &[Vec<usize>], p: f64) -> Vec<Vec<f64>> {
    let n = adj.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = 1.0 - p * adj[i].len() as f64;
        for &j in &adj[i] {
            m[i][j] += p;
        }
    }
    m
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn graph_and_p() -> impl Strategy<Value = (Vec<Vec<usize>>, f64)> {
    connected_graph(20).prop_flat_map(|adj| {
        let deg = adj.iter().map(Vec::len).max().unwrap() as f64;
        (Just(adj), (0.05..0.95f64).prop_map(move |f| f / deg))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn dp_equals_matrix_power((adj, p) in graph_and_p(), t in 0u64..=50) {
        let g = TileGraph::from_adjacency(adj.clone(), "random").unwrap();
        let dp = &walk_matrices(&g, p, &[t])[0];
        let step = one_step(&adj, p);
        let n = adj.len();
        let mut oracle: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        for _ in 0..t {
            oracle = mul(&oracle, &step);
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert!((dp[i * n + j] - oracle[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn walk_conserves_mass_and_spreads_monotonically((adj, p) in graph_and_p()) {
        let g = TileGraph::from_adjacency(adj.clone(), "random").unwrap();
        let n = adj.len();
        let steps: Vec<u64> = (0..=40).collect();
        let snaps = walk_matrices(&g, p, &steps);
        for i in 0..n {
            let mut prev_min = 0.0;
            for s in &snaps {
                let row = &s[i * n..(i + 1) * n];
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
                if prev_min > 0.0 {
                    prop_assert!(min >= prev_min - 1e-15);
                }
                prev_min = min;
            }
        }
    }

    #[test]
    fn schedule_is_nonincreasing(t_max in 1u64..100_000, horizon in 0u64..1_000_000, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t0 = (lo * t_max as f64) as u64;
        let t1 = (hi * t_max as f64) as u64;
        let f0 = schedule_f(t0, t_max, horizon);
        prop_assert!(f0 >= schedule_f(t1, t_max, horizon));
        prop_assert!(f0 <= horizon);
    }
}
