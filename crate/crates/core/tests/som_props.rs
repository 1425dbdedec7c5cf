use proptest::prelude::*;
use tilesom::dispersion::{simulate, DispersionParams, DistanceMode, GaussianParams};
use tilesom::som::{train, Dataset, InitMode, Neighborhood, SomState, TrainParams};
use tilesom::tessellation::TileGraph;

fn cycle(n: usize) -> TileGraph {
    let adj = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
    TileGraph::from_adjacency(adj, "cycle").unwrap()
}

fn hop_matrix(g: &TileGraph) -> Vec<f64> {
    let d = g.distances().unwrap();
    (0..g.len())
        .flat_map(|i| (0..g.len()).map(move |j| (i, j)))
        .map(|(i, j)| d.get(i, j) as f64)
        .collect()
}

fn dataset(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-50.0..50.0f64, k), 1..30)
}

fn small_params() -> DispersionParams {
    DispersionParams {
        p: 0.2,
        stop_ratio: 1.6,
        ..DispersionParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_stay_in_the_data_box(samples in dataset(3), seed in any::<u64>(), simulated in any::<bool>()) {
        let g = cycle(12);
        let data = Dataset::new(samples.clone()).unwrap();
        let table = simulate(&g, &small_params()).unwrap();
        let dist = hop_matrix(&g);
        let nb = if simulated {
            Neighborhood::Simulated(&table)
        } else {
            Neighborhood::Gaussian {
                params: GaussianParams { eta: 0.1, sigma0: 6.0, mode: DistanceMode::Hops },
                distances: &dist,
            }
        };
        let params = TrainParams { t_max: 300, eta: 0.3, seed, init: InitMode::UniformBox };
        let out = train(&g, &data, &params, &nb).unwrap();
        for (c, (lo, hi)) in data.bounds().into_iter().enumerate() {
            for i in 0..g.len() {
                let w = out.state.weight(i)[c];
                prop_assert!(w >= lo - 1e-9 && w <= hi + 1e-9);
            }
        }
        let again = train(&g, &data, &params, &nb).unwrap();
        prop_assert_eq!(out.state, again.state);
        prop_assert_eq!(out.assignment, again.assignment);
    }

    #[test]
    fn bmu_ignores_common_translation(
        weights in proptest::collection::vec(-10.0..10.0f64, 2 * 9),
        x in proptest::collection::vec(-10.0..10.0f64, 2),
        shift in proptest::collection::vec(-100.0..100.0f64, 2),
    ) {
        let a = SomState::from_weights(9, 2, weights.clone());
        let moved: Vec<f64> = weights.chunks(2).flat_map(|w| [w[0] + shift[0], w[1] + shift[1]]).collect();
        let b = SomState::from_weights(9, 2, moved);
        let y = [x[0] + shift[0], x[1] + shift[1]];
        let (i, j) = (a.best_matching_unit(&x).unwrap(), b.best_matching_unit(&y).unwrap());
        // rounding may reorder neurons that are equally near
        let dist = |s: &SomState, n: usize, p: &[f64]| s.weight(n).iter().zip(p).map(|(w, q)| (w - q).powi(2)).sum::<f64>();
        prop_assert!(i == j || (dist(&a, i, &x) - dist(&a, j, &x)).abs() < 1e-9);
    }

    #[test]
    fn single_neuron_converges_geometrically(w0 in -10.0..10.0f64, x in -10.0..10.0f64, eta in 0.01..1.0f64, steps in 0u64..60) {
        let dist = [0.0];
        let nb = Neighborhood::Gaussian {
            params: GaussianParams { eta, sigma0: 1.0, mode: DistanceMode::Hops },
            distances: &dist,
        };
        let mut s = SomState::from_weights(1, 1, vec![w0]);
        let mut scratch = [0.0];
        for t in 0..steps {
            s.train_step(&[x], t, steps, eta, &nb, &mut scratch).unwrap();
        }
        let expected = x + (w0 - x) * (1.0 - eta).powi(steps as i32);
        prop_assert!((s.weight(0)[0] - expected).abs() < 1e-9);
    }
}
