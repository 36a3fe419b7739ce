use latentgraph::{Graph, Tensor};
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(|n| {
        let edges = proptest::collection::vec((0..n, 0..n), 0..(3 * n));
        (Just(n), edges)
    })
}

fn dense_adjacency(n: usize, g: &Graph) -> Tensor {
    let mut a = Tensor::zeros(n, n);
    for (u, v) in g.edges() {
        a.set(u, v, 1.0);
        a.set(v, u, 1.0);
    }
    a
}

/// `D̃^{-1/2}(A+I)D̃^{-1/2}` by explicit dense products.
fn dense_normalized(n: usize, g: &Graph) -> Tensor {
    let a = dense_adjacency(n, g).add(&Tensor::identity(n)).unwrap();
    let mut d = Tensor::zeros(n, n);
    for i in 0..n {
        let deg: f64 = a.row(i).iter().sum();
        d.set(i, i, 1.0 / deg.sqrt());
    }
    d.matmul(&a).unwrap().matmul(&d).unwrap()
}

/// `fᵀ(I − D^{-1/2} A D^{-1/2})f` with dense matrices; isolated nodes keep
/// only their identity term.
fn dense_quadratic(n: usize, g: &Graph, f: &[f64]) -> f64 {
    let a = dense_adjacency(n, g);
    let mut l = Tensor::identity(n);
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j) != 0.0 {
                let di: f64 = a.row(i).iter().sum();
                let dj: f64 = a.row(j).iter().sum();
                l.set(i, j, l.get(i, j) - 1.0 / (di * dj).sqrt());
            }
        }
    }
    let fv = Tensor::from_vec(n, 1, f.to_vec()).unwrap();
    fv.transpose().matmul(&l).unwrap().matmul(&fv).unwrap().get(0, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalization_matches_dense_oracle((n, edges) in arb_graph(50)) {
        let g = Graph::new(Tensor::zeros(n, 1), None, &edges).unwrap();
        let sparse = g.adjacency().to_dense();
        let dense = dense_normalized(n, &g);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((sparse.get(i, j) - dense.get(i, j)).abs() < 1e-12);
                prop_assert_eq!(sparse.get(i, j).to_bits(), sparse.get(j, i).to_bits());
            }
        }
        prop_assert!(g.adjacency().values.iter().all(|&v| v > 0.0));
        for i in 0..n {
            let mut want: Vec<usize> = g.neighbors(i).to_vec();
            want.push(i);
            want.sort_unstable();
            prop_assert_eq!(g.adjacency().pattern.row_cols(i), &want[..]);
        }
    }

    #[test]
    fn quadratic_form_matches_matrix_form(
        (n, edges) in arb_graph(30),
        seed in any::<u64>(),
    ) {
        let g = Graph::new(Tensor::zeros(n, 1), None, &edges).unwrap();
        let f: Vec<f64> = (0..n)
            .map(|i| (((seed >> (i % 60)) & 0xff) as f64 / 64.0) - 2.0)
            .collect();
        let q = g.laplacian_quadratic(&f).unwrap();
        prop_assert!((q - dense_quadratic(n, &g, &f)).abs() < 1e-10);
    }

    #[test]
    fn homophily_invariant_under_class_relabeling(
        (n, edges) in arb_graph(40),
        labels_seed in proptest::collection::vec(0usize..4, 40),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let labels: Vec<usize> = labels_seed[..n].to_vec();
        let relabeled: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
        let g1 = Graph::new(Tensor::zeros(n, 1), Some(labels), &edges).unwrap();
        let g2 = Graph::new(Tensor::zeros(n, 1), Some(relabeled), &edges).unwrap();
        if g1.num_edges() > 0 {
            prop_assert_eq!(g1.homophily_ratio().unwrap(), g2.homophily_ratio().unwrap());
        }
    }

    #[test]
    fn distinct_labels_give_zero_homophily((n, edges) in arb_graph(40)) {
        let g = Graph::new(Tensor::zeros(n, 1), Some((0..n).collect()), &edges).unwrap();
        if g.num_edges() > 0 {
            prop_assert_eq!(g.homophily_ratio().unwrap(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn laplacian_quadratic_is_positive_semidefinite(
        (n, edges) in arb_graph(25),
        signal in proptest::collection::vec(-10.0f64..10.0, 25),
    ) {
        let g = Graph::new(Tensor::zeros(n, 1), None, &edges).unwrap();
        prop_assert!(g.laplacian_quadratic(&signal[..n]).unwrap() >= 0.0);
    }
}
