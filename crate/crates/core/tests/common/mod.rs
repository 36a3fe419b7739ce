#![allow(dead_code)]

use latentgraph::tensor::{Tape, Var};
use latentgraph::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::from_vec(rows, cols, data).unwrap()
}

/// Reduces `v` to a scalar through a fixed random weighting, so every output
/// entry gets a distinct upstream gradient.
pub fn project(tape: &mut Tape, v: Var, seed: u64) -> Var {
    let (r, c) = tape.value(v).shape();
    let w = random(r, c, &mut rng(seed ^ 0x5eed));
    let prod = tape.mul_const(v, w).unwrap();
    tape.sum(prod)
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn rel_err(a: &Tensor, b: &Tensor) -> f64 {
    let diff = a.sub(b).unwrap().norm();
    // Floor keeps identically-zero gradients (e.g. a key bias under a
    // shift-invariant softmax) from comparing rounding noise to itself.
    diff / a.norm().max(b.norm()).max(REL_FLOOR)
}

pub const REL_FLOOR: f64 = 1e-4;

/// Largest relative error between tape gradients and central differences
/// over all `inputs`. `f` builds the scalar from leaves created for each
/// input (all with `requires_grad`).
pub fn grad_check<F>(inputs: &[Tensor], f: F) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let eval = |vals: &[Tensor]| -> f64 {
        let mut tape = Tape::new();
        let vars: Vec<Var> = vals.iter().map(|t| tape.param(t)).collect();
        let out = f(&mut tape, &vars);
        tape.value(out).get(0, 0)
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t)).collect();
    let out = f(&mut tape, &vars);
    let grads = tape.backward(out).unwrap();
    let mut worst: f64 = 0.0;
    for (i, input) in inputs.iter().enumerate() {
        let analytic = grads.get(vars[i]).unwrap().clone();
        let mut numeric = Tensor::zeros(input.rows(), input.cols());
        let mut vals = inputs.to_vec();
        for k in 0..input.len() {
            let orig = input.data()[k];
            vals[i].data_mut()[k] = orig + FD_STEP;
            let up = eval(&vals);
            vals[i].data_mut()[k] = orig - FD_STEP;
            let down = eval(&vals);
            vals[i].data_mut()[k] = orig;
            numeric.data_mut()[k] = (up - down) / (2.0 * FD_STEP);
        }
        worst = worst.max(rel_err(&analytic, &numeric));
    }
    worst
}

/// Writes a WebKB-layout dataset (dense features, ten split files) built
/// from `g` into `dir`.
pub fn write_webkb_fixture(dir: &std::path::Path, g: &latentgraph::Graph) {
    use std::fmt::Write as _;
    std::fs::create_dir_all(dir).unwrap();
    let labels = g.labels().unwrap();
    let mut nodes = String::from("node_id\tfeature\tlabel\n");
    for v in 0..g.num_nodes() {
        let f: Vec<String> = g.features().row(v).iter().map(|x| x.to_string()).collect();
        writeln!(nodes, "{v}\t{}\t{}", f.join(","), labels[v]).unwrap();
    }
    std::fs::write(dir.join("out1_node_feature_label.txt"), nodes).unwrap();
    let mut edges = String::from("node_id\tnode_id\n");
    for (u, v) in g.edges() {
        writeln!(edges, "{u}\t{v}").unwrap();
        writeln!(edges, "{v}\t{u}").unwrap();
    }
    std::fs::write(dir.join("out1_graph_edges.txt"), edges).unwrap();
    for i in 0..10 {
        let split = latentgraph::data::make_splits(
            g,
            &latentgraph::data::SplitSpec::PerClass {
                per_class: 3,
                val: 10,
                seed: i,
            },
        )
        .unwrap();
        latentgraph::data::write_split_file(&dir.join(format!("splits/split_{i}.txt")), &split)
            .unwrap();
    }
}

/// Writes the plain-text citation-graph layout for `g` into `dir`.
pub fn write_planetoid_fixture(dir: &std::path::Path, g: &latentgraph::Graph) {
    use std::fmt::Write as _;
    std::fs::create_dir_all(dir).unwrap();
    let mut feats = format!("nodes {} dim {}\n", g.num_nodes(), g.feature_dim());
    for v in 0..g.num_nodes() {
        let entries: Vec<String> = g
            .features()
            .row(v)
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(k, x)| format!("{k}:{x}"))
            .collect();
        writeln!(feats, "{}", entries.join(" ")).unwrap();
    }
    std::fs::write(dir.join("features.txt"), feats).unwrap();
    let labels: String = g.labels().unwrap().iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.join("labels.txt"), labels).unwrap();
    let edges: String = g.edges().map(|(u, v)| format!("{u} {v}\n")).collect();
    std::fs::write(dir.join("edges.txt"), edges).unwrap();
}

/// Sparse binary-feature graph with the given shape, for loader fixtures.
pub fn binary_graph(n: usize, dim: usize, classes: usize, seed: u64) -> latentgraph::Graph {
    let mut r = rng(seed);
    let mut f = Tensor::zeros(n, dim);
    for v in 0..n {
        for _ in 0..3 {
            let k = r.random_range(0..dim);
            f.set(v, k, 1.0);
        }
    }
    let labels: Vec<usize> = (0..n).map(|v| v % classes).collect();
    let edges: Vec<(usize, usize)> = (0..2 * n)
        .map(|_| (r.random_range(0..n), r.random_range(0..n)))
        .collect();
    latentgraph::Graph::new(f, Some(labels), &edges).unwrap()
}

/// Per-parameter relative error between the encoder's tape gradients and
/// central differences of `Σ R ⊙ encode(...)` for a fixed random `R`.
/// With `mask`, the token gradient is reported under the name `mask_token`.
pub fn encoder_grad_errors(
    params: &latentgraph::encoder::EncoderParams,
    graph: &latentgraph::Graph,
    mask: Option<(&[bool], &Tensor)>,
) -> Vec<(String, f64)> {
    use latentgraph::encoder::{forward, EncoderParams, MaskedInput};
    use std::sync::Arc;

    let loss = |p: &EncoderParams, token: Option<&Tensor>| -> f64 {
        let mut tape = Tape::new();
        let m = mask.map(|(m, _)| {
            let t = tape.constant(token.unwrap().clone());
            (Arc::<[bool]>::from(m), t)
        });
        let input = MaskedInput { features: graph.features(), mask: m };
        let f = forward::<ChaCha8Rng>(&mut tape, p, graph.adjacency(), &input, false, None).unwrap();
        let l = project(&mut tape, f.output, 77);
        tape.value(l).get(0, 0)
    };

    let mut tape = Tape::new();
    let token_var = mask.map(|(_, t)| tape.param(t));
    let input = MaskedInput {
        features: graph.features(),
        mask: mask.map(|(m, _)| (Arc::<[bool]>::from(m), token_var.unwrap())),
    };
    let f = forward::<ChaCha8Rng>(&mut tape, params, graph.adjacency(), &input, true, None).unwrap();
    let l = project(&mut tape, f.output, 77);
    let grads = tape.backward(l).unwrap();

    let mut out = Vec::new();
    for (i, p) in params.params().iter().enumerate() {
        let analytic = grads.get(f.params[i]).unwrap();
        let mut numeric = Tensor::zeros(p.value.rows(), p.value.cols());
        let mut probe = params.clone();
        for k in 0..p.value.len() {
            let orig = p.value.data()[k];
            probe.params_mut()[i].value.data_mut()[k] = orig + FD_STEP;
            let up = loss(&probe, mask.map(|(_, t)| t));
            probe.params_mut()[i].value.data_mut()[k] = orig - FD_STEP;
            let down = loss(&probe, mask.map(|(_, t)| t));
            probe.params_mut()[i].value.data_mut()[k] = orig;
            numeric.data_mut()[k] = (up - down) / (2.0 * FD_STEP);
        }
        out.push((p.name.clone(), rel_err(analytic, &numeric)));
    }
    if let (Some((_, token)), Some(tv)) = (mask, token_var) {
        let analytic = grads.get(tv).unwrap();
        let mut numeric = Tensor::zeros(1, token.cols());
        let mut t = token.clone();
        for k in 0..token.len() {
            let orig = token.data()[k];
            t.data_mut()[k] = orig + FD_STEP;
            let up = loss(params, Some(&t));
            t.data_mut()[k] = orig - FD_STEP;
            let down = loss(params, Some(&t));
            t.data_mut()[k] = orig;
            numeric.data_mut()[k] = (up - down) / (2.0 * FD_STEP);
        }
        out.push(("mask_token".into(), rel_err(analytic, &numeric)));
    }
    out
}

/// Random graph on `n` nodes with Gaussian-ish features, labels `v % 3`.
pub fn small_graph(n: usize, d: usize, seed: u64) -> latentgraph::Graph {
    let mut r = rng(seed);
    let f = random(n, d, &mut r);
    let edges: Vec<(usize, usize)> = (0..(3 * n) / 2)
        .map(|_| (r.random_range(0..n), r.random_range(0..n)))
        .collect();
    latentgraph::Graph::new(f, Some((0..n).map(|v| v % 3).collect()), &edges).unwrap()
}

/// `Ã · H` by an explicit neighbor loop, summing in ascending column order.
pub fn gcn_oracle(g: &latentgraph::Graph, h: &Tensor) -> Tensor {
    let n = g.num_nodes();
    let mut out = Tensor::zeros(n, h.cols());
    for i in 0..n {
        let mut cols: Vec<usize> = g.neighbors(i).to_vec();
        cols.push(i);
        cols.sort_unstable();
        let di = g.degree(i) + 1;
        for j in cols {
            let dj = g.degree(j) + 1;
            let w = 1.0 / ((di * dj) as f64).sqrt();
            for (o, &x) in out.row_mut(i).iter_mut().zip(h.row(j)) {
                *o += w * x;
            }
        }
    }
    out
}
