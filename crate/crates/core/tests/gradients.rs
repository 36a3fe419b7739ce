mod common;

use std::sync::Arc;

use common::{grad_check, project, random, rng};
use latentgraph::tensor::{Optimizer, Param, SparsePattern, Tape, Var};
use latentgraph::Tensor;

const TOL: f64 = 1e-4;

type BinOp = fn(&mut Tape, Var, Var) -> Var;

fn assert_grad(name: &str, err: f64, tol: f64) {
    assert!(err < tol, "{name}: relative error {err:e} >= {tol:e}");
}

#[test]
fn matmul_gradient() {
    let mut r = rng(1);
    let inputs = [random(5, 7, &mut r), random(7, 3, &mut r)];
    let err = grad_check(&inputs, |t, v| {
        let y = t.matmul(v[0], v[1]).unwrap();
        project(t, y, 1)
    });
    assert_grad("matmul", err, 1e-6);
}

#[test]
fn elementwise_gradients() {
    let mut r = rng(2);
    let inputs = [random(4, 4, &mut r), random(4, 4, &mut r)];
    let cases: [(&str, BinOp); 6] = [
        ("add", |t, a, b| t.add(a, b).unwrap()),
        ("sub", |t, a, b| t.sub(a, b).unwrap()),
        ("mul", |t, a, b| t.mul(a, b).unwrap()),
        ("scale", |t, a, _| t.scale(a, -2.5)),
        ("relu", |t, a, _| t.relu(a)),
        ("gelu", |t, a, _| t.gelu(a)),
    ];
    for (name, op) in cases {
        let err = grad_check(&inputs, |t, v| {
            let y = op(t, v[0], v[1]);
            project(t, y, 2)
        });
        assert_grad(name, err, 1e-5);
    }
}

#[test]
fn bias_broadcast_gradient() {
    let mut r = rng(3);
    let inputs = [random(6, 3, &mut r), random(1, 3, &mut r)];
    let err = grad_check(&inputs, |t, v| {
        let y = t.add_row(v[0], v[1]).unwrap();
        project(t, y, 3)
    });
    assert_grad("add_row", err, TOL);
}

#[test]
fn softmax_gradient_and_rows_sum_to_one() {
    let mut r = rng(4);
    let inputs = [random(3, 5, &mut r).scale(3.0)];
    let err = grad_check(&inputs, |t, v| {
        let y = t.softmax_rows(v[0]);
        project(t, y, 4)
    });
    assert_grad("softmax_rows", err, TOL);

    let mut tape = Tape::new();
    let x = tape.constant(inputs[0].clone());
    let y = tape.softmax_rows(x);
    for row in 0..3 {
        let s: f64 = tape.value(y).row(row).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(tape.value(y).row(row).iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn layer_norm_gradient_all_inputs() {
    let mut r = rng(5);
    let inputs = [
        random(2, 6, &mut r),
        random(1, 6, &mut r),
        random(1, 6, &mut r),
    ];
    let err = grad_check(&inputs, |t, v| {
        let y = t.layer_norm(v[0], v[1], v[2]).unwrap();
        project(t, y, 5)
    });
    assert_grad("layer_norm", err, TOL);
}

#[test]
fn layer_norm_rows_are_centred_before_affine() {
    let mut r = rng(6);
    let mut tape = Tape::new();
    let x = tape.constant(random(5, 8, &mut r).scale(10.0));
    let g = tape.constant(Tensor::filled(1, 8, 1.0));
    let b = tape.constant(Tensor::zeros(1, 8));
    let y = tape.layer_norm(x, g, b).unwrap();
    for row in 0..5 {
        let mean: f64 = tape.value(y).row(row).iter().sum::<f64>() / 8.0;
        assert!(mean.abs() < 1e-10);
    }
}

#[test]
fn mse_mean_gradient_and_loop_oracle() {
    let mut r = rng(7);
    let inputs = [random(4, 3, &mut r), random(4, 3, &mut r)];
    let err = grad_check(&inputs, |t, v| t.mse_mean(v[0], v[1]).unwrap());
    assert_grad("mse_mean", err, TOL);

    let mut tape = Tape::new();
    let a = tape.constant(inputs[0].clone());
    let b = tape.constant(inputs[1].clone());
    let l = tape.mse_mean(a, b).unwrap();
    let mut total = 0.0;
    for i in 0..4 {
        let mut row = 0.0;
        for j in 0..3 {
            let d = inputs[0].get(i, j) - inputs[1].get(i, j);
            row += d * d;
        }
        total += row;
    }
    assert!((tape.value(l).get(0, 0) - total / 4.0).abs() < 1e-12);
}

#[test]
fn row_replacement_gradients() {
    let mut r = rng(8);
    let mask: Arc<[bool]> = Arc::from(vec![true, false, true, false, false]);
    let inputs = [random(5, 4, &mut r), random(1, 4, &mut r)];
    let m = mask.clone();
    let err = grad_check(&inputs, |t, v| {
        let y = t.replace_rows(v[0], v[1], m.clone()).unwrap();
        let z = t.gelu(y);
        project(t, z, 8)
    });
    assert_grad("replace_rows", err, TOL);
    let err = grad_check(&inputs, |t, v| {
        let y = t.add_masked_rows(v[0], v[1], mask.clone()).unwrap();
        let z = t.gelu(y);
        project(t, z, 9)
    });
    assert_grad("add_masked_rows", err, TOL);
}

#[test]
fn propagate_gradient_wrt_weights_and_signal() {
    let mut r = rng(9);
    let pattern = Arc::new(
        SparsePattern::from_rows(vec![
            vec![0, 1, 3],
            vec![0, 1, 2],
            vec![1, 2],
            vec![0, 3, 5],
            vec![4],
            vec![3, 5],
        ])
        .unwrap(),
    );
    let inputs = [random(1, pattern.nnz(), &mut r), random(6, 3, &mut r)];
    let err = grad_check(&inputs, |t, v| {
        let y = t.propagate(&pattern, v[0], v[1]).unwrap();
        project(t, y, 10)
    });
    assert_grad("propagate", err, TOL);
}

#[test]
fn concat_and_reshape_gradients() {
    let mut r = rng(10);
    let inputs = [random(3, 2, &mut r), random(3, 4, &mut r), random(3, 2, &mut r)];
    let err = grad_check(&inputs, |t, v| {
        let c = t.concat_cols(v).unwrap();
        let s = t.reshape(c, 6, 4).unwrap();
        let g = t.gelu(s);
        project(t, g, 11)
    });
    assert_grad("concat_cols/reshape", err, TOL);
}

#[test]
fn grouped_attention_gradients() {
    let mut r = rng(11);
    // 2 groups of 4 tokens, C = 6, 2 heads.
    let inputs = [random(8, 6, &mut r), random(8, 6, &mut r), random(8, 6, &mut r)];
    let err = grad_check(&inputs, |t, v| {
        let s = t.token_scores(v[0], v[1], 4, 2, 0.5).unwrap();
        let p = t.softmax_rows(s);
        let o = t.token_mix(p, v[2], 4, 2).unwrap();
        project(t, o, 12)
    });
    assert_grad("token attention", err, TOL);
}

#[test]
fn composed_chain_matches_finite_differences() {
    let mut r = rng(12);
    let inputs = [
        random(4, 5, &mut r),
        random(5, 6, &mut r),
        random(1, 6, &mut r),
        random(1, 6, &mut r),
        random(4, 6, &mut r),
    ];
    let err = grad_check(&inputs, |t, v| {
        let h = t.matmul(v[0], v[1]).unwrap();
        let n = t.layer_norm(h, v[2], v[3]).unwrap();
        let s = t.softmax_rows(n);
        t.mse_mean(s, v[4]).unwrap()
    });
    assert_grad("matmul-layer_norm-softmax-mse", err, TOL);
}

#[test]
fn forward_and_backward_are_bitwise_deterministic() {
    let run = || {
        let mut r = rng(13);
        let mut tape = Tape::new();
        let a = tape.param(&random(6, 5, &mut r));
        let b = tape.param(&random(5, 4, &mut r));
        let y = tape.matmul(a, b).unwrap();
        let g = tape.gelu(y);
        let l = project(&mut tape, g, 3);
        let grads = tape.backward(l).unwrap();
        (
            tape.value(l).clone(),
            grads.get(a).unwrap().clone(),
            grads.get(b).unwrap().clone(),
        )
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_gradient_leaves_parameters_unchanged() {
    let mut p = Param::new("w", Tensor::from_rows(&[[0.3, -0.7]]));
    let before = p.value.clone();
    let mut opt = Optimizer::adam(0.1, 0.0);
    for _ in 0..5 {
        p.grad = Some(Tensor::zeros(1, 2));
        opt.step(&mut [&mut p]).unwrap();
    }
    assert_eq!(p.value, before);
}

#[test]
fn zero_learning_rate_never_moves() {
    let mut p = Param::new("w", Tensor::from_rows(&[[0.3, -0.7]]));
    let before = p.value.clone();
    for mut opt in [Optimizer::adam(0.0, 0.1), Optimizer::sgd(0.0, 0.1)] {
        p.grad = Some(Tensor::from_rows(&[[1.0, -2.0]]));
        opt.step(&mut [&mut p]).unwrap();
        assert_eq!(p.value, before);
    }
}

#[test]
fn sgd_step_on_square() {
    let mut p = Param::new("w", Tensor::scalar(1.0));
    let mut tape = Tape::new();
    let w = tape.param(&p.value);
    let sq = tape.mul(w, w).unwrap();
    let mut grads = tape.backward(sq).unwrap();
    p.grad = grads.take(w);
    Optimizer::sgd(0.1, 0.0).step(&mut [&mut p]).unwrap();
    assert!((p.value.get(0, 0) - 0.8).abs() < 1e-15);
}

#[test]
fn adam_descends_quadratic_bowl() {
    let mut p = Param::new("w", Tensor::from_rows(&[[1.0, -2.0, 0.5]]));
    let mut opt = Optimizer::adam(0.05, 0.0);
    for _ in 0..500 {
        let mut tape = Tape::new();
        let w = tape.param(&p.value);
        let sq = tape.mul(w, w).unwrap();
        let l = tape.sum(sq);
        let mut grads = tape.backward(l).unwrap();
        p.grad = grads.take(w);
        opt.step(&mut [&mut p]).unwrap();
    }
    assert!(p.value.max_abs() < 1e-3, "{:?}", p.value);
}

#[test]
fn glorot_statistics() {
    use latentgraph::tensor::glorot_uniform;
    let t = glorot_uniform(100, 100, &mut rng(14));
    let mean = t.sum() / t.len() as f64;
    assert!(mean.abs() < 0.01);
    let bound = (6.0f64 / 200.0).sqrt();
    assert!(t.max_abs() <= bound);
    assert_eq!(t, glorot_uniform(100, 100, &mut rng(14)));
}
