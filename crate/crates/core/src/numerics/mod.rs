//! Dense `f64` tensors with reverse-mode automatic differentiation.

pub mod gradcheck;
mod tape;
mod tensor;

pub use tape::{pinball, pinball_derivative, sigmoid, Gradients, Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    Shape { op: &'static str, lhs: Vec<usize>, rhs: Vec<usize> },
    #[error("loss must be a scalar, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("invalid tensor operation: {0}")]
    Invalid(String),
}

#[cfg(test)]
mod tests {
    use super::gradcheck::check_gradients;
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
        }
    }

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let mut tape = Tape::new();
        let i = tape.constant(Tensor::identity(2).unwrap());
        let b = tape.constant(t(&[2, 2], &[3.0, 4.0, 5.0, 6.0]));
        let c = tape.matmul(i, b).unwrap();
        assert_eq!(tape.value(c).data(), &[3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn matmul_row_by_column() {
        let mut tape = Tape::new();
        let a = tape.constant(t(&[1, 2], &[1.0, 2.0]));
        let b = tape.constant(t(&[2, 1], &[3.0, 4.0]));
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(c).shape(), &[1, 1]);
        assert_eq!(tape.value(c).data(), &[11.0]);
    }

    #[test]
    fn matmul_zero_lhs() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(&[2, 3]).unwrap());
        let b = tape.constant(t(&[3, 4], &(0..12).map(f64::from).collect::<Vec<_>>()));
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(c).shape(), &[2, 4]);
        assert!(tape.value(c).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(&[2, 3]).unwrap());
        let b = tape.constant(Tensor::zeros(&[2, 3]).unwrap());
        let err = tape.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]"), "{msg}");
        assert_eq!(err, NumericsError::Shape { op: "matmul", lhs: vec![2, 3], rhs: vec![2, 3] });
    }

    #[test]
    fn softmax_examples() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[3], &[0.0, 0.0, 0.0]));
        let y = tape.softmax(x, 0).unwrap();
        assert!(close(tape.value(y).data(), &[1.0 / 3.0; 3], 1e-15));

        let x = tape.constant(t(&[3], &[1f64.ln(), 2f64.ln(), 3f64.ln()]));
        let y = tape.softmax(x, 0).unwrap();
        assert!(close(tape.value(y).data(), &[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0], 1e-15));

        let x = tape.constant(t(&[2], &[1000.0, 0.0]));
        let y = tape.softmax(x, 0).unwrap();
        let v = tape.value(y).data();
        assert!(v.iter().all(|p| p.is_finite()));
        assert!((v[0] - 1.0).abs() < 1e-300_f64.max(f64::EPSILON) && v[1] < 1e-300);
    }

    #[test]
    fn softmax_on_inner_axis() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[2, 2], &[0.0, 5.0, 0.0, 5.0]));
        let y = tape.softmax(x, 0).unwrap();
        assert!(close(tape.value(y).data(), &[0.5; 4], 1e-15));
    }

    #[test]
    fn layer_norm_examples() {
        let mut tape = Tape::new();
        let g = tape.constant(t(&[2], &[1.0, 1.0]));
        let b = tape.constant(t(&[2], &[0.0, 0.0]));
        let x = tape.constant(t(&[2], &[1.0, 3.0]));
        let y = tape.layer_norm(x, g, b, 0.0).unwrap();
        assert!(close(tape.value(y).data(), &[-1.0, 1.0], 1e-15));

        let g4 = tape.constant(t(&[4], &[1.0; 4]));
        let b4 = tape.constant(t(&[4], &[0.0; 4]));
        let c = tape.constant(t(&[4], &[7.0; 4]));
        let y = tape.layer_norm(c, g4, b4, 1e-5).unwrap();
        assert!(tape.value(y).data().iter().all(|&v| v == 0.0));

        let g0 = tape.constant(t(&[3], &[0.0; 3]));
        let bias = tape.constant(t(&[3], &[0.5, -1.0, 2.0]));
        let x = tape.constant(t(&[2, 3], &[1.0, -4.0, 9.0, 3.0, 3.5, -2.0]));
        let y = tape.layer_norm(x, g0, bias, 1e-5).unwrap();
        assert_eq!(tape.value(y).data(), &[0.5, -1.0, 2.0, 0.5, -1.0, 2.0]);
    }

    #[test]
    fn backward_of_sum_is_ones() {
        let mut tape = Tape::new();
        let w = tape.parameter(t(&[3], &[1.0, 2.0, 3.0]));
        let s = tape.sum(w).unwrap();
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(w).unwrap(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn backward_of_sum_of_squares() {
        let mut tape = Tape::new();
        let w = tape.parameter(t(&[2], &[1.0, 2.0]));
        let sq = tape.mul(w, w).unwrap();
        let s = tape.sum(sq).unwrap();
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(w).unwrap(), &[2.0, 4.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let w = tape.parameter(t(&[2], &[1.0, 2.0]));
        assert_eq!(tape.backward(w).unwrap_err(), NumericsError::NonScalarLoss(vec![2]));
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut tape = Tape::new();
        let w = tape.parameter(t(&[2], &[1.0, 2.0]));
        let c = tape.constant(t(&[2], &[3.0, 4.0]));
        let p = tape.mul(w, c).unwrap();
        let s = tape.sum(p).unwrap();
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(w).unwrap(), &[3.0, 4.0]);
        assert!(g.get(c).is_none());
    }

    #[test]
    fn pinball_subgradient_branches() {
        assert_eq!(pinball_derivative(2.0, 1.0, 0.9), -0.9);
        assert!((pinball_derivative(1.0, 2.0, 0.9) - 0.1).abs() < 1e-15);
        // kink convention
        assert!((pinball_derivative(1.0, 1.0, 0.9) - 0.1).abs() < 1e-15);
    }

    fn random(shape: &[usize], seed: u64) -> Tensor {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn assert_grads(params: Vec<Tensor>, build: impl Fn(&mut Tape, &[Var]) -> Result<Var, NumericsError>) {
        let probes = check_gradients(&params, build, 20, 1e-5, 7).unwrap();
        assert!(!probes.is_empty());
        for p in probes {
            assert!(p.relative_error <= 1e-4, "{p:?}");
        }
    }

    #[test]
    fn primitive_gradients_match_finite_differences() {
        assert_grads(vec![random(&[3, 4], 1), random(&[4, 2], 2)], |t, p| {
            let c = t.matmul(p[0], p[1])?;
            let c = t.mul(c, c)?;
            t.sum(c)
        });
        assert_grads(vec![random(&[2, 3, 4], 3), random(&[2, 5, 4], 4)], |t, p| {
            let c = t.batch_matmul(p[0], p[1], true)?;
            let c = t.tanh(c)?;
            t.sum(c)
        });
        assert_grads(vec![random(&[2, 3, 4], 5), random(&[2, 4, 5], 6)], |t, p| {
            let c = t.batch_matmul(p[0], p[1], false)?;
            let c = t.sigmoid(c)?;
            t.mean(c)
        });
        assert_grads(vec![random(&[3, 5], 7), random(&[3, 5], 8)], |t, p| {
            let s = t.softmax(p[0], 1)?;
            let s2 = t.softmax(p[0], 0)?;
            let a = t.mul(s, p[1])?;
            let b = t.mul(s2, p[1])?;
            let c = t.sub(a, b)?;
            let c = t.elu(c)?;
            t.sum(c)
        });
        assert_grads(vec![random(&[4, 6], 9), random(&[6], 10), random(&[6], 11), random(&[4, 6], 12)], |t, p| {
            let y = t.layer_norm(p[0], p[1], p[2], 1e-3)?;
            let y = t.mul(y, p[3])?;
            t.sum(y)
        });
        assert_grads(vec![random(&[4, 3], 13), random(&[4, 2], 14), random(&[3], 15)], |t, p| {
            let c = t.concat(&[p[0], p[1], p[0]], 1)?;
            let s = t.slice(c, 1, 1, 3)?;
            let s = t.add_bias(s, p[2])?;
            let g = t.gather_rows(s, &[3, 0, 0, 2])?;
            let r = t.reshape(g, &[2, 6])?;
            let r = t.scale(r, 0.7)?;
            let r = t.mul(r, r)?;
            t.sum(r)
        });
        assert_grads(vec![random(&[2, 3], 16), random(&[2, 3], 17)], |t, p| {
            let c = t.concat(&[p[0], p[1]], 0)?;
            let s = t.slice(c, 0, 1, 2)?;
            let e = t.elu(s)?;
            let e = t.add(e, s)?;
            t.sum(e)
        });
    }

    #[test]
    fn pinball_gradient_matches_finite_differences_off_kink() {
        let target = vec![5.0, -3.0, 0.7, 2.0, -1.0, 4.0];
        assert_grads(vec![random(&[2, 3], 18)], move |t, p| t.pinball_sum(p[0], &target, &[0.1, 0.5, 0.9]));
    }
}
