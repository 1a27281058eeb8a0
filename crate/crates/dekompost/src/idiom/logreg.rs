//! L2-regularized logistic regression trained by full-batch gradient
//! descent with a backtracking (Armijo) line search. Deterministic: zero
//! initialization, no sampling.

use std::path::Path;

use crate::container::Container;
use crate::mat::{dot, Matrix};

use super::IdiomError;

const MAX_ITERS: usize = 1000;
const GRAD_TOL: f64 = 1e-6;
const ARMIJO_C: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Inverse regularization strength.
    pub c: f64,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean logistic loss plus `‖w‖²/(2·C·N)`, with its gradient. The bias is
/// not regularized.
pub fn logreg_loss_and_gradient(
    weights: &[f64],
    bias: f64,
    x: &[Vec<f64>],
    y: &[u8],
    c: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (xi, &yi) in x.iter().zip(y.iter()) {
        let a = dot(weights, xi) + bias;
        // -[y ln σ(a) + (1-y) ln(1-σ(a))] == softplus(-a) + (1-y)·a
        loss += softplus(-a) + (1.0 - yi as f64) * a;
        let err = sigmoid(a) - yi as f64;
        for (g, xv) in grad_w.iter_mut().zip(xi.iter()) {
            *g += err * xv;
        }
        grad_b += err;
    }
    loss /= n;
    grad_b /= n;
    let reg_scale = 1.0 / (c * n);
    for (g, w) in grad_w.iter_mut().zip(weights.iter()) {
        *g = *g / n + w * reg_scale;
    }
    loss += dot(weights, weights) * reg_scale / 2.0;
    (loss, grad_w, grad_b)
}

/// Train on feature vectors with binary labels. Requires at least two
/// examples and both classes present.
pub fn train_logreg(x: &[Vec<f64>], y: &[u8], c: f64) -> Result<LogRegModel, IdiomError> {
    if x.len() < 2 {
        return Err(IdiomError::TooFewExamples(x.len()));
    }
    assert_eq!(x.len(), y.len(), "features and labels must align");
    if y.iter().all(|&v| v == 0) || y.iter().all(|&v| v == 1) {
        return Err(IdiomError::SingleClass);
    }
    let dim = x[0].len();
    for xi in x {
        if xi.len() != dim {
            return Err(IdiomError::DimensionMismatch {
                expected: dim,
                found: xi.len(),
            });
        }
    }

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut step = 1.0f64;
    let (mut loss, mut grad_w, mut grad_b) = logreg_loss_and_gradient(&weights, bias, x, y, c);
    for _ in 0..MAX_ITERS {
        let grad_sq = dot(&grad_w, &grad_w) + grad_b * grad_b;
        if grad_sq.sqrt() < GRAD_TOL {
            break;
        }
        // Backtrack until the Armijo condition holds; the loss therefore
        // decreases monotonically across iterations.
        let mut accepted = false;
        for _ in 0..60 {
            let trial_w: Vec<f64> = weights
                .iter()
                .zip(grad_w.iter())
                .map(|(w, g)| w - step * g)
                .collect();
            let trial_b = bias - step * grad_b;
            let (trial_loss, tg_w, tg_b) = logreg_loss_and_gradient(&trial_w, trial_b, x, y, c);
            if trial_loss <= loss - ARMIJO_C * step * grad_sq {
                weights = trial_w;
                bias = trial_b;
                loss = trial_loss;
                grad_w = tg_w;
                grad_b = tg_b;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    Ok(LogRegModel {
        weights,
        bias,
        c,
    })
}

/// `p = σ(w·x + b)`, label 1 iff p ≥ 0.5.
pub fn predict_logreg(model: &LogRegModel, x: &[f64]) -> Result<(u8, f64), IdiomError> {
    if x.len() != model.weights.len() {
        return Err(IdiomError::DimensionMismatch {
            expected: model.weights.len(),
            found: x.len(),
        });
    }
    let p = sigmoid(dot(&model.weights, x) + model.bias);
    Ok((u8::from(p >= 0.5), p))
}

pub fn save_logreg(path: &Path, model: &LogRegModel) -> Result<(), IdiomError> {
    let mut c = Container::new();
    c.push_entry("kind", "logreg");
    c.push_entry("c", model.c);
    c.push_entry("dim", model.weights.len());
    c.push_entry("feature_order", "compound,modifier,head");
    c.push_block(
        "logreg.w",
        Matrix::from_vec(1, model.weights.len(), model.weights.clone()),
    );
    c.push_block("logreg.b", Matrix::from_vec(1, 1, vec![model.bias]));
    c.write(path)?;
    Ok(())
}

pub fn load_logreg(path: &Path) -> Result<LogRegModel, IdiomError> {
    let c = Container::read(path)?;
    if c.require("kind")? != "logreg" {
        return Err(IdiomError::InvalidModel(format!(
            "expected kind=logreg, found {}",
            c.require("kind")?
        )));
    }
    let weights = c.block("logreg.w")?.data().to_vec();
    let bias = c.block("logreg.b")?.at(0, 0);
    Ok(LogRegModel {
        weights,
        bias,
        c: c.parse("c")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_data() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.5],
            vec![1.5, 2.5],
            vec![-1.0, -2.0],
            vec![-2.0, -1.0],
            vec![-1.5, -0.5],
        ];
        let y = vec![1, 1, 1, 0, 0, 0];
        (x, y)
    }

    #[test]
    fn separable_data_is_fit_perfectly() {
        let (x, y) = separable_data();
        let model = train_logreg(&x, &y, 1.0).unwrap();
        for (xi, &yi) in x.iter().zip(y.iter()) {
            let (label, _) = predict_logreg(&model, xi).unwrap();
            assert_eq!(label, yi);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = separable_data();
        let w = vec![0.3, -0.7];
        let b = 0.2;
        let c = 1.0;
        let (_, grad_w, grad_b) = logreg_loss_and_gradient(&w, b, &x, &y, c);
        let eps = 1e-6;
        for k in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += eps;
            wm[k] -= eps;
            let (lp, _, _) = logreg_loss_and_gradient(&wp, b, &x, &y, c);
            let (lm, _, _) = logreg_loss_and_gradient(&wm, b, &x, &y, c);
            let numeric = (lp - lm) / (2.0 * eps);
            let rel = (grad_w[k] - numeric).abs() / numeric.abs().max(1e-12);
            assert!(rel < 1e-6, "weight {k}: {} vs {numeric}", grad_w[k]);
        }
        let (lp, _, _) = logreg_loss_and_gradient(&w, b + eps, &x, &y, c);
        let (lm, _, _) = logreg_loss_and_gradient(&w, b - eps, &x, &y, c);
        let numeric = (lp - lm) / (2.0 * eps);
        assert!((grad_b - numeric).abs() / numeric.abs().max(1e-12) < 1e-6);
    }

    #[test]
    fn loss_decreases_monotonically() {
        let (x, y) = separable_data();
        // Re-run the optimizer manually, tracking the loss path.
        let mut w = vec![0.0; 2];
        let mut b = 0.0;
        let mut step = 1.0;
        let (mut loss, mut gw, mut gb) = logreg_loss_and_gradient(&w, b, &x, &y, 1.0);
        let mut losses = vec![loss];
        for _ in 0..50 {
            let grad_sq = dot(&gw, &gw) + gb * gb;
            if grad_sq.sqrt() < GRAD_TOL {
                break;
            }
            loop {
                let tw: Vec<f64> = w.iter().zip(gw.iter()).map(|(w, g)| w - step * g).collect();
                let tb = b - step * gb;
                let (tl, tgw, tgb) = logreg_loss_and_gradient(&tw, tb, &x, &y, 1.0);
                if tl <= loss - ARMIJO_C * step * grad_sq {
                    w = tw;
                    b = tb;
                    loss = tl;
                    gw = tgw;
                    gb = tgb;
                    break;
                }
                step /= 2.0;
            }
            losses.push(loss);
            step *= 2.0;
        }
        for pair in losses.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn duplicating_data_with_compensated_c_gives_same_model() {
        // The regularizer is ‖w‖²/(2·C·N): doubling the data doubles N, so
        // halving C restores the identical objective.
        let (x, y) = separable_data();
        let mut x2 = x.clone();
        x2.extend(x.iter().cloned());
        let mut y2 = y.clone();
        y2.extend(y.iter().cloned());
        let a = train_logreg(&x, &y, 1.0).unwrap();
        let b = train_logreg(&x2, &y2, 0.5).unwrap();
        for (wa, wb) in a.weights.iter().zip(b.weights.iter()) {
            assert!((wa - wb).abs() < 1e-9);
        }
        assert!((a.bias - b.bias).abs() < 1e-9);
    }

    #[test]
    fn predict_edge_cases() {
        let model = LogRegModel {
            weights: vec![0.0, 0.0],
            bias: 0.0,
            c: 1.0,
        };
        let (label, p) = predict_logreg(&model, &[3.0, -4.0]).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(label, 1, "p >= 0.5 goes positive");

        let model = LogRegModel {
            weights: vec![0.0, 0.0],
            bias: 10.0,
            c: 1.0,
        };
        let (label, p) = predict_logreg(&model, &[0.0, 0.0]).unwrap();
        assert!(p > 0.9999 && p < 1.0);
        assert_eq!(label, 1);

        // Negating weights and bias flips p to 1-p.
        let m1 = LogRegModel {
            weights: vec![0.4, -0.2],
            bias: 0.3,
            c: 1.0,
        };
        let m2 = LogRegModel {
            weights: vec![-0.4, 0.2],
            bias: -0.3,
            c: 1.0,
        };
        let x = [1.5, 2.5];
        let (_, p1) = predict_logreg(&m1, &x).unwrap();
        let (_, p2) = predict_logreg(&m2, &x).unwrap();
        assert!((p1 + p2 - 1.0).abs() < 1e-12);

        assert!(matches!(
            predict_logreg(&m1, &[1.0]),
            Err(IdiomError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train_logreg(&x, &[1, 1], 1.0),
            Err(IdiomError::SingleClass)
        ));
    }

    #[test]
    fn model_file_roundtrip() {
        let (x, y) = separable_data();
        let model = train_logreg(&x, &y, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("logreg.dkmp");
        save_logreg(&p, &model).unwrap();
        let back = load_logreg(&p).unwrap();
        assert_eq!(back.weights.len(), model.weights.len());
        assert_eq!(back.c, model.c);
        // f32 storage: values agree to f32 precision.
        for (a, b) in model.weights.iter().zip(back.weights.iter()) {
            assert!((a - b).abs() <= a.abs() * 1e-6 + 1e-9);
        }
    }
}
