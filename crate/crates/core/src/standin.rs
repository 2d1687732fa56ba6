//! A small logistic-regression classifier used as the stand-in black-box
//! model in the end-to-end fixtures.

use crate::error::{Error, Result};

/// Fitted coefficients; `coef[0]` is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    coef: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Solves `a·x = b` for symmetric positive definite `a` by Cholesky.
fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let d = b.len();
    for j in 0..d {
        let diag = a[j][j] - (0..j).map(|k| a[j][k] * a[j][k]).sum::<f64>();
        if diag.is_nan() || diag <= 0.0 {
            return None;
        }
        let l = diag.sqrt();
        a[j][j] = l;
        for i in j + 1..d {
            let v = a[i][j] - (0..j).map(|k| a[i][k] * a[j][k]).sum::<f64>();
            a[i][j] = v / l;
        }
    }
    for i in 0..d {
        b[i] = (b[i] - (0..i).map(|k| a[i][k] * b[k]).sum::<f64>()) / a[i][i];
    }
    for i in (0..d).rev() {
        b[i] = (b[i] - (i + 1..d).map(|k| a[k][i] * b[k]).sum::<f64>()) / a[i][i];
    }
    Some(b)
}

impl LogisticModel {
    /// Iteratively reweighted least squares with a small ridge term.
    /// Features are used as given; the intercept is added here.
    #[allow(clippy::needless_range_loop)]
    pub fn fit(features: &[Vec<f64>], labels: &[bool]) -> Result<Self> {
        const RIDGE: f64 = 1e-6;
        const MAX_ITERS: usize = 50;
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::InvalidArgument(
                "logistic fit needs one label per non-empty feature row".into(),
            ));
        }
        let d = features[0].len() + 1;
        let mut coef = vec![0.0; d];
        let mut x = vec![1.0; d];
        for _ in 0..MAX_ITERS {
            let mut hess = vec![vec![0.0; d]; d];
            let mut grad = vec![0.0; d];
            for (row, &y) in features.iter().zip(labels) {
                x[1..].copy_from_slice(row);
                let p = sigmoid(x.iter().zip(&coef).map(|(a, b)| a * b).sum());
                let w = (p * (1.0 - p)).max(1e-10);
                let r = f64::from(u8::from(y)) - p;
                for i in 0..d {
                    grad[i] += x[i] * r;
                    for j in 0..=i {
                        hess[i][j] += w * x[i] * x[j];
                    }
                }
            }
            for i in 0..d {
                hess[i][i] += RIDGE;
                grad[i] -= RIDGE * coef[i];
                for j in 0..i {
                    hess[j][i] = hess[i][j];
                }
            }
            let step = cholesky_solve(hess, grad)
                .ok_or_else(|| Error::Solver("singular logistic Hessian".into()))?;
            let size = step.iter().map(|s| s.abs()).fold(0.0, f64::max);
            for (c, s) in coef.iter_mut().zip(&step) {
                *c += s;
            }
            if size < 1e-10 {
                break;
            }
        }
        Ok(Self { coef })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// `P(y = 1 | x)`.
    pub fn predict(&self, features: &[f64]) -> f64 {
        let z = self.coef[0]
            + features
                .iter()
                .zip(&self.coef[1..])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        sigmoid(z)
    }
}
