use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First-order optimizer over a flat parameter vector. Weight decay is the
/// coupled L2 form: `λ·θ` is added to the gradient before the update.
#[derive(Debug, Clone)]
pub struct Optimizer<T> {
    kind: OptimizerKind,
    lr: T,
    weight_decay: T,
    m: Vec<T>,
    v: Vec<T>,
    steps: i32,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, lr: f64, weight_decay: f64, dim: usize) -> Self {
        let moments = if matches!(kind, OptimizerKind::Adam { .. }) {
            dim
        } else {
            0
        };
        Self {
            kind,
            lr: T::lit(lr),
            weight_decay: T::lit(weight_decay),
            m: vec![T::zero(); moments],
            v: vec![T::zero(); moments],
            steps: 0,
        }
    }

    pub fn step(&mut self, theta: &mut [T], grad: &[T]) {
        assert_eq!(theta.len(), grad.len(), "gradient length");
        self.steps += 1;
        let wd = self.weight_decay;
        match self.kind {
            OptimizerKind::Sgd => {
                for (x, &g) in theta.iter_mut().zip(grad) {
                    *x -= self.lr * (g + wd * *x);
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let (b1, b2, eps) = (T::lit(beta1), T::lit(beta2), T::lit(eps));
                let bc1 = T::one() - b1.powi(self.steps);
                let bc2 = T::one() - b2.powi(self.steps);
                for (((x, &g), m), v) in theta
                    .iter_mut()
                    .zip(grad)
                    .zip(self.m.iter_mut())
                    .zip(self.v.iter_mut())
                {
                    let g = g + wd * *x;
                    *m = b1 * *m + (T::one() - b1) * g;
                    *v = b2 * *v + (T::one() - b2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *x -= self.lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
}
