//! Two-layer GCN `Z = Â·ReLU(Â·X·W0)·W1` with cross-entropy and
//! distillation losses and their exact gradients.
//!
//! `Â` is the symmetric self-loop normalization of the (possibly pruned)
//! graph. The model has no biases, so `Θ = (W0, W1)` has `F·H + H·C` entries
//! and flattens row-major, `W0` first.

use rand::Rng;

use crate::dense::Matrix;
use crate::error::{GltError, Result};
use crate::operator::{NormalizedOperator, OperatorKind};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams<T> {
    /// F×H input transform.
    pub w0: Matrix<T>,
    /// H×C output transform.
    pub w1: Matrix<T>,
}

impl<T: Scalar> GcnParams<T> {
    pub fn zeros(features: usize, hidden: usize, classes: usize) -> Self {
        Self {
            w0: Matrix::zeros(features, hidden),
            w1: Matrix::zeros(hidden, classes),
        }
    }

    /// Glorot-uniform weights: `U(−a, a)` with `a = √(6 / (fan_in + fan_out))`.
    pub fn glorot<R: Rng + ?Sized>(
        features: usize,
        hidden: usize,
        classes: usize,
        rng: &mut R,
    ) -> Self {
        let mut layer = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols).max(1) as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| T::lit(rng.random_range(-a..=a)))
        };
        let w0 = layer(features, hidden);
        let w1 = layer(hidden, classes);
        Self { w0, w1 }
    }

    /// `(F, H, C)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.w0.rows(), self.w0.cols(), self.w1.cols())
    }

    /// `d = F·H + H·C`.
    pub fn num_params(&self) -> usize {
        self.w0.as_slice().len() + self.w1.as_slice().len()
    }

    pub fn flatten(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend_from_slice(self.w0.as_slice());
        v.extend_from_slice(self.w1.as_slice());
        v
    }

    pub fn from_flat(features: usize, hidden: usize, classes: usize, theta: &[T]) -> Result<Self> {
        let split = features * hidden;
        if theta.len() != split + hidden * classes {
            return Err(GltError::DimensionMismatch(format!(
                "{} parameters for F={features} H={hidden} C={classes}",
                theta.len()
            )));
        }
        Ok(Self {
            w0: Matrix::from_vec(features, hidden, theta[..split].to_vec())?,
            w1: Matrix::from_vec(hidden, classes, theta[split..].to_vec())?,
        })
    }

    /// Overwrites the weights from a flat vector of the same layout.
    pub fn assign_flat(&mut self, theta: &[T]) -> Result<()> {
        let split = self.w0.as_slice().len();
        if theta.len() != self.num_params() {
            return Err(GltError::DimensionMismatch(format!(
                "{} parameters, expected {}",
                theta.len(),
                self.num_params()
            )));
        }
        self.w0.as_mut_slice().copy_from_slice(&theta[..split]);
        self.w1.as_mut_slice().copy_from_slice(&theta[split..]);
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.w0
            .as_slice()
            .iter()
            .chain(self.w1.as_slice())
            .filter(|x| **x != T::zero())
            .count()
    }

    /// Nonzero pattern in flattened order.
    pub fn support(&self) -> Vec<bool> {
        self.w0
            .as_slice()
            .iter()
            .chain(self.w1.as_slice())
            .map(|x| *x != T::zero())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite() && self.w1.is_finite()
    }

    /// Order-sensitive fingerprint of the exact weight bits.
    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in self.w0.as_slice().iter().chain(self.w1.as_slice()) {
            h ^= x.as_f64().to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Operator and features the network is evaluated on.
#[derive(Debug, Clone, Copy)]
pub struct GcnInput<'a, T> {
    pub operator: &'a NormalizedOperator<T>,
    pub features: &'a CsrMatrix<T>,
}

impl<'a, T: Scalar> GcnInput<'a, T> {
    pub fn new(operator: &'a NormalizedOperator<T>, features: &'a CsrMatrix<T>) -> Result<Self> {
        if operator.kind() != OperatorKind::SymmetricSelfLoop {
            return Err(GltError::DimensionMismatch(format!(
                "GCN propagation needs the symmetric self-loop operator, got {:?}",
                operator.kind()
            )));
        }
        if operator.dim() != features.nrows() {
            return Err(GltError::DimensionMismatch(format!(
                "operator over {} nodes, features for {}",
                operator.dim(),
                features.nrows()
            )));
        }
        Ok(Self { operator, features })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.nrows()
    }
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T> {
    /// `Â·X·W0` (N×H).
    pub pre_activation: Matrix<T>,
    /// `ReLU(pre_activation)` (N×H).
    pub hidden: Matrix<T>,
    /// `Â·hidden·W1` (N×C).
    pub logits: Matrix<T>,
    params_fingerprint: u64,
}

pub fn gcn_forward<T: Scalar>(
    input: &GcnInput<'_, T>,
    params: &GcnParams<T>,
) -> Result<ForwardTrace<T>> {
    let (f, _, _) = params.dims();
    if input.features.ncols() != f {
        return Err(GltError::DimensionMismatch(format!(
            "features have width {}, W0 expects {f}",
            input.features.ncols()
        )));
    }
    let adj = input.operator.matrix();
    let xw = input.features.matmul_dense(&params.w0)?;
    let pre_activation = adj.matmul_dense(&xw)?;
    let hidden = pre_activation.map(|x| x.max(T::zero()));
    let hw = hidden.matmul(&params.w1)?;
    let logits = adj.matmul_dense(&hw)?;
    Ok(ForwardTrace {
        pre_activation,
        hidden,
        logits,
        params_fingerprint: params.fingerprint(),
    })
}

fn log_softmax_row<T: Scalar>(row: &[T], inv_tau: T, out: &mut [T]) {
    let max = row
        .iter()
        .fold(T::neg_infinity(), |m, &x| m.max(x * inv_tau));
    let lse = row
        .iter()
        .map(|&x| (x * inv_tau - max).exp())
        .sum::<T>()
        .ln()
        + max;
    for (o, &x) in out.iter_mut().zip(row) {
        *o = x * inv_tau - lse;
    }
}

fn check_labels<T: Scalar>(z: &Matrix<T>, labels: &[usize], mask: &[bool]) -> Result<usize> {
    if labels.len() != z.rows() || mask.len() != z.rows() {
        return Err(GltError::DimensionMismatch(format!(
            "{} logit rows, {} labels, mask of {}",
            z.rows(),
            labels.len(),
            mask.len()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(GltError::EmptyMask(
            "cross-entropy needs at least one labelled node",
        ));
    }
    if let Some(&y) = labels
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(y, _)| y)
        .find(|&&y| y >= z.cols())
    {
        return Err(GltError::DimensionMismatch(format!(
            "label {y} with {} classes",
            z.cols()
        )));
    }
    Ok(count)
}

/// Mean over masked nodes of `−log softmax(Z)[y]`.
pub fn cross_entropy<T: Scalar>(z: &Matrix<T>, labels: &[usize], mask: &[bool]) -> Result<T> {
    let count = check_labels(z, labels, mask)?;
    let mut buf = vec![T::zero(); z.cols()];
    let mut total = T::zero();
    for i in (0..z.rows()).filter(|&i| mask[i]) {
        log_softmax_row(z.row(i), T::one(), &mut buf);
        total -= buf[labels[i]];
    }
    Ok(total / T::from_count(count))
}

fn check_teacher<T: Scalar>(z: &Matrix<T>, teacher: &Matrix<T>, tau: T) -> Result<()> {
    if z.rows() != teacher.rows() || z.cols() != teacher.cols() {
        return Err(GltError::DimensionMismatch(format!(
            "student logits {}x{}, teacher {}x{}",
            z.rows(),
            z.cols(),
            teacher.rows(),
            teacher.cols()
        )));
    }
    if tau.is_nan() || tau <= T::zero() {
        return Err(GltError::config("tau", "temperature must be positive"));
    }
    Ok(())
}

/// Mean over all nodes of `KL(softmax(Z/τ) ‖ softmax(Z_dense/τ))`, student first.
pub fn distill_kl<T: Scalar>(z: &Matrix<T>, teacher: &Matrix<T>, tau: T) -> Result<T> {
    check_teacher(z, teacher, tau)?;
    if z.rows() == 0 {
        return Ok(T::zero());
    }
    let inv_tau = T::one() / tau;
    let c = z.cols();
    let (mut lp, mut lq) = (vec![T::zero(); c], vec![T::zero(); c]);
    let mut total = T::zero();
    for i in 0..z.rows() {
        log_softmax_row(z.row(i), inv_tau, &mut lp);
        log_softmax_row(teacher.row(i), inv_tau, &mut lq);
        total += lp
            .iter()
            .zip(&lq)
            .map(|(&a, &b)| a.exp() * (a - b))
            .sum::<T>();
    }
    Ok(total / T::from_count(z.rows()))
}

/// Components of `L_dt = CE + λ_dt · KL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue<T> {
    pub total: T,
    pub ce_part: T,
    pub kl_part: T,
}

/// Distillation target: frozen teacher logits, weight and temperature.
#[derive(Debug, Clone, Copy)]
pub struct Distillation<'a, T> {
    pub teacher_logits: &'a Matrix<T>,
    pub lambda_dt: T,
    pub tau: T,
}

/// `L_dt` evaluated on logits; the KL term is 0 without a teacher.
pub fn loss_value<T: Scalar>(
    z: &Matrix<T>,
    labels: &[usize],
    mask: &[bool],
    distill: Option<&Distillation<'_, T>>,
) -> Result<LossValue<T>> {
    let ce_part = cross_entropy(z, labels, mask)?;
    let (kl_part, lambda) = match distill {
        Some(d) => (distill_kl(z, d.teacher_logits, d.tau)?, d.lambda_dt),
        None => (T::zero(), T::zero()),
    };
    Ok(LossValue {
        total: ce_part + lambda * kl_part,
        ce_part,
        kl_part,
    })
}

/// `∂L_dt/∂Z`. The teacher logits are constants.
pub fn logits_gradient<T: Scalar>(
    z: &Matrix<T>,
    labels: &[usize],
    mask: &[bool],
    distill: Option<&Distillation<'_, T>>,
) -> Result<Matrix<T>> {
    let count = check_labels(z, labels, mask)?;
    let (n, c) = (z.rows(), z.cols());
    let mut grad = Matrix::zeros(n, c);
    let mut buf = vec![T::zero(); c];
    let inv_count = T::one() / T::from_count(count);
    for i in (0..n).filter(|&i| mask[i]) {
        log_softmax_row(z.row(i), T::one(), &mut buf);
        let row = grad.row_mut(i);
        for k in 0..c {
            row[k] = buf[k].exp() * inv_count;
        }
        row[labels[i]] -= inv_count;
    }
    if let Some(d) = distill {
        check_teacher(z, d.teacher_logits, d.tau)?;
        let inv_tau = T::one() / d.tau;
        let scale = d.lambda_dt * inv_tau / T::from_count(n);
        let mut lq = vec![T::zero(); c];
        for i in 0..n {
            log_softmax_row(z.row(i), inv_tau, &mut buf);
            log_softmax_row(d.teacher_logits.row(i), inv_tau, &mut lq);
            let kl_i: T = buf.iter().zip(&lq).map(|(&a, &b)| a.exp() * (a - b)).sum();
            let row = grad.row_mut(i);
            for k in 0..c {
                // ∂KL_i/∂(z_k/τ) = p_k (log p_k − log q_k − KL_i)
                row[k] += scale * buf[k].exp() * (buf[k] - lq[k] - kl_i);
            }
        }
    }
    Ok(grad)
}

/// Exact gradient of `L_dt` with respect to `(W0, W1)`, plus the loss value.
/// Fails if `trace` was not produced from `params`.
pub fn gcn_backward<T: Scalar>(
    input: &GcnInput<'_, T>,
    params: &GcnParams<T>,
    trace: &ForwardTrace<T>,
    labels: &[usize],
    mask: &[bool],
    distill: Option<&Distillation<'_, T>>,
) -> Result<(LossValue<T>, GcnParams<T>)> {
    if trace.params_fingerprint != params.fingerprint() {
        return Err(GltError::StaleTrace(
            "parameters changed since the forward pass",
        ));
    }
    let loss = loss_value(&trace.logits, labels, mask, distill)?;
    let dz = logits_gradient(&trace.logits, labels, mask, distill)?;
    let adj = input.operator.matrix();
    // Z = Â (H1 W1)
    let d_hw = adj.t_matmul_dense(&dz)?;
    let w1 = trace.hidden.t_matmul(&d_hw)?;
    let mut d_pre = d_hw.matmul_t(&params.w1)?;
    // H1 = ReLU(P1)
    for (g, &p) in d_pre
        .as_mut_slice()
        .iter_mut()
        .zip(trace.pre_activation.as_slice())
    {
        if p <= T::zero() {
            *g = T::zero();
        }
    }
    // P1 = Â (X W0)
    let d_xw = adj.t_matmul_dense(&d_pre)?;
    let w0 = input.features.t_matmul_dense(&d_xw)?;
    Ok((loss, GcnParams { w0, w1 }))
}

/// Fraction of masked nodes whose argmax logit (lowest index on ties) equals the label.
pub fn accuracy<T: Scalar>(z: &Matrix<T>, labels: &[usize], mask: &[bool]) -> f64 {
    let mut hit = 0usize;
    let mut total = 0usize;
    for i in (0..z.rows()).filter(|&i| mask[i]) {
        let row = z.row(i);
        let mut best = 0;
        for k in 1..row.len() {
            if row[k] > row[best] {
                best = k;
            }
        }
        hit += (best == labels[i]) as usize;
        total += 1;
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}
