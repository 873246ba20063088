//! One-shot ticket search: dense pretraining, a single edge-pruning pass,
//! and sparse training by projected gradient descent onto the ℓ0 ball with
//! distillation from the dense teacher.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::Matrix;
use crate::error::{GltError, Result};
use crate::gcn::{
    accuracy, gcn_backward, gcn_forward, Distillation, GcnInput, GcnParams, LossValue,
};
use crate::graph::Graph;
use crate::operator::{NormalizedOperator, OperatorKind};
use crate::optim::{Optimizer, OptimizerKind};
use crate::scalar::{robust_ceil, Scalar};
use crate::scoring::{prune_edges, EdgeMask, EdgeScorer, ScorerKind};

/// Pipeline hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub weight_decay: f64,
    pub epochs: usize,
    pub lambda_dt: f64,
    pub tau: f64,
    pub p_g: f64,
    pub p_theta: f64,
    pub seed: u64,
    pub hidden: usize,
    pub eval_every: usize,
    /// Start the sparse student from the teacher's weights instead of a fresh draw.
    pub warm_start: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            optimizer: OptimizerKind::default(),
            weight_decay: 5e-4,
            epochs: 200,
            lambda_dt: 1.0,
            tau: 1.0,
            p_g: 0.0,
            p_theta: 0.0,
            seed: 0,
            hidden: 128,
            eval_every: 1,
            warm_start: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(GltError::config(name, format!("{v} not in [0, 1)")))
            }
        };
        unit("p_g", self.p_g)?;
        unit("p_theta", self.p_theta)?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(GltError::config(
                "lr",
                format!("{} must be positive", self.lr),
            ));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(GltError::config("weight_decay", "must be non-negative"));
        }
        if !(self.lambda_dt >= 0.0 && self.lambda_dt.is_finite()) {
            return Err(GltError::config("lambda_dt", "must be non-negative"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(GltError::config("tau", "must be positive"));
        }
        if self.hidden == 0 {
            return Err(GltError::config("hidden", "must be at least 1"));
        }
        if self.eval_every == 0 {
            return Err(GltError::config("eval_every", "must be at least 1"));
        }
        if let OptimizerKind::Adam { beta1, beta2, eps } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) {
                return Err(GltError::config("beta1", "must be in [0, 1)"));
            }
            if !(0.0..1.0).contains(&beta2) {
                return Err(GltError::config("beta2", "must be in [0, 1)"));
            }
            if eps.is_nan() || eps <= 0.0 {
                return Err(GltError::config("eps", "must be positive"));
            }
        }
        Ok(())
    }

    /// Same config with `p_g = p_θ = sparsity_target(k)`.
    pub fn at_simulation(mut self, k: u32) -> Self {
        let p = sparsity_target(k, DEFAULT_PER_ROUND);
        self.p_g = p;
        self.p_theta = p;
        self
    }
}

/// Per-simulation pruning ratio of the iterative baselines.
pub const DEFAULT_PER_ROUND: f64 = 0.05;

/// Sparsity reached after `k` rounds that each remove `per_round` of what remains:
/// `1 − (1 − per_round)^k`.
pub fn sparsity_target(k: u32, per_round: f64) -> f64 {
    1.0 - (1.0 - per_round).powi(k as i32)
}

/// Number of weights kept at sparsity `p_θ`: `⌈(1 − p_θ)·d⌉`.
pub fn kept_param_count(p_theta: f64, d: usize) -> usize {
    robust_ceil((1.0 - p_theta) * d as f64).min(d)
}

/// Euclidean projection onto `{‖θ‖₀ ≤ h}`: keeps the `h` largest magnitudes
/// (ties by ascending index) and zeroes the rest.
pub fn project_l0<T: Scalar>(theta: &[T], h: usize) -> Vec<T> {
    let mut out = theta.to_vec();
    project_l0_in_place(&mut out, h);
    out
}

pub fn project_l0_in_place<T: Scalar>(theta: &mut [T], h: usize) {
    let d = theta.len();
    if h >= d {
        return;
    }
    if h == 0 {
        theta.iter_mut().for_each(|x| *x = T::zero());
        return;
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.select_nth_unstable_by(h - 1, |&a, &b| {
        theta[b]
            .abs()
            .partial_cmp(&theta[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for &i in &order[h..] {
        theta[i] = T::zero();
    }
}

/// Per-epoch training record passed to observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats<T> {
    pub epoch: usize,
    pub loss: LossValue<T>,
    pub nnz: usize,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct TrainOutcome<T> {
    params: GcnParams<T>,
    logits: Matrix<T>,
    epoch: usize,
    val_acc: f64,
}

struct TrainSpec<'a, T> {
    input: GcnInput<'a, T>,
    labels: &'a [usize],
    train_mask: &'a [bool],
    val_mask: &'a [bool],
    distill: Option<Distillation<'a, T>>,
    keep: Option<usize>,
}

/// Shared loop: `θ ← proj(θ − step(∇L))` per epoch, keeping the best-validation iterate
/// (earliest on ties). With zero epochs the (projected) initialization is returned.
fn train_loop<T: Scalar>(
    spec: &TrainSpec<'_, T>,
    mut params: GcnParams<T>,
    cfg: &RunConfig,
    observer: &mut dyn FnMut(&EpochStats<T>),
) -> Result<TrainOutcome<T>> {
    let (f, h, c) = params.dims();
    let mut theta = params.flatten();
    if let Some(keep) = spec.keep {
        project_l0_in_place(&mut theta, keep);
        params = GcnParams::from_flat(f, h, c, &theta)?;
    }
    let mut opt = Optimizer::<T>::new(cfg.optimizer, cfg.lr, cfg.weight_decay, theta.len());
    let mut trace = gcn_forward(&spec.input, &params)?;
    let mut best: Option<TrainOutcome<T>> = None;

    for epoch in 1..=cfg.epochs {
        let (loss, grad) = gcn_backward(
            &spec.input,
            &params,
            &trace,
            spec.labels,
            spec.train_mask,
            spec.distill.as_ref(),
        )?;
        opt.step(&mut theta, &grad.flatten());
        if let Some(keep) = spec.keep {
            project_l0_in_place(&mut theta, keep);
        }
        params.assign_flat(&theta)?;
        trace = gcn_forward(&spec.input, &params)?;

        let evaluate = epoch % cfg.eval_every == 0 || epoch == cfg.epochs;
        let val_acc = evaluate.then(|| accuracy(&trace.logits, spec.labels, spec.val_mask));
        let nnz = params.nnz();
        observer(&EpochStats {
            epoch,
            loss,
            nnz,
            val_acc,
        });
        if let Some(acc) = val_acc {
            if best.as_ref().is_none_or(|b| acc > b.val_acc) {
                best = Some(TrainOutcome {
                    params: params.clone(),
                    logits: trace.logits.clone(),
                    epoch,
                    val_acc: acc,
                });
            }
        }
    }
    Ok(best.unwrap_or_else(|| TrainOutcome {
        val_acc: accuracy(&trace.logits, spec.labels, spec.val_mask),
        logits: trace.logits,
        params,
        epoch: 0,
    }))
}

fn init_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const TEACHER_STREAM: u64 = 1;
const STUDENT_STREAM: u64 = 2;

/// Dense teacher: best-validation checkpoint and its full-graph logits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseModel<T> {
    pub params: GcnParams<T>,
    pub logits: Matrix<T>,
    pub best_epoch: usize,
    pub val_acc: f64,
    pub test_acc: f64,
}

pub fn pretrain_dense<T: Scalar>(g: &Graph<T>, cfg: &RunConfig) -> Result<DenseModel<T>> {
    pretrain_dense_observed(g, cfg, &mut |_| {})
}

pub fn pretrain_dense_observed<T: Scalar>(
    g: &Graph<T>,
    cfg: &RunConfig,
    observer: &mut dyn FnMut(&EpochStats<T>),
) -> Result<DenseModel<T>> {
    cfg.validate()?;
    let op = NormalizedOperator::<T>::new(g, OperatorKind::SymmetricSelfLoop);
    let spec = TrainSpec {
        input: GcnInput::new(&op, g.features())?,
        labels: g.labels(),
        train_mask: &g.splits().train,
        val_mask: &g.splits().val,
        distill: None,
        keep: None,
    };
    let init = GcnParams::glorot(
        g.num_features(),
        cfg.hidden,
        g.num_classes(),
        &mut init_rng(cfg.seed, TEACHER_STREAM),
    );
    let out = train_loop(&spec, init, cfg, observer)?;
    Ok(DenseModel {
        test_acc: accuracy(&out.logits, g.labels(), &g.splits().test),
        params: out.params,
        logits: out.logits,
        best_epoch: out.epoch,
        val_acc: out.val_acc,
    })
}

/// Graph lottery ticket: pruned edges plus a sparse subnetwork trained on them.
#[derive(Debug, Clone, PartialEq)]
pub struct LotteryTicket<T> {
    pub edge_mask: EdgeMask,
    /// Support of `sparse_params`, flattened `(W0, W1)` order.
    pub param_mask: Vec<bool>,
    pub sparse_params: GcnParams<T>,
    /// Achieved graph sparsity `⌈p_g·M⌉ / M`.
    pub graph_sparsity: f64,
    /// Achieved weight sparsity `1 − nnz/d`.
    pub weight_sparsity: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub best_epoch: usize,
}

/// Sparse training on the pruned graph with `L_dt = CE + λ_dt·KL(student ‖ teacher)`.
pub fn train_sparse<T: Scalar>(
    pruned: &Graph<T>,
    edge_mask: EdgeMask,
    teacher_logits: &Matrix<T>,
    cfg: &RunConfig,
    warm_start: Option<&GcnParams<T>>,
) -> Result<LotteryTicket<T>> {
    train_sparse_observed(
        pruned,
        edge_mask,
        teacher_logits,
        cfg,
        warm_start,
        &mut |_| {},
    )
}

pub fn train_sparse_observed<T: Scalar>(
    pruned: &Graph<T>,
    edge_mask: EdgeMask,
    teacher_logits: &Matrix<T>,
    cfg: &RunConfig,
    warm_start: Option<&GcnParams<T>>,
    observer: &mut dyn FnMut(&EpochStats<T>),
) -> Result<LotteryTicket<T>> {
    cfg.validate()?;
    let (f, hdim, c) = (pruned.num_features(), cfg.hidden, pruned.num_classes());
    let init = match warm_start {
        Some(p) => {
            if p.dims() != (f, hdim, c) {
                return Err(GltError::DimensionMismatch(format!(
                    "warm-start weights {:?}, expected {:?}",
                    p.dims(),
                    (f, hdim, c)
                )));
            }
            p.clone()
        }
        None => GcnParams::glorot(f, hdim, c, &mut init_rng(cfg.seed, STUDENT_STREAM)),
    };
    let d = init.num_params();
    let keep = kept_param_count(cfg.p_theta, d);
    let op = NormalizedOperator::<T>::new(pruned, OperatorKind::SymmetricSelfLoop);
    let spec = TrainSpec {
        input: GcnInput::new(&op, pruned.features())?,
        labels: pruned.labels(),
        train_mask: &pruned.splits().train,
        val_mask: &pruned.splits().val,
        distill: Some(Distillation {
            teacher_logits,
            lambda_dt: T::lit(cfg.lambda_dt),
            tau: T::lit(cfg.tau),
        }),
        keep: Some(keep),
    };
    let out = train_loop(&spec, init, cfg, observer)?;
    let param_mask = out.params.support();
    let nnz = param_mask.iter().filter(|&&k| k).count();
    Ok(LotteryTicket {
        graph_sparsity: edge_mask.graph_sparsity,
        edge_mask,
        weight_sparsity: if d == 0 {
            0.0
        } else {
            1.0 - nnz as f64 / d as f64
        },
        param_mask,
        test_acc: accuracy(&out.logits, pruned.labels(), &pruned.splits().test),
        val_acc: out.val_acc,
        best_epoch: out.epoch,
        sparse_params: out.params,
    })
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TicketRun<T> {
    pub scorer: ScorerKind,
    pub teacher: DenseModel<T>,
    pub ticket: LotteryTicket<T>,
    pub pruned_graph: Graph<T>,
    /// Mean edge degree (original graph) of the removed edges; 0 when none were removed.
    pub mean_pruned_edge_degree: f64,
}

/// Pretrain → score once → prune → sparse training, with any edge scorer.
pub fn run_pipeline<T: Scalar, S: EdgeScorer>(
    g: &Graph<T>,
    cfg: &RunConfig,
    scorer: &S,
) -> Result<TicketRun<T>> {
    cfg.validate()?;
    let teacher = pretrain_dense(g, cfg)?;
    ticket_from_teacher(g, cfg, scorer, teacher)
}

/// The post-pretraining half of [`run_pipeline`]. `teacher` must come from
/// [`pretrain_dense`] on `g`; sweeps reuse one teacher across scorers and sparsities.
pub fn ticket_from_teacher<T: Scalar, S: EdgeScorer>(
    g: &Graph<T>,
    cfg: &RunConfig,
    scorer: &S,
    teacher: DenseModel<T>,
) -> Result<TicketRun<T>> {
    cfg.validate()?;
    if teacher.logits.rows() != g.num_nodes() || teacher.logits.cols() != g.num_classes() {
        return Err(GltError::DimensionMismatch(format!(
            "teacher logits {}x{} for a graph with {} nodes and {} classes",
            teacher.logits.rows(),
            teacher.logits.cols(),
            g.num_nodes(),
            g.num_classes()
        )));
    }
    let table = scorer.score(g);
    let (pruned, mask) = prune_edges(g, &table, cfg.p_g)?;
    let mean_pruned_edge_degree = mask.mean_pruned_edge_degree(g);
    let warm = cfg.warm_start.then_some(&teacher.params);
    let ticket = train_sparse(&pruned, mask, &teacher.logits, cfg, warm)?;
    Ok(TicketRun {
        scorer: scorer.kind(),
        teacher,
        ticket,
        pruned_graph: pruned,
        mean_pruned_edge_degree,
    })
}

/// The degree-based pipeline with TEDDY edge scores.
pub fn run_teddy<T: Scalar>(g: &Graph<T>, cfg: &RunConfig) -> Result<TicketRun<T>> {
    run_pipeline(g, cfg, &ScorerKind::Teddy)
}
