//! Degree-aware graph lottery tickets.
//!
//! Edge scoring from node degrees, one-shot edge pruning, a two-layer GCN
//! trained with ℓ0-projected gradient descent and distillation, Laplacian
//! spectral diagnostics, and the file formats that tie them together.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom fix the precision for callers that don't care.

pub mod bundle;
pub mod checkpoint;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod io;
pub mod macs;
pub mod operator;
pub mod optim;
pub mod pipeline;
pub mod scalar;
pub mod scoring;
pub mod sparse;
pub mod spectral;
pub mod stats;
pub mod synthetic;

pub use dense::Matrix;
pub use error::{GltError, Result};
pub use gcn::{GcnInput, GcnParams};
pub use graph::{Edge, Graph, Splits};
pub use operator::{NormalizedOperator, OperatorKind};
pub use optim::OptimizerKind;
pub use pipeline::{
    run_pipeline, run_teddy, ticket_from_teacher, DenseModel, LotteryTicket, RunConfig, TicketRun,
};
pub use scalar::Scalar;
pub use scoring::{EdgeMask, EdgeScoreTable, EdgeScorer, ScorerKind};
pub use sparse::CsrMatrix;

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type Params64 = GcnParams<f64>;
pub type Params32 = GcnParams<f32>;
pub type Ticket64 = LotteryTicket<f64>;
