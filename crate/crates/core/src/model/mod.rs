//! The NewtonNet predictor: a two-layer MLP followed by a learnable Newton
//! filter, trained on cross-entropy plus a homophily-aware shape penalty.

mod loss;
mod mlp;
mod newtonnet;
mod optim;
mod train;

pub use loss::{cross_entropy, shape_regularization, softmax, ShapeRegularization};
pub use mlp::MlpParams;
pub use newtonnet::{accuracy, forward, gradients, predict, total_loss, LossParts, NewtonNetParams, Problem};
pub use optim::{Adam, ParamSlot};

pub(crate) use loss::cross_entropy_with_grad;
pub use train::{learned_homophily, train, FilterInit, TrainConfig, TrainReport};
