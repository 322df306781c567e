//! Model function, loss, gradients and the gradient-descent training loop.

mod gradient;
mod model;
mod train;

pub use gradient::{
    gradient_adjoint, gradient_parameter_shift, loss_gradient, model_gradient, model_gradient_adjoint,
    model_gradient_shift, model_gradient_shift_full, sample_gradients, GradientMethod, SampleGradients,
};
pub use model::{generalization_error, initial_loss_bound, loss, loss_from_predictions, model_value, predictions};
pub use train::{
    resolve_eta, resolve_kappa, train, train_from, EtaRule, KappaRule, TraceRecord, TrainingConfig, TrainingTrace,
    ETA_FLOOR,
};
