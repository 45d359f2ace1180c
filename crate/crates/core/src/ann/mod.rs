//! Feedforward network that grows while it trains.

mod adaptive;
mod growth;
mod network;
mod serialize;
mod train;

pub use adaptive::{adaptive_fit, frozen_phase, FitOutcome, FrozenUnit, GrowthPolicy, LogEvent, LogRow, TrainLog, TrainMode};
pub use growth::{deepen, growth_kind, widen, DeepenMode, GrowthKind, WidenMode, IDENTITY_NOISE_SCALE, NEW_PARAM_SCALE};
pub use network::{
    gradient_check, init_network, xavier_limit, Activation, DenseNetwork, ForwardCache, GradientCheck, Gradients, Layer, Scratch,
    INITIAL_HIDDEN_LAYERS, INITIAL_HIDDEN_WIDTH,
};
pub use serialize::{network_from_text, network_to_text, FORMAT_VERSION};
pub use train::{evaluate, mean_error, teacher_forced_error, train_epoch, EpochMetrics, SupervisedSeries};
