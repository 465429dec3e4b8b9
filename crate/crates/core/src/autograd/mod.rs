//! Reverse-mode differentiation, the L1 objective, Adam and the training loop.

mod adam;
mod loss;
mod schedule;
mod tape;
mod train;

pub use adam::{adam_step, AdamState};
pub use loss::l1_loss;
pub use schedule::{lr_at, LrSchedule};
pub(crate) use tape::missing_param;
pub use tape::{Gradients, Tape, Var};
pub use train::{train_loop, TrainConfig, TrainEvent, TrainOutcome};
