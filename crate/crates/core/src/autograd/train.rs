use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{adam_step, AdamState, LrSchedule, Tape};
use crate::arch::{Rfdn, WeightStore};
use crate::data::{sample_crops, AugmentMode, Augmentation, ImagePair};
use crate::error::{config_err, Result};
use crate::{Scalar, Tensor};

/// Minibatch training settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch: usize,
    /// Side of the low-resolution patch; HR patches are `scale` times larger.
    pub patch: usize,
    pub steps: u64,
    pub seed: u64,
    pub schedule: LrSchedule,
    /// Emit a checkpoint event every this many steps (0 disables).
    pub checkpoint_every: u64,
    pub augment: AugmentMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch: 64,
            patch: 64,
            steps: 1_000_000,
            seed: 0,
            schedule: LrSchedule::default(),
            checkpoint_every: 0,
            augment: AugmentMode::FlipRot90,
        }
    }
}

/// Progress notifications from [`train_loop`].
pub enum TrainEvent<'a, T: Scalar> {
    Step { step: u64, lr: f64, loss: f64 },
    Checkpoint { step: u64, weights: &'a WeightStore<T> },
}

pub struct TrainOutcome<T: Scalar = f32> {
    pub weights: WeightStore<T>,
    /// L1 loss of each step, in order.
    pub losses: Vec<f64>,
    pub optimizer: AdamState<T>,
}

/// Minimizes the mean L1 error between the network output and HR patches.
///
/// Runs are reproducible: patch positions, augmentations and therefore the
/// loss trace depend only on `config.seed` and the initial weights.
/// Pixel values are scaled from `[0, 255]` to `[0, 1]` before entering the network.
pub fn train_loop<T: Scalar>(
    model: &Rfdn,
    init: WeightStore<T>,
    pairs: &[ImagePair],
    config: &TrainConfig,
    mut on_event: impl FnMut(TrainEvent<'_, T>),
) -> Result<TrainOutcome<T>> {
    if pairs.is_empty() {
        return Err(config_err!("training set is empty"));
    }
    if let Some(p) = pairs.iter().find(|p| p.scale != model.config().scale) {
        return Err(config_err!("{} is a x{} pair, model upscales x{}", p.id, p.scale, model.config().scale));
    }
    model.check_weights(&init)?;
    let mut weights = init;
    let mut optimizer = AdamState::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut losses = Vec::with_capacity(config.steps.min(1 << 20) as usize);
    let to_unit = |t: &Tensor<f32>| t.cast::<T>().map(|v| v / T::of(255.0));

    for step in 1..=config.steps {
        let crops = sample_crops(pairs, config.patch, config.batch, &mut rng)?;
        let (mut lr_items, mut hr_items) = (Vec::with_capacity(crops.len()), Vec::with_capacity(crops.len()));
        for (lr, hr) in &crops {
            let aug = Augmentation::draw(&mut rng, config.augment);
            lr_items.push(to_unit(&aug.apply(lr)));
            hr_items.push(to_unit(&aug.apply(hr)));
        }
        let (lr_batch, hr_batch) = (Tensor::stack(&lr_items)?, Tensor::stack(&hr_items)?);

        let mut tape = Tape::with_params(&weights);
        let input = tape.leaf(lr_batch);
        let target = tape.leaf(hr_batch);
        let output = model.forward(&mut tape, &input)?;
        let loss_var = tape.l1_loss(output, target)?;
        let loss = tape.value(loss_var).data()[0].as_f64();
        let grads = tape.backward(loss_var)?.into_params();
        drop(tape);

        let lr = config.schedule.lr_at(step - 1);
        adam_step(&mut weights, &grads, &mut optimizer, lr)?;
        losses.push(loss);
        on_event(TrainEvent::Step { step, lr, loss });
        if config.checkpoint_every > 0 && step % config.checkpoint_every == 0 {
            on_event(TrainEvent::Checkpoint { step, weights: &weights });
        }
    }
    Ok(TrainOutcome { weights, losses, optimizer })
}
