use num_traits::Float;

/// Step-decay learning rate: `initial · 2^(−⌊step / half_life⌋)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrSchedule {
    pub initial: f64,
    /// Minibatch updates between halvings.
    pub half_life: u64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self { initial: 5e-4, half_life: 200_000 }
    }
}

impl LrSchedule {
    pub fn lr_at(&self, step: u64) -> f64 {
        let halvings = step / self.half_life.max(1);
        // Past ~1000 halvings the power underflows; keep the rate strictly positive.
        let halvings = halvings.min(1000) as i32;
        (self.initial * Float::powi(0.5f64, halvings)).max(f64::MIN_POSITIVE)
    }
}

/// Free-function form of [`LrSchedule::lr_at`].
pub fn lr_at(schedule: &LrSchedule, step: u64) -> f64 {
    schedule.lr_at(step)
}
