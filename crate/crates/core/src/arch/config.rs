use crate::error::{config_err, Result};

/// Hyper-parameters that fully determine a network's shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    /// Upscaling factor, one of 2, 3 or 4.
    pub scale: usize,
    /// Feature width of the trunk.
    pub channels: usize,
    /// Number of stacked distillation blocks.
    pub num_blocks: usize,
    /// Fraction of `channels` emitted by each distillation branch.
    pub distill_rate: f64,
}

impl ModelConfig {
    pub fn new(scale: usize, channels: usize, num_blocks: usize, distill_rate: f64) -> Result<Self> {
        let cfg = Self { scale, channels, num_blocks, distill_rate };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 48 channels, 6 blocks, rate 0.5.
    pub fn rfdn(scale: usize) -> Result<Self> {
        Self::new(scale, 48, 6, 0.5)
    }

    /// The wider 52-channel model.
    pub fn rfdn_l(scale: usize) -> Result<Self> {
        Self::new(scale, 52, 6, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.scale) {
            return Err(config_err!("scale must be 2, 3 or 4, got {}", self.scale));
        }
        if self.num_blocks == 0 {
            return Err(config_err!("at least one block is required"));
        }
        if !(self.distill_rate > 0.0 && self.distill_rate < 1.0) {
            return Err(config_err!("distillation rate must lie in (0, 1), got {}", self.distill_rate));
        }
        let d = self.distilled();
        if d == 0 || d >= self.channels {
            return Err(config_err!(
                "{} channels at rate {} give {d} distilled channels; need 1 ≤ d < channels",
                self.channels,
                self.distill_rate
            ));
        }
        Ok(())
    }

    /// `round(channels · distill_rate)`.
    pub fn distilled(&self) -> usize {
        (self.channels as f64 * self.distill_rate).round() as usize
    }

    /// Bottleneck width of the channel attention (`channels / 16`, at least 1).
    pub fn attention_width(&self) -> usize {
        (self.channels / 16).max(1)
    }

    /// Output channels of the reconstruction conv before the sub-pixel shuffle.
    pub fn recon_channels(&self) -> usize {
        3 * self.scale * self.scale
    }
}
