use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{bias_name, weight_name, ModelConfig};
use crate::Shape;

/// Body block used in the trunk.
///
/// The four ablation blocks differ along two axes: whether the three
/// distillation branches are 1×1 convolutions (`FdcOnly`, `Rfdb`) or 3×3
/// (`Base`, `SrbOnly`), and whether the refinement convolutions carry an
/// identity shortcut (`SrbOnly`, `Rfdb`). `Base` is the decoupled form of
/// the progressive refinement block; `Imdb` is the coupled original, where
/// one 3×3 convolution per stage produces both the distilled and the coarse
/// features and they are separated by a channel split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockVariant {
    Base,
    SrbOnly,
    FdcOnly,
    Rfdb,
    Imdb,
}

impl BlockVariant {
    pub const ALL: [BlockVariant; 5] = [Self::Base, Self::SrbOnly, Self::FdcOnly, Self::Rfdb, Self::Imdb];

    /// Kernel size of the three distillation branches (`None` for the split-based block).
    pub fn distill_kernel(self) -> Option<usize> {
        match self {
            Self::Base | Self::SrbOnly => Some(3),
            Self::FdcOnly | Self::Rfdb => Some(1),
            Self::Imdb => None,
        }
    }

    /// Whether refinement convolutions are shallow residual blocks.
    pub fn residual_refine(self) -> bool {
        matches!(self, Self::SrbOnly | Self::Rfdb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Base => "base",
            Self::SrbOnly => "srb",
            Self::FdcOnly => "fdc",
            Self::Rfdb => "rfdb",
            Self::Imdb => "imdb",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

/// One convolution layer of a network, known from configuration alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: String,
    pub c_in: usize,
    pub c_out: usize,
    pub k: usize,
    /// Runs on pooled `1×1` descriptors rather than feature maps.
    pub attention: bool,
}

impl LayerSpec {
    fn conv(name: String, c_in: usize, c_out: usize, k: usize) -> Self {
        Self { name, c_in, c_out, k, attention: false }
    }

    pub fn num_params(&self) -> usize {
        self.c_in * self.c_out * self.k * self.k + self.c_out
    }

    /// Multiply-accumulates on an `h×w` feature map.
    pub fn mult_adds(&self, h: usize, w: usize) -> u64 {
        (self.c_in * self.c_out * self.k * self.k) as u64 * (h * w) as u64
    }

    pub fn kernel_shape(&self) -> Shape {
        Shape::new(self.c_out, self.c_in, self.k, self.k)
    }

    /// Names and shapes of the kernel and bias tensors.
    pub fn tensors(&self) -> [(String, Shape); 2] {
        [
            (weight_name(&self.name), self.kernel_shape()),
            (bias_name(&self.name), Shape::new(self.c_out, 1, 1, 1)),
        ]
    }
}

/// Layers of one body block named under `prefix`.
pub fn block_layers(variant: BlockVariant, channels: usize, distilled: usize, attention: usize, prefix: &str) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    match variant.distill_kernel() {
        Some(k) => {
            for j in 1..=3 {
                layers.push(LayerSpec::conv(format!("{prefix}.distill{j}"), channels, distilled, k));
                layers.push(LayerSpec::conv(format!("{prefix}.refine{j}"), channels, channels, 3));
            }
        }
        None => {
            for j in 1..=3 {
                layers.push(LayerSpec::conv(format!("{prefix}.split{j}"), channels, distilled + channels, 3));
            }
        }
    }
    layers.push(LayerSpec::conv(format!("{prefix}.tail"), channels, distilled, 3));
    layers.push(LayerSpec::conv(format!("{prefix}.fuse"), 4 * distilled, channels, 1));
    layers.push(LayerSpec { attention: true, ..LayerSpec::conv(format!("{prefix}.cca.down"), channels, attention, 1) });
    layers.push(LayerSpec { attention: true, ..LayerSpec::conv(format!("{prefix}.cca.up"), attention, channels, 1) });
    layers
}

/// Every layer of the full network in forward order.
pub fn model_layers(variant: BlockVariant, cfg: &ModelConfig) -> Vec<LayerSpec> {
    let c = cfg.channels;
    let mut layers = alloc::vec![LayerSpec::conv("head".into(), 3, c, 3)];
    for i in 0..cfg.num_blocks {
        layers.extend(block_layers(variant, c, cfg.distilled(), cfg.attention_width(), &block_prefix(i)));
    }
    layers.push(LayerSpec::conv("fuse1".into(), cfg.num_blocks * c, c, 1));
    layers.push(LayerSpec::conv("fuse3".into(), c, c, 3));
    layers.push(LayerSpec::conv("recon".into(), c, cfg.recon_channels(), 3));
    layers
}

pub fn block_prefix(i: usize) -> String {
    format!("block{i}")
}

