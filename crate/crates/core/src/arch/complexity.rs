//! Closed-form parameter and multiply-accumulate counts.
//!
//! Both work from [`LayerSpec`]s, so no weights are allocated. Mult-adds
//! count convolutions on feature maps only: attention convolutions act on
//! pooled `1×1` descriptors and, like pooling and elementwise ops, are left
//! out, which keeps the total exactly linear in the input pixel count.

use super::LayerSpec;

/// Kernel plus bias elements over all layers.
pub fn count_params(layers: &[LayerSpec]) -> usize {
    layers.iter().map(LayerSpec::num_params).sum()
}

/// Multiply-accumulates for one forward pass on an `lr_h × lr_w` input.
///
/// Every counted layer runs at input resolution (the sub-pixel shuffle is last).
pub fn count_mult_adds(layers: &[LayerSpec], lr_h: usize, lr_w: usize) -> u64 {
    layers.iter().filter(|l| !l.attention).map(|l| l.mult_adds(lr_h, lr_w)).sum()
}
