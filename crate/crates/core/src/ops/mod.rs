//! Forward numeric kernels over [`Tensor`](crate::Tensor).

mod conv;
mod elementwise;
mod pool;
mod resize;
mod shuffle;

pub(crate) use conv::{conv2d_backward, conv2d_raw, ConvGrads};
pub use conv::{conv2d, conv2d_naive, ConvWeights};
pub use elementwise::{add, concat_channels, leaky_relu, scale_channels, sigmoid};
pub use pool::{channel_stats_pool, contrast_pool, ChannelStats};
pub use resize::{bicubic_resize, cubic, resize_weights, ResizeFactor, Taps};
pub use shuffle::{pixel_shuffle, pixel_unshuffle};

/// Negative slope of every leaky rectifier in the network.
pub const LEAKY_SLOPE: f64 = 0.05;
