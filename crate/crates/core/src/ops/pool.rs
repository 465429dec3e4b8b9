use crate::{Scalar, Shape, Tensor};

/// Per-`(n, c)` spatial statistics, each shaped `(n, c, 1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelStats<T = f32> {
    pub mean: Tensor<T>,
    /// Population standard deviation.
    pub std: Tensor<T>,
}

/// Spatial mean and population standard deviation of every channel.
///
/// Accumulates with Welford's update in `f64`.
pub fn channel_stats_pool<T: Scalar>(x: &Tensor<T>) -> ChannelStats<T> {
    let s = x.shape();
    let out = Shape::new(s.n, s.c, 1, 1);
    let mut mean = Tensor::zeros(out);
    let mut std = Tensor::zeros(out);
    for n in 0..s.n {
        for c in 0..s.c {
            let (mut m, mut m2) = (0.0f64, 0.0f64);
            for (i, &v) in x.plane(n, c).iter().enumerate() {
                let v = v.as_f64();
                let d = v - m;
                m += d / (i + 1) as f64;
                m2 += d * (v - m);
            }
            let var = (m2 / s.plane() as f64).max(0.0);
            *mean.at_mut(n, c, 0, 0) = T::of(m);
            *std.at_mut(n, c, 0, 0) = T::of(var.sqrt());
        }
    }
    ChannelStats { mean, std }
}

/// `mean + std` per channel: the contrast descriptor fed to channel attention.
pub fn contrast_pool<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let ChannelStats { mean, std } = channel_stats_pool(x);
    mean.zip_map(&std, |a, b| a + b).expect("stats share a shape")
}
