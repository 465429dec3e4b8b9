//! Separable bicubic resampling with optional antialiasing on downscale.
//!
//! Source coordinates follow the half-pixel-centre mapping
//! `u = (i + 1)/s + ½(1 − 1/s)` (1-based), the Keys kernel uses `a = −½`,
//! and taps that fall outside the image are clamped to the nearest edge.

use alloc::vec::Vec;

use crate::error::{config_err, Result};
use crate::{Scalar, Shape, Tensor};

/// A positive rational resize factor `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResizeFactor {
    num: usize,
    den: usize,
}

impl ResizeFactor {
    pub fn new(num: usize, den: usize) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(config_err!("resize factor must be positive, got {num}/{den}"));
        }
        Ok(Self { num, den })
    }

    /// Integer upscale `×s`.
    pub fn up(s: usize) -> Result<Self> {
        Self::new(s, 1)
    }

    /// Integer downscale `×1/s`.
    pub fn down(s: usize) -> Result<Self> {
        Self::new(1, s)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `ceil(len · num / den)`.
    pub fn apply(&self, len: usize) -> usize {
        (len * self.num).div_ceil(self.den)
    }
}

/// Keys cubic convolution kernel with `a = −0.5`.
pub fn cubic(x: f64) -> f64 {
    let ax = x.abs();
    let ax2 = ax * ax;
    let ax3 = ax2 * ax;
    if ax <= 1.0 {
        1.5 * ax3 - 2.5 * ax2 + 1.0
    } else if ax <= 2.0 {
        -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0
    } else {
        0.0
    }
}

/// Input taps contributing to one output sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Taps {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Normalized interpolation taps for every output position along one axis.
pub fn resize_weights(in_len: usize, out_len: usize, scale: f64, antialias: bool) -> Vec<Taps> {
    let shrink = antialias && scale < 1.0;
    let kernel_width = if shrink { 4.0 / scale } else { 4.0 };
    let kernel = |x: f64| if shrink { scale * cubic(scale * x) } else { cubic(x) };
    let span = kernel_width.ceil() as isize + 2;
    (0..out_len)
        .map(|i| {
            let u = (i + 1) as f64 / scale + 0.5 * (1.0 - 1.0 / scale);
            let left = (u - kernel_width / 2.0).floor() as isize;
            let mut indices = Vec::with_capacity(span as usize);
            let mut weights = Vec::with_capacity(span as usize);
            for j in 0..span {
                let idx = left + j;
                let w = kernel(u - idx as f64);
                if w == 0.0 {
                    continue;
                }
                indices.push((idx - 1).clamp(0, in_len as isize - 1) as usize);
                weights.push(w);
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Taps { indices, weights }
        })
        .collect()
}

/// Resizes every plane of `img` by `factor`, height first and then width.
pub fn bicubic_resize<T: Scalar>(img: &Tensor<T>, factor: ResizeFactor, antialias: bool) -> Result<Tensor<T>> {
    let s = img.shape();
    if s.h == 0 || s.w == 0 {
        return Err(config_err!("cannot resize empty image {s}"));
    }
    let (oh, ow) = (factor.apply(s.h), factor.apply(s.w));
    let rows = resize_weights(s.h, oh, factor.value(), antialias);
    let cols = resize_weights(s.w, ow, factor.value(), antialias);
    let mut out = Tensor::zeros(Shape::new(s.n, s.c, oh, ow));
    let mut mid = alloc::vec![0.0f64; oh * s.w];
    for n in 0..s.n {
        for c in 0..s.c {
            let src = img.plane(n, c);
            for (y, taps) in rows.iter().enumerate() {
                let line = &mut mid[y * s.w..(y + 1) * s.w];
                line.fill(0.0);
                for (&iy, &wt) in taps.indices.iter().zip(&taps.weights) {
                    for (acc, &v) in line.iter_mut().zip(&src[iy * s.w..(iy + 1) * s.w]) {
                        *acc += wt * v.as_f64();
                    }
                }
            }
            let dst = out.plane_mut(n, c);
            for y in 0..oh {
                let line = &mid[y * s.w..(y + 1) * s.w];
                for (x, taps) in cols.iter().enumerate() {
                    let v: f64 = taps.indices.iter().zip(&taps.weights).map(|(&ix, &wt)| wt * line[ix]).sum();
                    dst[y * ow + x] = T::of(v);
                }
            }
        }
    }
    Ok(out)
}
