//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's numerical kernels; values are
//! computed with plain loops in f64.

#![allow(dead_code)]

use rand::Rng;
use rfdn_core::{Shape, Tensor};

/// Direct zero-padded cross-correlation, stride 1.
pub fn conv(x: &Tensor<f64>, kernel: &Tensor<f64>, bias: &[f64], pad: usize) -> Tensor<f64> {
    let xs = x.shape();
    let ks = kernel.shape();
    let (oh, ow) = (xs.h + 2 * pad - ks.h + 1, xs.w + 2 * pad - ks.w + 1);
    let mut out = Tensor::zeros(Shape::new(xs.n, ks.n, oh, ow));
    for n in 0..xs.n {
        for (o, &b) in bias.iter().enumerate().take(ks.n) {
            for y in 0..oh {
                for x0 in 0..ow {
                    let mut acc = b;
                    for i in 0..xs.c {
                        for dy in 0..ks.h {
                            for dx in 0..ks.w {
                                let sy = (y + dy) as isize - pad as isize;
                                let sx = (x0 + dx) as isize - pad as isize;
                                if sy < 0 || sx < 0 || sy >= xs.h as isize || sx >= xs.w as isize {
                                    continue;
                                }
                                acc += x.at(n, i, sy as usize, sx as usize) * kernel.at(o, i, dy, dx);
                            }
                        }
                    }
                    *out.at_mut(n, o, y, x0) = acc;
                }
            }
        }
    }
    out
}

/// Mean and population standard deviation of every plane, two passes.
pub fn plane_stats(x: &Tensor<f64>) -> Vec<(f64, f64)> {
    let s = x.shape();
    let mut out = Vec::new();
    for n in 0..s.n {
        for c in 0..s.c {
            let p = x.plane(n, c);
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            let var = p.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / p.len() as f64;
            out.push((mean, var.sqrt()));
        }
    }
    out
}

/// Keys cubic convolution kernel with `a = −0.5`.
pub fn keys(x: f64) -> f64 {
    let a = -0.5;
    let t = x.abs();
    if t <= 1.0 {
        (a + 2.0) * t.powi(3) - (a + 3.0) * t.powi(2) + 1.0
    } else if t < 2.0 {
        a * t.powi(3) - 5.0 * a * t.powi(2) + 8.0 * a * t - 4.0 * a
    } else {
        0.0
    }
}

/// One output sample of a 1-D antialiased bicubic resample, by direct
/// summation over every input position (clamped at the borders).
pub fn resample_1d(src: &[f64], scale: f64, out_index: usize) -> f64 {
    let stretch = if scale < 1.0 { scale } else { 1.0 };
    let u = (out_index as f64 + 1.0) / scale + 0.5 * (1.0 - 1.0 / scale);
    let half = 2.0 / stretch;
    let first = (u - half).floor() as isize - 1;
    let last = (u + half).ceil() as isize + 1;
    let (mut acc, mut total) = (0.0, 0.0);
    for j in first..=last {
        let w = stretch * keys(stretch * (u - j as f64));
        let idx = (j - 1).clamp(0, src.len() as isize - 1) as usize;
        acc += w * src[idx];
        total += w;
    }
    acc / total
}

/// Gaussian-windowed SSIM computed window by window (11×11, σ = 1.5, valid region).
pub fn ssim(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    let mut g = [[0.0; 11]; 11];
    let mut total = 0.0;
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let c1 = (0.01 * 255.0f64).powi(2);
    let c2 = (0.03 * 255.0f64).powi(2);
    let mut sum = 0.0;
    let mut count = 0;
    for y in 0..=h - 11 {
        for x in 0..=w - 11 {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let wt = g[i][j] / total;
                    let (va, vb) = (a[(y + i) * w + x + j], b[(y + i) * w + x + j]);
                    ma += wt * va;
                    mb += wt * vb;
                    saa += wt * va * va;
                    sbb += wt * vb * vb;
                    sab += wt * va * vb;
                }
            }
            let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    sum / count as f64
}

pub fn random_tensor(rng: &mut impl Rng, shape: Shape, lo: f64, hi: f64) -> Tensor<f64> {
    Tensor::from_fn(shape, |_, _, _, _| rng.random_range(lo..hi))
}

/// Central differences of a scalar function over every coordinate of `x`.
pub fn numeric_grad(x: &Tensor<f64>, h: f64, mut f: impl FnMut(&Tensor<f64>) -> f64) -> Tensor<f64> {
    let mut g = Tensor::zeros(x.shape());
    let mut probe = x.clone();
    for i in 0..x.numel() {
        let base = probe.data()[i];
        probe.data_mut()[i] = base + h;
        let up = f(&probe);
        probe.data_mut()[i] = base - h;
        let down = f(&probe);
        probe.data_mut()[i] = base;
        g.data_mut()[i] = (up - down) / (2.0 * h);
    }
    g
}

/// Largest `|a − b| / max(|a|, |b|, floor)` over all coordinates.
pub fn max_rel_err(a: &Tensor<f64>, b: &Tensor<f64>, floor: f64) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
