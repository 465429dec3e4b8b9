//! PSNR and SSIM on the luma channel.
//!
//! RGB inputs are `(1, 3, H, W)` tensors in `[0, 255]`. Luma uses the
//! studio-swing BT.601 transform, is kept in `f64` without rounding, and the
//! border shave is applied after conversion.

use alloc::vec::Vec;

use crate::error::{config_err, shape_err, Result};
use crate::{Shape, Tensor};

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const PEAK: f64 = 255.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub psnr_db: f64,
    pub ssim: f64,
    /// Border pixels dropped on each side before measuring.
    pub shave: usize,
}

/// `Y = 16 + (65.481·R + 128.553·G + 24.966·B) / 255`, shaped `(n, 1, H, W)`.
pub fn rgb_to_y(img: &Tensor<f32>) -> Result<Tensor<f64>> {
    let s = img.shape();
    if s.c != 3 {
        return Err(shape_err!("luma conversion needs 3 channels, got {s}"));
    }
    Ok(Tensor::from_fn(s.with_c(1), |n, _, y, x| {
        let (r, g, b) = (img.at(n, 0, y, x) as f64, img.at(n, 1, y, x) as f64, img.at(n, 2, y, x) as f64);
        16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0
    }))
}

fn shave(t: &Tensor<f64>, border: usize) -> Result<Tensor<f64>> {
    let s = t.shape();
    if 2 * border >= s.h || 2 * border >= s.w {
        return Err(config_err!("shave of {border} leaves nothing of {}x{}", s.h, s.w));
    }
    crate::data::crop(t, border, border, s.h - 2 * border, s.w - 2 * border)
}

fn luma_pair(sr: &Tensor<f32>, hr: &Tensor<f32>, border: usize) -> Result<(Tensor<f64>, Tensor<f64>)> {
    if sr.shape() != hr.shape() {
        return Err(shape_err!("compared images differ: {} vs {}", sr.shape(), hr.shape()));
    }
    Ok((shave(&rgb_to_y(sr)?, border)?, shave(&rgb_to_y(hr)?, border)?))
}

/// PSNR of a luma pair, capped at [`PSNR_CAP`] when identical.
pub fn psnr(a: &Tensor<f64>, b: &Tensor<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(shape_err!("compared images differ: {} vs {}", a.shape(), b.shape()));
    }
    let mse = a.data().iter().zip(b.data()).map(|(&x, &y)| (x - y) * (x - y)).sum::<f64>() / a.numel() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((20.0 * (PEAK / mse.sqrt()).log10()).min(PSNR_CAP))
}

/// Luma PSNR between two RGB images after removing `shave` border pixels.
pub fn psnr_y(sr: &Tensor<f32>, hr: &Tensor<f32>, shave: usize) -> Result<f64> {
    let (a, b) = luma_pair(sr, hr, shave)?;
    psnr(&a, &b)
}

/// Separable valid-mode Gaussian filtering of one plane.
fn filter_valid(src: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (oh, ow) = (h + 1 - k, w + 1 - k);
    let mut rows = alloc::vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * src[y * w + x + i]).sum();
        }
    }
    let mut out = alloc::vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean single-scale SSIM over all valid window positions of two luma planes.
pub fn ssim(a: &Tensor<f64>, b: &Tensor<f64>) -> Result<f64> {
    let s = a.shape();
    if s != b.shape() {
        return Err(shape_err!("compared images differ: {s} vs {}", b.shape()));
    }
    if s.n != 1 || s.c != 1 {
        return Err(shape_err!("ssim expects one luma plane, got {s}"));
    }
    if s.h < SSIM_WINDOW || s.w < SSIM_WINDOW {
        return Err(config_err!("{}x{} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window", s.h, s.w));
    }
    if a == b {
        return Ok(1.0);
    }
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps: Vec<f64> =
        (0..SSIM_WINDOW).map(|i| (-((i as f64 - half).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()).collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|v| *v /= total);

    let (x, y) = (a.data(), b.data());
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> { x.iter().zip(y).map(|(&p, &q)| f(p, q)).collect() };
    let filt = |v: &[f64]| filter_valid(v, s.h, s.w, &taps);
    let mu_x = filt(x);
    let mu_y = filt(y);
    let xx = filt(&prod(&|p, _| p * p));
    let yy = filt(&prod(&|_, q| q * q));
    let xy = filt(&prod(&|p, q| p * q));
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = xx[i] - mx * mx;
            let vy = yy[i] - my * my;
            let cov = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    Ok((total / mu_x.len() as f64).clamp(-1.0, 1.0))
}

/// Luma SSIM between two RGB images after removing `shave` border pixels.
pub fn ssim_y(sr: &Tensor<f32>, hr: &Tensor<f32>, shave: usize) -> Result<f64> {
    let (a, b) = luma_pair(sr, hr, shave)?;
    ssim(&a, &b)
}

/// PSNR and SSIM of one image pair.
pub fn evaluate(sr: &Tensor<f32>, hr: &Tensor<f32>, shave: usize) -> Result<EvalResult> {
    let (a, b) = luma_pair(sr, hr, shave)?;
    Ok(EvalResult { psnr_db: psnr(&a, &b)?, ssim: ssim(&a, &b)?, shave })
}

/// Single luma plane from raw values (for tests and tools).
pub fn luma_plane(h: usize, w: usize, values: Vec<f64>) -> Result<Tensor<f64>> {
    Tensor::new(Shape::new(1, 1, h, w), values)
}
