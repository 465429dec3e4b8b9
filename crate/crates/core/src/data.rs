//! HR→LR degradation, aligned patch sampling and geometric augmentation.
//!
//! Images are `(1, 3, H, W)` tensors holding values in `[0, 255]`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{config_err, shape_err, Result};
use crate::ops::{bicubic_resize, ResizeFactor};
use crate::{Scalar, Shape, Tensor};

/// Aligned high/low resolution pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePair {
    pub hr: Tensor<f32>,
    pub lr: Tensor<f32>,
    pub scale: usize,
    pub id: String,
}

/// Copies the `h×w` window at `(y0, x0)` out of every plane.
pub fn crop<T: Scalar>(t: &Tensor<T>, y0: usize, x0: usize, h: usize, w: usize) -> Result<Tensor<T>> {
    let s = t.shape();
    if y0 + h > s.h || x0 + w > s.w {
        return Err(shape_err!("crop {h}x{w} at ({y0}, {x0}) exceeds {s}"));
    }
    Ok(Tensor::from_fn(Shape::new(s.n, s.c, h, w), |n, c, y, x| t.at(n, c, y0 + y, x0 + x)))
}

/// Trims the bottom and right edges so both sides are multiples of `scale`.
pub fn crop_to_multiple<T: Scalar>(t: &Tensor<T>, scale: usize) -> Result<Tensor<T>> {
    let s = t.shape();
    let (h, w) = (s.h - s.h % scale, s.w - s.w % scale);
    if h == 0 || w == 0 {
        return Err(config_err!("image {}x{} smaller than scale {scale}", s.h, s.w));
    }
    crop(t, 0, 0, h, w)
}

/// Bicubic antialiased downscale of `hr` (after trimming to a multiple of `scale`).
pub fn degrade(id: &str, hr: &Tensor<f32>, scale: usize) -> Result<ImagePair> {
    if !(2..=4).contains(&scale) {
        return Err(config_err!("scale must be 2, 3 or 4, got {scale}"));
    }
    let hr = crop_to_multiple(hr, scale)?;
    let lr = bicubic_resize(&hr, ResizeFactor::down(scale)?, true)?.map(|v| v.clamp(0.0, 255.0));
    Ok(ImagePair { hr, lr, scale, id: id.into() })
}

/// Rounds to the nearest 8-bit level, as storing an image would.
pub fn quantize(t: &Tensor<f32>) -> Tensor<f32> {
    t.map(|v| v.clamp(0.0, 255.0).round())
}

/// Bicubic upscale of the low-resolution side, clamped to `[0, 255]`.
pub fn bicubic_upscale(lr: &Tensor<f32>, scale: usize) -> Result<Tensor<f32>> {
    Ok(bicubic_resize(lr, ResizeFactor::up(scale)?, true)?.map(|v| v.clamp(0.0, 255.0)))
}

/// Draws `batch` aligned crops: an LR window of side `patch` at `(y, x)` and
/// the HR window of side `scale·patch` at `(scale·y, scale·x)`.
///
/// Pairs whose LR side is smaller than `patch` are skipped with a warning.
pub fn sample_crops(
    pairs: &[ImagePair],
    patch: usize,
    batch: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(Tensor<f32>, Tensor<f32>)>> {
    if patch == 0 || batch == 0 {
        return Err(config_err!("patch and batch sizes must be positive"));
    }
    let usable: Vec<&ImagePair> = pairs
        .iter()
        .filter(|p| {
            let s = p.lr.shape();
            let ok = s.h >= patch && s.w >= patch;
            if !ok {
                log::warn!("skipping {}: {}x{} is smaller than patch {patch}", p.id, s.h, s.w);
            }
            ok
        })
        .collect();
    if usable.is_empty() {
        return Err(config_err!("no image is at least {patch}x{patch} on the low-resolution side"));
    }
    (0..batch)
        .map(|_| {
            let pair = usable[rng.random_range(0..usable.len())];
            let s = pair.lr.shape();
            let y = rng.random_range(0..=s.h - patch);
            let x = rng.random_range(0..=s.w - patch);
            let r = pair.scale;
            Ok((crop(&pair.lr, y, x, patch, patch)?, crop(&pair.hr, r * y, r * x, r * patch, r * patch)?))
        })
        .collect()
}

/// [`sample_crops`] stacked into `(batch, 3, patch, patch)` and `(batch, 3, s·patch, s·patch)`.
pub fn sample_batch(pairs: &[ImagePair], patch: usize, batch: usize, rng: &mut impl Rng) -> Result<(Tensor<f32>, Tensor<f32>)> {
    let crops = sample_crops(pairs, patch, batch, rng)?;
    let (lr, hr): (Vec<_>, Vec<_>) = crops.into_iter().unzip();
    Ok((Tensor::stack(&lr)?, Tensor::stack(&hr)?))
}

/// Which geometric transforms augmentation may draw.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AugmentMode {
    /// Optional horizontal flip, then optional 90° rotation (4 transforms).
    #[default]
    FlipRot90,
    /// Adds an optional vertical flip, covering all 8 symmetries of the square.
    Dihedral,
}

/// One concrete transform: flips first, then the rotation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Augmentation {
    pub hflip: bool,
    pub vflip: bool,
    pub rot90: bool,
}

impl Augmentation {
    pub fn draw(rng: &mut impl Rng, mode: AugmentMode) -> Self {
        let hflip = rng.random_bool(0.5);
        let rot90 = rng.random_bool(0.5);
        let vflip = mode == AugmentMode::Dihedral && rng.random_bool(0.5);
        Self { hflip, vflip, rot90 }
    }

    pub fn apply<T: Scalar>(&self, t: &Tensor<T>) -> Tensor<T> {
        let s = t.shape();
        let mut out = t.clone();
        if self.hflip {
            out = Tensor::from_fn(s, |n, c, y, x| t.at(n, c, y, s.w - 1 - x));
        }
        if self.vflip {
            let src = out;
            out = Tensor::from_fn(s, |n, c, y, x| src.at(n, c, s.h - 1 - y, x));
        }
        if self.rot90 {
            // Counter-clockwise: output (y, x) reads input (x, w − 1 − y).
            let src = out;
            out = Tensor::from_fn(Shape::new(s.n, s.c, s.w, s.h), |n, c, y, x| src.at(n, c, x, s.w - 1 - y));
        }
        out
    }
}

/// Applies one randomly drawn transform to both images of an aligned pair.
pub fn augment<T: Scalar>(lr: &Tensor<T>, hr: &Tensor<T>, rng: &mut impl Rng, mode: AugmentMode) -> (Tensor<T>, Tensor<T>) {
    let aug = Augmentation::draw(rng, mode);
    (aug.apply(lr), aug.apply(hr))
}
