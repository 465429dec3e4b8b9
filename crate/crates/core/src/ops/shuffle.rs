use crate::error::{config_err, Result};
use crate::{Scalar, Shape, Tensor};

/// Sub-pixel rearrangement: input channel `c·r² + dy·r + dx` at `(y, x)` lands in
/// output channel `c` at `(y·r + dy, x·r + dx)`.
pub fn pixel_shuffle<T: Scalar>(x: &Tensor<T>, r: usize) -> Result<Tensor<T>> {
    let s = x.shape();
    if r == 0 || !s.c.is_multiple_of(r * r) {
        return Err(config_err!("{} channels not divisible by {}²", s.c, r));
    }
    let out = Shape::new(s.n, s.c / (r * r), s.h * r, s.w * r);
    Ok(Tensor::from_fn(out, |n, c, y, xx| {
        x.at(n, c * r * r + (y % r) * r + xx % r, y / r, xx / r)
    }))
}

/// Exact inverse of [`pixel_shuffle`].
pub fn pixel_unshuffle<T: Scalar>(x: &Tensor<T>, r: usize) -> Result<Tensor<T>> {
    let s = x.shape();
    if r == 0 || !s.h.is_multiple_of(r) || !s.w.is_multiple_of(r) {
        return Err(config_err!("spatial size {}x{} not divisible by {}", s.h, s.w, r));
    }
    let out = Shape::new(s.n, s.c * r * r, s.h / r, s.w / r);
    Ok(Tensor::from_fn(out, |n, c, y, xx| {
        let (base, off) = (c / (r * r), c % (r * r));
        x.at(n, base, y * r + off / r, xx * r + off % r)
    }))
}
