use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config_err, shape_err, Result};
use crate::{Scalar, Shape, Tensor};

/// Kernel `(c_out, c_in, k, k)` and one bias per output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvWeights<T = f32> {
    pub kernel: Tensor<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvWeights<T> {
    pub fn new(kernel: Tensor<T>, bias: Vec<T>) -> Result<Self> {
        check_kernel(kernel.shape(), bias.len())?;
        Ok(Self { kernel, bias })
    }

    pub fn zeros(c_out: usize, c_in: usize, k: usize) -> Result<Self> {
        Self::new(Tensor::zeros(Shape::new(c_out, c_in, k, k)), vec![T::zero(); c_out])
    }

    pub fn c_out(&self) -> usize {
        self.kernel.shape().n
    }

    pub fn c_in(&self) -> usize {
        self.kernel.shape().c
    }

    pub fn k(&self) -> usize {
        self.kernel.shape().h
    }

    /// Padding that keeps the spatial size unchanged.
    pub fn same_pad(&self) -> usize {
        (self.k() - 1) / 2
    }

    pub fn num_params(&self) -> usize {
        self.kernel.numel() + self.bias.len()
    }

    pub fn cast<U: Scalar>(&self) -> ConvWeights<U> {
        ConvWeights { kernel: self.kernel.cast(), bias: self.bias.iter().map(|b| U::of(b.as_f64())).collect() }
    }
}

pub(crate) fn check_kernel(k: Shape, bias_len: usize) -> Result<()> {
    if k.h != k.w {
        return Err(config_err!("kernel must be square, got {}x{}", k.h, k.w));
    }
    if k.h.is_multiple_of(2) {
        return Err(config_err!("kernel size must be odd, got {}", k.h));
    }
    if bias_len != k.n {
        return Err(config_err!("bias has {} entries for {} filters", bias_len, k.n));
    }
    Ok(())
}

fn output_shape(x: Shape, kernel: Shape, bias_len: usize, pad: usize) -> Result<Shape> {
    check_kernel(kernel, bias_len)?;
    if x.c != kernel.c {
        return Err(config_err!("input has {} channels, kernel expects {}", x.c, kernel.c));
    }
    let k = kernel.h;
    if x.h + 2 * pad < k || x.w + 2 * pad < k {
        return Err(shape_err!("input {x} smaller than {k}x{k} kernel with pad {pad}"));
    }
    Ok(Shape::new(x.n, kernel.n, x.h + 2 * pad + 1 - k, x.w + 2 * pad + 1 - k))
}

/// Stride-1 zero-padded cross-correlation plus bias (im2col + GEMM).
pub fn conv2d<T: Scalar>(x: &Tensor<T>, w: &ConvWeights<T>, pad: usize) -> Result<Tensor<T>> {
    conv2d_raw(x, &w.kernel, &w.bias, pad)
}

/// Direct nested-loop convolution; the reference the fast path is checked against.
pub fn conv2d_naive<T: Scalar>(x: &Tensor<T>, w: &ConvWeights<T>, pad: usize) -> Result<Tensor<T>> {
    let out_shape = output_shape(x.shape(), w.kernel.shape(), w.bias.len(), pad)?;
    let s = x.shape();
    let k = w.k();
    Ok(Tensor::from_fn(out_shape, |n, co, oy, ox| {
        let mut acc = w.bias[co];
        for ci in 0..s.c {
            for ky in 0..k {
                let iy = (oy + ky) as isize - pad as isize;
                if iy < 0 || iy >= s.h as isize {
                    continue;
                }
                for kx in 0..k {
                    let ix = (ox + kx) as isize - pad as isize;
                    if ix < 0 || ix >= s.w as isize {
                        continue;
                    }
                    acc += x.at(n, ci, iy as usize, ix as usize) * w.kernel.at(co, ci, ky, kx);
                }
            }
        }
        acc
    }))
}

/// Geometry of one im2col unfolding.
#[derive(Clone, Copy)]
struct Unfold {
    c: usize,
    h: usize,
    w: usize,
    k: usize,
    pad: usize,
    oh: usize,
    ow: usize,
}

impl Unfold {
    fn rows(&self) -> usize {
        self.c * self.k * self.k
    }

    fn cols(&self) -> usize {
        self.oh * self.ow
    }

    fn is_pointwise(&self) -> bool {
        self.k == 1 && self.pad == 0
    }

    /// Output columns `lo..hi` whose input column `ox + kx − pad` lies inside the image.
    fn valid_cols(&self, kx: usize) -> (usize, usize) {
        let lo = self.pad.saturating_sub(kx).min(self.ow);
        let hi = (self.w + self.pad).saturating_sub(kx).clamp(lo, self.ow);
        (lo, hi)
    }
}

/// Unfolds one sample `(c, h, w)` into `cols: (c·k·k, oh·ow)`.
fn im2col<T: Scalar>(src: &[T], g: Unfold, cols: &mut [T]) {
    let (k, pad) = (g.k, g.pad as isize);
    let ncols = g.cols();
    for c in 0..g.c {
        let plane = &src[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..k {
            for kx in 0..k {
                let row = (c * k + ky) * k + kx;
                let dst = &mut cols[row * ncols..(row + 1) * ncols];
                let (lo, hi) = g.valid_cols(kx);
                for oy in 0..g.oh {
                    let iy = oy as isize + ky as isize - pad;
                    let line = &mut dst[oy * g.ow..(oy + 1) * g.ow];
                    if iy < 0 || iy >= g.h as isize {
                        line.fill(T::zero());
                        continue;
                    }
                    line[..lo].fill(T::zero());
                    if hi > lo {
                        let start = iy as usize * g.w + lo + kx - g.pad;
                        line[lo..hi].copy_from_slice(&plane[start..start + hi - lo]);
                    }
                    line[hi..].fill(T::zero());
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters-adds columns back into `(c, h, w)`.
fn col2im<T: Scalar>(cols: &[T], g: Unfold, dst: &mut [T]) {
    let (k, pad) = (g.k, g.pad as isize);
    let ncols = g.cols();
    for c in 0..g.c {
        let plane = &mut dst[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..k {
            for kx in 0..k {
                let row = (c * k + ky) * k + kx;
                let src = &cols[row * ncols..(row + 1) * ncols];
                let (lo, hi) = g.valid_cols(kx);
                for oy in 0..g.oh {
                    let iy = oy as isize + ky as isize - pad;
                    if iy < 0 || iy >= g.h as isize || hi == lo {
                        continue;
                    }
                    let start = iy as usize * g.w + lo + kx - g.pad;
                    let line = &src[oy * g.ow + lo..oy * g.ow + hi];
                    for (d, &v) in plane[start..start + hi - lo].iter_mut().zip(line) {
                        *d += v;
                    }
                }
            }
        }
    }
}

fn unfold_for(x: Shape, kernel: Shape, pad: usize, out: Shape) -> Unfold {
    Unfold { c: x.c, h: x.h, w: x.w, k: kernel.h, pad, oh: out.h, ow: out.w }
}

pub(crate) fn conv2d_raw<T: Scalar>(
    x: &Tensor<T>,
    kernel: &Tensor<T>,
    bias: &[T],
    pad: usize,
) -> Result<Tensor<T>> {
    let out_shape = output_shape(x.shape(), kernel.shape(), bias.len(), pad)?;
    let g = unfold_for(x.shape(), kernel.shape(), pad, out_shape);
    let (m, kk, n) = (out_shape.c, g.rows(), g.cols());
    let mut out = Tensor::zeros(out_shape);
    let mut cols = if g.is_pointwise() { Vec::new() } else { vec![T::zero(); kk * n] };
    for b in 0..out_shape.n {
        let src = x.sample_data(b);
        let rhs: &[T] = if g.is_pointwise() {
            src
        } else {
            im2col(src, g, &mut cols);
            &cols
        };
        let dst = &mut out.data_mut()[b * m * n..(b + 1) * m * n];
        for (co, plane) in dst.chunks_exact_mut(n).enumerate() {
            plane.fill(bias[co]);
        }
        // Computed as outᵀ (n×m) = colsᵀ (n×kk) · Kᵀ (kk×m): the tall orientation packs better.
        T::gemm(n, kk, m, T::one(), rhs, (1, n), kernel.data(), (1, kk), T::one(), dst, (1, n));
    }
    Ok(out)
}

/// Gradients of a convolution with respect to input, kernel and bias.
pub(crate) struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub kernel: Tensor<T>,
    pub bias: Tensor<T>,
}

pub(crate) fn conv2d_backward<T: Scalar>(
    x: &Tensor<T>,
    kernel: &Tensor<T>,
    pad: usize,
    grad_out: &Tensor<T>,
) -> ConvGrads<T> {
    let ks = kernel.shape();
    let out_shape = grad_out.shape();
    let g = unfold_for(x.shape(), ks, pad, out_shape);
    let (m, kk, n) = (out_shape.c, g.rows(), g.cols());
    let mut grad_kernel = Tensor::zeros(ks);
    let mut grad_bias = Tensor::zeros(Shape::new(ks.n, 1, 1, 1));
    let mut grad_input = Tensor::zeros(x.shape());
    let mut cols = vec![T::zero(); kk * n];
    let mut grad_cols = vec![T::zero(); kk * n];
    for b in 0..out_shape.n {
        let dy = grad_out.sample_data(b);
        for (co, plane) in dy.chunks_exact(n).enumerate() {
            grad_bias.data_mut()[co] += plane.iter().copied().sum::<T>();
        }
        let src = x.sample_data(b);
        let rhs: &[T] = if g.is_pointwise() {
            src
        } else {
            im2col(src, g, &mut cols);
            &cols
        };
        // dK (m×kk) += dY (m×n) · colsᵀ (n×kk)
        T::gemm(m, n, kk, T::one(), dy, (n, 1), rhs, (1, n), T::one(), grad_kernel.data_mut(), (kk, 1));
        // dcols (kk×n) = Kᵀ (kk×m) · dY (m×n)
        let dst = &mut grad_input.data_mut()[b * x.shape().sample()..(b + 1) * x.shape().sample()];
        if g.is_pointwise() {
            T::gemm(kk, m, n, T::one(), kernel.data(), (1, kk), dy, (n, 1), T::zero(), dst, (n, 1));
        } else {
            T::gemm(kk, m, n, T::one(), kernel.data(), (1, kk), dy, (n, 1), T::zero(), &mut grad_cols, (n, 1));
            col2im(&grad_cols, g, dst);
        }
    }
    ConvGrads { input: grad_input, kernel: grad_kernel, bias: grad_bias }
}
