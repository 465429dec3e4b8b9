use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::error::{shape_err, Result};
use crate::Scalar;

/// Extent of a dense NCHW tensor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Shape {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub const fn new(n: usize, c: usize, h: usize, w: usize) -> Self {
        Self { n, c, h, w }
    }

    pub const fn numel(&self) -> usize {
        self.n * self.c * self.h * self.w
    }

    /// Number of elements in one `(h, w)` plane.
    pub const fn plane(&self) -> usize {
        self.h * self.w
    }

    /// Number of elements in one sample (`c·h·w`).
    pub const fn sample(&self) -> usize {
        self.c * self.h * self.w
    }

    #[inline]
    pub const fn offset(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        ((n * self.c + c) * self.h + y) * self.w + x
    }

    pub const fn dims(&self) -> [usize; 4] {
        [self.n, self.c, self.h, self.w]
    }

    pub const fn with_c(self, c: usize) -> Self {
        Self { c, ..self }
    }

    pub const fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.n, self.c, self.h, self.w)
    }
}

/// Dense row-major NCHW array.
///
/// The element buffer always holds exactly `shape.numel()` values.
#[derive(Clone, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const PREVIEW: usize = 8;
        let head = &self.data[..self.data.len().min(PREVIEW)];
        f.debug_struct("Tensor")
            .field("shape", &self.shape)
            .field("head", &head)
            .finish()
    }
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.numel() {
            return Err(shape_err!(
                "buffer of {} values does not fit shape {shape}",
                data.len()
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn full(shape: Shape, value: T) -> Self {
        Self { shape, data: vec![value; shape.numel()] }
    }

    /// Builds a tensor by evaluating `f(n, c, y, x)` at every site.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(shape.numel());
        for n in 0..shape.n {
            for c in 0..shape.c {
                for y in 0..shape.h {
                    for x in 0..shape.w {
                        data.push(f(n, c, y, x));
                    }
                }
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, n: usize, c: usize, y: usize, x: usize) -> T {
        self.data[self.shape.offset(n, c, y, x)]
    }

    #[inline]
    pub fn at_mut(&mut self, n: usize, c: usize, y: usize, x: usize) -> &mut T {
        let i = self.shape.offset(n, c, y, x);
        &mut self.data[i]
    }

    pub fn plane(&self, n: usize, c: usize) -> &[T] {
        let start = self.shape.offset(n, c, 0, 0);
        &self.data[start..start + self.shape.plane()]
    }

    pub fn plane_mut(&mut self, n: usize, c: usize) -> &mut [T] {
        let start = self.shape.offset(n, c, 0, 0);
        let len = self.shape.plane();
        &mut self.data[start..start + len]
    }

    /// Values of sample `n` as one contiguous `c·h·w` slice.
    pub fn sample_data(&self, n: usize) -> &[T] {
        let len = self.shape.sample();
        &self.data[n * len..(n + 1) * len]
    }

    /// Copies sample `n` out as a batch-of-one tensor.
    pub fn sample(&self, n: usize) -> Tensor<T> {
        Tensor { shape: self.shape.with_n(1), data: self.sample_data(n).to_vec() }
    }

    /// Stacks batch-of-one (or larger) tensors along the batch axis.
    pub fn stack(items: &[Tensor<T>]) -> Result<Self> {
        let first = items.first().ok_or_else(|| shape_err!("cannot stack zero tensors"))?;
        let per = first.shape.with_n(0);
        let mut n = 0;
        let mut data = Vec::new();
        for t in items {
            if t.shape.with_n(0) != per {
                return Err(shape_err!("cannot stack {} with {}", t.shape, first.shape));
            }
            n += t.shape.n;
            data.extend_from_slice(&t.data);
        }
        Ok(Tensor { shape: per.with_n(n), data })
    }

    /// Same values under a new shape with equal element count.
    pub fn reshape(self, shape: Shape) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Channels `range` of every sample, copied.
    pub fn slice_channels(&self, range: Range<usize>) -> Result<Self> {
        let s = self.shape;
        if range.start >= range.end || range.end > s.c {
            return Err(shape_err!("channel range {range:?} invalid for {s}"));
        }
        let out_shape = s.with_c(range.end - range.start);
        let mut data = Vec::with_capacity(out_shape.numel());
        for n in 0..s.n {
            let start = s.offset(n, range.start, 0, 0);
            let end = s.offset(n, range.end - 1, 0, 0) + s.plane();
            data.extend_from_slice(&self.data[start..end]);
        }
        Ok(Tensor { shape: out_shape, data })
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Tensor { shape: self.shape, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Result<Self> {
        if self.shape != other.shape {
            return Err(shape_err!("elementwise shapes differ: {} vs {}", self.shape, other.shape));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Tensor { shape: self.shape, data })
    }

    /// Converts every element to another precision.
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor { shape: self.shape, data: self.data.iter().map(|&v| U::of(v.as_f64())).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    /// Largest absolute elementwise difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.shape != other.shape {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| (a - b).abs().as_f64())
                .fold(0.0, f64::max),
        )
    }

    pub(crate) fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}
