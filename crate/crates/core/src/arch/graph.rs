use core::ops::Range;

use super::{bias_name, weight_name, WeightStore};
use crate::autograd::{missing_param, Tape, Var};
use crate::error::{shape_err, Result};
use crate::ops::{self, LEAKY_SLOPE};
use crate::{Scalar, Shape, Tensor};

/// Operations a network definition is written against.
///
/// [`Eval`] runs them eagerly on tensors; [`Tape`] records them for the
/// backward pass. Writing each block once against this trait keeps inference
/// and training on the same code path.
pub trait Graph<T: Scalar> {
    type Value: Clone;

    fn param(&mut self, name: &str) -> Result<Self::Value>;
    fn shape(&self, v: &Self::Value) -> Shape;
    fn conv_with(&mut self, x: &Self::Value, kernel: &Self::Value, bias: &Self::Value, pad: usize) -> Result<Self::Value>;
    fn leaky_relu(&mut self, x: &Self::Value) -> Self::Value;
    fn add(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn concat(&mut self, xs: &[Self::Value]) -> Result<Self::Value>;
    fn slice_channels(&mut self, x: &Self::Value, range: Range<usize>) -> Result<Self::Value>;
    fn contrast_pool(&mut self, x: &Self::Value) -> Self::Value;
    fn sigmoid(&mut self, x: &Self::Value) -> Self::Value;
    fn scale_channels(&mut self, x: &Self::Value, gate: &Self::Value) -> Result<Self::Value>;
    fn pixel_shuffle(&mut self, x: &Self::Value, r: usize) -> Result<Self::Value>;

    /// Same-padded convolution with the weights stored under `layer`.
    fn conv(&mut self, x: &Self::Value, layer: &str) -> Result<Self::Value> {
        let kernel = self.param(&weight_name(layer))?;
        let bias = self.param(&bias_name(layer))?;
        let k = self.shape(&kernel).h;
        self.conv_with(x, &kernel, &bias, (k.max(1) - 1) / 2)
    }
}

/// Eager evaluation against a borrowed weight store.
pub struct Eval<'w, T: Scalar = f32> {
    weights: &'w WeightStore<T>,
}

impl<'w, T: Scalar> Eval<'w, T> {
    pub fn new(weights: &'w WeightStore<T>) -> Self {
        Self { weights }
    }
}

impl<T: Scalar> Graph<T> for Eval<'_, T> {
    type Value = Tensor<T>;

    fn param(&mut self, name: &str) -> Result<Tensor<T>> {
        self.weights.get(name).cloned().ok_or_else(|| missing_param(name))
    }

    fn shape(&self, v: &Tensor<T>) -> Shape {
        v.shape()
    }

    fn conv_with(&mut self, x: &Tensor<T>, kernel: &Tensor<T>, bias: &Tensor<T>, pad: usize) -> Result<Tensor<T>> {
        if bias.shape() != Shape::new(bias.numel(), 1, 1, 1) {
            return Err(shape_err!("bias must be shaped (c_out, 1, 1, 1), got {}", bias.shape()));
        }
        ops::conv2d_raw(x, kernel, bias.data(), pad)
    }

    fn leaky_relu(&mut self, x: &Tensor<T>) -> Tensor<T> {
        ops::leaky_relu(x, T::of(LEAKY_SLOPE))
    }

    fn add(&mut self, a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
        ops::add(a, b)
    }

    fn concat(&mut self, xs: &[Tensor<T>]) -> Result<Tensor<T>> {
        let refs: alloc::vec::Vec<&Tensor<T>> = xs.iter().collect();
        ops::concat_channels(&refs)
    }

    fn slice_channels(&mut self, x: &Tensor<T>, range: Range<usize>) -> Result<Tensor<T>> {
        x.slice_channels(range)
    }

    fn contrast_pool(&mut self, x: &Tensor<T>) -> Tensor<T> {
        ops::contrast_pool(x)
    }

    fn sigmoid(&mut self, x: &Tensor<T>) -> Tensor<T> {
        ops::sigmoid(x)
    }

    fn scale_channels(&mut self, x: &Tensor<T>, gate: &Tensor<T>) -> Result<Tensor<T>> {
        ops::scale_channels(x, gate)
    }

    fn pixel_shuffle(&mut self, x: &Tensor<T>, r: usize) -> Result<Tensor<T>> {
        ops::pixel_shuffle(x, r)
    }
}

impl<T: Scalar> Tape<T> {
    /// Tape with every tensor of `weights` registered as a named parameter.
    pub fn with_params(weights: &WeightStore<T>) -> Self {
        let mut tape = Tape::new();
        for (name, t) in weights {
            tape.param(name, t.clone()).expect("store names are unique");
        }
        tape
    }
}

impl<T: Scalar> Graph<T> for Tape<T> {
    type Value = Var;

    fn param(&mut self, name: &str) -> Result<Var> {
        self.param_var(name).ok_or_else(|| missing_param(name))
    }

    fn shape(&self, v: &Var) -> Shape {
        self.value(*v).shape()
    }

    fn conv_with(&mut self, x: &Var, kernel: &Var, bias: &Var, pad: usize) -> Result<Var> {
        self.conv2d(*x, *kernel, *bias, pad)
    }

    fn leaky_relu(&mut self, x: &Var) -> Var {
        Tape::leaky_relu(self, *x, T::of(LEAKY_SLOPE))
    }

    fn add(&mut self, a: &Var, b: &Var) -> Result<Var> {
        Tape::add(self, *a, *b)
    }

    fn concat(&mut self, xs: &[Var]) -> Result<Var> {
        Tape::concat(self, xs)
    }

    fn slice_channels(&mut self, x: &Var, range: Range<usize>) -> Result<Var> {
        Tape::slice_channels(self, *x, range.start, range.end)
    }

    fn contrast_pool(&mut self, x: &Var) -> Var {
        Tape::contrast_pool(self, *x)
    }

    fn sigmoid(&mut self, x: &Var) -> Var {
        Tape::sigmoid(self, *x)
    }

    fn scale_channels(&mut self, x: &Var, gate: &Var) -> Result<Var> {
        Tape::scale_channels(self, *x, *gate)
    }

    fn pixel_shuffle(&mut self, x: &Var, r: usize) -> Result<Var> {
        Tape::pixel_shuffle(self, *x, r)
    }
}
