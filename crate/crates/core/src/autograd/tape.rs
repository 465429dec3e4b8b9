use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{config_err, shape_err, Result};
use crate::ops::{self, conv2d_backward, conv2d_raw, ConvGrads};
use crate::{Error, Scalar, Shape, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op<T> {
    Leaf,
    Conv { x: Var, kernel: Var, bias: Var, pad: usize },
    LeakyRelu { x: Var, slope: T },
    Add(Var, Var),
    Concat(Vec<Var>),
    SliceChannels { x: Var, start: usize },
    PixelShuffle { x: Var, r: usize },
    Sigmoid(Var),
    ScaleChannels { x: Var, gate: Var },
    ContrastPool(Var),
    L1 { pred: Var, target: Var },
}

struct Node<T> {
    op: Op<T>,
    value: Tensor<T>,
}

/// Records forward operations in execution order so that one reverse sweep
/// yields the gradient of a scalar loss with respect to every leaf.
///
/// Nodes are appended only after their inputs exist, so the node list is
/// always a topological order.
pub struct Tape<T: Scalar = f32> {
    nodes: Vec<Node<T>>,
    params: BTreeMap<String, Var>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), params: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// Records a constant or input; gradients are still reported for it.
    pub fn leaf(&mut self, value: Tensor<T>) -> Var {
        self.push(Op::Leaf, value)
    }

    /// Records a named trainable parameter.
    pub fn param(&mut self, name: &str, value: Tensor<T>) -> Result<Var> {
        if self.params.contains_key(name) {
            return Err(Error::Usage(alloc::format!("parameter {name} registered twice")));
        }
        let v = self.leaf(value);
        self.params.insert(name.to_string(), v);
        Ok(v)
    }

    pub fn param_var(&self, name: &str) -> Option<Var> {
        self.params.get(name).copied()
    }

    pub fn conv2d(&mut self, x: Var, kernel: Var, bias: Var, pad: usize) -> Result<Var> {
        let b = self.value(bias);
        if b.shape() != Shape::new(b.numel(), 1, 1, 1) {
            return Err(shape_err!("bias must be shaped (c_out, 1, 1, 1), got {}", b.shape()));
        }
        let out = conv2d_raw(self.value(x), self.value(kernel), b.data(), pad)?;
        Ok(self.push(Op::Conv { x, kernel, bias, pad }, out))
    }

    pub fn leaky_relu(&mut self, x: Var, slope: T) -> Var {
        let out = ops::leaky_relu(self.value(x), slope);
        self.push(Op::LeakyRelu { x, slope }, out)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = ops::add(self.value(a), self.value(b))?;
        Ok(self.push(Op::Add(a, b), out))
    }

    pub fn concat(&mut self, xs: &[Var]) -> Result<Var> {
        let refs: Vec<&Tensor<T>> = xs.iter().map(|&v| self.value(v)).collect();
        let out = ops::concat_channels(&refs)?;
        Ok(self.push(Op::Concat(xs.to_vec()), out))
    }

    pub fn slice_channels(&mut self, x: Var, start: usize, end: usize) -> Result<Var> {
        let out = self.value(x).slice_channels(start..end)?;
        Ok(self.push(Op::SliceChannels { x, start }, out))
    }

    pub fn pixel_shuffle(&mut self, x: Var, r: usize) -> Result<Var> {
        let out = ops::pixel_shuffle(self.value(x), r)?;
        Ok(self.push(Op::PixelShuffle { x, r }, out))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = ops::sigmoid(self.value(x));
        self.push(Op::Sigmoid(x), out)
    }

    pub fn scale_channels(&mut self, x: Var, gate: Var) -> Result<Var> {
        let out = ops::scale_channels(self.value(x), self.value(gate))?;
        Ok(self.push(Op::ScaleChannels { x, gate }, out))
    }

    /// Per-channel spatial `mean + std`, shaped `(n, c, 1, 1)`.
    pub fn contrast_pool(&mut self, x: Var) -> Var {
        let out = ops::contrast_pool(self.value(x));
        self.push(Op::ContrastPool(x), out)
    }

    /// Mean absolute error as a `(1, 1, 1, 1)` node.
    pub fn l1_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        let loss = super::l1_loss(self.value(pred), self.value(target))?;
        Ok(self.push(Op::L1 { pred, target }, Tensor::full(Shape::new(1, 1, 1, 1), loss)))
    }

    /// Reverse sweep from a scalar node.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        let root = self.value(loss);
        if root.numel() != 1 {
            return Err(Error::Usage(alloc::format!(
                "backward needs a scalar terminal, got {}",
                root.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(root.shape(), T::one()));
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads)?;
        }
        let params = self
            .params
            .iter()
            .map(|(name, &v)| {
                let g = grads[v.0].clone().unwrap_or_else(|| Tensor::zeros(self.value(v).shape()));
                (name.clone(), g)
            })
            .collect();
        Ok(Gradients { leaves: grads, params })
    }

    fn propagate(&self, node: &Node<T>, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) -> Result<()> {
        let mut acc = |v: Var, delta: Tensor<T>| match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        };
        match &node.op {
            Op::Leaf => {}
            Op::Conv { x, kernel, bias, pad } => {
                let ConvGrads { input, kernel: dk, bias: db } =
                    conv2d_backward(self.value(*x), self.value(*kernel), *pad, g);
                acc(*x, input);
                acc(*kernel, dk);
                acc(*bias, db);
            }
            Op::LeakyRelu { x, slope } => {
                let input = self.value(*x);
                let d = g.zip_map(input, |gv, xv| if xv > T::zero() { gv } else { gv * *slope })?;
                acc(*x, d);
            }
            Op::Add(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.clone());
            }
            Op::Concat(xs) => {
                let mut start = 0;
                for &v in xs {
                    let c = self.value(v).shape().c;
                    acc(v, g.slice_channels(start..start + c)?);
                    start += c;
                }
            }
            Op::SliceChannels { x, start } => {
                let full = self.value(*x).shape();
                let mut d = Tensor::zeros(full);
                let part = g.shape();
                for n in 0..full.n {
                    for c in 0..part.c {
                        d.plane_mut(n, start + c).copy_from_slice(g.plane(n, c));
                    }
                }
                acc(*x, d);
            }
            Op::PixelShuffle { x, r } => acc(*x, ops::pixel_unshuffle(g, *r)?),
            Op::Sigmoid(x) => {
                let d = g.zip_map(&node.value, |gv, s| gv * s * (T::one() - s))?;
                acc(*x, d);
            }
            Op::ScaleChannels { x, gate } => {
                let (xv, sv) = (self.value(*x), self.value(*gate));
                acc(*x, ops::scale_channels(g, sv)?);
                let s = xv.shape();
                let mut dg = Tensor::zeros(sv.shape());
                for n in 0..s.n {
                    for c in 0..s.c {
                        *dg.at_mut(n, c, 0, 0) =
                            g.plane(n, c).iter().zip(xv.plane(n, c)).map(|(&a, &b)| a * b).sum();
                    }
                }
                acc(*gate, dg);
            }
            Op::ContrastPool(x) => {
                let xv = self.value(*x);
                let s = xv.shape();
                let stats = ops::channel_stats_pool(xv);
                let area = T::of(s.plane() as f64);
                let mut d = Tensor::zeros(s);
                for n in 0..s.n {
                    for c in 0..s.c {
                        let gv = g.at(n, c, 0, 0);
                        let mean = stats.mean.at(n, c, 0, 0);
                        let std = stats.std.at(n, c, 0, 0);
                        // d std / dx is undefined on a flat channel; take the zero subgradient there.
                        let spread = if std > T::zero() { gv / (area * std) } else { T::zero() };
                        for (dv, &v) in d.plane_mut(n, c).iter_mut().zip(xv.plane(n, c)) {
                            *dv = gv / area + spread * (v - mean);
                        }
                    }
                }
                acc(*x, d);
            }
            Op::L1 { pred, target } => {
                let (p, t) = (self.value(*pred), self.value(*target));
                let scale = g.data()[0] / T::of(p.numel() as f64);
                let d = p.zip_map(t, |a, b| sign(a - b) * scale)?;
                acc(*target, d.map(|v| -v));
                acc(*pred, d);
            }
        }
        Ok(())
    }
}

/// `sign(0) = 0`.
fn sign<T: Float>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Result of [`Tape::backward`].
pub struct Gradients<T: Scalar = f32> {
    leaves: Vec<Option<Tensor<T>>>,
    params: BTreeMap<String, Tensor<T>>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient of a leaf; `None` when the loss does not depend on it.
    pub fn wrt(&self, v: Var) -> Option<&Tensor<T>> {
        self.leaves.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of a named parameter (zeros when unreachable).
    pub fn param(&self, name: &str) -> Option<&Tensor<T>> {
        self.params.get(name)
    }

    pub fn params(&self) -> &BTreeMap<String, Tensor<T>> {
        &self.params
    }

    pub fn into_params(self) -> BTreeMap<String, Tensor<T>> {
        self.params
    }
}

pub(crate) fn missing_param(name: &str) -> Error {
    config_err!("missing parameter tensor {name}")
}
