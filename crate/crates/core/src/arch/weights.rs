use alloc::collections::btree_map::{self, BTreeMap};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::autograd::missing_param;
use crate::error::{shape_err, Result};
use crate::ops::ConvWeights;
use crate::{Scalar, Shape, Tensor};

/// Named parameter tensors, iterated in lexicographic name order.
///
/// Convolution layers are stored as `{layer}.weight` with shape
/// `(c_out, c_in, k, k)` and `{layer}.bias` with shape `(c_out, 1, 1, 1)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct WeightStore<T: Scalar = f32> {
    tensors: BTreeMap<String, Tensor<T>>,
}

pub fn weight_name(layer: &str) -> String {
    alloc::format!("{layer}.weight")
}

pub fn bias_name(layer: &str) -> String {
    alloc::format!("{layer}.bias")
}

impl<T: Scalar> WeightStore<T> {
    pub fn new() -> Self {
        Self { tensors: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> Option<Tensor<T>> {
        self.tensors.insert(name.into(), tensor)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor<T>> {
        self.tensors.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, String, Tensor<T>> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> btree_map::IterMut<'_, String, Tensor<T>> {
        self.tensors.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total element count over all tensors.
    pub fn num_params(&self) -> usize {
        self.tensors.values().map(Tensor::numel).sum()
    }

    /// Copies out the kernel and bias of `layer`.
    pub fn conv(&self, layer: &str) -> Result<ConvWeights<T>> {
        let kernel = self.get(&weight_name(layer)).ok_or_else(|| missing_param(&weight_name(layer)))?;
        let bias = self.get(&bias_name(layer)).ok_or_else(|| missing_param(&bias_name(layer)))?;
        ConvWeights::new(kernel.clone(), bias.data().to_vec())
    }

    pub fn set_conv(&mut self, layer: &str, w: ConvWeights<T>) {
        let c_out = w.c_out();
        self.insert(weight_name(layer), w.kernel);
        let bias = Tensor::new(Shape::new(c_out, 1, 1, 1), w.bias).expect("bias length checked by ConvWeights");
        self.insert(bias_name(layer), bias);
    }

    /// Converts every tensor to another precision.
    pub fn cast<U: Scalar>(&self) -> WeightStore<U> {
        WeightStore { tensors: self.tensors.iter().map(|(k, v)| (k.clone(), v.cast())).collect() }
    }

    /// First tensor (in name order) whose presence or shape differs from `expected`.
    pub fn first_mismatch(&self, expected: &[(String, Shape)]) -> Option<String> {
        let want: BTreeMap<&str, Shape> = expected.iter().map(|(n, s)| (n.as_str(), *s)).collect();
        let mut names: Vec<&str> = want.keys().copied().chain(self.names()).collect();
        names.sort_unstable();
        names.dedup();
        names
            .into_iter()
            .find(|n| want.get(n).copied() != self.get(n).map(Tensor::shape))
            .map(ToString::to_string)
    }

    pub fn check_shapes(&self, expected: &[(String, Shape)]) -> Result<()> {
        match self.first_mismatch(expected) {
            None => Ok(()),
            Some(name) => {
                let want = expected.iter().find(|(n, _)| *n == name).map(|(_, s)| *s);
                let got = self.get(&name).map(Tensor::shape);
                let show = |s: Option<Shape>| s.map_or_else(|| "nothing".to_string(), |s| s.to_string());
                Err(shape_err!("tensor {name}: expected {}, found {}", show(want), show(got)))
            }
        }
    }
}

impl<T: Scalar> FromIterator<(String, Tensor<T>)> for WeightStore<T> {
    fn from_iter<I: IntoIterator<Item = (String, Tensor<T>)>>(iter: I) -> Self {
        Self { tensors: iter.into_iter().collect() }
    }
}

impl<'a, T: Scalar> IntoIterator for &'a WeightStore<T> {
    type Item = (&'a String, &'a Tensor<T>);
    type IntoIter = btree_map::Iter<'a, String, Tensor<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.tensors.iter()
    }
}
