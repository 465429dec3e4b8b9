use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layout::{block_prefix, model_layers, BlockVariant, LayerSpec};
use super::{block, Eval, Graph, ModelConfig, WeightStore};
use crate::error::{shape_err, Result};
use crate::{Scalar, Shape, Tensor};

/// Network architecture: extraction conv, stacked blocks, 1×1 + 3×3 feature
/// assembly, global skip, and 3×3 conv + sub-pixel reconstruction.
///
/// Pixel values enter and leave the network in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rfdn {
    config: ModelConfig,
    variant: BlockVariant,
}

/// Standard network built from residual feature distillation blocks.
pub fn build_rfdn<T: Scalar>(config: ModelConfig, seed: u64) -> Result<(Rfdn, WeightStore<T>)> {
    let model = build_variant(BlockVariant::Rfdb, config)?;
    let weights = model.init_weights(seed);
    Ok((model, weights))
}

/// Network whose trunk uses `variant` blocks.
pub fn build_variant(variant: BlockVariant, config: ModelConfig) -> Result<Rfdn> {
    config.validate()?;
    Ok(Rfdn { config, variant })
}

impl Rfdn {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn variant(&self) -> BlockVariant {
        self.variant
    }

    pub fn layers(&self) -> Vec<LayerSpec> {
        model_layers(self.variant, &self.config)
    }

    /// Every parameter tensor name with its shape.
    pub fn tensor_shapes(&self) -> Vec<(String, Shape)> {
        self.layers().iter().flat_map(LayerSpec::tensors).collect()
    }

    /// Fan-in scaled uniform kernels `U(−1/√fan_in, 1/√fan_in)` and zero biases.
    pub fn init_weights<T: Scalar>(&self, seed: u64) -> WeightStore<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = WeightStore::new();
        for layer in self.layers() {
            init_layer(&mut store, &layer, &mut rng);
        }
        store
    }

    /// Starts from `source` wherever names and shapes agree; everything else
    /// (typically the scale-dependent reconstruction conv) is freshly
    /// initialized. Returns the store and the names that were re-initialized.
    pub fn warm_start<T: Scalar>(&self, source: &WeightStore<T>, seed: u64) -> (WeightStore<T>, Vec<String>) {
        let mut store = self.init_weights(seed);
        let mut fresh = Vec::new();
        for (name, t) in store.iter_mut() {
            match source.get(name) {
                Some(src) if src.shape() == t.shape() => *t = src.clone(),
                _ => fresh.push(name.clone()),
            }
        }
        (store, fresh)
    }

    /// Fails naming the first tensor whose presence or shape is wrong.
    pub fn check_weights<T: Scalar>(&self, weights: &WeightStore<T>) -> Result<()> {
        weights.check_shapes(&self.tensor_shapes())
    }

    /// Records or evaluates the full network on `x: (n, 3, h, w)`.
    pub fn forward<T: Scalar, G: Graph<T>>(&self, g: &mut G, x: &G::Value) -> Result<G::Value> {
        let s = g.shape(x);
        if s.c != 3 {
            return Err(shape_err!("network input must have 3 channels, got {s}"));
        }
        let f0 = g.conv(x, "head")?;
        let mut features = Vec::with_capacity(self.config.num_blocks);
        let mut cur = f0.clone();
        for i in 0..self.config.num_blocks {
            cur = block(g, self.variant, &block_prefix(i), &cur)?;
            features.push(cur.clone());
        }
        let cat = g.concat(&features)?;
        let assembled = g.conv(&cat, "fuse1")?;
        let assembled = g.leaky_relu(&assembled);
        let assembled = g.conv(&assembled, "fuse3")?;
        let skip = g.add(&assembled, &f0)?;
        let up = g.conv(&skip, "recon")?;
        g.pixel_shuffle(&up, self.config.scale)
    }

    pub fn forward_eval<T: Scalar>(&self, weights: &WeightStore<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.forward(&mut Eval::new(weights), x)
    }

    /// Upscales an image with values in `[0, 255]`, clamping the result to the same range.
    pub fn super_resolve<T: Scalar>(&self, weights: &WeightStore<T>, img: &Tensor<T>) -> Result<Tensor<T>> {
        let scale = T::of(255.0);
        let y = self.forward_eval(weights, &img.map(|v| v / scale))?;
        Ok(y.map(|v| (v * scale).max(T::zero()).min(scale)))
    }

    pub fn count_params(&self) -> usize {
        super::count_params(&self.layers())
    }

    pub fn count_mult_adds(&self, hr_h: usize, hr_w: usize) -> u64 {
        super::count_mult_adds(&self.layers(), hr_h / self.config.scale, hr_w / self.config.scale)
    }
}

pub(crate) fn init_layer<T: Scalar>(store: &mut WeightStore<T>, layer: &LayerSpec, rng: &mut impl Rng) {
    let [(wname, wshape), (bname, bshape)] = layer.tensors();
    let bound = 1.0 / ((layer.c_in * layer.k * layer.k) as f64).sqrt();
    let data = (0..wshape.numel()).map(|_| T::of(rng.random_range(-bound..bound))).collect();
    store.insert(wname, Tensor::new(wshape, data).expect("sized from shape"));
    store.insert(bname, Tensor::zeros(bshape));
}
