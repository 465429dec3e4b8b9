use alloc::format;
use alloc::vec::Vec;

use super::{BlockVariant, Eval, Graph, WeightStore};
use crate::error::{config_err, Result};
use crate::ops::{self, ConvWeights, LEAKY_SLOPE};
use crate::{Scalar, Shape, Tensor};

/// Contrast-aware channel attention: gates each channel by
/// `sigmoid(up(act(down(mean + std))))`.
pub fn cca<T: Scalar, G: Graph<T>>(g: &mut G, prefix: &str, x: &G::Value) -> Result<G::Value> {
    let pooled = g.contrast_pool(x);
    let down = g.conv(&pooled, &format!("{prefix}.down"))?;
    let hidden = g.leaky_relu(&down);
    let up = g.conv(&hidden, &format!("{prefix}.up"))?;
    let gate = g.sigmoid(&up);
    g.scale_channels(x, &gate)
}

/// One body block of any [`BlockVariant`]; the output has the input's shape.
pub fn block<T: Scalar, G: Graph<T>>(g: &mut G, variant: BlockVariant, prefix: &str, x: &G::Value) -> Result<G::Value> {
    let mut distilled = Vec::with_capacity(4);
    let mut trunk = x.clone();
    match variant.distill_kernel() {
        Some(_) => {
            for j in 1..=3 {
                let d = g.conv(&trunk, &format!("{prefix}.distill{j}"))?;
                distilled.push(g.leaky_relu(&d));
                let mut r = g.conv(&trunk, &format!("{prefix}.refine{j}"))?;
                if variant.residual_refine() {
                    r = g.add(&r, &trunk)?;
                }
                trunk = g.leaky_relu(&r);
            }
        }
        None => {
            let tail = g.param(&super::weight_name(&format!("{prefix}.tail")))?;
            let width = g.shape(&tail).n;
            for j in 1..=3 {
                let y = g.conv(&trunk, &format!("{prefix}.split{j}"))?;
                let y = g.leaky_relu(&y);
                let c = g.shape(&y).c;
                if width >= c {
                    return Err(config_err!("{prefix}.split{j} has {c} filters, cannot retain {width}"));
                }
                distilled.push(g.slice_channels(&y, 0..width)?);
                trunk = g.slice_channels(&y, width..c)?;
            }
        }
    }
    let d4 = g.conv(&trunk, &format!("{prefix}.tail"))?;
    distilled.push(g.leaky_relu(&d4));
    let cat = g.concat(&distilled)?;
    let fused = g.conv(&cat, &format!("{prefix}.fuse"))?;
    let attended = cca(g, &format!("{prefix}.cca"), &fused)?;
    g.add(&attended, x)
}

/// Shallow residual block: `act(conv3×3(x) + x)`.
pub fn srb_forward<T: Scalar>(x: &Tensor<T>, w: &ConvWeights<T>) -> Result<Tensor<T>> {
    let c = x.shape().c;
    if w.k() != 3 || w.c_in() != c || w.c_out() != c {
        return Err(config_err!(
            "shallow residual block needs a 3x3 {c}->{c} conv, got {}x{} {}->{}",
            w.k(),
            w.k(),
            w.c_in(),
            w.c_out()
        ));
    }
    let y = ops::conv2d(x, w, 1)?;
    Ok(ops::leaky_relu(&ops::add(&y, x)?, T::of(LEAKY_SLOPE)))
}

/// Channel attention with explicit bottleneck weights.
pub fn cca_forward<T: Scalar>(x: &Tensor<T>, down: &ConvWeights<T>, up: &ConvWeights<T>) -> Result<Tensor<T>> {
    let mut store = WeightStore::new();
    store.set_conv("cca.down", down.clone());
    store.set_conv("cca.up", up.clone());
    cca(&mut Eval::new(&store), "cca", x)
}

/// Residual feature distillation block whose layers live under `prefix` in `weights`.
pub fn rfdb_forward<T: Scalar>(x: &Tensor<T>, weights: &WeightStore<T>, prefix: &str) -> Result<Tensor<T>> {
    block(&mut Eval::new(weights), BlockVariant::Rfdb, prefix, x)
}

/// Coupled progressive-refinement block: each stage's 3×3 output is split into
/// retained (first `distilled` channels) and coarse features.
pub fn imdb_forward<T: Scalar>(x: &Tensor<T>, weights: &WeightStore<T>, prefix: &str) -> Result<Tensor<T>> {
    block(&mut Eval::new(weights), BlockVariant::Imdb, prefix, x)
}

/// Decoupled block with parallel distillation and refinement convolutions per stage.
pub fn imdb_r_forward<T: Scalar>(x: &Tensor<T>, weights: &WeightStore<T>, prefix: &str) -> Result<Tensor<T>> {
    block(&mut Eval::new(weights), BlockVariant::Base, prefix, x)
}

/// Splits a convolution's filters into the first `distilled` (distillation) and
/// the rest (refinement), so `concat(conv(x, dl), conv(x, rl)) == conv(x, layer)`.
pub fn split_decompose<T: Scalar>(layer: &ConvWeights<T>, distilled: usize) -> Result<(ConvWeights<T>, ConvWeights<T>)> {
    let c_out = layer.c_out();
    if distilled == 0 || distilled >= c_out {
        return Err(config_err!("cannot split {c_out} filters at {distilled}"));
    }
    let part = |range: core::ops::Range<usize>| -> Result<ConvWeights<T>> {
        let ks = layer.kernel.shape();
        let per = ks.sample();
        let data = layer.kernel.data()[range.start * per..range.end * per].to_vec();
        let kernel = Tensor::new(Shape::new(range.len(), ks.c, ks.h, ks.w), data)?;
        ConvWeights::new(kernel, layer.bias[range].to_vec())
    };
    Ok((part(0..distilled)?, part(distilled..c_out)?))
}

/// Rewrites every `split{j}` layer of a coupled block under `prefix` into the
/// equivalent `distill{j}` / `refine{j}` pair of the decoupled form.
pub fn decouple_block<T: Scalar>(weights: &WeightStore<T>, prefix: &str) -> Result<WeightStore<T>> {
    let distilled = weights.conv(&format!("{prefix}.tail"))?.c_out();
    let mut out = WeightStore::new();
    for (name, t) in weights {
        if !name.starts_with(&format!("{prefix}.split")) {
            out.insert(name.clone(), t.clone());
        }
    }
    for j in 1..=3 {
        let (dl, rl) = split_decompose(&weights.conv(&format!("{prefix}.split{j}"))?, distilled)?;
        out.set_conv(&format!("{prefix}.distill{j}"), dl);
        out.set_conv(&format!("{prefix}.refine{j}"), rl);
    }
    Ok(out)
}
