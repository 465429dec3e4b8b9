//! Network building blocks, the full model graph and complexity counters.

mod blocks;
mod complexity;
mod config;
mod graph;
mod layout;
mod model;
mod weights;

pub use blocks::{
    block, cca, cca_forward, decouple_block, imdb_forward, imdb_r_forward, rfdb_forward, split_decompose, srb_forward,
};
pub use complexity::{count_mult_adds, count_params};
pub use config::ModelConfig;
pub use graph::{Eval, Graph};
pub use layout::{block_layers, block_prefix, model_layers, BlockVariant, LayerSpec};
pub use model::{build_rfdn, build_variant, Rfdn};
pub use weights::{bias_name, weight_name, WeightStore};

/// Random weights for a single block under `prefix` (for block-level tests and tools).
pub fn init_block<T: crate::Scalar>(
    variant: BlockVariant,
    channels: usize,
    distilled: usize,
    prefix: &str,
    seed: u64,
) -> WeightStore<T> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut store = WeightStore::new();
    for layer in block_layers(variant, channels, distilled, (channels / 16).max(1), prefix) {
        model::init_layer(&mut store, &layer, &mut rng);
    }
    store
}
