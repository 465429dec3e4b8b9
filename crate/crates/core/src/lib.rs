//! Residual feature distillation network for single-image super-resolution.
//!
//! Everything here is pure computation over in-memory tensors: the NCHW
//! [`Tensor`] and its kernels ([`ops`]), reverse-mode training ([`autograd`]),
//! the network blocks and complexity counters ([`arch`]), Y-channel quality
//! metrics ([`metrics`]) and patch sampling ([`data`]). File formats and the
//! command-line tool live in the `rfdn` crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

mod error;
mod scalar;
mod tensor;

pub mod arch;
pub mod autograd;
pub mod data;
pub mod metrics;
pub mod ops;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{Shape, Tensor};
