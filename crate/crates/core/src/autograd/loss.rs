use crate::error::{shape_err, Result};
use crate::{Scalar, Tensor};

/// Mean absolute difference over every element.
pub fn l1_loss<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<T> {
    if pred.shape() != target.shape() {
        return Err(shape_err!("l1 operands differ: {} vs {}", pred.shape(), target.shape()));
    }
    let total: f64 = pred.data().iter().zip(target.data()).map(|(&a, &b)| (a - b).abs().as_f64()).sum();
    Ok(T::of(total / pred.numel().max(1) as f64))
}
