use alloc::vec::Vec;

use crate::error::{shape_err, Result};
use crate::{Scalar, Shape, Tensor};

/// `max(x, slope·x)` for `slope ∈ [0, 1)`.
pub fn leaky_relu<T: Scalar>(x: &Tensor<T>, slope: T) -> Tensor<T> {
    debug_assert!(slope >= T::zero() && slope < T::one());
    x.map(|v| if v > T::zero() { v } else { v * slope })
}

pub fn add<T: Scalar>(x: &Tensor<T>, y: &Tensor<T>) -> Result<Tensor<T>> {
    x.zip_map(y, |a, b| a + b)
}

pub fn sigmoid<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(sigmoid_scalar)
}

fn sigmoid_scalar<T: Scalar>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

/// Multiplies every plane `(n, c)` of `x` by the gate `s[n, c]`, with `s` shaped `(n, c, 1, 1)`.
pub fn scale_channels<T: Scalar>(x: &Tensor<T>, s: &Tensor<T>) -> Result<Tensor<T>> {
    let (xs, ss) = (x.shape(), s.shape());
    if ss != Shape::new(xs.n, xs.c, 1, 1) {
        return Err(shape_err!("channel gate {ss} does not match {xs}"));
    }
    let mut out = x.clone();
    for n in 0..xs.n {
        for c in 0..xs.c {
            let g = s.at(n, c, 0, 0);
            out.plane_mut(n, c).iter_mut().for_each(|v| *v *= g);
        }
    }
    Ok(out)
}

/// Concatenates along channels, in argument order.
pub fn concat_channels<T: Scalar>(xs: &[&Tensor<T>]) -> Result<Tensor<T>> {
    let first = xs.first().ok_or_else(|| shape_err!("concat of zero tensors"))?.shape();
    let mut c = 0;
    for t in xs {
        let s = t.shape();
        if (s.n, s.h, s.w) != (first.n, first.h, first.w) {
            return Err(shape_err!("cannot concat {s} with {first}"));
        }
        c += s.c;
    }
    let out_shape = first.with_c(c);
    let mut data = Vec::with_capacity(out_shape.numel());
    for n in 0..first.n {
        for t in xs {
            data.extend_from_slice(t.sample_data(n));
        }
    }
    Tensor::new(out_shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn leaky_relu_values() {
        let x = Tensor::new(Shape::new(1, 1, 1, 3), vec![2.0f32, -1.0, 0.0]).unwrap();
        let y = leaky_relu(&x, 0.05);
        assert_eq!(y.data(), &[2.0, -0.05, 0.0]);
    }

    #[test]
    fn add_identities() {
        let x = Tensor::<f32>::from_fn(Shape::new(2, 3, 2, 2), |n, c, y, x| (n * 7 + c * 3 + y * 2 + x) as f32 - 6.5);
        let zero = Tensor::zeros(x.shape());
        assert_eq!(add(&x, &zero).unwrap(), x);
        assert_eq!(add(&x, &x.map(|v| -v)).unwrap(), zero);
        assert!(add(&x, &Tensor::zeros(Shape::new(1, 3, 2, 2))).is_err());
    }

    #[test]
    fn concat_orders_and_slices_back() {
        let parts: Vec<Tensor<f32>> = (0..4)
            .map(|i| Tensor::from_fn(Shape::new(1, 24, 4, 4), |_, c, y, x| (i * 1000 + c * 16 + y * 4 + x) as f32))
            .collect();
        let refs: Vec<&Tensor<f32>> = parts.iter().collect();
        let cat = concat_channels(&refs).unwrap();
        assert_eq!(cat.shape(), Shape::new(1, 96, 4, 4));
        assert_eq!(cat.slice_channels(0..24).unwrap(), parts[0]);
        assert_eq!(cat.slice_channels(72..96).unwrap(), parts[3]);
        assert_eq!(concat_channels(&[&parts[1]]).unwrap(), parts[1]);
        let odd = Tensor::<f32>::zeros(Shape::new(1, 2, 4, 5));
        assert!(concat_channels(&[&parts[0], &odd]).is_err());
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        let x = Tensor::new(Shape::new(1, 1, 1, 3), vec![-1000.0f32, 0.0, 1000.0]).unwrap();
        assert_eq!(sigmoid(&x).data(), &[0.0, 0.5, 1.0]);
    }
}
