use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::arch::WeightStore;
use crate::error::{shape_err, Result};
use crate::{Scalar, Tensor};

/// Moment estimates for Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T: Scalar = f32> {
    pub m: BTreeMap<String, Tensor<T>>,
    pub v: BTreeMap<String, Tensor<T>>,
    /// Completed update steps.
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl<T: Scalar> Default for AdamState<T> {
    fn default() -> Self {
        Self::new(0.9, 0.999, 1e-8)
    }
}

impl<T: Scalar> AdamState<T> {
    pub fn new(beta1: f64, beta2: f64, eps: f64) -> Self {
        Self { m: BTreeMap::new(), v: BTreeMap::new(), t: 0, beta1, beta2, eps }
    }
}

/// One Adam update of every parameter that has a gradient.
///
/// `m ← β₁m + (1−β₁)g`, `v ← β₂v + (1−β₂)g²`, `θ ← θ − lr·m̂/(√v̂ + ε)` with
/// `m̂ = m/(1−β₁ᵗ)` and `v̂ = v/(1−β₂ᵗ)`.
pub fn adam_step<T: Scalar>(
    params: &mut WeightStore<T>,
    grads: &BTreeMap<String, Tensor<T>>,
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    for (name, g) in grads {
        let p = params.get(name).ok_or_else(|| super::missing_param(name))?;
        if p.shape() != g.shape() {
            return Err(shape_err!("gradient for {name} is {}, parameter is {}", g.shape(), p.shape()));
        }
    }
    state.t += 1;
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let (b1, b2) = (T::of(state.beta1), T::of(state.beta2));
    let c1 = T::of(1.0 - state.beta1.powi(t));
    let c2 = T::of(1.0 - state.beta2.powi(t));
    let (lr, eps) = (T::of(lr), T::of(state.eps));
    for (name, g) in grads {
        let p = params.get_mut(name).expect("checked above");
        let m = state.m.entry(name.clone()).or_insert_with(|| Tensor::zeros(g.shape()));
        let v = state.v.entry(name.clone()).or_insert_with(|| Tensor::zeros(g.shape()));
        let it = p.data_mut().iter_mut().zip(m.data_mut()).zip(v.data_mut()).zip(g.data());
        for (((p, m), v), &g) in it {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Shape;
    use alloc::vec;

    fn scalar_store(v: f64) -> WeightStore<f64> {
        let mut s = WeightStore::new();
        s.insert("theta", Tensor::new(Shape::new(1, 1, 1, 1), vec![v]).unwrap());
        s
    }

    fn grad(g: f64) -> BTreeMap<String, Tensor<f64>> {
        let mut m = BTreeMap::new();
        m.insert("theta".into(), Tensor::new(Shape::new(1, 1, 1, 1), vec![g]).unwrap());
        m
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = scalar_store(0.0);
        let mut st = AdamState::default();
        adam_step(&mut p, &grad(0.5), &mut st, 1e-3).unwrap();
        let moved = p.get("theta").unwrap().data()[0];
        assert!((moved + 1e-3).abs() < 1e-10, "{moved}");
        assert_eq!(st.t, 1);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut p = scalar_store(0.7);
        let mut st = AdamState::default();
        for _ in 0..3 {
            adam_step(&mut p, &grad(0.0), &mut st, 1e-2).unwrap();
        }
        assert_eq!(p.get("theta").unwrap().data()[0], 0.7);
        assert_eq!(st.t, 3);
        assert!(st.v["theta"].data()[0] >= 0.0);
    }

    #[test]
    fn descends_absolute_value() {
        let mut p = scalar_store(1.0);
        let mut st = AdamState::default();
        let mut prev = 1.0;
        for _ in 0..3 {
            let theta = p.get("theta").unwrap().data()[0];
            let g = if theta > 0.0 { 1.0 } else { -1.0 };
            adam_step(&mut p, &grad(g), &mut st, 0.1).unwrap();
            let now = p.get("theta").unwrap().data()[0];
            assert!(now < prev);
            prev = now;
        }
    }
}
