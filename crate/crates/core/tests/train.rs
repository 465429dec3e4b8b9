use rfdn_core::arch::{build_rfdn, ModelConfig};
use rfdn_core::autograd::{lr_at, train_loop, LrSchedule, TrainConfig, TrainEvent};
use rfdn_core::data::{degrade, ImagePair};
use rfdn_core::{Shape, Tensor};

fn scene(side: usize) -> Tensor<f32> {
    Tensor::from_fn(Shape::new(1, 3, side, side), |_, c, y, x| {
        let (fy, fx) = (y as f32, x as f32);
        (120.0 + 50.0 * (0.3 * fx + 0.1 * fy + c as f32).sin() + 30.0 * (0.45 * fy).cos()).round()
    })
}

fn pairs() -> Vec<ImagePair> {
    vec![degrade("scene", &scene(64), 2).unwrap()]
}

fn small() -> ModelConfig {
    ModelConfig::new(2, 16, 2, 0.5).unwrap()
}

#[test]
fn zero_steps_returns_initialization() {
    let (model, init) = build_rfdn::<f32>(small(), 9).unwrap();
    let cfg = TrainConfig { steps: 0, ..Default::default() };
    let out = train_loop(&model, init.clone(), &pairs(), &cfg, |_| panic!("no events expected")).unwrap();
    assert_eq!(out.weights, init);
    assert!(out.losses.is_empty());
}

#[test]
fn equal_seeds_give_identical_traces() {
    let (model, init) = build_rfdn::<f32>(small(), 1).unwrap();
    let cfg = TrainConfig { batch: 2, patch: 12, steps: 4, seed: 17, ..Default::default() };
    let a = train_loop(&model, init.clone(), &pairs(), &cfg, |_| {}).unwrap();
    let b = train_loop(&model, init.clone(), &pairs(), &cfg, |_| {}).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.losses), bits(&b.losses));
    assert_eq!(a.weights, b.weights);
    let c = train_loop(&model, init, &pairs(), &TrainConfig { seed: 18, ..cfg }, |_| {}).unwrap();
    assert_ne!(bits(&a.losses), bits(&c.losses));
}

#[test]
fn events_follow_the_schedule() {
    let (model, init) = build_rfdn::<f32>(small(), 2).unwrap();
    let schedule = LrSchedule { initial: 1e-3, half_life: 2 };
    let cfg = TrainConfig { batch: 1, patch: 8, steps: 5, schedule, checkpoint_every: 2, ..Default::default() };
    let (mut lrs, mut checkpoints) = (Vec::new(), Vec::new());
    train_loop(&model, init, &pairs(), &cfg, |e| match e {
        TrainEvent::Step { lr, .. } => lrs.push(lr),
        TrainEvent::Checkpoint { step, weights } => checkpoints.push((step, weights.len())),
    })
    .unwrap();
    assert_eq!(lrs, [1e-3, 1e-3, 5e-4, 5e-4, 2.5e-4]);
    assert_eq!(checkpoints.iter().map(|c| c.0).collect::<Vec<_>>(), [2, 4]);
    assert!((0..10).all(|s| lr_at(&schedule, s + 1) <= lr_at(&schedule, s)));
}

#[test]
fn rejects_bad_datasets() {
    let (model, init) = build_rfdn::<f32>(small(), 0).unwrap();
    let cfg = TrainConfig { batch: 1, patch: 8, steps: 1, ..Default::default() };
    assert!(train_loop(&model, init.clone(), &[], &cfg, |_| {}).is_err());
    let wrong_scale = vec![degrade("x3", &scene(48), 3).unwrap()];
    assert!(train_loop(&model, init.clone(), &wrong_scale, &cfg, |_| {}).is_err());
    let tiny = TrainConfig { patch: 64, ..cfg };
    assert!(train_loop(&model, init, &pairs(), &tiny, |_| {}).is_err());
}

#[test]
fn overfits_a_single_image() {
    let (model, init) = build_rfdn::<f32>(small(), 3).unwrap();
    let cfg = TrainConfig { batch: 4, patch: 16, steps: 200, seed: 5, ..Default::default() };
    let out = train_loop(&model, init, &pairs(), &cfg, |_| {}).unwrap();
    let initial = out.losses[0];
    let last: f64 = out.losses[190..].iter().sum::<f64>() / 10.0;
    assert!(last < 0.5 * initial, "initial {initial}, final {last}");
}
