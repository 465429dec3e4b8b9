//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria that need external data (Set5) report FAIL with the reason when
//! the data is absent; they fail the test only when the data is present and
//! the numbers are off.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfdn::commands::{cmd_eval, EvalArgs, ModelArgs};
use rfdn::weightfile::{parse_weights, write_weights};
use rfdn_core::arch::{
    block, build_rfdn, build_variant, decouple_block, imdb_forward, imdb_r_forward, init_block, rfdb_forward,
    BlockVariant, Eval, ModelConfig, WeightStore,
};
use rfdn_core::autograd::{l1_loss, train_loop, LrSchedule, Tape, TrainConfig, Var};
use rfdn_core::data::{bicubic_upscale, degrade, quantize};
use rfdn_core::metrics::{psnr, psnr_y, ssim};
use rfdn_core::ops::{conv2d, conv2d_naive, pixel_shuffle, pixel_unshuffle, ConvWeights, LEAKY_SLOPE};
use rfdn_core::{Shape, Tensor};

type Check = Result<(), String>;

enum Outcome {
    Pass,
    Fail(String),
    Missing(String),
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome, String>) -> Outcome {
    let start = Instant::now();
    let outcome = match f() {
        Ok(Outcome::Pass) if start.elapsed() > limit => {
            Outcome::Fail(format!("took {:.1}s, limit {}s", start.elapsed().as_secs_f64(), limit.as_secs()))
        }
        Ok(o) => o,
        Err(e) => Outcome::Fail(e),
    };
    let t = start.elapsed().as_secs_f64();
    match &outcome {
        Outcome::Pass => println!("PASS [{id}] {name} ({t:.2}s)"),
        Outcome::Fail(why) => println!("FAIL [{id}] {name} ({t:.2}s): {why}"),
        Outcome::Missing(why) => println!("FAIL [{id}] {name} ({t:.2}s): {why}"),
    }
    outcome
}

fn pass(c: Check) -> Result<Outcome, String> {
    c.map(|_| Outcome::Pass)
}

fn rand_f64(seed: u64, shape: Shape) -> Tensor<f64> {
    oracle::random_tensor(&mut ChaCha8Rng::seed_from_u64(seed), shape, -1.0, 1.0)
}

fn conv_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = [1, 3, 5][rng.random_range(0..3)];
        let pad = rng.random_range(0..=k / 2);
        let side = (k - 2 * pad).max(1);
        let shape = Shape::new(
            rng.random_range(1..=2),
            rng.random_range(1..=8),
            rng.random_range(side..=9),
            rng.random_range(side..=9),
        );
        let c_out = rng.random_range(1..=8);
        let x = oracle::random_tensor(&mut rng, shape, -1.0, 1.0);
        let kernel = oracle::random_tensor(&mut rng, Shape::new(c_out, shape.c, k, k), -1.0, 1.0);
        let bias: Vec<f64> = (0..c_out).map(|_| rng.random_range(-1.0..1.0)).collect();
        let expect = oracle::conv(&x, &kernel, &bias, pad);
        let w = ConvWeights::new(kernel, bias).map_err(|e| e.to_string())?;
        let fast = conv2d(&x.cast::<f32>(), &w.cast(), pad).map_err(|e| e.to_string())?;
        worst = worst.max(fast.cast::<f64>().max_abs_diff(&expect).ok_or("shape mismatch")?);
        let naive = conv2d_naive(&x, &w, pad).map_err(|e| e.to_string())?;
        ensure(naive.max_abs_diff(&expect).unwrap() < 1e-12, || "naive path disagrees with oracle".into())?;
    }
    ensure(worst < 1e-5, || format!("max abs diff {worst:e}"))
}

fn imdb_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    for draw in 0..50u64 {
        let (c, d) = if draw % 2 == 0 { (8, 4) } else { (12, 3) };
        let coupled = init_block::<f32>(BlockVariant::Imdb, c, d, "b", 500 + draw);
        let decoupled = decouple_block(&coupled, "b").map_err(|e| e.to_string())?;
        let x = rand_f64(600 + draw, Shape::new(1, c, 7, 6)).cast();
        let a = imdb_forward(&x, &coupled, "b").map_err(|e| e.to_string())?;
        let b = imdb_r_forward(&x, &decoupled, "b").map_err(|e| e.to_string())?;
        worst = worst.max(a.max_abs_diff(&b).unwrap());
    }
    ensure(worst < 1e-6, || format!("max abs diff {worst:e}"))
}

const FD_STEP: f64 = 1e-6;
const FD_FLOOR: f64 = 1e-6;

/// Worst relative error between tape and finite-difference gradients of
/// `l1(f(inputs), target)` over every input.
fn grad_error(inputs: &[Tensor<f64>], seed: u64, f: impl Fn(&mut Tape<f64>, &[Var]) -> Var) -> f64 {
    let mut probe = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| probe.leaf(t.clone())).collect();
    let out = f(&mut probe, &vars);
    let target = rand_f64(seed, probe.value(out).shape());
    let loss_of = |values: &[Tensor<f64>]| {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = f(&mut tape, &vars);
        l1_loss(tape.value(out), &target).unwrap()
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars);
    let t = tape.leaf(target.clone());
    let loss = tape.l1_loss(out, t).unwrap();
    let grads = tape.backward(loss).unwrap();
    let mut worst: f64 = 0.0;
    for (i, input) in inputs.iter().enumerate() {
        assert!(input.numel() <= 200);
        let numeric = oracle::numeric_grad(input, FD_STEP, |x| {
            let mut values = inputs.to_vec();
            values[i] = x.clone();
            loss_of(&values)
        });
        worst = worst.max(oracle::max_rel_err(grads.wrt(vars[i]).unwrap(), &numeric, FD_FLOOR));
    }
    worst
}

fn gradients() -> Check {
    let r = |seed, n, c, h, w| rand_f64(seed, Shape::new(n, c, h, w));
    let (a, b, c3) = (r(1, 1, 2, 3, 5), r(2, 1, 2, 3, 5), r(3, 1, 3, 3, 5));
    let cases: Vec<(&str, f64)> = vec![
        ("conv pad 1", grad_error(&[r(4, 2, 2, 5, 4), r(5, 3, 2, 3, 3), r(6, 3, 1, 1, 1)], 7, |t, v| {
            t.conv2d(v[0], v[1], v[2], 1).unwrap()
        })),
        ("conv pad 0", grad_error(&[r(8, 1, 4, 4, 4), r(9, 2, 4, 1, 1), r(10, 2, 1, 1, 1)], 11, |t, v| {
            t.conv2d(v[0], v[1], v[2], 0).unwrap()
        })),
        ("leaky relu", grad_error(&[r(12, 2, 3, 4, 4)], 13, |t, v| t.leaky_relu(v[0], LEAKY_SLOPE))),
        ("sigmoid", grad_error(&[r(14, 2, 3, 4, 4).map(|v| 4.0 * v)], 15, |t, v| t.sigmoid(v[0]))),
        ("add", grad_error(&[a.clone(), b.clone()], 16, |t, v| t.add(v[0], v[1]).unwrap())),
        ("concat", grad_error(&[a.clone(), c3.clone(), b], 17, |t, v| t.concat(&[v[0], v[1], v[2]]).unwrap())),
        ("slice", grad_error(&[c3], 18, |t, v| t.slice_channels(v[0], 1, 3).unwrap())),
        ("pixel shuffle", grad_error(&[r(19, 1, 12, 3, 4)], 20, |t, v| t.pixel_shuffle(v[0], 2).unwrap())),
        ("channel scale", grad_error(&[r(21, 2, 3, 4, 4), r(22, 2, 3, 1, 1)], 23, |t, v| {
            t.scale_channels(v[0], v[1]).unwrap()
        })),
        ("contrast pool", grad_error(&[r(24, 2, 3, 4, 4)], 25, |t, v| t.contrast_pool(v[0]))),
        ("l1 loss", grad_error(&[a, r(26, 1, 2, 3, 5)], 27, |t, v| t.l1_loss(v[0], v[1]).unwrap())),
    ];
    for (name, err) in cases {
        ensure(err < 1e-3, || format!("{name}: relative error {err:e}"))?;
    }

    let weights = init_block::<f64>(BlockVariant::Rfdb, 4, 2, "b", 28);
    let x = r(29, 1, 4, 5, 5);
    let target = r(30, 1, 4, 5, 5);
    let loss_of = |w: &WeightStore<f64>, x: &Tensor<f64>| {
        let y = block(&mut Eval::new(w), BlockVariant::Rfdb, "b", x).unwrap();
        l1_loss(&y, &target).unwrap()
    };
    let mut tape = Tape::with_params(&weights);
    let xv = tape.leaf(x.clone());
    let y = block(&mut tape, BlockVariant::Rfdb, "b", &xv).map_err(|e| e.to_string())?;
    let tv = tape.leaf(target.clone());
    let loss = tape.l1_loss(y, tv).unwrap();
    let grads = tape.backward(loss).unwrap();
    let numeric = oracle::numeric_grad(&x, FD_STEP, |x| loss_of(&weights, x));
    let err = oracle::max_rel_err(grads.wrt(xv).unwrap(), &numeric, FD_FLOOR);
    ensure(err < 1e-3, || format!("rfdb input: relative error {err:e}"))?;
    for (name, value) in &weights {
        let numeric = oracle::numeric_grad(value, FD_STEP, |p| {
            let mut w = weights.clone();
            *w.get_mut(name).unwrap() = p.clone();
            loss_of(&w, &x)
        });
        let err = oracle::max_rel_err(grads.param(name).unwrap(), &numeric, FD_FLOOR);
        ensure(err < 1e-3, || format!("rfdb {name}: relative error {err:e}"))?;
    }
    Ok(())
}

fn param_counts() -> Check {
    let count = |variant, scale, channels| {
        build_variant(variant, ModelConfig::new(scale, channels, 6, 0.5).unwrap()).unwrap().count_params()
    };
    let within = |n: usize, published: f64| (n as f64 - published).abs() <= 0.02 * published;
    for (channels, published) in [(48, [534e3, 541e3, 550e3]), (52, [626e3, 633e3, 643e3])] {
        for (scale, p) in [2, 3, 4].into_iter().zip(published) {
            let n = count(BlockVariant::Rfdb, scale, channels);
            ensure(within(n, p), || format!("{channels} ch x{scale}: {n} vs {p}"))?;
        }
    }
    let delta = count(BlockVariant::Rfdb, 4, 48) - count(BlockVariant::Rfdb, 2, 48);
    ensure(delta == 15_588, || format!("x4 - x2 delta {delta}"))?;
    let base = count(BlockVariant::Base, 4, 48);
    let srb = count(BlockVariant::SrbOnly, 4, 48);
    ensure(base == srb, || format!("base {base} != srb {srb}"))?;
    let fdc = count(BlockVariant::FdcOnly, 4, 48);
    let rfdb = count(BlockVariant::Rfdb, 4, 48);
    ensure(fdc == rfdb, || format!("fdc {fdc} != rfdb {rfdb}"))
}

fn set5_dir() -> PathBuf {
    std::env::var_os("RFDN_SET5_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/Set5"))
}

fn bicubic_baseline() -> Result<Outcome, String> {
    let dir = set5_dir();
    if !dir.is_dir() {
        return Ok(Outcome::Missing(format!(
            "Set5 not found at {} (set RFDN_SET5_DIR to the HR images)",
            dir.display()
        )));
    }
    for (scale, want_psnr, want_ssim) in [(2, 33.66, 0.9299), (3, 30.39, 0.8682), (4, 28.42, 0.8104)] {
        let args = EvalArgs {
            weights: None,
            bicubic: true,
            hr_dir: dir.clone(),
            scale,
            shave: None,
            model: ModelArgs::default(),
        };
        let report = cmd_eval(&args, &mut std::io::sink()).map_err(|e| e.to_string())?;
        let (p, s) = report.mean();
        ensure((p - want_psnr).abs() <= 0.10 && (s - want_ssim).abs() <= 0.002, || {
            format!("x{scale}: {p:.4} dB / {s:.4}, expected {want_psnr} / {want_ssim}")
        })?;
    }
    Ok(Outcome::Pass)
}

/// Smooth synthetic scene: oriented waves, a disc and a bar pattern.
fn scene(side: usize) -> Tensor<f32> {
    Tensor::from_fn(Shape::new(1, 3, side, side), |_, c, y, x| {
        let (fy, fx) = (y as f32, x as f32);
        let waves = 40.0 * (fx * 0.21 + fy * 0.07 + c as f32).sin() + 25.0 * (fy * 0.33 - fx * 0.11).cos();
        let disc = if (fx - 70.0).powi(2) + (fy - 50.0).powi(2) < 900.0 { 60.0 } else { 0.0 };
        let bars = if (x / 6) % 2 == 0 && y > 90 { 45.0 } else { 0.0 };
        (110.0 + 20.0 * c as f32 + waves + disc + bars).clamp(0.0, 255.0).round()
    })
}

fn training_smoke() -> Check {
    let pair = degrade("scene", &scene(128), 2).map_err(|e| e.to_string())?;
    let (model, init) = build_rfdn::<f32>(ModelConfig::rfdn(2).unwrap(), 0).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { batch: 8, patch: 32, steps: 500, ..Default::default() };
    let out = train_loop(&model, init, std::slice::from_ref(&pair), &cfg, |_| {}).map_err(|e| e.to_string())?;
    let smoothed = |step: usize| out.losses[step - 10..step].iter().sum::<f64>() / 10.0;
    let (early, late) = (smoothed(10), smoothed(500));
    ensure(late < 0.5 * early, || format!("smoothed loss {late:.4} at 500 vs {early:.4} at 10"))?;
    let lr = quantize(&pair.lr);
    let sr = model.super_resolve(&out.weights, &lr).map_err(|e| e.to_string())?;
    let bic = bicubic_upscale(&lr, 2).map_err(|e| e.to_string())?;
    let sr_db = psnr_y(&sr, &pair.hr, 2).map_err(|e| e.to_string())?;
    let bic_db = psnr_y(&bic, &pair.hr, 2).map_err(|e| e.to_string())?;
    println!("    smoke: loss {early:.4} -> {late:.4}, sr {sr_db:.2} dB, bicubic {bic_db:.2} dB");
    ensure(sr_db >= bic_db + 0.5, || format!("sr {sr_db:.2} dB vs bicubic {bic_db:.2} dB"))
}

fn determinism() -> Check {
    let pair = degrade("scene", &scene(64), 2).map_err(|e| e.to_string())?;
    let (model, init) = build_rfdn::<f32>(ModelConfig::new(2, 16, 2, 0.5).unwrap(), 4).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { batch: 2, patch: 16, steps: 10, seed: 99, ..Default::default() };
    let session = || -> Result<(Vec<u64>, Vec<u8>), String> {
        let out = train_loop(&model, init.clone(), std::slice::from_ref(&pair), &cfg, |_| {}).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        write_weights(&mut bytes, &out.weights).map_err(|e| e.to_string())?;
        Ok((out.losses.iter().map(|l| l.to_bits()).collect(), bytes))
    };
    let (losses_a, bytes_a) = session()?;
    let (losses_b, bytes_b) = session()?;
    ensure(losses_a == losses_b, || "loss traces differ".into())?;
    ensure(bytes_a == bytes_b, || "weight files differ".into())?;
    let parsed = parse_weights(&bytes_a).map_err(|e| e.to_string())?;
    let mut again = Vec::new();
    write_weights(&mut again, &parsed).map_err(|e| e.to_string())?;
    ensure(again == bytes_a, || "round trip changed the bytes".into())?;
    model.check_weights(&parsed).map_err(|e| e.to_string())
}

fn invariants() -> Check {
    let zero: WeightStore<f32> = init_block::<f32>(BlockVariant::Rfdb, 48, 24, "b", 0)
        .iter()
        .map(|(k, v)| (k.clone(), Tensor::zeros(v.shape())))
        .collect();
    let x: Tensor<f32> = rand_f64(31, Shape::new(1, 48, 8, 8)).cast();
    ensure(rfdb_forward(&x, &zero, "b").map_err(|e| e.to_string())? == x, || "zero RFDB is not the identity".into())?;

    for r in [2, 3, 4] {
        let t = Tensor::<f32>::from_fn(Shape::new(2, 3 * r * r, 3, 4), |n, c, y, x| (((n * 97 + c) * 13 + y) * 7 + x) as f32);
        let up = pixel_shuffle(&t, r).map_err(|e| e.to_string())?;
        ensure(pixel_unshuffle(&up, r).map_err(|e| e.to_string())? == t, || format!("shuffle x{r} is not invertible"))?;
        let mut seen: Vec<u32> = up.data().iter().map(|v| v.to_bits()).collect();
        seen.sort_unstable();
        seen.dedup();
        ensure(seen.len() == t.numel(), || format!("shuffle x{r} is not a permutation"))?;
    }

    let a = oracle::random_tensor(&mut ChaCha8Rng::seed_from_u64(32), Shape::new(1, 1, 24, 24), 0.0, 255.0);
    let b = oracle::random_tensor(&mut ChaCha8Rng::seed_from_u64(33), Shape::new(1, 1, 24, 24), 0.0, 255.0);
    let same = ssim(&a, &a).map_err(|e| e.to_string())?;
    ensure(same == 1.0, || format!("SSIM(x, x) = {same}"))?;
    let (ab, ba) = (psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    ensure(ab == ba, || format!("PSNR asymmetric: {ab} vs {ba}"))?;

    let s = LrSchedule::default();
    let steps = [(0, 5e-4), (199_999, 5e-4), (200_000, 2.5e-4), (399_999, 2.5e-4), (400_000, 1.25e-4)];
    for (step, want) in steps {
        ensure(s.lr_at(step) == want, || format!("lr at {step} is {}", s.lr_at(step)))?;
    }
    Ok(())
}

fn main() {
    let secs = Duration::from_secs;
    let outcomes = [
        run(1, "convolution fast path matches oracle", secs(10), || pass(conv_oracle())),
        run(2, "IMDB and IMDB-R blocks agree", secs(30), || pass(imdb_equivalence())),
        run(3, "gradients match finite differences", secs(120), || pass(gradients())),
        run(4, "parameter counts", secs(1), || pass(param_counts())),
        run(5, "bicubic baseline on Set5", secs(60), bicubic_baseline),
        run(6, "training smoke test", secs(600), || pass(training_smoke())),
        run(7, "determinism and weight file round trip", secs(60), || pass(determinism())),
        run(8, "invariants", secs(60), || pass(invariants())),
    ];
    let failed: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| matches!(o, Outcome::Fail(_)))
        .map(|(i, _)| i + 1)
        .collect();
    let missing = outcomes.iter().filter(|o| matches!(o, Outcome::Missing(_))).count();
    println!("{} passed, {} failed, {} without data", 8 - failed.len() - missing, failed.len(), missing);
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
