//! Loss, the RMSProp optimizer, the training loop, ablation-variant
//! construction, and finite-difference gradient verification.

use serde::{Deserialize, Serialize};

use crate::backward::{backward, GradientSet};
use crate::error::{Error, Result};
use crate::model::{model_forward, Ablation, FourierGnnModel, MtsWindow};
use crate::rng::Rng;

/// Mean of squared elementwise differences over an (N, tau) pair.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::shape("mse_loss expects equal non-empty shapes"));
    }
    let sum: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub rmsprop_decay: f64,
    pub rmsprop_eps: f64,
    pub seed: u64,
    pub ablation: Ablation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-5,
            epochs: 100,
            batch_size: 4,
            rmsprop_decay: 0.9,
            rmsprop_eps: 1e-8,
            seed: 42,
            ablation: Ablation::Full,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate must be finite and >= 0"));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch size must be >= 1"));
        }
        if !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0) {
            return Err(Error::invalid("rmsprop decay must be in (0, 1)"));
        }
        if self.rmsprop_eps <= 0.0 {
            return Err(Error::invalid("rmsprop eps must be positive"));
        }
        Ok(())
    }
}

/// Per-parameter running mean of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct RmspropState {
    pub mean_sq: GradientSet,
}

impl RmspropState {
    pub fn zeros_like(model: &FourierGnnModel) -> Self {
        RmspropState {
            mean_sq: GradientSet::zeros_like(model),
        }
    }
}

/// Elementwise update: state <- decay*state + (1-decay)*g^2;
/// param <- param - lr*g / (sqrt(state) + eps).
pub fn rmsprop_apply(
    params: &mut [f64],
    grads: &[f64],
    state: &mut [f64],
    lr: f64,
    decay: f64,
    eps: f64,
) {
    for ((p, &g), s) in params.iter_mut().zip(grads.iter()).zip(state.iter_mut()) {
        *s = decay * *s + (1.0 - decay) * g * g;
        *p -= lr * g / (s.sqrt() + eps);
    }
}

/// One optimizer step over every model tensor.
pub fn rmsprop_step(
    model: &mut FourierGnnModel,
    grads: &GradientSet,
    state: &mut RmspropState,
    lr: f64,
    decay: f64,
    eps: f64,
) {
    let mut params = model.tensor_views_mut();
    let grad_views = grads.tensor_views();
    let mut state_views = state.mean_sq.tensor_views_mut();
    debug_assert_eq!(params.len(), grad_views.len());
    for (((pname, p), (gname, g)), (_, s)) in params
        .iter_mut()
        .zip(grad_views.iter())
        .zip(state_views.iter_mut())
    {
        debug_assert_eq!(pname, gname);
        rmsprop_apply(p, g, s, lr, decay, eps);
    }
}

/// Mean forward MSE over a set of windows.
pub fn mean_mse(model: &FourierGnnModel, windows: &[MtsWindow]) -> Result<f64> {
    if windows.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty window set"));
    }
    let mut total = 0.0;
    for w in windows {
        let pred = model_forward(model, w)?;
        total += mse_loss(&pred, &w.target)?;
    }
    Ok(total / windows.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Parameters after the final epoch.
    pub model: FourierGnnModel,
    /// Checkpoint with the lowest validation MSE.
    pub best_model: FourierGnnModel,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub trace: Vec<EpochStats>,
}

/// Epoch loop over shuffled batches; returns the lowest-validation-MSE
/// checkpoint alongside the final parameters. Deterministic given the seed.
pub fn fit(
    model: FourierGnnModel,
    train_windows: &[MtsWindow],
    val_windows: &[MtsWindow],
    config: &TrainConfig,
) -> Result<FitResult> {
    config.validate()?;
    if train_windows.is_empty() || val_windows.is_empty() {
        return Err(Error::invalid("fit needs non-empty train and val splits"));
    }
    let mut model = model;
    let mut state = RmspropState::zeros_like(&model);
    let mut rng = Rng::new(config.seed);
    let mut order: Vec<usize> = (0..train_windows.len()).collect();

    let mut trace = Vec::with_capacity(config.epochs);
    let mut best_model = model.clone();
    let mut best_val_mse = f64::INFINITY;
    let mut best_epoch = 0;

    for epoch in 1..=config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&MtsWindow> = chunk.iter().map(|&i| &train_windows[i]).collect();
            let (loss, grads) = backward(&model, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            epoch_loss += loss * batch.len() as f64;
            seen += batch.len();
            rmsprop_step(
                &mut model,
                &grads,
                &mut state,
                config.learning_rate,
                config.rmsprop_decay,
                config.rmsprop_eps,
            );
        }
        let train_mse = epoch_loss / seen as f64;
        let val_mse = mean_mse(&model, val_windows)?;
        if !val_mse.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: val_mse,
            });
        }
        if val_mse < best_val_mse {
            best_val_mse = val_mse;
            best_epoch = epoch;
            best_model = model.clone();
        }
        trace.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
        });
    }

    Ok(FitResult {
        model,
        best_model,
        best_epoch,
        best_val_mse,
        trace,
    })
}

/// Build a structural variant of a model.
///
/// `NoEmbedding` re-initializes with d = 1 from the given seed (its tensors
/// cannot be reused); the other variants preserve the parameters.
pub fn make_ablation_variant(
    model: &FourierGnnModel,
    kind: Ablation,
    seed: u64,
) -> Result<FourierGnnModel> {
    match kind {
        Ablation::Full => {
            let mut m = model.clone();
            m.config.ablation = Ablation::Full;
            Ok(m)
        }
        Ablation::NoResidual | Ablation::NoSummation => {
            let mut m = model.clone();
            m.config.ablation = kind;
            Ok(m)
        }
        Ablation::NoDynamicFgo => {
            let mut m = model.clone();
            m.config.ablation = kind;
            let shared = m.layers[0].clone();
            for layer in m.layers.iter_mut() {
                *layer = shared.clone();
            }
            Ok(m)
        }
        Ablation::NoEmbedding => {
            let mut cfg = model.config.clone();
            cfg.embed_dim = 1;
            cfg.ablation = Ablation::NoEmbedding;
            FourierGnnModel::init(cfg, seed)
        }
    }
}

/// Result of a finite-difference sweep.
#[derive(Debug, Clone)]
pub struct FdCheckReport {
    /// (tensor name, worst relative error) per tensor.
    pub per_tensor: Vec<(String, f64)>,
    pub max_rel_err: f64,
    /// Coordinates compared against the analytic gradient.
    pub checked: usize,
    /// Coordinates skipped because the loss is locally non-smooth there
    /// (a perturbation straddles an activation kink).
    pub skipped: usize,
    pub pass: bool,
}

/// Central finite differences on randomly chosen coordinates of every tensor,
/// compared against the reverse-mode gradient at relative tolerance `tol`.
///
/// Central differences are only meaningful where the loss is locally smooth;
/// each coordinate's estimate is recomputed at step/8 and the coordinate is
/// skipped when the two scales disagree (a kink inside the stencil). A wrong
/// analytic gradient still fails: it produces scale-consistent estimates that
/// differ from the reported gradient.
pub fn finite_difference_check(
    model: &mut FourierGnnModel,
    windows: &[&MtsWindow],
    coords_per_tensor: usize,
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<FdCheckReport> {
    let (_, grads) = backward(model, windows)?;
    let grad_views: Vec<(String, Vec<f64>)> = grads
        .tensor_views()
        .into_iter()
        .map(|(n, t)| (n, t.to_vec()))
        .collect();
    let shapes: Vec<(String, usize)> = model
        .tensor_views()
        .into_iter()
        .map(|(n, t)| (n, t.len()))
        .collect();

    let mut rng = Rng::new(seed);
    let mut per_tensor = Vec::new();
    let mut max_rel_err = 0.0f64;
    let mut checked = 0usize;
    let mut skipped = 0usize;

    let loss_of = |m: &FourierGnnModel| -> Result<f64> {
        let mut total = 0.0;
        for w in windows {
            let pred = model_forward(m, w)?;
            total += mse_loss(&pred, &w.target)?;
        }
        Ok(total / windows.len() as f64)
    };

    // Tied layers form one shared parameter: a nudge must land on the same
    // coordinate of every layer slot for finite differences to measure the
    // derivative the tied gradient reports.
    let tied = model.config.ablation == Ablation::NoDynamicFgo;
    let n_layers = model.layers.len();

    for (tensor_idx, (name, len)) in shapes.iter().enumerate() {
        let tied_group: Vec<usize> = if tied && name.starts_with("fgo.") {
            let component = (tensor_idx - 1) % 4;
            (0..n_layers).map(|k| 1 + 4 * k + component).collect()
        } else {
            vec![tensor_idx]
        };
        let picks = coords_per_tensor.min(*len);
        let mut worst = 0.0f64;
        for _ in 0..picks {
            let coord = rng.below(*len);
            let nudge = |m: &mut FourierGnnModel, delta: f64| {
                let mut views = m.tensor_views_mut();
                for &idx in &tied_group {
                    views[idx].1[coord] += delta;
                }
            };
            let central = |m: &mut FourierGnnModel, h: f64| -> Result<f64> {
                nudge(m, h);
                let plus = loss_of(m)?;
                nudge(m, -2.0 * h);
                let minus = loss_of(m)?;
                nudge(m, h);
                Ok((plus - minus) / (2.0 * h))
            };
            let fd = central(model, step)?;
            let fd_fine = central(model, step / 8.0)?;
            let scale = fd.abs().max(fd_fine.abs()).max(1e-6);
            if (fd - fd_fine).abs() / scale > 1e-3 {
                skipped += 1;
                continue;
            }
            checked += 1;

            let analytic = grad_views[tensor_idx].1[coord];
            // The 1e-6 floor keeps genuinely-zero gradients (bypassed or
            // unused tensors) from dividing FP noise by itself.
            let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        max_rel_err = max_rel_err.max(worst);
        per_tensor.push((name.clone(), worst));
    }

    Ok(FdCheckReport {
        per_tensor,
        max_rel_err,
        checked,
        skipped,
        pass: max_rel_err < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FgoLayer, ModelConfig};
    use crate::spectral::{ActivationKind, DftMode};

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            n_vars: 2,
            lookback: 3,
            horizon: 2,
            embed_dim: 2,
            n_layers: 2,
            reduced_len: 2,
            d_ffn1: 3,
            d_ffn2: 3,
            dft_mode: DftMode::Flat1d,
            activation: ActivationKind::SplitRelu,
            recursive_activation: false,
            leaky_slope: 0.01,
            ablation: Ablation::Full,
        }
    }

    fn windows_for(cfg: &ModelConfig, count: usize, seed: u64) -> Vec<MtsWindow> {
        let mut rng = Rng::new(seed);
        (0..count)
            .map(|i| {
                MtsWindow::new(
                    (0..cfg.n_vars * cfg.lookback)
                        .map(|_| rng.uniform_in(-1.0, 1.0))
                        .collect(),
                    (0..cfg.n_vars * cfg.horizon)
                        .map(|_| rng.uniform_in(-1.0, 1.0))
                        .collect(),
                    cfg.n_vars,
                    cfg.lookback,
                    cfg.horizon,
                    i + cfg.lookback - 1,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn mse_basics() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 4.0]).unwrap(), 2.0);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());

        let mut rng = Rng::new(2);
        let a: Vec<f64> = (0..10).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
        let b: Vec<f64> = (0..10).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
        let mut expected = 0.0;
        for i in 0..10 {
            expected += (a[i] - b[i]) * (a[i] - b[i]);
        }
        expected /= 10.0;
        assert_eq!(mse_loss(&a, &b).unwrap(), expected);
    }

    #[test]
    fn zero_error_gives_zero_final_bias_gradient() {
        // A zero model on zero windows predicts zero == target everywhere.
        let cfg = tiny_config();
        let model = FourierGnnModel::init(cfg.clone(), 1).unwrap();
        let zero_window = MtsWindow::new(
            vec![0.0; cfg.n_vars * cfg.lookback],
            vec![0.0; cfg.n_vars * cfg.horizon],
            cfg.n_vars,
            cfg.lookback,
            cfg.horizon,
            2,
        )
        .unwrap();
        let (loss, grads) = backward(&model, &[&zero_window]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.b3.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn w3_gradient_matches_closed_form() {
        // Linear path: identity FGO, identity activation. The closed form of
        // the last layer is 2/(N tau) x2^T (pred - target), batch averaged.
        let mut cfg = tiny_config();
        cfg.activation = ActivationKind::Identity;
        cfg.n_layers = 1;
        let mut model = FourierGnnModel::init(cfg.clone(), 9).unwrap();
        model.layers[0] = FgoLayer::identity(cfg.embed_dim);
        let windows = windows_for(&cfg, 3, 5);
        let refs: Vec<&MtsWindow> = windows.iter().collect();
        let (_, grads) = backward(&model, &refs).unwrap();

        let (n, tau, d2) = (cfg.n_vars, cfg.horizon, cfg.d_ffn2);
        let mut expected = vec![0.0; d2 * tau];
        for w in &windows {
            let trace = crate::model::forward_trace(&model, w).unwrap();
            for p in 0..d2 {
                for q in 0..tau {
                    let mut acc = 0.0;
                    for row in 0..n {
                        acc += trace.ffn.x2[row * d2 + p]
                            * (trace.ffn.pred[row * tau + q] - w.target[row * tau + q]);
                    }
                    expected[p * tau + q] += 2.0 / (n * tau) as f64 * acc / windows.len() as f64;
                }
            }
        }
        for (g, e) in grads.w3.iter().zip(expected.iter()) {
            assert!((g - e).abs() < 1e-12, "got {g}, expected {e}");
        }
    }

    #[test]
    fn finite_differences_across_variants_and_modes() {
        for (ablation, seed) in [
            (Ablation::Full, 11u64),
            (Ablation::NoEmbedding, 12),
            (Ablation::NoDynamicFgo, 13),
            (Ablation::NoResidual, 14),
            (Ablation::NoSummation, 15),
        ] {
            let mut cfg = tiny_config();
            cfg.ablation = Ablation::Full;
            let base = FourierGnnModel::init(cfg.clone(), seed).unwrap();
            let mut model = make_ablation_variant(&base, ablation, seed + 100).unwrap();
            let windows = windows_for(&cfg, 2, seed + 50);
            let refs: Vec<&MtsWindow> = windows.iter().collect();
            let report =
                finite_difference_check(&mut model, &refs, 12, 1e-5, 1e-4, seed + 7).unwrap();
            assert!(
                report.pass,
                "{:?}: max rel err {}",
                ablation, report.max_rel_err
            );
        }

        // Recursive activation and the planar transform, both full models.
        for (recursive, mode, seed) in [
            (true, DftMode::Flat1d, 31u64),
            (false, DftMode::Planar2d, 32),
            (true, DftMode::Planar2d, 33),
        ] {
            let mut cfg = tiny_config();
            cfg.recursive_activation = recursive;
            cfg.dft_mode = mode;
            let mut model = FourierGnnModel::init(cfg.clone(), seed).unwrap();
            let windows = windows_for(&cfg, 2, seed + 50);
            let refs: Vec<&MtsWindow> = windows.iter().collect();
            let report =
                finite_difference_check(&mut model, &refs, 12, 1e-5, 1e-4, seed + 7).unwrap();
            assert!(
                report.pass,
                "recursive={recursive} mode={mode:?}: max rel err {}",
                report.max_rel_err
            );
        }
    }

    #[test]
    fn rmsprop_zero_gradient_keeps_params() {
        let cfg = tiny_config();
        let mut model = FourierGnnModel::init(cfg, 3).unwrap();
        let before = model.clone();
        let grads = GradientSet::zeros_like(&model);
        let mut state = RmspropState::zeros_like(&model);
        state.mean_sq.w1[0] = 0.5;
        rmsprop_step(&mut model, &grads, &mut state, 0.1, 0.9, 1e-8);
        assert_eq!(model, before);
        // State decays toward zero.
        assert!((state.mean_sq.w1[0] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn rmsprop_scalar_case() {
        let mut p = [1.0];
        let mut s = [0.0];
        rmsprop_apply(&mut p, &[1.0], &mut s, 0.1, 0.9, 0.0);
        assert!((s[0] - 0.1).abs() < 1e-15);
        assert!((p[0] - (1.0 - 0.1 / 0.1f64.sqrt())).abs() < 1e-12);
        assert!((p[0] - 0.68377).abs() < 1e-5);
    }

    #[test]
    fn rmsprop_update_converges_to_lr() {
        // With a constant gradient the state approaches g^2, so the step
        // magnitude approaches lr.
        let mut p = [0.0];
        let mut s = [0.0];
        let g = 3.0;
        let mut last = p[0];
        let mut step = 0.0;
        for _ in 0..400 {
            rmsprop_apply(&mut p, &[g], &mut s, 0.01, 0.9, 0.0);
            step = (last - p[0]).abs();
            last = p[0];
        }
        assert!((step - 0.01).abs() < 1e-6, "step {step}");
    }

    #[test]
    fn rmsprop_monotone_on_quadratic_after_burn_in() {
        // f(x) = (x - 2)^2 starting at x = -1.
        let mut x = [-1.0];
        let mut s = [0.0];
        let mut prev = f64::INFINITY;
        for step in 0..200 {
            let f = (x[0] - 2.0) * (x[0] - 2.0);
            if step >= 5 {
                assert!(f <= prev + 1e-12, "step {step}: {f} > {prev}");
            }
            prev = f;
            let g = 2.0 * (x[0] - 2.0);
            rmsprop_apply(&mut x, &[g], &mut s, 1e-2, 0.9, 1e-8);
        }
    }

    #[test]
    fn fit_with_zero_lr_keeps_parameters() {
        let cfg = tiny_config();
        let model = FourierGnnModel::init(cfg.clone(), 21).unwrap();
        let before = model.clone();
        let windows = windows_for(&cfg, 6, 77);
        let tc = TrainConfig {
            learning_rate: 0.0,
            epochs: 3,
            batch_size: 2,
            ..TrainConfig::default()
        };
        let result = fit(model, &windows[..4], &windows[4..], &tc).unwrap();
        assert_eq!(result.model, before);
    }

    #[test]
    fn fit_is_deterministic_given_seed() {
        let cfg = tiny_config();
        let windows = windows_for(&cfg, 8, 31);
        let tc = TrainConfig {
            learning_rate: 1e-3,
            epochs: 4,
            batch_size: 3,
            ..TrainConfig::default()
        };
        let run = |s: u64| {
            let model = FourierGnnModel::init(cfg.clone(), 1).unwrap();
            let mut tc = tc.clone();
            tc.seed = s;
            fit(model, &windows[..6], &windows[6..], &tc).unwrap()
        };
        let a = run(5);
        let b = run(5);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.model, b.model);
        let c = run(6);
        assert!(a.trace != c.trace || a.model != c.model);
    }

    #[test]
    fn fit_reduces_loss_on_learnable_data() {
        // Predictable targets: the horizon repeats the last observed value.
        let cfg = tiny_config();
        let mut rng = Rng::new(55);
        let windows: Vec<MtsWindow> = (0..20)
            .map(|i| {
                let input: Vec<f64> = (0..cfg.n_vars * cfg.lookback)
                    .map(|_| rng.uniform_in(0.0, 1.0))
                    .collect();
                let mut target = vec![0.0; cfg.n_vars * cfg.horizon];
                for v in 0..cfg.n_vars {
                    let last = input[v * cfg.lookback + cfg.lookback - 1];
                    for h in 0..cfg.horizon {
                        target[v * cfg.horizon + h] = last;
                    }
                }
                MtsWindow::new(input, target, cfg.n_vars, cfg.lookback, cfg.horizon, i).unwrap()
            })
            .collect();
        let model = FourierGnnModel::init(cfg, 2).unwrap();
        let tc = TrainConfig {
            learning_rate: 1e-2,
            epochs: 40,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let result = fit(model, &windows[..16], &windows[16..], &tc).unwrap();
        let first = result.trace.first().unwrap().train_mse;
        let last = result.trace.last().unwrap().train_mse;
        assert!(last < first, "no improvement: {first} -> {last}");
    }

    #[test]
    fn ablation_full_is_structural_identity() {
        let cfg = tiny_config();
        let model = FourierGnnModel::init(cfg, 8).unwrap();
        let variant = make_ablation_variant(&model, Ablation::Full, 0).unwrap();
        assert_eq!(variant, model);
    }

    #[test]
    fn shared_fgo_updates_stay_tied() {
        let cfg = tiny_config();
        let base = FourierGnnModel::init(cfg.clone(), 14).unwrap();
        let mut model = make_ablation_variant(&base, Ablation::NoDynamicFgo, 0).unwrap();
        let windows = windows_for(&cfg, 4, 91);
        let refs: Vec<&MtsWindow> = windows.iter().collect();
        let mut state = RmspropState::zeros_like(&model);
        for _ in 0..3 {
            let (_, grads) = backward(&model, &refs).unwrap();
            assert_eq!(grads.layers[0], grads.layers[1]);
            rmsprop_step(&mut model, &grads, &mut state, 1e-3, 0.9, 1e-8);
            assert_eq!(model.layers[0], model.layers[1]);
        }
    }

    #[test]
    fn shared_fgo_init_starts_tied() {
        let mut cfg = tiny_config();
        cfg.ablation = Ablation::NoDynamicFgo;
        let model = FourierGnnModel::init(cfg, 19).unwrap();
        for layer in &model.layers[1..] {
            assert_eq!(layer, &model.layers[0]);
        }
    }

    #[test]
    fn no_embedding_variant_forces_scalar_features() {
        let cfg = tiny_config();
        let base = FourierGnnModel::init(cfg, 4).unwrap();
        let variant = make_ablation_variant(&base, Ablation::NoEmbedding, 7).unwrap();
        assert_eq!(variant.config.embed_dim, 1);
        assert_eq!(variant.layers[0].s_re.len(), 1);
    }
}
