//! Forecast metrics, test-split evaluation, the repeat-last baseline, and the
//! complexity scaling benchmark.

use std::time::Instant;

use num_complex::Complex64;

use crate::data::MinMaxStats;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{
    fgo_stack_output, model_forward, Ablation, FgoLayer, FourierGnnModel, MtsWindow,
};
use crate::oracle::{GreenKernelGso, TimeDomainLayer};
use crate::rng::Rng;
use crate::spectral::{dft_nodes, idft_nodes, ActivationKind, RealNodeFeatures};

/// Terms with |truth| below this are excluded from MAPE.
pub const MAPE_MASK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub mape_percent: f64,
}

/// MAE / RMSE / MAPE over a multi-step horizon, with a per-step breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mae: f64,
    pub rmse: f64,
    pub mape_percent: f64,
    pub per_horizon: Option<Vec<HorizonMetrics>>,
    pub n_masked_mape_terms: usize,
}

#[derive(Debug, Clone, Default)]
struct Sums {
    abs: f64,
    sq: f64,
    ape: f64,
    count: usize,
    mape_count: usize,
    masked: usize,
}

impl Sums {
    fn add(&mut self, pred: f64, truth: f64) {
        let diff = truth - pred;
        self.abs += diff.abs();
        self.sq += diff * diff;
        self.count += 1;
        if truth.abs() < MAPE_MASK_THRESHOLD {
            self.masked += 1;
        } else {
            self.ape += (diff / truth).abs();
            self.mape_count += 1;
        }
    }

    fn metrics(&self) -> HorizonMetrics {
        let n = self.count.max(1) as f64;
        HorizonMetrics {
            mae: self.abs / n,
            rmse: (self.sq / n).sqrt(),
            mape_percent: if self.mape_count == 0 {
                0.0
            } else {
                self.ape / self.mape_count as f64 * 100.0
            },
        }
    }
}

/// Pools errors across any number of (pred, truth) pairs; exact for MAE and
/// MSE, RMSE via pooled squared error.
#[derive(Debug, Clone)]
pub struct MetricAccumulator {
    horizon: usize,
    total: Sums,
    per_step: Vec<Sums>,
}

impl MetricAccumulator {
    pub fn new(horizon: usize) -> Self {
        MetricAccumulator {
            horizon,
            total: Sums::default(),
            per_step: vec![Sums::default(); horizon],
        }
    }

    /// Add one (N, tau) forecast against its truth, both variable-major.
    pub fn add(&mut self, pred: &[f64], truth: &[f64]) -> Result<()> {
        if pred.len() != truth.len() || !pred.len().is_multiple_of(self.horizon) {
            return Err(Error::shape("metric accumulator shape mismatch"));
        }
        let n_vars = pred.len() / self.horizon;
        for v in 0..n_vars {
            for h in 0..self.horizon {
                let idx = v * self.horizon + h;
                self.total.add(pred[idx], truth[idx]);
                self.per_step[h].add(pred[idx], truth[idx]);
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> MetricReport {
        let all = self.total.metrics();
        MetricReport {
            mae: all.mae,
            rmse: all.rmse,
            mape_percent: all.mape_percent,
            per_horizon: Some(self.per_step.iter().map(Sums::metrics).collect()),
            n_masked_mape_terms: self.total.masked,
        }
    }
}

/// Metrics for a single (N, tau) pair.
pub fn compute_metrics(pred: &[f64], truth: &[f64], horizon: usize) -> Result<MetricReport> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    let mut acc = MetricAccumulator::new(horizon);
    acc.add(pred, truth)?;
    Ok(acc.finish())
}

fn denormalize_in_place(values: &mut [f64], horizon: usize, stats: &MinMaxStats) {
    let n_vars = values.len() / horizon;
    for v in 0..n_vars {
        for h in 0..horizon {
            let idx = v * horizon + h;
            values[idx] = stats.unscale(v, values[idx]);
        }
    }
}

/// Forecast every window and pool metrics over all windows and steps.
pub fn evaluate_split(
    model: &FourierGnnModel,
    windows: &[MtsWindow],
    stats: &MinMaxStats,
    denormalize: bool,
) -> Result<MetricReport> {
    if windows.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty split"));
    }
    let horizon = windows[0].horizon;
    let mut acc = MetricAccumulator::new(horizon);
    for w in windows {
        let mut pred = model_forward(model, w)?;
        let mut truth = w.target.clone();
        if denormalize {
            denormalize_in_place(&mut pred, horizon, stats);
            denormalize_in_place(&mut truth, horizon, stats);
        }
        acc.add(&pred, &truth)?;
    }
    Ok(acc.finish())
}

/// Naive floor: repeat the final observed value across the horizon.
pub fn repeat_last_forecast(window: &MtsWindow) -> Vec<f64> {
    let (n, t, tau) = (window.n_vars, window.lookback, window.horizon);
    let mut pred = vec![0.0; n * tau];
    for v in 0..n {
        let last = window.input[v * t + t - 1];
        for h in 0..tau {
            pred[v * tau + h] = last;
        }
    }
    pred
}

/// Metrics of the repeat-last baseline over a split.
pub fn evaluate_repeat_last(
    windows: &[MtsWindow],
    stats: &MinMaxStats,
    denormalize: bool,
) -> Result<MetricReport> {
    if windows.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty split"));
    }
    let horizon = windows[0].horizon;
    let mut acc = MetricAccumulator::new(horizon);
    for w in windows {
        let mut pred = repeat_last_forecast(w);
        let mut truth = w.target.clone();
        if denormalize {
            denormalize_in_place(&mut pred, horizon, stats);
            denormalize_in_place(&mut truth, horizon, stats);
        }
        acc.add(&pred, &truth)?;
    }
    Ok(acc.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPoint {
    pub n: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

/// Scaling measurements plus fitted log-log slopes for both paths.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub spectral: Vec<BenchPoint>,
    pub dense: Vec<BenchPoint>,
    pub slope_spectral: f64,
    pub slope_dense: f64,
}

/// Least-squares slope of log(time) against log(n).
pub fn log_log_slope(points: &[BenchPoint]) -> f64 {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_seconds.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let cov: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let var: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    cov / var
}

fn time_repeats<F: FnMut() -> f64>(repeats: usize, mut work: F) -> (BenchPoint, f64) {
    // Warm-up round, excluded from statistics.
    let mut checksum = std::hint::black_box(work());
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        checksum += std::hint::black_box(work());
        times.push(start.elapsed().as_secs_f64());
    }
    let mean = times.iter().sum::<f64>() / repeats as f64;
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / repeats as f64;
    (
        BenchPoint {
            n: 0,
            mean_seconds: mean,
            std_seconds: var.sqrt(),
        },
        checksum,
    )
}

fn random_features(n: usize, d: usize, rng: &mut Rng) -> RealNodeFeatures {
    RealNodeFeatures {
        data: (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        n,
        d,
    }
}

fn random_fgo_layers(d: usize, k: usize, rng: &mut Rng) -> Vec<FgoLayer> {
    let bound = 1.0 / (d as f64).sqrt();
    (0..k)
        .map(|_| {
            let mut layer = FgoLayer::zeros(d);
            for v in layer.s_re.iter_mut().chain(layer.s_im.iter_mut()) {
                *v = rng.uniform_in(-bound, bound);
            }
            layer
        })
        .collect()
}

/// Spectral forward used by the benchmark: DFT, K operator products with the
/// summation, inverse DFT. Returns a checksum so the work cannot be elided.
pub fn spectral_forward_once(
    x: &RealNodeFeatures,
    weights: &[CMat],
    biases: &[Vec<Complex64>],
) -> f64 {
    let spec0 = dft_nodes(x).expect("finite input");
    let out = fgo_stack_output(
        spec0,
        weights,
        biases,
        ActivationKind::Identity,
        false,
        Ablation::Full,
    )
    .expect("consistent dims");
    let back = idft_nodes(&out).expect("finite spectrum");
    back.data.iter().map(|c| c.re + c.im).sum()
}

/// Time the spectral path at each n.
pub fn bench_spectral(
    d: usize,
    k: usize,
    n_list: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<(Vec<BenchPoint>, f64)> {
    check_bench_args(n_list, repeats)?;
    let mut rng = Rng::new(seed);
    let layers = random_fgo_layers(d, k, &mut rng);
    let weights: Vec<CMat> = layers.iter().map(|l| l.weight()).collect();
    let biases: Vec<Vec<Complex64>> = layers.iter().map(|l| l.bias()).collect();
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let x = random_features(n, d, &mut rng);
        let (mut point, _) = time_repeats(repeats, || spectral_forward_once(&x, &weights, &biases));
        point.n = n;
        points.push(point);
    }
    let slope = log_log_slope(&points);
    Ok((points, slope))
}

/// Time the dense time-domain oracle path (K orders of A X W with dense
/// circulant matrices) at each n.
pub fn bench_dense(
    d: usize,
    k: usize,
    n_list: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<(Vec<BenchPoint>, f64)> {
    check_bench_args(n_list, repeats)?;
    let mut rng = Rng::new(seed);
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let layers: Vec<TimeDomainLayer> = (0..k)
            .map(|_| {
                let kernel = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
                let weight = (0..d * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
                TimeDomainLayer {
                    gso: GreenKernelGso { kernel, n },
                    weight,
                    d,
                }
            })
            .collect();
        let x = random_features(n, d, &mut rng);
        let (mut point, _) = time_repeats(repeats, || {
            let out = crate::oracle::time_domain_multi_order(&x, &layers).expect("dims");
            out.data.iter().sum()
        });
        point.n = n;
        points.push(point);
    }
    let slope = log_log_slope(&points);
    Ok((points, slope))
}

fn check_bench_args(n_list: &[usize], repeats: usize) -> Result<()> {
    if repeats < 3 {
        return Err(Error::invalid("benchmark needs repeats >= 3"));
    }
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n list must be strictly increasing"));
    }
    Ok(())
}

/// Run both paths on their respective size ranges.
pub fn bench_scaling(
    d: usize,
    k: usize,
    spectral_ns: &[usize],
    dense_ns: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<BenchReport> {
    let (spectral, slope_spectral) = bench_spectral(d, k, spectral_ns, repeats, seed)?;
    let (dense, slope_dense) = bench_dense(d, k, dense_ns, repeats, seed)?;
    Ok(BenchReport {
        spectral,
        dense,
        slope_spectral,
        slope_dense,
    })
}
