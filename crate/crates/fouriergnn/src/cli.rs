//! Command-line entry point: train, evaluate, predict, verify, bench,
//! ablate, export-adjacency.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 verification failure,
//! 3 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::checkpoint;
use crate::config::{parse_config, RunConfig};
use crate::data::{
    load_series, minmax_apply, minmax_fit, sliding_windows, split_chrono, LoadOptions, MinMaxStats,
    SeriesTable,
};
use crate::error::{Error, Result};
use crate::eval::{bench_scaling, evaluate_repeat_last, evaluate_split, BenchReport, MetricReport};
use crate::model::{
    export_adjacency, marginalize_time_adjacency, model_forward, node_representation, Ablation,
    FourierGnnModel, MtsWindow,
};
use crate::oracle;
use crate::train::{fit, FitResult};

/// Default cap on materialized adjacency size.
const ADJACENCY_NODE_CAP: usize = 4096;

#[derive(Parser)]
#[command(
    name = "fouriergnn",
    about = "Multivariate time-series forecasting with Fourier-space graph operators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a config file and write checkpoints, traces, reports.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override training.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override output.dir.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override dataset.transpose.
        #[arg(long)]
        transpose: bool,
        /// Report metrics in physical units.
        #[arg(long)]
        denormalize: bool,
    },
    /// Evaluate a checkpoint on the test split.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint path; defaults to <output>/checkpoints/<name>.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        denormalize: bool,
    },
    /// Forecast one lookback window from a CSV file.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        /// CSV with T rows and N columns (or transposed with --transpose).
        #[arg(long)]
        input: PathBuf,
        /// Where to write the forecast CSV (tau rows, N columns).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
        /// Normalization statistics JSON (written next to checkpoints at
        /// train time); applied to the input and inverted on the forecast.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Run the brute-force equivalence and convolution-theorem checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure forward-pass scaling of the spectral and dense paths.
    Bench {
        #[arg(long, default_value_t = 32)]
        embed_dim: usize,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write (path, n, seconds) pairs as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train and evaluate the full model plus all four ablation variants.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        denormalize: bool,
    },
    /// Export the learned adjacency of one test window as CSV.
    ExportAdjacency {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Test-window index to export.
        #[arg(long, default_value_t = 0)]
        window: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
    },
}

/// Parse argv and dispatch; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes.
            if e.use_stderr() {
                eprint!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::VerificationFailed) => 2,
        Err(e @ Error::Config { .. }) | Err(e @ Error::InvalidArgument { .. }) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

enum Outcome {
    Success,
    VerificationFailed,
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Train {
            config,
            seed,
            output,
            transpose,
            denormalize,
        } => {
            let cfg = load_config(&config, seed, output, transpose)?;
            cmd_train(&cfg, denormalize)?;
            Ok(Outcome::Success)
        }
        Command::Evaluate {
            config,
            checkpoint,
            output,
            transpose,
            denormalize,
        } => {
            let cfg = load_config(&config, None, output, transpose)?;
            cmd_evaluate(&cfg, checkpoint, denormalize)?;
            Ok(Outcome::Success)
        }
        Command::Predict {
            checkpoint,
            input,
            output,
            transpose,
            stats,
        } => {
            cmd_predict(&checkpoint, &input, output, transpose, stats)?;
            Ok(Outcome::Success)
        }
        Command::Verify { seed } => cmd_verify(seed),
        Command::Bench {
            embed_dim,
            layers,
            repeats,
            seed,
            output,
        } => {
            cmd_bench(embed_dim, layers, repeats, seed, output)?;
            Ok(Outcome::Success)
        }
        Command::Ablate {
            config,
            seed,
            output,
            transpose,
            denormalize,
        } => {
            let cfg = load_config(&config, seed, output, transpose)?;
            cmd_ablate(&cfg, denormalize)?;
            Ok(Outcome::Success)
        }
        Command::ExportAdjacency {
            config,
            checkpoint,
            window,
            output,
            transpose,
        } => {
            let cfg = load_config(&config, None, output, transpose)?;
            cmd_export_adjacency(&cfg, checkpoint, window)?;
            Ok(Outcome::Success)
        }
    }
}

fn load_config(
    path: &Path,
    seed: Option<u64>,
    output: Option<PathBuf>,
    transpose: bool,
) -> Result<RunConfig> {
    let mut cfg = parse_config(path)?;
    if let Some(seed) = seed {
        cfg.training.seed = seed;
    }
    if let Some(dir) = output {
        cfg.output.dir = dir.display().to_string();
    }
    if transpose {
        cfg.dataset.transpose = true;
    }
    Ok(cfg)
}

struct PreparedData {
    n_vars: usize,
    stats: MinMaxStats,
    train: Vec<MtsWindow>,
    val: Vec<MtsWindow>,
    test: Vec<MtsWindow>,
}

fn prepare_data(cfg: &RunConfig) -> Result<PreparedData> {
    let table = load_series(
        &cfg.dataset.path,
        LoadOptions {
            transpose: cfg.dataset.transpose,
        },
    )?;
    let (train, val, test) = split_chrono(&table, &cfg.dataset.split)?;
    let stats = minmax_fit(&train)?;
    let windows = |t: &SeriesTable| -> Result<Vec<MtsWindow>> {
        sliding_windows(
            &minmax_apply(t, &stats)?,
            cfg.model.lookback,
            cfg.model.horizon,
            cfg.dataset.stride,
        )
    };
    let (train, val, test) = (windows(&train)?, windows(&val)?, windows(&test)?);
    Ok(PreparedData {
        n_vars: table.cols,
        stats,
        train,
        val,
        test,
    })
}

fn out_path(cfg: &RunConfig, sub: &str, file: &str) -> Result<PathBuf> {
    let dir = Path::new(&cfg.output.dir).join(sub);
    fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), &e))?;
    Ok(dir.join(file))
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), &e))
}

fn matrix_csv(values: &[f64], rows: usize, cols: usize) -> String {
    let mut out = String::new();
    for r in 0..rows {
        let row: Vec<String> = (0..cols)
            .map(|c| format!("{}", values[r * cols + c]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn metrics_csv(rows: &[(String, &MetricReport)]) -> String {
    let mut out = String::from("name,mae,rmse,mape_percent,n_masked_mape_terms\n");
    for (name, report) in rows {
        out.push_str(&format!(
            "{name},{},{},{},{}\n",
            report.mae, report.rmse, report.mape_percent, report.n_masked_mape_terms
        ));
    }
    out
}

fn per_horizon_csv(rows: &[(String, &MetricReport)]) -> String {
    let mut out = String::from("name,step,mae,rmse,mape_percent\n");
    for (name, report) in rows {
        if let Some(steps) = &report.per_horizon {
            for (i, h) in steps.iter().enumerate() {
                out.push_str(&format!(
                    "{name},{},{},{},{}\n",
                    i + 1,
                    h.mae,
                    h.rmse,
                    h.mape_percent
                ));
            }
        }
    }
    out
}

fn print_metric_row(name: &str, report: &MetricReport) {
    println!(
        "{name:<16} MAE {:>10.6}  RMSE {:>10.6}  MAPE {:>8.2}%  (masked {})",
        report.mae, report.rmse, report.mape_percent, report.n_masked_mape_terms
    );
}

fn run_fit(cfg: &RunConfig, data: &PreparedData, ablation: Ablation) -> Result<FitResult> {
    let mut model_cfg = cfg.to_model_config(data.n_vars);
    model_cfg.ablation = ablation;
    if ablation == Ablation::NoEmbedding {
        model_cfg.embed_dim = 1;
    }
    let model = FourierGnnModel::init(model_cfg, cfg.training.seed)?;
    fit(model, &data.train, &data.val, &cfg.training)
}

fn cmd_train(cfg: &RunConfig, denormalize: bool) -> Result<()> {
    println!("effective configuration:\n{cfg}\n");
    let data = prepare_data(cfg)?;
    println!(
        "dataset: N = {}, windows train/val/test = {}/{}/{}",
        data.n_vars,
        data.train.len(),
        data.val.len(),
        data.test.len()
    );
    let result = run_fit(cfg, &data, cfg.training.ablation)?;

    let name = &cfg.output.checkpoint_name;
    let best_path = out_path(cfg, "checkpoints", &format!("{name}.json"))?;
    checkpoint::save(&result.best_model, &best_path)?;
    checkpoint::save(
        &result.model,
        &out_path(cfg, "checkpoints", &format!("{name}_final.json"))?,
    )?;
    let stats_json = serde_json::to_string(&data.stats).map_err(|e| Error::Checkpoint {
        message: e.to_string(),
    })?;
    write_text(
        &out_path(cfg, "checkpoints", &format!("{name}_stats.json"))?,
        &stats_json,
    )?;

    let mut trace_csv = String::from("epoch,train_mse,val_mse\n");
    for row in &result.trace {
        trace_csv.push_str(&format!(
            "{},{},{}\n",
            row.epoch, row.train_mse, row.val_mse
        ));
    }
    write_text(
        &out_path(cfg, "traces", &format!("{name}_loss.csv"))?,
        &trace_csv,
    )?;

    println!(
        "best checkpoint: epoch {} (val MSE {:.6}) -> {}",
        result.best_epoch,
        result.best_val_mse,
        best_path.display()
    );

    if !data.test.is_empty() {
        let report = evaluate_split(&result.best_model, &data.test, &data.stats, denormalize)?;
        let baseline = evaluate_repeat_last(&data.test, &data.stats, denormalize)?;
        print_metric_row("test", &report);
        print_metric_row("repeat-last", &baseline);
        let rows = vec![
            ("test".to_string(), &report),
            ("repeat_last".to_string(), &baseline),
        ];
        write_text(
            &out_path(cfg, "reports", &format!("{name}_metrics.csv"))?,
            &metrics_csv(&rows),
        )?;
        write_text(
            &out_path(cfg, "reports", &format!("{name}_per_horizon.csv"))?,
            &per_horizon_csv(&rows),
        )?;
    }
    Ok(())
}

fn default_checkpoint_path(cfg: &RunConfig) -> PathBuf {
    Path::new(&cfg.output.dir)
        .join("checkpoints")
        .join(format!("{}.json", cfg.output.checkpoint_name))
}

fn cmd_evaluate(cfg: &RunConfig, ckpt: Option<PathBuf>, denormalize: bool) -> Result<()> {
    let data = prepare_data(cfg)?;
    let path = ckpt.unwrap_or_else(|| default_checkpoint_path(cfg));
    let model = checkpoint::load(&path)?;
    if data.test.is_empty() {
        return Err(Error::invalid("test split has no windows"));
    }
    let report = evaluate_split(&model, &data.test, &data.stats, denormalize)?;
    let baseline = evaluate_repeat_last(&data.test, &data.stats, denormalize)?;
    print_metric_row("test", &report);
    print_metric_row("repeat-last", &baseline);
    let rows = vec![
        ("test".to_string(), &report),
        ("repeat_last".to_string(), &baseline),
    ];
    let name = &cfg.output.checkpoint_name;
    write_text(
        &out_path(cfg, "reports", &format!("{name}_metrics.csv"))?,
        &metrics_csv(&rows),
    )?;
    write_text(
        &out_path(cfg, "reports", &format!("{name}_per_horizon.csv"))?,
        &per_horizon_csv(&rows),
    )?;
    Ok(())
}

fn cmd_predict(
    ckpt: &Path,
    input: &Path,
    output: Option<PathBuf>,
    transpose: bool,
    stats_path: Option<PathBuf>,
) -> Result<()> {
    let model = checkpoint::load(ckpt)?;
    let cfg = &model.config;
    let table = load_series(input, LoadOptions { transpose })?;
    if table.rows != cfg.lookback || table.cols != cfg.n_vars {
        return Err(Error::shape(format!(
            "input window is {}x{}, model expects T = {} rows and N = {} columns",
            table.rows, table.cols, cfg.lookback, cfg.n_vars
        )));
    }
    let stats: Option<MinMaxStats> = match stats_path {
        Some(p) => {
            let text =
                fs::read_to_string(&p).map_err(|e| Error::io(p.display().to_string(), &e))?;
            Some(serde_json::from_str(&text).map_err(|e| Error::Checkpoint {
                message: e.to_string(),
            })?)
        }
        None => None,
    };

    let mut input_values = vec![0.0; cfg.n_vars * cfg.lookback];
    for v in 0..cfg.n_vars {
        for s in 0..cfg.lookback {
            let raw = table.at(s, v);
            input_values[v * cfg.lookback + s] = match &stats {
                Some(st) => st.scale(v, raw),
                None => raw,
            };
        }
    }
    let window = MtsWindow::new(
        input_values,
        vec![0.0; cfg.n_vars * cfg.horizon],
        cfg.n_vars,
        cfg.lookback,
        cfg.horizon,
        cfg.lookback - 1,
    )?;
    let mut forecast = model_forward(&model, &window)?;
    if let Some(st) = &stats {
        for v in 0..cfg.n_vars {
            for h in 0..cfg.horizon {
                forecast[v * cfg.horizon + h] = st.unscale(v, forecast[v * cfg.horizon + h]);
            }
        }
    }

    // Emit tau rows by N columns, matching the input orientation.
    let mut rows = vec![0.0; cfg.horizon * cfg.n_vars];
    for v in 0..cfg.n_vars {
        for h in 0..cfg.horizon {
            rows[h * cfg.n_vars + v] = forecast[v * cfg.horizon + h];
        }
    }
    let csv = matrix_csv(&rows, cfg.horizon, cfg.n_vars);
    match output {
        Some(path) => write_text(&path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_verify(seed: u64) -> Result<Outcome> {
    let mut all_pass = true;
    println!(
        "{:>4} {:>3} {:>3} {:>14}  result",
        "n", "d", "K", "max_abs_error"
    );
    for &n in &[4usize, 8, 16] {
        for &d in &[1usize, 2, 4] {
            for k in 0..=3usize {
                let mut worst = 0.0f64;
                let mut pass = true;
                for trial in 0..10u64 {
                    let report = oracle::verify_multi_order_equivalence(
                        n,
                        d,
                        k,
                        seed + trial * 7919 + (n * 100 + d * 10 + k) as u64,
                    )?;
                    worst = worst.max(report.max_abs_error);
                    pass &= report.pass;
                }
                all_pass &= pass;
                println!(
                    "{n:>4} {d:>3} {k:>3} {worst:>14.3e}  {}",
                    if pass { "pass" } else { "FAIL" }
                );
            }
        }
    }

    let mut conv_worst = 0.0f64;
    let mut conv_pass = true;
    let mut rng = crate::rng::Rng::new(seed ^ 0xC0FFEE);
    for _ in 0..100 {
        let n = 2 + rng.below(63);
        let report = oracle::verify_convolution_theorem(n, rng.next_u64())?;
        conv_worst = conv_worst.max(report.max_abs_error);
        conv_pass &= report.pass;
    }
    all_pass &= conv_pass;
    println!(
        "convolution theorem (100 random pairs): max error {conv_worst:.3e}  {}",
        if conv_pass { "pass" } else { "FAIL" }
    );

    let mut diag_pass = true;
    for &n in &[2usize, 3, 8, 17, 32] {
        let mut rng = crate::rng::Rng::new(seed + n as u64);
        let gso = oracle::GreenKernelGso::new((0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect())?;
        let err = oracle::circulant_diagonalization_error(&gso);
        let pass = err < 1e-9;
        diag_pass &= pass;
        println!(
            "circulant diagonalization n = {n:>2}: off-diagonal {err:.3e}  {}",
            if pass { "pass" } else { "FAIL" }
        );
    }
    all_pass &= diag_pass;

    if all_pass {
        println!("verification: all checks passed");
        Ok(Outcome::Success)
    } else {
        println!("verification: FAILURES detected");
        Ok(Outcome::VerificationFailed)
    }
}

fn cmd_bench(
    embed_dim: usize,
    layers: usize,
    repeats: usize,
    seed: u64,
    output: Option<PathBuf>,
) -> Result<()> {
    let spectral_ns = [512usize, 1024, 2048, 4096, 8192];
    let dense_ns = [256usize, 512, 1024, 2048];
    let report: BenchReport =
        bench_scaling(embed_dim, layers, &spectral_ns, &dense_ns, repeats, seed)?;
    println!("spectral path (d = {embed_dim}, K = {layers}):");
    for p in &report.spectral {
        println!(
            "  n = {:>6}: {:.6} s (std {:.2e})",
            p.n, p.mean_seconds, p.std_seconds
        );
    }
    println!("  fitted log-log slope: {:.3}", report.slope_spectral);
    println!("dense time-domain path:");
    for p in &report.dense {
        println!(
            "  n = {:>6}: {:.6} s (std {:.2e})",
            p.n, p.mean_seconds, p.std_seconds
        );
    }
    println!("  fitted log-log slope: {:.3}", report.slope_dense);

    if let Some(path) = output {
        let mut csv = String::from("path,n,mean_seconds,std_seconds\n");
        for p in &report.spectral {
            csv.push_str(&format!(
                "spectral,{},{},{}\n",
                p.n, p.mean_seconds, p.std_seconds
            ));
        }
        for p in &report.dense {
            csv.push_str(&format!(
                "dense,{},{},{}\n",
                p.n, p.mean_seconds, p.std_seconds
            ));
        }
        write_text(&path, &csv)?;
    }
    Ok(())
}

fn cmd_ablate(cfg: &RunConfig, denormalize: bool) -> Result<()> {
    println!("effective configuration:\n{cfg}\n");
    let data = prepare_data(cfg)?;
    if data.test.is_empty() {
        return Err(Error::invalid("test split has no windows"));
    }
    let mut reports: Vec<(String, MetricReport)> = Vec::new();
    for kind in Ablation::ALL {
        let result = run_fit(cfg, &data, kind)?;
        let report = evaluate_split(&result.best_model, &data.test, &data.stats, denormalize)?;
        print_metric_row(kind.label(), &report);
        reports.push((kind.label().to_string(), report));
    }
    let rows: Vec<(String, &MetricReport)> = reports
        .iter()
        .map(|(name, report)| (name.clone(), report))
        .collect();
    write_text(
        &out_path(cfg, "reports", "ablation.csv")?,
        &metrics_csv(&rows),
    )?;
    Ok(())
}

fn cmd_export_adjacency(cfg: &RunConfig, ckpt: Option<PathBuf>, window_index: usize) -> Result<()> {
    let data = prepare_data(cfg)?;
    let path = ckpt.unwrap_or_else(|| default_checkpoint_path(cfg));
    let model = checkpoint::load(&path)?;
    let windows = if data.test.is_empty() {
        &data.train
    } else {
        &data.test
    };
    let window = windows.get(window_index).ok_or_else(|| {
        Error::invalid(format!(
            "window index {window_index} out of range ({} available)",
            windows.len()
        ))
    })?;
    let representation = node_representation(&model, window)?;
    let adjacency = export_adjacency(&representation, ADJACENCY_NODE_CAP)?;
    let n = representation.n;
    write_text(
        &out_path(cfg, "adjacency", "adjacency_full.csv")?,
        &matrix_csv(&adjacency, n, n),
    )?;
    let marginal =
        marginalize_time_adjacency(&adjacency, model.config.n_vars, model.config.lookback)?;
    write_text(
        &out_path(cfg, "adjacency", "adjacency_vars.csv")?,
        &matrix_csv(&marginal, model.config.n_vars, model.config.n_vars),
    )?;
    println!(
        "wrote {}x{} adjacency and {}x{} variable marginal",
        n, n, model.config.n_vars, model.config.n_vars
    );
    Ok(())
}
