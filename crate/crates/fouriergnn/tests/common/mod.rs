//! Shared fixtures for the integration and acceptance suites.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::sync::Mutex;

use fouriergnn::data::SeriesTable;
use fouriergnn::rng::Rng;

/// Serializes the CPU-heavy suites (training, timing) so wall-clock budgets
/// and fitted slopes are not distorted by parallel test threads.
pub static HEAVY: Mutex<()> = Mutex::new(());

/// Coupled noisy sinusoids: each variable mixes its own period with its
/// neighbor's, plus uniform noise. Deterministic in the seed.
pub fn synthetic_sinusoids(n_vars: usize, length: usize, noise: f64, seed: u64) -> SeriesTable {
    let mut rng = Rng::new(seed);
    let periods: Vec<f64> = (0..n_vars).map(|v| 24.0 + 3.0 * v as f64).collect();
    let phases: Vec<f64> = (0..n_vars).map(|_| rng.uniform_in(0.0, TAU)).collect();
    let mut values = vec![0.0; length * n_vars];
    for t in 0..length {
        for v in 0..n_vars {
            let w = (v + 1) % n_vars;
            let own = (TAU * t as f64 / periods[v] + phases[v]).sin();
            let coupled = (TAU * t as f64 / periods[w] + phases[w] - 0.5).sin();
            values[t * n_vars + v] = own + 0.4 * coupled + noise * rng.uniform_in(-1.0, 1.0);
        }
    }
    SeriesTable::new(length, n_vars, values).expect("finite synthetic values")
}

// Each test target compiles this module independently; not every target uses
// every helper.
#[allow(dead_code)]
pub fn write_csv(table: &SeriesTable, path: &PathBuf) {
    let mut out = String::new();
    for r in 0..table.rows {
        let row: Vec<String> = (0..table.cols)
            .map(|c| format!("{}", table.at(r, c)))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).expect("write csv");
}

#[allow(dead_code)]
pub fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("fouriergnn-tests").join(name);
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir
}
