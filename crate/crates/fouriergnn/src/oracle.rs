//! Brute-force time-domain references.
//!
//! Everything here is deliberately slow and literal: circulant operators are
//! materialized densely, graph convolutions run as explicit matrix products,
//! and the per-frequency operators keep the general n-variant form. These are
//! the independent paths the fast spectral implementation is checked against.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{cmm, rmm, CMat};
use crate::rng::Rng;
use crate::spectral::{dft_nodes, idft_nodes, to_real, RealNodeFeatures, Spectrum};

/// Circulant graph shift operator generated from a translation-invariant
/// kernel: matrix[i, j] = kernel[(i - j) mod n].
#[derive(Debug, Clone)]
pub struct GreenKernelGso {
    pub kernel: Vec<f64>,
    pub n: usize,
}

impl GreenKernelGso {
    pub fn new(kernel: Vec<f64>) -> Result<Self> {
        if kernel.is_empty() {
            return Err(Error::invalid("kernel must be non-empty"));
        }
        let n = kernel.len();
        Ok(GreenKernelGso { kernel, n })
    }

    /// Kernel equal to c at offset zero; the space-invariant special case.
    pub fn scaled_delta(n: usize, c: f64) -> Self {
        let mut kernel = vec![0.0; n];
        kernel[0] = c;
        GreenKernelGso { kernel, n }
    }

    /// Dense (n, n) circulant matrix; row r is row 0 rotated right by r.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.kernel[(n + i - j) % n];
            }
        }
        m
    }
}

/// One time-domain diffusion step: a circulant shift operator paired with a
/// real feature-mixing weight matrix.
#[derive(Debug, Clone)]
pub struct TimeDomainLayer {
    pub gso: GreenKernelGso,
    /// Row-major (d, d) weight matrix.
    pub weight: Vec<f64>,
    pub d: usize,
}

impl TimeDomainLayer {
    pub fn new(gso: GreenKernelGso, weight: Vec<f64>, d: usize) -> Result<Self> {
        if weight.len() != d * d {
            return Err(Error::shape("time-domain layer weight must be d x d"));
        }
        Ok(TimeDomainLayer { gso, weight, d })
    }

    pub fn random(n: usize, d: usize, rng: &mut Rng) -> Self {
        let kernel = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let weight = (0..d * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        TimeDomainLayer {
            gso: GreenKernelGso { kernel, n },
            weight,
            d,
        }
    }
}

/// The general Fourier-space operator of one layer: one d x d complex matrix
/// per frequency. The model's n-invariant operator is the special case where
/// every per-frequency matrix coincides.
#[derive(Debug, Clone)]
pub struct PerFrequencyFgo {
    pub mats: Vec<CMat>,
    pub n: usize,
    pub d: usize,
}

impl PerFrequencyFgo {
    /// Apply to a spectrum row by row: `out[m, :] = x[m, :] * mats[m]`.
    pub fn apply(&self, x: &Spectrum) -> Result<Spectrum> {
        if x.n != self.n || x.d != self.d {
            return Err(Error::shape(
                "per-frequency operator does not match spectrum",
            ));
        }
        let mut out = Spectrum::zeros(x.n, x.d);
        for m in 0..self.n {
            let row = &x.data[m * self.d..(m + 1) * self.d];
            let orow = &mut out.data[m * self.d..(m + 1) * self.d];
            cmm(row, 1, self.d, &self.mats[m].data, self.d, orow);
        }
        Ok(out)
    }
}

/// Fourier transform of the matrix-valued kernel `kappa[j] = kernel[j] * W`,
/// computed by direct summation.
pub fn fgo_from_kernel(layer: &TimeDomainLayer) -> PerFrequencyFgo {
    let (n, d) = (layer.gso.n, layer.d);
    let mut mats = Vec::with_capacity(n);
    for m in 0..n {
        let mut beta = Complex64::new(0.0, 0.0);
        for (j, &k) in layer.gso.kernel.iter().enumerate() {
            let angle = -2.0 * PI * (m * j) as f64 / n as f64;
            beta += Complex64::from_polar(k, angle);
        }
        let mut mat = CMat::zeros(d, d);
        for (dst, &w) in mat.data.iter_mut().zip(layer.weight.iter()) {
            *dst = beta * w;
        }
        mats.push(mat);
    }
    PerFrequencyFgo { mats, n, d }
}

/// Dense multi-order graph convolution: sum over k of A_k ... A_1 X W_1 ... W_k,
/// with the k = 0 term equal to X itself.
pub fn time_domain_multi_order(
    x: &RealNodeFeatures,
    layers: &[TimeDomainLayer],
) -> Result<RealNodeFeatures> {
    let (n, d) = (x.n, x.d);
    for layer in layers {
        if layer.gso.n != n || layer.d != d {
            return Err(Error::shape("time-domain layers must share (n, d)"));
        }
    }
    let mut total = x.data.clone();
    let mut current = x.data.clone();
    let mut shifted = vec![0.0; n * d];
    let mut mixed = vec![0.0; n * d];
    for layer in layers {
        let a = layer.gso.dense();
        rmm(&a, n, n, &current, d, &mut shifted);
        rmm(&shifted, n, d, &layer.weight, d, &mut mixed);
        for (t, &m) in total.iter_mut().zip(mixed.iter()) {
            *t += m;
        }
        std::mem::swap(&mut current, &mut mixed);
    }
    RealNodeFeatures::new(n, d, total)
}

/// Spectral side of the equivalence: residual spectrum plus the recursive
/// per-frequency products, transformed back to the time domain.
pub fn spectral_multi_order(
    x: &RealNodeFeatures,
    operators: &[PerFrequencyFgo],
) -> Result<RealNodeFeatures> {
    let mut current = dft_nodes(x)?;
    let mut total = current.clone();
    for op in operators {
        current = op.apply(&current)?;
        for (t, &c) in total.data.iter_mut().zip(current.data.iter()) {
            *t += c;
        }
    }
    Ok(to_real(&idft_nodes(&total)?))
}

/// Outcome of one brute-force comparison.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub max_abs_error: f64,
    pub pass: bool,
}

/// Check that the recursive spectral multiplication matches the dense
/// multi-order convolution for random circulant layers.
pub fn verify_multi_order_equivalence(
    n: usize,
    d: usize,
    k: usize,
    seed: u64,
) -> Result<VerifyReport> {
    verify_multi_order_equivalence_with_cap(n, d, k, seed, 64)
}

pub fn verify_multi_order_equivalence_with_cap(
    n: usize,
    d: usize,
    k: usize,
    seed: u64,
    cap: usize,
) -> Result<VerifyReport> {
    if n > cap {
        return Err(Error::invalid(format!("n = {n} exceeds cap {cap}")));
    }
    if d > 8 || k > 4 {
        return Err(Error::invalid(
            "verification grid is capped at d <= 8, K <= 4",
        ));
    }
    let mut rng = Rng::new(seed);
    let x = RealNodeFeatures::new(
        n,
        d,
        (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
    )?;
    let layers: Vec<TimeDomainLayer> = (0..k)
        .map(|_| TimeDomainLayer::random(n, d, &mut rng))
        .collect();
    let operators: Vec<PerFrequencyFgo> = layers.iter().map(fgo_from_kernel).collect();

    let spectral = spectral_multi_order(&x, &operators)?;
    let dense = time_domain_multi_order(&x, &layers)?;
    let max_abs_error = spectral
        .data
        .iter()
        .zip(dense.data.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(VerifyReport {
        max_abs_error,
        pass: max_abs_error < 1e-8,
    })
}

/// Circular convolution by direct summation: `(x * h)[i] = sum_m h[m] x[(i-m) mod n]`.
pub fn circular_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len();
    debug_assert_eq!(h.len(), n);
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (m, &hv) in h.iter().enumerate() {
                acc += hv * x[(n + i - m) % n];
            }
            acc
        })
        .collect()
}

fn dft_vector(x: &[f64]) -> Vec<Complex64> {
    let features = RealNodeFeatures::new(x.len(), 1, x.to_vec()).unwrap();
    dft_nodes(&features).unwrap().data
}

/// Check F(x circ h) = F(x) .* F(h) on random vectors.
pub fn verify_convolution_theorem(n: usize, seed: u64) -> Result<VerifyReport> {
    if n > 64 {
        return Err(Error::invalid("convolution check is capped at n <= 64"));
    }
    let mut rng = Rng::new(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let h: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let lhs = dft_vector(&circular_convolve(&x, &h));
    let fx = dft_vector(&x);
    let fh = dft_vector(&h);
    let max_abs_error = lhs
        .iter()
        .zip(fx.iter().zip(fh.iter()))
        .map(|(l, (a, b))| (l - a * b).norm())
        .fold(0.0f64, f64::max);
    Ok(VerifyReport {
        max_abs_error,
        pass: max_abs_error < 1e-9,
    })
}

/// Dense check that the DFT matrix diagonalizes a circulant operator:
/// F C F^-1 has negligible off-diagonal mass.
pub fn circulant_diagonalization_error(gso: &GreenKernelGso) -> f64 {
    let n = gso.n;
    let dense = gso.dense();
    let mut f = CMat::zeros(n, n);
    let mut f_inv = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let angle = -2.0 * PI * (i * j) as f64 / n as f64;
            f.data[i * n + j] = Complex64::from_polar(1.0, angle);
            f_inv.data[i * n + j] = Complex64::from_polar(1.0 / n as f64, -angle);
        }
    }
    let c: Vec<Complex64> = dense.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fc = vec![Complex64::new(0.0, 0.0); n * n];
    cmm(&f.data, n, n, &c, n, &mut fc);
    let mut fcf = vec![Complex64::new(0.0, 0.0); n * n];
    cmm(&fc, n, n, &f_inv.data, n, &mut fcf);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(fcf[i * n + j].norm());
            }
        }
    }
    worst
}
