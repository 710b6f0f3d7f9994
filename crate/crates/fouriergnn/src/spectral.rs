//! Complex node-feature arrays, discrete Fourier transforms along the node
//! axis, and the split-complex activations the rest of the pipeline builds on.
//!
//! Conventions: the forward transform is unnormalized, the inverse carries the
//! 1/n factor. The default transform is a flat 1-D DFT over all n = N*T nodes;
//! a planar mode transforms the (N, T) plane per feature channel instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft_forward, fft_inverse};

/// Real node features of shape (n, d), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealNodeFeatures {
    pub data: Vec<f64>,
    pub n: usize,
    pub d: usize,
}

impl RealNodeFeatures {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid("node features need n >= 1 and d >= 1"));
        }
        if data.len() != n * d {
            return Err(Error::shape(format!(
                "node features expect {} values, got {}",
                n * d,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::non_finite("node features"));
        }
        Ok(RealNodeFeatures { data, n, d })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        RealNodeFeatures {
            data: vec![0.0; n * d],
            n,
            d,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }
}

/// Complex node features of shape (n, d), row-major; by convention the result
/// of an unnormalized forward DFT along the node axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub data: Vec<Complex64>,
    pub n: usize,
    pub d: usize,
}

impl Spectrum {
    pub fn zeros(n: usize, d: usize) -> Self {
        Spectrum {
            data: vec![Complex64::new(0.0, 0.0); n * d],
            n,
            d,
        }
    }

    pub fn from_real(x: &RealNodeFeatures) -> Self {
        Spectrum {
            data: x.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            n: x.n,
            d: x.d,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.d + j]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.data.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}

/// Activation applied in Fourier space, acting independently on real and
/// imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "slope")]
pub enum ActivationKind {
    Identity,
    SplitRelu,
    LeakyRelu(f64),
}

impl ActivationKind {
    pub fn validate(&self) -> Result<()> {
        if let ActivationKind::LeakyRelu(s) = self {
            if !(*s > 0.0 && *s < 1.0) {
                return Err(Error::invalid(format!(
                    "leaky relu slope must be in (0, 1), got {s}"
                )));
            }
        }
        Ok(())
    }

    fn apply_part(&self, v: f64) -> f64 {
        match self {
            ActivationKind::Identity => v,
            ActivationKind::SplitRelu => v.max(0.0),
            ActivationKind::LeakyRelu(s) => {
                if v > 0.0 {
                    v
                } else {
                    v * s
                }
            }
        }
    }

    /// Split application to a complex value.
    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.apply_part(z.re), self.apply_part(z.im))
    }

    /// Derivative of the real activation at a preactivation value.
    pub fn grad_part(&self, v: f64) -> f64 {
        match self {
            ActivationKind::Identity => 1.0,
            ActivationKind::SplitRelu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::LeakyRelu(s) => {
                if v > 0.0 {
                    1.0
                } else {
                    *s
                }
            }
        }
    }
}

/// Which transform produces the spectrum from the node axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DftMode {
    /// 1-D DFT over all n = N*T nodes (default).
    Flat1d,
    /// 2-D DFT over the (N, T) plane, per feature channel.
    Planar2d,
}

/// Factorization of the node axis as (variables, timesteps).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLayout {
    pub n_vars: usize,
    pub n_steps: usize,
}

impl NodeLayout {
    pub fn nodes(&self) -> usize {
        self.n_vars * self.n_steps
    }
}

fn check_finite_real(x: &RealNodeFeatures, what: &str) -> Result<()> {
    if x.data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::non_finite(what))
    }
}

fn check_finite_spectrum(x: &Spectrum, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::non_finite(what))
    }
}

/// Forward DFT of each feature column along the node axis (flat 1-D).
pub fn dft_nodes(x: &RealNodeFeatures) -> Result<Spectrum> {
    check_finite_real(x, "dft_nodes input")?;
    let mut s = Spectrum::from_real(x);
    transform_columns(&mut s, false);
    Ok(s)
}

/// Forward DFT of an already-complex spectrum along the node axis.
pub fn dft_spectrum(x: &Spectrum) -> Result<Spectrum> {
    check_finite_spectrum(x, "dft_spectrum input")?;
    let mut s = x.clone();
    transform_columns(&mut s, false);
    Ok(s)
}

/// Inverse DFT along the node axis, scaled by 1/n.
pub fn idft_nodes(x: &Spectrum) -> Result<Spectrum> {
    check_finite_spectrum(x, "idft_nodes input")?;
    let mut s = x.clone();
    transform_columns(&mut s, true);
    Ok(s)
}

/// Forward 2-D DFT over the (N, T) plane of each feature channel.
pub fn dft_planar(x: &RealNodeFeatures, layout: NodeLayout) -> Result<Spectrum> {
    check_finite_real(x, "dft_planar input")?;
    if layout.nodes() != x.n {
        return Err(Error::shape(format!(
            "planar layout {}x{} does not cover {} nodes",
            layout.n_vars, layout.n_steps, x.n
        )));
    }
    let mut s = Spectrum::from_real(x);
    transform_planar(&mut s, layout, false);
    Ok(s)
}

/// Forward 2-D DFT of an already-complex spectrum.
pub fn dft_planar_spectrum(x: &Spectrum, layout: NodeLayout) -> Result<Spectrum> {
    check_finite_spectrum(x, "dft_planar input")?;
    if layout.nodes() != x.n {
        return Err(Error::shape("planar layout does not cover node count"));
    }
    let mut s = x.clone();
    transform_planar(&mut s, layout, false);
    Ok(s)
}

/// Inverse 2-D DFT over the (N, T) plane, total scaling 1/(N*T).
pub fn idft_planar(x: &Spectrum, layout: NodeLayout) -> Result<Spectrum> {
    check_finite_spectrum(x, "idft_planar input")?;
    if layout.nodes() != x.n {
        return Err(Error::shape("planar layout does not cover node count"));
    }
    let mut s = x.clone();
    transform_planar(&mut s, layout, true);
    Ok(s)
}

/// Mode dispatch for the forward transform of real input.
pub fn dft_with_mode(x: &RealNodeFeatures, mode: DftMode, layout: NodeLayout) -> Result<Spectrum> {
    match mode {
        DftMode::Flat1d => dft_nodes(x),
        DftMode::Planar2d => dft_planar(x, layout),
    }
}

/// Mode dispatch for the forward transform of complex input.
pub fn dft_spectrum_with_mode(x: &Spectrum, mode: DftMode, layout: NodeLayout) -> Result<Spectrum> {
    match mode {
        DftMode::Flat1d => dft_spectrum(x),
        DftMode::Planar2d => dft_planar_spectrum(x, layout),
    }
}

/// Mode dispatch for the inverse transform.
pub fn idft_with_mode(x: &Spectrum, mode: DftMode, layout: NodeLayout) -> Result<Spectrum> {
    match mode {
        DftMode::Flat1d => idft_nodes(x),
        DftMode::Planar2d => idft_planar(x, layout),
    }
}

fn transform_columns(s: &mut Spectrum, inverse: bool) {
    let (n, d) = (s.n, s.d);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..d {
        for i in 0..n {
            scratch[i] = s.data[i * d + j];
        }
        if inverse {
            fft_inverse(&mut scratch);
        } else {
            fft_forward(&mut scratch);
        }
        for i in 0..n {
            s.data[i * d + j] = scratch[i];
        }
    }
}

fn transform_planar(s: &mut Spectrum, layout: NodeLayout, inverse: bool) {
    let (nv, nt, d) = (layout.n_vars, layout.n_steps, s.d);
    // Along the time axis: rows of each (N, T) plane are contiguous blocks of T nodes.
    let mut scratch_t = vec![Complex64::new(0.0, 0.0); nt];
    for v in 0..nv {
        for j in 0..d {
            for t in 0..nt {
                scratch_t[t] = s.data[(v * nt + t) * d + j];
            }
            if inverse {
                fft_inverse(&mut scratch_t);
            } else {
                fft_forward(&mut scratch_t);
            }
            for t in 0..nt {
                s.data[(v * nt + t) * d + j] = scratch_t[t];
            }
        }
    }
    // Along the variable axis.
    let mut scratch_v = vec![Complex64::new(0.0, 0.0); nv];
    for t in 0..nt {
        for j in 0..d {
            for v in 0..nv {
                scratch_v[v] = s.data[(v * nt + t) * d + j];
            }
            if inverse {
                fft_inverse(&mut scratch_v);
            } else {
                fft_forward(&mut scratch_v);
            }
            for v in 0..nv {
                s.data[(v * nt + t) * d + j] = scratch_v[v];
            }
        }
    }
}

/// Discard imaginary parts (training mode: residual imaginary mass from
/// nonlinear activations in Fourier space is expected).
pub fn to_real(x: &Spectrum) -> RealNodeFeatures {
    RealNodeFeatures {
        data: x.data.iter().map(|c| c.re).collect(),
        n: x.n,
        d: x.d,
    }
}

/// Discard imaginary parts after asserting they are numerically negligible
/// (verification mode, for linear conjugate-symmetric pipelines).
pub fn to_real_verified(x: &Spectrum, tol: f64) -> Result<RealNodeFeatures> {
    let worst = x.max_imag_abs();
    if worst >= tol {
        return Err(Error::invalid(format!(
            "spectrum not real after inverse transform: max |imag| = {worst:e} >= {tol:e}"
        )));
    }
    Ok(to_real(x))
}

/// Standard complex matrix product x (n, d) * w (d, d').
pub fn complex_matmul(x: &Spectrum, w: &crate::linalg::CMat) -> Result<Spectrum> {
    if x.d != w.rows {
        return Err(Error::shape(format!(
            "complex_matmul: spectrum has d = {}, weight has {} rows",
            x.d, w.rows
        )));
    }
    let mut out = Spectrum::zeros(x.n, w.cols);
    crate::linalg::cmm(&x.data, x.n, x.d, &w.data, w.cols, &mut out.data);
    Ok(out)
}

/// Apply an activation independently to real and imaginary parts.
pub fn apply_activation(x: &Spectrum, kind: ActivationKind) -> Spectrum {
    match kind {
        ActivationKind::Identity => x.clone(),
        _ => Spectrum {
            data: x.data.iter().map(|&c| kind.apply_complex(c)).collect(),
            n: x.n,
            d: x.d,
        },
    }
}

/// Elementwise max(x, slope * x).
pub fn leaky_relu_real(x: &[f64], slope: f64) -> Vec<f64> {
    x.iter().map(|&v| v.max(slope * v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use crate::rng::Rng;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn random_features(n: usize, d: usize, seed: u64) -> RealNodeFeatures {
        let mut rng = Rng::new(seed);
        RealNodeFeatures::new(
            n,
            d,
            (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap()
    }

    /// Direct O(n^2) DFT summation, the independent oracle for the fast path.
    fn naive_dft_columns(x: &RealNodeFeatures) -> Spectrum {
        let mut out = Spectrum::zeros(x.n, x.d);
        for j in 0..x.d {
            for i in 0..x.n {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..x.n {
                    let angle = -2.0 * PI * (i * t) as f64 / x.n as f64;
                    acc += Complex64::from_polar(x.at(t, j), angle);
                }
                out.data[i * x.d + j] = acc;
            }
        }
        out
    }

    #[test]
    fn delta_transforms_to_all_ones() {
        let x = RealNodeFeatures::new(2, 1, vec![1.0, 0.0]).unwrap();
        let s = dft_nodes(&x).unwrap();
        assert!((s.at(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s.at(1, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_transforms_to_dc_only() {
        let x = RealNodeFeatures::new(2, 1, vec![1.0, 1.0]).unwrap();
        let s = dft_nodes(&x).unwrap();
        assert!((s.at(0, 0) - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(s.at(1, 0).norm() < 1e-12);
    }

    #[test]
    fn matches_naive_summation() {
        let x = random_features(8, 3, 42);
        let fast = dft_nodes(&x).unwrap();
        let slow = naive_dft_columns(&x);
        let err = fast
            .data
            .iter()
            .zip(slow.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10, "max error {err}");
    }

    #[test]
    fn complex_input_dft_matches_naive_summation() {
        let mut rng = Rng::new(61);
        let (n, d) = (7usize, 2usize);
        let x = Spectrum {
            data: (0..n * d)
                .map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)))
                .collect(),
            n,
            d,
        };
        let fast = dft_spectrum(&x).unwrap();
        for j in 0..d {
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..n {
                    let angle = -2.0 * PI * (i * t) as f64 / n as f64;
                    acc += x.at(t, j) * Complex64::from_polar(1.0, angle);
                }
                assert!((fast.at(i, j) - acc).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let err = RealNodeFeatures::new(2, 1, vec![f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        let mut s = Spectrum::zeros(2, 1);
        s.data[0] = Complex64::new(f64::INFINITY, 0.0);
        assert!(idft_nodes(&s).is_err());
    }

    #[test]
    fn round_trip_on_random_input() {
        let x = random_features(16, 4, 7);
        let back = idft_nodes(&dft_nodes(&x).unwrap()).unwrap();
        let real = to_real_verified(&back, 1e-8).unwrap();
        let err = real
            .data
            .iter()
            .zip(x.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let s = Spectrum::zeros(5, 2);
        let out = idft_nodes(&s).unwrap();
        assert!(out.data.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dc_only_inverts_to_constant() {
        let mut s = Spectrum::zeros(4, 1);
        s.data[0] = Complex64::new(4.0, 0.0);
        let out = idft_nodes(&s).unwrap();
        for i in 0..4 {
            assert!((out.at(i, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_symmetry_for_real_input() {
        for &n in &[5usize, 8, 12] {
            let x = random_features(n, 2, n as u64 + 1);
            let s = dft_nodes(&x).unwrap();
            for i in 0..n {
                for j in 0..2 {
                    let mirrored = s.at((n - i) % n, j);
                    assert!((s.at(i, j).conj() - mirrored).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn complex_matmul_identity_and_scalar() {
        let x = random_features(4, 3, 11);
        let s = dft_nodes(&x).unwrap();
        let out = complex_matmul(&s, &CMat::identity(3)).unwrap();
        let err = out
            .data
            .iter()
            .zip(s.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12);

        // (1+i)(1-i) = 2
        let one = Spectrum {
            data: vec![Complex64::new(1.0, 1.0)],
            n: 1,
            d: 1,
        };
        let w = CMat {
            rows: 1,
            cols: 1,
            data: vec![Complex64::new(1.0, -1.0)],
        };
        let out = complex_matmul(&one, &w).unwrap();
        assert!((out.data[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_matmul_matches_scalar_expansion() {
        let mut rng = Rng::new(5);
        let x = Spectrum {
            data: (0..6)
                .map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)))
                .collect(),
            n: 3,
            d: 2,
        };
        let w = CMat {
            rows: 2,
            cols: 2,
            data: (0..4)
                .map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)))
                .collect(),
        };
        let out = complex_matmul(&x, &w).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += x.at(i, k) * w.at(k, j);
                }
                assert!((out.at(i, j) - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_matmul_rejects_shape_mismatch() {
        let x = Spectrum::zeros(2, 3);
        let w = CMat::identity(2);
        assert!(complex_matmul(&x, &w).is_err());
    }

    #[test]
    fn split_relu_definition() {
        let s = Spectrum {
            data: vec![Complex64::new(-1.0, 2.0)],
            n: 1,
            d: 1,
        };
        let out = apply_activation(&s, ActivationKind::SplitRelu);
        assert_eq!(out.data[0], Complex64::new(0.0, 2.0));

        let out = apply_activation(&s, ActivationKind::Identity);
        assert_eq!(out.data[0], s.data[0]);

        let neg = Spectrum {
            data: vec![Complex64::new(-1.0, -1.0)],
            n: 1,
            d: 1,
        };
        let out = apply_activation(&neg, ActivationKind::LeakyRelu(0.01));
        assert!((out.data[0] - Complex64::new(-0.01, -0.01)).norm() < 1e-15);
    }

    #[test]
    fn leaky_relu_real_values() {
        assert_eq!(leaky_relu_real(&[2.0], 0.01), vec![2.0]);
        assert_eq!(leaky_relu_real(&[-2.0], 0.01), vec![-0.02]);
        assert_eq!(leaky_relu_real(&[0.0], 0.01), vec![0.0]);
    }

    #[test]
    fn activation_kind_validation() {
        assert!(ActivationKind::LeakyRelu(0.5).validate().is_ok());
        assert!(ActivationKind::LeakyRelu(0.0).validate().is_err());
        assert!(ActivationKind::LeakyRelu(1.0).validate().is_err());
    }

    #[test]
    fn planar_equals_flat_when_single_variable() {
        let x = random_features(12, 2, 33);
        let layout = NodeLayout {
            n_vars: 1,
            n_steps: 12,
        };
        let flat = dft_nodes(&x).unwrap();
        let planar = dft_planar(&x, layout).unwrap();
        let err = flat
            .data
            .iter()
            .zip(planar.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn planar_round_trip() {
        let layout = NodeLayout {
            n_vars: 3,
            n_steps: 4,
        };
        let x = random_features(12, 2, 21);
        let back = idft_planar(&dft_planar(&x, layout).unwrap(), layout).unwrap();
        let real = to_real_verified(&back, 1e-8).unwrap();
        let err = real
            .data
            .iter()
            .zip(x.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10);
    }

    proptest! {
        #[test]
        fn round_trip_property(n in 1usize..48, d in 1usize..4, seed in 0u64..1000) {
            let x = random_features(n, d, seed);
            let back = idft_nodes(&dft_nodes(&x).unwrap()).unwrap();
            let real = to_real(&back);
            for (a, b) in real.data.iter().zip(x.data.iter()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn linearity_property(n in 2usize..32, seed in 0u64..1000) {
            let x = random_features(n, 2, seed);
            let y = random_features(n, 2, seed + 7919);
            let (a, b) = (0.7, -1.3);
            let combo = RealNodeFeatures::new(
                n,
                2,
                x.data.iter().zip(y.data.iter()).map(|(u, v)| a * u + b * v).collect(),
            ).unwrap();
            let lhs = dft_nodes(&combo).unwrap();
            let fx = dft_nodes(&x).unwrap();
            let fy = dft_nodes(&y).unwrap();
            for i in 0..n * 2 {
                let rhs = fx.data[i] * a + fy.data[i] * b;
                prop_assert!((lhs.data[i] - rhs).norm() < 1e-10);
            }
        }
    }
}
