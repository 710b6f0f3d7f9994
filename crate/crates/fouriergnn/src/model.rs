//! Hypervariate-graph construction, node embedding, the stacked Fourier-space
//! graph operator forward pass, the feed-forward forecasting head, and
//! adjacency export from learned node representations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rmm, CMat};
use crate::rng::Rng;
use crate::spectral::{
    apply_activation, dft_with_mode, idft_with_mode, to_real, ActivationKind, DftMode, NodeLayout,
    RealNodeFeatures, Spectrum,
};

/// One lookback window: input (N, T) and forecast target (N, tau), row-major
/// over variables. `origin` is the absolute row index of the last observed
/// timestamp in the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct MtsWindow {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    pub n_vars: usize,
    pub lookback: usize,
    pub horizon: usize,
    pub origin: usize,
}

impl MtsWindow {
    pub fn new(
        input: Vec<f64>,
        target: Vec<f64>,
        n_vars: usize,
        lookback: usize,
        horizon: usize,
        origin: usize,
    ) -> Result<Self> {
        if n_vars == 0 || lookback == 0 || horizon == 0 {
            return Err(Error::invalid("window needs N, T, tau >= 1"));
        }
        if input.len() != n_vars * lookback || target.len() != n_vars * horizon {
            return Err(Error::shape("window buffers do not match (N, T, tau)"));
        }
        if !input.iter().chain(target.iter()).all(|v| v.is_finite()) {
            return Err(Error::non_finite("window"));
        }
        Ok(MtsWindow {
            input,
            target,
            n_vars,
            lookback,
            horizon,
            origin,
        })
    }

    pub fn input_at(&self, var: usize, step: usize) -> f64 {
        self.input[var * self.lookback + step]
    }
}

/// Fully-connected hypervariate graph over one window. The adjacency is
/// implicit; node index = variable * T + timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct HypervariateGraph {
    pub node_features: Vec<f64>,
    pub n_vars: usize,
    pub n_steps: usize,
}

impl HypervariateGraph {
    pub fn node_count(&self) -> usize {
        self.n_vars * self.n_steps
    }

    pub fn layout(&self) -> NodeLayout {
        NodeLayout {
            n_vars: self.n_vars,
            n_steps: self.n_steps,
        }
    }
}

/// One Fourier-space graph operator layer: a complex d x d matrix and a
/// complex bias of length d, stored as real/imaginary pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FgoLayer {
    pub d: usize,
    pub s_re: Vec<f64>,
    pub s_im: Vec<f64>,
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
}

impl FgoLayer {
    pub fn zeros(d: usize) -> Self {
        FgoLayer {
            d,
            s_re: vec![0.0; d * d],
            s_im: vec![0.0; d * d],
            b_re: vec![0.0; d],
            b_im: vec![0.0; d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut layer = FgoLayer::zeros(d);
        for i in 0..d {
            layer.s_re[i * d + i] = 1.0;
        }
        layer
    }

    pub fn weight(&self) -> CMat {
        CMat::from_re_im(self.d, self.d, &self.s_re, &self.s_im)
    }

    pub fn bias(&self) -> Vec<Complex64> {
        self.b_re
            .iter()
            .zip(self.b_im.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }
}

/// Three-layer feed-forward forecasting head with an optional time-axis
/// reduction (T -> l) applied before flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct FfnHead {
    pub lookback: usize,
    pub reduced_len: usize,
    pub horizon: usize,
    pub d_ffn1: usize,
    pub d_ffn2: usize,
    /// (T, l) reduction matrix; absent when l == T.
    pub time_reduce: Option<Vec<f64>>,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
    pub leaky_slope: f64,
}

/// Structural ablation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    Full,
    /// Raw node scalars enter the operator stack (d forced to 1).
    NoEmbedding,
    /// All K layers share one (s, b).
    NoDynamicFgo,
    /// The k = 0 spectrum is dropped from the summation.
    NoResidual,
    /// Only the K-th term is emitted.
    NoSummation,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::Full,
        Ablation::NoEmbedding,
        Ablation::NoDynamicFgo,
        Ablation::NoResidual,
        Ablation::NoSummation,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoEmbedding => "no_embedding",
            Ablation::NoDynamicFgo => "no_dynamic_fgo",
            Ablation::NoResidual => "no_residual",
            Ablation::NoSummation => "no_summation",
        }
    }
}

/// Everything needed to rebuild the architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_vars: usize,
    pub lookback: usize,
    pub horizon: usize,
    pub embed_dim: usize,
    pub n_layers: usize,
    pub reduced_len: usize,
    pub d_ffn1: usize,
    pub d_ffn2: usize,
    pub dft_mode: DftMode,
    pub activation: ActivationKind,
    pub recursive_activation: bool,
    pub leaky_slope: f64,
    pub ablation: Ablation,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_vars == 0 || self.lookback == 0 || self.horizon == 0 {
            return Err(Error::invalid("config needs N, T, tau >= 1"));
        }
        if self.embed_dim == 0 || self.n_layers == 0 {
            return Err(Error::invalid("config needs d >= 1 and K >= 1"));
        }
        if self.reduced_len == 0 || self.reduced_len > self.lookback {
            return Err(Error::invalid("reduced length l must satisfy 1 <= l <= T"));
        }
        if self.d_ffn1 == 0 || self.d_ffn2 == 0 {
            return Err(Error::invalid("FFN dims must be >= 1"));
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return Err(Error::invalid("leaky slope must be in (0, 1)"));
        }
        if self.ablation == Ablation::NoEmbedding && self.embed_dim != 1 {
            return Err(Error::invalid(
                "the no-embedding variant requires embed_dim = 1",
            ));
        }
        self.activation.validate()
    }

    pub fn node_count(&self) -> usize {
        self.n_vars * self.lookback
    }

    pub fn layout(&self) -> NodeLayout {
        NodeLayout {
            n_vars: self.n_vars,
            n_steps: self.lookback,
        }
    }

    /// Closed-form count of real-valued parameters.
    pub fn parameter_count(&self) -> usize {
        let d = self.embed_dim;
        let reduce = if self.reduced_len < self.lookback {
            self.lookback * self.reduced_len
        } else {
            0
        };
        d + self.n_layers * (2 * d * d + 2 * d)
            + reduce
            + (self.reduced_len * d) * self.d_ffn1
            + self.d_ffn1
            + self.d_ffn1 * self.d_ffn2
            + self.d_ffn2
            + self.d_ffn2 * self.horizon
            + self.horizon
    }
}

/// The full set of learnable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierGnnModel {
    pub config: ModelConfig,
    pub embedding: Vec<f64>,
    pub layers: Vec<FgoLayer>,
    pub head: FfnHead,
}

impl FourierGnnModel {
    /// Scaled-uniform initialization from a seed; biases start at zero.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = Rng::new(seed);
        let d = config.embed_dim;
        let (t, l) = (config.lookback, config.reduced_len);
        let (d1, d2, tau) = (config.d_ffn1, config.d_ffn2, config.horizon);

        let embedding: Vec<f64> = (0..d).map(|_| rng.uniform_in(-1.0, 1.0)).collect();

        let bound = 1.0 / (d as f64).sqrt();
        let mut layers: Vec<FgoLayer> = (0..config.n_layers)
            .map(|_| {
                let mut layer = FgoLayer::zeros(d);
                for v in layer.s_re.iter_mut() {
                    *v = rng.uniform_in(-bound, bound);
                }
                for v in layer.s_im.iter_mut() {
                    *v = rng.uniform_in(-bound, bound);
                }
                layer
            })
            .collect();
        if config.ablation == Ablation::NoDynamicFgo {
            // Shared-operator variant: every slot holds the same (s, b).
            let shared = layers[0].clone();
            for layer in layers.iter_mut() {
                *layer = shared.clone();
            }
        }

        let time_reduce = if l < t {
            let b = 1.0 / (t as f64).sqrt();
            Some((0..t * l).map(|_| rng.uniform_in(-b, b)).collect())
        } else {
            None
        };
        let b1w = 1.0 / ((l * d) as f64).sqrt();
        let w1: Vec<f64> = (0..l * d * d1).map(|_| rng.uniform_in(-b1w, b1w)).collect();
        let b2w = 1.0 / (d1 as f64).sqrt();
        let w2: Vec<f64> = (0..d1 * d2).map(|_| rng.uniform_in(-b2w, b2w)).collect();
        let b3w = 1.0 / (d2 as f64).sqrt();
        let w3: Vec<f64> = (0..d2 * tau).map(|_| rng.uniform_in(-b3w, b3w)).collect();

        let head = FfnHead {
            lookback: t,
            reduced_len: l,
            horizon: tau,
            d_ffn1: d1,
            d_ffn2: d2,
            time_reduce,
            w1,
            b1: vec![0.0; d1],
            w2,
            b2: vec![0.0; d2],
            w3,
            b3: vec![0.0; tau],
            leaky_slope: config.leaky_slope,
        };

        Ok(FourierGnnModel {
            config,
            embedding,
            layers,
            head,
        })
    }

    /// Named flat views over every parameter tensor, in a fixed order
    /// (complex tensors appear as real/imaginary pairs).
    pub fn tensor_views(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        out.push(("embedding".to_string(), self.embedding.as_slice()));
        for (k, layer) in self.layers.iter().enumerate() {
            out.push((format!("fgo.{k}.s_re"), layer.s_re.as_slice()));
            out.push((format!("fgo.{k}.s_im"), layer.s_im.as_slice()));
            out.push((format!("fgo.{k}.b_re"), layer.b_re.as_slice()));
            out.push((format!("fgo.{k}.b_im"), layer.b_im.as_slice()));
        }
        if let Some(tr) = &self.head.time_reduce {
            out.push(("head.time_reduce".to_string(), tr.as_slice()));
        }
        out.push(("head.w1".to_string(), self.head.w1.as_slice()));
        out.push(("head.b1".to_string(), self.head.b1.as_slice()));
        out.push(("head.w2".to_string(), self.head.w2.as_slice()));
        out.push(("head.b2".to_string(), self.head.b2.as_slice()));
        out.push(("head.w3".to_string(), self.head.w3.as_slice()));
        out.push(("head.b3".to_string(), self.head.b3.as_slice()));
        out
    }

    pub fn tensor_views_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        out.push(("embedding".to_string(), self.embedding.as_mut_slice()));
        for (k, layer) in self.layers.iter_mut().enumerate() {
            out.push((format!("fgo.{k}.s_re"), layer.s_re.as_mut_slice()));
            out.push((format!("fgo.{k}.s_im"), layer.s_im.as_mut_slice()));
            out.push((format!("fgo.{k}.b_re"), layer.b_re.as_mut_slice()));
            out.push((format!("fgo.{k}.b_im"), layer.b_im.as_mut_slice()));
        }
        if let Some(tr) = &mut self.head.time_reduce {
            out.push(("head.time_reduce".to_string(), tr.as_mut_slice()));
        }
        out.push(("head.w1".to_string(), self.head.w1.as_mut_slice()));
        out.push(("head.b1".to_string(), self.head.b1.as_mut_slice()));
        out.push(("head.w2".to_string(), self.head.w2.as_mut_slice()));
        out.push(("head.b2".to_string(), self.head.b2.as_mut_slice()));
        out.push(("head.w3".to_string(), self.head.w3.as_mut_slice()));
        out.push(("head.b3".to_string(), self.head.b3.as_mut_slice()));
        out
    }

    /// Parameter count by walking the actual tensors.
    pub fn parameter_count_enumerated(&self) -> usize {
        self.tensor_views().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Flatten a window into hypervariate node features; node v * T + s holds
/// input[v, s].
pub fn build_hypervariate(window: &MtsWindow) -> HypervariateGraph {
    HypervariateGraph {
        node_features: window.input.clone(),
        n_vars: window.n_vars,
        n_steps: window.lookback,
    }
}

/// Outer product of node scalars with the embedding vector.
pub fn embed_nodes(graph: &HypervariateGraph, embedding: &[f64]) -> RealNodeFeatures {
    let n = graph.node_count();
    let d = embedding.len();
    let mut data = vec![0.0; n * d];
    for (i, &x) in graph.node_features.iter().enumerate() {
        for (j, &e) in embedding.iter().enumerate() {
            data[i * d + j] = x * e;
        }
    }
    RealNodeFeatures { data, n, d }
}

/// Intermediates of one operator-stack evaluation, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct StackTrace {
    pub spec0: Spectrum,
    /// chain[k-1] is P_k (default form) or H_k (recursive form).
    pub chain: Vec<Spectrum>,
    /// preact[k-1] is the pre-activation Z_k.
    pub preact: Vec<Spectrum>,
    pub output: Spectrum,
}

pub(crate) fn term_included(ablation: Ablation, k: usize, k_max: usize) -> bool {
    match ablation {
        Ablation::NoSummation => k == k_max,
        Ablation::NoResidual => k >= 1,
        _ => true,
    }
}

/// Stack evaluation on an already-transformed spectrum.
///
/// Default form: P_k = P_{k-1} S_k, output = P_0 + sum_k sigma(P_k + b_k).
/// Recursive form: H_k = sigma(H_{k-1} S_k + b_k), output = sum_k H_k with
/// H_0 = P_0. The residual is added last so that the full output minus the
/// no-residual output equals the raw spectrum exactly.
pub fn fgo_stack(
    spec0: Spectrum,
    weights: &[CMat],
    biases: &[Vec<Complex64>],
    activation: ActivationKind,
    recursive: bool,
    ablation: Ablation,
) -> Result<StackTrace> {
    let (n, d) = (spec0.n, spec0.d);
    let k_max = weights.len();
    for w in weights {
        if w.rows != d || w.cols != d {
            return Err(Error::shape("operator weight must be d x d"));
        }
    }
    let mut chain = Vec::with_capacity(k_max);
    let mut preact = Vec::with_capacity(k_max);
    let mut acc = Spectrum::zeros(n, d);
    let mut prev = spec0.clone();

    for k in 1..=k_max {
        let w = &weights[k - 1];
        let b = &biases[k - 1];
        let mut product = Spectrum::zeros(n, d);
        crate::linalg::cmm(&prev.data, n, d, &w.data, d, &mut product.data);

        let mut z = product.clone();
        for row in 0..n {
            for (j, bj) in b.iter().enumerate() {
                z.data[row * d + j] += bj;
            }
        }
        let activated = apply_activation(&z, activation);

        if recursive {
            // The activated value feeds the next layer.
            if term_included(ablation, k, k_max) {
                for (a, v) in acc.data.iter_mut().zip(activated.data.iter()) {
                    *a += v;
                }
            }
            chain.push(activated.clone());
            preact.push(z);
            prev = activated;
        } else {
            // The raw product feeds the next layer.
            if term_included(ablation, k, k_max) {
                for (a, v) in acc.data.iter_mut().zip(activated.data.iter()) {
                    *a += v;
                }
            }
            chain.push(product.clone());
            preact.push(z);
            prev = product;
        }
    }

    if term_included(ablation, 0, k_max) {
        for (a, v) in acc.data.iter_mut().zip(spec0.data.iter()) {
            *a += v;
        }
    }

    Ok(StackTrace {
        spec0,
        chain,
        preact,
        output: acc,
    })
}

/// Stack evaluation that keeps no intermediates; used where only the output
/// matters (inference-free paths such as the scaling benchmark).
pub fn fgo_stack_output(
    spec0: Spectrum,
    weights: &[CMat],
    biases: &[Vec<Complex64>],
    activation: ActivationKind,
    recursive: bool,
    ablation: Ablation,
) -> Result<Spectrum> {
    let (n, d) = (spec0.n, spec0.d);
    let k_max = weights.len();
    for w in weights {
        if w.rows != d || w.cols != d {
            return Err(Error::shape("operator weight must be d x d"));
        }
    }
    let mut acc = Spectrum::zeros(n, d);
    let mut prev = spec0.clone();
    let mut product = Spectrum::zeros(n, d);
    for k in 1..=k_max {
        crate::linalg::cmm(&prev.data, n, d, &weights[k - 1].data, d, &mut product.data);
        let b = &biases[k - 1];
        let include = term_included(ablation, k, k_max);
        if recursive {
            // The activated value feeds the next layer; overwrite product.
            for (idx, v) in product.data.iter_mut().enumerate() {
                *v = activation.apply_complex(*v + b[idx % d]);
                if include {
                    acc.data[idx] += *v;
                }
            }
            std::mem::swap(&mut prev, &mut product);
        } else {
            if include {
                for (idx, &v) in product.data.iter().enumerate() {
                    acc.data[idx] += activation.apply_complex(v + b[idx % d]);
                }
            }
            std::mem::swap(&mut prev, &mut product);
        }
    }
    if term_included(ablation, 0, k_max) {
        for (a, v) in acc.data.iter_mut().zip(spec0.data.iter()) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Full stack on real input via the flat node-axis DFT (all terms included).
pub fn fgo_forward(
    x: &RealNodeFeatures,
    layers: &[FgoLayer],
    activation: ActivationKind,
    recursive: bool,
) -> Result<Spectrum> {
    for layer in layers {
        if layer.d != x.d {
            return Err(Error::shape(format!(
                "layer dimension {} does not match features d = {}",
                layer.d, x.d
            )));
        }
    }
    let spec0 = crate::spectral::dft_nodes(x)?;
    let weights: Vec<CMat> = layers.iter().map(|l| l.weight()).collect();
    let biases: Vec<Vec<Complex64>> = layers.iter().map(|l| l.bias()).collect();
    Ok(fgo_stack(
        spec0,
        &weights,
        &biases,
        activation,
        recursive,
        Ablation::Full,
    )?
    .output)
}

/// Intermediates of one head evaluation.
#[derive(Debug, Clone)]
pub struct FfnTrace {
    /// (N, l * d) input after time reduction and flattening.
    pub flat: Vec<f64>,
    pub z1: Vec<f64>,
    pub x1: Vec<f64>,
    pub z2: Vec<f64>,
    pub x2: Vec<f64>,
    pub pred: Vec<f64>,
}

pub fn ffn_forward_trace(y: &RealNodeFeatures, head: &FfnHead, n_vars: usize) -> Result<FfnTrace> {
    let (t, l) = (head.lookback, head.reduced_len);
    let d = y.d;
    if y.n != n_vars * t {
        return Err(Error::shape(format!(
            "head expects {} x {} nodes, got {}",
            n_vars, t, y.n
        )));
    }
    if head.w1.len() != l * d * head.d_ffn1 {
        return Err(Error::shape("head w1 does not match (l * d, d_ffn1)"));
    }

    // Reshape (N*T, d) -> (N, T, d), reduce T -> l, flatten to (N, l*d).
    let mut flat = vec![0.0; n_vars * l * d];
    match &head.time_reduce {
        Some(reduce) => {
            for v in 0..n_vars {
                for li in 0..l {
                    for j in 0..d {
                        let mut acc = 0.0;
                        for s in 0..t {
                            acc += y.data[(v * t + s) * d + j] * reduce[s * l + li];
                        }
                        flat[v * (l * d) + li * d + j] = acc;
                    }
                }
            }
        }
        None => {
            if l != t {
                return Err(Error::shape("missing time_reduce requires l == T"));
            }
            flat.copy_from_slice(&y.data);
        }
    }

    let (d1, d2, tau) = (head.d_ffn1, head.d_ffn2, head.horizon);
    let mut z1 = vec![0.0; n_vars * d1];
    rmm(&flat, n_vars, l * d, &head.w1, d1, &mut z1);
    for row in 0..n_vars {
        for (j, b) in head.b1.iter().enumerate() {
            z1[row * d1 + j] += b;
        }
    }
    let x1 = crate::spectral::leaky_relu_real(&z1, head.leaky_slope);

    let mut z2 = vec![0.0; n_vars * d2];
    rmm(&x1, n_vars, d1, &head.w2, d2, &mut z2);
    for row in 0..n_vars {
        for (j, b) in head.b2.iter().enumerate() {
            z2[row * d2 + j] += b;
        }
    }
    let x2 = crate::spectral::leaky_relu_real(&z2, head.leaky_slope);

    let mut pred = vec![0.0; n_vars * tau];
    rmm(&x2, n_vars, d2, &head.w3, tau, &mut pred);
    for row in 0..n_vars {
        for (j, b) in head.b3.iter().enumerate() {
            pred[row * tau + j] += b;
        }
    }

    Ok(FfnTrace {
        flat,
        z1,
        x1,
        z2,
        x2,
        pred,
    })
}

/// Project node representations onto the forecast horizon.
pub fn ffn_project(y: &RealNodeFeatures, head: &FfnHead, n_vars: usize) -> Result<Vec<f64>> {
    Ok(ffn_forward_trace(y, head, n_vars)?.pred)
}

/// All intermediates of one end-to-end forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub embedded: RealNodeFeatures,
    pub stack: StackTrace,
    pub y_real: RealNodeFeatures,
    pub ffn: FfnTrace,
}

/// Forward pass with prepared complex weights (reused across a batch).
pub(crate) fn forward_trace_prepared(
    model: &FourierGnnModel,
    window: &MtsWindow,
    weights: &[CMat],
    biases: &[Vec<Complex64>],
) -> Result<ForwardTrace> {
    let cfg = &model.config;
    if window.n_vars != cfg.n_vars
        || window.lookback != cfg.lookback
        || window.horizon != cfg.horizon
    {
        return Err(Error::shape("window dims do not match model config"));
    }
    let graph = build_hypervariate(window);
    let embedded = if cfg.ablation == Ablation::NoEmbedding {
        RealNodeFeatures {
            data: graph.node_features.clone(),
            n: graph.node_count(),
            d: 1,
        }
    } else {
        embed_nodes(&graph, &model.embedding)
    };
    let layout = graph.layout();
    let spec0 = dft_with_mode(&embedded, cfg.dft_mode, layout)?;
    let stack = fgo_stack(
        spec0,
        weights,
        biases,
        cfg.activation,
        cfg.recursive_activation,
        cfg.ablation,
    )?;
    let y_complex = idft_with_mode(&stack.output, cfg.dft_mode, layout)?;
    let y_real = to_real(&y_complex);
    let ffn = ffn_forward_trace(&y_real, &model.head, cfg.n_vars)?;
    if !ffn.pred.iter().all(|v| v.is_finite()) {
        return Err(Error::non_finite("forecast"));
    }
    Ok(ForwardTrace {
        embedded,
        stack,
        y_real,
        ffn,
    })
}

pub fn forward_trace(model: &FourierGnnModel, window: &MtsWindow) -> Result<ForwardTrace> {
    let weights: Vec<CMat> = model.layers.iter().map(|l| l.weight()).collect();
    let biases: Vec<Vec<Complex64>> = model.layers.iter().map(|l| l.bias()).collect();
    forward_trace_prepared(model, window, &weights, &biases)
}

/// End-to-end forecast for one window, shape (N, tau) row-major.
pub fn model_forward(model: &FourierGnnModel, window: &MtsWindow) -> Result<Vec<f64>> {
    Ok(forward_trace(model, window)?.ffn.pred)
}

/// Time-domain node representation (the head input), used for adjacency export.
pub fn node_representation(
    model: &FourierGnnModel,
    window: &MtsWindow,
) -> Result<RealNodeFeatures> {
    Ok(forward_trace(model, window)?.y_real)
}

/// Gram matrix of node representations normalized by its maximum entry.
pub fn export_adjacency(y: &RealNodeFeatures, node_cap: usize) -> Result<Vec<f64>> {
    if y.n > node_cap {
        return Err(Error::AdjacencyTooLarge {
            nodes: y.n,
            cap: node_cap,
        });
    }
    if !y.data.iter().all(|v| v.is_finite()) {
        return Err(Error::non_finite("node representation"));
    }
    let (n, d) = (y.n, y.d);
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        let ri = &y.data[i * d..(i + 1) * d];
        for j in 0..n {
            let rj = &y.data[j * d..(j + 1) * d];
            let mut acc = 0.0;
            for (&a, &b) in ri.iter().zip(rj.iter()) {
                acc += a * b;
            }
            gram[i * n + j] = acc;
        }
    }
    let max = gram.iter().cloned().fold(f64::MIN, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateRepresentation);
    }
    for v in gram.iter_mut() {
        *v /= max;
    }
    Ok(gram)
}

/// Average an (N*T, N*T) adjacency over the temporal dimension to (N, N).
pub fn marginalize_time_adjacency(
    adjacency: &[f64],
    n_vars: usize,
    n_steps: usize,
) -> Result<Vec<f64>> {
    let n = n_vars * n_steps;
    if adjacency.len() != n * n {
        return Err(Error::shape(format!(
            "adjacency must be ({n} x {n}) for N = {n_vars}, T = {n_steps}"
        )));
    }
    let mut out = vec![0.0; n_vars * n_vars];
    let scale = 1.0 / (n_steps * n_steps) as f64;
    for u in 0..n_vars {
        for v in 0..n_vars {
            let mut acc = 0.0;
            for s1 in 0..n_steps {
                for s2 in 0..n_steps {
                    acc += adjacency[(u * n_steps + s1) * n + (v * n_steps + s2)];
                }
            }
            out[u * n_vars + v] = acc * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{GreenKernelGso, TimeDomainLayer};
    use crate::spectral::dft_nodes;

    fn small_config() -> ModelConfig {
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

    fn window_of(values: &[f64], n_vars: usize, lookback: usize, horizon: usize) -> MtsWindow {
        MtsWindow::new(
            values.to_vec(),
            vec![0.0; n_vars * horizon],
            n_vars,
            lookback,
            horizon,
            lookback - 1,
        )
        .unwrap()
    }

    #[test]
    fn hypervariate_layout_is_row_major() {
        let w = window_of(&[1.0, 2.0, 3.0, 4.0], 2, 2, 1);
        let g = build_hypervariate(&w);
        assert_eq!(g.node_features, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.node_count(), 4);
    }

    #[test]
    fn hypervariate_single_node() {
        let w = window_of(&[7.5], 1, 1, 1);
        let g = build_hypervariate(&w);
        assert_eq!(g.node_features, vec![7.5]);
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn hypervariate_three_series_twelve_steps() {
        let w = window_of(&vec![0.5; 36], 3, 12, 1);
        let g = build_hypervariate(&w);
        assert_eq!(g.node_count(), 36);
    }

    #[test]
    fn node_layout_round_trip_exhaustive() {
        for n_vars in 1..4usize {
            for n_steps in 1..5usize {
                let values: Vec<f64> = (0..n_vars * n_steps).map(|i| i as f64).collect();
                let w = window_of(&values, n_vars, n_steps, 1);
                let g = build_hypervariate(&w);
                for v in 0..n_vars {
                    for s in 0..n_steps {
                        assert_eq!(g.node_features[v * n_steps + s], w.input_at(v, s));
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_is_outer_product() {
        let g = HypervariateGraph {
            node_features: vec![2.0],
            n_vars: 1,
            n_steps: 1,
        };
        let e = embed_nodes(&g, &[1.0, -1.0]);
        assert_eq!(e.data, vec![2.0, -2.0]);

        let zero = HypervariateGraph {
            node_features: vec![0.0; 3],
            n_vars: 3,
            n_steps: 1,
        };
        let e = embed_nodes(&zero, &[0.4, 0.6]);
        assert!(e.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn embedding_matches_double_loop() {
        let mut rng = Rng::new(4);
        let feats: Vec<f64> = (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let emb: Vec<f64> = (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let g = HypervariateGraph {
            node_features: feats.clone(),
            n_vars: 4,
            n_steps: 1,
        };
        let out = embed_nodes(&g, &emb);
        for i in 0..4 {
            for j in 0..3 {
                assert_eq!(out.at(i, j), feats[i] * emb[j]);
            }
        }
    }

    #[test]
    fn identity_stack_scales_spectrum() {
        let x =
            RealNodeFeatures::new(4, 2, vec![0.5, -1.0, 2.0, 0.25, -0.75, 1.5, 0.0, 3.0]).unwrap();
        let base = dft_nodes(&x).unwrap();

        let one = fgo_forward(
            &x,
            &[FgoLayer::identity(2)],
            ActivationKind::Identity,
            false,
        )
        .unwrap();
        for (o, b) in one.data.iter().zip(base.data.iter()) {
            assert!((o - b * 2.0).norm() < 1e-12);
        }

        let layers = vec![FgoLayer::identity(2); 3];
        let three = fgo_forward(&x, &layers, ActivationKind::Identity, false).unwrap();
        for (o, b) in three.data.iter().zip(base.data.iter()) {
            assert!((o - b * 4.0).norm() < 1e-12);
        }
    }

    #[test]
    fn stack_matches_time_domain_oracle_for_circulant_layers() {
        // n-invariant layers S_k = c_k * W_k correspond to scaled-delta kernels.
        let (n, d) = (6, 2);
        let mut rng = Rng::new(11);
        let x = RealNodeFeatures::new(
            n,
            d,
            (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();

        let mut fgo_layers = Vec::new();
        let mut oracle_layers = Vec::new();
        for _ in 0..2 {
            let c = rng.uniform_in(-1.0, 1.0);
            let w: Vec<f64> = (0..d * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let mut layer = FgoLayer::zeros(d);
            for (dst, &wv) in layer.s_re.iter_mut().zip(w.iter()) {
                *dst = c * wv;
            }
            fgo_layers.push(layer);
            oracle_layers
                .push(TimeDomainLayer::new(GreenKernelGso::scaled_delta(n, c), w, d).unwrap());
        }

        let spec = fgo_forward(&x, &fgo_layers, ActivationKind::Identity, false).unwrap();
        let spectral = to_real(&crate::spectral::idft_nodes(&spec).unwrap());
        let dense = crate::oracle::time_domain_multi_order(&x, &oracle_layers).unwrap();
        let err = spectral
            .data
            .iter()
            .zip(dense.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn recursive_form_matches_default_when_linear() {
        // With identity activation and no biases, H_k = P_k, so both stack
        // formulations produce the same summation.
        let mut rng = Rng::new(63);
        let (n, d) = (5, 3);
        let x = RealNodeFeatures::new(
            n,
            d,
            (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let layers: Vec<FgoLayer> = (0..3)
            .map(|_| {
                let mut layer = FgoLayer::zeros(d);
                for v in layer.s_re.iter_mut().chain(layer.s_im.iter_mut()) {
                    *v = rng.uniform_in(-1.0, 1.0);
                }
                layer
            })
            .collect();
        let default = fgo_forward(&x, &layers, ActivationKind::Identity, false).unwrap();
        let recursive = fgo_forward(&x, &layers, ActivationKind::Identity, true).unwrap();
        let err = default
            .data
            .iter()
            .zip(recursive.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12, "forms disagree by {err}");

        // With a nonlinearity they genuinely differ.
        let default_nl = fgo_forward(&x, &layers, ActivationKind::SplitRelu, false).unwrap();
        let recursive_nl = fgo_forward(&x, &layers, ActivationKind::SplitRelu, true).unwrap();
        assert!(default_nl
            .data
            .iter()
            .zip(recursive_nl.data.iter())
            .any(|(a, b)| (a - b).norm() > 1e-9));
    }

    #[test]
    fn lean_stack_output_matches_trace_output() {
        let mut rng = Rng::new(71);
        let (n, d) = (6, 2);
        let x = RealNodeFeatures::new(
            n,
            d,
            (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let mut layer = FgoLayer::zeros(d);
        for v in layer
            .s_re
            .iter_mut()
            .chain(layer.s_im.iter_mut())
            .chain(layer.b_re.iter_mut())
            .chain(layer.b_im.iter_mut())
        {
            *v = rng.uniform_in(-1.0, 1.0);
        }
        let weights = vec![layer.weight(), layer.weight()];
        let biases = vec![layer.bias(), layer.bias()];
        let spec0 = dft_nodes(&x).unwrap();
        for ablation in Ablation::ALL {
            for recursive in [false, true] {
                let lean = fgo_stack_output(
                    spec0.clone(),
                    &weights,
                    &biases,
                    ActivationKind::SplitRelu,
                    recursive,
                    ablation,
                )
                .unwrap();
                let traced = fgo_stack(
                    spec0.clone(),
                    &weights,
                    &biases,
                    ActivationKind::SplitRelu,
                    recursive,
                    ablation,
                )
                .unwrap();
                assert_eq!(lean.data, traced.output.data, "{ablation:?}/{recursive}");
            }
        }
    }

    #[test]
    fn linear_stack_is_scale_homogeneous() {
        let mut rng = Rng::new(21);
        let (n, d) = (5, 3);
        let x = RealNodeFeatures::new(
            n,
            d,
            (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let mut layer = FgoLayer::zeros(d);
        for v in layer.s_re.iter_mut().chain(layer.s_im.iter_mut()) {
            *v = rng.uniform_in(-1.0, 1.0);
        }
        let scaled = RealNodeFeatures::new(n, d, x.data.iter().map(|v| v * 2.5).collect()).unwrap();
        let base = fgo_forward(&x, &[layer.clone()], ActivationKind::Identity, false).unwrap();
        let out = fgo_forward(&scaled, &[layer], ActivationKind::Identity, false).unwrap();
        for (o, b) in out.data.iter().zip(base.data.iter()) {
            assert!((o - b * 2.5).norm() < 1e-10);
        }
    }

    #[test]
    fn residual_decomposition_is_exact() {
        let mut rng = Rng::new(31);
        let (n, d) = (4, 2);
        let x = RealNodeFeatures::new(
            n,
            d,
            (0..n * d).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let mut layers = Vec::new();
        for _ in 0..2 {
            let mut layer = FgoLayer::zeros(d);
            for v in layer.s_re.iter_mut().chain(layer.s_im.iter_mut()) {
                *v = rng.uniform_in(-1.0, 1.0);
            }
            layers.push(layer);
        }
        let spec0 = dft_nodes(&x).unwrap();
        let weights: Vec<CMat> = layers.iter().map(|l| l.weight()).collect();
        let biases: Vec<Vec<Complex64>> = layers.iter().map(|l| l.bias()).collect();
        let full = fgo_stack(
            spec0.clone(),
            &weights,
            &biases,
            ActivationKind::Identity,
            false,
            Ablation::Full,
        )
        .unwrap();
        let without = fgo_stack(
            spec0.clone(),
            &weights,
            &biases,
            ActivationKind::Identity,
            false,
            Ablation::NoResidual,
        )
        .unwrap();
        // The residual is added last, so the full output is bit-identical to
        // the no-residual output plus the raw spectrum.
        for i in 0..n * d {
            assert_eq!(full.output.data[i], without.output.data[i] + spec0.data[i]);
        }
    }

    #[test]
    fn ffn_zero_input_zero_bias_gives_zero() {
        let model = FourierGnnModel::init(small_config(), 7).unwrap();
        let y = RealNodeFeatures::zeros(6, 2);
        let out = ffn_project(&y, &model.head, 2).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ffn_identity_head_passes_reshape_through() {
        // l = T, square identity weights, nonnegative input.
        let (n_vars, t, d) = (2usize, 2usize, 1usize);
        let td = t * d;
        let mut w_id = vec![0.0; td * td];
        for i in 0..td {
            w_id[i * td + i] = 1.0;
        }
        let head = FfnHead {
            lookback: t,
            reduced_len: t,
            horizon: td,
            d_ffn1: td,
            d_ffn2: td,
            time_reduce: None,
            w1: w_id.clone(),
            b1: vec![0.0; td],
            w2: w_id.clone(),
            b2: vec![0.0; td],
            w3: w_id,
            b3: vec![0.0; td],
            leaky_slope: 0.01,
        };
        let y = RealNodeFeatures::new(n_vars * t, d, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = ffn_project(&y, &head, n_vars).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn ffn_matches_scalar_reference() {
        let (n_vars, t, l, d, d1, d2, tau) =
            (2usize, 3usize, 2usize, 2usize, 2usize, 2usize, 1usize);
        let mut rng = Rng::new(13);
        let mut draw =
            |count: usize| -> Vec<f64> { (0..count).map(|_| rng.uniform_in(-1.0, 1.0)).collect() };
        let head = FfnHead {
            lookback: t,
            reduced_len: l,
            horizon: tau,
            d_ffn1: d1,
            d_ffn2: d2,
            time_reduce: Some(draw(t * l)),
            w1: draw(l * d * d1),
            b1: draw(d1),
            w2: draw(d1 * d2),
            b2: draw(d2),
            w3: draw(d2 * tau),
            b3: draw(tau),
            leaky_slope: 0.01,
        };
        let y = RealNodeFeatures::new(n_vars * t, d, draw(n_vars * t * d)).unwrap();
        let out = ffn_project(&y, &head, n_vars).unwrap();

        // Explicit scalar loops.
        let reduce = head.time_reduce.as_ref().unwrap();
        let lrelu = |v: f64| if v > 0.0 { v } else { 0.01 * v };
        for v in 0..n_vars {
            let mut flat = vec![0.0; l * d];
            for li in 0..l {
                for j in 0..d {
                    let mut acc = 0.0;
                    for s in 0..t {
                        acc += y.at(v * t + s, j) * reduce[s * l + li];
                    }
                    flat[li * d + j] = acc;
                }
            }
            let mut x1 = vec![0.0; d1];
            for q in 0..d1 {
                let mut acc = head.b1[q];
                for (p, &f) in flat.iter().enumerate() {
                    acc += f * head.w1[p * d1 + q];
                }
                x1[q] = lrelu(acc);
            }
            let mut x2 = vec![0.0; d2];
            for q in 0..d2 {
                let mut acc = head.b2[q];
                for (p, &xv) in x1.iter().enumerate() {
                    acc += xv * head.w2[p * d2 + q];
                }
                x2[q] = lrelu(acc);
            }
            for q in 0..tau {
                let mut acc = head.b3[q];
                for (p, &xv) in x2.iter().enumerate() {
                    acc += xv * head.w3[p * tau + q];
                }
                assert!((out[v * tau + q] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn model_forward_zero_window_is_zero() {
        let model = FourierGnnModel::init(small_config(), 3).unwrap();
        let w = window_of(&[0.0; 6], 2, 3, 2);
        let out = model_forward(&model, &w).unwrap();
        assert!(out.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn model_forward_composes_component_ops() {
        // K = 1 identity operator with identity activation doubles the
        // embedded features before the head.
        let mut cfg = small_config();
        cfg.activation = ActivationKind::Identity;
        cfg.n_layers = 1;
        let mut model = FourierGnnModel::init(cfg, 5).unwrap();
        model.layers[0] = FgoLayer::identity(2);
        let values = vec![0.4, -0.2, 0.9, 1.3, -1.1, 0.6];
        let w = window_of(&values, 2, 3, 2);

        let direct = model_forward(&model, &w).unwrap();

        let graph = build_hypervariate(&w);
        let embedded = embed_nodes(&graph, &model.embedding);
        let doubled = RealNodeFeatures::new(
            embedded.n,
            embedded.d,
            embedded.data.iter().map(|v| v * 2.0).collect(),
        )
        .unwrap();
        let expected = ffn_project(&doubled, &model.head, 2).unwrap();
        for (a, b) in direct.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn covid_configuration_parameter_count() {
        let cfg = ModelConfig {
            n_vars: 55,
            lookback: 12,
            horizon: 12,
            embed_dim: 256,
            n_layers: 3,
            reduced_len: 8,
            d_ffn1: 256,
            d_ffn2: 512,
            dft_mode: DftMode::Flat1d,
            activation: ActivationKind::SplitRelu,
            recursive_activation: false,
            leaky_slope: 0.01,
            ablation: Ablation::Full,
        };
        assert_eq!(cfg.parameter_count(), 1_057_388);
    }

    #[test]
    fn closed_form_count_matches_enumeration() {
        for seed in 0..3u64 {
            let mut cfg = small_config();
            cfg.reduced_len = if seed == 0 { cfg.lookback } else { 2 };
            let model = FourierGnnModel::init(cfg.clone(), seed).unwrap();
            assert_eq!(model.parameter_count_enumerated(), cfg.parameter_count());
        }
    }

    #[test]
    fn adjacency_identical_unit_rows() {
        let y = RealNodeFeatures::new(2, 3, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let a = export_adjacency(&y, 4096).unwrap();
        assert_eq!(a, vec![1.0; 4]);
    }

    #[test]
    fn adjacency_orthogonal_rows() {
        let y = RealNodeFeatures::new(2, 2, vec![2.0, 0.0, 0.0, 2.0]).unwrap();
        let a = export_adjacency(&y, 4096).unwrap();
        assert_eq!(a, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn adjacency_matches_gram_loops() {
        let mut rng = Rng::new(8);
        let y = RealNodeFeatures::new(6, 3, (0..18).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
            .unwrap();
        let a = export_adjacency(&y, 4096).unwrap();
        let mut gram = vec![0.0; 36];
        let mut max = f64::MIN;
        for i in 0..6 {
            for j in 0..6 {
                let mut acc = 0.0;
                for p in 0..3 {
                    acc += y.at(i, p) * y.at(j, p);
                }
                gram[i * 6 + j] = acc;
                max = max.max(acc);
            }
        }
        for (av, gv) in a.iter().zip(gram.iter()) {
            assert_eq!(*av, gv / max);
        }
    }

    #[test]
    fn adjacency_rejects_zero_and_oversize() {
        let zero = RealNodeFeatures::zeros(3, 2);
        assert!(matches!(
            export_adjacency(&zero, 4096),
            Err(Error::DegenerateRepresentation)
        ));
        let y = RealNodeFeatures::new(5, 1, vec![1.0; 5]).unwrap();
        assert!(matches!(
            export_adjacency(&y, 4),
            Err(Error::AdjacencyTooLarge { .. })
        ));
    }

    #[test]
    fn marginalize_identity_when_single_step() {
        let a = vec![0.1, 0.2, 0.3, 0.4];
        let out = marginalize_time_adjacency(&a, 2, 1).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn marginalize_constant_matrix() {
        let a = vec![0.7; 16];
        let out = marginalize_time_adjacency(&a, 2, 2).unwrap();
        for v in out {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn marginalize_matches_hand_loop() {
        let mut rng = Rng::new(19);
        let a: Vec<f64> = (0..16).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let out = marginalize_time_adjacency(&a, 2, 2).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                let expected = (a[(u * 2) * 4 + v * 2]
                    + a[(u * 2) * 4 + v * 2 + 1]
                    + a[(u * 2 + 1) * 4 + v * 2]
                    + a[(u * 2 + 1) * 4 + v * 2 + 1])
                    / 4.0;
                assert!((out[u * 2 + v] - expected).abs() < 1e-12);
            }
        }
    }

    use crate::rng::Rng;
}
