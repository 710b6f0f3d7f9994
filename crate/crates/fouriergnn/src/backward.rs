//! Hand-derived reverse-mode gradients for every model parameter.
//!
//! Complex parameters are treated as independent real/imaginary pairs; the
//! packed gradient of a complex intermediate z stores dL/dRe(z) in the real
//! part and dL/dIm(z) in the imaginary part. Under that convention the
//! backward of y = x * S is g_x = g_y * S^H and g_S = x^H * g_y, and the
//! backward of the unnormalized DFT is n times the inverse transform.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cmm, cmm_conj_t_left_acc, rmm_t_left_acc, rmm_t_right, CMat};
use crate::model::{term_included, Ablation, ForwardTrace, FourierGnnModel, MtsWindow};
use crate::spectral::{dft_spectrum_with_mode, idft_with_mode, ActivationKind, Spectrum};

/// Gradient of a single operator layer, mirroring `FgoLayer`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub s_re: Vec<f64>,
    pub s_im: Vec<f64>,
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
}

/// One real-valued gradient array per model tensor, shapes mirroring
/// `FourierGnnModel` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub embedding: Vec<f64>,
    pub layers: Vec<LayerGrad>,
    pub time_reduce: Option<Vec<f64>>,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

impl GradientSet {
    pub fn zeros_like(model: &FourierGnnModel) -> Self {
        let d = model.config.embed_dim;
        GradientSet {
            embedding: vec![0.0; model.embedding.len()],
            layers: model
                .layers
                .iter()
                .map(|_| LayerGrad {
                    s_re: vec![0.0; d * d],
                    s_im: vec![0.0; d * d],
                    b_re: vec![0.0; d],
                    b_im: vec![0.0; d],
                })
                .collect(),
            time_reduce: model
                .head
                .time_reduce
                .as_ref()
                .map(|tr| vec![0.0; tr.len()]),
            w1: vec![0.0; model.head.w1.len()],
            b1: vec![0.0; model.head.b1.len()],
            w2: vec![0.0; model.head.w2.len()],
            b2: vec![0.0; model.head.b2.len()],
            w3: vec![0.0; model.head.w3.len()],
            b3: vec![0.0; model.head.b3.len()],
        }
    }

    /// Views in the same canonical order as `FourierGnnModel::tensor_views`.
    pub fn tensor_views(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        out.push(("embedding".to_string(), self.embedding.as_slice()));
        for (k, layer) in self.layers.iter().enumerate() {
            out.push((format!("fgo.{k}.s_re"), layer.s_re.as_slice()));
            out.push((format!("fgo.{k}.s_im"), layer.s_im.as_slice()));
            out.push((format!("fgo.{k}.b_re"), layer.b_re.as_slice()));
            out.push((format!("fgo.{k}.b_im"), layer.b_im.as_slice()));
        }
        if let Some(tr) = &self.time_reduce {
            out.push(("head.time_reduce".to_string(), tr.as_slice()));
        }
        out.push(("head.w1".to_string(), self.w1.as_slice()));
        out.push(("head.b1".to_string(), self.b1.as_slice()));
        out.push(("head.w2".to_string(), self.w2.as_slice()));
        out.push(("head.b2".to_string(), self.b2.as_slice()));
        out.push(("head.w3".to_string(), self.w3.as_slice()));
        out.push(("head.b3".to_string(), self.b3.as_slice()));
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
        if let Some(tr) = &mut self.time_reduce {
            out.push(("head.time_reduce".to_string(), tr.as_mut_slice()));
        }
        out.push(("head.w1".to_string(), self.w1.as_mut_slice()));
        out.push(("head.b1".to_string(), self.b1.as_mut_slice()));
        out.push(("head.w2".to_string(), self.w2.as_mut_slice()));
        out.push(("head.b2".to_string(), self.b2.as_mut_slice()));
        out.push(("head.w3".to_string(), self.w3.as_mut_slice()));
        out.push(("head.b3".to_string(), self.b3.as_mut_slice()));
        out
    }

    fn check_finite(&self) -> Result<()> {
        for (name, tensor) in self.tensor_views() {
            if !tensor.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteGradient { tensor: name });
            }
        }
        Ok(())
    }
}

/// sigma'(z) applied independently to real and imaginary preactivation parts,
/// multiplied into the packed upstream gradient.
fn masked_grad(g: &Spectrum, z: &Spectrum, kind: ActivationKind) -> Spectrum {
    Spectrum {
        data: g
            .data
            .iter()
            .zip(z.data.iter())
            .map(|(gv, zv)| {
                Complex64::new(gv.re * kind.grad_part(zv.re), gv.im * kind.grad_part(zv.im))
            })
            .collect(),
        n: g.n,
        d: g.d,
    }
}

fn add_assign(dst: &mut Spectrum, src: &Spectrum) {
    for (d, s) in dst.data.iter_mut().zip(src.data.iter()) {
        *d += s;
    }
}

fn accumulate_bias(grad: &mut LayerGrad, g_z: &Spectrum) {
    let d = g_z.d;
    for row in 0..g_z.n {
        for j in 0..d {
            let g = g_z.data[row * d + j];
            grad.b_re[j] += g.re;
            grad.b_im[j] += g.im;
        }
    }
}

fn accumulate_weight(grad: &mut LayerGrad, input: &Spectrum, g_out: &Spectrum) {
    let (n, d) = (input.n, input.d);
    let mut gw = vec![Complex64::new(0.0, 0.0); d * d];
    cmm_conj_t_left_acc(&input.data, n, d, &g_out.data, d, &mut gw);
    for (idx, g) in gw.iter().enumerate() {
        grad.s_re[idx] += g.re;
        grad.s_im[idx] += g.im;
    }
}

/// Mean MSE loss plus exact gradients over a batch of windows.
pub fn backward(model: &FourierGnnModel, batch: &[&MtsWindow]) -> Result<(f64, GradientSet)> {
    if batch.is_empty() {
        return Err(Error::invalid("backward needs a non-empty batch"));
    }
    let weights: Vec<CMat> = model.layers.iter().map(|l| l.weight()).collect();
    let weights_h: Vec<CMat> = weights.iter().map(|w| w.conj_t()).collect();
    let biases: Vec<Vec<Complex64>> = model.layers.iter().map(|l| l.bias()).collect();

    let mut grads = GradientSet::zeros_like(model);
    let mut total_loss = 0.0;
    let batch_scale = 1.0 / batch.len() as f64;

    for window in batch {
        let trace = crate::model::forward_trace_prepared(model, window, &weights, &biases)?;
        let (n_vars, tau) = (window.n_vars, window.horizon);
        let m = (n_vars * tau) as f64;

        let mut window_loss = 0.0;
        let mut g_pred = vec![0.0; n_vars * tau];
        for (i, (p, t)) in trace.ffn.pred.iter().zip(window.target.iter()).enumerate() {
            let diff = p - t;
            window_loss += diff * diff;
            g_pred[i] = 2.0 * diff / m * batch_scale;
        }
        window_loss /= m;
        if !window_loss.is_finite() {
            return Err(Error::non_finite("loss"));
        }
        total_loss += window_loss * batch_scale;

        backward_window(model, window, &trace, &weights_h, &g_pred, &mut grads)?;
    }

    if model.config.ablation == Ablation::NoDynamicFgo {
        tie_layer_grads(&mut grads);
    }
    grads.check_finite()?;
    Ok((total_loss, grads))
}

fn backward_window(
    model: &FourierGnnModel,
    window: &MtsWindow,
    trace: &ForwardTrace,
    weights_h: &[CMat],
    g_pred: &[f64],
    grads: &mut GradientSet,
) -> Result<()> {
    let cfg = &model.config;
    let head = &model.head;
    let n_vars = cfg.n_vars;
    let (d1, d2, tau) = (head.d_ffn1, head.d_ffn2, head.horizon);
    let (t, l) = (head.lookback, head.reduced_len);
    let dd = trace.embedded.d;
    let slope = head.leaky_slope;

    // Head: third linear layer.
    rmm_t_left_acc(&trace.ffn.x2, n_vars, d2, g_pred, tau, &mut grads.w3);
    for row in 0..n_vars {
        for j in 0..tau {
            grads.b3[j] += g_pred[row * tau + j];
        }
    }
    let mut g_x2 = vec![0.0; n_vars * d2];
    rmm_t_right(g_pred, n_vars, tau, &head.w3, d2, &mut g_x2);

    // Second linear layer through its LeakyReLU.
    let mut g_z2 = g_x2;
    for (g, z) in g_z2.iter_mut().zip(trace.ffn.z2.iter()) {
        *g *= if *z > 0.0 { 1.0 } else { slope };
    }
    rmm_t_left_acc(&trace.ffn.x1, n_vars, d1, &g_z2, d2, &mut grads.w2);
    for row in 0..n_vars {
        for j in 0..d2 {
            grads.b2[j] += g_z2[row * d2 + j];
        }
    }
    let mut g_x1 = vec![0.0; n_vars * d1];
    rmm_t_right(&g_z2, n_vars, d2, &head.w2, d1, &mut g_x1);

    // First linear layer through its LeakyReLU.
    let mut g_z1 = g_x1;
    for (g, z) in g_z1.iter_mut().zip(trace.ffn.z1.iter()) {
        *g *= if *z > 0.0 { 1.0 } else { slope };
    }
    rmm_t_left_acc(&trace.ffn.flat, n_vars, l * dd, &g_z1, d1, &mut grads.w1);
    for row in 0..n_vars {
        for j in 0..d1 {
            grads.b1[j] += g_z1[row * d1 + j];
        }
    }
    let mut g_flat = vec![0.0; n_vars * l * dd];
    rmm_t_right(&g_z1, n_vars, d1, &head.w1, l * dd, &mut g_flat);

    // Time reduction (or plain reshape when absent).
    let n_nodes = trace.y_real.n;
    let mut g_y_real = vec![0.0; n_nodes * dd];
    match (&head.time_reduce, grads.time_reduce.as_mut()) {
        (Some(reduce), Some(g_reduce)) => {
            for v in 0..n_vars {
                for s in 0..t {
                    for j in 0..dd {
                        let y = trace.y_real.data[(v * t + s) * dd + j];
                        let mut acc = 0.0;
                        for li in 0..l {
                            let g = g_flat[v * (l * dd) + li * dd + j];
                            g_reduce[s * l + li] += y * g;
                            acc += reduce[s * l + li] * g;
                        }
                        g_y_real[(v * t + s) * dd + j] = acc;
                    }
                }
            }
        }
        _ => g_y_real.copy_from_slice(&g_flat),
    }

    // Inverse-transform backward: (1/n) times the forward transform of the
    // packed real gradient.
    let layout = cfg.layout();
    let g_y = Spectrum {
        data: g_y_real.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        n: n_nodes,
        d: dd,
    };
    let mut g_sum = dft_spectrum_with_mode(&g_y, cfg.dft_mode, layout)?;
    let inv_n = 1.0 / n_nodes as f64;
    for v in g_sum.data.iter_mut() {
        *v *= inv_n;
    }

    // Operator stack.
    let k_max = model.layers.len();
    let act = cfg.activation;
    let ablation = cfg.ablation;
    let mut g_spec0 = Spectrum::zeros(n_nodes, dd);

    if cfg.recursive_activation {
        // H_k = sigma(H_{k-1} S_k + b_k); output sums included H_k.
        let mut carry = Spectrum::zeros(n_nodes, dd);
        for k in (1..=k_max).rev() {
            let mut g_h = carry;
            if term_included(ablation, k, k_max) {
                add_assign(&mut g_h, &g_sum);
            }
            let g_z = masked_grad(&g_h, &trace.stack.preact[k - 1], act);
            accumulate_bias(&mut grads.layers[k - 1], &g_z);
            let input = if k == 1 {
                &trace.stack.spec0
            } else {
                &trace.stack.chain[k - 2]
            };
            accumulate_weight(&mut grads.layers[k - 1], input, &g_z);
            let mut next = Spectrum::zeros(n_nodes, dd);
            cmm(
                &g_z.data,
                n_nodes,
                dd,
                &weights_h[k - 1].data,
                dd,
                &mut next.data,
            );
            carry = next;
        }
        g_spec0 = carry;
        if term_included(ablation, 0, k_max) {
            add_assign(&mut g_spec0, &g_sum);
        }
    } else {
        // P_k = P_{k-1} S_k; output sums sigma(P_k + b_k) plus the residual.
        let mut acc: Option<Spectrum> = None;
        for k in (1..=k_max).rev() {
            let mut g_p = match acc.take() {
                Some(prev) => {
                    // gradient arriving from P_{k+1} = P_k S_{k+1}
                    let mut g = Spectrum::zeros(n_nodes, dd);
                    cmm(&prev.data, n_nodes, dd, &weights_h[k].data, dd, &mut g.data);
                    g
                }
                None => Spectrum::zeros(n_nodes, dd),
            };
            if term_included(ablation, k, k_max) {
                let g_z = masked_grad(&g_sum, &trace.stack.preact[k - 1], act);
                accumulate_bias(&mut grads.layers[k - 1], &g_z);
                add_assign(&mut g_p, &g_z);
            }
            let input = if k == 1 {
                &trace.stack.spec0
            } else {
                &trace.stack.chain[k - 2]
            };
            accumulate_weight(&mut grads.layers[k - 1], input, &g_p);
            acc = Some(g_p);
        }
        if let Some(first) = acc {
            let mut g = Spectrum::zeros(n_nodes, dd);
            cmm(
                &first.data,
                n_nodes,
                dd,
                &weights_h[0].data,
                dd,
                &mut g.data,
            );
            g_spec0 = g;
        }
        if term_included(ablation, 0, k_max) {
            add_assign(&mut g_spec0, &g_sum);
        }
    }

    // Forward-DFT backward: n times the inverse transform; the input is real,
    // so only the real part survives.
    let scaled = idft_with_mode(&g_spec0, cfg.dft_mode, layout)?;
    let n_scale = n_nodes as f64;

    if cfg.ablation == Ablation::NoEmbedding {
        return Ok(());
    }
    // Embedding backward: X[i, j] = x0[i] e[j].
    for (i, &x0) in window.input.iter().enumerate() {
        for j in 0..dd {
            grads.embedding[j] += x0 * scaled.data[i * dd + j].re * n_scale;
        }
    }
    Ok(())
}

/// Shared-operator ablation: every layer slot receives the summed gradient,
/// keeping tied parameters identical under identical optimizer state.
fn tie_layer_grads(grads: &mut GradientSet) {
    if grads.layers.len() <= 1 {
        return;
    }
    let mut sum = grads.layers[0].clone();
    for layer in &grads.layers[1..] {
        for (a, b) in sum.s_re.iter_mut().zip(layer.s_re.iter()) {
            *a += b;
        }
        for (a, b) in sum.s_im.iter_mut().zip(layer.s_im.iter()) {
            *a += b;
        }
        for (a, b) in sum.b_re.iter_mut().zip(layer.b_re.iter()) {
            *a += b;
        }
        for (a, b) in sum.b_im.iter_mut().zip(layer.b_im.iter()) {
            *a += b;
        }
    }
    for layer in grads.layers.iter_mut() {
        *layer = sum.clone();
    }
}
