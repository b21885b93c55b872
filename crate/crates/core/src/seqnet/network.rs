//! Encoder forward pass with cached activations and the matching reverse
//! pass.
//!
//! Per layer (post-norm):
//! `h1 = LN(h + MHA(h))`, `h2 = LN(h1 + W2 gelu(W1 h1 + b1) + b2)`.

use nalgebra::DMatrix;

use super::params::{LayerParams, ModelParameters};
use super::{ModelConfig, SeqNetError};

pub(crate) const LN_EPS: f64 = 1e-8;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

/// `PE[pos, 2i] = sin(pos / 10000^(2i/d))`, `PE[pos, 2i+1] = cos(...)`.
pub fn positional_encoding(seq_len: usize, d_model: usize) -> DMatrix<f64> {
    DMatrix::from_fn(seq_len, d_model, |pos, col| {
        let pair = (col / 2) as f64;
        let angle = pos as f64 / 10000f64.powf(2.0 * pair / d_model as f64);
        if col % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

/// Mean over all elements of the squared difference.
pub fn mse_loss(pred: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<f64, SeqNetError> {
    if pred.shape() != target.shape() {
        return Err(SeqNetError::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    Ok((pred - target).iter().map(|d| d * d).sum::<f64>() / pred.len() as f64)
}

fn add_row(m: &mut DMatrix<f64>, row: &DMatrix<f64>) {
    for mut r in m.row_iter_mut() {
        r += row;
    }
}

fn col_sums(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(1, m.ncols(), |_, c| m.column(c).sum())
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_A * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

/// Row-wise softmax in place.
fn softmax_rows(m: &mut DMatrix<f64>) {
    for mut r in m.row_iter_mut() {
        let mx = r.max();
        r.apply(|v| *v = (*v - mx).exp());
        let s = r.sum();
        r /= s;
    }
}

#[derive(Debug, Clone)]
pub struct NormCache {
    /// Normalized rows before gain and offset.
    pub xhat: DMatrix<f64>,
    pub inv_std: Vec<f64>,
}

fn layer_norm(x: &DMatrix<f64>, gain: &DMatrix<f64>, bias: &DMatrix<f64>) -> (DMatrix<f64>, NormCache) {
    let d = x.ncols() as f64;
    let mut xhat = x.clone();
    let mut inv_std = Vec::with_capacity(x.nrows());
    for mut r in xhat.row_iter_mut() {
        let mean = r.sum() / d;
        r.add_scalar_mut(-mean);
        let var = r.norm_squared() / d;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        r *= inv;
        inv_std.push(inv);
    }
    let mut y = xhat.clone();
    for mut r in y.row_iter_mut() {
        r.component_mul_assign(gain);
        r += bias;
    }
    (y, NormCache { xhat, inv_std })
}

/// Returns `dx` and accumulates gain/offset gradients.
fn layer_norm_backward(
    dy: &DMatrix<f64>,
    cache: &NormCache,
    gain: &DMatrix<f64>,
    dgain: &mut DMatrix<f64>,
    dbias: &mut DMatrix<f64>,
) -> DMatrix<f64> {
    let d = dy.ncols() as f64;
    *dgain += col_sums(&dy.component_mul(&cache.xhat));
    *dbias += col_sums(dy);
    let mut dx = dy.clone();
    for (i, mut r) in dx.row_iter_mut().enumerate() {
        r.component_mul_assign(gain);
        let xh = cache.xhat.row(i);
        let s1 = r.sum();
        let s2 = r.dot(&xh);
        let inv = cache.inv_std[i];
        for c in 0..r.len() {
            r[c] = inv / d * (d * r[c] - s1 - xh[c] * s2);
        }
    }
    dx
}

#[derive(Debug, Clone)]
pub struct LayerCache {
    pub input: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// Attention weights, one `T x T` matrix per head.
    pub attention: Vec<DMatrix<f64>>,
    pub concat: DMatrix<f64>,
    pub norm1: NormCache,
    pub h1: DMatrix<f64>,
    pub pre_act: DMatrix<f64>,
    pub act: DMatrix<f64>,
    pub norm2: NormCache,
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: DMatrix<f64>,
    pub layers: Vec<LayerCache>,
    pub last_hidden: DMatrix<f64>,
}

fn layer_forward(l: &LayerParams, h: &DMatrix<f64>, n_heads: usize) -> (DMatrix<f64>, LayerCache) {
    let (t, d) = h.shape();
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = h * &l.wq;
    let k = h * &l.wk;
    let v = h * &l.wv;
    let mut concat = DMatrix::zeros(t, d);
    let mut attention = Vec::with_capacity(n_heads);
    for head in 0..n_heads {
        let c0 = head * dh;
        let mut s = q.columns(c0, dh) * k.columns(c0, dh).transpose() * scale;
        softmax_rows(&mut s);
        concat.columns_mut(c0, dh).copy_from(&(&s * v.columns(c0, dh)));
        attention.push(s);
    }
    let mut z = &concat * &l.wo;
    add_row(&mut z, &l.bo);
    let r1 = h + z;
    let (h1, norm1) = layer_norm(&r1, &l.ln1_gain, &l.ln1_bias);
    let mut pre_act = &h1 * &l.w1;
    add_row(&mut pre_act, &l.b1);
    let act = pre_act.map(gelu);
    let mut ff = &act * &l.w2;
    add_row(&mut ff, &l.b2);
    let r2 = &h1 + ff;
    let (out, norm2) = layer_norm(&r2, &l.ln2_gain, &l.ln2_bias);
    (
        out,
        LayerCache { input: h.clone(), q, k, v, attention, concat, norm1, h1, pre_act, act, norm2 },
    )
}

/// Forward pass for one `seq_len x in_channels` sequence.
pub fn encoder_forward(
    params: &ModelParameters,
    config: &ModelConfig,
    input: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, ForwardCache), SeqNetError> {
    if input.shape() != (config.seq_len, config.in_channels) {
        return Err(SeqNetError::Shape(format!(
            "input {:?}, expected ({}, {})",
            input.shape(),
            config.seq_len,
            config.in_channels
        )));
    }
    if input.iter().any(|v| !v.is_finite()) {
        return Err(SeqNetError::Numeric("non-finite input".into()));
    }
    let mut h = input * &params.w_in;
    add_row(&mut h, &params.b_in);
    h += positional_encoding(config.seq_len, config.d_model);
    let mut layers = Vec::with_capacity(params.layers.len());
    for l in &params.layers {
        let (next, cache) = layer_forward(l, &h, config.n_heads);
        layers.push(cache);
        h = next;
    }
    let mut out = &h * &params.w_out;
    add_row(&mut out, &params.b_out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(SeqNetError::Numeric("non-finite output".into()));
    }
    Ok((out, ForwardCache { input: input.clone(), layers, last_hidden: h }))
}

fn layer_backward(
    l: &LayerParams,
    c: &LayerCache,
    g: &mut LayerParams,
    d_out: &DMatrix<f64>,
    n_heads: usize,
) -> DMatrix<f64> {
    let d = c.input.ncols();
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();

    let d_r2 = layer_norm_backward(d_out, &c.norm2, &l.ln2_gain, &mut g.ln2_gain, &mut g.ln2_bias);
    g.w2 += c.act.transpose() * &d_r2;
    g.b2 += col_sums(&d_r2);
    let mut d_pre = &d_r2 * l.w2.transpose();
    d_pre.zip_apply(&c.pre_act, |dv, x| *dv *= gelu_grad(x));
    g.w1 += c.h1.transpose() * &d_pre;
    g.b1 += col_sums(&d_pre);
    let d_h1 = d_r2 + &d_pre * l.w1.transpose();

    let d_r1 = layer_norm_backward(&d_h1, &c.norm1, &l.ln1_gain, &mut g.ln1_gain, &mut g.ln1_bias);
    g.wo += c.concat.transpose() * &d_r1;
    g.bo += col_sums(&d_r1);
    let d_concat = &d_r1 * l.wo.transpose();

    let (t, _) = c.input.shape();
    let mut dq = DMatrix::zeros(t, d);
    let mut dk = DMatrix::zeros(t, d);
    let mut dv = DMatrix::zeros(t, d);
    for head in 0..n_heads {
        let c0 = head * dh;
        let a = &c.attention[head];
        let d_o = d_concat.columns(c0, dh);
        let d_a = d_o * c.v.columns(c0, dh).transpose();
        dv.columns_mut(c0, dh).copy_from(&(a.transpose() * d_o));
        let mut d_s = a.component_mul(&d_a);
        for (i, mut r) in d_s.row_iter_mut().enumerate() {
            let s = r.sum();
            for j in 0..r.len() {
                r[j] -= a[(i, j)] * s;
            }
        }
        d_s *= scale;
        dq.columns_mut(c0, dh).copy_from(&(&d_s * c.k.columns(c0, dh)));
        dk.columns_mut(c0, dh).copy_from(&(d_s.transpose() * c.q.columns(c0, dh)));
    }
    let x_t = c.input.transpose();
    g.wq += &x_t * &dq;
    g.wk += &x_t * &dk;
    g.wv += &x_t * &dv;
    d_r1 + dq * l.wq.transpose() + dk * l.wk.transpose() + dv * l.wv.transpose()
}

/// Accumulate parameter gradients for one sequence given `dL/d(output)`.
pub(crate) fn backward_sequence(
    params: &ModelParameters,
    config: &ModelConfig,
    cache: &ForwardCache,
    d_out: &DMatrix<f64>,
    grads: &mut ModelParameters,
) {
    grads.w_out += cache.last_hidden.transpose() * d_out;
    grads.b_out += col_sums(d_out);
    let mut dh = d_out * params.w_out.transpose();
    for (i, l) in params.layers.iter().enumerate().rev() {
        dh = layer_backward(l, &cache.layers[i], &mut grads.layers[i], &dh, config.n_heads);
    }
    grads.w_in += cache.input.transpose() * &dh;
    grads.b_in += col_sums(&dh);
}

/// Mean batch loss and its gradient with respect to every parameter.
pub fn backward(
    params: &ModelParameters,
    config: &ModelConfig,
    batch: &[(DMatrix<f64>, DMatrix<f64>)],
) -> Result<(f64, ModelParameters), SeqNetError> {
    let (losses, grads) = batch_gradients(params, config, batch)?;
    Ok((losses.iter().sum::<f64>() / batch.len().max(1) as f64, grads))
}

/// Per-sequence losses and the gradient of their mean.
pub(crate) fn batch_gradients(
    params: &ModelParameters,
    config: &ModelConfig,
    batch: &[(DMatrix<f64>, DMatrix<f64>)],
) -> Result<(Vec<f64>, ModelParameters), SeqNetError> {
    let mut grads = params.zeros_like();
    let mut losses = Vec::with_capacity(batch.len());
    let b = batch.len() as f64;
    for (x, y) in batch {
        let (out, cache) = encoder_forward(params, config, x)?;
        losses.push(mse_loss(&out, y)?);
        let d_out = (&out - y) * (2.0 / (out.len() as f64 * b));
        backward_sequence(params, config, &cache, &d_out, &mut grads);
    }
    Ok((losses, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_first_row_alternates() {
        let pe = positional_encoding(21, 32);
        for c in 0..32 {
            assert_eq!(pe[(0, c)], if c % 2 == 0 { 0.0 } else { 1.0 });
        }
        assert!(pe.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn mse_cases() {
        let a = DMatrix::from_element(3, 4, 2.0);
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        let b = a.add_scalar(1.0);
        assert_eq!(mse_loss(&b, &a).unwrap(), 1.0);
        assert!(mse_loss(&a, &DMatrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn layer_norm_rows_are_standardized() {
        let x = DMatrix::from_fn(5, 8, |r, c| ((r * 8 + c) as f64 * 0.37).sin() * 3.0 + r as f64);
        let (_, cache) = layer_norm(&x, &DMatrix::from_element(1, 8, 1.0), &DMatrix::zeros(1, 8));
        for r in cache.xhat.row_iter() {
            let mean = r.sum() / 8.0;
            let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 8.0;
            assert!(mean.abs() < 1e-6);
            assert!((var - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn gelu_derivative_matches_difference() {
        for x in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
            assert!((fd - gelu_grad(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let cfg = ModelConfig::default();
        let p = ModelParameters::init(&cfg, 0);
        let mut x = DMatrix::zeros(21, 4);
        x[(3, 1)] = f64::NAN;
        assert!(matches!(encoder_forward(&p, &cfg, &x), Err(SeqNetError::Numeric(_))));
        assert!(matches!(encoder_forward(&p, &cfg, &DMatrix::zeros(20, 4)), Err(SeqNetError::Shape(_))));
    }
}
