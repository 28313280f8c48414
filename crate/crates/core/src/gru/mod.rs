//! The classifier: a single-layer GRU fed one syndrome (or raw bitplane)
//! per timestep, a fully connected softmax head, cross-entropy loss with
//! L2 regularization, backpropagation through time, and Adam.
//!
//! The gates carry no bias vectors; the parameter count
//! `3 J (M + J) + C J + C` is exactly the learnable budget of the model.
//! Arithmetic is generic over the float width: `f64` is the default (and
//! what the gradient checks run at), `f32` exists as a faster mode.

mod adam;
mod checkpoint;
mod train;

pub use adam::AdamState;
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use train::{evaluate, predict, train, EpochRecord, TrainConfig, TrainOutcome};

use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bitplanes::BitSeq;

#[derive(Debug, Error)]
pub enum GruError {
    #[error("input dim mismatch: params expect {expected}, sequence has {got}")]
    InputDim { expected: usize, got: usize },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u8, classes: usize },
    #[error("sequence length {got} differs from dataset step count {expected}")]
    StepMismatch { expected: usize, got: usize },
    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Scalar type the model runs at.
pub trait Scalar: Float + Send + Sync + std::fmt::Debug + 'static {
    fn c(v: f64) -> Self {
        Self::from(v).unwrap()
    }
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap()
    }
}

impl Scalar for f64 {}
impl Scalar for f32 {}

/// One encoded sample: K syndromes of length M (bits, lifted to reals when
/// fed to the model) plus the class label.
#[derive(Debug, Clone)]
pub struct EncodedSample {
    pub sequence: Vec<BitSeq>,
    pub label: u8,
}

/// A labeled set of encoded samples with consistent (K, M, C).
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    pub samples: Vec<EncodedSample>,
    pub steps: usize,
    pub input_dim: usize,
    pub classes: usize,
}

impl EncodedDataset {
    pub fn validate(&self) -> Result<(), GruError> {
        if self.samples.is_empty() {
            return Err(GruError::Empty("dataset"));
        }
        for sample in &self.samples {
            if sample.sequence.len() != self.steps {
                return Err(GruError::StepMismatch {
                    expected: self.steps,
                    got: sample.sequence.len(),
                });
            }
            for plane in &sample.sequence {
                if plane.len() != self.input_dim {
                    return Err(GruError::InputDim {
                        expected: self.input_dim,
                        got: plane.len(),
                    });
                }
            }
            if sample.label as usize >= self.classes {
                return Err(GruError::LabelOutOfRange {
                    label: sample.label,
                    classes: self.classes,
                });
            }
        }
        Ok(())
    }
}

/// All learnable weights. Input-side matrices are stored transposed
/// (M rows of J contiguous entries) so binary inputs turn the matvec into
/// row gathers; recurrent and output matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams<F> {
    pub units: usize,
    pub input_dim: usize,
    pub classes: usize,
    /// W_z^T, M x J.
    pub w_update_t: Vec<F>,
    /// W_r^T, M x J.
    pub w_reset_t: Vec<F>,
    /// W^T (candidate), M x J.
    pub w_cand_t: Vec<F>,
    /// U_z, J x J.
    pub u_update: Vec<F>,
    /// U_r, J x J.
    pub u_reset: Vec<F>,
    /// U (candidate), J x J.
    pub u_cand: Vec<F>,
    /// W_FC, C x J.
    pub w_out: Vec<F>,
    /// b_FC, length C.
    pub b_out: Vec<F>,
}

/// `3 J (M + J) + C J + C`: every gate weight plus the head.
pub fn param_count(units: usize, input_dim: usize, classes: usize) -> usize {
    3 * units * (input_dim + units) + classes * units + classes
}

impl<F: Scalar> GruParams<F> {
    /// Seeded init: every weight matrix uniform in +/- 1/sqrt(fan_in),
    /// head bias zero.
    pub fn init(units: usize, input_dim: usize, classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |len: usize, fan_in: usize| -> Vec<F> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..len)
                .map(|_| F::c(rng.random_range(-bound..bound)))
                .collect()
        };
        GruParams {
            units,
            input_dim,
            classes,
            w_update_t: uniform(input_dim * units, input_dim),
            w_reset_t: uniform(input_dim * units, input_dim),
            w_cand_t: uniform(input_dim * units, input_dim),
            u_update: uniform(units * units, units),
            u_reset: uniform(units * units, units),
            u_cand: uniform(units * units, units),
            w_out: uniform(classes * units, units),
            b_out: vec![F::zero(); classes],
        }
    }

    pub fn zeros(units: usize, input_dim: usize, classes: usize) -> Self {
        GruParams {
            units,
            input_dim,
            classes,
            w_update_t: vec![F::zero(); input_dim * units],
            w_reset_t: vec![F::zero(); input_dim * units],
            w_cand_t: vec![F::zero(); input_dim * units],
            u_update: vec![F::zero(); units * units],
            u_reset: vec![F::zero(); units * units],
            u_cand: vec![F::zero(); units * units],
            w_out: vec![F::zero(); classes * units],
            b_out: vec![F::zero(); classes],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.units, self.input_dim, self.classes)
    }

    pub fn param_count(&self) -> usize {
        param_count(self.units, self.input_dim, self.classes)
    }

    /// Weight matrices (L2-regularized, gates and head kernel), then the
    /// head bias (never regularized). Order is the checkpoint layout.
    pub fn weight_fields(&self) -> [&Vec<F>; 7] {
        [
            &self.w_update_t,
            &self.w_reset_t,
            &self.w_cand_t,
            &self.u_update,
            &self.u_reset,
            &self.u_cand,
            &self.w_out,
        ]
    }

    pub fn fields_mut(&mut self) -> [&mut Vec<F>; 8] {
        [
            &mut self.w_update_t,
            &mut self.w_reset_t,
            &mut self.w_cand_t,
            &mut self.u_update,
            &mut self.u_reset,
            &mut self.u_cand,
            &mut self.w_out,
            &mut self.b_out,
        ]
    }

    pub fn fields(&self) -> [&Vec<F>; 8] {
        [
            &self.w_update_t,
            &self.w_reset_t,
            &self.w_cand_t,
            &self.u_update,
            &self.u_reset,
            &self.u_cand,
            &self.w_out,
            &self.b_out,
        ]
    }

    /// Sum of squared weight entries (bias excluded); the L2 term is
    /// `l2 * this`.
    pub fn weight_norm_sq(&self) -> F {
        let mut acc = F::zero();
        for field in self.weight_fields() {
            for &w in field {
                acc = acc + w * w;
            }
        }
        acc
    }

    pub fn convert<G: Scalar>(&self) -> GruParams<G> {
        let conv = |v: &Vec<F>| v.iter().map(|&x| G::c(x.as_f64())).collect();
        GruParams {
            units: self.units,
            input_dim: self.input_dim,
            classes: self.classes,
            w_update_t: conv(&self.w_update_t),
            w_reset_t: conv(&self.w_reset_t),
            w_cand_t: conv(&self.w_cand_t),
            u_update: conv(&self.u_update),
            u_reset: conv(&self.u_reset),
            u_cand: conv(&self.u_cand),
            w_out: conv(&self.w_out),
            b_out: conv(&self.b_out),
        }
    }
}

/// Timestep inputs the model can consume: packed bit sequences (the
/// training path) or dense real vectors (general use, gradient checks).
pub trait InputSequence<F: Scalar> {
    fn steps(&self) -> usize;
    fn dim(&self) -> usize;
    /// `out[j] += sum_i x_i * w_t[i*J + j]` for timestep `step`.
    fn accumulate_input(&self, step: usize, w_t: &[F], units: usize, out: &mut [F]);
    /// `gw_t[i*J + j] += x_i * d[j]` for timestep `step`.
    fn accumulate_grad(&self, step: usize, d: &[F], units: usize, gw_t: &mut [F]);
}

impl<F: Scalar> InputSequence<F> for [BitSeq] {
    fn steps(&self) -> usize {
        self.len()
    }

    fn dim(&self) -> usize {
        self.first().map_or(0, BitSeq::len)
    }

    fn accumulate_input(&self, step: usize, w_t: &[F], units: usize, out: &mut [F]) {
        for i in self[step].ones() {
            let row = &w_t[i * units..(i + 1) * units];
            for (o, &w) in out.iter_mut().zip(row) {
                *o = *o + w;
            }
        }
    }

    fn accumulate_grad(&self, step: usize, d: &[F], units: usize, gw_t: &mut [F]) {
        for i in self[step].ones() {
            let row = &mut gw_t[i * units..(i + 1) * units];
            for (g, &dj) in row.iter_mut().zip(d) {
                *g = *g + dj;
            }
        }
    }
}

impl<F: Scalar> InputSequence<F> for [Vec<F>] {
    fn steps(&self) -> usize {
        self.len()
    }

    fn dim(&self) -> usize {
        self.first().map_or(0, Vec::len)
    }

    fn accumulate_input(&self, step: usize, w_t: &[F], units: usize, out: &mut [F]) {
        for (i, &x) in self[step].iter().enumerate() {
            if x == F::zero() {
                continue;
            }
            let row = &w_t[i * units..(i + 1) * units];
            for (o, &w) in out.iter_mut().zip(row) {
                *o = *o + x * w;
            }
        }
    }

    fn accumulate_grad(&self, step: usize, d: &[F], units: usize, gw_t: &mut [F]) {
        for (i, &x) in self[step].iter().enumerate() {
            if x == F::zero() {
                continue;
            }
            let row = &mut gw_t[i * units..(i + 1) * units];
            for (g, &dj) in row.iter_mut().zip(d) {
                *g = *g + x * dj;
            }
        }
    }
}

/// Every intermediate activation of one forward pass, kept for BPTT.
#[derive(Debug, Clone)]
pub struct ForwardTrace<F> {
    /// Update gate per step, each of length J; entries in (0, 1).
    pub update: Vec<Vec<F>>,
    /// Reset gate per step; entries in (0, 1).
    pub reset: Vec<Vec<F>>,
    /// Candidate state per step; entries in (-1, 1).
    pub candidate: Vec<Vec<F>>,
    /// Hidden state per step.
    pub hidden: Vec<Vec<F>>,
    pub logits: Vec<F>,
    pub probabilities: Vec<F>,
}

fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `out[j] = sum_k m[j*J + k] * v[k]` added onto `out`.
fn matvec_add<F: Scalar>(m: &[F], v: &[F], out: &mut [F]) {
    let n = v.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &m[j * n..(j + 1) * n];
        let mut acc = F::zero();
        for (&w, &x) in row.iter().zip(v) {
            acc = acc + w * x;
        }
        *o = *o + acc;
    }
}

/// `out[k] += sum_j m[j*J + k] * v[j]` (transposed matvec).
fn matvec_t_add<F: Scalar>(m: &[F], v: &[F], out: &mut [F]) {
    let n = out.len();
    for (j, &vj) in v.iter().enumerate() {
        let row = &m[j * n..(j + 1) * n];
        for (o, &w) in out.iter_mut().zip(row) {
            *o = *o + w * vj;
        }
    }
}

/// Run the recurrence from a zero initial state and apply the head.
///
/// Per step: `z = sigma(W_z x + U_z h)`, `r = sigma(W_r x + U_r h)`,
/// `c = tanh(W x + U (r .* h))`, `h' = (1 - z) .* h + z .* c`; then
/// logits `o = W_FC h_K + b_FC` and a softmax.
pub fn forward<F: Scalar>(
    params: &GruParams<F>,
    sequence: &(impl InputSequence<F> + ?Sized),
) -> Result<ForwardTrace<F>, GruError> {
    if sequence.steps() == 0 {
        return Err(GruError::Empty("sequence"));
    }
    if sequence.dim() != params.input_dim {
        return Err(GruError::InputDim {
            expected: params.input_dim,
            got: sequence.dim(),
        });
    }
    let j = params.units;
    let steps = sequence.steps();
    let mut trace = ForwardTrace {
        update: Vec::with_capacity(steps),
        reset: Vec::with_capacity(steps),
        candidate: Vec::with_capacity(steps),
        hidden: Vec::with_capacity(steps),
        logits: vec![F::zero(); params.classes],
        probabilities: vec![F::zero(); params.classes],
    };
    let mut h = vec![F::zero(); j];
    let mut gated = vec![F::zero(); j];
    for k in 0..steps {
        let mut z = vec![F::zero(); j];
        sequence.accumulate_input(k, &params.w_update_t, j, &mut z);
        matvec_add(&params.u_update, &h, &mut z);
        for v in z.iter_mut() {
            *v = sigmoid(*v);
        }

        let mut r = vec![F::zero(); j];
        sequence.accumulate_input(k, &params.w_reset_t, j, &mut r);
        matvec_add(&params.u_reset, &h, &mut r);
        for v in r.iter_mut() {
            *v = sigmoid(*v);
        }

        for ((g, &rv), &hv) in gated.iter_mut().zip(&r).zip(&h) {
            *g = rv * hv;
        }
        let mut cand = vec![F::zero(); j];
        sequence.accumulate_input(k, &params.w_cand_t, j, &mut cand);
        matvec_add(&params.u_cand, &gated, &mut cand);
        for v in cand.iter_mut() {
            *v = v.tanh();
        }

        let mut h_next = vec![F::zero(); j];
        for (((hn, &zv), &cv), &hv) in h_next.iter_mut().zip(&z).zip(&cand).zip(&h) {
            *hn = (F::one() - zv) * hv + zv * cv;
        }
        h = h_next;
        trace.update.push(z);
        trace.reset.push(r);
        trace.candidate.push(cand);
        trace.hidden.push(h.clone());
    }

    trace.logits.copy_from_slice(&params.b_out);
    matvec_add(&params.w_out, &h, &mut trace.logits);
    softmax(&trace.logits, &mut trace.probabilities);
    Ok(trace)
}

fn softmax<F: Scalar>(logits: &[F], out: &mut [F]) {
    let max = logits.iter().cloned().fold(F::neg_infinity(), F::max);
    let mut total = F::zero();
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total = total + *o;
    }
    for o in out.iter_mut() {
        *o = *o / total;
    }
}

/// Cross-entropy of one traced forward pass: `-ln p[label]`.
pub fn cross_entropy<F: Scalar>(trace: &ForwardTrace<F>, label: u8) -> F {
    -trace.probabilities[label as usize].ln()
}

/// Accumulate `d loss_sample / d params` for one sample into `grads`
/// (the L2 term is added once per batch, not here). Returns the sample's
/// cross-entropy.
fn backward<F: Scalar>(
    params: &GruParams<F>,
    sequence: &(impl InputSequence<F> + ?Sized),
    trace: &ForwardTrace<F>,
    label: u8,
    grads: &mut GruParams<F>,
) -> F {
    let j = params.units;
    let steps = sequence.steps();
    let zero_state = vec![F::zero(); j];

    // Head: d loss / d logits = p - onehot(label).
    let mut d_logits = trace.probabilities.clone();
    d_logits[label as usize] = d_logits[label as usize] - F::one();
    let h_last = &trace.hidden[steps - 1];
    for (c, &dl) in d_logits.iter().enumerate() {
        let row = &mut grads.w_out[c * j..(c + 1) * j];
        for (g, &hv) in row.iter_mut().zip(h_last) {
            *g = *g + dl * hv;
        }
        grads.b_out[c] = grads.b_out[c] + dl;
    }
    let mut d_h = vec![F::zero(); j];
    matvec_t_add(&params.w_out, &d_logits, &mut d_h);

    let mut d_gate = vec![F::zero(); j];
    let mut d_pre = vec![F::zero(); j];
    let mut gated = vec![F::zero(); j];
    for k in (0..steps).rev() {
        let h_prev = if k == 0 { &zero_state } else { &trace.hidden[k - 1] };
        let z = &trace.update[k];
        let r = &trace.reset[k];
        let cand = &trace.candidate[k];
        let mut d_h_prev = vec![F::zero(); j];

        // h = (1 - z) h_prev + z cand.
        for (dp, (&dh, &zv)) in d_h_prev.iter_mut().zip(d_h.iter().zip(z)) {
            *dp = dh * (F::one() - zv);
        }

        // Candidate branch: d tanh = (1 - cand^2).
        for (dp, ((&dh, &zv), &cv)) in d_pre.iter_mut().zip(d_h.iter().zip(z).zip(cand)) {
            *dp = dh * zv * (F::one() - cv * cv);
        }
        sequence.accumulate_grad(k, &d_pre, j, &mut grads.w_cand_t);
        for ((g, &rv), &hv) in gated.iter_mut().zip(r).zip(h_prev) {
            *g = rv * hv;
        }
        for (jj, &dp) in d_pre.iter().enumerate() {
            let row = &mut grads.u_cand[jj * j..(jj + 1) * j];
            for (g, &gv) in row.iter_mut().zip(&gated) {
                *g = *g + dp * gv;
            }
        }
        // d (r .* h_prev) through U.
        d_gate.fill(F::zero());
        matvec_t_add(&params.u_cand, &d_pre, &mut d_gate);
        for ((dp, &dg), &rv) in d_h_prev.iter_mut().zip(&d_gate).zip(r) {
            *dp = *dp + dg * rv;
        }

        // Reset gate: d sigma = r (1 - r).
        for (dpre, (&dg, (&rv, &hv))) in d_pre
            .iter_mut()
            .zip(d_gate.iter().zip(r.iter().zip(h_prev)))
        {
            *dpre = dg * hv * rv * (F::one() - rv);
        }
        sequence.accumulate_grad(k, &d_pre, j, &mut grads.w_reset_t);
        for (jj, &dp) in d_pre.iter().enumerate() {
            let row = &mut grads.u_reset[jj * j..(jj + 1) * j];
            for (g, &hv) in row.iter_mut().zip(h_prev) {
                *g = *g + dp * hv;
            }
        }
        matvec_t_add(&params.u_reset, &d_pre, &mut d_h_prev);

        // Update gate: d sigma = z (1 - z).
        for (dpre, (&dh, ((&zv, &cv), &hv))) in d_pre
            .iter_mut()
            .zip(d_h.iter().zip(z.iter().zip(cand).zip(h_prev)))
        {
            *dpre = dh * (cv - hv) * zv * (F::one() - zv);
        }
        sequence.accumulate_grad(k, &d_pre, j, &mut grads.w_update_t);
        for (jj, &dp) in d_pre.iter().enumerate() {
            let row = &mut grads.u_update[jj * j..(jj + 1) * j];
            for (g, &hv) in row.iter_mut().zip(h_prev) {
                *g = *g + dp * hv;
            }
        }
        matvec_t_add(&params.u_update, &d_pre, &mut d_h_prev);

        d_h = d_h_prev;
    }
    cross_entropy(trace, label)
}

/// Mean cross-entropy over the batch plus `l2 * sum(weights^2)`, with the
/// full BPTT gradient. Batch members are processed in fixed-size chunks
/// whose partial sums are reduced in order, so the result is bitwise
/// reproducible with or without the `parallel` feature.
pub fn loss_and_grad<F: Scalar, S: std::borrow::Borrow<EncodedSample> + Sync>(
    params: &GruParams<F>,
    batch: &[S],
    l2: f64,
) -> Result<(F, GruParams<F>), GruError> {
    if batch.is_empty() {
        return Err(GruError::Empty("batch"));
    }
    for sample in batch {
        let sample = sample.borrow();
        if sample.label as usize >= params.classes {
            return Err(GruError::LabelOutOfRange {
                label: sample.label,
                classes: params.classes,
            });
        }
    }
    const CHUNK: usize = 8;
    let work = |chunk: &[S]| -> Result<(F, GruParams<F>), GruError> {
        let mut grads = params.zeros_like();
        let mut loss = F::zero();
        for sample in chunk {
            let sample = sample.borrow();
            let trace = forward(params, sample.sequence.as_slice())?;
            loss = loss + backward(params, sample.sequence.as_slice(), &trace, sample.label, &mut grads);
        }
        Ok((loss, grads))
    };

    #[cfg(feature = "parallel")]
    let partials: Result<Vec<(F, GruParams<F>)>, GruError> = {
        use rayon::prelude::*;
        batch.par_chunks(CHUNK).map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Result<Vec<(F, GruParams<F>)>, GruError> =
        batch.chunks(CHUNK).map(work).collect();
    let partials = partials?;

    let mut total_loss = F::zero();
    let mut grads = params.zeros_like();
    for (loss, partial) in partials {
        total_loss = total_loss + loss;
        for (acc, part) in grads.fields_mut().into_iter().zip(partial.fields()) {
            for (a, &p) in acc.iter_mut().zip(part) {
                *a = *a + p;
            }
        }
    }

    let scale = F::c(1.0 / batch.len() as f64);
    for field in grads.fields_mut() {
        for g in field.iter_mut() {
            *g = *g * scale;
        }
    }
    let mut loss = total_loss * scale;

    if l2 != 0.0 {
        let l2 = F::c(l2);
        let two = F::c(2.0);
        loss = loss + l2 * params.weight_norm_sq();
        // Gradient fields mirror the param field order; the head bias is
        // the eighth field and stays unregularized.
        let param_weights = params.weight_fields();
        let mut grad_fields = grads.fields_mut();
        for (field, weights) in grad_fields.iter_mut().take(7).zip(param_weights) {
            for (g, &w) in field.iter_mut().zip(weights) {
                *g = *g + two * l2 * w;
            }
        }
    }
    Ok((loss, grads))
}

/// Largest relative disagreement between the analytic gradient and central
/// finite differences with step `eps`, over every parameter entry.
/// Entries where both sides are below 1e-10 in magnitude count as exact.
pub fn finite_difference_check<S: std::borrow::Borrow<EncodedSample> + Sync>(
    params: &GruParams<f64>,
    batch: &[S],
    l2: f64,
    eps: f64,
) -> Result<f64, GruError> {
    let (_, analytic) = loss_and_grad(params, batch, l2)?;
    let mut worst = 0.0f64;
    let mut probe = params.clone();
    for field_idx in 0..8 {
        for entry in 0..params.fields()[field_idx].len() {
            let original = probe.fields()[field_idx][entry];
            probe.fields_mut()[field_idx][entry] = original + eps;
            let (up, _) = loss_and_grad(&probe, batch, l2)?;
            probe.fields_mut()[field_idx][entry] = original - eps;
            let (down, _) = loss_and_grad(&probe, batch, l2)?;
            probe.fields_mut()[field_idx][entry] = original;
            let numeric = (up - down) / (2.0 * eps);
            let exact = analytic.fields()[field_idx][entry];
            let scale = exact.abs().max(numeric.abs());
            if scale < 1e-10 {
                continue;
            }
            worst = worst.max((exact - numeric).abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit_sample(bits: &[&[u8]], label: u8) -> EncodedSample {
        EncodedSample {
            sequence: bits.iter().map(|b| BitSeq::from_bits(b)).collect(),
            label,
        }
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let params = GruParams::<f64>::zeros(5, 4, 10);
        let sample = bit_sample(&[&[1, 0, 1, 1], &[0, 0, 1, 0]], 3);
        let trace = forward(&params, sample.sequence.as_slice()).unwrap();
        for k in 0..2 {
            for j in 0..5 {
                assert_eq!(trace.update[k][j], 0.5);
                assert_eq!(trace.reset[k][j], 0.5);
                assert_eq!(trace.candidate[k][j], 0.0);
                assert_eq!(trace.hidden[k][j], 0.0);
            }
        }
        for &p in &trace.probabilities {
            assert!((p - 0.1).abs() < 1e-15);
        }
        // Uniform probabilities: loss is ln C.
        let (loss, _) = loss_and_grad(&params, &[sample], 0.0).unwrap();
        assert!((loss - 10.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn scalar_closed_form_single_step() {
        // J=1, M=1, K=1 with only the candidate input weight set:
        // z = 0.5, r = 0.5, h1 = 0.5 * tanh(w * x).
        let w = 0.73;
        let mut params = GruParams::<f64>::zeros(1, 1, 2);
        params.w_cand_t[0] = w;
        params.w_out = vec![1.0, -1.0];
        let sample = bit_sample(&[&[1]], 0);
        let trace = forward(&params, sample.sequence.as_slice()).unwrap();
        let h1 = 0.5 * w.tanh();
        assert!((trace.hidden[0][0] - h1).abs() < 1e-15);
        assert!((trace.logits[0] - h1).abs() < 1e-15);
        assert!((trace.logits[1] + h1).abs() < 1e-15);
    }

    #[test]
    fn dense_and_bit_inputs_agree() {
        let params = GruParams::<f64>::init(6, 10, 4, 99);
        let bits: Vec<Vec<u8>> = vec![
            (0..10).map(|i| (i % 2) as u8).collect(),
            (0..10).map(|i| (i % 3 == 0) as u8).collect(),
            vec![0; 10],
        ];
        let bit_seq: Vec<BitSeq> = bits.iter().map(|b| BitSeq::from_bits(b)).collect();
        let dense: Vec<Vec<f64>> = bits
            .iter()
            .map(|b| b.iter().map(|&v| v as f64).collect())
            .collect();
        let a = forward(&params, bit_seq.as_slice()).unwrap();
        let b = forward(&params, dense.as_slice()).unwrap();
        assert_eq!(a.probabilities, b.probabilities);
        assert_eq!(a.hidden, b.hidden);
    }

    #[test]
    fn forward_matches_naive_scalar_reimplementation() {
        // Independent oracle: textbook per-element loops, no shared code.
        let params = GruParams::<f64>::init(3, 5, 4, 1234);
        let dense: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 1.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0, 1.0],
        ];
        let j = 3;
        let m = 5;
        let w = |t: &Vec<f64>, jj: usize, i: usize| t[i * j + jj]; // transposed input mats
        let u = |t: &Vec<f64>, jj: usize, kk: usize| t[jj * j + kk];
        let sig = |a: f64| 1.0 / (1.0 + (-a).exp());
        let mut h = vec![0.0f64; j];
        for x in &dense {
            let mut z = vec![0.0; j];
            let mut r = vec![0.0; j];
            for jj in 0..j {
                let mut az = 0.0;
                let mut ar = 0.0;
                for i in 0..m {
                    az += w(&params.w_update_t, jj, i) * x[i];
                    ar += w(&params.w_reset_t, jj, i) * x[i];
                }
                for kk in 0..j {
                    az += u(&params.u_update, jj, kk) * h[kk];
                    ar += u(&params.u_reset, jj, kk) * h[kk];
                }
                z[jj] = sig(az);
                r[jj] = sig(ar);
            }
            let mut hn = vec![0.0; j];
            for jj in 0..j {
                let mut ac = 0.0;
                for i in 0..m {
                    ac += w(&params.w_cand_t, jj, i) * x[i];
                }
                for kk in 0..j {
                    ac += u(&params.u_cand, jj, kk) * (r[kk] * h[kk]);
                }
                hn[jj] = (1.0 - z[jj]) * h[jj] + z[jj] * ac.tanh();
            }
            h = hn;
        }
        let mut logits = params.b_out.clone();
        for c in 0..4 {
            for jj in 0..j {
                logits[c] += params.w_out[c * j + jj] * h[jj];
            }
        }
        let trace = forward(&params, dense.as_slice()).unwrap();
        for (a, b) in trace.hidden.last().unwrap().iter().zip(&h) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in trace.logits.iter().zip(&logits) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hidden_state_stays_in_unit_interval() {
        let params = GruParams::<f64>::init(8, 12, 3, 7);
        let sample = bit_sample(
            &[&[1u8; 12], &[0u8; 12], &[1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0]],
            1,
        );
        let trace = forward(&params, sample.sequence.as_slice()).unwrap();
        for h in &trace.hidden {
            for &v in h {
                assert!(v > -1.0 && v < 1.0);
            }
        }
        let p_sum: f64 = trace.probabilities.iter().sum();
        assert!((p_sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn param_count_reproduces_reported_budgets() {
        assert_eq!(param_count(12, 512, 10), 18_994);
        assert_eq!(param_count(32, 512, 10), 52_554);
        assert_eq!(param_count(50, 512, 10), 84_810);
        let p = GruParams::<f64>::init(12, 512, 10, 0);
        let total: usize = p.fields().iter().map(|f| f.len()).sum();
        assert_eq!(total, p.param_count());
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let params = GruParams::<f64>::zeros(2, 3, 2);
        let sample = bit_sample(&[&[1, 0, 1]], 5);
        assert!(matches!(
            loss_and_grad(&params, &[sample], 0.0),
            Err(GruError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let params = GruParams::<f64>::init(4, 6, 3, 2024);
        let batch = vec![
            bit_sample(&[&[1, 0, 1, 1, 0, 0], &[0, 1, 1, 0, 0, 1], &[1, 1, 0, 0, 1, 0]], 0),
            bit_sample(&[&[0, 0, 1, 0, 1, 1], &[1, 0, 0, 1, 0, 1], &[0, 1, 0, 1, 1, 0]], 2),
        ];
        let worst = finite_difference_check(&params, &batch, 0.002, 1e-4).unwrap();
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn f32_mode_tracks_f64_loosely() {
        let params = GruParams::<f64>::init(4, 6, 3, 5);
        let params32: GruParams<f32> = params.convert();
        let sample = bit_sample(&[&[1, 0, 1, 1, 0, 0], &[0, 1, 1, 0, 0, 1]], 1);
        let t64 = forward(&params, sample.sequence.as_slice()).unwrap();
        let t32 = forward(&params32, sample.sequence.as_slice()).unwrap();
        for (a, b) in t64.probabilities.iter().zip(&t32.probabilities) {
            assert!((a - *b as f64).abs() < 1e-5);
        }
    }
}
