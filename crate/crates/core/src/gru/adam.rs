//! Adam with bias correction, over the flat parameter fields.

use super::{GruParams, Scalar};

/// First/second moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<F> {
    m: GruParams<F>,
    v: GruParams<F>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl<F: Scalar> AdamState<F> {
    pub fn new(params: &GruParams<F>, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    /// One in-place update: `p -= lr_t * m_hat / (sqrt(v_hat) + eps)` with
    /// the usual bias-corrected step size.
    pub fn step(&mut self, params: &mut GruParams<F>, grads: &GruParams<F>, lr: f64) {
        self.step += 1;
        let b1 = F::c(self.beta1);
        let b2 = F::c(self.beta2);
        let one = F::one();
        let lr_t = lr * (1.0 - self.beta2.powi(self.step as i32)).sqrt()
            / (1.0 - self.beta1.powi(self.step as i32));
        let lr_t = F::c(lr_t);
        let eps = F::c(self.epsilon);
        for ((field, grad), (m, v)) in params
            .fields_mut()
            .into_iter()
            .zip(grads.fields())
            .zip(self.m.fields_mut().into_iter().zip(self.v.fields_mut()))
        {
            for (((p, &g), m), v) in field.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut())
            {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *p = *p - lr_t * *m / (v.sqrt() + eps);
            }
        }
    }
}
