/// Adam with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: i32,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

/// One parameter tensor, flattened, with its gradient.
pub struct ParamSlot<'a> {
    pub value: &'a mut [f64],
    pub grad: &'a [f64],
    /// Whether weight decay applies to this tensor.
    pub decay: bool,
}

impl Adam {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay, step: 0, moments: Vec::new() }
    }

    /// Applies one update. Slots must be passed in the same order on every
    /// call.
    pub fn step(&mut self, slots: Vec<ParamSlot<'_>>) {
        if self.moments.is_empty() {
            self.moments =
                slots.iter().map(|s| (vec![0.0; s.value.len()], vec![0.0; s.value.len()])).collect();
        }
        assert_eq!(self.moments.len(), slots.len(), "parameter layout changed");
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);

        for (slot, (m, v)) in slots.into_iter().zip(&mut self.moments) {
            let shrink = if slot.decay { 1.0 - self.lr * self.weight_decay } else { 1.0 };
            for (((p, &g), mi), vi) in slot.value.iter_mut().zip(slot.grad).zip(m).zip(v) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *p = *p * shrink - self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}
