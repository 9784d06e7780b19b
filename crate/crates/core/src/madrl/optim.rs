//! Plain SGD and Adam over [`MlpParams`].

use alloc::vec;
use alloc::vec::Vec;

use super::mlp::MlpParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sgd" => Some(OptimizerKind::Sgd),
            "adam" => Some(OptimizerKind::Adam),
            _ => None,
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Minimizes: each step moves parameters against the supplied gradient.
#[derive(Clone, Debug)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, param_count: usize) -> Self {
        let state = match kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam => param_count,
        };
        Optimizer {
            kind,
            lr,
            t: 0,
            m: vec![0.0; state],
            v: vec![0.0; state],
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams) {
        match self.kind {
            OptimizerKind::Sgd => {
                let lr = self.lr;
                for (p, g) in params.iter_mut().zip(grads.iter()) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let t = self.t as f64;
                let c1 = 1.0 - libm::pow(BETA1, t);
                let c2 = 1.0 - libm::pow(BETA2, t);
                let step = self.lr * libm::sqrt(c2) / c1;
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grads.iter())
                    .zip(self.m.iter_mut())
                    .zip(self.v.iter_mut())
                {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= step * *m / (libm::sqrt(*v) + ADAM_EPS);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::madrl::mlp::Activation;

    #[test]
    fn sgd_takes_plain_steps() {
        let mut p = MlpParams::zeros(&[1, 1, 1, 1, 1], Activation::Relu).unwrap();
        let mut g = p.clone();
        g.fill(2.0);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.25, p.param_count());
        opt.step(&mut p, &g);
        assert!(p.iter().all(|&v| v == -0.5));
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        let mut p = MlpParams::zeros(&[1, 1, 1, 1, 1], Activation::Relu).unwrap();
        let mut g = p.clone();
        g.fill(-3.0);
        let mut opt = Optimizer::new(OptimizerKind::Adam, 1e-3, p.param_count());
        opt.step(&mut p, &g);
        assert!(p.iter().all(|&v| (v - 1e-3).abs() < 1e-9));
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = MlpParams::zeros(&[2, 2, 2, 2, 1], Activation::Relu).unwrap();
        p.fill(0.3);
        let before = p.clone();
        let g = MlpParams::zeros(&[2, 2, 2, 2, 1], Activation::Relu).unwrap();
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let mut opt = Optimizer::new(kind, 0.1, p.param_count());
            opt.step(&mut p, &g);
            assert_eq!(p, before);
        }
    }
}
