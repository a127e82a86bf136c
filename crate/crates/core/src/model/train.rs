use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::ShapeRegularization;
use super::mlp::MlpParams;
use super::newtonnet::{
    accuracy, add_shape_gradient, backprop_ce, forward, predict, LossParts, NewtonNetParams, Problem,
};
use super::optim::{Adam, ParamSlot};
use crate::error::{Error, Result};
use crate::filter::{equal_spaced_nodes, FilterValues};
use crate::graph::{homophily_ratio, Graph, LabeledSplit};

/// How the filter values start out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterInit {
    /// I.i.d. uniform in `[0, 1]`.
    Random,
    /// Every `t_k` equal to the given value.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Polynomial degree; `K + 1` interpolation nodes.
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub hidden: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub filter_init: FilterInit,
    /// When false the filter values stay at their initial values.
    pub train_filter: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 5,
            i: 2,
            j: 4,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            lr: 0.01,
            weight_decay: 5e-4,
            dropout: 0.0,
            hidden: 64,
            max_epochs: 2000,
            patience: 200,
            seed: 0,
            filter_init: FilterInit::Random,
            train_filter: true,
        }
    }
}

impl TrainConfig {
    /// The shape penalty, or `None` when every weight is zero (the slice
    /// indices are then unused and not checked).
    pub fn regularization(&self) -> Option<ShapeRegularization> {
        let gammas = [self.gamma1, self.gamma2, self.gamma3];
        (gammas != [0.0; 3]).then_some(ShapeRegularization { gammas, i: self.i, j: self.j })
    }

    pub fn with_gammas(mut self, gammas: [f64; 3]) -> Self {
        [self.gamma1, self.gamma2, self.gamma3] = gammas;
        self
    }

    /// Plain MLP: identity filter, frozen, no shape penalty.
    pub fn mlp_baseline(self) -> Self {
        TrainConfig {
            filter_init: FilterInit::Constant(1.0),
            train_filter: false,
            ..self.with_gammas([0.0; 3])
        }
    }

    pub fn validate(&self) -> Result<()> {
        equal_spaced_nodes(self.k)?;
        if let Some(reg) = self.regularization() {
            reg.validate(self.k)?;
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("weight decay must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config("dropout must lie in [0, 1)"));
        }
        if self.hidden == 0 || self.max_epochs == 0 {
            return Err(Error::config("hidden width and max_epochs must be positive"));
        }
        if let FilterInit::Constant(c) = self.filter_init {
            if !c.is_finite() {
                return Err(Error::config("constant filter init must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss: Vec<f64>,
    pub ce_loss: Vec<f64>,
    pub sr_loss: Vec<f64>,
    pub learned_h: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    /// Test accuracy of the best-validation snapshot.
    pub test_accuracy: f64,
    pub best_val_accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Homophily of the graph under the true labels on training nodes and the
/// predictions everywhere else.
///
/// A graph without edges has no homophily; the neutral value `1/C` is
/// returned instead.
pub fn learned_homophily(predictions: &[usize], labels: &[usize], split: &LabeledSplit, g: &Graph) -> f64 {
    let mut merged = predictions.to_vec();
    for &i in &split.train {
        merged[i] = labels[i];
    }
    homophily_ratio(g, &merged).unwrap_or(1.0 / g.num_classes() as f64)
}

fn dropout_mask(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: f64) -> Array2<f64> {
    let keep = 1.0 / (1.0 - p);
    Array2::from_shape_simple_fn((rows, cols), || if rng.random::<f64>() < p { 0.0 } else { keep })
}

fn adam_step(adam: &mut Adam, params: &mut NewtonNetParams, grads: &NewtonNetParams, train_filter: bool) {
    let mlp = &mut params.mlp;
    let mut slots = vec![
        ParamSlot {
            value: mlp.w1.as_slice_mut().expect("standard layout"),
            grad: grads.mlp.w1.as_slice().expect("standard layout"),
            decay: true,
        },
        ParamSlot {
            value: mlp.b1.as_slice_mut().expect("standard layout"),
            grad: grads.mlp.b1.as_slice().expect("standard layout"),
            decay: false,
        },
        ParamSlot {
            value: mlp.w2.as_slice_mut().expect("standard layout"),
            grad: grads.mlp.w2.as_slice().expect("standard layout"),
            decay: true,
        },
        ParamSlot {
            value: mlp.b2.as_slice_mut().expect("standard layout"),
            grad: grads.mlp.b2.as_slice().expect("standard layout"),
            decay: false,
        },
    ];
    let frozen = vec![0.0; grads.t.0.len()];
    slots.push(ParamSlot {
        value: &mut params.t.0,
        grad: if train_filter { &grads.t.0 } else { &frozen },
        decay: false,
    });
    adam.step(slots);
}

/// Full-batch training with early stopping on validation accuracy.
///
/// Each epoch runs the forward pass, re-estimates `h` from the current
/// predictions, then takes one Adam step on cross-entropy plus the shape
/// penalty. Returns the parameters of the best validation epoch (earliest
/// on ties).
pub fn train(g: &Graph, split: &LabeledSplit, cfg: &TrainConfig) -> Result<(NewtonNetParams, TrainReport)> {
    cfg.validate()?;
    split.validate(g.num_nodes())?;

    let nodes = equal_spaced_nodes(cfg.k)?;
    let laplacian = g.normalized_laplacian();
    let labels = g.labels();
    let num_classes = g.num_classes();
    let problem = Problem::new(
        &laplacian,
        g.features().view(),
        labels,
        &split.train,
        num_classes,
        &nodes,
        cfg.regularization(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mlp = MlpParams::init(&mut rng, g.num_features(), cfg.hidden, num_classes);
    let t = match cfg.filter_init {
        FilterInit::Random => (0..=cfg.k).map(|_| rng.random::<f64>()).collect(),
        FilterInit::Constant(c) => vec![c; cfg.k + 1],
    };
    let mut params = NewtonNetParams { mlp, t: FilterValues(t) };
    let mut adam = Adam::new(cfg.lr, cfg.weight_decay);

    let mut report = TrainReport {
        loss: Vec::new(),
        ce_loss: Vec::new(),
        sr_loss: Vec::new(),
        learned_h: Vec::new(),
        val_accuracy: Vec::new(),
        test_accuracy: 0.0,
        best_val_accuracy: f64::NEG_INFINITY,
        best_epoch: 0,
        epochs_run: 0,
    };
    let mut best = params.clone();

    for epoch in 0..cfg.max_epochs {
        let mask =
            (cfg.dropout > 0.0).then(|| dropout_mask(&mut rng, g.num_nodes(), cfg.hidden, cfg.dropout));

        let mut step = backprop_ce(&params, &problem, mask.as_ref())?;
        let h = learned_homophily(&predict(step.logits.view()), labels, split, g);
        let sr = add_shape_gradient(&mut step.grads, &params, &problem, h)?;
        let loss = LossParts { ce: step.ce, sr };
        if !(loss.ce.is_finite() && loss.sr.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch, ce: loss.ce, sr: loss.sr });
        }

        let eval_logits = if mask.is_some() {
            forward(&params, &nodes, &laplacian, problem.features, None)?
        } else {
            step.logits
        };
        let predictions = predict(eval_logits.view());
        let val_acc = accuracy(&predictions, labels, &split.val);

        report.loss.push(loss.total());
        report.ce_loss.push(loss.ce);
        report.sr_loss.push(loss.sr);
        report.learned_h.push(h);
        report.val_accuracy.push(val_acc);
        report.epochs_run = epoch + 1;

        if val_acc > report.best_val_accuracy {
            report.best_val_accuracy = val_acc;
            report.best_epoch = epoch;
            report.test_accuracy = accuracy(&predictions, labels, &split.test);
            best.clone_from(&params);
        } else if epoch - report.best_epoch >= cfg.patience {
            break;
        }

        adam_step(&mut adam, &mut params, &step.grads, cfg.train_filter);
    }
    Ok((best, report))
}
