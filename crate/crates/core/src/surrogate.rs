//! Feedforward regression surrogates.
//!
//! One single-output network per objective or constraint. Inputs are
//! min-max normalized by the problem bounds, targets by the dataset's own
//! range, so training always happens on a [0,1]-scaled problem regardless
//! of raw units. Training is plain mini-batch gradient descent with
//! adaptive moment estimation and is bit-for-bit deterministic for a fixed
//! seed, data, and configuration.

use crate::dataset::{Dataset, Split};
use crate::error::{CoreError, Result};
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation value a = apply(z).
    #[inline]
    fn derivative_from_value(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(CoreError::InvalidArgument(format!(
                "unknown activation '{other}', expected 'tanh' or 'relu'"
            ))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

/// Min-max scaling for inputs (per variable) and the single output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Normalization {
    pub fn from_bounds_and_targets(bounds: &[(f64, f64)], targets: &[f64]) -> Normalization {
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for &t in targets {
            y_lo = y_lo.min(t);
            y_hi = y_hi.max(t);
        }
        if !(y_hi > y_lo) {
            // constant target column: fall back to unit scale
            y_hi = y_lo + 1.0;
        }
        Normalization {
            x_lo: bounds.iter().map(|b| b.0).collect(),
            x_hi: bounds.iter().map(|b| b.1).collect(),
            y_lo,
            y_hi,
        }
    }

    /// Identity scaling for a given input dimension; useful when the caller
    /// already works in normalized units.
    pub fn identity(dim: usize) -> Normalization {
        Normalization {
            x_lo: vec![0.0; dim],
            x_hi: vec![1.0; dim],
            y_lo: 0.0,
            y_hi: 1.0,
        }
    }

    pub fn normalize_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.x_lo.iter().zip(&self.x_hi))
            .map(|(&v, (&lo, &hi))| (v - lo) / (hi - lo))
            .collect()
    }

    #[inline]
    pub fn normalize_y(&self, y: f64) -> f64 {
        (y - self.y_lo) / (self.y_hi - self.y_lo)
    }

    #[inline]
    pub fn denormalize_y(&self, y: f64) -> f64 {
        self.y_lo + y * (self.y_hi - self.y_lo)
    }
}

/// A fitted (or in-training) multilayer perceptron with one output.
///
/// `weights[k]` is the row-major matrix mapping layer k (width
/// `layer_widths[k]`) to layer k+1; entry (i, j) sits at
/// `weights[k][i * layer_widths[k+1] + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub norm: Option<Normalization>,
    pub train_seed: u64,
}

/// Per-layer parameter counts and their total.
pub fn param_count(layer_widths: &[usize]) -> Result<(Vec<usize>, usize)> {
    if layer_widths.len() < 2 {
        return Err(CoreError::InvalidArgument(
            "a network needs at least input and output widths".into(),
        ));
    }
    if layer_widths.iter().any(|&w| w == 0) {
        return Err(CoreError::InvalidArgument(
            "layer widths must be positive".into(),
        ));
    }
    let per_layer: Vec<usize> = layer_widths
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .collect();
    let total = per_layer.iter().sum();
    Ok((per_layer, total))
}

impl MlpModel {
    /// Fresh network with fan-in-scaled uniform weights and zero biases.
    pub fn init(layer_widths: &[usize], activation: Activation, seed: u64) -> Result<MlpModel> {
        param_count(layer_widths)?;
        if *layer_widths.last().unwrap() != 1 {
            return Err(CoreError::InvalidArgument(
                "output width must be 1 (one model per output)".into(),
            ));
        }
        let mut rng = rng_from_seed(seed);
        let mut weights = Vec::with_capacity(layer_widths.len() - 1);
        let mut biases = Vec::with_capacity(layer_widths.len() - 1);
        for w in layer_widths.windows(2) {
            let (w_in, w_out) = (w[0], w[1]);
            let scale = 1.0 / (w_in as f64).sqrt();
            let layer: Vec<f64> = (0..w_in * w_out)
                .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
                .collect();
            weights.push(layer);
            biases.push(vec![0.0; w_out]);
        }
        Ok(MlpModel {
            layer_widths: layer_widths.to_vec(),
            activation,
            weights,
            biases,
            norm: None,
            train_seed: seed,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    fn n_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    /// Forward pass in normalized units.
    pub fn forward_normalized(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        for k in 0..self.n_layers() {
            let w_out = self.layer_widths[k + 1];
            let mut out = self.biases[k].clone();
            let w = &self.weights[k];
            for (i, &ai) in a.iter().enumerate() {
                let row = &w[i * w_out..(i + 1) * w_out];
                for (o, &wij) in out.iter_mut().zip(row) {
                    *o += ai * wij;
                }
            }
            if k + 1 < self.n_layers() {
                for o in out.iter_mut() {
                    *o = self.activation.apply(*o);
                }
            }
            a = out;
        }
        a[0]
    }

    /// Forward pass in problem units: normalize input, propagate,
    /// denormalize the prediction.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let norm = self.norm.as_ref().ok_or(CoreError::NotFitted)?;
        if x.len() != self.input_dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let xn = norm.normalize_x(x);
        Ok(norm.denormalize_y(self.forward_normalized(&xn)))
    }
}

/// Mean squared and mean absolute error over normalized outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrSchedule {
    /// Fixed step size for every epoch.
    Constant,
    /// Cosine decay from the initial rate down to 1% of it across the
    /// configured epoch budget.
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    /// Epochs without validation improvement before stopping early. The
    /// best-validation weights are restored either way.
    pub patience: usize,
    pub activation: Activation,
    pub schedule: LrSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 500,
            seed: 0,
            validation_fraction: 0.15,
            test_fraction: 0.15,
            patience: 50,
            activation: Activation::Tanh,
            schedule: LrSchedule::Cosine,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(CoreError::InvalidArgument(
                "learning rate must be positive".into(),
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(CoreError::InvalidArgument(
                "batch size and epochs must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn lr_at(&self, epoch: usize, horizon: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::Cosine => {
                let t = epoch as f64 / horizon.saturating_sub(1).max(1) as f64;
                self.learning_rate
                    * (0.01 + 0.99 * 0.5 * (1.0 + (std::f64::consts::PI * t).cos()))
            }
        }
    }
}

/// Normalized training arrays, ready for the inner loop.
pub struct TrainData {
    pub x_train: Vec<Vec<f64>>,
    pub y_train: Vec<f64>,
    pub x_val: Vec<Vec<f64>>,
    pub y_val: Vec<f64>,
}

impl TrainData {
    pub fn from_split(
        dataset: &Dataset,
        target: usize,
        norm: &Normalization,
        split: &Split,
    ) -> TrainData {
        let take = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
            idx.iter()
                .map(|&i| {
                    (
                        norm.normalize_x(&dataset.inputs[i]),
                        norm.normalize_y(dataset.outputs[i][target]),
                    )
                })
                .unzip()
        };
        let (x_train, y_train) = take(&split.train);
        let (x_val, y_val) = take(&split.val);
        TrainData {
            x_train,
            y_train,
            x_val,
            y_val,
        }
    }
}

/// Scratch buffers for one backpropagation pass.
struct Workspace {
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(widths: &[usize]) -> Workspace {
        Workspace {
            activations: widths.iter().map(|&w| vec![0.0; w]).collect(),
            deltas: widths.iter().map(|&w| vec![0.0; w]).collect(),
        }
    }
}

/// Mean squared error of the model over normalized samples.
pub fn batch_loss(model: &MlpModel, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let n = ys.len().max(1);
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| {
            let e = model.forward_normalized(x) - y;
            e * e
        })
        .sum::<f64>()
        / n as f64
}

/// Analytic gradients of `batch_loss` with respect to every weight and
/// bias, plus the loss itself. Exposed so tests can check them against
/// finite differences.
pub fn batch_gradients(
    model: &MlpModel,
    xs: &[Vec<f64>],
    ys: &[f64],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
    let mut grad_w: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut grad_b: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut ws = Workspace::new(&model.layer_widths);
    let idx: Vec<usize> = (0..ys.len()).collect();
    let loss = accumulate_gradients(model, xs, ys, &idx, &mut ws, &mut grad_w, &mut grad_b);
    (grad_w, grad_b, loss)
}

fn accumulate_gradients(
    model: &MlpModel,
    xs: &[Vec<f64>],
    ys: &[f64],
    idx: &[usize],
    ws: &mut Workspace,
    grad_w: &mut [Vec<f64>],
    grad_b: &mut [Vec<f64>],
) -> f64 {
    let n_layers = model.n_layers();
    let batch = idx.len();
    let inv_b = 1.0 / batch as f64;
    let mut loss = 0.0;
    for &sample in idx {
        let (x, y) = (&xs[sample], ys[sample]);
        ws.activations[0].copy_from_slice(x);
        for k in 0..n_layers {
            let w_out = model.layer_widths[k + 1];
            let (lower, upper) = ws.activations.split_at_mut(k + 1);
            let a_in = &lower[k];
            let a_out = &mut upper[0];
            a_out.copy_from_slice(&model.biases[k]);
            let w = &model.weights[k];
            for (i, &ai) in a_in.iter().enumerate() {
                let row = &w[i * w_out..(i + 1) * w_out];
                for (o, &wij) in a_out.iter_mut().zip(row) {
                    *o += ai * wij;
                }
            }
            if k + 1 < n_layers {
                for o in a_out.iter_mut() {
                    *o = model.activation.apply(*o);
                }
            }
        }
        let pred = ws.activations[n_layers][0];
        let err = pred - y;
        loss += err * err * inv_b;
        // output layer is linear; d(loss)/d(pred) = 2 err / B
        ws.deltas[n_layers][0] = 2.0 * err * inv_b;
        for k in (0..n_layers).rev() {
            let w_out = model.layer_widths[k + 1];
            let w = &model.weights[k];
            {
                let delta = &ws.deltas[k + 1];
                let a_in = &ws.activations[k];
                let gw = &mut grad_w[k];
                for (i, &ai) in a_in.iter().enumerate() {
                    let grow = &mut gw[i * w_out..(i + 1) * w_out];
                    for (g, &dj) in grow.iter_mut().zip(delta) {
                        *g += ai * dj;
                    }
                }
                for (g, &dj) in grad_b[k].iter_mut().zip(delta) {
                    *g += dj;
                }
            }
            if k > 0 {
                let (lower, upper) = ws.deltas.split_at_mut(k + 1);
                let delta_out = &upper[0];
                let delta_in = &mut lower[k];
                let a_in = &ws.activations[k];
                for i in 0..delta_in.len() {
                    let row = &w[i * w_out..(i + 1) * w_out];
                    let s: f64 = row.iter().zip(delta_out.iter()).map(|(a, b)| a * b).sum();
                    delta_in[i] = s * model.activation.derivative_from_value(a_in[i]);
                }
            }
        }
    }
    loss
}

/// Adam optimizer state.
struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    t: u64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    fn new(model: &MlpModel) -> AdamState {
        AdamState {
            m_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grad_w: &[Vec<f64>], grad_b: &[Vec<f64>], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t as i32);
        let c2 = 1.0 - BETA2.powi(self.t as i32);
        for k in 0..model.weights.len() {
            adam_update(
                &mut model.weights[k],
                &grad_w[k],
                &mut self.m_w[k],
                &mut self.v_w[k],
                lr,
                c1,
                c2,
            );
            adam_update(
                &mut model.biases[k],
                &grad_b[k],
                &mut self.m_b[k],
                &mut self.v_b[k],
                lr,
                c1,
                c2,
            );
        }
    }
}

fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    c1: f64,
    c2: f64,
) {
    for i in 0..params.len() {
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * grads[i];
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * grads[i] * grads[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

/// Loss pair recorded after each epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub train_mse: f64,
    pub val_mse: f64,
}

/// Incremental trainer; supports training in slices of epochs so a
/// hyperparameter search can resume a configuration instead of restarting.
pub struct Trainer {
    pub model: MlpModel,
    adam: AdamState,
    rng: ChaCha8Rng,
    config: TrainConfig,
    grad_w: Vec<Vec<f64>>,
    grad_b: Vec<Vec<f64>>,
    ws: Workspace,
    pub history: Vec<EpochLoss>,
    order: Vec<usize>,
}

impl Trainer {
    pub fn new(layer_widths: &[usize], norm: Normalization, config: TrainConfig) -> Result<Trainer> {
        config.validate()?;
        let mut model = MlpModel::init(layer_widths, config.activation, config.seed)?;
        model.norm = Some(norm);
        let adam = AdamState::new(&model);
        let grad_w = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let grad_b = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let ws = Workspace::new(&model.layer_widths);
        // mixing the config seed again decorrelates the batch-order stream
        // from the weight-initialization stream
        let rng = rng_from_seed(crate::rng::derive_seed(config.seed, "batch-order"));
        Ok(Trainer {
            model,
            adam,
            rng,
            config,
            grad_w,
            grad_b,
            ws,
            history: Vec::new(),
            order: Vec::new(),
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.history.len()
    }

    /// Runs `additional` epochs; the learning-rate schedule is indexed by
    /// absolute epoch against `horizon` total epochs.
    pub fn run_epochs(&mut self, data: &TrainData, additional: usize, horizon: usize) -> Result<()> {
        let n = data.y_train.len();
        if n == 0 {
            return Err(CoreError::InvalidArgument("empty training split".into()));
        }
        if self.order.len() != n {
            self.order = (0..n).collect();
        }
        for _ in 0..additional {
            let epoch = self.history.len();
            let lr = self.config.lr_at(epoch, horizon);
            self.order.shuffle(&mut self.rng);
            let mut train_loss_sum = 0.0;
            for chunk in self.order.chunks(self.config.batch_size) {
                for g in self.grad_w.iter_mut().chain(self.grad_b.iter_mut()) {
                    g.iter_mut().for_each(|v| *v = 0.0);
                }
                let loss = accumulate_gradients(
                    &self.model,
                    &data.x_train,
                    &data.y_train,
                    chunk,
                    &mut self.ws,
                    &mut self.grad_w,
                    &mut self.grad_b,
                );
                if !loss.is_finite() {
                    return Err(CoreError::TrainingDiverged { epoch });
                }
                train_loss_sum += loss * chunk.len() as f64;
                self.adam
                    .step(&mut self.model, &self.grad_w, &self.grad_b, lr);
            }
            let train_mse = train_loss_sum / n as f64;
            let val_mse = if data.y_val.is_empty() {
                train_mse
            } else {
                batch_loss(&self.model, &data.x_val, &data.y_val)
            };
            if !val_mse.is_finite() {
                return Err(CoreError::TrainingDiverged { epoch });
            }
            self.history.push(EpochLoss { train_mse, val_mse });
        }
        Ok(())
    }
}

/// Everything `fit` produces: the model plus training diagnostics.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochLoss>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub split: Split,
}

/// Trains one single-output model on the given output column.
///
/// The row split, weight initialization, and batch order all derive from
/// `config.seed`. Early stopping watches validation MSE with the
/// configured patience; the best-validation weights are restored at the
/// end.
pub fn fit(
    dataset: &Dataset,
    target: usize,
    hidden: &[usize],
    bounds: &[(f64, f64)],
    config: &TrainConfig,
) -> Result<FitOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(CoreError::InvalidArgument("empty dataset".into()));
    }
    if target >= dataset.output_names.len() {
        return Err(CoreError::InvalidArgument(format!(
            "output column {target} out of range"
        )));
    }
    if bounds.len() != dataset.input_names.len() {
        return Err(CoreError::DimensionMismatch {
            expected: dataset.input_names.len(),
            got: bounds.len(),
        });
    }
    let split = dataset.split(config.validation_fraction, config.test_fraction, config.seed)?;
    let norm = Normalization::from_bounds_and_targets(bounds, &dataset.output_column(target));
    let data = TrainData::from_split(dataset, target, &norm, &split);

    let mut widths = Vec::with_capacity(hidden.len() + 2);
    widths.push(dataset.input_names.len());
    widths.extend_from_slice(hidden);
    widths.push(1);

    let mut trainer = Trainer::new(&widths, norm, config.clone())?;
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    for epoch in 0..config.epochs {
        trainer.run_epochs(&data, 1, config.epochs)?;
        let val = trainer.history[epoch].val_mse;
        if val < best_val {
            best_val = val;
            best_epoch = epoch;
            best_params = Some((trainer.model.weights.clone(), trainer.model.biases.clone()));
        } else if epoch - best_epoch >= config.patience {
            break;
        }
    }
    let mut model = trainer.model;
    if let Some((w, b)) = best_params {
        model.weights = w;
        model.biases = b;
    }
    Ok(FitOutcome {
        model,
        epochs_run: trainer.history.len(),
        history: trainer.history,
        best_epoch,
        split,
    })
}

/// Metrics over a holdout set, plus raw-unit parity pairs
/// (predicted, actual) for plotting.
pub fn evaluate(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> Result<(RegressionMetrics, Vec<(f64, f64)>)> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(CoreError::InvalidArgument(
            "evaluate needs a nonempty split with matching lengths".into(),
        ));
    }
    let norm = model.norm.as_ref().ok_or(CoreError::NotFitted)?;
    let mut se = 0.0;
    let mut ae = 0.0;
    let mut parity = Vec::with_capacity(inputs.len());
    for (x, &y) in inputs.iter().zip(targets) {
        let pred = model.forward(x)?;
        parity.push((pred, y));
        let e = norm.normalize_y(pred) - norm.normalize_y(y);
        se += e * e;
        ae += e.abs();
    }
    let n = inputs.len() as f64;
    Ok((
        RegressionMetrics {
            mse: se / n,
            mae: ae / n,
        },
        parity,
    ))
}

pub const MODEL_FORMAT: &str = "certopt.model/1";

/// On-disk model representation with a format-version field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub target: String,
    pub model: MlpModel,
}

pub fn save_model(path: &std::path::Path, target: &str, model: &MlpModel) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        target: target.into(),
        model: model.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_model(path: &std::path::Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.format != MODEL_FORMAT {
        return Err(CoreError::MalformedData(format!(
            "unsupported model format '{}', expected '{MODEL_FORMAT}'",
            file.format
        )));
    }
    Ok(file)
}
