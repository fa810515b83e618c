//! ADAM training loop, evaluation and checkpoints.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Split};
use crate::error::{Error, Result};
use crate::model::{init_params, GradMethod, Model, ModelConfig};
use crate::sim::StateVector;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }
}

/// One bias-corrected ADAM update. Nothing is modified when the inputs are
/// rejected.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    let n = params.len();
    if grads.len() != n {
        return Err(Error::dim(n, grads.len()));
    }
    if state.first_moment.len() != n || state.second_moment.len() != n {
        return Err(Error::dim(n, state.first_moment.len()));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for i in 0..n {
        let g = grads[i];
        state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * g;
        state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        let m = state.first_moment[i] / c1;
        let v = state.second_moment[i] / c2;
        params[i] -= state.learning_rate * m / (v.sqrt() + state.epsilon);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    /// Extra evaluations every this many steps; 0 evaluates only at epoch ends.
    pub eval_every: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub grad_method: GradMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            shuffle_seed: 0,
            eval_every: 0,
            learning_rate: 1e-3,
            grad_method: GradMethod::ParameterShift,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub epoch: usize,
    pub step: u64,
    /// Mean training loss over the steps since the previous row.
    pub loss: f64,
    pub val_acc: f64,
    pub repeat: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: Vec<MetricRow>,
}

impl Metrics {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,step,loss,val_acc,repeat\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:.16e},{:.16e},{}", r.epoch, r.step, r.loss, r.val_acc, r.repeat);
        }
        s
    }

    /// Final validation accuracy of each repeat, in repeat order.
    pub fn final_accuracies(&self) -> Vec<f64> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(k, _)| *k == r.repeat) {
                Some(e) => e.1 = r.val_acc,
                None => out.push((r.repeat, r.val_acc)),
            }
        }
        out.sort_by_key(|e| e.0);
        out.into_iter().map(|e| e.1).collect()
    }

    /// Mean/min/max of validation accuracy across repeats at each
    /// `(epoch, step)` point.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut out: Vec<AggregateRow> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|a| a.epoch == r.epoch && a.step == r.step) {
                Some(a) => {
                    a.mean_acc += r.val_acc;
                    a.min_acc = a.min_acc.min(r.val_acc);
                    a.max_acc = a.max_acc.max(r.val_acc);
                    a.mean_loss += r.loss;
                    a.repeats += 1;
                }
                None => out.push(AggregateRow {
                    epoch: r.epoch,
                    step: r.step,
                    mean_loss: r.loss,
                    mean_acc: r.val_acc,
                    min_acc: r.val_acc,
                    max_acc: r.val_acc,
                    repeats: 1,
                }),
            }
        }
        for a in &mut out {
            a.mean_acc /= a.repeats as f64;
            a.mean_loss /= a.repeats as f64;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub epoch: usize,
    pub step: u64,
    pub mean_loss: f64,
    pub mean_acc: f64,
    pub min_acc: f64,
    pub max_acc: f64,
    pub repeats: usize,
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut s = String::from("epoch,step,mean_loss,mean_acc,min_acc,max_acc,repeats\n");
    for a in rows {
        let _ = writeln!(
            s,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            a.epoch, a.step, a.mean_loss, a.mean_acc, a.min_acc, a.max_acc, a.repeats
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub params: Vec<f64>,
    pub adam: AdamState,
    pub epoch: usize,
    pub repeat: usize,
    pub init_seed: u64,
    pub shuffle_seed: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_slice(&text)?;
        if ck.format_version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch {
                expected: CHECKPOINT_VERSION,
                found: ck.format_version,
            });
        }
        if ck.params.len() != ck.model.n_params() {
            return Err(Error::dim(ck.model.n_params(), ck.params.len()));
        }
        Ok(ck)
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: Vec<f64>,
    pub adam: AdamState,
    pub metrics: Metrics,
    pub checkpoints: Vec<PathBuf>,
}

/// Stream `repeat` of a base seed, so repeats never share randomness.
pub fn repeat_rng(seed: u64, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    rng
}

/// Encodes every image of a split for `model`.
pub fn encode_split(model: &Model, split: Split<'_>) -> Result<Vec<StateVector>> {
    split.images.par_iter().map(|img| model.encode(img)).collect()
}

/// Fraction of `states` whose prediction equals the label.
pub fn accuracy(model: &Model, params: &[f64], states: &[StateVector], labels: &[usize]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Insufficient("cannot evaluate an empty split".into()));
    }
    if states.len() != labels.len() {
        return Err(Error::dim(states.len(), labels.len()));
    }
    let hits = states
        .par_iter()
        .zip(labels.par_iter())
        .map(|(s, &y)| Ok(usize::from(model.predict(s, params)?.class == y)))
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / states.len() as f64)
}

pub fn evaluate(model: &Model, params: &[f64], split: Split<'_>) -> Result<f64> {
    if split.is_empty() {
        return Err(Error::Insufficient("cannot evaluate an empty split".into()));
    }
    let states = encode_split(model, split)?;
    accuracy(model, params, &states, split.labels)
}

/// Mean loss and mean gradient over a batch. Per-example work runs in
/// parallel; the reduction is sequential in batch order.
pub fn batch_loss_grad(
    model: &Model,
    params: &[f64],
    states: &[&StateVector],
    labels: &[usize],
    method: GradMethod,
) -> Result<(f64, Vec<f64>)> {
    if states.is_empty() {
        return Err(Error::Insufficient("empty batch".into()));
    }
    let parts = states
        .par_iter()
        .zip(labels.par_iter())
        .map(|(s, &y)| model.loss_and_grad(s, params, y, method))
        .collect::<Result<Vec<_>>>()?;
    let inv = 1.0 / states.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    grad.iter_mut().for_each(|g| *g *= inv);
    Ok((loss * inv, grad))
}

/// Trains one repeat. Parameters are drawn from stream `repeat` of
/// `model_config.seed`; batches are shuffled from stream `repeat` of
/// `train_config.shuffle_seed`. With `out_dir`, writes one checkpoint per
/// epoch.
pub fn train(
    model_config: &ModelConfig,
    dataset: &Dataset,
    train_config: &TrainConfig,
    repeat: usize,
    out_dir: Option<&Path>,
) -> Result<TrainOutcome> {
    train_config.validate()?;
    let model = Model::new(model_config.clone())?;
    if dataset.n_classes() > model_config.n_classes {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} classes but the model reads out {}",
            dataset.n_classes(),
            model_config.n_classes
        )));
    }
    let train_states = encode_split(&model, dataset.train())?;
    let train_labels = dataset.train().labels;
    let val_states = encode_split(&model, dataset.val())?;
    let val_labels = dataset.val().labels;
    if train_states.is_empty() {
        return Err(Error::Insufficient("empty training split".into()));
    }

    let mut params = init_params(model.n_params(), &mut repeat_rng(model_config.seed, repeat));
    let mut adam = AdamState::new(params.len(), train_config.learning_rate);
    let mut shuffle = repeat_rng(train_config.shuffle_seed, repeat);
    let mut metrics = Metrics::default();
    let mut checkpoints = Vec::new();
    let mut order: Vec<usize> = (0..train_states.len()).collect();
    let (mut loss_acc, mut loss_n) = (0.0, 0usize);

    for epoch in 1..=train_config.epochs {
        order.shuffle(&mut shuffle);
        let n_batches = order.len().div_ceil(train_config.batch_size);
        for (b, chunk) in order.chunks(train_config.batch_size).enumerate() {
            let states: Vec<&StateVector> = chunk.iter().map(|&i| &train_states[i]).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| train_labels[i]).collect();
            let (loss, grad) =
                batch_loss_grad(&model, &params, &states, &labels, train_config.grad_method)?;
            adam_step(&mut adam, &mut params, &grad)?;
            loss_acc += loss;
            loss_n += 1;
            let every = train_config.eval_every;
            let epoch_end = b + 1 == n_batches;
            if (every > 0 && adam.step_count.is_multiple_of(every as u64)) || epoch_end {
                let val_acc = if val_states.is_empty() {
                    f64::NAN
                } else {
                    accuracy(&model, &params, &val_states, val_labels)?
                };
                metrics.rows.push(MetricRow {
                    epoch,
                    step: adam.step_count,
                    loss: loss_acc / loss_n as f64,
                    val_acc,
                    repeat,
                });
                loss_acc = 0.0;
                loss_n = 0;
            }
        }
        if let Some(dir) = out_dir {
            let ck = Checkpoint {
                format_version: CHECKPOINT_VERSION,
                model: model_config.clone(),
                train: train_config.clone(),
                params: params.clone(),
                adam: adam.clone(),
                epoch,
                repeat,
                init_seed: model_config.seed,
                shuffle_seed: train_config.shuffle_seed,
            };
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(format!("checkpoint_r{repeat}_e{epoch:03}.json"));
            let json = serde_json::to_string_pretty(&ck)?;
            fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
            checkpoints.push(path);
        }
    }
    Ok(TrainOutcome {
        params,
        adam,
        metrics,
        checkpoints,
    })
}

/// Runs `repeats` independent trainings and concatenates their metrics.
pub fn train_repeats(
    model_config: &ModelConfig,
    dataset: &Dataset,
    train_config: &TrainConfig,
    repeats: usize,
    out_dir: Option<&Path>,
) -> Result<(Vec<TrainOutcome>, Metrics)> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let mut outcomes = Vec::with_capacity(repeats);
    let mut all = Metrics::default();
    for r in 0..repeats {
        let o = train(model_config, dataset, train_config, r, out_dir)?;
        all.rows.extend(o.metrics.rows.iter().cloned());
        outcomes.push(o);
    }
    Ok((outcomes, all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_params() {
        let mut st = AdamState::new(3, 1e-3);
        let mut p = vec![0.1, 0.2, 0.3];
        adam_step(&mut st, &mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![0.1, 0.2, 0.3]);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn first_step_is_learning_rate() {
        let mut st = AdamState::new(1, 1e-3);
        let mut p = vec![0.0];
        adam_step(&mut st, &mut p, &[1.0]).unwrap();
        assert!((p[0] + 1e-3).abs() < 1e-10, "{}", p[0]);
    }

    #[test]
    fn descends_quadratic() {
        let f = |x: f64| (x - 2.0).powi(2);
        let mut st = AdamState::new(1, 0.1);
        let mut p = vec![0.0];
        let before = f(p[0]);
        for _ in 0..2 {
            let g = 2.0 * (p[0] - 2.0);
            adam_step(&mut st, &mut p, &[g]).unwrap();
        }
        assert!(f(p[0]) < before);
    }

    #[test]
    fn rejects_bad_gradients() {
        let mut st = AdamState::new(2, 1e-3);
        let mut p = vec![0.0, 0.0];
        assert!(adam_step(&mut st, &mut p, &[f64::NAN, 0.0]).is_err());
        assert!(adam_step(&mut st, &mut p, &[0.0]).is_err());
        assert_eq!(st.step_count, 0);
        assert_eq!(st, AdamState::new(2, 1e-3));
    }

    #[test]
    fn csv_layout() {
        let m = Metrics {
            rows: vec![MetricRow {
                epoch: 1,
                step: 16,
                loss: -0.5,
                val_acc: 0.75,
                repeat: 0,
            }],
        };
        assert_eq!(
            m.to_csv(),
            "epoch,step,loss,val_acc,repeat\n1,16,-5.0000000000000000e-1,7.5000000000000000e-1,0\n"
        );
    }

    #[test]
    fn aggregate_across_repeats() {
        let row = |acc, repeat| MetricRow {
            epoch: 1,
            step: 4,
            loss: 0.0,
            val_acc: acc,
            repeat,
        };
        let m = Metrics {
            rows: vec![row(0.5, 0), row(1.0, 1)],
        };
        let a = m.aggregate();
        assert_eq!(a.len(), 1);
        assert_eq!((a[0].mean_acc, a[0].min_acc, a[0].max_acc), (0.75, 0.5, 1.0));
        assert_eq!(m.final_accuracies(), vec![0.5, 1.0]);
    }
}
