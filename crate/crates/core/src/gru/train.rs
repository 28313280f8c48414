//! Mini-batch training with Adam, per-epoch validation, and selection of
//! the best-validation parameters.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    forward, loss_and_grad, AdamState, EncodedDataset, EncodedSample, GruError, GruParams, Scalar,
};

/// Training hyper-parameters. The defaults are the experiment settings:
/// learning rate 1e-3, 30 epochs, batch 64, L2 2e-3, Adam
/// (0.9, 0.999, 1e-8).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub units: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            epochs: 30,
            batch_size: 64,
            l2: 0.002,
            units: 32,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), GruError> {
        if self.epochs == 0 || self.batch_size == 0 || self.units == 0 {
            return Err(GruError::Empty("config dimension"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    /// Parameters from the epoch with the highest validation accuracy.
    pub params: GruParams<F>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Train from a seeded init; shuffling, batching and the ordered chunk
/// reduction inside the gradient make the run bitwise reproducible for a
/// fixed config.
pub fn train<F: Scalar>(
    train_set: &EncodedDataset,
    val_set: &EncodedDataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<F>, GruError> {
    config.validate()?;
    train_set.validate()?;
    val_set.validate()?;
    if val_set.input_dim != train_set.input_dim || val_set.steps != train_set.steps {
        return Err(GruError::InputDim {
            expected: train_set.input_dim,
            got: val_set.input_dim,
        });
    }

    let mut params = GruParams::<F>::init(
        config.units,
        train_set.input_dim,
        train_set.classes,
        config.seed,
    );
    let mut adam = AdamState::new(&params, config.beta1, config.beta2, config.epsilon);
    // Distinct stream from the init draws.
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9E37_79B9_7F4A_7C15);

    let mut order: Vec<usize> = (0..train_set.samples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, GruParams<F>)> = None;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for batch_indices in order.chunks(config.batch_size) {
            let batch: Vec<&EncodedSample> = batch_indices
                .iter()
                .map(|&i| &train_set.samples[i])
                .collect();
            let (loss, grads) = loss_and_grad(&params, &batch, config.l2)?;
            adam.step(&mut params, &grads, config.learning_rate);
            loss_sum += loss.as_f64();
            batches += 1;
        }
        let val_accuracy = evaluate(&params, val_set)?;
        let record = EpochRecord {
            epoch,
            loss: loss_sum / batches as f64,
            val_accuracy,
        };
        on_epoch(&record);
        if best.as_ref().is_none_or(|(acc, _, _)| val_accuracy > *acc) {
            best = Some((val_accuracy, epoch, params.clone()));
        }
        history.push(record);
    }
    let (_, best_epoch, best_params) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        params: best_params,
        history,
        best_epoch,
    })
}

/// Predicted class: argmax of the head probabilities, ties to the lowest
/// class index.
pub fn predict<F: Scalar>(
    params: &GruParams<F>,
    sample: &EncodedSample,
) -> Result<usize, GruError> {
    let trace = forward(params, sample.sequence.as_slice())?;
    let mut best = 0;
    for (c, &p) in trace.probabilities.iter().enumerate() {
        if p > trace.probabilities[best] {
            best = c;
        }
    }
    Ok(best)
}

/// Fraction of samples whose prediction matches the label.
pub fn evaluate<F: Scalar>(
    params: &GruParams<F>,
    dataset: &EncodedDataset,
) -> Result<f64, GruError> {
    if dataset.samples.is_empty() {
        return Err(GruError::Empty("dataset"));
    }
    let hit = |sample: &EncodedSample| -> Result<usize, GruError> {
        Ok((predict(params, sample)? == sample.label as usize) as usize)
    };
    #[cfg(feature = "parallel")]
    let hits: Result<usize, GruError> = {
        use rayon::prelude::*;
        dataset
            .samples
            .par_iter()
            .map(hit)
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    #[cfg(not(feature = "parallel"))]
    let hits: Result<usize, GruError> = dataset.samples.iter().map(hit).sum();
    Ok(hits? as f64 / dataset.samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitplanes::BitSeq;
    use rand::Rng;

    /// Synthetic two-class set: the label is the first bit of the single
    /// syndrome, so one logistic unit suffices.
    fn parity_dataset(n: usize, seed: u64) -> EncodedDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| {
                let bits: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
                EncodedSample {
                    label: bits[0],
                    sequence: vec![BitSeq::from_bits(&bits)],
                }
            })
            .collect();
        EncodedDataset {
            samples,
            steps: 1,
            input_dim: 4,
            classes: 2,
        }
    }

    #[test]
    fn learns_linearly_separable_syndromes_quickly() {
        let train_set = parity_dataset(1024, 1);
        let val_set = parity_dataset(256, 2);
        let config = TrainConfig {
            epochs: 5,
            units: 4,
            seed: 3,
            l2: 0.0,
            learning_rate: 0.02,
            ..TrainConfig::default()
        };
        let outcome = train::<f64>(&train_set, &val_set, &config, |_| {}).unwrap();
        let best = outcome
            .history
            .iter()
            .map(|r| r.val_accuracy)
            .fold(0.0, f64::max);
        assert_eq!(best, 1.0, "history: {:?}", outcome.history);
    }

    #[test]
    fn memorizes_a_single_sample() {
        let sample = EncodedSample {
            label: 2,
            sequence: vec![BitSeq::from_bits(&[1, 0, 1, 1, 0, 0, 1, 0])],
        };
        let set = EncodedDataset {
            samples: vec![sample],
            steps: 1,
            input_dim: 8,
            classes: 4,
        };
        let config = TrainConfig {
            epochs: 40,
            units: 4,
            learning_rate: 0.05,
            l2: 0.0,
            batch_size: 1,
            ..TrainConfig::default()
        };
        let outcome = train::<f64>(&set, &set, &config, |_| {}).unwrap();
        assert_eq!(evaluate(&outcome.params, &set).unwrap(), 1.0);
    }

    #[test]
    fn training_is_bitwise_reproducible() {
        let train_set = parity_dataset(100, 5);
        let val_set = parity_dataset(40, 6);
        let config = TrainConfig {
            epochs: 3,
            units: 3,
            seed: 9,
            ..TrainConfig::default()
        };
        let a = train::<f64>(&train_set, &val_set, &config, |_| {}).unwrap();
        let b = train::<f64>(&train_set, &val_set, &config, |_| {}).unwrap();
        assert_eq!(a.params, b.params);
        for (ra, rb) in a.history.iter().zip(&b.history) {
            assert_eq!(ra.loss, rb.loss);
            assert_eq!(ra.val_accuracy, rb.val_accuracy);
        }
    }

    #[test]
    fn memorizes_a_small_set() {
        // Random labels on 64 samples: loss must drop by at least half,
        // and the model must fit its own training set.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let samples: Vec<EncodedSample> = (0..64)
            .map(|_| {
                let bits: Vec<u8> = (0..16).map(|_| rng.random_range(0..2)).collect();
                EncodedSample {
                    label: rng.random_range(0..4),
                    sequence: vec![
                        BitSeq::from_bits(&bits[..8]),
                        BitSeq::from_bits(&bits[8..]),
                    ],
                }
            })
            .collect();
        let set = EncodedDataset {
            samples,
            steps: 2,
            input_dim: 8,
            classes: 4,
        };
        let config = TrainConfig {
            epochs: 60,
            units: 16,
            seed: 4,
            l2: 0.0,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let outcome = train::<f64>(&set, &set, &config, |_| {}).unwrap();
        let first = outcome.history.first().unwrap().loss;
        let last = outcome.history.last().unwrap().loss;
        assert!(last < 0.5 * first, "loss {first} -> {last}");
        assert!(evaluate(&outcome.params, &set).unwrap() > 0.95);
    }

    #[test]
    fn evaluate_chance_level_for_random_weights() {
        let set = parity_dataset(512, 20);
        let params = GruParams::<f64>::init(4, 4, 2, 123);
        let acc = evaluate(&params, &set).unwrap();
        assert!((acc - 0.5).abs() < 0.15, "accuracy {acc}");
    }

    #[test]
    fn mismatched_validation_dims_are_rejected() {
        let train_set = parity_dataset(10, 1);
        let mut val_set = parity_dataset(10, 2);
        val_set.input_dim = 8;
        for s in val_set.samples.iter_mut() {
            s.sequence = vec![BitSeq::zeros(8)];
        }
        let config = TrainConfig {
            epochs: 1,
            units: 2,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train::<f64>(&train_set, &val_set, &config, |_| {}),
            Err(GruError::InputDim { .. })
        ));
    }
}
