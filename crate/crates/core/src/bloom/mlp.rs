//! A small feed-forward verb classifier trained from scratch: two ReLU
//! layers, softmax output, mean cross-entropy minimized by mini-batch
//! gradient descent. Plain SGD and seeded initialization keep training
//! bit-reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::weighted_f1;

/// Training hyperparameters. The architecture (two dense ReLU layers) is
/// fixed; sizes and schedule are configurable.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden1: usize,
    pub hidden2: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden1: 128,
            hidden2: 64,
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 16,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden1 == 0
            || self.hidden2 == 0
            || self.epochs == 0
            || self.batch_size == 0
            || self.learning_rate <= 0.0
            || !self.learning_rate.is_finite()
        {
            return Err(Error::arg("train config fields must be positive"));
        }
        Ok(())
    }
}

/// One labeled example. `chunk_id` groups examples for chunk-level
/// cross-validation splits.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub features: Vec<f64>,
    pub label: usize,
    pub chunk_id: String,
}

/// The trained network: x → ReLU(W1x+b1) → ReLU(W2·+b2) → softmax(W3·+b3).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    input_dim: usize,
    hidden1: usize,
    hidden2: usize,
    classes: usize,
    seed: u64,
    // Row-major: w1[j] is the weight row producing hidden unit j.
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
    w3: Vec<Vec<f64>>,
    b3: Vec<f64>,
}

/// Parameter gradients, same shapes as the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
    w3: Vec<Vec<f64>>,
    b3: Vec<f64>,
}

fn zeros_like(rows: usize, cols: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; cols]; rows]
}

fn affine(w: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    w.iter()
        .zip(b)
        .map(|(row, bias)| bias + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
        .collect()
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Numerically stable log-softmax.
fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - max - log_sum).collect()
}

impl MlpModel {
    /// Glorot-uniform initialization from the seed; biases start at zero.
    /// Weight matrices fill in layer order, row by row.
    pub fn init(input_dim: usize, cfg: &TrainConfig, classes: usize) -> Result<Self> {
        cfg.validate()?;
        if input_dim == 0 || classes < 2 {
            return Err(Error::arg("input_dim must be > 0 and classes >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut layer = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-bound..bound)).collect())
                .collect()
        };
        let w1 = layer(cfg.hidden1, input_dim);
        let w2 = layer(cfg.hidden2, cfg.hidden1);
        let w3 = layer(classes, cfg.hidden2);
        Ok(MlpModel {
            input_dim,
            hidden1: cfg.hidden1,
            hidden2: cfg.hidden2,
            classes,
            seed: cfg.seed,
            w1,
            b1: vec![0.0; cfg.hidden1],
            w2,
            b2: vec![0.0; cfg.hidden2],
            w3,
            b3: vec![0.0; classes],
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn forward_layers(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut h1 = affine(&self.w1, &self.b1, x);
        relu(&mut h1);
        let mut h2 = affine(&self.w2, &self.b2, &h1);
        relu(&mut h2);
        let logits = affine(&self.w3, &self.b3, &h2);
        (h1, h2, logits)
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.input_dim {
            return Err(Error::arg(format!(
                "feature length {} != input_dim {}",
                features.len(),
                self.input_dim
            )));
        }
        let (_, _, logits) = self.forward_layers(features);
        Ok(log_softmax(&logits).iter().map(|lp| lp.exp()).collect())
    }

    /// Argmax label and the probability distribution; ties go to the lowest
    /// class index.
    pub fn predict(&self, features: &[f64]) -> Result<(usize, Vec<f64>)> {
        let probs = self.forward(features)?;
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        Ok((best, probs))
    }

    /// Mean cross-entropy over a set of examples.
    pub fn batch_loss(&self, examples: &[&TrainExample]) -> f64 {
        let mut total = 0.0;
        for ex in examples {
            let (_, _, logits) = self.forward_layers(&ex.features);
            total -= log_softmax(&logits)[ex.label];
        }
        total / examples.len() as f64
    }

    /// Analytic gradients of the mean cross-entropy over a batch.
    pub fn batch_gradients(&self, examples: &[&TrainExample]) -> Gradients {
        let mut g = Gradients {
            w1: zeros_like(self.hidden1, self.input_dim),
            b1: vec![0.0; self.hidden1],
            w2: zeros_like(self.hidden2, self.hidden1),
            b2: vec![0.0; self.hidden2],
            w3: zeros_like(self.classes, self.hidden2),
            b3: vec![0.0; self.classes],
        };
        let scale = 1.0 / examples.len() as f64;
        for ex in examples {
            let (h1, h2, logits) = self.forward_layers(&ex.features);
            let log_probs = log_softmax(&logits);

            // d loss / d logits = softmax − one-hot
            let mut d_logits: Vec<f64> = log_probs.iter().map(|lp| lp.exp()).collect();
            d_logits[ex.label] -= 1.0;

            for (c, &d) in d_logits.iter().enumerate() {
                g.b3[c] += scale * d;
                for (j, &h) in h2.iter().enumerate() {
                    g.w3[c][j] += scale * d * h;
                }
            }

            let mut d_h2 = vec![0.0; self.hidden2];
            for (c, &d) in d_logits.iter().enumerate() {
                for (j, dh) in d_h2.iter_mut().enumerate() {
                    *dh += d * self.w3[c][j];
                }
            }
            for (j, dh) in d_h2.iter_mut().enumerate() {
                if h2[j] <= 0.0 {
                    *dh = 0.0;
                }
            }

            for (j, &d) in d_h2.iter().enumerate() {
                g.b2[j] += scale * d;
                for (i, &h) in h1.iter().enumerate() {
                    g.w2[j][i] += scale * d * h;
                }
            }

            let mut d_h1 = vec![0.0; self.hidden1];
            for (j, &d) in d_h2.iter().enumerate() {
                for (i, dh) in d_h1.iter_mut().enumerate() {
                    *dh += d * self.w2[j][i];
                }
            }
            for (i, dh) in d_h1.iter_mut().enumerate() {
                if h1[i] <= 0.0 {
                    *dh = 0.0;
                }
            }

            for (i, &d) in d_h1.iter().enumerate() {
                g.b1[i] += scale * d;
                for (k, &xv) in ex.features.iter().enumerate() {
                    g.w1[i][k] += scale * d * xv;
                }
            }
        }
        g
    }

    pub fn apply_gradients(&mut self, g: &Gradients, learning_rate: f64) {
        let step = |w: &mut Vec<Vec<f64>>, gw: &[Vec<f64>]| {
            for (row, grow) in w.iter_mut().zip(gw) {
                for (v, gv) in row.iter_mut().zip(grow) {
                    *v -= learning_rate * gv;
                }
            }
        };
        step(&mut self.w1, &g.w1);
        step(&mut self.w2, &g.w2);
        step(&mut self.w3, &g.w3);
        for (b, gb) in [
            (&mut self.b1, &g.b1),
            (&mut self.b2, &g.b2),
            (&mut self.b3, &g.b3),
        ] {
            for (v, gv) in b.iter_mut().zip(gb) {
                *v -= learning_rate * gv;
            }
        }
    }

    /// Total number of scalar parameters, for flat indexing.
    pub fn param_count(&self) -> usize {
        self.hidden1 * self.input_dim
            + self.hidden1
            + self.hidden2 * self.hidden1
            + self.hidden2
            + self.classes * self.hidden2
            + self.classes
    }

    fn locate(&self, index: usize) -> (usize, usize, usize) {
        // Returns (block, row, col); blocks are w1,b1,w2,b2,w3,b3 in order.
        let sizes = [
            self.hidden1 * self.input_dim,
            self.hidden1,
            self.hidden2 * self.hidden1,
            self.hidden2,
            self.classes * self.hidden2,
            self.classes,
        ];
        let cols = [self.input_dim, 1, self.hidden1, 1, self.hidden2, 1];
        let mut rest = index;
        for (block, &size) in sizes.iter().enumerate() {
            if rest < size {
                return (block, rest / cols[block], rest % cols[block]);
            }
            rest -= size;
        }
        panic!("parameter index {index} out of range");
    }

    /// Read one parameter by flat index (w1, b1, w2, b2, w3, b3;
    /// matrices row-major). Used by finite-difference checks.
    pub fn param(&self, index: usize) -> f64 {
        match self.locate(index) {
            (0, r, c) => self.w1[r][c],
            (1, r, _) => self.b1[r],
            (2, r, c) => self.w2[r][c],
            (3, r, _) => self.b2[r],
            (4, r, c) => self.w3[r][c],
            (_, r, _) => self.b3[r],
        }
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        match self.locate(index) {
            (0, r, c) => self.w1[r][c] = value,
            (1, r, _) => self.b1[r] = value,
            (2, r, c) => self.w2[r][c] = value,
            (3, r, _) => self.b2[r] = value,
            (4, r, c) => self.w3[r][c] = value,
            (_, r, _) => self.b3[r] = value,
        }
    }

    /// Gradient value at the same flat index scheme as [`MlpModel::param`].
    pub fn gradient_at(g: &Gradients, model: &MlpModel, index: usize) -> f64 {
        match model.locate(index) {
            (0, r, c) => g.w1[r][c],
            (1, r, _) => g.b1[r],
            (2, r, c) => g.w2[r][c],
            (3, r, _) => g.b2[r],
            (4, r, c) => g.w3[r][c],
            (_, r, _) => g.b3[r],
        }
    }

    /// Serialize as versioned flat text; decimal f64 formatting round-trips
    /// exactly, so `load(save(m))` reproduces predictions bit-for-bit.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::from("mlp v1\n");
        let _ = writeln!(out, "classes {}", self.classes);
        let _ = writeln!(out, "input_dim {}", self.input_dim);
        let _ = writeln!(out, "hidden1 {}", self.hidden1);
        let _ = writeln!(out, "hidden2 {}", self.hidden2);
        let _ = writeln!(out, "seed {}", self.seed);
        let write_matrix = |out: &mut String, name: &str, m: &[Vec<f64>]| {
            out.push_str(name);
            out.push('\n');
            for row in m {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        };
        let write_vector = |out: &mut String, name: &str, v: &[f64]| {
            out.push_str(name);
            out.push('\n');
            let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        };
        write_matrix(&mut out, "w1", &self.w1);
        write_vector(&mut out, "b1", &self.b1);
        write_matrix(&mut out, "w2", &self.w2);
        write_vector(&mut out, "b2", &self.b2);
        write_matrix(&mut out, "w3", &self.w3);
        write_vector(&mut out, "b3", &self.b3);
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = contents.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, format!("missing {expect}")))
        };
        let (_, magic) = next("header")?;
        if magic != "mlp v1" {
            return Err(Error::parse(
                path,
                1,
                format!("unsupported model format {magic:?}"),
            ));
        }
        let mut header = |key: &str| -> Result<usize> {
            let (lineno, line) = next(key)?;
            let value = line
                .strip_prefix(key)
                .map(str::trim)
                .ok_or_else(|| Error::parse(path, lineno + 1, format!("expected `{key} N`")))?;
            value
                .parse::<usize>()
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad {key}: {e}")))
        };
        let classes = header("classes")?;
        let input_dim = header("input_dim")?;
        let hidden1 = header("hidden1")?;
        let hidden2 = header("hidden2")?;
        let seed = header("seed")? as u64;

        let parse_row = |line: &str, lineno: usize, cols: usize| -> Result<Vec<f64>> {
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let row = row.map_err(|e| Error::parse(path, lineno + 1, format!("bad value: {e}")))?;
            if row.len() != cols {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected {cols} values, found {}", row.len()),
                ));
            }
            Ok(row)
        };
        let mut read_matrix = |name: &str, rows: usize, cols: usize| -> Result<Vec<Vec<f64>>> {
            let (lineno, line) = next(name)?;
            if line != name {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected section {name}"),
                ));
            }
            (0..rows)
                .map(|_| {
                    let (lineno, line) = next("matrix row")?;
                    parse_row(line, lineno, cols)
                })
                .collect()
        };
        let w1 = read_matrix("w1", hidden1, input_dim)?;
        let b1 = read_matrix("b1", 1, hidden1)?.remove(0);
        let w2 = read_matrix("w2", hidden2, hidden1)?;
        let b2 = read_matrix("b2", 1, hidden2)?.remove(0);
        let w3 = read_matrix("w3", classes, hidden2)?;
        let b3 = read_matrix("b3", 1, classes)?.remove(0);
        Ok(MlpModel {
            input_dim,
            hidden1,
            hidden2,
            classes,
            seed,
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
        })
    }
}

/// A trained model plus the per-epoch full-set loss curve.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub epoch_losses: Vec<f64>,
}

/// Train by mini-batch gradient descent on mean cross-entropy. Deterministic
/// given `cfg.seed`: the same seed drives initialization and the per-epoch
/// shuffle.
pub fn train_mlp(
    examples: &[TrainExample],
    cfg: &TrainConfig,
    classes: usize,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::arg("no training examples"));
    }
    let input_dim = examples[0].features.len();
    if examples.iter().any(|e| e.features.len() != input_dim) {
        return Err(Error::arg("inconsistent feature lengths"));
    }
    if let Some(bad) = examples.iter().find(|e| e.label >= classes) {
        return Err(Error::arg(format!(
            "label {} out of range for {classes} classes",
            bad.label
        )));
    }
    let distinct: std::collections::HashSet<usize> = examples.iter().map(|e| e.label).collect();
    if distinct.len() < 2 {
        return Err(Error::DegenerateTraining(
            "training data contains a single class".into(),
        ));
    }

    let mut model = MlpModel::init(input_dim, cfg, classes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let all: Vec<&TrainExample> = examples.iter().collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let refs: Vec<&TrainExample> = batch.iter().map(|&i| &examples[i]).collect();
            let grads = model.batch_gradients(&refs);
            model.apply_gradients(&grads, cfg.learning_rate);
        }
        epoch_losses.push(model.batch_loss(&all));
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}

/// Chunk-level k-fold cross-validation over an arbitrary trainer. Folds
/// partition chunk ids, never raw examples, so no chunk appears in both the
/// train and test side of any fold. Returns the mean weighted F1.
pub fn cross_validate_with<T, P>(
    examples: &[TrainExample],
    folds: usize,
    classes: usize,
    seed: u64,
    mut train: T,
) -> Result<f64>
where
    T: FnMut(&[TrainExample], u64) -> Result<P>,
    P: Fn(&[f64]) -> usize,
{
    if folds < 2 {
        return Err(Error::arg("folds must be >= 2"));
    }
    let mut chunk_ids: Vec<&str> = Vec::new();
    for ex in examples {
        if !chunk_ids.contains(&ex.chunk_id.as_str()) {
            chunk_ids.push(&ex.chunk_id);
        }
    }
    if chunk_ids.len() < folds {
        return Err(Error::arg(format!(
            "{} chunks cannot fill {folds} folds",
            chunk_ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chunk_ids.shuffle(&mut rng);

    let mut scores = Vec::with_capacity(folds);
    for fold in 0..folds {
        let lo = fold * chunk_ids.len() / folds;
        let hi = (fold + 1) * chunk_ids.len() / folds;
        let test_chunks: std::collections::HashSet<&str> =
            chunk_ids[lo..hi].iter().copied().collect();
        let train_set: Vec<TrainExample> = examples
            .iter()
            .filter(|e| !test_chunks.contains(e.chunk_id.as_str()))
            .cloned()
            .collect();
        let test_set: Vec<&TrainExample> = examples
            .iter()
            .filter(|e| test_chunks.contains(e.chunk_id.as_str()))
            .collect();
        let predictor = train(&train_set, seed + fold as u64)?;
        let preds: Vec<usize> = test_set.iter().map(|e| predictor(&e.features)).collect();
        let golds: Vec<usize> = test_set.iter().map(|e| e.label).collect();
        scores.push(weighted_f1(&preds, &golds, classes)?);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Chunk-level k-fold cross-validation of the MLP; per-fold seeds derive as
/// `cfg.seed + fold`.
pub fn cross_validate(
    examples: &[TrainExample],
    folds: usize,
    cfg: &TrainConfig,
    classes: usize,
) -> Result<f64> {
    cross_validate_with(
        examples,
        folds,
        classes,
        cfg.seed,
        |train_set, fold_seed| {
            let fold_cfg = TrainConfig {
                seed: fold_seed,
                ..cfg.clone()
            };
            let outcome = train_mlp(train_set, &fold_cfg, classes)?;
            Ok(move |features: &[f64]| {
                outcome
                    .model
                    .predict(features)
                    .expect("feature shape validated")
                    .0
            })
        },
    )
}

/// Weighted F1 of predicting the most frequent label for every example
/// (ties to the lowest class index), evaluated on the same examples.
pub fn majority_baseline(examples: &[TrainExample], classes: usize) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::arg("no examples"));
    }
    let mut counts = vec![0usize; classes];
    for ex in examples {
        if ex.label >= classes {
            return Err(Error::arg("label out of range"));
        }
        counts[ex.label] += 1;
    }
    let majority = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let preds = vec![majority; examples.len()];
    let golds: Vec<usize> = examples.iter().map(|e| e.label).collect();
    weighted_f1(&preds, &golds, classes)
}
