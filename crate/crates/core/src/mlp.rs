//! From-scratch multilayer perceptron for binary classification.
//!
//! ReLU hidden layers, a sigmoid output read as a probability, plain or
//! weighted cross-entropy, Adam updates, and early stopping on the test
//! loss. Everything runs in f64 and is deterministic under a seed.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::SchemaId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::{BufRead, Write};
use std::path::Path;

/// Probabilities are clamped into this open interval before the log-loss.
const P_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    Ce,
    /// Weighted cross-entropy: the positive-class term is multiplied by omega.
    Wce { omega: f64 },
}

impl LossKind {
    fn omega(&self) -> f64 {
        match self {
            LossKind::Ce => 1.0,
            LossKind::Wce { omega } => *omega,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    /// Row-major `rows x cols` weight matrix.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    pub schema: SchemaId,
}

impl Network {
    /// He-normal initialization; hidden widths from `hidden`, one sigmoid
    /// output unit.
    pub fn init(hidden: &[usize], input_dim: usize, schema: SchemaId, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_dim;
        for (k, &width) in hidden.iter().chain(std::iter::once(&1)).enumerate() {
            let activation = if k == hidden.len() {
                Activation::Sigmoid
            } else {
                Activation::Relu
            };
            let std = (2.0 / fan_in as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("positive std");
            let weights = (0..width * fan_in).map(|_| normal.sample(&mut rng)).collect();
            layers.push(Layer {
                weights,
                bias: vec![0.0; width],
                rows: width,
                cols: fan_in,
                activation,
            });
            fan_in = width;
        }
        Self {
            input_dim,
            layers,
            schema,
        }
    }

    pub fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.rows).max().unwrap_or(1)
    }

    /// Forward pass to the output probability.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut a = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            next.clear();
            next.resize(layer.rows, 0.0);
            affine(layer, &a, &mut next);
            for v in next.iter_mut() {
                *v = match layer.activation {
                    Activation::Relu => v.max(0.0),
                    Activation::Sigmoid => sigmoid(*v),
                };
            }
            std::mem::swap(&mut a, &mut next);
        }
        Ok(a[0].clamp(P_CLAMP, 1.0 - P_CLAMP))
    }

    /// Hard label at threshold `tau`.
    pub fn predict(&self, x: &[f64], tau: f64) -> Result<u8> {
        Ok(if self.forward(x)? >= tau { 1 } else { 0 })
    }
}

#[inline]
fn affine(layer: &Layer, input: &[f64], out: &mut [f64]) {
    for r in 0..layer.rows {
        let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
        let mut s = layer.bias[r];
        for (w, a) in row.iter().zip(input) {
            s += w * a;
        }
        out[r] = s;
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Mean (weighted) cross-entropy over a batch of probabilities.
pub fn loss(p_hat: &[f64], y: &[u8], kind: LossKind) -> f64 {
    let omega = kind.omega();
    let mut s = 0.0;
    for (&p, &label) in p_hat.iter().zip(y) {
        let p = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
        if label == 1 {
            s -= omega * p.ln();
        } else {
            s -= (1.0 - p).ln();
        }
    }
    s / p_hat.len() as f64
}

/// Per-layer gradient buffers, shaped like the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        for v in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Scratch space reused across samples during backprop.
struct Workspace {
    /// Pre-activations per layer.
    z: Vec<Vec<f64>>,
    /// Post-activations per layer (a[0] is the input copy).
    a: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    fn new(net: &Network) -> Self {
        let z = net.layers.iter().map(|l| vec![0.0; l.rows]).collect();
        let mut a = vec![vec![0.0; net.input_dim]];
        for l in &net.layers {
            a.push(vec![0.0; l.rows]);
        }
        let w = net.max_width().max(net.input_dim);
        Self {
            z,
            a,
            delta: vec![0.0; w],
            delta_prev: vec![0.0; w],
        }
    }
}

/// Analytic batch gradients of the mean loss; returns (loss, gradients).
///
/// `xs` is row-major `n x d`. The ReLU subgradient at 0 is 0.
pub fn backward_batch(
    net: &Network,
    xs: &[f64],
    ys: &[u8],
    kind: LossKind,
    grads: &mut Gradients,
) -> f64 {
    let n = ys.len();
    debug_assert_eq!(xs.len(), n * net.input_dim);
    grads.clear();
    let mut ws = Workspace::new(net);
    let omega = kind.omega();
    let inv_n = 1.0 / n as f64;
    let mut total_loss = 0.0;

    for s in 0..n {
        let x = &xs[s * net.input_dim..(s + 1) * net.input_dim];
        ws.a[0].copy_from_slice(x);
        for (l, layer) in net.layers.iter().enumerate() {
            let (before, after) = ws.a.split_at_mut(l + 1);
            affine(layer, &before[l], &mut ws.z[l]);
            for (av, &zv) in after[0].iter_mut().zip(&ws.z[l]) {
                *av = match layer.activation {
                    Activation::Relu => zv.max(0.0),
                    Activation::Sigmoid => sigmoid(zv),
                };
            }
        }
        let p = ws.a[net.layers.len()][0].clamp(P_CLAMP, 1.0 - P_CLAMP);
        let y = ys[s] as f64;
        total_loss += if ys[s] == 1 {
            -omega * p.ln()
        } else {
            -(1.0 - p).ln()
        };

        // output delta of the mean loss wrt the pre-sigmoid logit
        ws.delta[0] = (-y * omega * (1.0 - p) + (1.0 - y) * p) * inv_n;
        for l in (0..net.layers.len()).rev() {
            let layer = &net.layers[l];
            let a_prev = &ws.a[l];
            let gw = &mut grads.weights[l];
            let gb = &mut grads.bias[l];
            for r in 0..layer.rows {
                let d = ws.delta[r];
                if d != 0.0 {
                    gb[r] += d;
                    let row = &mut gw[r * layer.cols..(r + 1) * layer.cols];
                    for (g, &a) in row.iter_mut().zip(a_prev) {
                        *g += d * a;
                    }
                }
            }
            if l > 0 {
                let prev_rows = net.layers[l - 1].rows;
                ws.delta_prev[..prev_rows].iter_mut().for_each(|v| *v = 0.0);
                for r in 0..layer.rows {
                    let d = ws.delta[r];
                    if d != 0.0 {
                        let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                        for (dp, &w) in ws.delta_prev[..prev_rows].iter_mut().zip(row) {
                            *dp += w * d;
                        }
                    }
                }
                // ReLU mask of the previous layer
                for (dp, &z) in ws.delta_prev[..prev_rows].iter_mut().zip(&ws.z[l - 1]) {
                    if z <= 0.0 {
                        *dp = 0.0;
                    }
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
    }
    total_loss * inv_n
}

/// Adam moment accumulators over a flat parameter block.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdamParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update on a flat parameter slice.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, hp: AdamParams) {
    debug_assert_eq!(params.len(), grads.len());
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - hp.beta1.powi(t);
    let bc2 = 1.0 - hp.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
        state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= hp.alpha * m_hat / (v_hat.sqrt() + hp.eps);
    }
}

#[derive(Debug, Clone)]
pub struct Hyperparams {
    pub hidden: Vec<usize>,
    pub loss: LossKind,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamParams,
    /// Early-stopping window, counted in evaluations.
    pub patience: usize,
    /// Test loss is evaluated every this many batches.
    pub eval_every: usize,
    pub seed: u64,
    /// Classification threshold.
    pub tau: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128, 64, 64, 32],
            loss: LossKind::Ce,
            batch_size: 256,
            epochs: 10,
            adam: AdamParams::default(),
            patience: 5,
            eval_every: 20,
            seed: 0,
            tau: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EpochsExhausted,
    EarlyStopped,
}

#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub evaluation: usize,
    pub epoch: usize,
    pub batches_seen: usize,
    /// Mean batch training loss since the previous evaluation.
    pub train_loss: f64,
    pub test_loss: f64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone)]
pub struct TrainHistory {
    pub records: Vec<EvalRecord>,
    pub stop: StopReason,
    pub best_evaluation: usize,
}

/// Train on a dataset pair sharing the network's schema.
pub fn train(
    net: Network,
    train_ds: &Dataset,
    test_ds: &Dataset,
    hyper: &Hyperparams,
) -> Result<(Network, TrainHistory)> {
    for ds in [train_ds, test_ds] {
        if ds.schema != net.schema {
            return Err(Error::SchemaMismatch {
                expected: net.schema.name().into(),
                got: ds.schema.name().into(),
            });
        }
    }
    let (xs_train, ys_train) = ds_to_arrays(train_ds);
    let (xs_test, ys_test) = ds_to_arrays(test_ds);
    Ok(train_raw(net, &xs_train, &ys_train, &xs_test, &ys_test, hyper))
}

fn ds_to_arrays(ds: &Dataset) -> (Vec<f64>, Vec<u8>) {
    let d = ds.schema.dim();
    let mut xs = Vec::with_capacity(ds.samples.len() * d);
    let mut ys = Vec::with_capacity(ds.samples.len());
    for s in &ds.samples {
        xs.extend_from_slice(&s.features.values);
        ys.push(s.label);
    }
    (xs, ys)
}

/// Mean loss and threshold metrics over a raw array dataset.
fn evaluate(
    net: &Network,
    xs: &[f64],
    ys: &[u8],
    kind: LossKind,
    tau: f64,
) -> (f64, f64, f64, f64) {
    let d = net.input_dim;
    let mut probs = Vec::with_capacity(ys.len());
    let mut pred = Vec::with_capacity(ys.len());
    for s in 0..ys.len() {
        let p = net.forward(&xs[s * d..(s + 1) * d]).expect("dims checked");
        probs.push(p);
        pred.push(if p >= tau { 1 } else { 0 });
    }
    let l = loss(&probs, ys, kind);
    let c = crate::metrics::confusion(&pred, ys).expect("equal lengths");
    (
        l,
        crate::metrics::accuracy(&c).value,
        crate::metrics::recall(&c).value,
        crate::metrics::precision(&c).value,
    )
}

/// Core training loop over raw row-major arrays.
pub fn train_raw(
    mut net: Network,
    xs_train: &[f64],
    ys_train: &[u8],
    xs_test: &[f64],
    ys_test: &[u8],
    hyper: &Hyperparams,
) -> (Network, TrainHistory) {
    let d = net.input_dim;
    let n = ys_train.len();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut grads = Gradients::zeros_like(&net);
    let mut adam: Vec<(AdamState, AdamState)> = net
        .layers
        .iter()
        .map(|l| (AdamState::new(l.weights.len()), AdamState::new(l.bias.len())))
        .collect();

    let mut history = TrainHistory {
        records: Vec::new(),
        stop: StopReason::EpochsExhausted,
        best_evaluation: 0,
    };
    let mut best_loss = f64::INFINITY;
    let mut best_net = net.clone();
    let mut non_improving = 0usize;
    let mut batches_seen = 0usize;
    let mut since_eval: (f64, usize) = (0.0, 0);
    let mut batch_x = Vec::with_capacity(hyper.batch_size * d);
    let mut batch_y = Vec::with_capacity(hyper.batch_size);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut stopped = false;

    'epochs: for epoch in 0..hyper.epochs {
        // seeded reshuffle each epoch
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        for chunk in indices.chunks(hyper.batch_size) {
            batch_x.clear();
            batch_y.clear();
            for &s in chunk {
                batch_x.extend_from_slice(&xs_train[s * d..(s + 1) * d]);
                batch_y.push(ys_train[s]);
            }
            let batch_loss = backward_batch(&net, &batch_x, &batch_y, hyper.loss, &mut grads);
            for (l, layer) in net.layers.iter_mut().enumerate() {
                adam_step(&mut layer.weights, &grads.weights[l], &mut adam[l].0, hyper.adam);
                adam_step(&mut layer.bias, &grads.bias[l], &mut adam[l].1, hyper.adam);
            }
            batches_seen += 1;
            since_eval.0 += batch_loss;
            since_eval.1 += 1;

            if batches_seen % hyper.eval_every == 0 {
                let record = run_eval(
                    &net, xs_test, ys_test, hyper, epoch, batches_seen, &mut since_eval,
                    &mut history,
                );
                if record < best_loss {
                    best_loss = record;
                    best_net = net.clone();
                    history.best_evaluation = history.records.len() - 1;
                    non_improving = 0;
                } else {
                    non_improving += 1;
                    if non_improving > hyper.patience {
                        history.stop = StopReason::EarlyStopped;
                        stopped = true;
                        break 'epochs;
                    }
                }
            }
        }
    }
    if !stopped && since_eval.1 > 0 {
        // trailing evaluation so the last parameters are considered too
        let record = run_eval(
            &net,
            xs_test,
            ys_test,
            hyper,
            hyper.epochs.saturating_sub(1),
            batches_seen,
            &mut since_eval,
            &mut history,
        );
        if record < best_loss {
            best_net = net.clone();
            history.best_evaluation = history.records.len() - 1;
        }
    }
    (best_net, history)
}

#[allow(clippy::too_many_arguments)]
fn run_eval(
    net: &Network,
    xs_test: &[f64],
    ys_test: &[u8],
    hyper: &Hyperparams,
    epoch: usize,
    batches_seen: usize,
    since_eval: &mut (f64, usize),
    history: &mut TrainHistory,
) -> f64 {
    let (test_loss, acc, rec, prec) = evaluate(net, xs_test, ys_test, hyper.loss, hyper.tau);
    let train_loss = if since_eval.1 > 0 {
        since_eval.0 / since_eval.1 as f64
    } else {
        f64::NAN
    };
    *since_eval = (0.0, 0);
    history.records.push(EvalRecord {
        evaluation: history.records.len(),
        epoch,
        batches_seen,
        train_loss,
        test_loss,
        accuracy: acc,
        recall: rec,
        precision: prec,
    });
    test_loss
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------

pub fn save_model(net: &Network, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_model(net, &mut w)
}

pub fn write_model(net: &Network, w: &mut impl Write) -> Result<()> {
    writeln!(w, "NNLIM-MODEL v1")?;
    writeln!(
        w,
        "schema={} d={} layers={}",
        net.schema.name(),
        net.input_dim,
        net.layers.len()
    )?;
    for layer in &net.layers {
        writeln!(w, "layer {} {} {}", layer.rows, layer.cols, layer.activation.name())?;
        for r in 0..layer.rows {
            let row: Vec<String> = layer.weights[r * layer.cols..(r + 1) * layer.cols]
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        let bias: Vec<String> = layer.bias.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", bias.join(" "))?;
    }
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Network> {
    let file = std::fs::File::open(path)?;
    read_model(std::io::BufReader::new(file))
}

pub fn read_model(r: impl BufRead) -> Result<Network> {
    let mut lines = r.lines().enumerate();
    let mut next_line = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            }),
            None => Err(Error::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {expect}"),
            }),
        }
    };

    let (ln, magic) = next_line("header")?;
    if magic.trim() != "NNLIM-MODEL v1" {
        return Err(Error::Parse {
            line: ln,
            msg: format!("bad magic `{magic}`"),
        });
    }
    let (ln, meta) = next_line("schema line")?;
    let mut schema = None;
    let mut d = None;
    let mut n_layers = None;
    for tok in meta.split_whitespace() {
        let (key, val) = tok.split_once('=').ok_or_else(|| Error::Parse {
            line: ln,
            msg: format!("bad token `{tok}`"),
        })?;
        match key {
            "schema" => schema = Some(SchemaId::parse(val)?),
            "d" => d = Some(parse_num::<usize>(val, ln)?),
            "layers" => n_layers = Some(parse_num::<usize>(val, ln)?),
            _ => {}
        }
    }
    let (schema, input_dim, n_layers) = match (schema, d, n_layers) {
        (Some(s), Some(d), Some(n)) => (s, d, n),
        _ => {
            return Err(Error::Parse {
                line: ln,
                msg: "schema line must carry schema=, d=, layers=".into(),
            })
        }
    };

    let mut layers = Vec::with_capacity(n_layers);
    let mut expect_cols = input_dim;
    for _ in 0..n_layers {
        let (ln, head) = next_line("layer header")?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "layer" {
            return Err(Error::Parse {
                line: ln,
                msg: format!("bad layer header `{head}`"),
            });
        }
        let rows = parse_num::<usize>(parts[1], ln)?;
        let cols = parse_num::<usize>(parts[2], ln)?;
        let activation = match parts[3] {
            "relu" => Activation::Relu,
            "sigmoid" => Activation::Sigmoid,
            other => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unknown activation `{other}`"),
                })
            }
        };
        if cols != expect_cols {
            return Err(Error::Parse {
                line: ln,
                msg: format!("layer expects {cols} inputs, previous layer provides {expect_cols}"),
            });
        }
        let mut weights = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, row) = next_line("weight row")?;
            let vals = parse_row(&row, cols, ln)?;
            weights.extend_from_slice(&vals);
        }
        let (ln, brow) = next_line("bias row")?;
        let bias = parse_row(&brow, rows, ln)?;
        layers.push(Layer {
            weights,
            bias,
            rows,
            cols,
            activation,
        });
        expect_cols = rows;
    }
    if expect_cols != 1 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("output layer has {expect_cols} units, expected 1"),
        });
    }
    Ok(Network {
        input_dim,
        layers,
        schema,
    })
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number `{s}`"),
    })
}

fn parse_row(row: &str, expect: usize, line: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = row
        .split_whitespace()
        .map(|t| parse_num::<f64>(t, line))
        .collect::<Result<_>>()?;
    if vals.len() != expect {
        return Err(Error::Parse {
            line,
            msg: format!("expected {expect} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net(weights: Vec<f64>, bias: Vec<f64>, activation: Activation) -> Network {
        let cols = weights.len() / bias.len();
        Network {
            input_dim: cols,
            layers: vec![Layer {
                rows: bias.len(),
                cols,
                weights,
                bias,
                activation,
            }],
            schema: SchemaId::F1dV1,
        }
    }

    #[test]
    fn forward_hand_values() {
        let net = tiny_net(vec![2.0], vec![0.0], Activation::Sigmoid);
        let p = net.forward(&[1.0]).unwrap();
        assert!((p - 0.8807970779778823).abs() < 1e-12);
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_network_outputs_half() {
        let net = Network::init(&[4, 3], 5, SchemaId::F1dV1, 0);
        let mut net = net;
        for l in net.layers.iter_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        let p = net.forward(&[1.0, -2.0, 3.0, 0.5, 0.1]).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(net.predict(&[0.0; 5], 0.5).unwrap(), 1);
        assert_eq!(net.predict(&[0.0; 5], 0.51).unwrap(), 0);
    }

    #[test]
    fn architecture_shapes() {
        let net = Network::init(&[256, 128, 64, 64, 32], 11, SchemaId::F1dV1, 7);
        assert_eq!(net.layers.len(), 6);
        let dims: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.rows, l.cols)).collect();
        assert_eq!(
            dims,
            vec![(256, 11), (128, 256), (64, 128), (64, 64), (32, 64), (1, 32)]
        );
        assert_eq!(net.layers.last().unwrap().activation, Activation::Sigmoid);
        // determinism
        let net2 = Network::init(&[256, 128, 64, 64, 32], 11, SchemaId::F1dV1, 7);
        assert_eq!(net.layers[0].weights, net2.layers[0].weights);
        // He std within 10% of sqrt(2/11)
        let w = &net.layers[0].weights;
        let mean: f64 = w.iter().sum::<f64>() / w.len() as f64;
        let var: f64 = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / w.len() as f64;
        let expect = (2.0_f64 / 11.0).sqrt();
        assert!(
            (var.sqrt() - expect).abs() / expect < 0.1,
            "std {} vs {expect}",
            var.sqrt()
        );
    }

    #[test]
    fn loss_hand_values() {
        let l = loss(&[0.5], &[1], LossKind::Ce);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        let l = loss(&[0.5], &[1], LossKind::Wce { omega: 5.0 });
        assert!((l - 5.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let l = loss(&[0.9, 0.1], &[1, 0], LossKind::Ce);
        assert!((l + 0.9_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn wce_with_unit_weight_is_ce() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p: Vec<f64> = (0..16).map(|_| rng.gen_range(0.001..0.999)).collect();
            let y: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2) as u8).collect();
            let a = loss(&p, &y, LossKind::Ce);
            let b = loss(&p, &y, LossKind::Wce { omega: 1.0 });
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn single_layer_bias_gradient() {
        let net = tiny_net(vec![0.0], vec![0.0], Activation::Sigmoid);
        let mut grads = Gradients::zeros_like(&net);
        backward_batch(&net, &[1.0], &[1], LossKind::Ce, &mut grads);
        assert!((grads.bias[0][0] - (-0.5)).abs() < 1e-14);
    }

    #[test]
    fn duplicated_batch_leaves_gradients_unchanged() {
        let net = Network::init(&[6, 4], 3, SchemaId::F1dV1, 3);
        let xs = [0.3, -0.5, 0.9, 0.1, 0.2, -0.7];
        let ys = [1u8, 0];
        let mut g1 = Gradients::zeros_like(&net);
        backward_batch(&net, &xs, &ys, LossKind::Ce, &mut g1);
        let mut xs2 = xs.to_vec();
        xs2.extend_from_slice(&xs);
        let ys2 = [1u8, 0, 1, 0];
        let mut g2 = Gradients::zeros_like(&net);
        backward_batch(&net, &xs2, &ys2, LossKind::Ce, &mut g2);
        for l in 0..2 {
            for (a, b) in g1.weights[l].iter().zip(&g2.weights[l]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    fn finite_diff_check(net: &mut Network, xs: &[f64], ys: &[u8], kind: LossKind) -> f64 {
        let mut grads = Gradients::zeros_like(net);
        backward_batch(net, xs, ys, kind, &mut grads);
        let step = 1e-6;
        let mut max_rel: f64 = 0.0;
        let n_layers = net.layers.len();
        for l in 0..n_layers {
            let n_w = net.layers[l].weights.len();
            // probe a spread of weights plus every bias
            let stride = (n_w / 13).max(1);
            for i in (0..n_w).step_by(stride) {
                let orig = net.layers[l].weights[i];
                net.layers[l].weights[i] = orig + step;
                let lp = batch_loss(net, xs, ys, kind);
                net.layers[l].weights[i] = orig - step;
                let lm = batch_loss(net, xs, ys, kind);
                net.layers[l].weights[i] = orig;
                let fd = (lp - lm) / (2.0 * step);
                let g = grads.weights[l][i];
                let denom = g.abs().max(fd.abs()).max(1e-8);
                max_rel = max_rel.max((fd - g).abs() / denom);
            }
            for i in 0..net.layers[l].bias.len() {
                let orig = net.layers[l].bias[i];
                net.layers[l].bias[i] = orig + step;
                let lp = batch_loss(net, xs, ys, kind);
                net.layers[l].bias[i] = orig - step;
                let lm = batch_loss(net, xs, ys, kind);
                net.layers[l].bias[i] = orig;
                let fd = (lp - lm) / (2.0 * step);
                let g = grads.bias[l][i];
                let denom = g.abs().max(fd.abs()).max(1e-8);
                max_rel = max_rel.max((fd - g).abs() / denom);
            }
        }
        max_rel
    }

    fn batch_loss(net: &Network, xs: &[f64], ys: &[u8], kind: LossKind) -> f64 {
        let d = net.input_dim;
        let probs: Vec<f64> = (0..ys.len())
            .map(|s| net.forward(&xs[s * d..(s + 1) * d]).unwrap())
            .collect();
        loss(&probs, ys, kind)
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut net = Network::init(&[8, 4], 11, SchemaId::F1dV1, 5);
        let n = 12;
        let xs: Vec<f64> = (0..n * 11).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ys: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
        for kind in [LossKind::Ce, LossKind::Wce { omega: 5.0 }] {
            let rel = finite_diff_check(&mut net, &xs, &ys, kind);
            assert!(rel < 1e-6, "{kind:?}: max relative error {rel}");
        }
    }

    #[test]
    fn adam_zero_gradient_freezes() {
        let mut params = vec![0.3, -0.2];
        let mut state = AdamState::new(2);
        adam_step(&mut params, &[0.0, 0.0], &mut state, AdamParams::default());
        assert_eq!(params, vec![0.3, -0.2]);
    }

    #[test]
    fn adam_first_step_hand_value() {
        let mut params = vec![0.0];
        let mut state = AdamState::new(1);
        adam_step(&mut params, &[2.0], &mut state, AdamParams::default());
        let expect = -0.001 * 2.0 / (2.0 + 1e-8);
        assert!((params[0] - expect).abs() < 1e-15, "{} vs {expect}", params[0]);
    }

    #[test]
    fn adam_matches_independent_recurrence() {
        // spreadsheet-style oracle: five steps of constant gradient 1
        let hp = AdamParams::default();
        let mut params = vec![1.0];
        let mut state = AdamState::new(1);
        let mut theta = 1.0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=5 {
            adam_step(&mut params, &[1.0], &mut state, hp);
            m = hp.beta1 * m + (1.0 - hp.beta1) * 1.0;
            v = hp.beta2 * v + (1.0 - hp.beta2) * 1.0;
            let mh = m / (1.0 - hp.beta1.powi(t));
            let vh = v / (1.0 - hp.beta2.powi(t));
            theta -= hp.alpha * mh / (vh.sqrt() + hp.eps);
            assert!((params[0] - theta).abs() < 1e-12, "step {t}");
        }
    }

    #[test]
    fn adam_step_magnitude_approaches_alpha() {
        // constant gradient direction: per-parameter step tends to alpha
        let hp = AdamParams {
            eps: 0.0,
            ..AdamParams::default()
        };
        let mut params = vec![0.0];
        let mut state = AdamState::new(1);
        let mut last = 0.0;
        for _ in 0..50 {
            last = params[0];
            adam_step(&mut params, &[123.456], &mut state, hp);
        }
        let step = (params[0] - last).abs();
        assert!(step >= 0.9 * hp.alpha && step <= hp.alpha * 1.000001, "step {step}");
    }

    #[test]
    fn toy_training_reaches_perfect_accuracy() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 400;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut added = 0;
        while added < n {
            let x1: f64 = rng.gen_range(-1.0..1.0);
            let x2: f64 = rng.gen_range(-1.0..1.0);
            if x1.abs() < 0.02 {
                continue; // keep a margin so 10 epochs suffice
            }
            xs.extend_from_slice(&[x1, x2]);
            ys.push(if x1 > 0.0 { 1 } else { 0 });
            added += 1;
        }
        let net = Network::init(&[16, 8], 2, SchemaId::F1dV1, 1);
        let hyper = Hyperparams {
            hidden: vec![16, 8],
            batch_size: 32,
            epochs: 10,
            eval_every: 5,
            patience: 50,
            adam: AdamParams {
                alpha: 0.01,
                ..AdamParams::default()
            },
            ..Hyperparams::default()
        };
        let (trained, history) = train_raw(net, &xs, &ys, &xs, &ys, &hyper);
        let (_, acc, _, _) = evaluate(&trained, &xs, &ys, LossKind::Ce, 0.5);
        assert!(acc == 1.0, "accuracy {acc}, history len {}", history.records.len());
    }

    #[test]
    fn patience_zero_stops_at_first_non_improvement() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 256;
        let xs: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ys: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect(); // pure noise
        let net = Network::init(&[8], 2, SchemaId::F1dV1, 3);
        let hyper = Hyperparams {
            hidden: vec![8],
            batch_size: 16,
            epochs: 50,
            eval_every: 1,
            patience: 0,
            ..Hyperparams::default()
        };
        let (_, history) = train_raw(net, &xs, &ys, &xs, &ys, &hyper);
        assert_eq!(history.stop, StopReason::EarlyStopped);
        // every evaluation before the last strictly improved; the last did not
        let losses: Vec<f64> = history.records.iter().map(|r| r.test_loss).collect();
        for w in losses[..losses.len() - 1].windows(2) {
            assert!(w[1] < w[0], "non-final evaluation failed to improve: {losses:?}");
        }
        let best_before = losses[losses.len() - 2];
        assert!(losses[losses.len() - 1] >= best_before);
    }

    #[test]
    fn best_parameters_returned() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 128;
        let xs: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ys: Vec<u8> = (0..n)
            .map(|i| if xs[2 * i] + 0.3 * xs[2 * i + 1] > 0.1 { 1 } else { 0 })
            .collect();
        let net = Network::init(&[8], 2, SchemaId::F1dV1, 3);
        let hyper = Hyperparams {
            hidden: vec![8],
            batch_size: 16,
            epochs: 6,
            eval_every: 2,
            patience: 1000,
            ..Hyperparams::default()
        };
        let (trained, history) = train_raw(net, &xs, &ys, &xs, &ys, &hyper);
        let best = history.records[history.best_evaluation].test_loss;
        for r in &history.records {
            assert!(best <= r.test_loss + 1e-15);
        }
        let (final_loss, _, _, _) = evaluate(&trained, &xs, &ys, LossKind::Ce, 0.5);
        assert!((final_loss - best).abs() < 1e-12);
    }

    #[test]
    fn training_is_deterministic() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200;
        let xs: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ys: Vec<u8> = (0..n).map(|i| (xs[2 * i] > 0.2) as u8).collect();
        let hyper = Hyperparams {
            hidden: vec![8, 4],
            batch_size: 32,
            epochs: 3,
            eval_every: 2,
            seed: 77,
            ..Hyperparams::default()
        };
        let run = || {
            let net = Network::init(&[8, 4], 2, SchemaId::F1dV1, 42);
            train_raw(net, &xs, &ys, &xs, &ys, &hyper)
        };
        let (n1, h1) = run();
        let (n2, h2) = run();
        assert_eq!(h1.records.len(), h2.records.len());
        for (a, b) in h1.records.iter().zip(&h2.records) {
            assert_eq!(a.test_loss.to_bits(), b.test_loss.to_bits());
        }
        for (la, lb) in n1.layers.iter().zip(&n2.layers) {
            assert_eq!(la.weights, lb.weights);
            assert_eq!(la.bias, lb.bias);
        }
    }

    #[test]
    fn model_round_trip() {
        let net = Network::init(&[5, 3], 11, SchemaId::F1dV1, 13);
        let mut buf = Vec::new();
        write_model(&net, &mut buf).unwrap();
        let back = read_model(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.input_dim, 11);
        assert_eq!(back.schema, SchemaId::F1dV1);
        let x: Vec<f64> = (0..11).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = net.forward(&x).unwrap();
        let b = back.forward(&x).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn corrupt_model_reports_line() {
        let net = Network::init(&[2], 3, SchemaId::F1dV1, 1);
        let mut buf = Vec::new();
        write_model(&net, &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        // damage the layer header dimension
        text = text.replace("layer 2 3 relu", "layer 2 nope relu");
        let err = read_model(std::io::Cursor::new(text.as_bytes())).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
