use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Softsign,
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply<F: Scalar>(self, z: F) -> F {
        match self {
            Activation::Linear => z,
            Activation::Softsign => z / (F::one() + z.abs()),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => F::one() / (F::one() + (-z).exp()),
            Activation::Relu => z.max(F::zero()),
        }
    }

    /// Derivative given the pre-activation `z` and output `a`.
    #[inline]
    fn derivative<F: Scalar>(self, z: F, a: F) -> F {
        match self {
            Activation::Linear => F::one(),
            Activation::Softsign => {
                let d = F::one() + z.abs();
                F::one() / (d * d)
            }
            Activation::Tanh => F::one() - a * a,
            Activation::Sigmoid => a * (F::one() - a),
            Activation::Relu => {
                if z > F::zero() {
                    F::one()
                } else {
                    F::zero()
                }
            }
        }
    }
}

/// Fully connected layer; `weights` is `outputs x inputs` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DenseLayer<F: Scalar> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<F>,
    pub biases: Vec<F>,
    pub activation: Activation,
}

impl<F: Scalar> DenseLayer<F> {
    fn random(inputs: usize, outputs: usize, activation: Activation, std: f64, rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(0.0, std).expect("positive std");
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| F::lit(normal.sample(rng))).collect(),
            biases: vec![F::zero(); outputs],
            activation,
        }
    }

    fn forward_into(&self, x: &[F], z: &mut [F], a: &mut [F]) {
        for o in 0..self.outputs {
            let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut s = self.biases[o];
            for (wi, xi) in w.iter().zip(x) {
                s += *wi * *xi;
            }
            z[o] = s;
            a[o] = self.activation.apply(s);
        }
    }

    pub fn forward(&self, x: &[F]) -> Vec<F> {
        let mut z = vec![F::zero(); self.outputs];
        let mut a = vec![F::zero(); self.outputs];
        self.forward_into(x, &mut z, &mut a);
        a
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Autoencoder training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeHyperparams {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub hidden_activation: Activation,
    pub code_activation: Activation,
    pub output_activation: Activation,
    /// L1 activity penalty on the first encoder and first decoder layer.
    pub l1: f64,
    /// Standard deviation of the normal weight initializer.
    pub init_std: f64,
    /// Adagrad denominator offset.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for AeHyperparams {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 40,
            learning_rate: 0.1,
            hidden: 50,
            hidden_activation: Activation::Softsign,
            code_activation: Activation::Linear,
            output_activation: Activation::Linear,
            l1: 1e-5,
            init_std: 0.05,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

/// Two-layer encoder `M -> H -> K` with a mirrored decoder `K -> H -> M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AeModel<F: Scalar> {
    pub encoder: Vec<DenseLayer<F>>,
    pub decoder: Vec<DenseLayer<F>>,
    /// Objective on the training data before the first update.
    pub initial_loss: F,
    /// Objective on the full training data after each epoch.
    pub loss_history: Vec<F>,
    pub hyperparams: AeHyperparams,
}

struct Tape<F> {
    z: Vec<Vec<F>>,
    a: Vec<Vec<F>>,
}

impl<F: Scalar> AeModel<F> {
    /// Assembles a model from explicit layers (checked for shape compatibility).
    pub fn from_layers(encoder: Vec<DenseLayer<F>>, decoder: Vec<DenseLayer<F>>) -> Result<Self> {
        let layers: Vec<&DenseLayer<F>> = encoder.iter().chain(&decoder).collect();
        if layers.is_empty() || encoder.is_empty() || decoder.is_empty() {
            return Err(Error::Argument("autoencoder needs encoder and decoder layers".into()));
        }
        for l in &layers {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::Argument("layer parameter count does not match its shape".into()));
            }
        }
        if let Some(w) = layers.windows(2).find(|w| w[0].outputs != w[1].inputs) {
            return Err(Error::Argument(format!(
                "layer shapes do not compose ({} outputs feed {} inputs)",
                w[0].outputs, w[1].inputs
            )));
        }
        if layers[0].inputs != layers[layers.len() - 1].outputs {
            return Err(Error::Argument("decoder output width differs from encoder input width".into()));
        }
        Ok(Self {
            encoder,
            decoder,
            initial_loss: F::zero(),
            loss_history: Vec::new(),
            hyperparams: AeHyperparams::default(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].inputs
    }

    pub fn code_dim(&self) -> usize {
        self.encoder[self.encoder.len() - 1].outputs
    }

    fn layers(&self) -> impl Iterator<Item = &DenseLayer<F>> {
        self.encoder.iter().chain(&self.decoder)
    }

    /// Encoder forward pass.
    pub fn embed(&self, y: &[F]) -> Result<Vec<F>> {
        if y.len() != self.input_dim() {
            return Err(Error::Argument(format!(
                "autoencoder expects {} inputs, got {}",
                self.input_dim(),
                y.len()
            )));
        }
        Ok(self.encoder.iter().fold(y.to_vec(), |x, l| l.forward(&x)))
    }

    pub fn reconstruct(&self, y: &[F]) -> Result<Vec<F>> {
        let code = self.embed(y)?;
        Ok(self.decoder.iter().fold(code, |x, l| l.forward(&x)))
    }

    /// Mean squared reconstruction error over rows and variables.
    pub fn reconstruction_mse(&self, rows: &[Vec<F>]) -> Result<F> {
        let mut total = F::zero();
        for r in rows {
            let out = self.reconstruct(r)?;
            total += out.iter().zip(r).map(|(&o, &x)| (o - x) * (o - x)).sum::<F>();
        }
        Ok(total / F::from_usize_lossy(rows.len() * self.input_dim()))
    }

    /// Layers whose activations carry the L1 penalty: the first of the
    /// encoder and the first of the decoder.
    fn penalized(&self, layer: usize) -> bool {
        layer == 0 || layer == self.encoder.len()
    }

    fn forward_tape(&self, x: &[F], tape: &mut Tape<F>) {
        for (i, l) in self.layers().enumerate() {
            let (done, rest) = tape.a.split_at_mut(i);
            let input: &[F] = if i == 0 { x } else { &done[i - 1] };
            l.forward_into(input, &mut tape.z[i], &mut rest[0]);
        }
    }

    /// Reconstruction MSE plus the activity penalty, averaged over rows.
    fn objective(&self, rows: &[Vec<F>], l1: F) -> F {
        let mut tape = self.new_tape();
        let mut sq = F::zero();
        let mut act = F::zero();
        let last = self.encoder.len() + self.decoder.len() - 1;
        for r in rows {
            self.forward_tape(r, &mut tape);
            sq += tape.a[last].iter().zip(r).map(|(&o, &x)| (o - x) * (o - x)).sum::<F>();
            for i in 0..=last {
                if self.penalized(i) {
                    act += tape.a[i].iter().map(|v| v.abs()).sum::<F>();
                }
            }
        }
        let n = F::from_usize_lossy(rows.len());
        sq / (n * F::from_usize_lossy(self.input_dim())) + l1 * act / n
    }

    fn new_tape(&self) -> Tape<F> {
        Tape {
            z: self.layers().map(|l| vec![F::zero(); l.outputs]).collect(),
            a: self.layers().map(|l| vec![F::zero(); l.outputs]).collect(),
        }
    }

    /// Trains on rows already scaled to [0, 1] by mini-batch Adagrad.
    pub fn fit(rows: &[Vec<F>], k: usize, hp: &AeHyperparams) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.len());
        if m == 0 || k == 0 {
            return Err(Error::Argument("autoencoder needs non-empty inputs and k >= 1".into()));
        }
        if hp.batch_size == 0 || rows.len() < hp.batch_size {
            return Err(Error::Argument(format!(
                "autoencoder needs at least batch_size = {} rows, got {}",
                hp.batch_size,
                rows.len()
            )));
        }
        if hp.hidden == 0 || hp.learning_rate <= 0.0 || hp.init_std <= 0.0 {
            return Err(Error::Argument("hidden, learning_rate and init_std must be positive".into()));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Argument("autoencoder rows have inconsistent widths".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        let h = hp.hidden;
        let encoder = vec![
            DenseLayer::random(m, h, hp.hidden_activation, hp.init_std, &mut rng),
            DenseLayer::random(h, k, hp.code_activation, hp.init_std, &mut rng),
        ];
        let decoder = vec![
            DenseLayer::random(k, h, hp.hidden_activation, hp.init_std, &mut rng),
            DenseLayer::random(h, m, hp.output_activation, hp.init_std, &mut rng),
        ];
        let mut model = Self::from_layers(encoder, decoder)?;
        model.hyperparams = hp.clone();

        let l1 = F::lit(hp.l1);
        let lr = F::lit(hp.learning_rate);
        let eps = F::lit(hp.epsilon);
        model.initial_loss = model.objective(rows, l1);

        let n_layers = model.encoder.len() + model.decoder.len();
        let mut grads: Vec<Vec<F>> = model.layers().map(|l| vec![F::zero(); l.param_count()]).collect();
        let mut accum = grads.clone();
        let mut tape = model.new_tape();
        let mut delta: Vec<Vec<F>> = model.layers().map(|l| vec![F::zero(); l.outputs]).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();

        for epoch in 0..hp.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(hp.batch_size) {
                let b = F::from_usize_lossy(batch.len());
                let out_scale = F::lit(2.0) / (b * F::from_usize_lossy(m));
                grads.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = F::zero()));

                for &idx in batch {
                    let x = &rows[idx];
                    model.forward_tape(x, &mut tape);
                    for li in (0..n_layers).rev() {
                        let layer = model.layer(li);
                        // dL/da for this layer's output
                        if li == n_layers - 1 {
                            for o in 0..layer.outputs {
                                delta[li][o] = out_scale * (tape.a[li][o] - x[o]);
                            }
                        } else {
                            let next = model.layer(li + 1);
                            let (head, tail) = delta.split_at_mut(li + 1);
                            let d = &mut head[li];
                            d.iter_mut().for_each(|v| *v = F::zero());
                            for (o, &dn) in tail[0].iter().enumerate() {
                                let w = &next.weights[o * next.inputs..(o + 1) * next.inputs];
                                for (di, &wi) in d.iter_mut().zip(w) {
                                    *di += wi * dn;
                                }
                            }
                        }
                        if model.penalized(li) && hp.l1 > 0.0 {
                            let s = l1 / b;
                            for (d, &a) in delta[li].iter_mut().zip(&tape.a[li]) {
                                *d += s * signum0(a);
                            }
                        }
                        for ((d, &z), &a) in delta[li].iter_mut().zip(&tape.z[li]).zip(&tape.a[li]) {
                            *d *= layer.activation.derivative(z, a);
                        }
                        let input: &[F] = if li == 0 { x } else { &tape.a[li - 1] };
                        let g = &mut grads[li];
                        let nw = layer.inputs * layer.outputs;
                        for o in 0..layer.outputs {
                            let d = delta[li][o];
                            let row = &mut g[o * layer.inputs..(o + 1) * layer.inputs];
                            for (gi, &xi) in row.iter_mut().zip(input) {
                                *gi += d * xi;
                            }
                            g[nw + o] += d;
                        }
                    }
                }

                for li in 0..n_layers {
                    let layer = model.layer_mut(li);
                    let nw = layer.weights.len();
                    let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
                    for ((p, &g), acc) in params.zip(&grads[li]).zip(accum[li].iter_mut()) {
                        *acc += g * g;
                        *p -= lr * g / (acc.sqrt() + eps);
                    }
                    debug_assert_eq!(nw + layer.biases.len(), grads[li].len());
                }
            }
            let loss = model.objective(rows, l1);
            if !loss.is_finite() {
                return Err(Error::Numeric {
                    message: format!("autoencoder loss diverged to {loss}"),
                    epoch: Some(epoch),
                });
            }
            model.loss_history.push(loss);
        }
        Ok(model)
    }

    fn layer(&self, i: usize) -> &DenseLayer<F> {
        let e = self.encoder.len();
        if i < e {
            &self.encoder[i]
        } else {
            &self.decoder[i - e]
        }
    }

    fn layer_mut(&mut self, i: usize) -> &mut DenseLayer<F> {
        let e = self.encoder.len();
        if i < e {
            &mut self.encoder[i]
        } else {
            &mut self.decoder[i - e]
        }
    }
}

#[inline]
fn signum0<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else if x < F::zero() {
        -F::one()
    } else {
        F::zero()
    }
}
