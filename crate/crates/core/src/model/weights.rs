use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::Tensor;

use super::config::TftConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Init {
    /// `U(-1/√fan_in, 1/√fan_in)` with fan-in taken from the first dimension.
    Uniform,
    Zeros,
    Ones,
    /// Zeros with `+1` on the forget-gate block of an LSTM bias.
    ForgetBias,
}

struct Layout {
    d: usize,
    entries: Vec<(String, Vec<usize>, Init)>,
}

impl Layout {
    fn add(&mut self, name: String, shape: Vec<usize>, init: Init) {
        self.entries.push((name, shape, init));
    }

    fn glu(&mut self, p: &str, n_in: usize, n_out: usize) {
        self.add(format!("{p}.glu.w_gate"), vec![n_in, n_out], Init::Uniform);
        self.add(format!("{p}.glu.b_gate"), vec![n_out], Init::Zeros);
        self.add(format!("{p}.glu.w_value"), vec![n_in, n_out], Init::Uniform);
        self.add(format!("{p}.glu.b_value"), vec![n_out], Init::Zeros);
    }

    fn norm(&mut self, p: &str, n: usize) {
        self.add(format!("{p}.ln.gain"), vec![n], Init::Ones);
        self.add(format!("{p}.ln.bias"), vec![n], Init::Zeros);
    }

    fn gate_norm(&mut self, p: &str) {
        self.glu(p, self.d, self.d);
        self.norm(p, self.d);
    }

    fn grn(&mut self, p: &str, n_in: usize, n_out: usize, context: bool) {
        let d = self.d;
        self.add(format!("{p}.w_in"), vec![n_in, d], Init::Uniform);
        self.add(format!("{p}.b_in"), vec![d], Init::Zeros);
        if context {
            self.add(format!("{p}.w_ctx"), vec![d, d], Init::Uniform);
        }
        self.add(format!("{p}.w_hidden"), vec![d, d], Init::Uniform);
        self.add(format!("{p}.b_hidden"), vec![d], Init::Zeros);
        self.glu(p, d, n_out);
        if n_in != n_out {
            self.add(format!("{p}.skip.w"), vec![n_in, n_out], Init::Uniform);
            self.add(format!("{p}.skip.b"), vec![n_out], Init::Zeros);
        }
        self.norm(p, n_out);
    }

    fn vsn(&mut self, p: &str, m: usize, context: bool) {
        let d = self.d;
        self.grn(&format!("{p}.flat"), m * d, m, context);
        for i in 0..m {
            self.grn(&format!("{p}.var{i}"), d, d, false);
        }
    }

    fn lstm(&mut self, p: &str) {
        let d = self.d;
        self.add(format!("{p}.w_x"), vec![d, 4 * d], Init::Uniform);
        self.add(format!("{p}.w_h"), vec![d, 4 * d], Init::Uniform);
        self.add(format!("{p}.b"), vec![4 * d], Init::ForgetBias);
    }
}

fn layout(c: &TftConfig) -> Layout {
    let d = c.hidden;
    let mut l = Layout { d, entries: Vec::new() };
    for (i, &card) in c.static_cardinalities.iter().enumerate() {
        l.add(format!("emb.static{i}"), vec![card, d], Init::Uniform);
    }
    for i in 0..c.historical_inputs {
        l.add(format!("emb.hist{i}.w"), vec![1, d], Init::Uniform);
        l.add(format!("emb.hist{i}.b"), vec![d], Init::Zeros);
    }
    for i in 0..c.known_continuous {
        l.add(format!("emb.known{i}.w"), vec![1, d], Init::Uniform);
        l.add(format!("emb.known{i}.b"), vec![d], Init::Zeros);
    }
    for (i, &card) in c.known_cardinalities.iter().enumerate() {
        l.add(format!("emb.known_cat{i}"), vec![card, d], Init::Uniform);
    }
    l.vsn("vsn.static", c.static_inputs(), false);
    l.vsn("vsn.hist", c.historical_inputs + c.known_inputs(), true);
    l.vsn("vsn.fut", c.known_inputs(), true);
    for name in ["static.selection", "static.enrichment", "static.cell", "static.hidden"] {
        l.grn(name, d, d, false);
    }
    l.lstm("lstm.enc");
    l.lstm("lstm.dec");
    l.gate_norm("gate.lstm");
    l.grn("enrich", d, d, true);
    let da = c.head_size();
    for h in 0..c.heads {
        l.add(format!("attn.q{h}"), vec![d, da], Init::Uniform);
        l.add(format!("attn.k{h}"), vec![d, da], Init::Uniform);
    }
    l.add("attn.v".into(), vec![d, da], Init::Uniform);
    l.add("attn.o".into(), vec![da, d], Init::Uniform);
    l.gate_norm("gate.attn");
    l.grn("ff", d, d, false);
    l.gate_norm("gate.final");
    for q in 0..c.quantiles.len() {
        l.add(format!("head{q}.w"), vec![d, 1], Init::Uniform);
        l.add(format!("head{q}.b"), vec![1], Init::Zeros);
    }
    l
}

/// All trainable parameters, addressable by name.
#[derive(Clone, Debug, PartialEq)]
pub struct TftWeights {
    config: TftConfig,
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: HashMap<String, usize>,
}

impl TftWeights {
    /// Randomly initialized weights.
    pub fn init(config: &TftConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.hidden;
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (name, shape, init) in layout(config).entries {
            let n: usize = shape.iter().product();
            let data = match init {
                Init::Uniform => {
                    let bound = 1.0 / (shape[0] as f64).sqrt();
                    (0..n).map(|_| rng.random_range(-bound..bound)).collect()
                }
                Init::Zeros => vec![0.0; n],
                Init::Ones => vec![1.0; n],
                Init::ForgetBias => (0..n).map(|i| if (d..2 * d).contains(&i) { 1.0 } else { 0.0 }).collect(),
            };
            names.push(name);
            tensors.push(Tensor::new(&shape, data)?);
        }
        Self::from_parts(config.clone(), names, tensors)
    }

    /// Reassembles weights, checking names and shapes against `config`.
    pub fn from_parts(config: TftConfig, names: Vec<String>, tensors: Vec<Tensor>) -> Result<Self> {
        config.validate()?;
        let expected = layout(&config).entries;
        if expected.len() != names.len() || names.len() != tensors.len() {
            return Err(Error::Checkpoint(format!("expected {} tensors, got {}", expected.len(), names.len())));
        }
        for ((name, shape, _), (n, t)) in expected.iter().zip(names.iter().zip(&tensors)) {
            if name != n || shape.as_slice() != t.shape() {
                return Err(Error::Checkpoint(format!("tensor {n} {:?} does not match {name} {shape:?}", t.shape())));
            }
        }
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Ok(Self { config, names, tensors, index })
    }

    pub fn config(&self) -> &TftConfig {
        &self.config
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index.get(name).map(|&i| &mut self.tensors[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }
}

/// Closed-form number of scalar parameters for `c`.
pub fn parameter_count(c: &TftConfig) -> usize {
    let d = c.hidden;
    let gate_norm = 2 * (d * d + d) + 2 * d;
    let grn = |n_in: usize, n_out: usize, ctx: bool| {
        n_in * d + d + if ctx { d * d } else { 0 } + d * d + d + 2 * (d * n_out + n_out)
            + if n_in != n_out { n_in * n_out + n_out } else { 0 }
            + 2 * n_out
    };
    let vsn = |m: usize, ctx: bool| grn(m * d, m, ctx) + m * grn(d, d, false);
    let (ms, mz, mx) = (c.static_inputs(), c.historical_inputs, c.known_inputs());
    let embeddings = c.static_cardinalities.iter().sum::<usize>() * d
        + (mz + c.known_continuous) * 2 * d
        + c.known_cardinalities.iter().sum::<usize>() * d;
    let lstm = 2 * (2 * d * 4 * d + 4 * d);
    let attention = 2 * c.heads * d * c.head_size() + d * c.head_size() + c.head_size() * d;
    embeddings
        + vsn(ms, false)
        + vsn(mz + mx, true)
        + vsn(mx, true)
        + 4 * grn(d, d, false)
        + lstm
        + gate_norm
        + grn(d, d, true)
        + attention
        + gate_norm
        + grn(d, d, false)
        + gate_norm
        + c.quantiles.len() * (d + 1)
}
