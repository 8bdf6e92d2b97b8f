//! Forward pass of the forecaster recorded on a [`Tape`].
//!
//! Sequences are laid out time-major: row `s·B + b` holds step `s` of batch
//! element `b`. Attention reorders to batch-major `[B, steps, d]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::samples::SampleWindow;
use crate::error::{Error, Result};
use crate::numerics::{Tape, Tensor, Var};

use super::config::TftConfig;
use super::weights::TftWeights;

const LN_EPS: f64 = 1e-5;
const MASKED: f64 = -1e9;

/// Weights registered on a tape, looked up by name.
pub struct ParamVars<'w> {
    weights: &'w TftWeights,
    vars: Vec<Var>,
}

impl<'w> ParamVars<'w> {
    /// Registers every tensor as a trainable parameter (`trainable`) or a constant.
    pub fn register(tape: &mut Tape, weights: &'w TftWeights, trainable: bool) -> Self {
        let vars = weights
            .tensors()
            .iter()
            .map(|t| if trainable { tape.parameter(t.clone()) } else { tape.constant(t.clone()) })
            .collect();
        Self { weights, vars }
    }

    /// Uses vars already on the tape, in [`TftWeights::names`] order.
    pub fn from_vars(weights: &'w TftWeights, vars: Vec<Var>) -> Self {
        assert_eq!(vars.len(), weights.tensors().len());
        Self { weights, vars }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn get(&self, name: &str) -> Var {
        let i = self.weights.position(name).unwrap_or_else(|| panic!("no parameter named {name}"));
        self.vars[i]
    }
}

/// Model inputs of a batch, time-major.
#[derive(Clone, Debug)]
pub struct BatchInputs {
    pub batch: usize,
    /// Per static input: category id per batch element.
    pub static_ids: Vec<Vec<usize>>,
    /// Per past input: `encoder_steps · B` values.
    pub historical: Vec<Vec<f64>>,
    /// Per known continuous input: `total_steps · B` values.
    pub known: Vec<Vec<f64>>,
    /// Per known categorical input: `total_steps · B` ids.
    pub known_ids: Vec<Vec<usize>>,
    /// Output scale per batch element: `(mean, std)`.
    pub scale: Vec<(f64, f64)>,
}

impl BatchInputs {
    pub fn from_samples(config: &TftConfig, samples: &[&SampleWindow]) -> Result<Self> {
        let b = samples.len();
        let (k, l) = (config.encoder_steps, config.total_steps());
        let (mz, mkc) = (config.historical_inputs, config.known_continuous);
        if b == 0 {
            return Err(Error::config("batch", "empty batch"));
        }
        for s in samples {
            let ok = s.static_categories.len() == config.static_inputs()
                && s.historical.len() == k * mz
                && s.known.len() == l * mkc
                && s.known_categories.len() == l
                && s.target.len() == config.decoder_steps;
            if !ok {
                return Err(Error::Alignment(format!(
                    "sample at ({}, {}) issued {} does not match the model configuration",
                    s.location.lat,
                    s.location.lon,
                    s.issue
                )));
            }
        }
        let time_major = |steps: usize, width: usize, n: usize, src: &dyn Fn(&SampleWindow) -> &[f64]| {
            let mut out = Vec::with_capacity(steps * b);
            for step in 0..steps {
                for s in samples {
                    out.push(src(s)[step * width + n]);
                }
            }
            out
        };
        Ok(Self {
            batch: b,
            static_ids: (0..config.static_inputs()).map(|i| samples.iter().map(|s| s.static_categories[i]).collect()).collect(),
            historical: (0..mz).map(|n| time_major(k, mz, n, &|s| &s.historical)).collect(),
            known: (0..mkc).map(|n| time_major(l, mkc, n, &|s| &s.known)).collect(),
            known_ids: config
                .known_cardinalities
                .iter()
                .map(|_| (0..l).flat_map(|step| samples.iter().map(move |s| s.known_categories[step])).collect())
                .collect(),
            scale: samples.iter().map(|s| (s.target_scale.mean, s.target_scale.std)).collect(),
        })
    }
}

/// Embedded inputs, each `[rows, d]`.
#[derive(Clone, Debug)]
pub struct Embedded {
    /// `m_s` entries of `[B, d]`.
    pub statics: Vec<Var>,
    /// `m_z` entries of `[k·B, d]`.
    pub historical: Vec<Var>,
    /// `m_x` entries of `[(k+τ_max)·B, d]`.
    pub known: Vec<Var>,
}

/// The four static context vectors, each `[B, d]`.
#[derive(Clone, Copy, Debug)]
pub struct StaticContexts {
    pub selection: Var,
    pub enrichment: Var,
    pub cell: Var,
    pub hidden: Var,
}

/// Outputs of the temporal stage.
#[derive(Clone, Debug)]
pub struct TemporalOutput {
    /// Decoder features `[B·τ_max, d]`, batch-major.
    pub features: Var,
    /// Per-head attention weights `[B, τ_max, k+τ_max]`.
    pub attention: Vec<Var>,
    /// Head-averaged attention weights `[B, τ_max, k+τ_max]`.
    pub attention_mean: Var,
}

/// Everything a forward pass exposes.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    /// `[B, τ_max, |Q|]` in target units.
    pub prediction: Var,
    pub static_weights: Var,
    pub historical_weights: Var,
    pub future_weights: Var,
    pub contexts: StaticContexts,
    pub temporal: TemporalOutput,
}

/// Records forward computations on a tape. `rng` enables dropout.
pub struct Graph<'a, 'w> {
    pub tape: &'a mut Tape,
    params: &'a ParamVars<'w>,
    config: &'a TftConfig,
    rng: Option<ChaCha8Rng>,
}

impl<'a, 'w> Graph<'a, 'w> {
    /// Evaluation mode: no dropout.
    pub fn new(tape: &'a mut Tape, params: &'a ParamVars<'w>, config: &'a TftConfig) -> Self {
        Self { tape, params, config, rng: None }
    }

    /// Training mode with dropout masks drawn from `seed`.
    pub fn training(tape: &'a mut Tape, params: &'a ParamVars<'w>, config: &'a TftConfig, seed: u64) -> Self {
        Self { tape, params, config, rng: Some(ChaCha8Rng::seed_from_u64(seed)) }
    }

    fn p(&self, name: &str) -> Var {
        self.params.get(name)
    }

    fn d(&self) -> usize {
        self.config.hidden
    }

    fn constant(&mut self, shape: &[usize], data: Vec<f64>) -> Result<Var> {
        Ok(self.tape.constant(Tensor::new(shape, data)?))
    }

    fn linear(&mut self, x: Var, w: &str, b: Option<&str>) -> Result<Var> {
        let y = self.tape.matmul(x, self.p(w))?;
        Ok(match b {
            Some(b) => self.tape.add_bias(y, self.p(b))?,
            None => y,
        })
    }

    fn dropout(&mut self, x: Var) -> Result<Var> {
        let p = self.config.dropout;
        let Some(rng) = self.rng.as_mut().filter(|_| p > 0.0) else {
            return Ok(x);
        };
        let shape = self.tape.shape(x).to_vec();
        let n: usize = shape.iter().product();
        let keep = 1.0 / (1.0 - p);
        let mask = (0..n).map(|_| if rng.random::<f64>() < p { 0.0 } else { keep }).collect();
        let m = self.constant(&shape, mask)?;
        Ok(self.tape.mul(x, m)?)
    }

    /// Repeats `[B, d]` rows for `steps` time-major steps.
    fn broadcast(&mut self, x: Var, steps: usize) -> Result<Var> {
        let b = self.tape.shape(x)[0];
        let rows: Vec<usize> = (0..steps).flat_map(|_| 0..b).collect();
        Ok(self.tape.gather_rows(x, &rows)?)
    }

    /// Sigmoid-gated linear unit.
    pub fn glu(&mut self, prefix: &str, x: Var) -> Result<Var> {
        let gate = self.linear(x, &format!("{prefix}.glu.w_gate"), Some(&format!("{prefix}.glu.b_gate")))?;
        let gate = self.tape.sigmoid(gate)?;
        let value = self.linear(x, &format!("{prefix}.glu.w_value"), Some(&format!("{prefix}.glu.b_value")))?;
        Ok(self.tape.mul(gate, value)?)
    }

    fn norm(&mut self, prefix: &str, x: Var) -> Result<Var> {
        let (g, b) = (self.p(&format!("{prefix}.ln.gain")), self.p(&format!("{prefix}.ln.bias")));
        Ok(self.tape.layer_norm(x, g, b, LN_EPS)?)
    }

    /// `LayerNorm(residual + GLU(x))`.
    pub fn gate_add_norm(&mut self, prefix: &str, x: Var, residual: Var) -> Result<Var> {
        let g = self.glu(prefix, x)?;
        let s = self.tape.add(residual, g)?;
        self.norm(prefix, s)
    }

    /// Gated residual network with optional context rows matching `a`.
    pub fn grn(&mut self, prefix: &str, a: Var, context: Option<Var>) -> Result<Var> {
        let mut h = self.linear(a, &format!("{prefix}.w_in"), Some(&format!("{prefix}.b_in")))?;
        if let Some(c) = context {
            let cw = self.linear(c, &format!("{prefix}.w_ctx"), None)?;
            h = self.tape.add(h, cw)?;
        }
        let h = self.tape.elu(h)?;
        let h = self.linear(h, &format!("{prefix}.w_hidden"), Some(&format!("{prefix}.b_hidden")))?;
        let h = self.dropout(h)?;
        let skip_w = format!("{prefix}.skip.w");
        let residual = if self.params.weights.position(&skip_w).is_some() {
            self.linear(a, &skip_w, Some(&format!("{prefix}.skip.b")))?
        } else {
            a
        };
        self.gate_add_norm(prefix, h, residual)
    }

    /// Maps raw inputs to `d`-vectors: linear maps for continuous values,
    /// table lookups for categories.
    pub fn embed_inputs(&mut self, inputs: &BatchInputs) -> Result<Embedded> {
        let c = self.config;
        let lookup = |g: &mut Self, table: &str, ids: &[usize], card: usize| -> Result<Var> {
            if let Some(&bad) = ids.iter().find(|&&id| id >= card) {
                return Err(Error::Vocabulary { input: table.to_string(), id: bad, size: card });
            }
            Ok(g.tape.gather_rows(g.p(table), ids)?)
        };
        let continuous = |g: &mut Self, prefix: &str, values: &[f64]| -> Result<Var> {
            let x = g.constant(&[values.len(), 1], values.to_vec())?;
            g.linear(x, &format!("{prefix}.w"), Some(&format!("{prefix}.b")))
        };
        let mut statics = Vec::new();
        for (i, ids) in inputs.static_ids.iter().enumerate() {
            statics.push(lookup(self, &format!("emb.static{i}"), ids, c.static_cardinalities[i])?);
        }
        let mut historical = Vec::new();
        for (i, v) in inputs.historical.iter().enumerate() {
            historical.push(continuous(self, &format!("emb.hist{i}"), v)?);
        }
        let mut known = Vec::new();
        for (i, v) in inputs.known.iter().enumerate() {
            known.push(continuous(self, &format!("emb.known{i}"), v)?);
        }
        for (i, ids) in inputs.known_ids.iter().enumerate() {
            known.push(lookup(self, &format!("emb.known_cat{i}"), ids, c.known_cardinalities[i])?);
        }
        Ok(Embedded { statics, historical, known })
    }

    /// Softmax-weighted combination of per-variable GRN outputs. Returns the
    /// combined `[rows, d]` features and the `[rows, m]` weights.
    pub fn select_variables(&mut self, prefix: &str, vars: &[Var], context: Option<Var>) -> Result<(Var, Var)> {
        let d = self.d();
        let flat = self.tape.concat(vars, 1)?;
        let logits = self.grn(&format!("{prefix}.flat"), flat, context)?;
        let weights = self.tape.softmax(logits, 1)?;
        let ones = self.constant(&[1, d], vec![1.0; d])?;
        let mut combined = None;
        for (i, &v) in vars.iter().enumerate() {
            let processed = self.grn(&format!("{prefix}.var{i}"), v, None)?;
            let w = self.tape.slice(weights, 1, i, 1)?;
            let w = self.tape.matmul(w, ones)?;
            let term = self.tape.mul(w, processed)?;
            combined = Some(match combined {
                None => term,
                Some(acc) => self.tape.add(acc, term)?,
            });
        }
        Ok((combined.expect("at least one variable"), weights))
    }

    /// Four context vectors from the selected static features `[B, d]`.
    pub fn encode_static(&mut self, selected: Var) -> Result<StaticContexts> {
        Ok(StaticContexts {
            selection: self.grn("static.selection", selected, None)?,
            enrichment: self.grn("static.enrichment", selected, None)?,
            cell: self.grn("static.cell", selected, None)?,
            hidden: self.grn("static.hidden", selected, None)?,
        })
    }

    fn lstm(&mut self, prefix: &str, x: Var, steps: usize, mut h: Var, mut c: Var, out: &mut Vec<Var>) -> Result<(Var, Var)> {
        let d = self.d();
        let b = self.tape.shape(h)[0];
        let xw = self.linear(x, &format!("{prefix}.w_x"), Some(&format!("{prefix}.b")))?;
        let w_h = self.p(&format!("{prefix}.w_h"));
        for s in 0..steps {
            let xs = self.tape.slice(xw, 0, s * b, b)?;
            let hw = self.tape.matmul(h, w_h)?;
            let z = self.tape.add(xs, hw)?;
            let i = self.tape.slice(z, 1, 0, d)?;
            let f = self.tape.slice(z, 1, d, d)?;
            let g = self.tape.slice(z, 1, 2 * d, d)?;
            let o = self.tape.slice(z, 1, 3 * d, d)?;
            let (i, f, o) = (self.tape.sigmoid(i)?, self.tape.sigmoid(f)?, self.tape.sigmoid(o)?);
            let g = self.tape.tanh(g)?;
            let fc = self.tape.mul(f, c)?;
            let ig = self.tape.mul(i, g)?;
            c = self.tape.add(fc, ig)?;
            let tc = self.tape.tanh(c)?;
            h = self.tape.mul(o, tc)?;
            out.push(h);
        }
        Ok((h, c))
    }

    /// Encoder over `historical [k·B, d]`, decoder over `future [τ_max·B, d]`
    /// from the encoder's final state, then gated skip to the inputs and
    /// normalization. Returns `[(k+τ_max)·B, d]`.
    pub fn seq2seq(&mut self, historical: Var, future: Var, h0: Var, c0: Var) -> Result<Var> {
        let (k, t) = (self.config.encoder_steps, self.config.decoder_steps);
        let mut outputs = Vec::with_capacity(k + t);
        let (h, c) = self.lstm("lstm.enc", historical, k, h0, c0, &mut outputs)?;
        self.lstm("lstm.dec", future, t, h, c, &mut outputs)?;
        let lstm_out = self.tape.concat(&outputs, 0)?;
        let inputs = self.tape.concat(&[historical, future], 0)?;
        self.gate_add_norm("gate.lstm", lstm_out, inputs)
    }

    /// Static enrichment, masked interpretable attention from decoder steps,
    /// gated residuals, position-wise GRN and the final gate back to the
    /// temporal features.
    pub fn temporal_attention(&mut self, features: Var, enrichment: Var) -> Result<TemporalOutput> {
        let c = self.config;
        let (k, t, l, d, da) = (c.encoder_steps, c.decoder_steps, c.total_steps(), c.hidden, c.head_size());
        let b = self.tape.shape(enrichment)[0];
        let ctx = self.broadcast(enrichment, l)?;
        let enriched = self.grn("enrich", features, Some(ctx))?;

        // batch-major views
        let all_rows: Vec<usize> = (0..b).flat_map(|bi| (0..l).map(move |s| s * b + bi)).collect();
        let dec_rows: Vec<usize> = (0..b).flat_map(|bi| (k..l).map(move |s| s * b + bi)).collect();
        let keys_in = self.tape.gather_rows(enriched, &all_rows)?;
        let queries_in = self.tape.gather_rows(enriched, &dec_rows)?;

        let mut mask = vec![0.0; b * t * l];
        for bi in 0..b {
            for i in 0..t {
                for j in (k + i + 1)..l {
                    mask[(bi * t + i) * l + j] = MASKED;
                }
            }
        }
        let mask = self.constant(&[b, t, l], mask)?;
        let values = self.linear(keys_in, "attn.v", None)?;
        let values = self.tape.reshape(values, &[b, l, da])?;
        let mut heads = Vec::with_capacity(c.heads);
        let mut head_sum: Option<Var> = None;
        let mut weight_sum: Option<Var> = None;
        for h in 0..c.heads {
            let q = self.linear(queries_in, &format!("attn.q{h}"), None)?;
            let q = self.tape.reshape(q, &[b, t, da])?;
            let key = self.linear(keys_in, &format!("attn.k{h}"), None)?;
            let key = self.tape.reshape(key, &[b, l, da])?;
            let scores = self.tape.batch_matmul(q, key, true)?;
            let scores = self.tape.scale(scores, 1.0 / (da as f64).sqrt())?;
            let scores = self.tape.add(scores, mask)?;
            let a = self.tape.softmax(scores, 2)?;
            heads.push(a);
            let out = self.tape.batch_matmul(a, values, false)?;
            head_sum = Some(match head_sum {
                None => out,
                Some(acc) => self.tape.add(acc, out)?,
            });
            weight_sum = Some(match weight_sum {
                None => a,
                Some(acc) => self.tape.add(acc, a)?,
            });
        }
        let inv = 1.0 / c.heads as f64;
        let averaged = self.tape.scale(head_sum.expect("at least one head"), inv)?;
        let attention_mean = self.tape.scale(weight_sum.expect("at least one head"), inv)?;
        let averaged = self.tape.reshape(averaged, &[b * t, da])?;
        let attended = self.linear(averaged, "attn.o", None)?;
        let attended = self.dropout(attended)?;
        debug_assert_eq!(self.tape.shape(attended), [b * t, d]);

        let gated = self.gate_add_norm("gate.attn", attended, queries_in)?;
        let ff = self.grn("ff", gated, None)?;
        let skip = self.tape.gather_rows(features, &dec_rows)?;
        let out = self.gate_add_norm("gate.final", ff, skip)?;
        Ok(TemporalOutput { features: out, attention: heads, attention_mean })
    }

    /// Per-quantile linear heads on `[B·τ_max, d]`; returns `[B, τ_max, |Q|]`
    /// in standardized units.
    pub fn quantile_heads(&mut self, features: Var, batch: usize) -> Result<Var> {
        let nq = self.config.quantiles.len();
        let mut outs = Vec::with_capacity(nq);
        for q in 0..nq {
            outs.push(self.linear(features, &format!("head{q}.w"), Some(&format!("head{q}.b")))?);
        }
        let y = self.tape.concat(&outs, 1)?;
        Ok(self.tape.reshape(y, &[batch, self.config.decoder_steps, nq])?)
    }

    /// All stages plus output scaling `ŷ = mean + std · head`.
    pub fn forward(&mut self, inputs: &BatchInputs) -> Result<ForwardPass> {
        let c = self.config;
        let (k, t, l) = (c.encoder_steps, c.decoder_steps, c.total_steps());
        let b = inputs.batch;
        let emb = self.embed_inputs(inputs)?;

        let (static_sel, static_weights) = self.select_variables("vsn.static", &emb.statics, None)?;
        let contexts = self.encode_static(static_sel)?;

        let mut past = emb.historical.clone();
        let mut future = Vec::with_capacity(emb.known.len());
        for &v in &emb.known {
            past.push(self.tape.slice(v, 0, 0, k * b)?);
            future.push(self.tape.slice(v, 0, k * b, t * b)?);
        }
        let ctx_past = self.broadcast(contexts.selection, k)?;
        let (hist_sel, historical_weights) = self.select_variables("vsn.hist", &past, Some(ctx_past))?;
        let ctx_future = self.broadcast(contexts.selection, t)?;
        let (fut_sel, future_weights) = self.select_variables("vsn.fut", &future, Some(ctx_future))?;
        debug_assert_eq!(self.tape.shape(hist_sel)[0] + self.tape.shape(fut_sel)[0], l * b);

        let temporal_in = self.seq2seq(hist_sel, fut_sel, contexts.hidden, contexts.cell)?;
        let temporal = self.temporal_attention(temporal_in, contexts.enrichment)?;
        let raw = self.quantile_heads(temporal.features, b)?;

        let nq = c.quantiles.len();
        let per = t * nq;
        let std = inputs.scale.iter().flat_map(|&(_, s)| std::iter::repeat_n(s, per)).collect();
        let mean = inputs.scale.iter().flat_map(|&(m, _)| std::iter::repeat_n(m, per)).collect();
        let std = self.constant(&[b, t, nq], std)?;
        let mean = self.constant(&[b, t, nq], mean)?;
        let scaled = self.tape.mul(raw, std)?;
        let prediction = self.tape.add(scaled, mean)?;
        Ok(ForwardPass { prediction, static_weights, historical_weights, future_weights, contexts, temporal })
    }
}
