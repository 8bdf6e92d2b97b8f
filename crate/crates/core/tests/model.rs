mod common;

use common::{random_samples, small_config};
use sqf_core::data::Moments;
use sqf_core::model::{
    checkpoint, forward, loss_and_gradients, parameter_count, predict, BatchInputs, Graph, ParamVars, TftConfig,
    TftWeights,
};
use sqf_core::numerics::gradcheck::check_gradients;
use sqf_core::numerics::{NumericsError, Tape, Tensor, Var};
use sqf_core::Error;

fn full_size_config() -> TftConfig {
    TftConfig::new(4, 5, 3, 3)
}

fn numerics(e: Error) -> NumericsError {
    match e {
        Error::Numerics(n) => n,
        other => NumericsError::Invalid(other.to_string()),
    }
}

/// Weights whose names start with any of `prefixes`, and their positions.
fn subset(w: &TftWeights, prefixes: &[&str]) -> Vec<usize> {
    w.names()
        .iter()
        .enumerate()
        .filter(|(_, n)| prefixes.iter().any(|p| n.starts_with(p)))
        .map(|(i, _)| i)
        .collect()
}

/// Registers `vars` at `picked` positions and every other tensor as a constant.
fn param_vars<'w>(tape: &mut Tape, w: &'w TftWeights, picked: &[usize], vars: &[Var]) -> ParamVars<'w> {
    let all = w
        .tensors()
        .iter()
        .enumerate()
        .map(|(i, t)| match picked.iter().position(|&p| p == i) {
            Some(at) => vars[at],
            None => tape.constant(t.clone()),
        })
        .collect();
    ParamVars::from_vars(w, all)
}

/// Random projection to a scalar so normalized outputs still carry gradient.
fn project(tape: &mut Tape, x: Var, seed: u64) -> Result<Var, NumericsError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let shape = tape.shape(x).to_vec();
    let n: usize = shape.iter().product();
    let r = tape.constant(Tensor::new(&shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?);
    let y = tape.mul(x, r)?;
    tape.sum(y)
}

fn assert_probes(name: &str, probes: &[sqf_core::numerics::gradcheck::Probe]) {
    assert!(probes.len() >= 20, "{name}: only {} probes", probes.len());
    for p in probes {
        assert!(p.relative_error <= 1e-4, "{name}: {p:?}");
    }
}

fn check_block(prefixes: &[&str], seed: u64, stage: impl Fn(&mut Graph, &BatchInputs) -> sqf_core::Result<Var>) {
    let config = small_config();
    let w = TftWeights::init(&config, seed).unwrap();
    let samples = random_samples(&config, 3, seed + 1);
    let refs: Vec<_> = samples.iter().collect();
    let inputs = BatchInputs::from_samples(&config, &refs).unwrap();
    let picked = subset(&w, prefixes);
    assert!(!picked.is_empty());
    let params: Vec<Tensor> = picked.iter().map(|&i| w.tensors()[i].clone()).collect();
    let probes = check_gradients(
        &params,
        |tape, vars| {
            let pv = param_vars(tape, &w, &picked, vars);
            let out = {
                let mut g = Graph::new(tape, &pv, &config);
                stage(&mut g, &inputs).map_err(numerics)?
            };
            project(tape, out, 99)
        },
        24,
        1e-5,
        seed,
    )
    .unwrap();
    assert_probes(&prefixes.join(","), &probes);
}

#[test]
fn gated_residual_network_gradients() {
    check_block(&["emb.hist0", "enrich"], 1, |g, inputs| {
        let emb = g.embed_inputs(inputs)?;
        let ctx = emb.historical[1];
        g.grn("enrich", emb.historical[0], Some(ctx))
    });
}

#[test]
fn variable_selection_gradients() {
    check_block(&["vsn.hist", "emb.known"], 2, |g, inputs| {
        let emb = g.embed_inputs(inputs)?;
        let k = 4 * inputs.batch;
        let mut vars = emb.historical.clone();
        for &v in &emb.known {
            vars.push(g.tape.slice(v, 0, 0, k)?);
        }
        let ctx = g.tape.slice(emb.known[0], 0, k, k)?;
        let (combined, weights) = g.select_variables("vsn.hist", &vars, Some(ctx))?;
        Ok(g.tape.concat(&[combined, weights], 1)?)
    });
}

#[test]
fn static_encoder_gradients() {
    check_block(&["emb.static", "vsn.static", "static."], 3, |g, inputs| {
        let emb = g.embed_inputs(inputs)?;
        let (sel, _) = g.select_variables("vsn.static", &emb.statics, None)?;
        let c = g.encode_static(sel)?;
        let parts = [c.selection, c.enrichment, c.cell, c.hidden];
        Ok(g.tape.concat(&parts, 1)?)
    });
}

#[test]
fn sequence_to_sequence_gradients() {
    check_block(&["lstm.", "gate.lstm", "emb.hist"], 4, |g, inputs| {
        let emb = g.embed_inputs(inputs)?;
        let b = inputs.batch;
        let hist = emb.historical[0];
        let fut = g.tape.slice(emb.known[0], 0, 4 * b, 4 * b)?;
        let h0 = g.tape.slice(emb.historical[1], 0, 0, b)?;
        let c0 = g.tape.slice(emb.historical[1], 0, b, b)?;
        g.seq2seq(hist, fut, h0, c0)
    });
}

#[test]
fn temporal_attention_gradients() {
    check_block(&["attn.", "gate.attn", "ff.", "gate.final", "enrich", "emb.known0"], 5, |g, inputs| {
        let emb = g.embed_inputs(inputs)?;
        let b = inputs.batch;
        let ctx = g.tape.slice(emb.historical[0], 0, 0, b)?;
        let out = g.temporal_attention(emb.known[0], ctx)?;
        Ok(out.features)
    });
}

#[test]
fn full_forward_and_loss_gradients() {
    let config = small_config();
    let w = TftWeights::init(&config, 11).unwrap();
    let samples = random_samples(&config, 3, 12);
    let refs: Vec<_> = samples.iter().collect();
    let inputs = BatchInputs::from_samples(&config, &refs).unwrap();
    let target = sqf_core::model::replicated_targets(&refs, 3);
    let probes = check_gradients(
        w.tensors(),
        |tape, vars| {
            let pv = ParamVars::from_vars(&w, vars.to_vec());
            let pass = Graph::new(tape, &pv, &config).forward(&inputs).map_err(numerics)?;
            tape.pinball_sum(pass.prediction, &target, &config.quantiles)
        },
        40,
        1e-5,
        13,
    )
    .unwrap();
    assert_probes("forward", &probes);
}

#[test]
fn training_mode_gradients_with_fixed_dropout_masks() {
    let config = TftConfig { dropout: 0.3, ..small_config() };
    let w = TftWeights::init(&config, 21).unwrap();
    let samples = random_samples(&config, 2, 22);
    let refs: Vec<_> = samples.iter().collect();
    let inputs = BatchInputs::from_samples(&config, &refs).unwrap();
    let target = sqf_core::model::replicated_targets(&refs, 3);
    let probes = check_gradients(
        w.tensors(),
        |tape, vars| {
            let pv = ParamVars::from_vars(&w, vars.to_vec());
            let pass = Graph::training(tape, &pv, &config, 5).forward(&inputs).map_err(numerics)?;
            tape.pinball_sum(pass.prediction, &target, &config.quantiles)
        },
        24,
        1e-5,
        23,
    )
    .unwrap();
    assert_probes("dropout", &probes);
    // the public helper agrees with the tape's own sweep
    let (loss, grads) = loss_and_gradients(&w, &refs, Some(5)).unwrap();
    assert!(loss.is_finite());
    assert_eq!(grads.len(), w.tensors().len());
}

#[test]
fn output_shape_for_default_horizon() {
    let config = full_size_config();
    let w = TftWeights::init(&config, 1).unwrap();
    let s = &random_samples(&config, 1, 2)[0];
    let f = forward(s, &w).unwrap();
    assert_eq!(f.values.len(), 26);
    assert!(f.values.iter().all(|r| r.len() == 3 && r.iter().all(|v| v.is_finite())));
    assert_eq!(f.leads, (1..=26).collect::<Vec<_>>());
    // evaluation mode is deterministic
    assert_eq!(forward(s, &w).unwrap(), f);
}

#[test]
fn future_input_changes_never_reach_earlier_leads() {
    let config = full_size_config();
    let w = TftWeights::init(&config, 3).unwrap();
    let base = random_samples(&config, 1, 4).remove(0);
    let before = forward(&base, &w).unwrap();
    let (k, mx) = (config.encoder_steps, config.known_continuous);
    let tau1 = 20;
    let step = k + tau1 - 1;
    let mut changed = base.clone();
    for n in 0..mx {
        changed.known[step * mx + n] += 3.7;
    }
    changed.known_categories[step] = (changed.known_categories[step] + 5) % 12;
    let after = forward(&changed, &w).unwrap();
    for tau in 1..tau1 {
        assert_eq!(before.values[tau - 1], after.values[tau - 1], "lead {tau}");
    }
    assert_ne!(before.values[tau1 - 1], after.values[tau1 - 1]);
}

#[test]
fn parameter_count_matches_closed_form() {
    // d = 8, H = 2, static vocabularies 3 and 4, m_z = 2, two known
    // continuous inputs and the month: m_s = 2, m_x = 3.
    let d = 8;
    let grn_dd = 8 * 8 + 8 + 8 * 8 + 8 + 2 * (8 * 8 + 8) + 2 * 8; // 304
    let grn_dd_ctx = grn_dd + 8 * 8; // 368
    let grn_flat = |m: usize, ctx: bool| {
        (m * d) * d + d + if ctx { d * d } else { 0 } + d * d + d + 2 * (d * m + m) + (m * d) * m + m + 2 * m
    };
    let embeddings = (3 + 4) * 8 + (2 + 2) * 16 + 12 * 8;
    let vsn_static = grn_flat(2, false) + 2 * grn_dd;
    let vsn_hist = grn_flat(5, true) + 5 * grn_dd;
    let vsn_fut = grn_flat(3, true) + 3 * grn_dd;
    let lstm = 2 * (8 * 32 * 2 + 32);
    let gate = 2 * (64 + 8) + 16;
    let attention = 2 * 2 * 8 * 4 + 8 * 4 + 4 * 8;
    let heads = 3 * 9;
    let expected = embeddings + vsn_static + vsn_hist + vsn_fut + 4 * grn_dd + lstm + gate + grn_dd_ctx + attention
        + gate
        + grn_dd
        + gate
        + heads;
    let config = small_config();
    assert_eq!(parameter_count(&config), expected);
    assert_eq!(TftWeights::init(&config, 0).unwrap().parameter_count(), expected);
    let big = full_size_config();
    assert_eq!(parameter_count(&big), TftWeights::init(&big, 0).unwrap().parameter_count());
}

#[test]
fn zeroed_head_outputs_its_bias_only() {
    let config = small_config();
    let mut w = TftWeights::init(&config, 8).unwrap();
    let mut samples = random_samples(&config, 5, 9);
    for s in &mut samples {
        s.target_scale = Moments::IDENTITY;
    }
    let before = predict(&w, &samples).unwrap();
    w.get_mut("head1.w").unwrap().data_mut().fill(0.0);
    w.get_mut("head1.b").unwrap().data_mut()[0] = 0.75;
    let after = predict(&w, &samples).unwrap();
    for (a, b) in before.iter().zip(&after) {
        for (ra, rb) in a.values.iter().zip(&b.values) {
            assert_eq!(rb[1], 0.75);
            assert_eq!(ra[0], rb[0]);
            assert_eq!(ra[2], rb[2]);
        }
    }
}

#[test]
fn unknown_category_is_a_vocabulary_error() {
    let config = small_config();
    let w = TftWeights::init(&config, 1).unwrap();
    let mut s = random_samples(&config, 1, 2).remove(0);
    s.known_categories[0] = 12;
    assert!(matches!(forward(&s, &w), Err(Error::Vocabulary { id: 12, size: 12, .. })));
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let config = TftConfig { dropout: 0.15, ..small_config() };
    let w = TftWeights::init(&config, 31).unwrap();
    let (bin, manifest) = checkpoint::encode(&w);
    let back = checkpoint::decode(&bin, &manifest).unwrap();
    assert_eq!(back, w);
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("model");
    checkpoint::save(&stem, &w).unwrap();
    let loaded = checkpoint::load(&stem).unwrap();
    for (a, b) in loaded.tensors().iter().zip(w.tensors()) {
        let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a), bits(b));
    }
    assert!(manifest.contains("tensor head2.b 1 "));
    let mut corrupt = bin.clone();
    corrupt[0] = b'X';
    assert!(checkpoint::decode(&corrupt, &manifest).is_err());
}
