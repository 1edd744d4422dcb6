//! Embedding + single-layer LSTM + softmax projection, with sampling and
//! exact reverse-mode gradients of weighted log-likelihoods.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::math::{add_outer, masked_softmax, matvec, matvec_t, sigmoid, TensorSpec};
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDims {
    pub vocab: usize,
    pub emb: usize,
    pub hid: usize,
}

impl GeneratorDims {
    fn gate_inputs(&self) -> usize {
        self.emb + self.hid
    }

    pub fn layout(&self) -> Vec<TensorSpec> {
        let (v, e, h) = (self.vocab, self.emb, self.hid);
        TensorSpec::sequential(&[
            ("embedding", vec![v, e]),
            ("gate_weights", vec![4 * h, e + h]),
            ("gate_bias", vec![4 * h]),
            ("output_weights", vec![v, h]),
            ("output_bias", vec![v]),
        ])
    }

    pub fn parameter_count(&self) -> usize {
        self.layout().last().map(|t| t.offset + t.len()).unwrap_or(0)
    }
}

/// Flat parameter vector for the generator; gates are stacked in the order
/// input, forget, cell, output.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub dims: GeneratorDims,
    pub data: Vec<f64>,
}

struct Offsets {
    emb: usize,
    w: usize,
    b: usize,
    wo: usize,
    bo: usize,
}

impl GeneratorParams {
    pub fn zeros(dims: GeneratorDims) -> GeneratorParams {
        GeneratorParams {
            dims,
            data: vec![0.0; dims.parameter_count()],
        }
    }

    /// Uniform(−1/√hid, 1/√hid) weights, forget-gate bias one.
    pub fn init(dims: GeneratorDims, seed: u64) -> GeneratorParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (dims.hid as f64).sqrt();
        let mut p = GeneratorParams::zeros(dims);
        for x in p.data.iter_mut() {
            *x = rng.gen_range(-scale..scale);
        }
        let o = p.offsets();
        let h = dims.hid;
        p.data[o.b..o.b + 4 * h].iter_mut().for_each(|x| *x = 0.0);
        p.data[o.b + h..o.b + 2 * h].iter_mut().for_each(|x| *x = 1.0);
        p.data[o.bo..o.bo + dims.vocab].iter_mut().for_each(|x| *x = 0.0);
        p
    }

    pub fn from_data(dims: GeneratorDims, data: Vec<f64>) -> Result<GeneratorParams, NeuralError> {
        if data.len() != dims.parameter_count() {
            return Err(NeuralError::ShapeMismatch {
                expected: dims.parameter_count(),
                found: data.len(),
            });
        }
        Ok(GeneratorParams { dims, data })
    }

    fn offsets(&self) -> Offsets {
        let l = self.dims.layout();
        Offsets {
            emb: l[0].offset,
            w: l[1].offset,
            b: l[2].offset,
            wo: l[3].offset,
            bo: l[4].offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl GeneratorState {
    pub fn zeros(hid: usize) -> GeneratorState {
        GeneratorState {
            h: vec![0.0; hid],
            c: vec![0.0; hid],
        }
    }
}

struct StepCache {
    token: usize,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// activated gates i, f, g, o stacked
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    probs: Vec<f64>,
}

fn lstm_forward(p: &GeneratorParams, state: &GeneratorState, token: usize) -> Result<(StepCache, Vec<f64>, GeneratorState), NeuralError> {
    let d = p.dims;
    if token >= d.vocab {
        return Err(NeuralError::IndexOutOfVocab(token));
    }
    let o = p.offsets();
    let h = d.hid;
    let mut input = Vec::with_capacity(d.gate_inputs());
    input.extend_from_slice(&p.data[o.emb + token * d.emb..o.emb + (token + 1) * d.emb]);
    input.extend_from_slice(&state.h);
    let mut z = p.data[o.b..o.b + 4 * h].to_vec();
    matvec(&p.data[o.w..o.w + 4 * h * d.gate_inputs()], &input, &mut z);
    let mut gates = z;
    for k in 0..h {
        gates[k] = sigmoid(gates[k]);
        gates[h + k] = sigmoid(gates[h + k]);
        gates[2 * h + k] = gates[2 * h + k].tanh();
        gates[3 * h + k] = sigmoid(gates[3 * h + k]);
    }
    let mut c = vec![0.0; h];
    let mut tanh_c = vec![0.0; h];
    let mut hn = vec![0.0; h];
    for k in 0..h {
        c[k] = gates[h + k] * state.c[k] + gates[k] * gates[2 * h + k];
        tanh_c[k] = c[k].tanh();
        hn[k] = gates[3 * h + k] * tanh_c[k];
    }
    let mut logits = p.data[o.bo..o.bo + d.vocab].to_vec();
    matvec(&p.data[o.wo..o.wo + d.vocab * h], &hn, &mut logits);
    let next = GeneratorState { h: hn.clone(), c };
    let cache = StepCache {
        token,
        h_prev: state.h.clone(),
        c_prev: state.c.clone(),
        gates,
        tanh_c,
        h: hn,
        probs: Vec::new(),
    };
    Ok((cache, logits, next))
}

/// One embedding lookup, LSTM cell update and output projection.
pub fn generator_step(
    params: &GeneratorParams,
    state: &GeneratorState,
    token: usize,
) -> Result<(Vec<f64>, GeneratorState), NeuralError> {
    let (_, logits, next) = lstm_forward(params, state, token)?;
    Ok((logits, next))
}

/// Next-token distribution restricted to the allowed tokens.
pub fn next_distribution(
    params: &GeneratorParams,
    state: &GeneratorState,
    token: usize,
    allowed: &[bool],
) -> Result<(Vec<f64>, GeneratorState), NeuralError> {
    let (logits, next) = generator_step(params, state, token)?;
    Ok((masked_softmax(&logits, allowed), next))
}

pub fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Sampling policy constraints shared by generation, rollouts and
/// likelihood evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    /// tokens the policy may emit
    pub allowed: Vec<bool>,
    pub eos: Option<usize>,
    /// hard cap on emitted tokens, end token included
    pub max_len: usize,
}

/// Continue sampling from `state` after feeding `last`, appending to `out`
/// until the end token or the length cap.
pub fn continue_sequence<R: Rng>(
    params: &GeneratorParams,
    spec: &PolicySpec,
    mut state: GeneratorState,
    mut last: usize,
    out: &mut Vec<usize>,
    rng: &mut R,
) -> Result<(), NeuralError> {
    while out.len() < spec.max_len {
        if spec.eos.is_some_and(|e| out.last() == Some(&e)) {
            break;
        }
        let (probs, next) = next_distribution(params, &state, last, &spec.allowed)?;
        let tok = sample_index(&probs, rng);
        out.push(tok);
        state = next;
        last = tok;
    }
    Ok(())
}

/// Sample a sequence after the class start token. The result excludes the
/// start token and includes the end token when one was drawn.
pub fn sample_sequence<R: Rng>(
    params: &GeneratorParams,
    spec: &PolicySpec,
    start_token: usize,
    rng: &mut R,
) -> Result<Vec<usize>, NeuralError> {
    let mut out = Vec::new();
    continue_sequence(params, spec, GeneratorState::zeros(params.dims.hid), start_token, &mut out, rng)?;
    Ok(out)
}

/// States after feeding `start` followed by each token of `seq`:
/// `states[k]` is the state once `start, seq[0], ..., seq[k-1]` are consumed
/// (so `states[0]` follows the start token alone).
pub fn prefix_states(
    params: &GeneratorParams,
    start_token: usize,
    seq: &[usize],
) -> Result<Vec<GeneratorState>, NeuralError> {
    let mut states = Vec::with_capacity(seq.len() + 1);
    let (_, mut state) = generator_step(params, &GeneratorState::zeros(params.dims.hid), start_token)?;
    states.push(state.clone());
    for &tok in seq {
        let (_, next) = generator_step(params, &state, tok)?;
        state = next;
        states.push(state.clone());
    }
    Ok(states)
}

fn forward_sequence(
    params: &GeneratorParams,
    allowed: &[bool],
    start_token: usize,
    seq: &[usize],
) -> Result<Vec<StepCache>, NeuralError> {
    let mut state = GeneratorState::zeros(params.dims.hid);
    let mut caches = Vec::with_capacity(seq.len());
    let mut input = start_token;
    for &target in seq {
        if target >= params.dims.vocab {
            return Err(NeuralError::IndexOutOfVocab(target));
        }
        let (mut cache, logits, next) = lstm_forward(params, &state, input)?;
        cache.probs = masked_softmax(&logits, allowed);
        caches.push(cache);
        state = next;
        input = target;
    }
    Ok(caches)
}

/// Σ log p(y_t | y_<t, start) under the masked softmax.
pub fn sequence_log_prob(
    params: &GeneratorParams,
    allowed: &[bool],
    start_token: usize,
    seq: &[usize],
) -> Result<f64, NeuralError> {
    let caches = forward_sequence(params, allowed, start_token, seq)?;
    Ok(caches
        .iter()
        .zip(seq)
        .map(|(c, &y)| c.probs[y].ln())
        .sum())
}

/// Accumulate ∇θ Σ_t w_t · log p(y_t | y_<t) into `grad` by backpropagation
/// through time and return the weighted sum itself.
pub fn weighted_log_prob_grad(
    params: &GeneratorParams,
    allowed: &[bool],
    start_token: usize,
    seq: &[usize],
    weights: &[f64],
    grad: &mut [f64],
) -> Result<f64, NeuralError> {
    if weights.len() != seq.len() {
        return Err(NeuralError::ShapeMismatch {
            expected: seq.len(),
            found: weights.len(),
        });
    }
    if grad.len() != params.data.len() {
        return Err(NeuralError::ShapeMismatch {
            expected: params.data.len(),
            found: grad.len(),
        });
    }
    let caches = forward_sequence(params, allowed, start_token, seq)?;
    let d = params.dims;
    let o = params.offsets();
    let (h, e, gi) = (d.hid, d.emb, d.gate_inputs());
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut total = 0.0;
    let mut dlogits = vec![0.0; d.vocab];
    let mut dz = vec![0.0; 4 * h];
    let mut input = vec![0.0; gi];
    let mut dinput = vec![0.0; gi];
    for t in (0..seq.len()).rev() {
        let cache = &caches[t];
        let y = seq[t];
        let w = weights[t];
        total += w * cache.probs[y].ln();
        for j in 0..d.vocab {
            dlogits[j] = if allowed[j] {
                w * (f64::from(u8::from(j == y)) - cache.probs[j])
            } else {
                0.0
            };
        }
        add_outer(&mut grad[o.wo..o.wo + d.vocab * h], &dlogits, &cache.h);
        for j in 0..d.vocab {
            grad[o.bo + j] += dlogits[j];
        }
        let mut dh = dh_next.clone();
        matvec_t(&params.data[o.wo..o.wo + d.vocab * h], &dlogits, &mut dh);

        let g = &cache.gates;
        for k in 0..h {
            let (ig, fg, cg, og) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
            let tc = cache.tanh_c[k];
            let dc = dh[k] * og * (1.0 - tc * tc) + dc_next[k];
            dz[k] = dc * cg * ig * (1.0 - ig);
            dz[h + k] = dc * cache.c_prev[k] * fg * (1.0 - fg);
            dz[2 * h + k] = dc * ig * (1.0 - cg * cg);
            dz[3 * h + k] = dh[k] * tc * og * (1.0 - og);
            dc_next[k] = dc * fg;
        }
        input[..e].copy_from_slice(&params.data[o.emb + cache.token * e..o.emb + (cache.token + 1) * e]);
        input[e..].copy_from_slice(&cache.h_prev);
        add_outer(&mut grad[o.w..o.w + 4 * h * gi], &dz, &input);
        for k in 0..4 * h {
            grad[o.b + k] += dz[k];
        }
        dinput.iter_mut().for_each(|x| *x = 0.0);
        matvec_t(&params.data[o.w..o.w + 4 * h * gi], &dz, &mut dinput);
        let row = o.emb + cache.token * e;
        for k in 0..e {
            grad[row + k] += dinput[k];
        }
        dh_next.copy_from_slice(&dinput[e..]);
    }
    Ok(total)
}
